use num_complex::Complex;
use rayon::prelude::*;

use crate::effective1d::EffectiveSolution;
use crate::error::{Error, Result};
use crate::geometry::{cutoff_chi, Vec2};
use crate::gl2d::{depth_cutoff, GLResult, GaugePhase, Grid2D, VectorPotential2D};
use crate::scalar::Real;

/// Below this `f★` the quotient `u = ψ/f★` is not formed.
const F_FLOOR: f64 = 1e-10;

/// Uniform grid in rescaled boundary coordinates on the cut layer: every cut
/// interval gets its own `s` nodes (both ends included), the `t` nodes are
/// shared and run over `[0, T]`.
#[derive(Clone, Debug)]
pub struct LayerGrid<T> {
    pub s: Vec<T>,
    /// Trapezoid weights in `s`, per interval.
    pub ws: Vec<T>,
    pub interval: Vec<usize>,
    /// Spacing of each interval.
    pub hs: Vec<T>,
    pub t: Vec<T>,
    pub ht: T,
}

impl<T: Real> LayerGrid<T> {
    /// Intervals are given in rescaled arc length; spacings are at most
    /// `hs` and `ht`.
    pub fn new(intervals: &[(T, T)], depth: T, hs: T, ht: T) -> Result<Self> {
        if intervals.is_empty() || !(hs > T::zero()) || !(ht > T::zero()) || !(depth > ht) {
            return Err(Error::InvalidInput(
                "layer grid needs intervals, positive spacings and depth > ht".into(),
            ));
        }
        let mut s = Vec::new();
        let mut ws = Vec::new();
        let mut interval = Vec::new();
        let mut steps = Vec::new();
        for (m, &(lo, hi)) in intervals.iter().enumerate() {
            let n = ((hi - lo) / hs).ceil().to_usize().unwrap_or(1).max(1);
            let h = (hi - lo) / T::from_usize_lossy(n);
            for i in 0..=n {
                s.push(lo + h * T::from_usize_lossy(i));
                ws.push(if i == 0 || i == n { h * T::lit(0.5) } else { h });
                interval.push(m);
            }
            steps.push(h);
        }
        let nt = (depth / ht).ceil().to_usize().unwrap_or(1).max(1);
        let ht = depth / T::from_usize_lossy(nt);
        let t = (0..=nt).map(|k| ht * T::from_usize_lossy(k)).collect();
        Ok(Self {
            s,
            ws,
            interval,
            hs: steps,
            t,
            ht,
        })
    }

    pub fn nt(&self) -> usize {
        self.t.len()
    }

    pub fn wt(&self, k: usize) -> T {
        if k == 0 || k + 1 == self.t.len() {
            self.ht * T::lit(0.5)
        } else {
            self.ht
        }
    }

    /// `Σ ws · T`.
    pub fn area(&self) -> T {
        self.ws.iter().copied().fold(T::zero(), |a, b| a + b) * self.t[self.t.len() - 1]
    }

    /// Whether nodes `i` and `i + 1` form an `s` link.
    fn linked(&self, i: usize) -> bool {
        i + 1 < self.s.len() && self.interval[i] == self.interval[i + 1]
    }
}

/// Model layer functional with `a = −t` and flat metric,
///
/// `Σ |∂_t ψ|² + |(∂_s − it)ψ|² − (2|ψ|² − |ψ|⁴)/(2b)`,
///
/// with link differences in `s` and `t` and trapezoid weights.
/// `psi[i * nt + k]` is the value at `(s_i, t_k)`.
pub fn layer_functional<T: Real>(lg: &LayerGrid<T>, psi: &[Complex<T>], b: T) -> T {
    let nt = lg.nt();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let parts: Vec<T> = (0..lg.s.len())
        .into_par_iter()
        .map(|i| {
            let row = &psi[i * nt..(i + 1) * nt];
            let mut e = T::zero();
            for k in 0..nt - 1 {
                e = e + lg.ws[i] * (row[k + 1] - row[k]).norm_sqr() / lg.ht;
            }
            for k in 0..nt {
                let r = row[k].norm_sqr();
                e = e - lg.ws[i] * lg.wt(k) * (two * r - r * r) * half / b;
            }
            if lg.linked(i) {
                let hs = lg.hs[lg.interval[i]];
                let next = &psi[(i + 1) * nt..(i + 2) * nt];
                for k in 0..nt {
                    let th = -lg.t[k] * hs;
                    let d = next[k] * Complex::new(th.cos(), th.sin()) - row[k];
                    e = e + lg.wt(k) * d.norm_sqr() / hs;
                }
            }
            e
        })
        .collect();
    parts.into_iter().fold(T::zero(), |a, b| a + b)
}

/// `E[u]` and its lower term `(1/2b)∫f⁴(1 − |u|²)²` on a layer grid, with
/// `f[k] = f★(t_k)` and `c = t + α`:
///
/// `E[u] = ∫ f²|∂_t u|² + f²(|∂_s u|² − 2c Im(ū ∂_s u)) + (1/2b) f⁴(1 − |u|²)²`.
///
/// The discretization follows [`layer_functional`] for `ψ = f u e^{−iαs}`:
/// `t` links carry `f_k f_{k+1}|Δu|²/h_t`, `s` links
/// `f²(|u_{i+1}e^{−ich_s} − u_i|² − (1 − cos ch_s)(|u_i|² + |u_{i+1}|²))/h_s`,
/// which vanishes for `u ≡ 1`. The identity
/// `layer_functional = |∂Ω_cut|E★/ε + E[u]` then holds up to `O(h²)` and the
/// truncation of `f★⁴` at the layer depth.
pub fn split_functional<T: Real>(lg: &LayerGrid<T>, f: &[T], alpha: T, u: &[Complex<T>], b: T) -> (T, T) {
    let nt = lg.nt();
    let half = T::lit(0.5);
    let parts: Vec<(T, T)> = (0..lg.s.len())
        .into_par_iter()
        .map(|i| {
            let row = &u[i * nt..(i + 1) * nt];
            let mut grad = T::zero();
            let mut low = T::zero();
            for k in 0..nt - 1 {
                grad = grad + lg.ws[i] * f[k] * f[k + 1] * (row[k + 1] - row[k]).norm_sqr() / lg.ht;
            }
            for k in 0..nt {
                let m = T::one() - row[k].norm_sqr();
                low = low + lg.ws[i] * lg.wt(k) * f[k].powi(4) * m * m * half / b;
            }
            if lg.linked(i) {
                let hs = lg.hs[lg.interval[i]];
                let next = &u[(i + 1) * nt..(i + 2) * nt];
                for k in 0..nt {
                    let c = lg.t[k] + alpha;
                    let th = -c * hs;
                    let d = next[k] * Complex::new(th.cos(), th.sin()) - row[k];
                    let drift = (T::one() - th.cos()) * (row[k].norm_sqr() + next[k].norm_sqr());
                    grad = grad + lg.wt(k) * f[k] * f[k] * (d.norm_sqr() - drift) / hs;
                }
            }
            (grad, low)
        })
        .collect();
    let (grad, low) = parts
        .into_iter()
        .fold((T::zero(), T::zero()), |(a, b), (c, d)| (a + c, b + d));
    (grad + low, low)
}

#[derive(Clone, Debug)]
pub struct SplitReport<T> {
    /// `E[u]`.
    pub eu: T,
    /// `(1/2b)∫f★⁴(1 − |u|²)²`.
    pub lower: T,
    /// Model layer functional of the cut-off field.
    pub layer_energy: T,
    /// `|∂Ω_cut| E★/ε`.
    pub predicted: T,
    /// `|layer_energy − predicted − eu|`.
    pub identity_residual: T,
    /// `max(1e−6, 10 h² |A_cut|)` in rescaled units, `h = max(h_s, h_t)`.
    pub tol_quad: T,
    pub hs: T,
    pub ht: T,
}

impl<T: Real> SplitReport<T> {
    pub fn identity_holds(&self) -> bool {
        self.identity_residual <= self.tol_quad
    }

    /// `E[u] ≥ lower − tol_quad`.
    pub fn lower_bound_holds(&self) -> bool {
        self.eu >= self.lower - self.tol_quad
    }
}

/// Gauge-covariant bilinear interpolation of a cell field at `p`: each of
/// the four surrounding active cells is parallel transported to `p` along
/// the straight segment. Weights are renormalized over active cells; zero
/// when none is active.
pub fn interpolate_covariant<T: Real>(
    grid: &Grid2D<T>,
    a: &VectorPotential2D<T>,
    psi: &[Complex<T>],
    p: Vec2<T>,
) -> Complex<T> {
    let r = &grid.raster;
    let half = T::lit(0.5);
    let e2 = grid.spec.epsilon * grid.spec.epsilon;
    let fx = (p.x - r.origin.x) / r.hx - half;
    let fy = (p.y - r.origin.y) / r.hy - half;
    let i0 = fx.floor();
    let j0 = fy.floor();
    let (ax, ay) = (fx - i0, fy - j0);
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut wsum = T::zero();
    for (di, dj, w) in [
        (0, 0, (T::one() - ax) * (T::one() - ay)),
        (1, 0, ax * (T::one() - ay)),
        (0, 1, (T::one() - ax) * ay),
        (1, 1, ax * ay),
    ] {
        let (Some(i), Some(j)) = (
            (i0 + T::from_usize_lossy(di)).to_isize(),
            (j0 + T::from_usize_lossy(dj)).to_isize(),
        ) else {
            continue;
        };
        if i < 0 || j < 0 || i as usize >= r.nx || j as usize >= r.ny || w <= T::zero() {
            continue;
        }
        let k = r.idx(i as usize, j as usize);
        if !grid.active[k] {
            continue;
        }
        let c = r.center(i as usize, j as usize);
        let mid = Vec2::new(half * (c.x + p.x), half * (c.y + p.y));
        let th = -a.value_at(mid).dot(p - c) / e2;
        sum = sum + psi[k] * Complex::new(th.cos(), th.sin()) * w;
        wsum = wsum + w;
    }
    if wsum > T::zero() {
        sum / wsum
    } else {
        sum
    }
}

/// Splitting of the minimizer on the cut layer. The field
/// `χ₁(s)χ₂(t) ψ(r(εs,εt)) e^{−iφ_A(s,t)}` (χ₁ the corner cut-off, χ₂ a
/// ramp over the last unit of the layer depth) is written as
/// `f★(t) u e^{−iα★s}`, and the model layer functional of that field is
/// compared with `|∂Ω_cut|E★/ε + E[u]`. Grid spacings default to `h/ε`.
pub fn splitting_energy<T: Real>(
    result: &GLResult<T>,
    grid: &Grid2D<T>,
    sol: &EffectiveSolution<T>,
    spacing: Option<T>,
) -> Result<SplitReport<T>> {
    if sol.is_trivial() {
        return Err(Error::NotApplicable("splitting needs a nontrivial profile".into()));
    }
    result.psi.check_grid(grid)?;
    let spec = grid.spec;
    let eps = spec.epsilon;
    let depth = spec.layer_depth() / eps;
    let h = spacing.unwrap_or(grid.h() / eps);
    let intervals: Vec<(T, T)> = grid
        .param
        .cut_intervals(&spec)
        .into_iter()
        .map(|(a, b)| (a / eps, b / eps))
        .collect();
    let lg = LayerGrid::new(&intervals, depth, h, h)?;
    let nt = lg.nt();
    let gp = GaugePhase::new(&result.potential, &grid.param, &spec);
    let alpha = sol.alpha_star;
    let f: Vec<T> = lg.t.iter().map(|&t| sol.f(t)).collect();
    let floor = T::lit(F_FLOOR);
    let values: Vec<(Complex<T>, Complex<T>)> = (0..lg.s.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let s = lg.s[i];
            let chi = cutoff_chi(&grid.param, &spec, s);
            let (gp, f, lg) = (&gp, &f, &lg);
            (0..nt).map(move |k| {
                let zero = Complex::new(T::zero(), T::zero());
                let t = lg.t[k];
                let cut = chi * depth_cutoff(t, depth);
                if cut == T::zero() || f[k] <= floor {
                    return (zero, zero);
                }
                let p = grid.param.point_at(s * eps, t * eps);
                let raw = interpolate_covariant(grid, &result.potential, &result.psi.values, p);
                let ph = -gp.phase_unchecked(s, t);
                let tilde = raw * Complex::new(ph.cos(), ph.sin()) * cut;
                let back = alpha * s;
                let u = tilde * Complex::new(back.cos(), back.sin()) / f[k];
                (tilde, u)
            })
        })
        .collect();
    let (psi, u): (Vec<_>, Vec<_>) = values.into_iter().unzip();
    let b = result.config.b;
    let layer_energy = layer_functional(&lg, &psi, b);
    let (eu, lower) = split_functional(&lg, &f, alpha, &u, b);
    let predicted = spec.cut_perimeter(&grid.param) / eps * sol.energy;
    let hmax = lg.hs.iter().copied().fold(lg.ht, T::max);
    let tol_quad = T::lit(1e-6).max(T::lit(10.0) * hmax * hmax * lg.area());
    Ok(SplitReport {
        eu,
        lower,
        layer_energy,
        predicted,
        identity_residual: (layer_energy - predicted - eu).abs(),
        tol_quad,
        hs: hmax,
        ht: lg.ht,
    })
}
