use super::grid::VectorPotential2D;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryParam, LayerSpec, PieceKind};
use crate::numerics::gauss_legendre;
use crate::scalar::Real;

/// Gauge phase `φ_A(s, t)` that removes the normal component of `A` in the
/// boundary layer:
///
/// `φ_A(s,t) = −(1/ε)∫₀ᵗ A(r(εs,εη))·n(s) dη − (1/ε)∫₀ˢ A(r(εξ,0))·γ'(εξ) dξ + εδ_ε s`,
///
/// `δ_ε = Φ/(ε²|∂Ω|) − (2π/|∂Ω|)⌊Φ/(2πε²)⌋` with `Φ` the flux through `Ω`.
/// With `ψ(s,t) = Ψ(r(εs,εt)) e^{−iφ_A}` the covariant derivative becomes
/// `(∂_t, ∂_s + i a_A)` where `a_A = (1 − εkt) γ'·A/ε + ∂_s φ_A`, so that
/// `a_A(s,0) = εδ_ε` and `a_A ≈ −t`.
///
/// The tangential integral runs in the direction of increasing `σ` from the
/// first vertex; after a full turn `φ_A` changes by `−2πn`, `n = ⌊Φ/(2πε²)⌋`.
pub struct GaugePhase<'a, T> {
    a: &'a VectorPotential2D<T>,
    param: &'a BoundaryParam<T>,
    spec: LayerSpec<T>,
    /// `∫ A·γ'` from `σ = 0` to the start of each piece.
    piece_start: Vec<T>,
    /// `∮ A·dl`, equal to the flux through `Ω`.
    pub flux: T,
    pub delta: T,
    pub winding: i64,
}

impl<'a, T: Real> GaugePhase<'a, T> {
    pub fn new(a: &'a VectorPotential2D<T>, param: &'a BoundaryParam<T>, spec: &LayerSpec<T>) -> Self {
        let mut piece_start = Vec::with_capacity(param.pieces.len());
        let mut acc = T::zero();
        for k in 0..param.pieces.len() {
            piece_start.push(acc);
            acc = acc + piece_integral(a, param, k, param.pieces[k].length);
        }
        let eps = spec.epsilon;
        let e2 = eps * eps;
        let two_pi = T::PI() + T::PI();
        let l = param.total_length;
        let n = (acc / (two_pi * e2)).floor();
        let delta = acc / (e2 * l) - two_pi / l * n;
        Self {
            a,
            param,
            spec: *spec,
            piece_start,
            flux: acc,
            delta,
            winding: n.to_i64().unwrap_or(0),
        }
    }

    pub fn epsilon(&self) -> T {
        self.spec.epsilon
    }

    /// `∫₀^σ A·γ'` for unwrapped `σ` (full turns add the flux).
    pub fn tangential_integral(&self, sigma: T) -> T {
        let l = self.param.total_length;
        let laps = (sigma / l).floor();
        let w = sigma - laps * l;
        let k = self.param.piece_at(w);
        let u = (w - self.param.pieces[k].sigma0)
            .max(T::zero())
            .min(self.param.pieces[k].length);
        laps * self.flux + self.piece_start[k] + piece_integral(self.a, self.param, k, u)
    }

    /// `∫₀ᵗ A(r(εs,εη))·n(s) dη`.
    fn normal_integral(&self, s: T, t: T) -> T {
        let eps = self.spec.epsilon;
        let sigma = s * eps;
        let g = self.param.gamma(sigma);
        let n = self.param.normal(sigma);
        let pieces = self.panels(t * eps);
        gauss_legendre(
            |eta| self.a.value_at(g + n.scale(eps * eta)).dot(n),
            T::zero(),
            t,
            pieces,
        )
    }

    fn panels(&self, length: T) -> usize {
        if self.a.reference_center.is_some() {
            1
        } else {
            let h = self.a.raster.hx.min(self.a.raster.hy);
            (length / h).ceil().to_usize().unwrap_or(1) + 1
        }
    }

    /// `φ_A(s, t)` without the layer check.
    pub fn phase_unchecked(&self, s: T, t: T) -> T {
        let eps = self.spec.epsilon;
        -self.normal_integral(s, t) / eps - self.tangential_integral(s * eps) / (eps * eps) + eps * self.delta * s
    }

    /// `φ_A(s, t)`; `(s, t)` must lie in the rescaled cut layer.
    pub fn phase(&self, s: T, t: T) -> Result<T> {
        self.check(s, t)?;
        Ok(self.phase_unchecked(s, t))
    }

    fn check(&self, s: T, t: T) -> Result<()> {
        let eps = self.spec.epsilon;
        let t_layer = self.spec.layer_depth() / eps;
        let slack = T::lit(1e-12) * (T::one() + t_layer);
        if !(t >= T::zero() && t <= t_layer + slack) {
            return Err(Error::Precondition(format!("t = {t} outside [0, {t_layer}]")));
        }
        let w = self.spec.cell_halfwidth();
        if self.param.corner_distance(s * eps) < w * (T::one() - T::lit(1e-12)) {
            return Err(Error::Precondition(format!("s = {s} lies in a corner cell")));
        }
        Ok(())
    }

    /// `∂_s φ_A(s, t)`.
    pub fn phase_ds(&self, s: T, t: T) -> T {
        let eps = self.spec.epsilon;
        let sigma = s * eps;
        let g = self.param.gamma(sigma);
        let n = self.param.normal(sigma);
        let tan = self.param.tangent(sigma);
        let k = self.param.curvature(sigma);
        let pieces = self.panels(t * eps);
        let normal_part = gauss_legendre(
            |eta| {
                let p = g + n.scale(eps * eta);
                let j = self.a.jacobian(p);
                let da_tan =
                    crate::geometry::Vec2::new(j[0][0] * tan.x + j[0][1] * tan.y, j[1][0] * tan.x + j[1][1] * tan.y);
                (T::one() - eps * k * eta) * n.dot(da_tan) - k * self.a.value_at(p).dot(tan)
            },
            T::zero(),
            t,
            pieces,
        );
        -normal_part - self.a.value_at(g).dot(tan) / eps + eps * self.delta
    }

    /// `a_A(s, t) = (1 − εk(s)t) γ'·A(r(εs,εt))/ε + ∂_s φ_A(s, t)`.
    pub fn tangential_potential_at(&self, s: T, t: T) -> T {
        let eps = self.spec.epsilon;
        let sigma = s * eps;
        let p = self.param.point_at(sigma, eps * t);
        let tan = self.param.tangent(sigma);
        let k = self.param.curvature(sigma);
        (T::one() - eps * k * t) * tan.dot(self.a.value_at(p)) / eps + self.phase_ds(s, t)
    }
}

fn piece_integral<T: Real>(a: &VectorPotential2D<T>, param: &BoundaryParam<T>, k: usize, u: T) -> T {
    let piece = &param.pieces[k];
    if u <= T::zero() {
        return T::zero();
    }
    let panels = match (a.reference_center.is_some(), piece.kind) {
        (true, PieceKind::Line { .. }) => 1,
        (true, PieceKind::Arc { .. }) => 16,
        (false, _) => (u / a.raster.hx.min(a.raster.hy)).ceil().to_usize().unwrap_or(1) + 1,
    };
    gauss_legendre(
        |v| a.value_at(piece.point(v)).dot(piece.tangent(v)),
        T::zero(),
        u,
        panels,
    )
}

/// `φ_A(s, t)` for a single point of the cut layer.
pub fn gauge_phase<T: Real>(
    a: &VectorPotential2D<T>,
    param: &BoundaryParam<T>,
    spec: &LayerSpec<T>,
    s: T,
    t: T,
) -> Result<T> {
    GaugePhase::new(a, param, spec).phase(s, t)
}

/// `a_A` sampled on the rescaled cut layer: each cut interval gets its own
/// uniform `s` nodes, `t` nodes are shared and uniform on `[0, c₀|log ε|]`.
#[derive(Clone, Debug)]
pub struct LayerPotential<T> {
    pub epsilon: T,
    pub delta: T,
    /// `s` nodes (unwrapped), interval by interval.
    pub s: Vec<T>,
    /// Trapezoid weight of each `s` node within its interval.
    pub ws: Vec<T>,
    pub interval: Vec<usize>,
    pub t: Vec<T>,
    pub wt: Vec<T>,
    /// `values[i * t.len() + k] = a_A(s_i, t_k)`.
    pub values: Vec<T>,
}

impl<T: Real> LayerPotential<T> {
    pub fn at(&self, i: usize, k: usize) -> T {
        self.values[i * self.t.len() + k]
    }

    /// `‖a_A + t‖_{L²(A_cut)}` in rescaled coordinates.
    pub fn deviation_l2(&self) -> T {
        let mut sum = T::zero();
        for (i, &w) in self.ws.iter().enumerate() {
            for (k, &t) in self.t.iter().enumerate() {
                let d = self.at(i, k) + t;
                sum = sum + w * self.wt[k] * d * d;
            }
        }
        sum.sqrt()
    }

    /// `sup_s |a_A(s, 0) − εδ_ε|`.
    pub fn boundary_defect(&self) -> T {
        let target = self.epsilon * self.delta;
        (0..self.s.len()).fold(T::zero(), |m, i| m.max((self.at(i, 0) - target).abs()))
    }

    /// `sup |a_A + t|` over the samples.
    pub fn sup_deviation(&self) -> T {
        let nt = self.t.len();
        self.values
            .iter()
            .enumerate()
            .fold(T::zero(), |m, (j, &v)| m.max((v + self.t[j % nt]).abs()))
    }
}

pub(crate) fn trapezoid_nodes<T: Real>(a: T, b: T, step: T) -> (Vec<T>, Vec<T>) {
    let n = ((b - a) / step).ceil().to_usize().unwrap_or(1).max(1);
    let h = (b - a) / T::from_usize_lossy(n);
    let nodes: Vec<T> = (0..=n).map(|i| a + h * T::from_usize_lossy(i)).collect();
    let weights = (0..=n)
        .map(|i| if i == 0 || i == n { h * T::lit(0.5) } else { h })
        .collect();
    (nodes, weights)
}

pub fn tangential_potential<T: Real>(
    a: &VectorPotential2D<T>,
    param: &BoundaryParam<T>,
    spec: &LayerSpec<T>,
    hs: T,
    nt: usize,
) -> Result<LayerPotential<T>> {
    if !(hs > T::zero()) || nt < 2 {
        return Err(Error::InvalidInput("need hs > 0 and at least 2 t intervals".into()));
    }
    let gp = GaugePhase::new(a, param, spec);
    let eps = spec.epsilon;
    let t_layer = spec.layer_depth() / eps;
    let (t, wt) = trapezoid_nodes(T::zero(), t_layer, t_layer / T::from_usize_lossy(nt));
    let intervals = param.cut_intervals(spec);
    if intervals.is_empty() {
        return Err(Error::Precondition("the cut layer is empty".into()));
    }
    let mut s = Vec::new();
    let mut ws = Vec::new();
    let mut interval = Vec::new();
    for (m, &(lo, hi)) in intervals.iter().enumerate() {
        let (nodes, w) = trapezoid_nodes(lo / eps, hi / eps, hs);
        interval.extend(std::iter::repeat(m).take(nodes.len()));
        s.extend(nodes);
        ws.extend(w);
    }
    let values: Vec<T> = {
        use rayon::prelude::*;
        s.par_iter()
            .flat_map_iter(|&si| t.iter().map(move |&tk| (si, tk)))
            .map(|(si, tk)| gp.tangential_potential_at(si, tk))
            .collect()
    };
    Ok(LayerPotential {
        epsilon: eps,
        delta: gp.delta,
        s,
        ws,
        interval,
        t,
        wt,
        values,
    })
}
