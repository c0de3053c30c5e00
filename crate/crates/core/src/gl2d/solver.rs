use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::energy::{at, field_energy, psi_energy, psi_gradient, psi_line_polynomial, residual_scale, Links};
use super::grid::{ComplexField2D, Grid2D, VectorPotential2D};
use super::{FieldMode, GLConfig, GLDiagnostics, GLFailure, GLResult};
use crate::error::Error;
use crate::geometry::Region;
use crate::scalar::Real;

const ARMIJO: f64 = 1e-4;
/// Iterations between forced steepest-descent restarts.
const RESTART: usize = 200;
/// Relaxation factor of the ψ preconditioner.
const SSOR_OMEGA: f64 = 1.8;

/// Smooth objective for the conjugate gradient loop.
trait Objective<T: Real> {
    fn value_grad(&self, x: &[T], g: &mut [T]) -> T;
    fn value(&self, x: &[T]) -> T;
    fn residual(&self, g: &[T]) -> T;

    /// Preconditioned gradient; the identity unless overridden.
    fn precondition(&self, g: &[T], z: &mut [T]) {
        z.copy_from_slice(g);
    }

    /// Step along `d` and the resulting energy change, or `None` when no
    /// step satisfies the Armijo condition. The default backtracks from
    /// `guess`.
    fn line_search(&self, x: &[T], d: &[T], slope: T, e0: T, guess: T, trial: &mut Vec<T>) -> Option<(T, T)> {
        let mut s = guess;
        for _ in 0..60 {
            step_into(trial, x, d, s);
            let e = self.value(trial);
            if e <= e0 + T::lit(ARMIJO) * s * slope {
                return Some((s, e - e0));
            }
            s = s * T::lit(0.5);
        }
        None
    }
}

fn step_into<T: Real>(out: &mut Vec<T>, x: &[T], d: &[T], s: T) {
    out.clear();
    out.extend(x.iter().zip(d).map(|(&a, &b)| a + s * b));
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

struct NcgReport<T> {
    x: Vec<T>,
    residual: T,
    iterations: usize,
    history: Vec<T>,
    converged: bool,
}

/// Preconditioned Polak-Ribière+ conjugate gradient with Armijo line
/// search. The energy history is tracked through the accepted decrements so
/// that it is nonincreasing by construction.
fn ncg<T: Real, O: Objective<T>>(obj: &O, mut x: Vec<T>, tol: T, max_iter: usize) -> NcgReport<T> {
    let n = x.len();
    let mut g = vec![T::zero(); n];
    let mut e = obj.value_grad(&x, &mut g);
    let mut history = vec![e];
    let mut z = vec![T::zero(); n];
    obj.precondition(&g, &mut z);
    let mut d: Vec<T> = z.iter().map(|&v| -v).collect();
    let mut g_new = vec![T::zero(); n];
    let mut z_new = vec![T::zero(); n];
    let mut trial = Vec::with_capacity(n);
    let mut guess = T::one();
    let mut since_restart = 0;
    let mut residual = obj.residual(&g);
    for it in 0..max_iter {
        if residual <= tol {
            return NcgReport {
                x,
                residual,
                iterations: it,
                history,
                converged: true,
            };
        }
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) || since_restart >= RESTART {
            d.iter_mut().zip(&z).for_each(|(di, &zi)| *di = -zi);
            slope = -dot(&g, &z);
            since_restart = 0;
        }
        let found = obj.line_search(&x, &d, slope, e, guess, &mut trial);
        let (s, de) = match found {
            Some(v) => v,
            None if since_restart > 0 => {
                since_restart = RESTART;
                continue;
            }
            None => {
                return NcgReport {
                    x,
                    residual,
                    iterations: it,
                    history,
                    converged: false,
                };
            }
        };
        x.iter_mut().zip(&d).for_each(|(xi, &di)| *xi = *xi + s * di);
        let _ = obj.value_grad(&x, &mut g_new);
        obj.precondition(&g_new, &mut z_new);
        e = e + de;
        history.push(e);
        let gz = dot(&g, &z);
        let beta = ((dot(&g_new, &z_new) - dot(&g_new, &z)) / gz).max(T::zero());
        d.iter_mut().zip(&z_new).for_each(|(di, &zi)| *di = -zi + beta * *di);
        std::mem::swap(&mut g, &mut g_new);
        std::mem::swap(&mut z, &mut z_new);
        residual = obj.residual(&g);
        guess = s * T::lit(2.0);
        since_restart += 1;
    }
    NcgReport {
        x,
        residual,
        iterations: max_iter,
        history,
        converged: residual <= tol,
    }
}

/// ψ with the potential held fixed. The energy along a line is an exact
/// quartic polynomial, so the line search minimizes it in closed form and
/// checks the Armijo condition on the same polynomial. Directions are
/// preconditioned by SSOR on the kinetic operator, shifted by the curvature
/// scale of the potential term; without it the iteration count grows like
/// ε/h and the smooth modes along the boundary converge very slowly.
struct PsiObjective<'a, T> {
    grid: &'a Grid2D<T>,
    links: Links<T>,
    scale: T,
}

impl<T: Real> Objective<T> for PsiObjective<'_, T> {
    fn value_grad(&self, x: &[T], g: &mut [T]) -> T {
        psi_gradient(self.grid, &self.links, x, g);
        self.value(x)
    }

    fn value(&self, x: &[T]) -> T {
        let (k, p) = psi_energy(self.grid, &self.links, x, None);
        k + p
    }

    fn residual(&self, g: &[T]) -> T {
        g.chunks_exact(2).fold(T::zero(), |m, c| m.max(c[0].hypot(c[1]))) * self.scale
    }

    fn precondition(&self, g: &[T], z: &mut [T]) {
        let sigma = T::lit(4.0) * self.links.area * self.links.coef;
        ssor(self.grid, &self.links, sigma, T::lit(SSOR_OMEGA), g, z);
    }

    fn line_search(&self, x: &[T], d: &[T], slope: T, _e0: T, _guess: T, _trial: &mut Vec<T>) -> Option<(T, T)> {
        let c = psi_line_polynomial(self.grid, &self.links, x, d);
        let poly = |s: T| s * (c[1] + s * (c[2] + s * (c[3] + s * c[4])));
        let deriv = |s: T| c[1] + s * (T::lit(2.0) * c[2] + s * (T::lit(3.0) * c[3] + s * T::lit(4.0) * c[4]));
        if !(c[1] < T::zero()) {
            return None;
        }
        // First positive root of the cubic derivative by bracketing and
        // bisection.
        let mut hi = T::one();
        let mut grow = 0;
        while deriv(hi) < T::zero() {
            hi = hi * T::lit(2.0);
            grow += 1;
            if grow > 200 {
                return None;
            }
        }
        let mut lo = T::zero();
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if deriv(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut s = T::lit(0.5) * (lo + hi);
        for _ in 0..60 {
            let de = poly(s);
            if de <= T::lit(ARMIJO) * s * slope {
                return Some((s, de));
            }
            s = s * T::lit(0.5);
        }
        None
    }
}

/// One symmetric Gauss-Seidel (SSOR) application for `2(−Δ_A) + σ` on the
/// active cells, i.e. `z = P⁻¹g` with `P = (D/ω + L)(D/ω)⁻¹(D/ω + L*)`.
fn ssor<T: Real>(grid: &Grid2D<T>, links: &Links<T>, sigma: T, omega: T, g: &[T], z: &mut [T]) {
    let nx = grid.nx();
    let n = grid.len();
    let two = T::lit(2.0);
    let (cx, cy) = (two * links.wx, two * links.wy);
    let diag = |k: usize| {
        let mut d = sigma;
        if grid.has_xlink(k) {
            d = d + cx;
        }
        if k % nx > 0 && grid.has_xlink(k - 1) {
            d = d + cx;
        }
        if grid.has_ylink(k) {
            d = d + cy;
        }
        if k >= nx && grid.has_ylink(k - nx) {
            d = d + cy;
        }
        d
    };
    let mut y = vec![Complex::new(T::zero(), T::zero()); n];
    for k in 0..n {
        if !grid.active[k] {
            continue;
        }
        let mut r = at(g, k);
        if k % nx > 0 && grid.has_xlink(k - 1) {
            r = r + y[k - 1] * links.ux[k - 1].conj() * cx;
        }
        if k >= nx && grid.has_ylink(k - nx) {
            r = r + y[k - nx] * links.uy[k - nx].conj() * cy;
        }
        y[k] = r * (omega / diag(k));
    }
    for k in (0..n).rev() {
        if !grid.active[k] {
            continue;
        }
        let mut r = Complex::new(T::zero(), T::zero());
        if grid.has_xlink(k) {
            r = r + y[k + 1] * links.ux[k] * cx;
        }
        if grid.has_ylink(k) {
            r = r + y[k + nx] * links.uy[k] * cy;
        }
        y[k] = y[k] + r * (omega / diag(k));
    }
    for k in 0..n {
        z[2 * k] = y[k].re;
        z[2 * k + 1] = y[k].im;
    }
}

/// Link variables with ψ fixed; variables are `ax` followed by `ay`.
struct FieldObjective<'a, T> {
    grid: &'a Grid2D<T>,
    psi: &'a [T],
    b: T,
    eps: T,
    scale: T,
}

impl<T: Real> FieldObjective<'_, T> {
    fn potential(&self, x: &[T]) -> VectorPotential2D<T> {
        let n = self.grid.len();
        VectorPotential2D {
            raster: self.grid.raster,
            ax: x[..n].to_vec(),
            ay: x[n..].to_vec(),
            reference_center: None,
        }
    }
}

impl<T: Real> Objective<T> for FieldObjective<'_, T> {
    fn value_grad(&self, x: &[T], g: &mut [T]) -> T {
        let grid = self.grid;
        let (n, nx, ny) = (grid.len(), grid.nx(), grid.ny());
        let r = &grid.raster;
        let a = self.potential(x);
        let links = Links::new(grid, &a, self.b, self.eps);
        let e2 = self.eps * self.eps;
        let two = T::lit(2.0);
        g.iter_mut().for_each(|v| *v = T::zero());
        for k in 0..n {
            if grid.has_xlink(k) {
                let z = super::energy::at(self.psi, k).conj() * super::energy::at(self.psi, k + 1) * links.ux[k];
                g[k] = two * links.wx * z.im * r.hx / e2;
            }
            if grid.has_ylink(k) {
                let z = super::energy::at(self.psi, k).conj() * super::energy::at(self.psi, k + nx) * links.uy[k];
                g[n + k] = two * links.wy * z.im * r.hy / e2;
            }
        }
        let e4 = e2 * e2;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let k = r.idx(i, j);
                let c = a.curl(i, j) - T::one();
                let fx = two * r.hx * c / e4;
                let fy = two * r.hy * c / e4;
                g[k] = g[k] + fx;
                g[k + nx] = g[k + nx] - fx;
                g[n + k + 1] = g[n + k + 1] + fy;
                g[n + k] = g[n + k] - fy;
            }
        }
        for j in 0..ny {
            g[r.idx(nx - 1, j)] = T::zero();
        }
        for i in 0..nx {
            g[n + r.idx(i, ny - 1)] = T::zero();
        }
        self.value(x)
    }

    fn value(&self, x: &[T]) -> T {
        let a = self.potential(x);
        let links = Links::new(self.grid, &a, self.b, self.eps);
        psi_energy(self.grid, &links, self.psi, None).0 + field_energy(&a, self.eps)
    }

    fn residual(&self, g: &[T]) -> T {
        g.iter().fold(T::zero(), |m, v| m.max(v.abs())) * self.scale
    }
}

/// Minimizes the discrete GL energy from `init` by nonlinear conjugate
/// gradients. In alternating mode the frozen-field minimizer is computed
/// first, then ψ and `A` are relaxed in turn, so the final energy never
/// exceeds the frozen one.
pub fn minimize_gl<T: Real>(
    grid: &Grid2D<T>,
    cfg: &GLConfig<T>,
    init: &ComplexField2D<T>,
) -> std::result::Result<GLResult<T>, GLFailure<T>> {
    init.check_grid(grid)?;
    if !init.is_finite() {
        return Err(Error::InvalidInput("initial field has non-finite entries".into()).into());
    }
    let mut potential = super::grid::make_reference_potential(grid);
    let scale = residual_scale(grid, cfg.epsilon);
    let mut x = init.to_interleaved();
    // Inactive entries carry no energy; zero them so they stay put.
    for (k, &a) in grid.active.iter().enumerate() {
        if !a {
            x[2 * k] = T::zero();
            x[2 * k + 1] = T::zero();
        }
    }
    let obj = PsiObjective {
        grid,
        links: Links::new(grid, &potential, cfg.b, cfg.epsilon),
        scale,
    };
    let mut rep = ncg(&obj, x, cfg.tol, cfg.max_iter);
    let mut history = rep.history.clone();
    let mut iterations = rep.iterations;

    if cfg.field_mode == FieldMode::Alternating {
        // Scaled so that the residual reads as a curl defect.
        let fscale = cfg.epsilon.powi(4) / (T::lit(2.0) * grid.h());
        for _ in 0..cfg.field_rounds {
            let fobj = FieldObjective {
                grid,
                psi: &rep.x,
                b: cfg.b,
                eps: cfg.epsilon,
                scale: fscale,
            };
            let a0: Vec<T> = potential.ax.iter().chain(potential.ay.iter()).copied().collect();
            let frep = ncg(&fobj, a0, cfg.tol, cfg.max_iter.min(500));
            let e_before = *history.last().expect("history starts with the initial energy");
            let drop = frep.history.last().copied().unwrap_or(frep.history[0]) - frep.history[0];
            potential = fobj.potential(&frep.x);
            history.push(e_before + drop);
            let obj = PsiObjective {
                grid,
                links: Links::new(grid, &potential, cfg.b, cfg.epsilon),
                scale,
            };
            rep = ncg(&obj, rep.x, cfg.tol, cfg.max_iter);
            let offset = *history.last().expect("nonempty") - rep.history[0];
            history.extend(rep.history.iter().skip(1).map(|&e| e + offset));
            iterations += rep.iterations + frep.iterations;
        }
    }

    let psi = ComplexField2D::from_interleaved(grid.nx(), grid.ny(), &rep.x);
    let result = finish(grid, cfg, psi, potential, rep.residual, iterations, history);
    if !result.energy.is_finite() || !result.psi.is_finite() {
        return Err(GLFailure {
            error: Error::Convergence {
                iterations,
                residual: f64::NAN,
            },
            last: Some(Box::new(result)),
        });
    }
    if rep.converged {
        Ok(result)
    } else {
        Err(GLFailure {
            error: Error::Convergence {
                iterations,
                residual: result.residual.to_f64_lossy(),
            },
            last: Some(Box::new(result)),
        })
    }
}

fn finish<T: Real>(
    grid: &Grid2D<T>,
    cfg: &GLConfig<T>,
    psi: ComplexField2D<T>,
    potential: VectorPotential2D<T>,
    residual: T,
    iterations: usize,
    history: Vec<T>,
) -> GLResult<T> {
    let links = Links::new(grid, &potential, cfg.b, cfg.epsilon);
    let x = psi.to_interleaved();
    let (kin, pot) = psi_energy(grid, &links, &x, None);
    let field = match cfg.field_mode {
        FieldMode::Frozen => T::zero(),
        FieldMode::Alternating => field_energy(&potential, cfg.epsilon),
    };
    let mut mass = T::zero();
    let mut bulk = T::zero();
    for k in 0..grid.len() {
        if grid.active[k] {
            let m = psi.values[k].norm_sqr();
            mass = mass + m;
            if grid.regions[k] == Region::Bulk {
                bulk = bulk + m;
            }
        }
    }
    let diagnostics = GLDiagnostics {
        bulk_mass_fraction: if mass > T::zero() { bulk / mass } else { T::zero() },
        sup_modulus: psi.sup_modulus(),
        iterations,
        energy_history: history,
        scaled_gradient_norm: (kin * cfg.epsilon).sqrt(),
    };
    GLResult {
        psi,
        potential,
        energy: kin + pot + field,
        residual,
        config: *cfg,
        diagnostics,
    }
}

/// Uniform noise with modulus below `amplitude`, reproducible from `seed`.
pub fn random_field<T: Real>(grid: &Grid2D<T>, amplitude: T, seed: u64) -> ComplexField2D<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField2D::from_fn(grid, |_, _| {
        let r = amplitude * T::lit(rng.gen::<f64>());
        let t = T::lit(rng.gen::<f64>() * std::f64::consts::TAU);
        Complex::new(r * t.cos(), r * t.sin())
    })
}
