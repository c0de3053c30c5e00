use rayon::prelude::*;

use super::energy::{energy_gradient, energy_unchecked, hellmann_feynman, scaled_residual};
use super::theta0::solve_theta0_single;
use super::{check_b, EffectiveSolution, Grid1D, Profile1D};
use crate::error::{Error, Result};
use crate::numerics::{golden_section, SymTridiagonal};
use crate::scalar::Real;

/// Inner (fixed `α`) solver settings.
#[derive(Clone, Copy, Debug)]
pub struct InnerOptions<T> {
    /// Target sup-norm of the weight-normalized gradient.
    pub tol: T,
    /// Newton iterations after the warm-up.
    pub max_iter: usize,
    /// Projected Barzilai-Borwein iterations before switching to Newton.
    pub warmup_iter: usize,
    pub warmup_tol: T,
}

impl<T: Real> Default for InnerOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-9),
            max_iter: 200,
            warmup_iter: 50,
            warmup_tol: T::lit(1e-2),
        }
    }
}

/// Outer (`α`) search settings.
#[derive(Clone, Copy, Debug)]
pub struct OuterOptions<T> {
    pub scan_lo: T,
    pub scan_hi: T,
    pub scan_step: T,
    /// Width of the final golden-section bracket.
    pub tol_alpha: T,
    /// Energies within this of the scan minimum count as a flat landscape.
    pub flat_tol: T,
    /// Half-width of the centered difference reported as `dE/dα`.
    pub derivative_step: T,
}

impl<T: Real> Default for OuterOptions<T> {
    fn default() -> Self {
        Self {
            scan_lo: T::lit(-3.0),
            scan_hi: T::lit(1.0),
            scan_step: T::lit(0.1),
            tol_alpha: T::lit(1e-7),
            flat_tol: T::lit(1e-13),
            derivative_step: T::lit(1e-4),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InnerReport<T> {
    pub profile: Profile1D<T>,
    pub energy: T,
    pub residual: T,
    pub iterations: usize,
}

/// Minimizes `E_α` over nonnegative profiles from `init`, returning the
/// profile and its energy.
pub fn minimize_profile<T: Real>(alpha: T, b: T, grid: Grid1D<T>, init: &Profile1D<T>) -> Result<(Profile1D<T>, T)> {
    let r = minimize_profile_with(alpha, b, grid, init, &InnerOptions::default())?;
    Ok((r.profile, r.energy))
}

pub fn minimize_profile_with<T: Real>(
    alpha: T,
    b: T,
    grid: Grid1D<T>,
    init: &Profile1D<T>,
    opts: &InnerOptions<T>,
) -> Result<InnerReport<T>> {
    check_b(b)?;
    grid.require_margin(10.0)?;
    init.check_finite()?;
    if init.grid != grid {
        return Err(Error::InvalidInput("initial profile lives on a different grid".into()));
    }
    let mut f = init.clone();
    for v in f.values.iter_mut() {
        *v = v.max(T::zero());
    }
    let mut iterations = warmup(&mut f, alpha, b, opts);
    let mut energy = energy_unchecked(&f, alpha, b);
    let mut res = projected_sup(&f, &scaled_residual(&f, alpha, b));
    let floor = rounding_floor(&f);
    let mut stalled = 0;
    for _ in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(InnerReport {
                profile: f,
                energy,
                residual: res,
                iterations,
            });
        }
        iterations += 1;
        let grad = energy_gradient(&f, alpha, b);
        let dir = newton_direction(&f, alpha, b, &grad);
        // Near convergence the energy decrease drops below rounding; the
        // full Newton step is then taken if it raises E only by noise.
        let noise = T::lit(64.0) * T::epsilon() * (T::one() + energy.abs());
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial = project_step(&f, &dir, step);
            let e = energy_unchecked(&trial, alpha, b);
            let moved: T = trial
                .values
                .iter()
                .zip(&f.values)
                .zip(&grad)
                .map(|((&x, &y), &g)| (x - y) * g)
                .sum();
            if e <= energy + T::lit(1e-4) * moved.min(T::zero()) || (step == T::one() && e <= energy + noise) {
                accepted = Some((trial, e));
                break;
            }
            step = step * T::lit(0.5);
        }
        let was_accepted = accepted.is_some();
        let (trial, e) = match accepted {
            Some(x) => x,
            // No decrease is representable: take the full Newton step if it
            // lowers the residual, which only happens at rounding level.
            None => {
                let trial = project_step(&f, &dir, T::one());
                let e = energy_unchecked(&trial, alpha, b);
                (trial, e)
            }
        };
        let new_res = projected_sup(&trial, &scaled_residual(&trial, alpha, b));
        if new_res < res {
            stalled = 0;
        } else {
            stalled += 1;
        }
        if was_accepted || new_res < res {
            f = trial;
            energy = e;
            res = new_res;
        }
        if stalled >= 3 {
            break;
        }
    }
    if res <= opts.tol || res <= floor {
        return Ok(InnerReport {
            profile: f,
            energy,
            residual: res,
            iterations,
        });
    }
    Err(Error::Convergence {
        iterations,
        residual: res.to_f64_lossy(),
    })
}

/// Size of the weight-normalized residual that rounding alone produces.
fn rounding_floor<T: Real>(f: &Profile1D<T>) -> T {
    let h = f.grid.h();
    T::lit(8.0) * T::epsilon() * (T::one() + f.sup_norm()) / (h * h)
}

fn projected_sup<T: Real>(f: &Profile1D<T>, r: &[T]) -> T {
    f.values.iter().zip(r).fold(T::zero(), |m, (&v, &ri)| {
        if v <= T::zero() && ri > T::zero() {
            m
        } else {
            m.max(ri.abs())
        }
    })
}

fn project_step<T: Real>(f: &Profile1D<T>, dir: &[T], step: T) -> Profile1D<T> {
    let values = f
        .values
        .iter()
        .zip(dir)
        .map(|(&v, &d)| (v + step * d).max(T::zero()))
        .collect();
    Profile1D { grid: f.grid, values }
}

fn hessian<T: Real>(f: &Profile1D<T>, alpha: T, b: T) -> SymTridiagonal<T> {
    let g = &f.grid;
    let n = g.n();
    let h = g.h();
    let two = T::lit(2.0);
    let inv_b = T::one() / b;
    let diag = (0..n)
        .map(|i| {
            let nb = if i == 0 || i + 1 == n { T::one() } else { two };
            let s = g.point(i) + alpha;
            let v2 = f.values[i] * f.values[i];
            two * nb / h + g.weight(i) * two * (s * s - inv_b * (T::one() - T::lit(3.0) * v2))
        })
        .collect();
    SymTridiagonal {
        diag,
        off: vec![-two / h; n - 1],
    }
}

/// Newton direction, shifted towards a weighted gradient step when the
/// Hessian is not positive definite.
fn newton_direction<T: Real>(f: &Profile1D<T>, alpha: T, b: T, grad: &[T]) -> Vec<T> {
    let mut hess = hessian(f, alpha, b);
    let rhs: Vec<T> = grad.iter().map(|&g| -g).collect();
    let base = hess.diag.clone();
    let mut shift = T::zero();
    for _ in 0..40 {
        if let Some(d) = hess.solve_spd(&rhs) {
            return d;
        }
        shift = if shift == T::zero() {
            T::lit(1e-3)
        } else {
            shift * T::lit(10.0)
        };
        for i in 0..hess.len() {
            hess.diag[i] = base[i] + shift * T::lit(2.0) * f.grid.weight(i);
        }
    }
    rhs.iter()
        .enumerate()
        .map(|(i, &r)| r / (T::lit(2.0) * f.grid.weight(i)))
        .collect()
}

/// Projected gradient descent with Barzilai-Borwein steps in the weighted
/// inner product. Returns the number of iterations used.
fn warmup<T: Real>(f: &mut Profile1D<T>, alpha: T, b: T, opts: &InnerOptions<T>) -> usize {
    let h = f.grid.h();
    let fallback = T::lit(0.2) * h * h;
    let mut step = fallback;
    let mut r = scaled_residual(f, alpha, b);
    let mut energy = energy_unchecked(f, alpha, b);
    for it in 0..opts.warmup_iter {
        if projected_sup(f, &r) <= opts.warmup_tol {
            return it;
        }
        let mut trial = project_step(f, &r.iter().map(|&x| -x).collect::<Vec<_>>(), step);
        let mut e = energy_unchecked(&trial, alpha, b);
        if !(e <= energy) {
            step = fallback;
            trial = project_step(f, &r.iter().map(|&x| -x).collect::<Vec<_>>(), step);
            e = energy_unchecked(&trial, alpha, b);
        }
        let r_new = scaled_residual(&trial, alpha, b);
        let mut ss = T::zero();
        let mut sy = T::zero();
        for i in 0..f.grid.n() {
            let w = f.grid.weight(i);
            let s = trial.values[i] - f.values[i];
            ss = ss + w * s * s;
            sy = sy + w * s * (r_new[i] - r[i]);
        }
        step = if sy > T::zero() {
            (ss / sy).min(T::lit(10.0))
        } else {
            fallback
        };
        *f = trial;
        r = r_new;
        energy = e;
    }
    opts.warmup_iter
}

/// Joint minimization over `α` and `f` with default options.
pub fn minimize_joint<T: Real>(b: T, grid: Grid1D<T>) -> Result<EffectiveSolution<T>> {
    minimize_joint_with(b, grid, &InnerOptions::default(), &OuterOptions::default())
}

pub fn minimize_joint_with<T: Real>(
    b: T,
    grid: Grid1D<T>,
    inner: &InnerOptions<T>,
    outer: &OuterOptions<T>,
) -> Result<EffectiveSolution<T>> {
    check_b(b)?;
    grid.require_margin(10.0)?;
    let th = solve_theta0_single(grid)?;
    let in_regime = b > T::one() && b * th.theta0 < T::one();

    let steps = ((outer.scan_hi - outer.scan_lo) / outer.scan_step)
        .round()
        .to_usize()
        .unwrap_or(0);
    if steps < 2 {
        return Err(Error::Search("scan interval holds fewer than three points".into()));
    }
    let alphas: Vec<T> = (0..=steps)
        .map(|k| outer.scan_lo + T::from_usize_lossy(k) * outer.scan_step)
        .collect();
    let gauss = Profile1D::gaussian(grid);
    let scan: Vec<InnerReport<T>> = alphas
        .par_iter()
        .map(|&a| minimize_profile_with(a, b, grid, &gauss, inner))
        .collect::<Result<_>>()?;
    let energies: Vec<T> = scan.iter().map(|r| r.energy).collect();
    let (kmin, emin) = energies.iter().enumerate().fold(
        (0, T::infinity()),
        |(k, e), (i, &x)| if x < e { (i, x) } else { (k, e) },
    );

    let near = |e: T| e - emin <= outer.flat_tol * (T::one() + emin.abs());
    let mut lo_k = kmin;
    while lo_k > 0 && near(energies[lo_k - 1]) {
        lo_k -= 1;
    }
    let mut hi_k = kmin;
    while hi_k < steps && near(energies[hi_k + 1]) {
        hi_k += 1;
    }

    let (alpha_star, f_star, energy, residual, flat) = if hi_k - lo_k >= 2 {
        let mid = T::lit(0.5) * (alphas[lo_k] + alphas[hi_k]);
        let start = &scan[(lo_k + hi_k) / 2].profile;
        let r = minimize_profile_with(mid, b, grid, start, inner)?;
        (mid, r.profile, r.energy, r.residual, true)
    } else {
        if kmin == 0 || kmin == steps {
            return Err(Error::Search(format!(
                "scan minimum sits at the bracket end α = {}",
                alphas[kmin]
            )));
        }
        let mut warm = scan[kmin].profile.clone();
        let mut failure = None;
        let mut eval = |a: T, warm: &mut Profile1D<T>| -> T {
            match minimize_profile_with(a, b, grid, warm, inner) {
                Ok(r) => {
                    *warm = r.profile;
                    r.energy
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    T::infinity()
                }
            }
        };
        let m = golden_section(
            |a| eval(a, &mut warm),
            alphas[kmin - 1],
            alphas[kmin + 1],
            outer.tol_alpha,
        );
        let mut best_a = m.x;
        let r = minimize_profile_with(best_a, b, grid, &warm, inner)?;
        let (mut best_f, mut best_e, mut best_res) = (r.profile, r.energy, r.residual);
        // Secant refinement on the exact discrete derivative Σ w 2(t+α) f².
        let mut a0 = best_a - T::lit(10.0) * outer.tol_alpha;
        let r0 = minimize_profile_with(a0, b, grid, &best_f, inner)?;
        let mut d0 = hellmann_feynman(&r0.profile, a0);
        let mut a1 = best_a;
        let mut d1 = hellmann_feynman(&best_f, a1);
        for _ in 0..6 {
            if d1 == d0 || d1 == T::zero() {
                break;
            }
            let a2 = a1 - d1 * (a1 - a0) / (d1 - d0);
            if !a2.is_finite() || (a2 - best_a).abs() > outer.tol_alpha * T::lit(100.0) {
                break;
            }
            let r2 = minimize_profile_with(a2, b, grid, &best_f, inner)?;
            let d2 = hellmann_feynman(&r2.profile, a2);
            if r2.energy <= best_e {
                best_a = a2;
                best_e = r2.energy;
                best_f = r2.profile.clone();
                best_res = r2.residual;
            }
            a0 = a1;
            d0 = d1;
            a1 = a2;
            d1 = d2;
            if (a1 - a0).abs() <= T::epsilon() * T::lit(16.0) {
                break;
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
        (best_a, best_f, best_e, best_res, false)
    };

    let d = outer.derivative_step;
    let ep = minimize_profile_with(alpha_star + d, b, grid, &f_star, inner)?.energy;
    let em = minimize_profile_with(alpha_star - d, b, grid, &f_star, inner)?.energy;
    let d_energy_d_alpha = (ep - em) / (T::lit(2.0) * d);

    Ok(EffectiveSolution {
        b,
        alpha_star,
        f_star,
        energy,
        theta0: th.theta0,
        alpha0: th.alpha0,
        d_energy_d_alpha,
        inner_residual: residual,
        in_regime,
        flat_outer: flat,
    })
}
