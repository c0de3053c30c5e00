//! Independent solver for the Euler-Lagrange equation
//! `f'' = (t+α)² f − (1/b)(1−f²) f`, `f'(0) = 0`, by shooting on `f(0)`.
//!
//! Serves as a cross-check of the grid minimizer: no shared discretization,
//! RK4 in `t` with the energy integrals carried as extra state.

use super::check_b;
use crate::error::{Error, Result};
use crate::numerics::bisect_root;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct ShootingOptions<T> {
    pub step: T,
    /// Integration stops here if the trajectory has not departed.
    pub t_end: T,
    /// Bracket for `α★` (root of `∫ 2(t+α) f_α² dt`).
    pub alpha_lo: T,
    pub alpha_hi: T,
    pub tol_alpha: T,
}

impl<T: Real> Default for ShootingOptions<T> {
    fn default() -> Self {
        Self {
            step: T::lit(1e-3),
            t_end: T::lit(12.0),
            alpha_lo: T::lit(-1.3),
            alpha_hi: T::lit(-0.2),
            tol_alpha: T::lit(1e-11),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ShootingSolution<T> {
    pub alpha: T,
    /// `f(0)`; zero when only the trivial solution exists.
    pub f0: T,
    /// `−(1/2b)∫f⁴`, the energy of a critical point.
    pub energy: T,
    /// The functional evaluated directly along the trajectory.
    pub energy_direct: T,
    /// `∫ 2(t+α) f²`.
    pub alpha_derivative: T,
    /// Where the shot trajectory was cut.
    pub t_cut: T,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    Crosses,
    TurnsUp,
    Undecided,
}

// State: f, f', ∫f⁴, ∫2(t+α)f², ∫(energy density).
type State<T> = [T; 5];

fn rhs<T: Real>(t: T, y: &State<T>, alpha: T, inv_b: T) -> State<T> {
    let f = y[0];
    let g = y[1];
    let s = t + alpha;
    let f2 = f * f;
    let two = T::lit(2.0);
    [
        g,
        s * s * f - inv_b * (T::one() - f2) * f,
        f2 * f2,
        two * s * f2,
        g * g + s * s * f2 - T::lit(0.5) * inv_b * (two * f2 - f2 * f2),
    ]
}

fn rk4<T: Real>(t: T, y: &State<T>, h: T, alpha: T, inv_b: T) -> State<T> {
    let add = |a: &State<T>, k: &State<T>, c: T| {
        let mut out = *a;
        for i in 0..5 {
            out[i] = a[i] + c * k[i];
        }
        out
    };
    let half = T::lit(0.5) * h;
    let k1 = rhs(t, y, alpha, inv_b);
    let k2 = rhs(t + half, &add(y, &k1, half), alpha, inv_b);
    let k3 = rhs(t + half, &add(y, &k2, half), alpha, inv_b);
    let k4 = rhs(t + h, &add(y, &k3, h), alpha, inv_b);
    let mut out = *y;
    for i in 0..5 {
        out[i] = y[i] + h / T::lit(6.0) * (k1[i] + T::lit(2.0) * k2[i] + T::lit(2.0) * k3[i] + k4[i]);
    }
    out
}

/// Integrates from `f(0) = p` until the trajectory crosses zero or turns up.
/// Returns the fate and the state just before departure.
fn shoot<T: Real>(p: T, alpha: T, inv_b: T, opts: &ShootingOptions<T>) -> (Fate, State<T>, T) {
    let h = opts.step;
    let mut y: State<T> = [p, T::zero(), T::zero(), T::zero(), T::zero()];
    let mut t = T::zero();
    // At the optimal shift f''(0) > 0, so the profile first rises to a small
    // maximum; only an upturn after descending counts as a departure.
    let mut descending = false;
    while t < opts.t_end {
        let next = rk4(t, &y, h, alpha, inv_b);
        if next[0] < T::zero() {
            return (Fate::Crosses, y, t);
        }
        if next[1] < T::zero() {
            descending = true;
        } else if descending && next[1] > T::zero() {
            return (Fate::TurnsUp, y, t);
        } else if next[0] > T::one() {
            return (Fate::TurnsUp, y, t);
        }
        y = next;
        t = t + h;
    }
    (Fate::Undecided, y, t)
}

/// Decaying positive solution for a fixed shift `α`.
pub fn shoot_profile<T: Real>(alpha: T, b: T, opts: &ShootingOptions<T>) -> Result<ShootingSolution<T>> {
    check_b(b)?;
    let inv_b = T::one() / b;
    let trivial = ShootingSolution {
        alpha,
        f0: T::zero(),
        energy: T::zero(),
        energy_direct: T::zero(),
        alpha_derivative: T::zero(),
        t_cut: T::zero(),
    };
    // Tiny amplitude follows the linear equation: a zero crossing means the
    // linear ground state lies below 1/b and a nontrivial solution exists.
    let mut lo = T::lit(1e-6);
    if shoot(lo, alpha, inv_b, opts).0 != Fate::Crosses {
        return Ok(trivial);
    }
    let mut hi = T::one();
    if shoot(hi, alpha, inv_b, opts).0 != Fate::TurnsUp {
        return Err(Error::Numeric("shooting from f(0) = 1 does not turn up".into()));
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, alpha, inv_b, opts).0 {
            Fate::Crosses => lo = mid,
            Fate::TurnsUp => hi = mid,
            Fate::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let (_, y, t_cut) = shoot(lo, alpha, inv_b, opts);
    Ok(ShootingSolution {
        alpha,
        f0: lo,
        energy: -T::lit(0.5) * inv_b * y[2],
        energy_direct: y[4],
        alpha_derivative: y[3],
        t_cut,
    })
}

fn has_nontrivial<T: Real>(alpha: T, b: T, opts: &ShootingOptions<T>) -> bool {
    shoot(T::lit(1e-6), alpha, T::one() / b, opts).0 == Fate::Crosses
}

/// `α★` as the root of `α ↦ ∫ 2(t+α) f_α²`. The option bracket is first
/// narrowed to the shifts that admit a nontrivial solution, since the
/// derivative vanishes identically outside that window.
pub fn shoot_joint<T: Real>(b: T, opts: &ShootingOptions<T>) -> Result<ShootingSolution<T>> {
    check_b(b)?;
    let probes = 400;
    let width = (opts.alpha_hi - opts.alpha_lo) / T::from_usize_lossy(probes);
    let window: Vec<T> = (0..=probes)
        .map(|k| opts.alpha_lo + T::from_usize_lossy(k) * width)
        .filter(|&a| has_nontrivial(a, b, opts))
        .collect();
    let (lo, hi) = match (window.first(), window.last()) {
        (Some(&lo), Some(&hi)) if hi > lo => (lo, hi),
        _ => {
            return Err(Error::Regime(format!(
                "no nontrivial solution for b = {b} on the bracket"
            )))
        }
    };
    let mut failure = None;
    let root = bisect_root(
        |a| match shoot_profile(a, b, opts) {
            Ok(s) => s.alpha_derivative,
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        lo,
        hi,
        opts.tol_alpha,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let alpha = root.ok_or_else(|| Error::Search("α derivative does not change sign on the bracket".into()))?;
    shoot_profile(alpha, b, opts)
}
