use super::{check_b, EffectiveSolution, Profile1D};
use crate::error::Result;
use crate::scalar::{compensated_sum, Real};

/// Discrete `E_α[f]`: forward differences for `|f'|²` and trapezoidal
/// weights for the potential and nonlinear terms.
pub fn eval_energy_1d<T: Real>(f: &Profile1D<T>, alpha: T, b: T) -> Result<T> {
    check_b(b)?;
    f.check_finite()?;
    Ok(energy_unchecked(f, alpha, b))
}

pub(crate) fn energy_unchecked<T: Real>(f: &Profile1D<T>, alpha: T, b: T) -> T {
    let g = &f.grid;
    let h = g.h();
    let v = &f.values;
    let inv2b = T::one() / (T::lit(2.0) * b);
    let kinetic = compensated_sum(v.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0]))) / h;
    let potential = compensated_sum((0..g.n()).map(|i| {
        let s = g.point(i) + alpha;
        let f2 = v[i] * v[i];
        g.weight(i) * (s * s * f2 - inv2b * (T::lit(2.0) * f2 - f2 * f2))
    }));
    kinetic + potential
}

/// Partial derivatives `∂E/∂f_i` of the discrete energy.
pub fn energy_gradient<T: Real>(f: &Profile1D<T>, alpha: T, b: T) -> Vec<T> {
    let g = &f.grid;
    let n = g.n();
    let h = g.h();
    let v = &f.values;
    let two = T::lit(2.0);
    let inv_b = T::one() / b;
    (0..n)
        .map(|i| {
            let mut lap = T::zero();
            if i > 0 {
                lap = lap + (v[i] - v[i - 1]);
            }
            if i + 1 < n {
                lap = lap + (v[i] - v[i + 1]);
            }
            let s = g.point(i) + alpha;
            two * lap / h + g.weight(i) * two * (s * s * v[i] - inv_b * (T::one() - v[i] * v[i]) * v[i])
        })
        .collect()
}

/// Discrete Euler-Lagrange residual `∂E/∂f_i / (2 w_i)`, i.e. the
/// finite-difference form of `−f'' + (t+α)² f − (1/b)(1−f²) f` with the
/// mirrored ghost node at both ends.
pub(crate) fn scaled_residual<T: Real>(f: &Profile1D<T>, alpha: T, b: T) -> Vec<T> {
    let grad = energy_gradient(f, alpha, b);
    grad.iter()
        .enumerate()
        .map(|(i, &gi)| gi / (T::lit(2.0) * f.grid.weight(i)))
        .collect()
}

/// Sup-norm of the interior ODE residual plus an estimate of `|f'(0)|`.
pub fn el_residual_profile<T: Real>(f: &Profile1D<T>, alpha: T, b: T) -> Result<T> {
    check_b(b)?;
    f.check_finite()?;
    let g = &f.grid;
    let n = g.n();
    let h = g.h();
    let v = &f.values;
    let inv_b = T::one() / b;
    let mut sup = T::zero();
    for i in 1..n - 1 {
        let s = g.point(i) + alpha;
        let d2 = (v[i + 1] - T::lit(2.0) * v[i] + v[i - 1]) / (h * h);
        let r = -d2 + s * s * v[i] - inv_b * (T::one() - v[i] * v[i]) * v[i];
        sup = sup.max(r.abs());
    }
    // One-sided slope corrected by the curvature the equation predicts at 0.
    let f2_at_0 = (alpha * alpha - inv_b * (T::one() - v[0] * v[0])) * v[0];
    let slope = (v[1] - v[0]) / h - T::lit(0.5) * h * f2_at_0;
    Ok(sup + slope.abs())
}

pub fn el_residual<T: Real>(sol: &EffectiveSolution<T>) -> Result<T> {
    el_residual_profile(&sol.f_star, sol.alpha_star, sol.b)
}

/// `∂E_α/∂α` at a fixed profile, `Σ w_i 2(t_i+α) f_i²`. At a minimizer of the
/// inner problem this is the derivative of `α ↦ E_α`.
pub fn hellmann_feynman<T: Real>(f: &Profile1D<T>, alpha: T) -> T {
    f.integrate(|t, v| T::lit(2.0) * (t + alpha) * v * v)
}
