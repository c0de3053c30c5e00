use super::Grid1D;
use crate::error::{Error, Result};
use crate::numerics::{golden_section, SymTridiagonal};
use crate::scalar::Real;

/// Minimal Neumann ground-state energy of `−d²/dt² + (t+α)²` over `α`.
#[derive(Clone, Copy, Debug)]
pub struct Theta0<T> {
    pub theta0: T,
    pub alpha0: T,
    /// `|Θ₀(h) − Θ₀(h/2)|`; zero when only one resolution was solved.
    pub gap: T,
}

/// Lowest eigenvalue of the discretized `−d²/dt² + (t+α)²` with natural
/// boundary conditions, in the same quadratic form the energy uses.
pub fn linear_ground_state<T: Real>(alpha: T, grid: Grid1D<T>) -> Result<T> {
    let n = grid.n();
    let h = grid.h();
    let w = grid.weights();
    let diag = (0..n)
        .map(|i| {
            let nb = if i == 0 || i + 1 == n { T::one() } else { T::lit(2.0) };
            let s = grid.point(i) + alpha;
            (nb / h + w[i] * s * s) / w[i]
        })
        .collect();
    let off = (0..n - 1).map(|i| -T::one() / (h * (w[i] * w[i + 1]).sqrt())).collect();
    let m = SymTridiagonal { diag, off };
    let lam = m.lowest_eigenvalue(T::epsilon() * T::lit(4.0));
    if !lam.is_finite() {
        return Err(Error::Numeric(format!("ground state at α = {alpha} is not finite")));
    }
    Ok(lam)
}

/// `Θ₀` and `α₀` on one grid.
pub fn solve_theta0_single<T: Real>(grid: Grid1D<T>) -> Result<Theta0<T>> {
    grid.require_margin(10.0)?;
    let mut failure = None;
    let m = golden_section(
        |a| match linear_ground_state(a, grid) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                T::infinity()
            }
        },
        T::lit(-2.0),
        T::zero(),
        T::lit(1e-9),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Theta0 {
        theta0: m.value,
        alpha0: m.x,
        gap: T::zero(),
    })
}

/// `Θ₀` on `grid`, with the gap to the once-refined grid as an error
/// estimate. The refined values are returned.
pub fn solve_theta0<T: Real>(grid: Grid1D<T>) -> Result<Theta0<T>> {
    let coarse = solve_theta0_single(grid)?;
    let fine = solve_theta0_single(grid.refined())?;
    Ok(Theta0 {
        gap: (fine.theta0 - coarse.theta0).abs(),
        ..fine
    })
}
