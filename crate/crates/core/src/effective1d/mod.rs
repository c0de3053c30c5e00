//! The one-dimensional effective problem on the half-line.
//!
//! For a shift `α` and field parameter `b` the functional is
//!
//! ```text
//! E_α[f] = ∫₀^∞ |f'|² + (t+α)² f² − (1/2b)(2f² − f⁴) dt
//! ```
//!
//! and `E★ = inf_α inf_f E_α[f]`. Everything here works on a truncated
//! uniform grid with trapezoidal weights, so the discrete energy is an exact
//! quadratic-plus-quartic form whose gradient is available in closed form.

mod cost;
mod energy;
mod shooting;
mod solver;
mod theta0;

pub use cost::{check_decay, check_decay_profile, compute_cost_table, CostTable, DecayFit};
pub use energy::{el_residual, el_residual_profile, energy_gradient, eval_energy_1d, hellmann_feynman};
pub use shooting::{shoot_joint, shoot_profile, ShootingOptions, ShootingSolution};
pub use solver::{
    minimize_joint, minimize_joint_with, minimize_profile, minimize_profile_with, InnerOptions, InnerReport,
    OuterOptions,
};
pub use theta0::{linear_ground_state, solve_theta0, solve_theta0_single, Theta0};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default truncation length of the half-line.
pub const DEFAULT_T_MAX: f64 = 15.0;
/// Default number of grid points (spacing 5e-4 at the default length).
pub const DEFAULT_N: usize = 30_001;

/// Uniform grid `t_i = i·h` on `[0, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D<T> {
    t_max: T,
    n: usize,
}

impl<T: Real> Grid1D<T> {
    pub fn new(t_max: T, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("grid needs at least 3 points, got {n}")));
        }
        if !(t_max > T::zero()) || !t_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "t_max must be positive and finite, got {t_max}"
            )));
        }
        Ok(Self { t_max, n })
    }

    pub fn default_grid() -> Self {
        Self {
            t_max: T::lit(DEFAULT_T_MAX),
            n: DEFAULT_N,
        }
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.t_max / T::from_usize_lossy(self.n - 1)
    }

    pub fn point(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.h()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Trapezoidal weight of node `i`.
    pub fn weight(&self, i: usize) -> T {
        if i == 0 || i + 1 == self.n {
            T::lit(0.5) * self.h()
        } else {
            self.h()
        }
    }

    pub fn weights(&self) -> Vec<T> {
        (0..self.n).map(|i| self.weight(i)).collect()
    }

    /// Halves the spacing; every old node is kept.
    pub fn refined(&self) -> Self {
        Self {
            t_max: self.t_max,
            n: 2 * self.n - 1,
        }
    }

    /// Same spacing, rounded down to a whole number of steps, on a shorter or
    /// longer interval.
    pub fn with_t_max(&self, t_max: T) -> Result<Self> {
        let steps = (t_max / self.h()).round().to_usize().unwrap_or(0);
        Self::new(T::from_usize_lossy(steps) * self.h(), steps + 1)
    }

    pub(crate) fn require_margin(&self, min_t_max: f64) -> Result<()> {
        if self.t_max < T::lit(min_t_max) {
            return Err(Error::Precondition(format!(
                "t_max = {} is below the decay margin {min_t_max}",
                self.t_max
            )));
        }
        Ok(())
    }
}

/// Real profile sampled on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Profile1D<T> {
    pub grid: Grid1D<T>,
    pub values: Vec<T>,
}

impl<T: Real> Profile1D<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidInput(format!(
                "profile has {} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D<T>, f: impl Fn(T) -> T) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid1D<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.n()],
        }
    }

    /// The default initial guess `e^{−t²/2}`.
    pub fn gaussian(grid: Grid1D<T>) -> Self {
        Self::from_fn(grid, |t| (-T::lit(0.5) * t * t).exp())
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }

    /// True when `f_{i+1} ≤ f_i + slack` everywhere.
    pub fn is_nonincreasing(&self, slack: T) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    /// Linear interpolation; zero beyond `t_max`, clamped at 0.
    pub fn eval(&self, t: T) -> T {
        let h = self.grid.h();
        if t <= T::zero() {
            return self.values[0];
        }
        if t >= self.grid.t_max() {
            return if t == self.grid.t_max() {
                self.values[self.grid.n() - 1]
            } else {
                T::zero()
            };
        }
        let x = t / h;
        let i = x.floor().to_usize().unwrap_or(0).min(self.grid.n() - 2);
        let frac = x - T::from_usize_lossy(i);
        self.values[i] * (T::one() - frac) + self.values[i + 1] * frac
    }

    /// Trapezoidal integral of `g(t_i, f_i)`.
    pub fn integrate(&self, g: impl Fn(T, T) -> T) -> T {
        crate::scalar::compensated_sum(
            (0..self.grid.n()).map(|i| self.grid.weight(i) * g(self.grid.point(i), self.values[i])),
        )
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("profile value at index {i} is not finite")));
        }
        Ok(())
    }
}

/// Minimizing pair `(α★, f★)` with its energy.
#[derive(Clone, Debug)]
pub struct EffectiveSolution<T> {
    pub b: T,
    pub alpha_star: T,
    pub f_star: Profile1D<T>,
    pub energy: T,
    /// Threshold constant computed on the same grid.
    pub theta0: T,
    pub alpha0: T,
    /// Centered difference of `α ↦ E_α` at `α★`.
    pub d_energy_d_alpha: T,
    /// Sup-norm of the discrete Euler-Lagrange residual left by the inner solver.
    pub inner_residual: T,
    /// `1 < b < 1/Θ₀`.
    pub in_regime: bool,
    /// The outer landscape was flat; `alpha_star` is the midpoint of the flat set.
    pub flat_outer: bool,
}

impl<T: Real> EffectiveSolution<T> {
    /// A solution is trivial when the profile is numerically zero.
    pub fn is_trivial(&self) -> bool {
        self.f_star.sup_norm() <= T::lit(1e-6)
    }

    pub fn grid(&self) -> Grid1D<T> {
        self.f_star.grid
    }

    /// `f★(t)` by linear interpolation, zero beyond the grid.
    pub fn f(&self, t: T) -> T {
        self.f_star.eval(t)
    }
}

pub(crate) fn check_b<T: Real>(b: T) -> Result<()> {
    if !(b > T::zero()) || !b.is_finite() {
        return Err(Error::Parameter(format!("b must be positive and finite, got {b}")));
    }
    Ok(())
}
