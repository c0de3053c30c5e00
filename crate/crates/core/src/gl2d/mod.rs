//! Two-dimensional Ginzburg-Landau functional in `ε`-units on corner
//! domains:
//!
//! `∫_Ω |(∇ + iA/ε²)ψ|² − (2|ψ|² − |ψ|⁴)/(2bε²) + ε⁻⁴ ∫ |curl A − 1|²`,
//!
//! discretized with link variables so that the gauge invariance
//! `ψ → ψe^{iφ}, A → A − ε²∇φ` is exact on the grid.
//!
//! The field is frozen at the reference potential `F` by default; the
//! alternating mode relaxes `A` on the bounding box as well.

mod energy;
mod gauge;
mod grid;
mod io;
mod solver;
mod trial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use energy::{
    eval_gl_energy, eval_gl_energy_parts, eval_gl_energy_restricted, field_energy, gl_gradient, gl_residual,
    superconducting_current, Current, EnergyParts,
};
pub use gauge::{gauge_phase, tangential_potential, GaugePhase, LayerPotential};
pub use grid::{make_reference_potential, ComplexField2D, Grid2D, VectorPotential2D};
pub use io::{read_raster, write_csv, write_raster};
pub use solver::{minimize_gl, random_field};
pub use trial::{build_trial_state, depth_cutoff, TrialState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    #[default]
    Frozen,
    Alternating,
}

impl std::str::FromStr for FieldMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" => Ok(Self::Frozen),
            "alternating" => Ok(Self::Alternating),
            other => Err(Error::InvalidInput(format!("unknown field mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GLConfig<T> {
    pub b: T,
    pub epsilon: T,
    /// Bound on the sup norm of the ε²-scaled Euler-Lagrange residual.
    pub tol: T,
    pub max_iter: usize,
    pub field_mode: FieldMode,
    /// ψ/A relaxation rounds in alternating mode.
    pub field_rounds: usize,
}

impl<T: Real> GLConfig<T> {
    /// Frozen-field configuration with default tolerances. Only `b > 1` and
    /// `ε ∈ (0, 1)` are checked here; the upper end `b < 1/Θ₀` needs `Θ₀`,
    /// see [`GLConfig::check_regime`].
    pub fn new(b: T, epsilon: T) -> Result<Self> {
        if !(b > T::one()) || !b.is_finite() {
            return Err(Error::Regime(format!("b = {b} must exceed 1 for the surface regime")));
        }
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        Ok(Self {
            b,
            epsilon,
            tol: T::lit(1e-6),
            max_iter: 20_000,
            field_mode: FieldMode::Frozen,
            field_rounds: 4,
        })
    }

    pub fn with_mode(mut self, mode: FieldMode) -> Self {
        self.field_mode = mode;
        self
    }

    /// `1 < b < 1/Θ₀`.
    pub fn check_regime(&self, theta0: T) -> Result<()> {
        if self.b > T::one() && self.b * theta0 < T::one() {
            Ok(())
        } else {
            Err(Error::Regime(format!(
                "b = {} outside (1, 1/Θ₀) with Θ₀ = {theta0}",
                self.b
            )))
        }
    }

    /// `κ` with `ε = b^{-1/2} κ^{-1}`.
    pub fn kappa(&self) -> T {
        T::one() / (self.epsilon * self.b.sqrt())
    }

    /// Applied field `h_ex = bκ²`.
    pub fn h_ex(&self) -> T {
        self.b * self.kappa().powi(2)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GLDiagnostics<T> {
    /// `∫_{bulk}|ψ|² / ∫_Ω|ψ|²`, bulk meaning beyond the layer depth.
    pub bulk_mass_fraction: T,
    pub sup_modulus: T,
    pub iterations: usize,
    /// Energies after each accepted step, starting with the initial one.
    pub energy_history: Vec<T>,
    /// `‖(∇ + iA/ε²)ψ‖_{L²} · √ε`, reported without a bound.
    pub scaled_gradient_norm: T,
}

#[derive(Clone, Debug)]
pub struct GLResult<T> {
    pub psi: ComplexField2D<T>,
    pub potential: VectorPotential2D<T>,
    pub energy: T,
    pub residual: T,
    pub config: GLConfig<T>,
    pub diagnostics: GLDiagnostics<T>,
}

/// Solver failure; keeps the last iterate when there is one.
#[derive(Debug)]
pub struct GLFailure<T> {
    pub error: Error,
    pub last: Option<Box<GLResult<T>>>,
}

impl<T> std::fmt::Display for GLFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: std::fmt::Debug> std::error::Error for GLFailure<T> {}

impl<T> From<Error> for GLFailure<T> {
    fn from(error: Error) -> Self {
        Self { error, last: None }
    }
}
