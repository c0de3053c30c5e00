use num_complex::Complex;
use rayon::prelude::*;

use super::gauge::GaugePhase;
use super::grid::{ComplexField2D, Grid2D, VectorPotential2D};
use crate::effective1d::EffectiveSolution;
use crate::error::{Error, Result};
use crate::geometry::{cutoff_chi, Region};
use crate::scalar::Real;

/// `χ(s) χ_T(t) f★(t) e^{−iα s} e^{iφ_F(s,t)}` on the grid, with `α` the
/// nearest shift to `α★` that makes `e^{−iαs}` single valued around the
/// boundary.
#[derive(Clone, Debug)]
pub struct TrialState<T> {
    pub psi: ComplexField2D<T>,
    pub alpha_closed: T,
    /// `alpha_closed − α★`, at most `πε/|∂Ω|` in size.
    pub alpha_mismatch: T,
    /// Winding `n` of the gauge phase.
    pub winding: i64,
}

/// Shift closest to `alpha` with `alpha·|∂Ω|/ε ∈ 2πℤ`.
pub(crate) fn closed_shift<T: Real>(alpha: T, perimeter: T, eps: T) -> T {
    let two_pi = T::PI() + T::PI();
    let ls = perimeter / eps;
    (alpha * ls / two_pi).round() * two_pi / ls
}

/// Smoothstep from 1 at `t ≤ T − 1` to 0 at `t ≥ T`, `T` the rescaled
/// layer depth.
pub fn depth_cutoff<T: Real>(t: T, depth: T) -> T {
    let x = (depth - t).max(T::zero()).min(T::one());
    x * x * (T::lit(3.0) - T::lit(2.0) * x)
}

/// Trial value at rescaled boundary coordinates.
pub(crate) fn trial_value<T: Real>(
    gp: &GaugePhase<'_, T>,
    grid: &Grid2D<T>,
    sol: &EffectiveSolution<T>,
    alpha: T,
    s: T,
    t: T,
) -> Complex<T> {
    let chi = cutoff_chi(&grid.param, &grid.spec, s) * depth_cutoff(t, grid.spec.layer_depth() / grid.spec.epsilon);
    let f = sol.f(t);
    if chi == T::zero() || f == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let phase = -alpha * s + gp.phase_unchecked(s, t);
    Complex::new(phase.cos(), phase.sin()) * (chi * f)
}

/// Trial state on the active cells of the cut layer. Besides the corner
/// cut-off `χ(s)` it carries a ramp over the last unit of the rescaled layer
/// depth, so it vanishes on corner cells and in the bulk.
pub fn build_trial_state<T: Real>(
    grid: &Grid2D<T>,
    sol: &EffectiveSolution<T>,
    a: &VectorPotential2D<T>,
) -> Result<TrialState<T>> {
    if sol.is_trivial() {
        return Err(Error::NotApplicable(
            "trial state needs a nontrivial 1D solution".into(),
        ));
    }
    a.check_grid(grid)?;
    let gp = GaugePhase::new(a, &grid.param, &grid.spec);
    let eps = grid.spec.epsilon;
    let alpha = closed_shift(sol.alpha_star, grid.param.total_length, eps);
    let w = grid.spec.cell_halfwidth();
    let values: Vec<Complex<T>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.regions[k] != Region::Cut || grid.param.corner_distance(grid.sigma[k]) < w {
                return Complex::new(T::zero(), T::zero());
            }
            trial_value(&gp, grid, sol, alpha, grid.sigma[k] / eps, grid.dist[k] / eps)
        })
        .collect();
    Ok(TrialState {
        psi: ComplexField2D {
            nx: grid.nx(),
            ny: grid.ny(),
            values,
        },
        alpha_closed: alpha,
        alpha_mismatch: alpha - sol.alpha_star,
        winding: gp.winding,
    })
}
