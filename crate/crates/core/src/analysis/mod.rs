//! Asymptotic checks of the 2D minimizer against the 1D effective model:
//! energy ratio, density profile, Agmon decay, restriction to the boundary
//! layer and the splitting `ψ = f★ u e^{−iα★s}` with its lower bound.

mod splitting;
mod sweep;

pub use splitting::{
    interpolate_covariant, layer_functional, split_functional, splitting_energy, LayerGrid, SplitReport,
};
pub use sweep::{
    make_sweep, read_sweep_csv, sweep_record, write_sweep_csv, RemainderFit, SweepConfig, SweepFlags, SweepOutcome,
    SweepRecord, CSV_HEADER,
};

use crate::effective1d::EffectiveSolution;
use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::gl2d::{eval_gl_energy, eval_gl_energy_restricted, tangential_potential, GLResult, Grid2D};
use crate::numerics::linear_fit;
use crate::scalar::Real;

/// `ε E / (|∂Ω| E★)`.
pub fn energy_ratio<T: Real>(energy: T, epsilon: T, perimeter: T, sol: &EffectiveSolution<T>) -> Result<T> {
    if sol.is_trivial() || sol.energy == T::zero() {
        return Err(Error::NotApplicable(
            "energy ratio needs a nontrivial 1D solution".into(),
        ));
    }
    Ok(epsilon * energy / (perimeter * sol.energy))
}

/// `(‖|ψ|² − f★²(dist/ε)‖_{L²(Ω)}, ‖f★²(dist/ε)‖_{L²(Ω)})` by the midpoint
/// rule on the active cells.
pub fn density_l2_diff<T: Real>(result: &GLResult<T>, grid: &Grid2D<T>, sol: &EffectiveSolution<T>) -> Result<(T, T)> {
    result.psi.check_grid(grid)?;
    let eps = grid.spec.epsilon;
    let mut diff = T::zero();
    let mut norm = T::zero();
    for k in 0..grid.len() {
        if !grid.active[k] {
            continue;
        }
        let model = sol.f(grid.dist[k] / eps).powi(2);
        let d = result.psi.values[k].norm_sqr() - model;
        diff = diff + d * d;
        norm = norm + model * model;
    }
    let area = grid.cell_area();
    Ok(((diff * area).sqrt(), (norm * area).sqrt()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgmonFit<T> {
    /// Slope of `log|ψ|` against `dist/ε`.
    pub rate: T,
    pub intercept: T,
    pub samples: usize,
    /// `∫_{dist > τ}|ψ|² / ∫_Ω|ψ|²`.
    pub bulk_fraction: T,
}

/// Fits `log|ψ|` against `dist/ε` over the annulus `dist ∈ [2ε, τ_layer]`.
pub fn agmon_check<T: Real>(result: &GLResult<T>, grid: &Grid2D<T>) -> Result<AgmonFit<T>> {
    result.psi.check_grid(grid)?;
    let eps = grid.spec.epsilon;
    let tau = grid.spec.layer_depth();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut mass = T::zero();
    let mut bulk = T::zero();
    for k in 0..grid.len() {
        if !grid.active[k] {
            continue;
        }
        let z = result.psi.values[k];
        let m = z.norm_sqr();
        mass = mass + m;
        if grid.dist[k] > tau {
            bulk = bulk + m;
        }
        let d = grid.dist[k];
        if d >= T::lit(2.0) * eps && d <= tau && m > T::zero() {
            xs.push(d / eps);
            ys.push(z.norm().ln());
        }
    }
    if xs.len() < 10 {
        return Err(Error::Precondition(format!(
            "only {} samples in the Agmon annulus",
            xs.len()
        )));
    }
    let (rate, intercept) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::Precondition("degenerate Agmon annulus".into()))?;
    let bulk_fraction = if mass > T::zero() { bulk / mass } else { T::zero() };
    Ok(AgmonFit {
        rate,
        intercept,
        samples: xs.len(),
        bulk_fraction,
    })
}

/// `|E − E_{A_ε}| / |E|` with `E_{A_ε}` the energy of the layer cells
/// (cut layer and corner cells) and the links between them.
pub fn restriction_defect<T: Real>(result: &GLResult<T>, grid: &Grid2D<T>) -> Result<T> {
    let full = eval_gl_energy(&result.psi, &result.potential, &result.config, grid)?;
    let layer: Vec<bool> = grid.regions.iter().map(|r| r.in_layer()).collect();
    let restricted = eval_gl_energy_restricted(&result.psi, &result.potential, &result.config, grid, &layer)?;
    if full == T::zero() {
        return Ok(T::zero());
    }
    Ok((full - restricted).abs() / full.abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialEstimate<T> {
    /// `‖a_A + t‖_{L²(A_cut)}` in rescaled coordinates.
    pub l2: T,
    /// `l2 / (ε|log ε|)`.
    pub constant: T,
    /// `sup_s |a_A(s,0) − εδ_ε|`.
    pub boundary_defect: T,
    pub delta: T,
}

/// Tangential potential of the result's field sampled with spacing `hs` in
/// `s` and `nt` intervals in `t`.
pub fn potential_estimate<T: Real>(
    result: &GLResult<T>,
    grid: &Grid2D<T>,
    hs: T,
    nt: usize,
) -> Result<PotentialEstimate<T>> {
    let lp = tangential_potential(&result.potential, &grid.param, &grid.spec, hs, nt)?;
    let eps = grid.spec.epsilon;
    let l2 = lp.deviation_l2();
    Ok(PotentialEstimate {
        l2,
        constant: l2 / (eps * grid.spec.log_factor()),
        boundary_defect: lp.boundary_defect(),
        delta: lp.delta,
    })
}

/// Fraction of `|ψ|²` carried by the corner cells.
pub fn corner_mass_fraction<T: Real>(result: &GLResult<T>, grid: &Grid2D<T>) -> T {
    let mut mass = T::zero();
    let mut corner = T::zero();
    for k in 0..grid.len() {
        if grid.active[k] {
            let m = result.psi.values[k].norm_sqr();
            mass = mass + m;
            if matches!(grid.regions[k], Region::Corner(_)) {
                corner = corner + m;
            }
        }
    }
    if mass > T::zero() {
        corner / mass
    } else {
        T::zero()
    }
}
