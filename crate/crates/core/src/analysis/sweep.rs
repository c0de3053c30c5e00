use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{
    agmon_check, corner_mass_fraction, density_l2_diff, energy_ratio, interpolate_covariant, potential_estimate,
    restriction_defect, splitting_energy,
};
use crate::effective1d::{minimize_joint, EffectiveSolution, Grid1D};
use crate::error::{Error, Result};
use crate::geometry::{CurvilinearPolygon, LayerSpec};
use crate::gl2d::{
    build_trial_state, eval_gl_energy, make_reference_potential, minimize_gl, ComplexField2D, FieldMode, GLConfig,
    GLResult, Grid2D,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Cells along the longer side of the bounding box.
    pub resolution: usize,
    pub c0: f64,
    pub c1: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub field_mode: FieldMode,
    /// Worker threads across ε values; 0 uses the global pool.
    pub jobs: usize,
    /// Arc-length spacing for sampling `a_A`.
    pub potential_hs: f64,
    /// `t` intervals for sampling `a_A`.
    pub potential_nt: usize,
    /// Grids solved before the fine one, each at half the resolution of
    /// the next; the coarsest starts from its trial state.
    pub coarse_levels: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            resolution: 512,
            c0: 1.5,
            c1: 1.5,
            tol: 1e-6,
            max_iter: 20_000,
            field_mode: FieldMode::Frozen,
            jobs: 0,
            potential_hs: 0.25,
            potential_nt: 40,
            coarse_levels: 2,
        }
    }
}

/// One ε of a sweep. The first eleven fields are the fixed CSV columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub b: f64,
    pub epsilon: f64,
    pub e_gl: f64,
    pub e_trial: f64,
    pub ratio: f64,
    pub density_l2_diff: f64,
    pub density_l2_norm: f64,
    pub bulk_mass_fraction: f64,
    pub agmon_rate: f64,
    pub eu_value: f64,
    pub eu_lower_term: f64,
    pub e1d_star: f64,
    pub perimeter: f64,
    pub trial_ratio: f64,
    pub split_layer_energy: f64,
    pub split_identity_residual: f64,
    pub tol_quad: f64,
    pub restriction_defect: f64,
    pub potential_l2: f64,
    pub potential_constant: f64,
    pub corner_mass_fraction: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub alpha_mismatch: f64,
    pub resolution: usize,
}

pub const CSV_HEADER: &str =
    "b,epsilon,E_gl,E_trial,ratio,density_l2_diff,density_l2_norm,bulk_fraction,agmon_rate,Eu,Eu_lower,\
E1D_star,perimeter,trial_ratio,split_layer_energy,split_residual,tol_quad,restriction_defect,a_l2,a_constant,\
corner_fraction,residual,iterations,converged,alpha_mismatch,resolution";

impl SweepRecord {
    fn floats(&self) -> [f64; 22] {
        [
            self.b,
            self.epsilon,
            self.e_gl,
            self.e_trial,
            self.ratio,
            self.density_l2_diff,
            self.density_l2_norm,
            self.bulk_mass_fraction,
            self.agmon_rate,
            self.eu_value,
            self.eu_lower_term,
            self.e1d_star,
            self.perimeter,
            self.trial_ratio,
            self.split_layer_energy,
            self.split_identity_residual,
            self.tol_quad,
            self.restriction_defect,
            self.potential_l2,
            self.potential_constant,
            self.corner_mass_fraction,
            self.residual,
        ]
    }

    pub fn to_csv_line(&self) -> String {
        let mut cols: Vec<String> = self.floats().iter().map(|v| format!("{v:.16e}")).collect();
        cols.push(self.iterations.to_string());
        cols.push(self.converged.to_string());
        cols.push(format!("{:.16e}", self.alpha_mismatch));
        cols.push(self.resolution.to_string());
        cols.join(",")
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 26 {
            return Err(Error::Format(format!(
                "sweep row has {} columns, expected 26",
                cols.len()
            )));
        }
        let bad = |i: usize| Error::Format(format!("column {i} ({:?}) is malformed", cols[i]));
        let mut v = [0.0; 22];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = cols[i].parse().map_err(|_| bad(i))?;
        }
        Ok(Self {
            b: v[0],
            epsilon: v[1],
            e_gl: v[2],
            e_trial: v[3],
            ratio: v[4],
            density_l2_diff: v[5],
            density_l2_norm: v[6],
            bulk_mass_fraction: v[7],
            agmon_rate: v[8],
            eu_value: v[9],
            eu_lower_term: v[10],
            e1d_star: v[11],
            perimeter: v[12],
            trial_ratio: v[13],
            split_layer_energy: v[14],
            split_identity_residual: v[15],
            tol_quad: v[16],
            restriction_defect: v[17],
            potential_l2: v[18],
            potential_constant: v[19],
            corner_mass_fraction: v[20],
            residual: v[21],
            iterations: cols[22].parse().map_err(|_| bad(22))?,
            converged: cols[23].parse().map_err(|_| bad(23))?,
            alpha_mismatch: cols[24].parse().map_err(|_| bad(24))?,
            resolution: cols[25].parse().map_err(|_| bad(25))?,
        })
    }

    /// `|ratio − 1|`.
    pub fn ratio_defect(&self) -> f64 {
        (self.ratio - 1.0).abs()
    }

    pub fn density_ratio(&self) -> f64 {
        self.density_l2_diff / self.density_l2_norm
    }

    /// `norm / √ε`.
    pub fn norm_constant(&self) -> f64 {
        self.density_l2_norm / self.epsilon.sqrt()
    }
}

pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.to_csv_line())?;
    }
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(r: R) -> Result<Vec<SweepRecord>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty sweep file".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Format("unexpected sweep header".into()));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(SweepRecord::from_csv_line(&line)?);
        }
    }
    Ok(out)
}

/// Indicators that did not behave as the asymptotics predict. Trends use a
/// 5% slack for discretization noise.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepFlags {
    pub messages: Vec<String>,
}

impl SweepFlags {
    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    fn check(records: &[SweepRecord]) -> Self {
        let mut messages = Vec::new();
        let slack = 1.05;
        for w in records.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.ratio_defect() > a.ratio_defect() * slack {
                messages.push(format!("|ratio − 1| grows from ε = {} to ε = {}", a.epsilon, b.epsilon));
            }
            if b.density_ratio() > a.density_ratio() * slack {
                messages.push(format!(
                    "density diff/norm grows from ε = {} to ε = {}",
                    a.epsilon, b.epsilon
                ));
            }
            if b.bulk_mass_fraction > a.bulk_mass_fraction * slack {
                messages.push(format!(
                    "bulk fraction grows from ε = {} to ε = {}",
                    a.epsilon, b.epsilon
                ));
            }
        }
        for r in records {
            if !r.converged {
                messages.push(format!(
                    "ε = {}: minimizer stopped at residual {:e}",
                    r.epsilon, r.residual
                ));
            }
            if r.e_gl > r.e_trial {
                messages.push(format!("ε = {}: E_gl exceeds the trial energy", r.epsilon));
            }
            if r.split_identity_residual > r.tol_quad {
                messages.push(format!(
                    "ε = {}: splitting identity off by {:e} > {:e}",
                    r.epsilon, r.split_identity_residual, r.tol_quad
                ));
            }
            if r.eu_value < r.eu_lower_term - r.tol_quad {
                messages.push(format!("ε = {}: E[u] below its lower term", r.epsilon));
            }
        }
        Self { messages }
    }
}

/// Least-squares fit of `E_gl − |∂Ω|E★/ε` against `g(ε)` through the
/// origin, for `g = |log ε|²` and `g = |log ε|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderFit {
    pub log2_coefficient: f64,
    /// Relative RMS misfit of the `|log ε|²` model.
    pub log2_misfit: f64,
    pub log_coefficient: f64,
    pub log_misfit: f64,
}

fn fit_through_origin(g: &[f64], y: &[f64]) -> (f64, f64) {
    let gg: f64 = g.iter().map(|v| v * v).sum();
    let c = g.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / gg;
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let res: f64 = g.iter().zip(y).map(|(a, b)| (b - c * a).powi(2)).sum();
    (c, (res / yy.max(f64::MIN_POSITIVE)).sqrt())
}

impl RemainderFit {
    pub fn from_records(records: &[SweepRecord]) -> Option<Self> {
        if records.len() < 2 {
            return None;
        }
        let y: Vec<f64> = records
            .iter()
            .map(|r| r.e_gl - r.perimeter * r.e1d_star / r.epsilon)
            .collect();
        let l: Vec<f64> = records.iter().map(|r| r.epsilon.ln().abs()).collect();
        let l2: Vec<f64> = l.iter().map(|v| v * v).collect();
        let (c2, m2) = fit_through_origin(&l2, &y);
        let (c1, m1) = fit_through_origin(&l, &y);
        Some(Self {
            log2_coefficient: c2,
            log2_misfit: m2,
            log_coefficient: c1,
            log_misfit: m1,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    /// `(ε, error)` for members that produced no record.
    pub failures: Vec<(f64, String)>,
    pub flags: SweepFlags,
    pub fit: Option<RemainderFit>,
    pub solution: EffectiveSolution<f64>,
}

/// Computes one sweep member from a prepared grid.
pub fn sweep_record(
    grid: &Grid2D<f64>,
    sol: &EffectiveSolution<f64>,
    b: f64,
    cfg: &SweepConfig,
) -> Result<SweepRecord> {
    let eps = grid.spec.epsilon;
    let a = make_reference_potential(grid);
    let trial = build_trial_state(grid, sol, &a)?;
    let mut gl = GLConfig::new(b, eps)?.with_mode(cfg.field_mode);
    gl.tol = cfg.tol;
    gl.max_iter = cfg.max_iter;
    let e_trial = eval_gl_energy(&trial.psi, &a, &gl, grid)?;
    let mut init = trial.psi;
    if let Some(start) = coarse_start(grid, sol, &gl, cfg)? {
        // Kept only below the trial energy, so E_gl ≤ E_trial still holds.
        if eval_gl_energy(&start, &a, &gl, grid)? < e_trial {
            init = start;
        }
    }
    let (result, converged) = minimize_or_last(grid, &gl, &init)?;
    let perimeter = grid.param.total_length;
    let (diff, norm) = density_l2_diff(&result, grid, sol)?;
    let agmon = agmon_check(&result, grid)?;
    let split = splitting_energy(&result, grid, sol, None)?;
    let pot = potential_estimate(&result, grid, cfg.potential_hs, cfg.potential_nt)?;
    Ok(SweepRecord {
        b,
        epsilon: eps,
        e_gl: result.energy,
        e_trial,
        ratio: energy_ratio(result.energy, eps, perimeter, sol)?,
        density_l2_diff: diff,
        density_l2_norm: norm,
        bulk_mass_fraction: agmon.bulk_fraction,
        agmon_rate: agmon.rate,
        eu_value: split.eu,
        eu_lower_term: split.lower,
        e1d_star: sol.energy,
        perimeter,
        trial_ratio: energy_ratio(e_trial, eps, perimeter, sol)?,
        split_layer_energy: split.layer_energy,
        split_identity_residual: split.identity_residual,
        tol_quad: split.tol_quad,
        restriction_defect: restriction_defect(&result, grid)?,
        potential_l2: pot.l2,
        potential_constant: pot.constant,
        corner_mass_fraction: corner_mass_fraction(&result, grid),
        residual: result.residual,
        iterations: result.diagnostics.iterations,
        converged,
        alpha_mismatch: trial.alpha_mismatch,
        resolution: cfg.resolution,
    })
}

fn minimize_or_last(
    grid: &Grid2D<f64>,
    gl: &GLConfig<f64>,
    init: &ComplexField2D<f64>,
) -> Result<(GLResult<f64>, bool)> {
    match minimize_gl(grid, gl, init) {
        Ok(r) => Ok((r, true)),
        Err(f) => match (f.error, f.last) {
            (Error::Convergence { .. }, Some(last)) if last.energy.is_finite() => Ok((*last, false)),
            (e, _) => Err(e),
        },
    }
}

/// Minimizer of the coarser grids carried up to `grid`, or `None` when no
/// coarser grid resolves the layer. Levels are solved to 100·tol; an
/// unconverged level still passes its last iterate on.
fn coarse_start(
    grid: &Grid2D<f64>,
    sol: &EffectiveSolution<f64>,
    gl: &GLConfig<f64>,
    cfg: &SweepConfig,
) -> Result<Option<ComplexField2D<f64>>> {
    let n = grid.nx().max(grid.ny());
    let level = GLConfig {
        tol: 100.0 * gl.tol,
        ..*gl
    };
    let mut prev: Option<(Grid2D<f64>, GLResult<f64>)> = None;
    for k in (1..=cfg.coarse_levels).rev() {
        let nk = n >> k;
        let Ok(coarse) = Grid2D::new(&grid.domain, nk, grid.spec) else {
            continue;
        };
        let init = match &prev {
            Some((g, r)) => prolong(g, r, &coarse),
            None => build_trial_state(&coarse, sol, &make_reference_potential(&coarse))?.psi,
        };
        let (r, _) = minimize_or_last(&coarse, &level, &init)?;
        prev = Some((coarse, r));
    }
    Ok(prev.map(|(g, r)| prolong(&g, &r, grid)))
}

fn prolong(from: &Grid2D<f64>, r: &GLResult<f64>, to: &Grid2D<f64>) -> ComplexField2D<f64> {
    ComplexField2D::from_fn(to, |_, p| interpolate_covariant(from, &r.potential, &r.psi.values, p))
}

/// Runs the full pipeline (1D model, grid, trial state, minimizer,
/// analysis) for each ε. Aborts before any 2D work when `b` is outside the
/// surface regime, the ε list is not strictly decreasing, or a grid fails
/// its resolution checks; later failures are collected per member.
pub fn make_sweep(
    domain: &CurvilinearPolygon<f64>,
    b: f64,
    epsilons: &[f64],
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("empty ε list".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("ε list must be strictly decreasing".into()));
    }
    let sol = minimize_joint(b, Grid1D::default_grid())?;
    if !sol.in_regime || sol.is_trivial() {
        return Err(Error::Regime(format!(
            "b = {b} is outside the surface regime (Θ₀ = {}, 1/Θ₀ = {})",
            sol.theta0,
            1.0 / sol.theta0
        )));
    }
    let grids = epsilons
        .iter()
        .map(|&eps| Grid2D::new(domain, cfg.resolution, LayerSpec::new(eps, cfg.c0, cfg.c1)?))
        .collect::<Result<Vec<_>>>()?;
    let run = || -> Vec<Result<SweepRecord>> {
        use rayon::prelude::*;
        grids.par_iter().map(|g| sweep_record(g, &sol, b, cfg)).collect()
    };
    let results = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run)
    } else {
        run()
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (&eps, r) in epsilons.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((eps, e.to_string())),
        }
    }
    let flags = SweepFlags::check(&records);
    let fit = RemainderFit::from_records(&records);
    Ok(SweepOutcome {
        records,
        failures,
        flags,
        fit,
        solution: sol,
    })
}
