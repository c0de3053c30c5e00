use std::io::Write;

use serde::Serialize;
use surfgl::analysis::{energy_ratio, make_sweep, write_sweep_csv, RemainderFit, SweepConfig, SweepFlags, SweepRecord};
use surfgl::effective1d::{compute_cost_table, el_residual, minimize_joint, solve_theta0, EffectiveSolution, Grid1D};
use surfgl::geometry::{CurvilinearPolygon, LayerSpec};
use surfgl::gl2d::{
    build_trial_state, eval_gl_energy, make_reference_potential, minimize_gl, random_field, write_csv, write_raster,
    GLConfig, GLResult, Grid2D,
};

use crate::check::{self, AcceptanceReport, Criterion};
use crate::config::{CheckConfig, GridConfig, Init, Solve1dConfig, Solve2dConfig, SweepSection};
use crate::output::OutDir;
use crate::{exit, Failure};

fn grid_1d(t_max: f64, n: usize) -> Result<Grid1D<f64>, Failure> {
    Ok(Grid1D::new(t_max, n)?)
}

#[derive(Serialize)]
struct Solve1dSummary<'a> {
    config: &'a Solve1dConfig,
    alpha_star: f64,
    energy: f64,
    el_residual: f64,
    d_energy_d_alpha: f64,
    f0: f64,
    sup_norm: f64,
    theta0: f64,
    in_regime: bool,
    trivial: bool,
    flat_outer: bool,
    min_cost: Option<f64>,
    potential_at_end: Option<f64>,
    warning: Option<String>,
}

/// Writes `profile.csv`, `cost.csv` (nontrivial profiles only) and
/// `summary.json`. Outside the surface regime the files are still written
/// and the command fails with the precondition code.
pub fn solve_1d(cfg: &Solve1dConfig, out: &OutDir) -> Result<(), Failure> {
    let sol = minimize_joint(cfg.b, grid_1d(cfg.t_max, cfg.n)?)?;
    let grid = sol.grid();
    out.write("profile.csv", |buf| {
        writeln!(buf, "t,f")?;
        for (i, v) in sol.f_star.values.iter().enumerate() {
            writeln!(buf, "{:.16e},{:.16e}", grid.point(i), v)?;
        }
        Ok(())
    })?;
    let table = compute_cost_table(&sol).ok();
    if let Some(t) = &table {
        out.write("cost.csv", |buf| {
            writeln!(buf, "t,F,K")?;
            for i in 0..grid.n() {
                writeln!(buf, "{:.16e},{:.16e},{:.16e}", grid.point(i), t.potential[i], t.cost[i])?;
            }
            Ok(())
        })?;
    }
    let warning = (!sol.in_regime).then(|| {
        format!(
            "b = {} is outside the surface regime (1, 1/Θ₀) = (1, {:.6}); the profile is {}",
            cfg.b,
            1.0 / sol.theta0,
            if sol.is_trivial() {
                "trivial"
            } else {
                "not a surface state"
            }
        )
    });
    let summary = Solve1dSummary {
        config: cfg,
        alpha_star: sol.alpha_star,
        energy: sol.energy,
        el_residual: el_residual(&sol)?,
        d_energy_d_alpha: sol.d_energy_d_alpha,
        f0: sol.f_star.values[0],
        sup_norm: sol.f_star.sup_norm(),
        theta0: sol.theta0,
        in_regime: sol.in_regime,
        trivial: sol.is_trivial(),
        flat_outer: sol.flat_outer,
        min_cost: table.as_ref().map(|t| t.min_cost()),
        potential_at_end: table.as_ref().map(|t| t.potential_at_end()),
        warning: warning.clone(),
    };
    out.json("summary.json", &summary)?;
    println!(
        "alpha_star = {:.10}  energy = {:.10e}  f(0) = {:.8}",
        sol.alpha_star, sol.energy, summary.f0
    );
    match warning {
        Some(w) => Err(Failure::new(exit::PRECONDITION, w)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Theta0Summary<'a> {
    config: &'a GridConfig,
    theta0: f64,
    alpha0: f64,
    gap: f64,
    warning: Option<String>,
}

/// Two-resolution agreement above this is reported with a warning.
pub const THETA0_GAP: f64 = 1e-4;

pub fn theta0(cfg: &GridConfig, out: &OutDir) -> Result<(), Failure> {
    let th = solve_theta0(grid_1d(cfg.t_max, cfg.n)?)?;
    let warning = (th.gap > THETA0_GAP).then(|| {
        format!(
            "two-resolution gap {:.3e} exceeds {THETA0_GAP:e}; refine the grid",
            th.gap
        )
    });
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    out.json(
        "theta0.json",
        &Theta0Summary {
            config: cfg,
            theta0: th.theta0,
            alpha0: th.alpha0,
            gap: th.gap,
            warning,
        },
    )?;
    println!(
        "theta0 = {:.10}  alpha0 = {:.10}  gap = {:.3e}",
        th.theta0, th.alpha0, th.gap
    );
    Ok(())
}

fn regime_solution(b: f64) -> Result<EffectiveSolution<f64>, Failure> {
    let sol = minimize_joint(b, Grid1D::default_grid())?;
    if !sol.in_regime || sol.is_trivial() {
        return Err(Failure::input(format!(
            "b = {b} is outside the surface regime (1, 1/Θ₀) = (1, {:.6})",
            1.0 / sol.theta0
        )));
    }
    Ok(sol)
}

#[derive(Serialize)]
struct Solve2dSummary<'a> {
    config: &'a Solve2dConfig,
    converged: bool,
    energy: f64,
    e_trial: f64,
    ratio: f64,
    residual: f64,
    iterations: usize,
    sup_modulus: f64,
    bulk_mass_fraction: f64,
    scaled_gradient_norm: f64,
    perimeter: f64,
    e1d_star: f64,
    alpha_mismatch: f64,
    active_cells: usize,
    kappa: f64,
    h_ex: f64,
}

/// Writes `psi.csv`, `psi.sglr`, `history.csv` and `summary.json`. A
/// minimizer that stops short still writes its last iterate, then fails
/// with the convergence code.
pub fn solve_2d(cfg: &Solve2dConfig, out: &OutDir) -> Result<(), Failure> {
    let domain = CurvilinearPolygon::named(&cfg.domain)?;
    let mut gl = GLConfig::new(cfg.b, cfg.epsilon)?.with_mode(cfg.field_mode);
    gl.tol = cfg.tol;
    gl.max_iter = cfg.max_iter;
    let sol = regime_solution(cfg.b)?;
    gl.check_regime(sol.theta0)?;
    let grid = Grid2D::new(&domain, cfg.resolution, LayerSpec::new(cfg.epsilon, cfg.c0, cfg.c1)?)?;
    let a = make_reference_potential(&grid);
    let trial = build_trial_state(&grid, &sol, &a)?;
    let e_trial = eval_gl_energy(&trial.psi, &a, &gl, &grid)?;
    let init = match cfg.init {
        Init::Trial => trial.psi.clone(),
        Init::Random => random_field(&grid, 0.5, cfg.seed),
    };
    let (result, failure): (GLResult<f64>, Option<Failure>) = match minimize_gl(&grid, &gl, &init) {
        Ok(r) => (r, None),
        Err(f) => match f.last {
            Some(last) => (*last, Some(f.error.into())),
            None => return Err(f.error.into()),
        },
    };
    out.write("psi.csv", |buf| Ok(write_csv(buf, &grid, &result.psi)?))?;
    out.write("psi.sglr", |buf| Ok(write_raster(buf, &grid, &result.psi)?))?;
    out.write("history.csv", |buf| {
        writeln!(buf, "step,energy")?;
        for (i, e) in result.diagnostics.energy_history.iter().enumerate() {
            writeln!(buf, "{i},{e:.16e}")?;
        }
        Ok(())
    })?;
    let perimeter = grid.param.total_length;
    let summary = Solve2dSummary {
        config: cfg,
        converged: failure.is_none(),
        energy: result.energy,
        e_trial,
        ratio: energy_ratio(result.energy, cfg.epsilon, perimeter, &sol)?,
        residual: result.residual,
        iterations: result.diagnostics.iterations,
        sup_modulus: result.diagnostics.sup_modulus,
        bulk_mass_fraction: result.diagnostics.bulk_mass_fraction,
        scaled_gradient_norm: result.diagnostics.scaled_gradient_norm,
        perimeter,
        e1d_star: sol.energy,
        alpha_mismatch: trial.alpha_mismatch,
        active_cells: grid.active_count(),
        kappa: gl.kappa(),
        h_ex: gl.h_ex(),
    };
    out.json("summary.json", &summary)?;
    println!(
        "E = {:.10e}  E_trial = {:.6e}  ratio = {:.6}  residual = {:.3e}  iterations = {}",
        summary.energy, e_trial, summary.ratio, summary.residual, summary.iterations
    );
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a SweepSection,
    records: &'a [SweepRecord],
    failures: &'a [(f64, String)],
    flags: &'a SweepFlags,
    fit: &'a Option<RemainderFit>,
    checks: &'a Criterion,
    e1d_star: f64,
    alpha_star: f64,
}

/// Writes `sweep.csv`, one `records/eps-<ε>.json` per member and
/// `report.json`. Fails with the convergence code when a member failed or
/// stopped short, and with the acceptance code when an enforced sweep check
/// fails.
pub fn sweep(cfg: &SweepSection, jobs: usize, out: &OutDir) -> Result<(), Failure> {
    let domain = CurvilinearPolygon::named(&cfg.domain)?;
    let scfg: SweepConfig = cfg.sweep_config(jobs);
    let outcome = make_sweep(&domain, cfg.b, &cfg.epsilons, &scfg)?;
    for r in &outcome.records {
        out.json(&format!("records/eps-{}.json", r.epsilon), r)?;
    }
    out.write("sweep.csv", |buf| Ok(write_sweep_csv(buf, &outcome.records)?))?;
    let checks = check::sweep_criterion(&outcome, cfg.epsilons.len());
    out.json(
        "report.json",
        &SweepReport {
            config: cfg,
            records: &outcome.records,
            failures: &outcome.failures,
            flags: &outcome.flags,
            fit: &outcome.fit,
            checks: &checks,
            e1d_star: outcome.solution.energy,
            alpha_star: outcome.solution.alpha_star,
        },
    )?;
    println!(
        "{:>8} {:>14} {:>14} {:>10} {:>10} {:>10}",
        "epsilon", "E_gl", "E_trial", "ratio", "diff/norm", "converged"
    );
    for r in &outcome.records {
        println!(
            "{:>8} {:>14.6e} {:>14.6e} {:>10.5} {:>10.5} {:>10}",
            r.epsilon,
            r.e_gl,
            r.e_trial,
            r.ratio,
            r.density_ratio(),
            r.converged
        );
    }
    for m in &outcome.flags.messages {
        eprintln!("flag: {m}");
    }
    let mut stdout = std::io::stdout();
    checks.write(&mut stdout)?;
    if !outcome.failures.is_empty() || outcome.records.iter().any(|r| !r.converged) {
        let failed: Vec<String> = outcome.failures.iter().map(|(e, m)| format!("ε = {e}: {m}")).collect();
        return Err(Failure::new(
            exit::CONVERGENCE,
            format!("sweep incomplete; partial results written. {}", failed.join("; ")),
        ));
    }
    if !checks.enforced_pass() {
        return Err(Failure::new(exit::ACCEPTANCE, "sweep checks failed"));
    }
    Ok(())
}

/// Runs the acceptance suite, writing `acceptance.txt` and
/// `acceptance.json`.
pub fn check(cfg: &CheckConfig, out: &OutDir) -> Result<AcceptanceReport, Failure> {
    let mut text = Vec::new();
    let report = {
        let mut tee = Tee {
            a: std::io::stdout(),
            b: &mut text,
        };
        check::run_acceptance(cfg.resolution, &mut tee)?
    };
    out.write("acceptance.txt", |buf| {
        buf.extend_from_slice(&text);
        Ok(())
    })?;
    out.json("acceptance.json", &report)?;
    if report.failed().is_empty() {
        Ok(report)
    } else {
        Err(Failure::new(exit::ACCEPTANCE, report.summary()))
    }
}

struct Tee<'a, A: Write> {
    a: A,
    b: &'a mut Vec<u8>,
}

impl<A: Write> Write for Tee<'_, A> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.a.write_all(buf)?;
        self.b.extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.a.flush()
    }
}
