use std::sync::OnceLock;

use num_complex::Complex;
use proptest::prelude::*;
use surfgl::analysis::*;
use surfgl::effective1d::{compute_cost_table, minimize_joint, EffectiveSolution, Grid1D};
use surfgl::geometry::*;
use surfgl::gl2d::*;
use surfgl::Error;

type C = Complex<f64>;

fn sol15() -> &'static EffectiveSolution<f64> {
    static SOL: OnceLock<EffectiveSolution<f64>> = OnceLock::new();
    SOL.get_or_init(|| minimize_joint(1.5, Grid1D::default_grid()).unwrap())
}

fn square_grid(eps: f64, n: usize) -> Grid2D<f64> {
    let dom = CurvilinearPolygon::<f64>::unit_square();
    Grid2D::new(&dom, n, LayerSpec::new(eps, 1.5, 1.5).unwrap()).unwrap()
}

/// Wraps a field as a result with the reference potential.
fn as_result(grid: &Grid2D<f64>, psi: ComplexField2D<f64>) -> GLResult<f64> {
    let cfg = GLConfig::new(1.5, grid.spec.epsilon).unwrap();
    let potential = make_reference_potential(grid);
    let energy = eval_gl_energy(&psi, &potential, &cfg, grid).unwrap();
    GLResult {
        psi,
        potential,
        energy,
        residual: f64::NAN,
        config: cfg,
        diagnostics: Default::default(),
    }
}

fn profile_field(grid: &Grid2D<f64>, sol: &EffectiveSolution<f64>) -> ComplexField2D<f64> {
    let eps = grid.spec.epsilon;
    ComplexField2D::from_fn(grid, |k, _| C::new(sol.f(grid.dist[k] / eps), 0.0))
}

#[test]
fn energy_ratio_of_the_leading_term_is_one() {
    let sol = sol15();
    for eps in [0.2, 0.05, 0.01] {
        let e = 4.0 * sol.energy / eps;
        assert!((energy_ratio(e, eps, 4.0, sol).unwrap() - 1.0).abs() < 1e-14);
    }
    let mut trivial = sol.clone();
    trivial.f_star.values.iter_mut().for_each(|v| *v = 0.0);
    assert!(matches!(
        energy_ratio(-1.0, 0.1, 4.0, &trivial),
        Err(Error::NotApplicable(_))
    ));
}

#[test]
fn density_of_the_profile_composition() {
    let sol = sol15();
    let grid = square_grid(0.1, 128);
    let r = as_result(&grid, profile_field(&grid, sol));
    let (diff, norm) = density_l2_diff(&r, &grid, sol).unwrap();
    assert!(diff < 1e-14, "{diff}");
    // ‖f★²(dist/ε)‖² ≈ ε|∂Ω|∫f★⁴ up to corner overlap.
    let oracle = (0.1 * 4.0 * sol.f_star.integrate(|_, f| f.powi(4))).sqrt();
    assert!((norm / oracle - 1.0).abs() < 0.1, "{norm} vs {oracle}");
}

#[test]
fn density_norm_scales_like_sqrt_epsilon() {
    let sol = sol15();
    let norm = |eps: f64| {
        let grid = square_grid(eps, 192);
        density_l2_diff(&as_result(&grid, ComplexField2D::zeros(&grid)), &grid, sol).unwrap()
    };
    let (d1, n1) = norm(0.1);
    let (_, n2) = norm(0.05);
    // For ψ = 0 the difference is the norm itself.
    assert!((d1 - n1).abs() < 1e-14);
    let q = n2 / n1;
    assert!((q * 2f64.sqrt() - 1.0).abs() < 0.2, "{q}");
}

#[test]
fn agmon_fit_on_the_trial_state() {
    let sol = sol15();
    let grid = square_grid(0.08, 160);
    let a = make_reference_potential(&grid);
    let trial = build_trial_state(&grid, sol, &a).unwrap();
    let r = as_result(&grid, trial.psi);
    let fit = agmon_check(&r, &grid).unwrap();
    assert_eq!(fit.bulk_fraction, 0.0);
    assert!(fit.rate < 0.0);
    assert!(fit.samples >= 10);
    // Restricting to the layer loses only the links at its inner edge.
    assert!(restriction_defect(&r, &grid).unwrap() < 1e-3);

    let zero = as_result(&grid, ComplexField2D::zeros(&grid));
    assert!(matches!(agmon_check(&zero, &grid), Err(Error::Precondition(_))));
}

#[test]
fn potential_estimate_on_the_square() {
    let grid = square_grid(0.08, 96);
    let r = as_result(&grid, ComplexField2D::zeros(&grid));
    let est = potential_estimate(&r, &grid, 0.25, 20).unwrap();
    // a_A + t = εδ on flat edges.
    let eps = 0.08;
    let spec = grid.spec;
    let area = spec.cut_perimeter(&grid.param) / eps * spec.layer_depth() / eps;
    assert!((est.l2 - eps * est.delta * area.sqrt()).abs() < 1e-9);
    assert!((est.constant - est.l2 / (eps * spec.log_factor())).abs() < 1e-15);
    assert!(est.boundary_defect < 1e-10);
}

fn plane_wave_grid(depth: f64, ht: f64, length: f64, hs: f64) -> LayerGrid<f64> {
    LayerGrid::new(&[(0.0, length)], depth, hs, ht).unwrap()
}

#[test]
fn constant_unit_u_has_zero_split_energy() {
    let sol = sol15();
    let lg = plane_wave_grid(6.0, 0.01, 3.0, 0.05);
    let f: Vec<f64> = lg.t.iter().map(|&t| sol.f(t)).collect();
    let u = vec![C::new(1.0, 0.0); lg.s.len() * lg.nt()];
    let (eu, low) = split_functional(&lg, &f, sol.alpha_star, &u, 1.5);
    assert!(eu.abs() < 1e-12 && low == 0.0, "{eu} {low}");
}

#[test]
fn plane_wave_split_energy_two_ways() {
    // u = e^{iβs}: E[u] = S(β²∫f² − 2β∫(t+α)f²) = S(β²∫f² − βF(t_max)).
    let sol = sol15();
    let table = compute_cost_table(sol).unwrap();
    let g = sol.grid();
    let (length, beta) = (2.0, 0.37);
    let direct = length
        * sol
            .f_star
            .integrate(|t, f| f * f * (beta * beta - 2.0 * beta * (t + sol.alpha_star)));
    let dual = length * (beta * beta * sol.f_star.integrate(|_, f| f * f) - beta * table.potential_at_end());
    assert!((direct - dual).abs() <= 1e-8 * dual.abs(), "{direct} vs {dual}");

    // The link discretization converges to it at second order in h_s.
    let mut errs = Vec::new();
    for hs in [0.02, 0.01] {
        let lg = plane_wave_grid(g.t_max(), g.h(), length, hs);
        let f: Vec<f64> = lg.t.iter().map(|&t| sol.f(t)).collect();
        let nt = lg.nt();
        let u: Vec<C> = (0..lg.s.len() * nt)
            .map(|j| C::from_polar(1.0, beta * lg.s[j / nt]))
            .collect();
        let (eu, low) = split_functional(&lg, &f, sol.alpha_star, &u, 1.5);
        assert!(low < 1e-20);
        errs.push((eu - dual).abs() / dual.abs());
    }
    assert!(errs[0] < 1e-2 && errs[1] < errs[0] / 3.5, "{errs:?}");
}

#[test]
fn identity_for_the_model_functional() {
    // ψ = f★ u e^{−iα★s} with u smooth and vanishing at the ends of the
    // strip and at t = T: the identity error is O(h²).
    let sol = sol15();
    let alpha = sol.alpha_star;
    let (depth, length) = (4.5, 6.0);
    let mut res = Vec::new();
    for h in [0.04, 0.02] {
        let lg = plane_wave_grid(depth, h, length, h);
        let nt = lg.nt();
        let f: Vec<f64> = lg.t.iter().map(|&t| sol.f(t)).collect();
        let u: Vec<C> = (0..lg.s.len() * nt)
            .map(|j| {
                let (s, t) = (lg.s[j / nt], lg.t[j % nt]);
                let bump = (std::f64::consts::PI * s / length).sin().powi(2) * depth_cutoff(t, depth);
                C::from_polar(1.0 + 0.3 * (s + t).cos(), 0.4 * s - 0.2 * t) * bump
            })
            .collect();
        let psi: Vec<C> = (0..u.len())
            .map(|j| u[j] * C::from_polar(f[j % nt], -alpha * lg.s[j / nt]))
            .collect();
        let layer = layer_functional(&lg, &psi, 1.5);
        let (eu, low) = split_functional(&lg, &f, alpha, &u, 1.5);
        assert!(eu >= low, "{eu} < {low}");
        res.push((layer - length * sol.energy - eu).abs());
    }
    assert!(res[1] < res[0] / 3.0 && res[1] < 2e-3, "{res:?}");
}

struct Solved {
    grid: Grid2D<f64>,
    result: GLResult<f64>,
}

fn solved() -> &'static Solved {
    static S: OnceLock<Solved> = OnceLock::new();
    S.get_or_init(|| {
        let grid = square_grid(0.12, 96);
        let a = make_reference_potential(&grid);
        let trial = build_trial_state(&grid, sol15(), &a).unwrap();
        let cfg = GLConfig::new(1.5, 0.12).unwrap();
        let result = minimize_gl(&grid, &cfg, &trial.psi).unwrap();
        Solved { grid, result }
    })
}

#[test]
fn splitting_of_a_minimizer() {
    let s = solved();
    let rep = splitting_energy(&s.result, &s.grid, sol15(), None).unwrap();
    assert!(rep.identity_holds(), "{rep:?}");
    assert!(rep.lower_bound_holds(), "{rep:?}");
    assert!(rep.identity_residual < 1e-2 * rep.layer_energy.abs().max(1.0));
    assert!(rep.lower >= 0.0);
    assert!((rep.predicted - s.grid.spec.cut_perimeter(&s.grid.param) / 0.12 * sol15().energy).abs() < 1e-15);
    let mut trivial = sol15().clone();
    trivial.f_star.values.iter_mut().for_each(|v| *v = 0.0);
    assert!(splitting_energy(&s.result, &s.grid, &trivial, None).is_err());
}

#[test]
fn covariant_interpolation() {
    let grid = square_grid(0.1, 64);
    let a = make_reference_potential(&grid);
    let psi = random_field(&grid, 1.0, 7);
    // Cell centers are reproduced exactly.
    let k = grid.raster.idx(20, 30);
    let z = interpolate_covariant(&grid, &a, &psi.values, grid.center(k));
    assert!((z - psi.values[k]).norm() < 1e-14);
    // A global phase commutes with the interpolation.
    let rot = C::from_polar(1.0, 0.7);
    let turned: Vec<C> = psi.values.iter().map(|v| v * rot).collect();
    let p = Vec2::new(0.43, 0.61);
    let z0 = interpolate_covariant(&grid, &a, &psi.values, p);
    let z1 = interpolate_covariant(&grid, &a, &turned, p);
    assert!((z1 - z0 * rot).norm() < 1e-14);
    // Constant modulus stays bounded by it.
    let one = ComplexField2D::constant(&grid, C::new(1.0, 0.0));
    assert!(interpolate_covariant(&grid, &a, &one.values, p).norm() <= 1.0 + 1e-14);
}

#[test]
fn sweep_of_one_epsilon_matches_the_composition() {
    let dom = CurvilinearPolygon::<f64>::unit_square();
    let cfg = SweepConfig {
        resolution: 96,
        ..Default::default()
    };
    let out = make_sweep(&dom, 1.5, &[0.12], &cfg).unwrap();
    assert!(out.failures.is_empty());
    let grid = square_grid(0.12, 96);
    let direct = sweep_record(&grid, &out.solution, 1.5, &cfg).unwrap();
    assert_eq!(out.records, vec![direct.clone()]);
    assert!(direct.converged && direct.e_gl <= direct.e_trial);
    assert!(out.fit.is_none());
    // Without coarse levels the fine solve starts from the trial state.
    let plain = SweepConfig {
        coarse_levels: 0,
        ..cfg
    };
    let s = solved();
    assert_eq!(
        sweep_record(&grid, &out.solution, 1.5, &plain).unwrap().e_gl.to_bits(),
        s.result.energy.to_bits()
    );
}

#[test]
fn coarse_start_reaches_the_trial_started_minimizer() {
    let s = solved();
    let dom = CurvilinearPolygon::<f64>::unit_square();
    for levels in [1, 2] {
        let cfg = SweepConfig {
            resolution: 96,
            coarse_levels: levels,
            ..Default::default()
        };
        let r = sweep_record(&s.grid, sol15(), 1.5, &cfg).unwrap();
        assert!(r.converged && r.e_gl <= r.e_trial);
        assert!(
            (r.e_gl - s.result.energy).abs() < 1e-8 * s.result.energy.abs(),
            "{levels}: {} vs {}",
            r.e_gl,
            s.result.energy
        );
    }
    // Levels too coarse to resolve the layer are skipped.
    let cfg = SweepConfig {
        resolution: 96,
        coarse_levels: 6,
        ..Default::default()
    };
    let out = make_sweep(&dom, 1.5, &[0.12], &cfg).unwrap();
    assert!(out.records[0].converged);
    assert!((out.records[0].e_gl - s.result.energy).abs() < 1e-8 * s.result.energy.abs());
}

#[test]
fn sweep_guards() {
    let dom = CurvilinearPolygon::<f64>::unit_square();
    let cfg = SweepConfig {
        resolution: 64,
        ..Default::default()
    };
    assert!(matches!(make_sweep(&dom, 1.8, &[0.12], &cfg), Err(Error::Regime(_))));
    assert!(matches!(
        make_sweep(&dom, 1.5, &[0.08, 0.12], &cfg),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(make_sweep(&dom, 1.5, &[], &cfg), Err(Error::InvalidInput(_))));
    let coarse = SweepConfig {
        resolution: 16,
        ..Default::default()
    };
    assert!(matches!(
        make_sweep(&dom, 1.5, &[0.12], &coarse),
        Err(Error::Resolution(_))
    ));
}

#[test]
fn unconverged_members_are_flagged() {
    let dom = CurvilinearPolygon::<f64>::unit_square();
    let cfg = SweepConfig {
        resolution: 64,
        max_iter: 5,
        jobs: 1,
        ..Default::default()
    };
    let out = make_sweep(&dom, 1.5, &[0.12, 0.1], &cfg).unwrap();
    assert_eq!(out.records.len(), 2);
    assert!(out.records.iter().all(|r| !r.converged && r.iterations == 5));
    assert!(out.flags.messages.iter().any(|m| m.contains("stopped")));
    assert!(out.fit.is_some());
}

#[test]
fn remainder_fit_recovers_a_synthetic_coefficient() {
    let base = SweepRecord::from_csv_line(&sample_record(0.1).to_csv_line()).unwrap();
    let records: Vec<SweepRecord> = [0.12, 0.08, 0.055]
        .iter()
        .map(|&eps| {
            let mut r = base.clone();
            r.epsilon = eps;
            r.e_gl = r.perimeter * r.e1d_star / eps - 0.3 * eps.ln().powi(2);
            r
        })
        .collect();
    let fit = surfgl::analysis::RemainderFit::from_records(&records).unwrap();
    assert!((fit.log2_coefficient + 0.3).abs() < 1e-12);
    assert!(fit.log2_misfit < 1e-12);
    assert!(fit.log_misfit > 1e-3);
}

fn sample_record(eps: f64) -> SweepRecord {
    SweepRecord {
        b: 1.5,
        epsilon: eps,
        e_gl: -1.0 / 3.0,
        e_trial: 0.1,
        ratio: 2.0_f64.sqrt(),
        density_l2_diff: 1e-300,
        density_l2_norm: 0.07,
        bulk_mass_fraction: 5e-8,
        agmon_rate: -2.3,
        eu_value: 0.6,
        eu_lower_term: 0.13,
        e1d_star: -0.007607192225584723,
        perimeter: 4.0,
        trial_ratio: -0.5,
        split_layer_energy: 0.3,
        split_identity_residual: 4e-3,
        tol_quad: 33.0,
        restriction_defect: 3e-5,
        potential_l2: 0.68,
        potential_constant: 4.2,
        corner_mass_fraction: 0.56,
        residual: 9.4e-7,
        iterations: 544,
        converged: true,
        alpha_mismatch: 0.0082,
        resolution: 128,
    }
}

#[test]
fn sweep_csv_round_trip() {
    let records = vec![sample_record(0.12), sample_record(0.08)];
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(
        "b,epsilon,E_gl,E_trial,ratio,density_l2_diff,density_l2_norm,bulk_fraction,agmon_rate,Eu,Eu_lower,"
    ));
    assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), records);
    assert!(read_sweep_csv("nope\n".as_bytes()).is_err());
    assert!(SweepRecord::from_csv_line("1,2,3").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_lines_round_trip(v in proptest::collection::vec(-1e300f64..1e300, 4), it in 0usize..100_000, conv: bool) {
        let mut r = sample_record(0.1);
        r.e_gl = v[0];
        r.ratio = v[1];
        r.eu_value = v[2];
        r.alpha_mismatch = v[3];
        r.iterations = it;
        r.converged = conv;
        prop_assert_eq!(SweepRecord::from_csv_line(&r.to_csv_line()).unwrap(), r);
    }

    #[test]
    fn energy_ratio_is_linear_in_energy(e in -10.0f64..10.0, eps in 0.01f64..0.5) {
        let sol = sol15();
        let r = energy_ratio(e, eps, 4.0, sol).unwrap();
        let r2 = energy_ratio(2.0 * e, eps, 4.0, sol).unwrap();
        prop_assert!((r2 - 2.0 * r).abs() <= 1e-12 * r.abs().max(1e-300));
    }
}
