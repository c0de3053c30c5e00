use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfgl::effective1d::{minimize_joint, EffectiveSolution, Grid1D};
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

/// 8×8 grid on the unit square with the top-right 3×3 block switched off,
/// built directly from a mask so the layer checks do not apply.
fn tiny_grid() -> Grid2D<f64> {
    let dom = CurvilinearPolygon::<f64>::unit_square();
    let raster = Raster::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 8, 8).unwrap();
    let regions = (0..64)
        .map(|k| {
            if k % 8 >= 5 && k / 8 >= 5 {
                Region::Outside
            } else {
                Region::Cut
            }
        })
        .collect();
    let stats = RegionStats {
        domain_area: 1.0,
        bulk_area: 0.0,
        layer_area: 1.0,
        cut_area: 1.0,
        corner_areas: vec![],
        corner_area_bound: 0.0,
    };
    let mask = RegionMask {
        raster,
        regions,
        signed_dist: vec![0.0; 64],
        sigma: vec![0.0; 64],
        stats,
    };
    Grid2D::from_mask(&dom, mask, LayerSpec::new(0.3, 1.0, 1.0).unwrap())
}

fn random_psi(grid: &Grid2D<f64>, seed: u64) -> ComplexField2D<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField2D::from_fn(grid, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn reference_potential_is_unit_curl_and_divergence_free() {
    for dom in [
        CurvilinearPolygon::<f64>::unit_square(),
        CurvilinearPolygon::<f64>::l_shape(),
    ] {
        let grid = Grid2D::new(&dom, 96, LayerSpec::new(0.1, 1.5, 1.5).unwrap()).unwrap();
        let a = make_reference_potential(&grid);
        assert!(a.max_curl_defect() <= 1e-12, "{}", a.max_curl_defect());
        assert!(a.max_divergence() <= 1e-12, "{}", a.max_divergence());
        let c = dom.centroid();
        let p = Vec2::new(0.3, 0.2);
        let v = a.value_at(p);
        assert!((v.x + 0.5 * (p.y - c.y)).abs() < 1e-15 && (v.y - 0.5 * (p.x - c.x)).abs() < 1e-15);
    }
}

#[test]
fn zero_field_has_zero_energy() {
    let grid = square_grid(0.1, 48);
    let a = make_reference_potential(&grid);
    let cfg = GLConfig::new(1.5, 0.1).unwrap();
    let psi = ComplexField2D::zeros(&grid);
    assert_eq!(eval_gl_energy(&psi, &a, &cfg, &grid).unwrap(), 0.0);
    assert_eq!(gl_residual(&psi, &a, &cfg, &grid).unwrap(), 0.0);
}

/// Independent link sum: phases from the line integral of the symmetric
/// potential between cell centres, inactive cells skipped.
fn brute_energy(grid: &Grid2D<f64>, psi: &ComplexField2D<f64>, b: f64, eps: f64) -> f64 {
    let c = grid.centroid;
    let line = |p: Vec2<f64>, q: Vec2<f64>| {
        let m = Vec2::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
        let a = (-0.5 * (m.y - c.y), 0.5 * (m.x - c.x));
        (a.0 * (q.x - p.x) + a.1 * (q.y - p.y)) / (eps * eps)
    };
    let r = grid.raster;
    let mut e = 0.0;
    for j in 0..r.ny {
        for i in 0..r.nx {
            let k = r.idx(i, j);
            if !grid.active[k] {
                continue;
            }
            let z = psi.values[k];
            e += r.hx * r.hy * (z.norm_sqr().powi(2) - 2.0 * z.norm_sqr()) / (2.0 * b * eps * eps);
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                if i + di >= r.nx || j + dj >= r.ny {
                    continue;
                }
                let m = r.idx(i + di, j + dj);
                if !grid.active[m] {
                    continue;
                }
                let th = line(r.center(i, j), r.center(i + di, j + dj));
                let d = psi.values[m] * C::from_polar(1.0, th) - z;
                let h = if di == 1 { r.hx } else { r.hy };
                e += r.hx * r.hy / (h * h) * d.norm_sqr();
            }
        }
    }
    e
}

#[test]
fn energy_matches_brute_force_link_sum() {
    let grid = tiny_grid();
    let a = make_reference_potential(&grid);
    let cfg = GLConfig::new(1.5, 0.3).unwrap();
    for seed in 0..5 {
        let psi = random_psi(&grid, seed);
        let e = eval_gl_energy(&psi, &a, &cfg, &grid).unwrap();
        let oracle = brute_energy(&grid, &psi, 1.5, 0.3);
        assert!(rel(e, oracle) <= 1e-12, "{e} vs {oracle}");
        // Inactive entries are ignored.
        let mut junk = psi.clone();
        junk.values[63] = C::new(7.0, -3.0);
        assert_eq!(eval_gl_energy(&junk, &a, &cfg, &grid).unwrap(), e);
    }
}

#[test]
fn discrete_gauge_invariance() {
    let eps = 0.1;
    let grid = square_grid(eps, 48);
    let cfg = GLConfig::new(1.5, eps).unwrap();
    let a = make_reference_potential(&grid);
    let psi = random_psi(&grid, 11);
    let e0 = eval_gl_energy(&psi, &a, &cfg, &grid).unwrap();
    let r0 = gl_residual(&psi, &a, &cfg, &grid).unwrap();
    let j0 = superconducting_current(&psi, &a, &cfg, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let phi: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let psi2 = ComplexField2D {
            nx: psi.nx,
            ny: psi.ny,
            values: psi
                .values
                .iter()
                .zip(&phi)
                .map(|(z, &p)| z * C::from_polar(1.0, p))
                .collect(),
        };
        let mut a2 = a.clone();
        a2.add_gradient(&phi.iter().map(|p| -eps * eps * p).collect::<Vec<_>>());
        let e = eval_gl_energy(&psi2, &a2, &cfg, &grid).unwrap();
        assert!(rel(e, e0) <= 1e-10, "{e} vs {e0}");
        let r = gl_residual(&psi2, &a2, &cfg, &grid).unwrap();
        assert!(rel(r, r0) <= 1e-9);
        let j = superconducting_current(&psi2, &a2, &cfg, &grid).unwrap();
        for (x, y) in j.jx.iter().zip(&j0.jx).chain(j.jy.iter().zip(&j0.jy)) {
            assert!((x - y).abs() <= 1e-8 * (1.0 + y.abs()));
        }
    }
}

#[test]
fn centroid_choice_is_a_gauge_choice() {
    let eps = 0.1;
    let grid = square_grid(eps, 48);
    let cfg = GLConfig::new(1.5, eps).unwrap();
    let a = make_reference_potential(&grid);
    let shifted = Vec2::new(0.2, 0.9);
    let a2 = VectorPotential2D::symmetric(&grid.raster, shifted);
    // F_{c'} − F_c = ∇g with g linear.
    let c = grid.centroid;
    let g = |p: Vec2<f64>| 0.5 * ((shifted.y - c.y) * p.x + (c.x - shifted.x) * p.y);
    let psi = random_psi(&grid, 3);
    let psi2 = ComplexField2D::from_fn(&grid, |k, p| psi.values[k] * C::from_polar(1.0, -g(p) / (eps * eps)));
    let e = eval_gl_energy(&psi, &a, &cfg, &grid).unwrap();
    let e2 = eval_gl_energy(&psi2, &a2, &cfg, &grid).unwrap();
    assert!(rel(e2, e) <= 1e-10, "{e2} vs {e}");
}

#[test]
fn gradient_matches_finite_differences() {
    let eps = 0.1;
    let grid = square_grid(eps, 40);
    let cfg = GLConfig::new(1.5, eps).unwrap();
    let a = make_reference_potential(&grid);
    let psi = random_psi(&grid, 21);
    let g = gl_gradient(&psi, &a, &cfg, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let d = random_psi(&grid, rng.gen());
        let exact: f64 = g
            .values
            .iter()
            .zip(&d.values)
            .map(|(x, y)| x.re * y.re + x.im * y.im)
            .sum();
        let energy_at = |s: f64| {
            let p = ComplexField2D {
                nx: psi.nx,
                ny: psi.ny,
                values: psi.values.iter().zip(&d.values).map(|(x, y)| x + y * s).collect(),
            };
            eval_gl_energy(&p, &a, &cfg, &grid).unwrap()
        };
        // Fourth-order central difference; the energy is a quartic.
        let h = 1e-3;
        let fd = (8.0 * (energy_at(h) - energy_at(-h)) - (energy_at(2.0 * h) - energy_at(-2.0 * h))) / (12.0 * h);
        assert!(rel(fd, exact) <= 1e-6, "{fd} vs {exact}");
    }
}

#[test]
fn plane_wave_current_and_real_fields() {
    let eps = 0.1;
    let grid = square_grid(eps, 64);
    let cfg = GLConfig::new(1.5, eps).unwrap();
    let zero = VectorPotential2D {
        raster: grid.raster,
        ax: vec![0.0; grid.len()],
        ay: vec![0.0; grid.len()],
        reference_center: None,
    };
    let k = 3.0;
    let wave = ComplexField2D::from_fn(&grid, |_, p| C::from_polar(1.0, k * p.x));
    let j = superconducting_current(&wave, &zero, &cfg, &grid).unwrap();
    let hx = grid.raster.hx;
    for m in 0..grid.len() {
        if grid.has_xlink(m) {
            // sin(k h)/h = k + O(h²).
            assert!((j.jx[m] - (k * hx).sin() / hx).abs() < 1e-12);
            assert!((j.jx[m] - k).abs() < k.powi(3) * hx * hx);
        }
        assert!(j.jy[m].abs() < 1e-12);
    }
    let real = ComplexField2D::from_fn(&grid, |_, p| C::new(p.x * p.y + 0.3, 0.0));
    let j = superconducting_current(&real, &zero, &cfg, &grid).unwrap();
    assert!(j.jx.iter().chain(&j.jy).all(|v| *v == 0.0));
    let cells = j.at_cells();
    assert_eq!(cells.len(), grid.len());
}

struct Solved {
    grid: Grid2D<f64>,
    trial: TrialState<f64>,
    trial_energy: f64,
    result: GLResult<f64>,
}

fn solved() -> &'static Solved {
    static S: OnceLock<Solved> = OnceLock::new();
    S.get_or_init(|| {
        let eps = 0.12;
        let grid = square_grid(eps, 96);
        let a = make_reference_potential(&grid);
        let trial = build_trial_state(&grid, sol15(), &a).unwrap();
        let cfg = GLConfig::new(1.5, eps).unwrap();
        let trial_energy = eval_gl_energy(&trial.psi, &a, &cfg, &grid).unwrap();
        let result = minimize_gl(&grid, &cfg, &trial.psi).unwrap();
        Solved {
            grid,
            trial,
            trial_energy,
            result,
        }
    })
}

#[test]
fn minimizer_descends_below_trial_state() {
    let s = solved();
    let r = &s.result;
    assert!(r.residual <= r.config.tol);
    assert!(r.energy <= s.trial_energy, "{} > {}", r.energy, s.trial_energy);
    let h = &r.diagnostics.energy_history;
    assert!((h[0] - s.trial_energy).abs() <= 1e-10 * s.trial_energy.abs().max(1.0));
    assert!(h.windows(2).all(|w| w[1] <= w[0]));
    assert!((h.last().unwrap() - r.energy).abs() <= 1e-8 * r.energy.abs());
    let hh = s.grid.h();
    assert!(r.diagnostics.sup_modulus <= 1.0 + 10.0 * hh * hh);
    assert!(r.diagnostics.bulk_mass_fraction < 1e-2);
    assert!(r.energy < 0.0);
    // The residual reported matches a fresh evaluation.
    let fresh = gl_residual(&r.psi, &r.potential, &r.config, &s.grid).unwrap();
    assert!(rel(fresh, r.residual) < 1e-6);
}

#[test]
fn current_is_divergence_free_at_the_minimizer() {
    let s = solved();
    let r = &s.result;
    let j = superconducting_current(&r.psi, &r.potential, &r.config, &s.grid).unwrap();
    let sup_j = j.jx.iter().chain(&j.jy).fold(0.0f64, |m, v| m.max(v.abs()));
    let div = j.divergence();
    let sup_div = (0..s.grid.len())
        .filter(|&k| s.grid.active[k])
        .fold(0.0f64, |m, k| m.max(div[k].abs()));
    // Stationarity gives div j = Im(ψ̄ G)/(2 area) exactly, so the
    // divergence is bounded by the residual.
    let eps = r.config.epsilon;
    assert!(
        sup_div * eps * eps <= 2.0 * r.residual * r.diagnostics.sup_modulus + 1e-12,
        "{sup_div}"
    );
    assert!(sup_j > 0.0);
}

#[test]
fn random_start_reaches_a_comparable_energy() {
    let s = solved();
    let cfg = s.result.config;
    let init = random_field(&s.grid, 0.5, 42);
    match minimize_gl(&s.grid, &cfg, &init) {
        Ok(r) => {
            let d = rel(r.energy, s.result.energy);
            if d > 1e-4 {
                eprintln!(
                    "random start: energy {} differs from trial start {} by {d:e}",
                    r.energy, s.result.energy
                );
            }
            assert!(r.residual <= cfg.tol);
        }
        Err(f) => eprintln!("random start did not converge: {f}"),
    }
}

#[test]
fn trial_state_structure() {
    let s = solved();
    let g = &s.grid;
    let sol = sol15();
    let eps = g.spec.epsilon;
    let fmax = sol.f_star.sup_norm();
    let psi = &s.trial.psi;
    assert!(psi.sup_modulus() <= fmax * (1.0 + 1e-12));
    let mut bottom = 0;
    for k in 0..g.len() {
        match g.regions[k] {
            Region::Corner(_) => assert_eq!(psi.values[k], C::new(0.0, 0.0)),
            Region::Outside => assert_eq!(psi.values[k], C::new(0.0, 0.0)),
            Region::Cut => {
                let t = g.dist[k] / eps;
                let chi = cutoff_chi(&g.param, &g.spec, g.sigma[k] / eps);
                let want = chi * depth_cutoff(t, g.spec.layer_depth() / eps) * sol.f(t);
                assert!((psi.values[k].norm() - want).abs() <= 1e-12);
                if k < g.nx() {
                    // Bottom row, half a cell above the edge.
                    let t0 = chi * sol.f(0.0);
                    assert!((psi.values[k].norm() - t0).abs() <= 0.5 * g.h() / eps * 0.2 * t0.max(1e-3));
                    bottom += 1;
                }
            }
            Region::Bulk => assert_eq!(psi.values[k], C::new(0.0, 0.0)),
        }
    }
    assert!(bottom > 0);
    let l = g.param.total_length;
    let two_pi_m = s.trial.alpha_closed * l / eps / TAU;
    assert!((two_pi_m - two_pi_m.round()).abs() < 1e-9);
    assert!(s.trial.alpha_mismatch.abs() <= std::f64::consts::PI * eps / l + 1e-12);
}

#[test]
fn trial_state_needs_nontrivial_profile() {
    let s = solved();
    let mut trivial = sol15().clone();
    trivial.f_star.values.iter_mut().for_each(|v| *v = 0.0);
    let a = make_reference_potential(&s.grid);
    assert!(matches!(
        build_trial_state(&s.grid, &trivial, &a),
        Err(Error::NotApplicable(_))
    ));
}

#[test]
fn gauge_phase_on_a_flat_edge() {
    let eps = 0.08;
    let grid = square_grid(eps, 64);
    let a = make_reference_potential(&grid);
    let gp = GaugePhase::new(&a, &grid.param, &grid.spec);
    // A = ½(−(y − ½), x − ½): on the bottom edge A·γ' = 1/4, A·n = (x − ½)/2.
    let l = 4.0;
    let n = (1.0 / (TAU * eps * eps)).floor();
    assert_eq!(gp.winding, n as i64);
    let delta = 1.0 / (eps * eps * l) - TAU / l * n;
    assert!((gp.delta - delta).abs() < 1e-9);
    assert!((gp.flux - 1.0).abs() < 1e-13);
    for (sigma, t) in [(0.5, 0.0), (0.45, 1.3), (0.6, 2.5)] {
        let s = sigma / eps;
        let want = -t * 0.5 * (sigma - 0.5) / eps - 0.25 * sigma / (eps * eps) + eps * delta * s;
        let got = gauge_phase(&a, &grid.param, &grid.spec, s, t).unwrap();
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
    // Outside the layer or inside a corner cell.
    assert_eq!(gp.phase_unchecked(0.0, 0.0), 0.0);
    let depth = grid.spec.layer_depth() / eps;
    assert!(gauge_phase(&a, &grid.param, &grid.spec, 0.5 / eps, depth * 1.5).is_err());
    assert!(gauge_phase(&a, &grid.param, &grid.spec, 0.0, 1.0).is_err());
}

#[test]
fn gauge_phase_winds_by_the_flux_quantum_count() {
    for (dom, area) in [
        (CurvilinearPolygon::<f64>::unit_square(), 1.0),
        (
            CurvilinearPolygon::<f64>::l_shape(),
            CurvilinearPolygon::<f64>::l_shape().area(),
        ),
    ] {
        let eps = 0.07;
        let grid = Grid2D::new(&dom, 64, LayerSpec::new(eps, 1.5, 1.5).unwrap()).unwrap();
        let a = make_reference_potential(&grid);
        let gp = GaugePhase::new(&a, &grid.param, &grid.spec);
        let n = (area / (TAU * eps * eps)).floor();
        assert_eq!(gp.winding, n as i64);
        let period = grid.param.total_length / eps;
        for s in [3.0, 7.5, 20.0] {
            for t in [0.0, 1.0, 2.0] {
                let jump = gp.phase_unchecked(s + period, t) - gp.phase_unchecked(s, t);
                assert!((jump + TAU * n).abs() <= 1e-8 * (TAU * n), "{jump} vs {}", -TAU * n);
            }
        }
    }
}

#[test]
fn rounded_square_delta_uses_the_enclosed_flux() {
    let r = 0.4;
    let dom = CurvilinearPolygon::<f64>::rounded_square(r).unwrap();
    let eps = 0.05;
    let grid = Grid2D::new(&dom, 96, LayerSpec::new(eps, 1.5, 1.5).unwrap()).unwrap();
    let a = make_reference_potential(&grid);
    let gp = GaugePhase::new(&a, &grid.param, &grid.spec);
    // One rounded corner.
    let area = 1.0 - (1.0 - std::f64::consts::FRAC_PI_4) * r * r;
    let l = 4.0 - 2.0 * r + std::f64::consts::FRAC_PI_2 * r;
    assert!((gp.flux - area).abs() < 1e-12, "{} vs {area}", gp.flux);
    let x = area / (TAU * eps * eps);
    let frac = x - x.floor();
    assert!((gp.delta - TAU * frac / l).abs() < 1e-9);
    assert!(gp.delta >= 0.0 && gp.delta < TAU / l);
}

#[test]
fn tangential_potential_is_minus_t_on_flat_edges() {
    let eps = 0.08;
    let grid = square_grid(eps, 64);
    let a = make_reference_potential(&grid);
    let lp = tangential_potential(&a, &grid.param, &grid.spec, 0.5, 16).unwrap();
    let target = eps * lp.delta;
    assert!(lp.boundary_defect() <= 1e-10);
    for i in 0..lp.s.len() {
        for (k, &t) in lp.t.iter().enumerate() {
            assert!((lp.at(i, k) + t - target).abs() <= 1e-9);
        }
    }
    assert!((lp.sup_deviation() - target).abs() <= 1e-9);
    let area: f64 = lp.ws.iter().sum::<f64>() * lp.wt.iter().sum::<f64>();
    assert!((lp.deviation_l2() - target * area.sqrt()).abs() <= 1e-8);
    assert!(tangential_potential(&a, &grid.param, &grid.spec, 0.0, 16).is_err());
}

#[test]
fn tangential_potential_on_curved_boundary_stays_close_to_minus_t() {
    let dom = CurvilinearPolygon::<f64>::rounded_square(0.4).unwrap();
    let eps = 0.05;
    let grid = Grid2D::new(&dom, 96, LayerSpec::new(eps, 1.5, 1.5).unwrap()).unwrap();
    let a = make_reference_potential(&grid);
    let lp = tangential_potential(&a, &grid.param, &grid.spec, 0.5, 16).unwrap();
    assert!(lp.boundary_defect() <= 1e-9);
    // On an arc of curvature k the deviation is ε k t²/2 + εδ.
    let tl = grid.spec.layer_depth() / eps;
    let bound = eps * 2.5 * tl * tl / 2.0 + eps * lp.delta + 1e-9;
    assert!(lp.sup_deviation() <= bound, "{} > {bound}", lp.sup_deviation());
}

#[test]
fn raster_and_csv_round_trip() {
    let grid = square_grid(0.1, 40);
    let psi = random_psi(&grid, 9);
    let mut buf = Vec::new();
    write_raster(&mut buf, &grid, &psi).unwrap();
    let (raster, back) = read_raster(buf.as_slice()).unwrap();
    assert_eq!(raster.nx, grid.nx());
    assert_eq!(raster.ny, grid.ny());
    assert!((raster.hx - grid.raster.hx).abs() < 1e-15);
    assert_eq!(back.values, psi.values);
    buf[0] = b'X';
    assert!(matches!(read_raster(buf.as_slice()), Err(Error::Format(_))));

    let mut csv = Vec::new();
    write_csv(&mut csv, &grid, &psi).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,re,im,abs2"));
    let active: Vec<usize> = (0..grid.len()).filter(|&k| grid.active[k]).collect();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), active.len());
    for (row, &k) in rows.iter().zip(&active) {
        assert_eq!(row[2], psi.values[k].re);
        assert_eq!(row[3], psi.values[k].im);
    }
}

#[test]
fn alternating_mode_never_raises_the_energy() {
    let eps = 0.12;
    let grid = square_grid(eps, 48);
    let a = make_reference_potential(&grid);
    let trial = build_trial_state(&grid, sol15(), &a).unwrap();
    let mut cfg = GLConfig::new(1.5, eps).unwrap();
    cfg.tol = 1e-5;
    let frozen = minimize_gl(&grid, &cfg, &trial.psi).unwrap();
    let mut alt_cfg = cfg.with_mode(FieldMode::Alternating);
    alt_cfg.field_rounds = 2;
    let alt = match minimize_gl(&grid, &alt_cfg, &trial.psi) {
        Ok(r) => r,
        Err(f) => *f.last.expect("last iterate"),
    };
    assert!(
        alt.energy <= frozen.energy + 1e-10 * frozen.energy.abs(),
        "{} > {}",
        alt.energy,
        frozen.energy
    );
    assert!(alt.diagnostics.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // The relaxed field stays close to the applied one.
    assert!(
        alt.potential.max_curl_defect() < 1e-2,
        "{}",
        alt.potential.max_curl_defect()
    );
}

#[test]
fn configuration_checks() {
    assert!(matches!(GLConfig::new(1.0, 0.1), Err(Error::Regime(_))));
    assert!(matches!(GLConfig::new(1.5, 1.0), Err(Error::Parameter(_))));
    let cfg = GLConfig::new(1.5, 0.1).unwrap();
    assert!(cfg.check_regime(0.5901).is_ok());
    assert!(GLConfig::new(1.8, 0.1).unwrap().check_regime(0.5901).is_err());
    assert!((cfg.h_ex() - 1.0 / (0.1f64 * 0.1)).abs() < 1e-9);
    assert_eq!("alternating".parse::<FieldMode>().unwrap(), FieldMode::Alternating);
    assert!("maybe".parse::<FieldMode>().is_err());
}

#[test]
fn minimizer_rejects_bad_input() {
    let grid = square_grid(0.1, 40);
    let cfg = GLConfig::new(1.5, 0.1).unwrap();
    let mut psi = random_psi(&grid, 1);
    let k = (0..grid.len()).find(|&k| grid.active[k]).unwrap();
    psi.values[k] = C::new(f64::NAN, 0.0);
    assert!(minimize_gl(&grid, &cfg, &psi).is_err());
    let other = square_grid(0.1, 48);
    let wrong = ComplexField2D::zeros(&other);
    assert!(matches!(
        minimize_gl(&grid, &cfg, &wrong).map(|_| ()).map_err(|f| f.error),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn iteration_cap_reports_last_state() {
    let grid = square_grid(0.1, 40);
    let mut cfg = GLConfig::new(1.5, 0.1).unwrap();
    cfg.max_iter = 3;
    let f = minimize_gl(&grid, &cfg, &random_psi(&grid, 2)).unwrap_err();
    assert!(matches!(f.error, Error::Convergence { .. }));
    let last = f.last.expect("last iterate");
    assert_eq!(last.diagnostics.iterations, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_is_invariant_under_global_phase(seed in 0u64..1000, c in 0.0f64..TAU) {
        let grid = tiny_grid();
        let a = make_reference_potential(&grid);
        let cfg = GLConfig::new(1.3, 0.3).unwrap();
        let psi = random_psi(&grid, seed);
        let rot = ComplexField2D { nx: 8, ny: 8, values: psi.values.iter().map(|z| z * C::from_polar(1.0, c)).collect() };
        let e = eval_gl_energy(&psi, &a, &cfg, &grid).unwrap();
        let e2 = eval_gl_energy(&rot, &a, &cfg, &grid).unwrap();
        prop_assert!(rel(e2, e) <= 1e-12);
        prop_assert!(rel(e, brute_energy(&grid, &psi, 1.3, 0.3)) <= 1e-12);
    }

    #[test]
    fn restricted_energies_add_up_to_the_full_energy(seed in 0u64..1000) {
        // Splitting between two rows drops the links across them.
        let grid = tiny_grid();
        let a = make_reference_potential(&grid);
        let cfg = GLConfig::new(1.5, 0.3).unwrap();
        let psi = random_psi(&grid, seed);
        let all = vec![true; 64];
        let e = eval_gl_energy(&psi, &a, &cfg, &grid).unwrap();
        prop_assert!(rel(eval_gl_energy_restricted(&psi, &a, &cfg, &grid, &all).unwrap(), e) <= 1e-14);
        let lower: Vec<bool> = (0..64).map(|k| k / 8 < 4).collect();
        let upper: Vec<bool> = lower.iter().map(|v| !v).collect();
        let el = eval_gl_energy_restricted(&psi, &a, &cfg, &grid, &lower).unwrap();
        let eu = eval_gl_energy_restricted(&psi, &a, &cfg, &grid, &upper).unwrap();
        let mut cut = 0.0;
        for i in 0..8 {
            let (k, m) = (3 * 8 + i, 4 * 8 + i);
            let ay = 0.5 * (grid.center(k).x - grid.centroid.x);
            let th = ay * grid.raster.hy / 0.09;
            cut += (psi.values[m] * C::from_polar(1.0, th) - psi.values[k]).norm_sqr();
        }
        prop_assert!(rel(el + eu + cut, e) <= 1e-12);
    }
}
