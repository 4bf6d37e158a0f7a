use hkforge::charge_lattice::ModelId;
use hkforge::charge_lattice::{bps_rays, Charge, Ray};
use hkforge::model_library::{builtin, ModelDefinition};
use hkforge::quadrature::Side;
use hkforge::rh_solver::*;
use hkforge::semiflat::{ModelPoint, SemiflatFrame};
use hkforge::{ModelConfig, C64};

fn model(id: ModelId) -> ModelDefinition {
    builtin(id, C64::new(1.0, 0.0)).unwrap()
}

fn setup(m: &ModelDefinition, u: C64, r: f64, theta: [f64; 2]) -> (SemiflatFrame, Vec<Ray>) {
    let p = ModelPoint::new(u, r, theta.to_vec()).unwrap();
    let frame = SemiflatFrame::new(&m.lattice, &m.central, &p).unwrap();
    let rays = bps_rays(&m.spectrum, &m.central, u, r, SolverOptions::default().eps_spec).unwrap();
    (frame, rays)
}

fn solved(id: ModelId, u: C64, r: f64, theta: [f64; 2]) -> Solution {
    let m = model(id);
    let (frame, rays) = setup(&m, u, r, theta);
    solve(frame, &rays, &SolverOptions::default()).unwrap()
}

/// ζ on the unit circle at angles away from every ray.
fn off_ray_zetas(sol: &Solution, n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, 0.37 + std::f64::consts::TAU * k as f64 / n as f64))
        .filter(|z| sol.grids().iter().all(|g| (z / g.ray.direction).arg().abs() > 0.05))
        .collect()
}

#[test]
fn ov_terminates_after_one_step() {
    let sol = solved(ModelId::OoguriVafa, C64::new(0.5, 0.0), 1.0, [0.3, 1.1]);
    assert_eq!(sol.rays.iterations, 1);
    for ray in &sol.rays.upsilon {
        for charge in ray {
            assert!(charge.iter().all(|y| y.norm() == 0.0));
        }
    }
    let ge = Charge::new([1, 0]);
    for z in off_ray_zetas(&sol, 12) {
        let x = sol.evaluate(&ge, z).unwrap();
        let sf = sol.frame.xsf(&ge, z).unwrap();
        assert!((x.value - sf.value).norm() <= 1e-15 * sf.value.norm());
    }
}

#[test]
fn ov_tail_bound_is_met() {
    let sol = solved(ModelId::OoguriVafa, C64::new(0.5, 0.0), 1.0, [0.3, 1.1]);
    for g in sol.grids() {
        let m = g.ray.min_abs_z();
        let want = (-(1e-12f64).ln() / (2.0 * std::f64::consts::PI * m)).acosh();
        assert!((g.rule.s_max - want).abs() < 1e-12);
        assert!((-2.0 * std::f64::consts::PI * m * g.rule.s_max.cosh()).exp() <= 1e-12 * (1.0 + 1e-9));
    }
}

#[test]
fn empty_spectrum_gives_semiflat() {
    let m = model(ModelId::Pentagon);
    let (frame, _) = setup(&m, C64::new(0.1, 0.2), 2.0, [0.1, 0.2]);
    let sol = solve(frame, &[], &SolverOptions::default()).unwrap();
    let g = Charge::new([1, 1]);
    let z = C64::new(0.3, 0.8);
    assert_eq!(sol.evaluate(&g, z).unwrap().log_value, sol.frame.log_xsf(&g, z));
}

#[test]
fn pentagon_converges_at_origin() {
    let sol = solved(ModelId::Pentagon, C64::new(0.0, 0.0), 2.0, [0.4, -0.7]);
    assert!(sol.rays.iterations <= 20, "{:?}", sol.rays.history);
    assert!(sol.rays.residual < 1e-10);
    assert!(sol.fixed_point_defect().unwrap() < 10.0 * 1e-10);
    let zmin = sol
        .grids()
        .iter()
        .map(|g| g.ray.min_abs_z())
        .fold(f64::INFINITY, f64::min);
    let scale = (-2.0 * std::f64::consts::PI * 2.0 * zmin).exp();
    let biggest = sol
        .rays
        .upsilon
        .iter()
        .flatten()
        .flatten()
        .map(|y| y.norm())
        .fold(0.0, f64::max);
    assert!(biggest < scale && biggest > 1e-3 * scale, "{biggest} vs {scale}");
}

#[test]
fn reality_condition() {
    let sol = solved(ModelId::Pentagon, C64::new(0.2, -0.1), 2.0, [1.3, 0.4]);
    for (k, z) in off_ray_zetas(&sol, 10).into_iter().enumerate() {
        let z = z * (0.5 + 0.2 * k as f64);
        let g = Charge::new([1, (k % 3) as i64 - 1]);
        let a = sol.evaluate(&g, -1.0 / z.conj()).unwrap();
        let b = sol.evaluate(&-&g, z).unwrap();
        let rel = (a.value - b.value.conj()).norm() / a.value.norm();
        assert!(rel < 1e-10, "ζ={z} rel={rel}");
    }
}

#[test]
fn jumps_match_ks_action() {
    for (u, id) in [
        (C64::new(0.0, 0.0), ModelId::Pentagon),
        (C64::new(2.5, 1.5), ModelId::Pentagon),
        (C64::new(0.4, 0.3), ModelId::OoguriVafa),
    ] {
        let sol = solved(id, u, 2.0, [0.7, 2.1]);
        let lattice = &sol.frame.lattice;
        for (k, g) in sol.grids().iter().enumerate() {
            for s in [-0.7, 0.0, 0.4] {
                for gamma in [Charge::new([1, 0]), Charge::new([0, 1])] {
                    let plus = sol.side_limit(&gamma, k, s, Side::Plus).unwrap();
                    let minus = sol.side_limit(&gamma, k, s, Side::Minus).unwrap();
                    let mut factor = C64::new(1.0, 0.0);
                    for rc in &g.ray.charges {
                        let x = sol.side_limit(&rc.charge, k, s, Side::Plus).unwrap().value;
                        let e = rc.omega * lattice.pair(&rc.charge, &gamma).unwrap();
                        factor *= (1.0 - x).powi(e as i32);
                    }
                    let err = (plus.value - minus.value * factor).norm() / plus.value.norm();
                    assert!(err < 1e-7, "{id} u={u} ray {k} γ={gamma} err={err}");
                }
            }
        }
    }
}

#[test]
fn evaluate_refuses_ray_points() {
    let sol = solved(ModelId::Pentagon, C64::new(0.0, 0.0), 2.0, [0.0, 0.0]);
    let d = sol.grids()[0].ray.direction;
    let err = sol
        .evaluate(&Charge::new([1, 0]), d * C64::from_polar(2.0, 1e-4))
        .unwrap_err();
    assert_eq!(err.kind(), "directed-limit-required");
}

#[test]
fn tiny_r_is_rejected() {
    let m = model(ModelId::Pentagon);
    let (frame, rays) = setup(&m, C64::new(0.0, 0.0), 0.01, [0.0, 0.0]);
    let err = solve(frame, &rays, &SolverOptions::default()).unwrap_err();
    assert_eq!(err.kind(), "r-too-small");
}

#[test]
fn doubling_nodes_is_stable() {
    let m = model(ModelId::Pentagon);
    let (frame, rays) = setup(&m, C64::new(0.3, 0.2), 2.0, [0.5, 0.5]);
    let base = solve(frame.clone(), &rays, &SolverOptions::default()).unwrap();
    let fine = solve(
        frame,
        &rays,
        &SolverOptions {
            per_panel: 32,
            ..SolverOptions::default()
        },
    )
    .unwrap();
    let mut worst = 0.0f64;
    for z in off_ray_zetas(&base, 16) {
        for g in [Charge::new([1, 0]), Charge::new([0, 1])] {
            let a = base.upsilon(&g, z, None);
            let b = fine.upsilon(&g, z, None);
            worst = worst.max((a - b).norm());
        }
    }
    assert!(worst < 1e-11, "{worst}");
}

#[test]
fn small_zeta_limit_is_real() {
    let sol = solved(ModelId::Pentagon, C64::new(0.0, 0.0), 2.0, [0.9, 0.2]);
    let rays: Vec<f64> = sol.grids().iter().map(|g| g.ray.angle()).collect();
    // middle of the widest sector between consecutive rays
    let mut sorted = rays.clone();
    sorted.sort_by(f64::total_cmp);
    let mut best = (0.0, 0.0);
    for i in 0..sorted.len() {
        let a = sorted[i];
        let b = if i + 1 < sorted.len() {
            sorted[i + 1]
        } else {
            sorted[0] + std::f64::consts::TAU
        };
        if b - a > best.0 {
            best = (b - a, 0.5 * (a + b));
        }
    }
    let g = Charge::new([1, 0]);
    let vals: Vec<C64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|r| sol.upsilon(&g, C64::from_polar(*r, best.1), None))
        .collect();
    assert!((vals[2] - vals[1]).norm() < 1e-5);
    assert!(vals[2].im.abs() < 1e-6, "{:?}", vals);
}

#[test]
fn solution_file_round_trip() {
    let m = model(ModelId::Pentagon);
    let cfg = ModelConfig::from_model(&m, None);
    let sol = solved(ModelId::Pentagon, C64::new(0.1, 0.1), 2.0, [0.2, 0.3]);
    let text = write_solution(&cfg, &sol);
    let stored = read_solution(&text).unwrap();
    let back = stored.restore(&m, &cfg).unwrap();
    let z = C64::new(0.3, 0.9);
    let g = Charge::new([1, 1]);
    assert_eq!(back.evaluate(&g, z).unwrap(), sol.evaluate(&g, z).unwrap());
    let other = model(ModelId::OoguriVafa);
    let other_cfg = ModelConfig::from_model(&other, None);
    assert_eq!(stored.restore(&other, &other_cfg).unwrap_err().kind(), "model-mismatch");
}

#[test]
fn ov_matches_independent_quadrature() {
    use hkforge::model_library::ov::ov_oracle;
    for (u, r) in [
        (C64::new(0.5, 0.0), 1.0),
        (C64::new(-0.2, 0.6), 0.5),
        (C64::new(0.1, -0.3), 2.0),
    ] {
        let sol = solved(ModelId::OoguriVafa, u, r, [0.3, 1.1]);
        for z in off_ray_zetas(&sol, 8) {
            for g in [Charge::new([0, 1]), Charge::new([1, 0]), Charge::new([2, -1])] {
                let a = sol.evaluate(&g, z * 0.7).unwrap();
                let b = ov_oracle(&sol.frame, &g, z * 0.7, 1e-3).unwrap();
                let err = (a.log_value - b.log_value).norm();
                assert!(err < 1e-9, "u={u} R={r} ζ={z} γ={g} err={err}");
            }
        }
    }
}

#[test]
fn decay_rate_matches_smallest_central_charge() {
    let m = model(ModelId::Pentagon);
    let rep = decay_scan(
        &m,
        C64::new(0.5, 0.3),
        &[0.3, 0.8],
        &[1.0, 2.0, 3.0],
        &SolverOptions::default(),
        360,
    )
    .unwrap();
    assert!(rep.relative_error() < 0.02, "{rep:?}");
}

#[test]
fn wall_discrepancy_vanishes_linearly() {
    use hkforge::model_library::pentagon;
    let m = model(ModelId::Pentagon);
    let one = C64::new(1.0, 0.0);
    let w = pentagon::wall_point(one, 1.2).unwrap();
    let [(z1, _), _] = pentagon::periods(one, w).unwrap();
    let d = -z1 / z1.norm();
    let zetas: Vec<C64> = [0.6, 1.5, -0.6, -1.5, 2.8]
        .iter()
        .map(|a| d * C64::from_polar(1.0, *a))
        .collect();
    let (a, b) = (w * (1.0 - 4e-4), w * (1.0 + 4e-4));
    let opts = SolverOptions::default();
    let good = check_wall_continuity(&m, a, b, 0.5, &[0.3, 0.8], &zetas, &opts, 3, SpectrumChoice::Chamber).unwrap();
    assert!(good.observed_order() > 0.9, "{good:?}");
    let bad = check_wall_continuity(
        &m,
        a,
        b,
        0.5,
        &[0.3, 0.8],
        &zetas,
        &opts,
        3,
        SpectrumChoice::InnerOnBoth,
    )
    .unwrap();
    assert!(bad.observed_order() < 0.5, "{bad:?}");
}
