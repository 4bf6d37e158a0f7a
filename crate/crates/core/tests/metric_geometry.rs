use hkforge::charge_lattice::{bps_rays, ModelId};
use hkforge::metric_geometry::*;
use hkforge::model_library::{builtin, ModelDefinition};
use hkforge::quadrature::Side;
use hkforge::rh_solver::{solve, SolverOptions};
use hkforge::semiflat::{Form, ModelPoint, SemiflatFrame};
use hkforge::C64;

fn pentagon() -> ModelDefinition {
    builtin(ModelId::Pentagon, C64::new(1.0, 0.0)).unwrap()
}

fn max_abs(f: &Form) -> f64 {
    f.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn point(u: C64, r: f64) -> ModelPoint {
    ModelPoint::new(u, r, vec![0.7, 2.3]).unwrap()
}

#[test]
fn semiflat_pipeline_reproduces_closed_forms() {
    let m = pentagon();
    let p = point(C64::new(0.3, -0.2), 3.0);
    let frame = SemiflatFrame::new(&m.lattice, &m.central, &p).unwrap();
    let family = PointFamily::semiflat(&m, &p, FdSteps::default()).unwrap();
    for z in circle_samples(12, &[]) {
        let fd = family.varpi(Probe::Off(z)).unwrap();
        let exact = frame.varpi_sf(z).unwrap();
        assert!(max_abs(&(fd - exact)) < 1e-7);
    }
    let rep = metric_at(
        &m,
        &p,
        &SolverOptions::default(),
        FdSteps::default(),
        12,
        MetricTolerances::default(),
        true,
    )
    .unwrap();
    assert!(max_abs(&(rep.fit.omega_plus - frame.omega_plus().unwrap())) < 1e-7);
    assert!(max_abs(&(rep.fit.omega3 - frame.omega3().unwrap())) < 1e-7);
    assert!(rep.fit.omega3_imaginary < 1e-8);
    assert!(rep.fit.reality_defect < 1e-8);
    let reference = metric_from_triple(&frame.omega_plus().unwrap(), &frame.omega3().unwrap(), 1e-9).unwrap();
    assert!(reference.positive_definite());
    assert!((rep.metric.g - reference.g).abs().max() < 1e-6);
    assert!((rep.metric.j - reference.j).abs().max() < 1e-6);
}

#[test]
fn finite_differences_are_second_order() {
    let m = pentagon();
    let p = point(C64::new(0.6, 0.5), 2.0);
    let frame = SemiflatFrame::new(&m.lattice, &m.central, &p).unwrap();
    let z = C64::from_polar(1.0, 0.4);
    let exact = frame.dlog_xsf_basis(z);
    let err = |scale: f64| {
        let fam = PointFamily::semiflat(&m, &p, FdSteps::default().scaled(scale)).unwrap();
        (0..2)
            .map(|i| {
                let row = fam.dlog_x(&m.lattice.basis(i), Probe::Off(z)).unwrap();
                row.iter()
                    .zip(&exact[i])
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(200.0), err(100.0));
    let slope = (e1 / e2).log2();
    assert!((slope - 2.0).abs() < 0.1, "slope {slope} ({e1:e}, {e2:e})");
}

#[test]
fn injected_higher_term_is_flagged() {
    let m = pentagon();
    let frame = SemiflatFrame::new(&m.lattice, &m.central, &point(C64::new(0.2, 0.1), 3.0)).unwrap();
    let mut samples: Vec<(C64, Form)> = circle_samples(12, &[])
        .into_iter()
        .map(|z| (z, frame.varpi_sf(z).unwrap()))
        .collect();
    assert!(laurent_fit(&samples, 1e-9).is_ok());
    let mut bump = Form::zeros();
    bump[(0, 2)] = C64::new(1e-4, 0.0);
    bump[(2, 0)] = C64::new(-1e-4, 0.0);
    for (z, f) in samples.iter_mut() {
        *f += bump / (*z * *z);
    }
    assert_eq!(laurent_fit(&samples, 1e-7).unwrap_err().kind(), "laurent-residual");
}

fn solved_family(m: &ModelDefinition, u: C64, r: f64) -> PointFamily {
    let p = point(u, r);
    let opts = SolverOptions::default();
    let frame = SemiflatFrame::new(&m.lattice, &m.central, &p).unwrap();
    let rays = bps_rays(&m.spectrum, &m.central, u, r, opts.eps_spec).unwrap();
    PointFamily::around(m, solve(frame, &rays, &opts).unwrap(), FdSteps::default()).unwrap()
}

#[test]
fn varpi_is_continuous_across_rays() {
    let m = pentagon();
    for u in [C64::new(0.0, 0.0), C64::new(2.4, 1.3)] {
        let fam = solved_family(&m, u, 1.0);
        let n = fam.base.as_ref().unwrap().grids().len();
        for ray in 0..n {
            for s in [-0.5, 0.0, 0.6] {
                let plus = fam
                    .varpi(Probe::OnRay {
                        ray,
                        s,
                        side: Side::Plus,
                    })
                    .unwrap();
                let minus = fam
                    .varpi(Probe::OnRay {
                        ray,
                        s,
                        side: Side::Minus,
                    })
                    .unwrap();
                let d = max_abs(&(plus - minus));
                assert!(d < 1e-7, "u={u} ray {ray} s={s}: {d:e}");
            }
        }
    }
}

#[test]
fn varpi_reality() {
    let m = pentagon();
    let fam = solved_family(&m, C64::new(0.4, 0.3), 1.5);
    let dirs: Vec<C64> = fam
        .base
        .as_ref()
        .unwrap()
        .grids()
        .iter()
        .map(|g| g.ray.direction)
        .collect();
    for z in circle_samples(8, &dirs) {
        let z = z * 0.8;
        let a = fam.varpi(Probe::Off(-1.0 / z.conj())).unwrap();
        let b = fam.varpi(Probe::Off(z)).unwrap();
        assert!(max_abs(&(a - b.map(|c| c.conj()))) < 1e-8);
    }
}

#[test]
fn corrected_pentagon_triple() {
    let m = pentagon();
    for u in [C64::new(0.1, 0.2), C64::new(2.2, -1.4)] {
        let p = point(u, 3.0);
        let rep = metric_at(
            &m,
            &p,
            &SolverOptions::default(),
            FdSteps::default(),
            12,
            MetricTolerances::default(),
            false,
        )
        .unwrap();
        assert!(rep.metric.positive_definite());
        assert!(rep.metric.triple_defect() < 1e-6);
        assert!(rep.metric.compatibility < 1e-6);
    }
}

#[test]
fn ov_correction_decays_with_r() {
    let m = builtin(ModelId::OoguriVafa, C64::new(1.0, 0.0)).unwrap();
    let u = C64::new(0.3, 0.1);
    let diff = |r: f64| {
        let p = point(u, r);
        let opts = SolverOptions::default();
        let full = metric_at(
            &m,
            &p,
            &opts,
            FdSteps::default(),
            12,
            MetricTolerances::default(),
            false,
        )
        .unwrap();
        let flat = metric_at(&m, &p, &opts, FdSteps::default(), 12, MetricTolerances::default(), true).unwrap();
        (full.metric.g - flat.metric.g).abs().max() / flat.metric.g.abs().max()
    };
    let (d1, d2) = (diff(1.0), diff(2.0));
    let rate = (d1 / d2).ln();
    let want = 2.0 * std::f64::consts::PI * u.norm();
    // prefactors are powers of R, so only the leading rate is compared
    assert!(d2 < d1 && (rate / want - 1.0).abs() < 0.3, "rate {rate} vs {want}");
}
