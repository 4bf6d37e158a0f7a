//! Subcommand implementations. Each returns the report text and a verdict.

use std::fmt::Write as _;
use std::sync::Arc;

use hkforge::charge_lattice::{bps_rays, validate_conditions, Charge, ModelId};
use hkforge::formal_ks::{check_wcf, ks_transform, product, spectrum_generator, ConeGrading, TorusAutomorphism};
use hkforge::metric_geometry::{metric_at, FdSteps, MetricTolerances, RealForm};
use hkforge::model_library::{ov::ov_oracle, pentagon, ModelDefinition};
use hkforge::quadrature::Side;
use hkforge::rh_solver::{
    check_wall_continuity, decay_scan, read_solution, solve, write_solution, Solution, SolverOptions, SpectrumChoice,
};
use hkforge::semiflat::{ModelPoint, SemiflatFrame};
use hkforge::tree_series::{enumerate_trees, Decorations, TreeEvaluator, DEFAULT_BUDGET};
use hkforge::{load_model, Error, Result, C64};

use crate::table::{cplx, num, Format, Table};
use crate::{Command, Outcome, PointArgs};

pub fn run(cmd: Command, format: Format) -> Result<Outcome> {
    match cmd {
        Command::Validate { model, grid, tol } => validate(&model.model, grid, tol, format),
        Command::Solve {
            model,
            point,
            solver,
            output,
        } => solve_cmd(&model.model, &point, &solver.options()?, output.as_deref()),
        Command::JumpCheck {
            model,
            solution,
            s,
            tol,
        } => jump_check(&model.model, &solution, &s, tol, format),
        Command::WallCheck {
            model,
            phi,
            r,
            theta,
            separation,
            halvings,
            negative_control,
            min_order,
            solver,
        } => {
            let choice = if negative_control {
                SpectrumChoice::InnerOnBoth
            } else {
                SpectrumChoice::Chamber
            };
            let wall = WallArgs {
                phi,
                r,
                theta,
                separation,
                halvings,
                min_order,
            };
            wall_check(&model.model, &wall, choice, &solver.options()?, format)
        }
        Command::WcfCheck {
            model,
            order,
            dump_series,
        } => wcf_check(&model.model, order, dump_series),
        Command::TreeCompare {
            model,
            point,
            cutoff,
            zeta,
            solver,
        } => tree_compare(&model.model, &point, cutoff, zeta, &solver.options()?, format),
        Command::OvCompare {
            model,
            point,
            zeta,
            check_tol: tol,
            solver,
        } => ov_compare(&model, &point, zeta, tol, &solver.options()?, format),
        Command::Metric {
            model,
            point,
            semiflat_only,
            samples,
            check_tol: tol,
            emit_grid,
            solver,
        } => {
            let m = MetricArgs {
                semiflat_only,
                samples,
                tol,
                emit_grid,
            };
            metric(&model.model, &point, &m, &solver.options()?, format)
        }
        Command::DecayScan {
            model,
            u,
            theta,
            r_list,
            samples,
            check_tol: tol,
            solver,
        } => decay(
            &model.model,
            u,
            &theta,
            &r_list,
            samples,
            tol,
            &solver.options()?,
            format,
        ),
        Command::ModelInfo { name } => model_info(&name),
        Command::SemiflatSample {
            model,
            point,
            zeta_grid,
        } => semiflat_sample(&model.model, &point, zeta_grid, format),
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

fn model_point(model: &ModelDefinition, u: C64, r: f64, theta: &[f64]) -> Result<ModelPoint> {
    let rank = model.lattice.rank_total();
    let theta = if theta.is_empty() {
        vec![0.0; rank]
    } else {
        theta.to_vec()
    };
    if theta.len() != rank {
        return Err(Error::InvalidParameter(format!(
            "expected {rank} angles in --theta, got {}",
            theta.len()
        )));
    }
    ModelPoint::new(u, r, theta)
}

fn basis(model: &ModelDefinition) -> Vec<Charge> {
    (0..model.lattice.rank_total())
        .map(|i| model.lattice.basis(i))
        .collect()
}

fn solve_point(model: &ModelDefinition, p: &PointArgs, opts: &SolverOptions) -> Result<Solution> {
    let point = model_point(model, p.u, p.r, &p.theta)?;
    let frame = SemiflatFrame::new(&model.lattice, &model.central, &point)?;
    let rays = bps_rays(&model.spectrum, &model.central, point.u, point.r, opts.eps_spec)?;
    solve(frame, &rays, opts)
}

fn validate(spec: &str, grid: usize, tol: f64, format: Format) -> Result<Outcome> {
    positive("tol", tol)?;
    let (model, _) = load_model(spec)?;
    let mut header = vec!["chamber", "points"];
    let mut table: Option<Table> = None;
    let mut passed = true;
    let mut notes = String::new();
    for (k, label) in model.chamber_labels().iter().enumerate() {
        let points = model.chamber_grid(k, grid)?;
        let report = validate_conditions(&model.lattice, &model.central, &model.spectrum, &points);
        let maxima = report.maxima();
        let t = table.get_or_insert_with(|| {
            header.extend(maxima.iter().map(|(name, _)| *name));
            Table::new(&header)
        });
        let mut row = vec![label.to_string(), report.points.len().to_string()];
        row.extend(maxima.iter().map(|(_, v)| num(*v)));
        t.push(row);
        for (u, msg) in &report.failures {
            let _ = writeln!(notes, "failure at u = {}: {msg}", cplx(*u));
        }
        passed &= report.passes(tol);
    }
    let mut text = table.map(|t| t.render(format)).unwrap_or_default();
    text.push_str(&notes);
    let _ = writeln!(text, "conditions: {} tol {tol:e}", verdict(passed));
    Ok(Outcome { text, passed })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn solve_cmd(spec: &str, p: &PointArgs, opts: &SolverOptions, output: Option<&std::path::Path>) -> Result<Outcome> {
    let (model, cfg) = load_model(spec)?;
    let sol = solve_point(&model, p, opts)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "converged: iterations {} residual {}",
        sol.rays.iterations,
        num(sol.rays.residual)
    );
    let _ = writeln!(text, "rays {}", sol.grids().len());
    for g in sol.grids() {
        let charges: Vec<String> = g.ray.charges.iter().map(|c| c.charge.to_string()).collect();
        let _ = writeln!(text, "ray {} {}", cplx(g.ray.direction), charges.join(" "));
    }
    if let Some(path) = output {
        std::fs::write(path, write_solution(&cfg, &sol))
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    Ok(Outcome { text, passed: true })
}

fn jump_check(spec: &str, path: &std::path::Path, s_list: &[f64], tol: f64, format: Format) -> Result<Outcome> {
    positive("tol", tol)?;
    let (model, cfg) = load_model(spec)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let sol = read_solution(&text)?.restore(&model, &cfg)?;
    let lattice = &sol.frame.lattice;
    let mut table = Table::new(&["ray", "s", "charge", "relative_error"]);
    let mut worst = 0.0f64;
    for (k, g) in sol.grids().iter().enumerate() {
        for &s in s_list {
            for gamma in basis(&model) {
                let plus = sol.side_limit(&gamma, k, s, Side::Plus)?;
                let minus = sol.side_limit(&gamma, k, s, Side::Minus)?;
                let mut factor = C64::new(1.0, 0.0);
                for rc in &g.ray.charges {
                    let x = sol.side_limit(&rc.charge, k, s, Side::Plus)?.value;
                    let e = rc.omega * lattice.pair(&rc.charge, &gamma)?;
                    factor *= (1.0 - x).powi(e as i32);
                }
                let err = (plus.value - minus.value * factor).norm() / plus.value.norm();
                worst = worst.max(err);
                table.push(vec![k.to_string(), num(s), gamma.to_string(), num(err)]);
            }
        }
    }
    let passed = worst < tol;
    let mut text = table.render(format);
    let _ = writeln!(text, "jumps: {} max {} tol {tol:e}", verdict(passed), num(worst));
    Ok(Outcome { text, passed })
}

struct WallArgs {
    phi: f64,
    r: f64,
    theta: Vec<f64>,
    separation: f64,
    halvings: usize,
    min_order: f64,
}

fn wall_check(
    spec: &str,
    w: &WallArgs,
    choice: SpectrumChoice,
    opts: &SolverOptions,
    format: Format,
) -> Result<Outcome> {
    positive("R", w.r)?;
    positive("separation", w.separation)?;
    if w.halvings == 0 {
        return Err(Error::InvalidParameter("at least one halving is needed".into()));
    }
    let (model, _) = load_model(spec)?;
    if model.id != ModelId::Pentagon {
        return Err(Error::Unsupported(format!(
            "{} has no walls of marginal stability",
            model.id
        )));
    }
    let lambda = model.central.lambda();
    let wall = pentagon::wall_point(lambda, w.phi)?;
    let [(z1, _), _] = pentagon::periods(lambda, wall)?;
    let d = -z1 / z1.norm();
    let zetas: Vec<C64> = [0.6, 1.5, -0.6, -1.5, 2.8]
        .iter()
        .map(|a| d * C64::from_polar(1.0, *a))
        .collect();
    let half = 0.5 * w.separation;
    let (a, b) = (wall * (1.0 - half), wall * (1.0 + half));
    let theta = model_point(&model, wall, w.r, &w.theta)?.theta;
    let report = check_wall_continuity(&model, a, b, w.r, &theta, &zetas, opts, w.halvings, choice)?;
    let mut table = Table::new(&["u_in", "u_out", "separation", "discrepancy", "order"]);
    for (i, step) in report.steps.iter().enumerate() {
        let order = if i == 0 {
            "-".to_string()
        } else {
            format!("{:.4}", report.orders[i - 1])
        };
        table.push(vec![
            cplx(step.u_in),
            cplx(step.u_out),
            num(step.separation),
            num(step.discrepancy),
            order,
        ]);
    }
    let mut text = table.render(format);
    let order = report.observed_order();
    let passed = match choice {
        SpectrumChoice::Chamber => order >= w.min_order,
        SpectrumChoice::InnerOnBoth => order < w.min_order,
    };
    let label = match choice {
        SpectrumChoice::Chamber => "continuity",
        SpectrumChoice::InnerOnBoth => "negative control (discrepancy must persist)",
    };
    let _ = writeln!(
        text,
        "{label}: {} observed order {order:.4} threshold {}",
        verdict(passed),
        w.min_order
    );
    Ok(Outcome { text, passed })
}

fn factor_names(factors: &[[i64; 2]]) -> String {
    factors
        .iter()
        .map(|c| format!("K{}", Charge::new(*c)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn dump_images(text: &mut String, name: &str, a: &TorusAutomorphism) {
    for (i, img) in a.images().iter().enumerate() {
        let _ = writeln!(text, "{name} image of X{}:", a.grading().generators()[i]);
        text.push_str(&img.dump());
    }
}

/// Phase-ordered spectrum generator of the charges in the standard cone at u.
fn cone_generator(
    model: &ModelDefinition,
    grading: &Arc<ConeGrading>,
    u: C64,
    order: usize,
) -> Result<TorusAutomorphism> {
    let basis_z = model.central.basis_values(u)?;
    let charges: Vec<(Charge, i64, C64)> = model
        .spectrum
        .active(u)?
        .into_iter()
        .filter(|(g, _)| grading.degree(g).is_ok())
        .map(|(g, o)| {
            let z = hkforge::charge_lattice::combine(&g, &basis_z);
            (g, o, z)
        })
        .collect();
    spectrum_generator(grading.clone(), order, &charges)
}

fn wcf_check(spec: &str, order: usize, dump: bool) -> Result<Outcome> {
    if order == 0 {
        return Err(Error::InvalidParameter("truncation order must be at least 1".into()));
    }
    let (model, _) = load_model(spec)?;
    let grading = Arc::new(ConeGrading::standard(model.lattice.clone()));
    let mut text = String::new();
    match model.id {
        ModelId::Pentagon => {
            let k = |c: &[i64; 2]| ks_transform(grading.clone(), &Charge::new(*c), 1, order);
            let build = |fs: &[[i64; 2]]| -> Result<TorusAutomorphism> {
                let factors = fs.iter().map(k).collect::<Result<Vec<_>>>()?;
                product(grading.clone(), order, &factors)
            };
            let (lf, rf) = ([[1, 0], [0, 1]], [[0, 1], [1, 1], [1, 0]]);
            let (lhs, rhs) = (build(&lf)?, build(&rf)?);
            let _ = writeln!(text, "lhs: {}", factor_names(&lf));
            let _ = writeln!(text, "rhs: {}", factor_names(&rf));
            if dump {
                dump_images(&mut text, "lhs", &lhs);
                dump_images(&mut text, "rhs", &rhs);
            }
            let (ok, first) = check_wcf(&lhs, &rhs)?;
            if let Some(d) = first {
                let _ = writeln!(text, "first discrepancy at degree {d}");
            }
            let _ = writeln!(text, "pentagon identity: {} order {order}", verdict(ok));
            Ok(Outcome { text, passed: ok })
        }
        ModelId::OoguriVafa => {
            let lambda = model.central.lambda();
            let a = cone_generator(&model, &grading, 0.5 * lambda, order)?;
            let b = cone_generator(&model, &grading, C64::new(-0.3, 0.4) * lambda, order)?;
            let _ = writeln!(text, "lhs: spectrum generator at u = 0.5Λ");
            let _ = writeln!(text, "rhs: spectrum generator at u = (-0.3+0.4i)Λ");
            if dump {
                dump_images(&mut text, "lhs", &a);
                dump_images(&mut text, "rhs", &b);
            }
            let (ok, _) = check_wcf(&a, &b)?;
            let _ = writeln!(text, "ooguri-vafa generator constancy: {} order {order}", verdict(ok));
            Ok(Outcome { text, passed: ok })
        }
    }
}

fn tree_compare(
    spec: &str,
    p: &PointArgs,
    cutoff: usize,
    zeta: C64,
    opts: &SolverOptions,
    format: Format,
) -> Result<Outcome> {
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
    }
    let (model, _) = load_model(spec)?;
    let sol = solve_point(&model, p, opts)?;
    let active: Vec<(Charge, i64)> = sol
        .grids()
        .iter()
        .flat_map(|g| g.ray.charges.iter().map(|c| (c.charge.clone(), c.omega)))
        .collect();
    let dec = Decorations::new(&model.lattice, &active)?;
    let ev = TreeEvaluator::new(&sol.frame, sol.grids(), &dec, opts.delta)?;
    let mut table = Table::new(&["cutoff", "charge", "trees", "series_log_x", "difference"]);
    for gamma in basis(&model) {
        let reference = sol.evaluate(&gamma, zeta)?;
        for k in 1..=cutoff {
            let trees = enumerate_trees(&dec, k, DEFAULT_BUDGET)?;
            let v = ev.series_solution(&trees, &gamma, zeta)?;
            let diff = (v.log_value - reference.log_value).norm();
            table.push(vec![
                k.to_string(),
                gamma.to_string(),
                trees.len().to_string(),
                cplx(v.log_value),
                num(diff),
            ]);
        }
        table.push(vec![
            "solver".into(),
            gamma.to_string(),
            "-".into(),
            cplx(reference.log_value),
            num(0.0),
        ]);
    }
    Ok(Outcome {
        text: table.render(format),
        passed: true,
    })
}

fn ov_compare(spec: &str, p: &PointArgs, zeta: C64, tol: f64, opts: &SolverOptions, format: Format) -> Result<Outcome> {
    positive("tol", tol)?;
    let (model, _) = load_model(spec)?;
    if model.id != ModelId::OoguriVafa {
        return Err(Error::Unsupported(format!(
            "ov-compare needs the Ooguri-Vafa model, got {}",
            model.id
        )));
    }
    let sol = solve_point(&model, p, opts)?;
    let mut table = Table::new(&["charge", "solver_log_x", "oracle_log_x", "difference"]);
    let mut worst = 0.0f64;
    for gamma in basis(&model) {
        let a = sol.evaluate(&gamma, zeta)?;
        let b = ov_oracle(&sol.frame, &gamma, zeta, opts.delta)?;
        let d = (a.log_value - b.log_value).norm();
        worst = worst.max(d);
        table.push(vec![gamma.to_string(), cplx(a.log_value), cplx(b.log_value), num(d)]);
    }
    let passed = worst < tol && sol.rays.iterations == 1;
    let mut text = table.render(format);
    let _ = writeln!(
        text,
        "ov: {} iterations {} max difference {} tol {tol:e}",
        verdict(passed),
        sol.rays.iterations,
        num(worst)
    );
    Ok(Outcome { text, passed })
}

struct MetricArgs {
    semiflat_only: bool,
    samples: usize,
    tol: f64,
    emit_grid: Option<usize>,
}

fn matrix_lines(text: &mut String, name: &str, m: &RealForm) {
    let _ = writeln!(text, "{name}:");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:+.10e}", m[(i, j)])).collect();
        let _ = writeln!(text, "  {}", row.join(" "));
    }
}

fn metric(spec: &str, p: &PointArgs, m: &MetricArgs, opts: &SolverOptions, format: Format) -> Result<Outcome> {
    positive("tol", m.tol)?;
    let (model, _) = load_model(spec)?;
    let point = model_point(&model, p.u, p.r, &p.theta)?;
    let tol = MetricTolerances {
        laurent: m.tol,
        complex_structure: m.tol,
    };
    let rep = metric_at(
        &model,
        &point,
        opts,
        FdSteps::default(),
        m.samples,
        tol,
        m.semiflat_only,
    )?;
    let s = &rep.metric;
    let mut text = String::new();
    matrix_lines(&mut text, "g", &s.g);
    matrix_lines(&mut text, "J", &s.j);
    let eig: Vec<String> = s.eigenvalues.iter().map(|e| num(*e)).collect();
    let _ = writeln!(text, "eigenvalues: {}", eig.join(" "));
    let mut table = Table::new(&["residual", "value"]);
    for (name, v) in [
        ("laurent_fit", rep.fit.residual),
        ("reality", rep.fit.reality_defect),
        ("omega3_imaginary", rep.fit.omega3_imaginary),
        ("J^2+1", s.j_defect),
        ("g_compatibility", s.compatibility),
        ("g_asymmetry", s.asymmetry),
        ("triple", s.triple_defect()),
    ] {
        table.push(vec![name.into(), num(v)]);
    }
    text.push_str(&table.render(format));
    let passed = s.positive_definite() && s.triple_defect() < m.tol;
    let _ = writeln!(
        text,
        "metric: {} positive definite {}",
        verdict(passed),
        s.positive_definite()
    );
    if let Some(n) = m.emit_grid {
        let chamber = model.spectrum.chamber_index(point.u)?;
        let mut grid = Table::new(&[
            "u", "g00", "g01", "g02", "g03", "g11", "g12", "g13", "g22", "g23", "g33",
        ]);
        for u in model.chamber_grid(chamber, n)? {
            let q = ModelPoint::new(u, point.r, point.theta.clone())?;
            let g = metric_at(&model, &q, opts, FdSteps::default(), m.samples, tol, m.semiflat_only)?
                .metric
                .g;
            let mut row = vec![cplx(u)];
            for i in 0..4 {
                for j in i..4 {
                    row.push(num(g[(i, j)]));
                }
            }
            grid.push(row);
        }
        text.push_str(&grid.render(format));
    }
    Ok(Outcome { text, passed })
}

#[allow(clippy::too_many_arguments)]
fn decay(
    spec: &str,
    u: C64,
    theta: &[f64],
    r_list: &[f64],
    samples: usize,
    tol: f64,
    opts: &SolverOptions,
    format: Format,
) -> Result<Outcome> {
    positive("tol", tol)?;
    for r in r_list {
        positive("R", *r)?;
    }
    let (model, _) = load_model(spec)?;
    let theta = model_point(&model, u, 1.0, theta)?.theta;
    let rep = decay_scan(&model, u, &theta, r_list, opts, samples)?;
    let mut table = Table::new(&["R", "max_correction", "iterations"]);
    for row in &rep.rows {
        table.push(vec![num(row.r), num(row.max_correction), row.iterations.to_string()]);
    }
    let mut text = table.render(format);
    let passed = rep.relative_error() < tol;
    let _ = writeln!(
        text,
        "decay: {} slope {} expected {} relative error {}",
        verdict(passed),
        num(rep.slope),
        num(rep.expected),
        num(rep.relative_error())
    );
    Ok(Outcome { text, passed })
}

fn model_info(spec: &str) -> Result<Outcome> {
    let (model, cfg) = load_model(spec)?;
    let mut text = String::new();
    let _ = writeln!(text, "model {}", model.id);
    let _ = writeln!(text, "lambda {}", cplx(model.central.lambda()));
    let _ = writeln!(text, "domain {}", model.domain);
    let rows: Vec<String> = model
        .lattice
        .pairing_matrix()
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    let _ = writeln!(
        text,
        "pairing [{}] flavor rank {}",
        rows.join("; "),
        model.lattice.flavor_rank()
    );
    let disc: Vec<String> = model.discriminant.iter().map(|d| cplx(*d)).collect();
    let _ = writeln!(text, "discriminant {}", disc.join(" "));
    let _ = writeln!(text, "walls {}", model.walls);
    for ch in model.spectrum.chambers() {
        let entries: Vec<String> = ch.entries.iter().map(|(g, o)| format!("{g}:{o}")).collect();
        let _ = writeln!(text, "chamber {} {}", ch.label, entries.join(" "));
    }
    for t in &model.transitions {
        let images: Vec<String> = t.images.iter().map(|g| g.to_string()).collect();
        let _ = writeln!(text, "monodromy {}: {}", t.description, images.join(" "));
    }
    let _ = writeln!(text, "config:");
    text.push_str(&cfg.to_toml());
    Ok(Outcome { text, passed: true })
}

fn semiflat_sample(spec: &str, p: &PointArgs, n: usize, format: Format) -> Result<Outcome> {
    if n == 0 {
        return Err(Error::InvalidParameter("zeta grid needs at least one point".into()));
    }
    let (model, _) = load_model(spec)?;
    let point = model_point(&model, p.u, p.r, &p.theta)?;
    let frame = SemiflatFrame::new(&model.lattice, &model.central, &point)?;
    let mut table = Table::new(&["zeta", "charge", "re_log_xsf", "im_log_xsf"]);
    for k in 0..n {
        let zeta = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        for gamma in basis(&model) {
            let l = frame.log_xsf(&gamma, zeta);
            table.push(vec![cplx(zeta), gamma.to_string(), num(l.re), num(l.im)]);
        }
    }
    Ok(Outcome {
        text: table.render(format),
        passed: true,
    })
}
