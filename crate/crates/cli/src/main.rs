//! Command-line front end: model validation, Riemann-Hilbert solves, the
//! wall-crossing, tree-series and Ooguri-Vafa cross-checks, and metric output.
//!
//! Exit status: 0 on success, 1 when a check fails or the computation is
//! refused, 2 on a usage error. Errors are printed as one line
//! `error: <kind>: <message>` on stderr.

mod commands;
mod table;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hkforge::rh_solver::SolverOptions;
use hkforge::{Error, Result, C64};

use table::Format;

#[derive(Parser, Debug)]
#[command(name = "hkforge", version, about = "Hyperkähler metrics from integrable-system data")]
struct Cli {
    /// Report layout.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [re, im] = parts.as_slice() else {
        return Err(format!("expected re,im but got '{s}'"));
    };
    let re: f64 = re.trim().parse().map_err(|e| format!("'{re}': {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("'{im}': {e}"))?;
    Ok(C64::new(re, im))
}

#[derive(Args, Debug, Clone)]
pub struct ModelArg {
    /// Builtin model name (`ov`, `pentagon`) or a model file.
    #[arg(long)]
    pub model: String,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Base point as re,im.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub u: C64,
    #[arg(long = "R")]
    pub r: f64,
    /// Torus angles, one per basis charge (default all zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Fixed-point iteration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Gauss-Legendre nodes per panel.
    #[arg(long, default_value_t = 16)]
    pub nodes: usize,
    /// Panels per ray.
    #[arg(long, default_value_t = 16)]
    pub panels: usize,
    /// Quadrature tail tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub eps_quad: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn options(&self) -> Result<SolverOptions> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.eps_quad.is_nan() || self.eps_quad <= 0.0 {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.nodes == 0 || self.panels == 0 || self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "node, panel and iteration counts must be at least 1".into(),
            ));
        }
        Ok(SolverOptions {
            tol_iter: self.tol,
            per_panel: self.nodes,
            panels: self.panels,
            eps_quad: self.eps_quad,
            max_iter: self.max_iter,
            ..SolverOptions::default()
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the model conditions (flavor constancy, dZ∧dZ = 0, rank,
    /// positivity, parity, holomorphy) on every chamber grid.
    Validate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 5)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Solve the integral equation and write a solution file.
    Solve {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Compare side limits across every ray of a stored solution with the
    /// KS action.
    JumpCheck {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        solution: std::path::PathBuf,
        /// Positions s on each ray, ζ = direction·e^s.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.7, 0.0, 0.4])]
        s: Vec<f64>,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Halving sequence of solves straddling a pentagon wall.
    WallCheck {
        #[command(flatten)]
        model: ModelArg,
        /// Wall point parameter: arg u on the wall.
        #[arg(long, default_value_t = 1.2, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long = "R", default_value_t = 0.5)]
        r: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
        /// Initial relative radial separation of the two points.
        #[arg(long, default_value_t = 8e-4)]
        separation: f64,
        #[arg(long, default_value_t = 4)]
        halvings: usize,
        /// Use the inner spectrum on both sides.
        #[arg(long)]
        negative_control: bool,
        #[arg(long, default_value_t = 0.9)]
        min_order: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Exact wall-crossing identities of the model's spectra.
    WcfCheck {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Print the generator images of both factorizations.
        #[arg(long)]
        dump_series: bool,
    },
    /// Tree-series partial sums against the solver.
    TreeCompare {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 4)]
        cutoff: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.6,0.45")]
        zeta: C64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Ooguri-Vafa solver values against the closed-form integral.
    OvCompare {
        #[arg(long, default_value = "ov")]
        model: String,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.6,0.45")]
        zeta: C64,
        #[arg(long, default_value_t = 1e-9)]
        check_tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Metric, complex structure and diagnostics at one point.
    Metric {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        semiflat_only: bool,
        /// Unit-circle samples for the Laurent fit.
        #[arg(long, default_value_t = 12)]
        samples: usize,
        /// Laurent-fit and triple tolerance.
        #[arg(long, default_value_t = 1e-6)]
        check_tol: f64,
        /// Also print g over an n × n grid of the base point's chamber.
        #[arg(long)]
        emit_grid: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Decay of the corrections with R.
    DecayScan {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        u: C64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
        #[arg(long = "R-list", value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0])]
        r_list: Vec<f64>,
        #[arg(long, default_value_t = 360)]
        samples: usize,
        /// Allowed relative deviation of the fitted slope.
        #[arg(long, default_value_t = 0.02)]
        check_tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Lattice, spectra per chamber and walls of a model.
    ModelInfo {
        /// Builtin model name or model file.
        name: String,
    },
    /// Semiflat coordinates on a grid of the unit ζ-circle.
    SemiflatSample {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 8)]
        zeta_grid: usize,
    },
}

/// Report text and whether the check it describes passed.
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("HKFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("HKFORGE_THREADS = '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(cli.command, cli.format));
    match result {
        Ok(out) => {
            print!("{}", out.text);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(exit_for(&e))
        }
    }
}
