//! Command-line harness: invariant verification, spectra of tensor files,
//! single-trajectory flows and the cone-invariance Monte Carlo experiment.
//!
//! Exit codes: 0 success, 1 property/integration failure, 2 usage or input
//! error.

mod checks;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

use bisectional::basis::{matrix_full, matrix_traceless, spectrum, standard_basis};
use bisectional::cones::cone_report;
use bisectional::curvature::{KahlerCurvature, SampleStyle, DEFAULT_TOL};
use bisectional::flow::{
    integrate, montecarlo_cone, FlowState, IntegratorOptions, Method, MonteCarloConfig,
};
use bisectional::io::{load_tensor, matrix_to_csv, matrix_to_json, trajectory_to_csv, MatrixJson};
use bisectional::{Cone, ConeReport};

use checks::{FaultInjection, VerifyConfig};

const EXIT_OK: i32 = 0;
const EXIT_PROPERTY_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "bisectional",
    version,
    about = "Curvature-operator cone experiments on the traceless (1,1)-form space"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the identity/invariant suite and emit a JSON report.
    Verify(VerifyArgs),
    /// Eigenvalues, block matrix and cone diagnostics of a tensor file.
    Spectrum(SpectrumArgs),
    /// Integrate one reaction-ODE trajectory and emit CSV.
    Flow(FlowArgs),
    /// Cone-invariance Monte Carlo experiment; emits a JSON summary.
    Mc(McArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated list of dimensions.
    #[arg(long, default_value = "2,3")]
    n: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random samples per stochastic check.
    #[arg(long, default_value_t = 25)]
    samples: usize,
    /// Output path for the JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Self-test hook: deliberately break one check (supported:
    /// quadratic-identity) and confirm the suite reports it.
    #[arg(long, value_name = "NAME")]
    inject_fault: Option<String>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Tensor JSON file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output path; `.csv` writes the operator matrix row-major, anything
    /// else a JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random frames for the cone diagnostics.
    #[arg(long, default_value_t = 16)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Invariant tolerance for input validation.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct FlowArgs {
    /// Dimension (used when no input tensor is given).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=8))]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    /// Cone for the random start: nonneg | 2nonneg.
    #[arg(long, default_value = "2nonneg")]
    cone: String,
    #[arg(long, default_value_t = 0.01)]
    margin: f64,
    /// Random frames per recorded state for the diagnostics.
    #[arg(long, default_value_t = 4)]
    frames: usize,
    /// Start from a tensor JSON file instead of a random sample.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Integration method: rk4 | euler.
    #[arg(long, default_value = "rk4")]
    method: String,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=8))]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    /// nonneg | 2nonneg
    #[arg(long, default_value = "2nonneg")]
    cone: String,
    #[arg(long, default_value_t = 0.01)]
    margin: f64,
    #[arg(long, default_value_t = 4)]
    frames: usize,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SpectrumReport {
    n: usize,
    basis_id: String,
    m_eigenvalues: Vec<f64>,
    full_eigenvalues: Vec<f64>,
    m_matrix: MatrixJson,
    full_matrix: MatrixJson,
    cone: ConeReport,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::Flow(a) => cmd_flow(a),
        Cmd::Mc(a) => cmd_mc(a),
    };
    std::process::exit(code);
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn parse_dims(s: &str) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let v: usize = part.trim().parse().ok()?;
        if !(2..=8).contains(&v) {
            return None;
        }
        out.push(v);
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> i32 {
    let Some(n_values) = parse_dims(&a.n) else {
        return usage_error("--n must be a comma-separated list of dimensions in 2..=8");
    };
    let fault = match a.inject_fault.as_deref() {
        None => FaultInjection::None,
        Some(name) => match FaultInjection::parse(name) {
            Some(f) => f,
            None => return usage_error(&format!("unknown fault '{name}'")),
        },
    };
    let cfg = VerifyConfig {
        n_values,
        seed: a.seed,
        samples: a.samples,
        fault,
    };
    let report = match checks::run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => return usage_error(&format!("{e}")),
    };
    let text = serde_json::to_string_pretty(&report).expect("serialize report");
    if emit(&a.out, &text).is_err() {
        return usage_error("cannot write output");
    }
    for c in &report.checks {
        eprintln!(
            "{} {} (residual {:.3e}, tol {:.1e})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        );
    }
    if report.passed {
        EXIT_OK
    } else {
        let names: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("failed: {}", names.join(", "));
        EXIT_PROPERTY_FAILURE
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> i32 {
    let t = match load_tensor(&a.input, a.tol) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("{}: {e}", a.input.display())),
    };
    let b = match standard_basis(t.dim()) {
        Ok(b) => b,
        Err(e) => return usage_error(&format!("{e}")),
    };
    let (m, full, cone) = match (|| -> bisectional::Result<_> {
        let m = matrix_traceless(&t, &b)?;
        let full = matrix_full(&t, &b)?;
        let cone = cone_report(&t, &b, a.frames, a.seed, bisectional::CONE_TOL)?;
        Ok((m, full, cone))
    })() {
        Ok(v) => v,
        Err(e) => return usage_error(&format!("{e}")),
    };
    let text = match a.out.as_ref().and_then(|p| p.extension()) {
        Some(ext) if ext == "csv" => matrix_to_csv(&m),
        _ => {
            let report = SpectrumReport {
                n: t.dim(),
                basis_id: b.id().to_string(),
                m_eigenvalues: spectrum(&m),
                full_eigenvalues: spectrum(&full),
                m_matrix: matrix_to_json(&m),
                full_matrix: matrix_to_json(&full),
                cone,
            };
            serde_json::to_string_pretty(&report).expect("serialize report")
        }
    };
    if emit(&a.out, &text).is_err() {
        return usage_error("cannot write output");
    }
    EXIT_OK
}

fn cmd_flow(a: FlowArgs) -> i32 {
    let Some(cone) = Cone::parse(&a.cone) else {
        return usage_error("--cone must be nonneg or 2nonneg");
    };
    let Some(method) = Method::parse(&a.method) else {
        return usage_error("--method must be rk4 or euler");
    };
    if a.dt <= 0.0 || a.t_end <= 0.0 {
        return usage_error("--dt and --t-end must be positive");
    }
    let start = match &a.input {
        Some(path) => match load_tensor(path, a.tol) {
            Ok(t) => t,
            Err(e) => return usage_error(&format!("{}: {e}", path.display())),
        },
        None => {
            let n = a.n as usize;
            let b = standard_basis(n).expect("n validated");
            match KahlerCurvature::random(
                n,
                a.seed,
                SampleStyle::ShiftedIntoCone {
                    cone,
                    margin: a.margin,
                },
                &b,
            ) {
                Ok(t) => t,
                Err(e) => return usage_error(&format!("{e}")),
            }
        }
    };
    let b = match standard_basis(start.dim()) {
        Ok(b) => b,
        Err(e) => return usage_error(&format!("{e}")),
    };
    let mut opts = IntegratorOptions::new(a.dt, a.t_end);
    opts.method = method;
    opts.diag_frames = a.frames;
    opts.seed = a.seed;
    let traj = match integrate(
        FlowState {
            time: 0.0,
            curv: start,
        },
        &b,
        &opts,
    ) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("{e}")),
    };
    let csv = trajectory_to_csv(&traj);
    if emit(&a.out, &csv).is_err() {
        return usage_error("cannot write output");
    }
    match &traj.status {
        bisectional::TrajectoryStatus::Completed => EXIT_OK,
        bisectional::TrajectoryStatus::Truncated { at_time, reason } => {
            eprintln!("trajectory truncated at t={at_time}: {reason}");
            EXIT_PROPERTY_FAILURE
        }
    }
}

fn cmd_mc(a: McArgs) -> i32 {
    let Some(cone) = Cone::parse(&a.cone) else {
        return usage_error("--cone must be nonneg or 2nonneg");
    };
    if a.dt <= 0.0 || a.t_end <= 0.0 {
        return usage_error("--dt and --t-end must be positive");
    }
    let n = a.n as usize;
    let b = standard_basis(n).expect("n validated");
    let mut cfg = MonteCarloConfig::new(n, cone, a.samples, a.seed);
    cfg.dt = a.dt;
    cfg.t_end = a.t_end;
    cfg.margin = a.margin;
    cfg.frames = a.frames;
    let summary = match montecarlo_cone(&cfg, &b) {
        Ok(s) => s,
        Err(e) => return usage_error(&format!("{e}")),
    };
    let text = serde_json::to_string_pretty(&summary).expect("serialize summary");
    if emit(&a.out, &text).is_err() {
        return usage_error("cannot write output");
    }
    eprintln!(
        "{} samples: {} completed, {} truncated",
        summary.per_sample.len(),
        summary.completed,
        summary.truncated
    );
    EXIT_OK
}
