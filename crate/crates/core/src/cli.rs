//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parse error (including an oracle grid
//! too coarse to verify against), 3 invalid state, 4 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use serde_json::json;

use crate::dynamics::{
    asymptotic_rate, default_t_max, sample_dynamics, verify_correspondence, DEFAULT_STEPS,
};
use crate::error::{DispatchError, DynamicsError, GridError};
use crate::input::{parse_state, StateInput};
use crate::measures::{brute_force_g, one_sided_measure_a, one_sided_measure_b, two_sided_measure};
use crate::random::{random_state, seeded, StateKind};
use crate::sphere::GridSpec;
use crate::state::{canonicalize_x_r, to_r_matrix, RMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID_STATE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Oracle agreement tolerance at the reference 64x32 grid.
pub const VERIFY_BASE_TOL: f64 = 1e-6;
/// Default tolerance for the system/environment correspondence checks.
pub const CORRESPONDENCE_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "geodiscord", version, about = "Geometric quantum discord of two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-sided and two-sided measures of a single state (JSON report).
    Measure {
        #[command(flatten)]
        input: InputArgs,
        /// Reject Bloch-form inputs that are not positive semidefinite.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// G(t) for system and environment under amplitude damping (CSV).
    Dynamics {
        #[command(flatten)]
        input: InputArgs,
        /// Decay rate; gamma(t) = exp(-kappa t / 2).
        #[arg(long)]
        kappa: f64,
        /// Time horizon [default: 10 / kappa].
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Tolerance of the correspondence report.
        #[arg(long, default_value_t = CORRESPONDENCE_TOL)]
        tol: f64,
        /// Input z components refer to an excited-state-up frame; flip them
        /// (sigma_x on both qubits) before damping towards |0>.
        #[arg(long)]
        excited_up: bool,
        /// Write critical times here instead of as a trailing `# {json}` line.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the analytic measure with the brute-force oracle.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Oracle grid, azimuthal x polar, at least 16 points per angle.
        #[arg(long, default_value = "64x32")]
        grid: String,
        /// Agreement tolerance [default: 1e-6 * max(1, 2048 / (A*B))].
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random states with analytic and oracle values (CSV).
    Sweep {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value = "64x32")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// JSON state file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON state given directly on the command line.
    #[arg(long)]
    pub inline: Option<String>,
}

/// A failed command: exit code plus message for standard error.
struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INVALID_STATE, msg.into())
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Measure { input, strict, out: path } => cmd_measure(&input, strict, path, out, err),
        Command::Dynamics {
            input,
            kappa,
            t_max,
            steps,
            tol,
            excited_up,
            sidecar,
            out: path,
        } => cmd_dynamics(
            &input,
            DynamicsOptions {
                kappa,
                t_max,
                steps,
                tol,
                excited_up,
                sidecar,
                out: path,
            },
            out,
            err,
        ),
        Command::Verify {
            input,
            grid,
            tol,
            strict,
            out: path,
        } => cmd_verify(&input, &grid, tol, strict, path, out, err),
        Command::Sweep {
            seed,
            count,
            grid,
            out: path,
        } => cmd_sweep(seed, count, &grid, path, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn positive(flag: &str, value: f64) -> Result<f64, Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("{flag} must be positive and finite, got {value}")))
    }
}

fn read_input(args: &InputArgs) -> Result<StateInput, Failure> {
    let text = match (&args.input, &args.inline) {
        (Some(path), _) => fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(text)) => text.clone(),
        (None, None) => return Err(usage("one of --input or --inline is required")),
    };
    parse_state(&text).map_err(|e| usage(e.to_string()))
}

/// Parse and validate a state. Density matrices must pass every check;
/// Bloch-form inputs must be in range and, unless `strict`, may be
/// non-positive (reported on standard error).
fn load_state(args: &InputArgs, strict: bool, err: &mut dyn Write) -> Result<(RMatrix, bool), Failure> {
    let input = read_input(args)?;
    if let StateInput::Rho(rho) = &input {
        let r = to_r_matrix(rho).map_err(|e| invalid(e.to_string()))?;
        return Ok((r, true));
    }
    let r = input.r_matrix();
    if !r.within_bounds() {
        return Err(invalid("Bloch vectors must have length at most 1 and |t_ij| at most 1"));
    }
    let report = input.density().validate();
    if !report.passed {
        let msg = format!(
            "state is not positive semidefinite (min eigenvalue {:.3e})",
            report.min_eigenvalue
        );
        if strict {
            return Err(invalid(msg));
        }
        let _ = writeln!(err, "warning: {msg}; continuing with the Bloch-form formulas");
    }
    Ok((r, report.passed))
}

fn open_out(path: &Option<PathBuf>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut file = fs::File::create(p).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
            f(&mut file).map_err(|e| usage(e.to_string()))
        }
        None => f(stdout).map_err(|e| usage(e.to_string())),
    }
}

fn vec_json(v: Option<Vector3<f64>>) -> serde_json::Value {
    match v {
        Some(v) => json!([v.x, v.y, v.z]),
        None => serde_json::Value::Null,
    }
}

fn cmd_measure(args: &InputArgs, strict: bool, path: Option<PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (r, physical) = load_state(args, strict, err)?;
    let a = one_sided_measure_a(&r);
    let b = one_sided_measure_b(&r);
    let g = two_sided_measure(&r);
    let report = json!({
        "g_two_sided": g.value,
        "method": g.method,
        "branch": g.branch,
        "k_opt": vec_json(g.k_opt),
        "l_opt": vec_json(g.l_opt),
        "lambda_max": g.lambda_max(&r),
        "g_one_sided_a": a.value,
        "k_opt_a": vec_json(a.k_opt),
        "g_one_sided_b": b.value,
        "l_opt_b": vec_json(b.l_opt),
        "physical": physical,
    });
    open_out(&path, out, |w| writeln!(w, "{}", serde_json::to_string_pretty(&report).unwrap()))?;
    Ok(EXIT_OK)
}

struct DynamicsOptions {
    kappa: f64,
    t_max: Option<f64>,
    steps: usize,
    tol: f64,
    excited_up: bool,
    sidecar: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn cmd_dynamics(args: &InputArgs, opts: DynamicsOptions, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    positive("--kappa", opts.kappa)?;
    positive("--tol", opts.tol)?;
    if let Some(t) = opts.t_max {
        positive("--t-max", t)?;
    }
    let (r, _) = load_state(args, false, err)?;
    let canon = canonicalize_x_r(&r).map_err(|e| invalid(e.to_string()))?;
    let mut params = canon.params;
    if !params.identical_purity() {
        return Err(invalid(
            DispatchError::PurityMismatch {
                x3: params.x3,
                y3: params.y3,
            }
            .to_string(),
        ));
    }
    if opts.excited_up {
        params = params.flip_z();
    }
    let t_max = opts.t_max.unwrap_or_else(|| default_t_max(opts.kappa));
    let series = sample_dynamics(&params, opts.kappa, t_max, opts.steps).map_err(|e| match e {
        DynamicsError::NonPositive { .. } | DynamicsError::TooFewSteps(_) => usage(e.to_string()),
        other => invalid(other.to_string()),
    })?;

    open_out(&opts.out, out, |w| series.write_csv(w, opts.sidecar.is_none()))?;
    if let Some(p) = &opts.sidecar {
        fs::write(p, series.critical_json() + "\n").map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
    }
    let corr = verify_correspondence(&series, opts.tol);
    let rate = asymptotic_rate(&series, opts.kappa);
    let _ = writeln!(err, "correspondence: {}", serde_json::to_string(&corr).unwrap());
    let _ = writeln!(err, "asymptotic rate: {}", serde_json::to_string(&rate).unwrap());
    Ok(EXIT_OK)
}

/// 1e-6 at 64x32, loosened in proportion for coarser grids.
pub fn verify_tolerance(grid: &GridSpec) -> f64 {
    VERIFY_BASE_TOL * (2048.0 / (grid.azimuthal * grid.polar) as f64).max(1.0)
}

fn cmd_verify(
    args: &InputArgs,
    grid: &str,
    tol: Option<f64>,
    strict: bool,
    path: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (r, _) = load_state(args, strict, err)?;
    let grid = match grid.parse::<GridSpec>() {
        Ok(g) => g,
        Err(e @ GridError::TooCoarse { .. }) => {
            let report = json!({ "status": "insufficient-resolution", "grid": grid, "message": e.to_string() });
            open_out(&path, out, |w| writeln!(w, "{}", serde_json::to_string_pretty(&report).unwrap()))?;
            return Err(usage(format!("insufficient resolution: {e}")));
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let tol = positive("--tol", tol.unwrap_or_else(|| verify_tolerance(&grid)))?;
    let analytic = two_sided_measure(&r);
    let oracle = brute_force_g(&r, &grid);
    let diff = (analytic.value - oracle.value).abs();
    let pass = diff <= tol;
    let report = json!({
        "status": if pass { "pass" } else { "fail" },
        "g_analytic": analytic.value,
        "method": analytic.method,
        "branch": analytic.branch,
        "g_oracle": oracle.value,
        "abs_diff": diff,
        "tol": tol,
        "grid": grid.to_string(),
    });
    open_out(&path, out, |w| writeln!(w, "{}", serde_json::to_string_pretty(&report).unwrap()))?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_sweep(seed: u64, count: usize, grid: &str, path: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let grid: GridSpec = grid.parse().map_err(|e: GridError| usage(e.to_string()))?;
    let mut rng = seeded(seed);
    let mut rows = Vec::with_capacity(count);
    let mut max_diff: f64 = 0.0;
    for i in 0..count {
        let kind = StateKind::for_index(i);
        let r = random_state(&mut rng, kind);
        let g = two_sided_measure(&r).value;
        let oracle = brute_force_g(&r, &grid).value;
        let diff = (g - oracle).abs();
        max_diff = max_diff.max(diff);
        rows.push(format!(
            "{i},{kind:?},{:.11e},{:.11e},{g:.11e},{oracle:.11e},{diff:.11e}",
            one_sided_measure_a(&r).value,
            one_sided_measure_b(&r).value,
        ));
    }
    open_out(&path, out, |w| {
        writeln!(w, "index,kind,g_one_sided_a,g_one_sided_b,g_two_sided,g_oracle,abs_diff")?;
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        if count > 0 {
            writeln!(w, "max,,,,,,{max_diff:.11e}")?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}
