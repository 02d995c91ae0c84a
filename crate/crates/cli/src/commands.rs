//! The subcommands. Every command resolves its inputs through
//! [`crate::config`], renders a string (CSV or JSON), and hands it to
//! [`crate::output::write_result`]; the render functions are separated
//! from the writing so the golden runner can reuse them verbatim.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use qpt_core::{
    discretize_log, exact_ground, exponent_suite, find_alpha_c, ground_energy,
    ground_state_report, scan_boundary, sigma_x_avg, sigma_z_avg, solve, truncation_sweep,
    BathSpec, BoundaryAxis, BoundaryPoint, Branch, ExponentFit, GroundStateReport,
    TruncationSpec, TruncationTable, Validity,
};

use crate::config::{
    build_params, require, CliError, FileConfig, Format, GridFlags, GridSpec, ModelFlags,
    OutputFlags, SolverFlags, Spacing,
};
use crate::output::{fmt_f64, fmt_opt_f64, render_json, write_result, Table};

fn continuum(alpha: f64, s: f64) -> BathSpec {
    BathSpec::Continuum { alpha, s, omega_c: 1.0 }
}

fn branch_token(b: Branch) -> String {
    format!("{b:?}")
}

/// Compact validity rendering for CSV cells: `valid`, or a `+`-joined
/// list of the violated windows.
fn validity_token(v: &Validity) -> String {
    let mut bad = Vec::new();
    if !v.eps_prime_in_window {
        bad.push("eps_prime_out");
    }
    if v.alpha_in_window == Some(false) {
        bad.push("alpha_out");
    }
    if bad.is_empty() {
        "valid".to_owned()
    } else {
        bad.join("+")
    }
}

// ---------------------------------------------------------------- solve ----

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
    /// Also compute the finite-bias susceptibility (refused in the
    /// localized phase; may fail to extrapolate very close to the
    /// transition).
    #[arg(long)]
    pub chi: bool,
}

#[derive(Serialize)]
struct SolveOutput {
    s: f64,
    delta: f64,
    epsilon: f64,
    k: f64,
    alpha: f64,
    report: GroundStateReport,
}

pub fn solve_text(args: &SolveArgs, file: &FileConfig, format: Format) -> Result<String, CliError> {
    let m = args.model.merged(file);
    let s = require("s", m.s)?;
    let delta = require("delta", m.delta)?;
    let alpha = require("alpha", m.alpha)?;
    let epsilon = m.epsilon.unwrap_or(0.0);
    let k = m.k.unwrap_or(0.0);
    let params = build_params(delta, epsilon, k, alpha, s)?;
    let opts = args.solver.merged(file)?;
    let report = ground_state_report(&params, &continuum(alpha, s), &opts, args.chi)?;

    match format {
        Format::Json => render_json(&SolveOutput { s, delta, epsilon, k, alpha, report }),
        Format::Csv => {
            let table = Table {
                comments: vec![format!(
                    "s = {s}, delta = {delta}, epsilon = {epsilon}, k = {k}, alpha = {alpha}"
                )],
                header: vec!["e_g", "sx", "sz", "chi", "entropy", "c12", "branch", "validity"],
                rows: vec![vec![
                    fmt_f64(report.e_g),
                    fmt_f64(report.sx),
                    fmt_f64(report.sz),
                    fmt_opt_f64(report.chi),
                    fmt_f64(report.entropy),
                    fmt_f64(report.c12),
                    branch_token(report.branch),
                    validity_token(&report.validity),
                ]],
            };
            Ok(table.render_csv())
        }
    }
}

pub fn run_solve(args: &SolveArgs, file: &FileConfig) -> Result<(), CliError> {
    let (out, format) = args.output.merged(file, Format::Json);
    let text = solve_text(args, file, format)?;
    write_result(&out, &text)
}

// ---------------------------------------------------------------- phase ----

/// Coordinate along which the phase boundary is traced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisKind {
    /// α_c as a function of tunneling Δ at fixed K.
    Delta,
    /// α_c as a function of Ising coupling K at fixed Δ.
    K,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    /// Scan coordinate.
    #[arg(long, value_enum)]
    pub axis: AxisKind,
    /// Bath exponent; repeat the flag for a multi-curve table.
    #[arg(long = "s")]
    pub s: Vec<f64>,
    /// Fixed tunneling Δ (k-axis scans).
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Fixed Ising coupling K (delta-axis scans).
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Serialize)]
struct PhaseOutput {
    axis: &'static str,
    fixed: f64,
    points: Vec<BoundaryPoint>,
}

pub fn phase_text(args: &PhaseArgs, file: &FileConfig, format: Format) -> Result<String, CliError> {
    let mut s_list = args.s.clone();
    if s_list.is_empty() {
        s_list.extend(file.s);
    }
    if s_list.is_empty() {
        return Err(CliError::validation(
            "field `--s`: at least one bath exponent is required",
        ));
    }
    let opts = args.solver.merged(file)?;

    let (axis, axis_name, fixed) = match args.axis {
        AxisKind::Delta => {
            let k = args.k.or(file.k).unwrap_or(0.0);
            let defaults =
                GridSpec { start: 1e-2, stop: 1.0, count: 25, spacing: Spacing::Log };
            let grid = args.grid.merged(file, defaults, None)?;
            (BoundaryAxis::DeltaAxis { grid: grid.points(), k_ising: k }, "delta", k)
        }
        AxisKind::K => {
            let delta = require("delta", args.delta.or(file.delta))?;
            let defaults =
                GridSpec { start: -0.1, stop: 0.3, count: 21, spacing: Spacing::Linear };
            let grid = args.grid.merged(file, defaults, None)?;
            (BoundaryAxis::KAxis { grid: grid.points(), delta }, "k", delta)
        }
    };
    let points = scan_boundary(&axis, &s_list, &opts);

    match format {
        Format::Json => render_json(&PhaseOutput { axis: axis_name, fixed, points }),
        Format::Csv => {
            let fixed_name = if axis_name == "delta" { "k" } else { "delta" };
            let table = Table {
                comments: vec![format!("fixed {fixed_name} = {fixed}")],
                header: vec![
                    "s",
                    axis_name,
                    "alpha_c",
                    "criterion_residual",
                    "asymptotic",
                    "k_r",
                    "error",
                ],
                rows: points
                    .iter()
                    .map(|p| {
                        vec![
                            fmt_f64(p.s),
                            fmt_f64(p.axis_value),
                            fmt_opt_f64(p.alpha_c),
                            fmt_opt_f64(p.criterion_residual),
                            p.asymptotic.to_string(),
                            fmt_opt_f64(p.k_r),
                            p.error.clone().unwrap_or_default(),
                        ]
                    })
                    .collect(),
            };
            Ok(table.render_csv())
        }
    }
}

pub fn run_phase(args: &PhaseArgs, file: &FileConfig) -> Result<(), CliError> {
    let (out, format) = args.output.merged(file, Format::Csv);
    let text = phase_text(args, file, format)?;
    write_result(&out, &text)
}

// ------------------------------------------------------- entropy / corr ----

/// Which ground-state observable an α scan reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Entropy,
    Corr,
}

impl ScanKind {
    fn column(self) -> &'static str {
        match self {
            ScanKind::Entropy => "entropy",
            ScanKind::Corr => "c12",
        }
    }

    fn pick(self, report: &GroundStateReport) -> f64 {
        match self {
            ScanKind::Entropy => report.entropy,
            ScanKind::Corr => report.c12,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Serialize)]
struct ScanRow {
    alpha: f64,
    value: Option<f64>,
    branch: Option<Branch>,
    validity: Option<Validity>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ScanOutput {
    observable: &'static str,
    s: f64,
    delta: f64,
    epsilon: f64,
    k: f64,
    alpha_c: Option<f64>,
    clamped: bool,
    rows: Vec<ScanRow>,
}

pub fn scan_text(
    args: &ScanArgs,
    file: &FileConfig,
    kind: ScanKind,
    format: Format,
) -> Result<String, CliError> {
    let m = args.model.merged(file);
    let s = require("s", m.s)?;
    let delta = require("delta", m.delta)?;
    let k = m.k.unwrap_or(0.0);
    // A strictly positive seed bias keeps the localized branch oriented
    // and reproduces the reference curves; ε = 0 is still reachable
    // explicitly.
    let epsilon = m.epsilon.unwrap_or(1e-6);
    if m.alpha.is_some() {
        return Err(CliError::validation(
            "field `--alpha`: scans sweep alpha; set the range via --start/--stop/--count",
        ));
    }
    let opts = args.solver.merged(file)?;

    // The ansatz is trustworthy only up to 1.1·α_c; locate the window
    // before building the grid so auto ranges land on it exactly.
    let alpha_c = find_alpha_c(delta, k, s, &opts).map(|cp| cp.alpha_c);
    let limit = alpha_c.as_ref().ok().map(|ac| 1.1 * ac);
    let explicit_stop = args.grid.stop.or(file.stop);
    if explicit_stop.is_none() && limit.is_none() {
        let e = alpha_c.unwrap_err();
        return Err(CliError {
            message: format!(
                "field `--stop`: required here — the validity window could not be located ({e})"
            ),
            ..CliError::from(e)
        });
    }
    let defaults = GridSpec {
        start: 0.0,
        stop: limit.unwrap_or(1.0),
        count: 61,
        spacing: Spacing::Linear,
    };
    let grid = args.grid.merged(file, defaults, limit)?;
    let (grid, clamped) = match limit {
        Some(l) => grid.clamped_to(l),
        None => (grid, false),
    };

    let rows: Vec<ScanRow> = grid
        .points()
        .par_iter()
        .map(|&alpha| {
            let point = build_params(delta, epsilon, k, alpha, s)
                .map_err(|e| e.message)
                .and_then(|p| {
                    ground_state_report(&p, &continuum(alpha, s), &opts, false)
                        .map_err(|e| e.to_string())
                });
            match point {
                Ok(report) => {
                    let mut validity = report.validity;
                    validity.alpha_in_window =
                        limit.map(|l| alpha <= l * (1.0 + 1e-12));
                    ScanRow {
                        alpha,
                        value: Some(kind.pick(&report)),
                        branch: Some(report.branch),
                        validity: Some(validity),
                        error: None,
                    }
                }
                Err(message) => ScanRow {
                    alpha,
                    value: None,
                    branch: None,
                    validity: None,
                    error: Some(message),
                },
            }
        })
        .collect();

    match format {
        Format::Json => render_json(&ScanOutput {
            observable: kind.column(),
            s,
            delta,
            epsilon,
            k,
            alpha_c: alpha_c.ok(),
            clamped,
            rows,
        }),
        Format::Csv => {
            let mut comments = Vec::new();
            if clamped {
                comments.push("clamped: validity window".to_owned());
            }
            if let Ok(ac) = alpha_c {
                comments.push(format!("alpha_c = {} (validity window alpha <= 1.1*alpha_c)", fmt_f64(ac)));
            }
            let table = Table {
                comments,
                header: vec!["alpha", kind.column(), "branch", "validity", "error"],
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            fmt_f64(r.alpha),
                            fmt_opt_f64(r.value),
                            r.branch.map(branch_token).unwrap_or_default(),
                            r.validity.as_ref().map(validity_token).unwrap_or_default(),
                            r.error.clone().unwrap_or_default(),
                        ]
                    })
                    .collect(),
            };
            Ok(table.render_csv())
        }
    }
}

pub fn run_scan(args: &ScanArgs, file: &FileConfig, kind: ScanKind) -> Result<(), CliError> {
    let (out, format) = args.output.merged(file, Format::Csv);
    let text = scan_text(args, file, kind, format)?;
    write_result(&out, &text)
}

// ------------------------------------------------------------ exponents ----

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

pub fn exponents_text(
    args: &ExponentsArgs,
    file: &FileConfig,
    format: Format,
) -> Result<String, CliError> {
    let m = args.model.merged(file);
    let s = require("s", m.s)?;
    let delta = require("delta", m.delta)?;
    let k = m.k.unwrap_or(0.0);
    if let Some(alpha) = m.alpha {
        return Err(CliError::validation(format!(
            "field `--alpha`: the exponent suite locates its own crossings, got {alpha}"
        )));
    }
    let opts = args.solver.merged(file)?;
    let suite = exponent_suite(s, delta, k, &opts)?;

    match format {
        Format::Json => render_json(&suite),
        Format::Csv => {
            let fit_row = |name: &str, f: &ExponentFit| {
                vec![
                    name.to_owned(),
                    fmt_f64(f.value),
                    fmt_f64(f.intercept),
                    fmt_f64(f.r_squared),
                    fmt_f64(f.window.0),
                    fmt_f64(f.window.1),
                    f.n_points.to_string(),
                ]
            };
            let table = Table {
                comments: vec![format!(
                    "s = {s}, alpha_c = {}, delta_c = {}, alpha_zeta = {}, k_c = {}",
                    fmt_f64(suite.alpha_c),
                    fmt_f64(suite.delta_c),
                    fmt_f64(suite.alpha_zeta),
                    fmt_f64(suite.k_c)
                )],
                header: vec![
                    "exponent",
                    "value",
                    "intercept",
                    "r_squared",
                    "window_lo",
                    "window_hi",
                    "n_points",
                ],
                rows: vec![
                    fit_row("delta", &suite.delta_fit),
                    fit_row("gamma", &suite.gamma_fit),
                    fit_row("beta", &suite.beta_fit),
                    fit_row("beta_prime", &suite.beta_prime_fit),
                    fit_row("zeta", &suite.zeta_fit),
                ],
            };
            Ok(table.render_csv())
        }
    }
}

pub fn run_exponents(args: &ExponentsArgs, file: &FileConfig) -> Result<(), CliError> {
    let (out, format) = args.output.merged(file, Format::Json);
    let text = exponents_text(args, file, format)?;
    write_result(&out, &text)
}

// --------------------------------------------------------------- oracle ----

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Number of logarithmically placed bath modes (1–8).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Discretization base Λ > 1 for the mode grid.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Deepest per-mode occupation cap of the convergence sweep (≥ 2).
    #[arg(long)]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Serialize)]
struct OracleOutput {
    s: f64,
    delta: f64,
    epsilon: f64,
    k: f64,
    alpha: f64,
    lambda: f64,
    modes: usize,
    table: TruncationTable,
    exact_energy: f64,
    exact_sigma_z: f64,
    exact_sigma_x: f64,
    exact_residual: f64,
    exact_dim: usize,
    ansatz_energy: f64,
    ansatz_sigma_z: f64,
    ansatz_sigma_x: f64,
    energy_gap: f64,
    relative_gap: f64,
    bound_satisfied: bool,
}

pub fn oracle_text(args: &OracleArgs, file: &FileConfig, format: Format) -> Result<String, CliError> {
    let m = args.model.merged(file);
    let s = require("s", m.s)?;
    let delta = require("delta", m.delta)?;
    let alpha = require("alpha", m.alpha)?;
    let epsilon = m.epsilon.unwrap_or(1e-5);
    let k = m.k.unwrap_or(0.0);
    let n_modes = args.modes.or(file.modes).unwrap_or(5);
    if !(1..=8).contains(&n_modes) {
        return Err(CliError::validation(format!(
            "field `--modes`: the oracle handles 1 to 8 modes, got {n_modes}"
        )));
    }
    let lambda = args.lambda.or(file.lambda).unwrap_or(2.0);
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(CliError::validation(format!(
            "field `--lambda`: must be a finite base > 1, got {lambda}"
        )));
    }
    let n_max = args.n_max.or(file.n_max).unwrap_or(6);
    if n_max < 2 {
        return Err(CliError::validation(format!(
            "field `--n-max`: the sweep needs a cap of at least 2, got {n_max}"
        )));
    }

    let params = build_params(delta, epsilon, k, alpha, s)?;
    let opts = args.solver.merged(file)?;
    let bath = BathSpec::Discrete { modes: discretize_log(alpha, s, 1.0, n_modes, lambda)? };

    let caps: Vec<usize> = (2..=n_max).collect();
    let table = truncation_sweep(&params, &bath, &caps)?;
    let exact =
        exact_ground(&params, &bath, &TruncationSpec::new(n_modes).with_n_max(n_max))?;
    let report = solve(&params, &bath, &opts)?;
    let ansatz_energy = ground_energy(&report.state, &params);
    let gap = ansatz_energy - exact.energy;

    let out = OracleOutput {
        s,
        delta,
        epsilon,
        k,
        alpha,
        lambda,
        modes: n_modes,
        exact_energy: exact.energy,
        exact_sigma_z: exact.sigma_z,
        exact_sigma_x: exact.sigma_x,
        exact_residual: exact.residual,
        exact_dim: exact.dim,
        ansatz_energy,
        ansatz_sigma_z: sigma_z_avg(&report.state),
        ansatz_sigma_x: sigma_x_avg(&report.state, &params),
        energy_gap: gap,
        relative_gap: gap / exact.energy.abs(),
        bound_satisfied: ansatz_energy >= exact.energy - 1e-12,
        table,
    };

    match format {
        Format::Json => render_json(&out),
        Format::Csv => {
            let table = Table {
                comments: vec![
                    format!(
                        "s = {s}, delta = {delta}, epsilon = {epsilon}, k = {k}, alpha = {alpha}, lambda = {lambda}, modes = {n_modes}"
                    ),
                    format!(
                        "ansatz = {}, exact = {}, gap = {}, bound_satisfied = {}",
                        fmt_f64(out.ansatz_energy),
                        fmt_f64(out.exact_energy),
                        fmt_f64(out.energy_gap),
                        out.bound_satisfied
                    ),
                ],
                header: vec!["n_max", "dim", "energy"],
                rows: out
                    .table
                    .rows
                    .iter()
                    .map(|r| vec![r.n_max.to_string(), r.dim.to_string(), fmt_f64(r.energy)])
                    .collect(),
            };
            Ok(table.render_csv())
        }
    }
}

pub fn run_oracle(args: &OracleArgs, file: &FileConfig) -> Result<(), CliError> {
    let (out, format) = args.output.merged(file, Format::Json);
    let text = oracle_text(args, file, format)?;
    write_result(&out, &text)
}

// --------------------------------------------------------------- golden ----

/// The built-in regression suite: canonical invocations of each command
/// whose rendered output is committed under `golden/`.
fn golden_cases() -> Vec<(&'static str, Box<dyn Fn() -> Result<String, CliError>>)> {
    let file = FileConfig::default;
    vec![
        (
            "solve_decoupled.json",
            Box::new(move || {
                let args = SolveArgs {
                    model: ModelFlags {
                        s: Some(1.0),
                        delta: Some(0.1),
                        epsilon: Some(1e-5),
                        k: Some(0.0),
                        alpha: Some(0.0),
                    },
                    solver: SolverFlags::default(),
                    output: OutputFlags::default(),
                    chi: false,
                };
                solve_text(&args, &file(), Format::Json)
            }),
        ),
        (
            "phase_ohmic.csv",
            Box::new(move || {
                let args = PhaseArgs {
                    axis: AxisKind::Delta,
                    s: vec![1.0],
                    delta: None,
                    k: Some(0.0),
                    grid: GridFlags {
                        start: Some(0.01),
                        stop: Some(0.3),
                        count: Some(7),
                        spacing: Some(Spacing::Log),
                    },
                    solver: SolverFlags::default(),
                    output: OutputFlags::default(),
                };
                phase_text(&args, &file(), Format::Csv)
            }),
        ),
        (
            "entropy_subohmic.csv",
            Box::new(move || {
                let args = ScanArgs {
                    model: ModelFlags {
                        s: Some(0.5),
                        delta: Some(0.1),
                        epsilon: None,
                        k: Some(0.0),
                        alpha: None,
                    },
                    grid: GridFlags { count: Some(25), ..Default::default() },
                    solver: SolverFlags::default(),
                    output: OutputFlags::default(),
                };
                scan_text(&args, &file(), ScanKind::Entropy, Format::Csv)
            }),
        ),
        (
            "exponents_s025.json",
            Box::new(move || {
                let args = ExponentsArgs {
                    model: ModelFlags {
                        s: Some(0.25),
                        delta: Some(0.1),
                        epsilon: None,
                        k: Some(0.0),
                        alpha: None,
                    },
                    solver: SolverFlags::default(),
                    output: OutputFlags::default(),
                };
                exponents_text(&args, &file(), Format::Json)
            }),
        ),
        (
            "oracle_weak.json",
            Box::new(move || {
                let args = OracleArgs {
                    model: ModelFlags {
                        s: Some(1.0),
                        delta: Some(0.1),
                        epsilon: Some(1e-5),
                        k: Some(0.0),
                        alpha: Some(0.01),
                    },
                    modes: Some(4),
                    lambda: Some(2.0),
                    n_max: Some(5),
                    solver: SolverFlags::default(),
                    output: OutputFlags::default(),
                };
                oracle_text(&args, &file(), Format::Json)
            }),
        ),
    ]
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden")
}

/// `--golden`: re-render every built-in case and diff against the
/// committed files (or rewrite them with `--update-golden`).
pub fn run_golden(update: bool) -> Result<(), CliError> {
    let dir = golden_dir();
    let mut failures = Vec::new();
    for (name, render) in golden_cases() {
        let got = render()?;
        let path = dir.join(name);
        if update {
            std::fs::create_dir_all(&dir).map_err(|e| {
                CliError::validation(format!("cannot create {}: {e}", dir.display()))
            })?;
            std::fs::write(&path, &got).map_err(|e| {
                CliError::validation(format!("cannot write {}: {e}", path.display()))
            })?;
            println!("golden {name}: wrote {} bytes", got.len());
            continue;
        }
        let expected = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                failures.push(format!(
                    "{name}: cannot read {} ({e}); run `qpt --golden --update-golden` once",
                    path.display()
                ));
                continue;
            }
        };
        if got == expected {
            println!("golden {name}: OK");
        } else {
            let diff_line = expected
                .lines()
                .zip(got.lines())
                .position(|(a, b)| a != b)
                .map(|i| i + 1)
                .unwrap_or_else(|| expected.lines().count().min(got.lines().count()) + 1);
            failures.push(format!("{name}: first difference on line {diff_line}"));
            println!("golden {name}: MISMATCH (line {diff_line})");
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "golden outputs differ: {}",
            failures.join("; ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_scan_args() -> ScanArgs {
        ScanArgs {
            model: ModelFlags {
                s: Some(0.5),
                delta: Some(0.1),
                epsilon: None,
                k: Some(0.0),
                alpha: None,
            },
            grid: GridFlags { count: Some(5), ..Default::default() },
            solver: SolverFlags::default(),
            output: OutputFlags::default(),
        }
    }

    #[test]
    fn validity_tokens_cover_all_windows() {
        let ok = Validity { eps_prime_in_window: true, alpha_in_window: Some(true) };
        assert_eq!(validity_token(&ok), "valid");
        let unknown = Validity { eps_prime_in_window: true, alpha_in_window: None };
        assert_eq!(validity_token(&unknown), "valid");
        let eps = Validity { eps_prime_in_window: false, alpha_in_window: Some(true) };
        assert_eq!(validity_token(&eps), "eps_prime_out");
        let both = Validity { eps_prime_in_window: false, alpha_in_window: Some(false) };
        assert_eq!(validity_token(&both), "eps_prime_out+alpha_out");
    }

    #[test]
    fn alpha_scans_reject_a_point_alpha_flag() {
        let mut args = base_scan_args();
        args.model.alpha = Some(0.1);
        let err =
            scan_text(&args, &FileConfig::default(), ScanKind::Entropy, Format::Csv).unwrap_err();
        assert_eq!(err.exit_code, 1);
        assert!(err.message.contains("`--alpha`"), "{}", err.message);
    }

    #[test]
    fn auto_ranged_scan_ends_at_the_validity_window() {
        let args = base_scan_args();
        let text =
            scan_text(&args, &FileConfig::default(), ScanKind::Entropy, Format::Csv).unwrap();
        assert!(!text.contains("clamped"), "auto range is not a clamp:\n{text}");
        let last = text.lines().last().unwrap();
        let alpha: f64 = last.split(',').next().unwrap().parse().unwrap();
        // 1.1·α_c for s = 0.5, Δ = 0.1 sits near 0.0288.
        assert!((alpha - 0.0288).abs() < 3e-4, "last grid point {alpha}");
        assert!(last.contains("valid"), "endpoint inside the window: {last}");
    }

    #[test]
    fn explicit_overlong_scan_is_clamped_with_a_comment() {
        let mut args = base_scan_args();
        args.grid.stop = Some(0.2);
        let text =
            scan_text(&args, &FileConfig::default(), ScanKind::Corr, Format::Csv).unwrap();
        assert!(
            text.starts_with("# clamped: validity window\n"),
            "clamp note missing:\n{text}"
        );
    }
}
