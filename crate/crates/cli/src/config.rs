//! Flag / config-file / default resolution.
//!
//! Every value can come from three places, in strictly decreasing
//! precedence: an explicit command-line flag, the `--config` JSON file,
//! and the built-in default. Flags therefore always win, and a config
//! file can hold the boilerplate of a parameter study while individual
//! runs vary one knob.
//!
//! Validation failures are [`CliError`]s with exit code 1 and a message
//! that names the offending field.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use qpt_core::{Error as CoreError, ModelParams, SolverOpts};

/// Process outcome: 0 is success, 1 a validation/configuration problem,
/// 2 a numerical failure (iteration did not converge, collapsed gap, …).
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { exit_code: 1, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { exit_code: 2, message: message.into() }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let exit_code = match e {
            // Bad inputs: the request itself can never succeed.
            CoreError::NonPositiveDelta { .. }
            | CoreError::SuperOhmicUnsupported { .. }
            | CoreError::NonPositiveBathExponent { .. }
            | CoreError::NegativeAlpha { .. }
            | CoreError::BiasOutOfRange { .. }
            | CoreError::NonPositiveCutoff { .. }
            | CoreError::DiscreteBathHasNoDensity
            | CoreError::InvalidBathMode { .. }
            | CoreError::EmptyBath
            | CoreError::DimensionTooLarge { .. }
            | CoreError::InsufficientPoints { .. }
            | CoreError::NonPositiveData { .. }
            | CoreError::InvalidOpts { .. } => 1,
            // Numerical outcomes: a different tolerance/budget might pass.
            CoreError::QuadratureNotConverged { .. }
            | CoreError::NotConverged { .. }
            | CoreError::DegenerateGap { .. }
            | CoreError::NotInDelocalizedPhase { .. }
            | CoreError::SusceptibilityInconsistent { .. }
            | CoreError::NegativeEigenvalueBeyondTolerance { .. }
            | CoreError::NoSignChange { .. } => 2,
        };
        Self { exit_code, message: e.to_string() }
    }
}

/// Grid spacing for scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Values a `--config` JSON file may provide. Field names match the
/// long flag names; unknown keys are rejected so typos surface instead
/// of being silently ignored.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub s: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub alpha: Option<f64>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    pub spacing: Option<Spacing>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub modes: Option<usize>,
    pub lambda: Option<f64>,
    pub n_max: Option<usize>,
    pub max_iter: Option<usize>,
    pub fp_tol: Option<f64>,
    pub damping: Option<f64>,
    pub quad_rel_tol: Option<f64>,
    pub quad_abs_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("field `--config`: cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::validation(format!("field `--config`: {}: {e}", path.display()))
        })
    }
}

/// Model parameters as flags, all optional so the config file can fill
/// the gaps. Each subcommand decides which ones it requires.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct ModelFlags {
    /// Bath exponent s ∈ (0, 1] (1 = Ohmic).
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,

    /// Tunneling Δ in units of the cutoff ω_c.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,

    /// Bias ε in units of ω_c (must stay within [0, 1e-3]).
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,

    /// Direct Ising coupling K in units of ω_c (negative = ferromagnetic).
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,

    /// Dissipation strength α.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

/// Flag/file-merged model values; `None` where neither source spoke.
#[derive(Debug, Clone, Copy)]
pub struct ModelValues {
    pub s: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub alpha: Option<f64>,
}

impl ModelFlags {
    pub fn merged(&self, file: &FileConfig) -> ModelValues {
        ModelValues {
            s: self.s.or(file.s),
            delta: self.delta.or(file.delta),
            epsilon: self.epsilon.or(file.epsilon),
            k: self.k.or(file.k),
            alpha: self.alpha.or(file.alpha),
        }
    }
}

/// Error for a flag that neither the command line nor the config file set.
pub fn require(field: &str, value: Option<f64>) -> Result<f64, CliError> {
    value.ok_or_else(|| {
        CliError::validation(format!(
            "field `--{field}`: required (pass the flag or set \"{field}\" in the --config file)"
        ))
    })
}

/// Validated model parameters (exit code 1 on rejection, message from the
/// core validator names the quantity).
pub fn build_params(
    delta: f64,
    epsilon: f64,
    k_ising: f64,
    alpha: f64,
    s: f64,
) -> Result<ModelParams, CliError> {
    Ok(qpt_core::validate(&ModelParams::new(delta, epsilon, k_ising, alpha, s))?)
}

/// Solver and quadrature overrides.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct SolverFlags {
    /// Fixed-point iteration budget.
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Relative fixed-point tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub fp_tol: Option<f64>,

    /// Picard mixing factor ∈ (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub damping: Option<f64>,

    /// Relative tolerance of the bath-functional quadrature.
    #[arg(long, allow_negative_numbers = true)]
    pub quad_rel_tol: Option<f64>,

    /// Absolute tolerance floor of the bath-functional quadrature.
    #[arg(long, allow_negative_numbers = true)]
    pub quad_abs_tol: Option<f64>,
}

impl SolverFlags {
    pub fn merged(&self, file: &FileConfig) -> Result<SolverOpts, CliError> {
        let mut opts = SolverOpts::default();
        if let Some(n) = self.max_iter.or(file.max_iter) {
            if n == 0 {
                return Err(CliError::validation("field `--max-iter`: must be at least 1"));
            }
            opts.max_iter = n;
        }
        if let Some(t) = self.fp_tol.or(file.fp_tol) {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::validation(format!(
                    "field `--fp-tol`: must be positive and finite, got {t}"
                )));
            }
            opts.fp_tol = t;
        }
        if let Some(d) = self.damping.or(file.damping) {
            if !(d > 0.0 && d <= 1.0) {
                return Err(CliError::validation(format!(
                    "field `--damping`: must lie in (0, 1], got {d}"
                )));
            }
            opts.damping = d;
        }
        if let Some(t) = self.quad_rel_tol.or(file.quad_rel_tol) {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::validation(format!(
                    "field `--quad-rel-tol`: must be positive and finite, got {t}"
                )));
            }
            opts.quad.rel_tol = t;
        }
        if let Some(t) = self.quad_abs_tol.or(file.quad_abs_tol) {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::validation(format!(
                    "field `--quad-abs-tol`: must be positive and finite, got {t}"
                )));
            }
            opts.quad.abs_tol = t;
        }
        Ok(opts)
    }
}

/// Where and how to write results.
#[derive(Debug, Clone, Default, Args)]
pub struct OutputFlags {
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// csv or json; each subcommand has a natural default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputFlags {
    pub fn merged(&self, file: &FileConfig, default_format: Format) -> (Option<PathBuf>, Format) {
        let out = self.out.clone().or_else(|| file.out.clone());
        let format = self.format.or(file.format).unwrap_or(default_format);
        (out, format)
    }
}

/// Scan-grid flags.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct GridFlags {
    /// First grid value.
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,

    /// Last grid value (α grids are clamped to the validity window).
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,

    /// Number of grid points (≥ 2).
    #[arg(long)]
    pub count: Option<usize>,

    /// linear or log point placement.
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
}

/// A fully resolved scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridFlags {
    /// Merge with the config file and per-command defaults, then validate.
    /// `stop` may legitimately stay unresolved (α scans derive it from the
    /// validity window), hence the separate default.
    pub fn merged(
        &self,
        file: &FileConfig,
        defaults: GridSpec,
        auto_stop: Option<f64>,
    ) -> Result<GridSpec, CliError> {
        let spec = GridSpec {
            start: self.start.or(file.start).unwrap_or(defaults.start),
            stop: self.stop.or(file.stop).or(auto_stop).unwrap_or(defaults.stop),
            count: self.count.or(file.count).unwrap_or(defaults.count),
            spacing: self.spacing.or(file.spacing).unwrap_or(defaults.spacing),
        };
        spec.validated()
    }
}

impl GridSpec {
    fn validated(self) -> Result<Self, CliError> {
        if self.count < 2 {
            return Err(CliError::validation(format!(
                "field `--count`: scans need at least 2 grid points, got {}",
                self.count
            )));
        }
        if !self.start.is_finite() {
            return Err(CliError::validation(format!(
                "field `--start`: must be finite, got {}",
                self.start
            )));
        }
        if !self.stop.is_finite() {
            return Err(CliError::validation(format!(
                "field `--stop`: must be finite, got {}",
                self.stop
            )));
        }
        if self.stop <= self.start {
            return Err(CliError::validation(format!(
                "field `--stop`: must exceed `--start` ({} vs {})",
                self.stop, self.start
            )));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(CliError::validation(format!(
                "field `--start`: log spacing needs a positive start, got {}",
                self.start
            )));
        }
        Ok(self)
    }

    /// Clamp the grid to `limit`, reporting whether anything changed. The
    /// point count is kept so resolution does not silently degrade.
    pub fn clamped_to(self, limit: f64) -> (Self, bool) {
        if self.stop <= limit {
            return (self, false);
        }
        (Self { stop: limit, ..self }, true)
    }

    /// Materialize the grid points, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        let step = |i: usize| i as f64 / (n - 1) as f64;
        (0..n)
            .map(|i| match self.spacing {
                Spacing::Linear => self.start + (self.stop - self.start) * step(i),
                Spacing::Log => {
                    (self.start.ln() + (self.stop.ln() - self.start.ln()) * step(i)).exp()
                }
            })
            .collect()
    }
}
