//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]; the variants
//! are grouped by the layer that raises them (parameter validation,
//! quadrature, self-consistency, fitting, exact diagonalization).

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    // ---- parameter / bath validation -------------------------------------
    /// Δ ≤ 0: the model assumes finite tunneling throughout.
    #[error("tunneling must be positive, got delta = {delta}")]
    NonPositiveDelta { delta: f64 },

    /// s > 1: the super-Ohmic bath never localizes and is out of scope.
    #[error("super-Ohmic bath exponent s = {s} > 1 is unsupported (system is always delocalized)")]
    SuperOhmicUnsupported { s: f64 },

    /// s ≤ 0: the spectral density would not be normalizable at ω → 0.
    #[error("bath exponent must be positive, got s = {s}")]
    NonPositiveBathExponent { s: f64 },

    #[error("coupling strength must be non-negative, got alpha = {alpha}")]
    NegativeAlpha { alpha: f64 },

    /// ε outside [0, 1e-3]·ω_c; larger biases leave the linear-response
    /// regime the ansatz is derived for.
    #[error("bias epsilon = {epsilon} outside the supported window [0, 1e-3]·omega_c")]
    BiasOutOfRange { epsilon: f64 },

    #[error("cutoff must be positive, got omega_c = {omega_c}")]
    NonPositiveCutoff { omega_c: f64 },

    /// A discrete bath is a list of modes; it has no spectral density
    /// function, only mode sums.
    #[error("a discrete bath has no spectral density; use mode sums instead")]
    DiscreteBathHasNoDensity,

    /// Discrete mode list empty, or a mode with ω ≤ 0 / non-finite g.
    #[error("invalid discrete bath mode {index}: g = {g}, omega = {omega}")]
    InvalidBathMode { index: usize, g: f64, omega: f64 },

    #[error("empty discrete mode list")]
    EmptyBath,

    // ---- quadrature -------------------------------------------------------
    /// The adaptive integrator exhausted its subdivision budget before
    /// reaching the requested tolerance.
    #[error(
        "quadrature did not converge: error estimate {error:.3e} after {subdivisions} subdivisions"
    )]
    QuadratureNotConverged { error: f64, subdivisions: u32 },

    // ---- self-consistency -------------------------------------------------
    /// Fixed-point iteration ran out of iterations.
    #[error("self-consistency not converged after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// Σ collapsed below representable scale; the dressed two-level system
    /// is degenerate and the ansatz equations are singular.
    #[error("degenerate gap: sigma = {sigma:.3e} below 1e-300")]
    DegenerateGap { sigma: f64 },

    // ---- observables ------------------------------------------------------
    /// Susceptibility requested on the localized side of the transition.
    #[error("susceptibility is defined for the delocalized phase only (criterion = {criterion:.3e})")]
    NotInDelocalizedPhase { criterion: f64 },

    /// The two finite-bias estimates of χ disagree beyond 0.1%: the probe
    /// biases are outside the linear-response window for these parameters.
    #[error(
        "susceptibility extrapolation inconsistent: chi(1e-8) = {chi_fine:.6e} vs chi(1e-7) = {chi_coarse:.6e}"
    )]
    SusceptibilityInconsistent { chi_fine: f64, chi_coarse: f64 },

    /// A reduced-density-matrix eigenvalue fell below −1e-10.
    #[error("density-matrix eigenvalue {lambda:.3e} below tolerance -1e-10")]
    NegativeEigenvalueBeyondTolerance { lambda: f64 },

    // ---- phase boundary / fits ---------------------------------------------
    /// Bisection bracket endpoints have the same criterion sign.
    #[error(
        "criterion does not change sign on [{lo}, {hi}] (values {f_lo:.3e}, {f_hi:.3e})"
    )]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("power-law fit needs at least {needed} points inside the window, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    /// Log-log fits require strictly positive abscissas and ordinates.
    #[error("power-law fit received a non-positive value ({what} = {value:.3e})")]
    NonPositiveData { what: &'static str, value: f64 },

    // ---- exact diagonalization ---------------------------------------------
    #[error("truncated Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    /// Option combination outside what a routine supports.
    #[error("invalid options: {reason}")]
    InvalidOpts { reason: &'static str },
}
