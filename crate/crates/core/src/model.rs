//! Domain types and unit conventions.
//!
//! Two qubits with tunneling Δ and bias ε, Ising-coupled with strength K,
//! both coupled to a common bosonic bath:
//!
//! ```text
//! H = Σ_{i=1,2} [ −Δ/2 σˣᵢ − ε/2 σᶻᵢ + Σ_k g_k/2 (b†_k + b_k) σᶻᵢ ]
//!     + K σᶻ₁σᶻ₂ + Σ_k ω_k b†_k b_k
//! ```
//!
//! The bath is characterized either by a continuum spectral density with a
//! hard cutoff, J(ω) = 2α ω^s ω_c^{1−s} θ(ω_c−ω), or by an explicit list of
//! discrete modes (used by the exact-diagonalization oracle).
//!
//! ω_c = 1 is the global energy unit: [`validate`] rescales Δ, ε and K by
//! ω_c and fixes ω_c = 1. All numerical routines nevertheless keep ω_c
//! explicit, so results are covariant under a common rescaling of
//! (Δ, ε, K, ω_c) — a property the test suite exercises.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard upper bound on the bias, in units of ω_c.
///
/// The ansatz drops a |G⟩⟨D| transition term which is controlled only for
/// small renormalized bias; ε beyond this window is rejected outright.
pub const EPSILON_MAX: f64 = 1e-3;

/// Bias above which a warning is logged: observable scans are meant to
/// run at ε/ω_c ≤ 1e-5, larger probe biases leave the strict
/// linear-response window (they remain useful for exponent fits).
pub const EPSILON_WARN: f64 = 1e-5;

/// The six Hamiltonian parameters. Energies are in units of ω_c once
/// [`validate`]d (ω_c = 1 afterwards).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tunneling amplitude Δ > 0.
    pub delta: f64,
    /// Bias ε ∈ [0, 1e-3]·ω_c. Negative bias is equivalent by σᶻ → −σᶻ and
    /// is not accepted.
    pub epsilon: f64,
    /// Direct Ising coupling K (signed; K < 0 ferromagnetic, K > 0
    /// antiferromagnetic).
    #[serde(default)]
    pub k_ising: f64,
    /// Dimensionless bath coupling strength α ≥ 0.
    pub alpha: f64,
    /// Bath exponent s ∈ (0, 1]: s = 1 Ohmic, s < 1 sub-Ohmic.
    pub s: f64,
    /// Hard cutoff ω_c; the energy unit. Defaults to 1 when deserialized.
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
}

fn default_omega_c() -> f64 {
    1.0
}

impl ModelParams {
    /// Shorthand used pervasively in tests and scan drivers.
    pub fn new(delta: f64, epsilon: f64, k_ising: f64, alpha: f64, s: f64) -> Self {
        Self { delta, epsilon, k_ising, alpha, s, omega_c: 1.0 }
    }

    /// See [`validate`].
    pub fn validated(&self) -> Result<ModelParams> {
        validate(self)
    }
}

/// Check all parameter constraints and normalize to ω_c = 1 by expressing
/// Δ, ε and K in units of ω_c.
///
/// Idempotent: validating an already-validated set is the identity.
/// Logs a warning (via the `log` crate) when ε exceeds the strict
/// linear-response window `EPSILON_WARN` while still below the hard cap.
pub fn validate(params: &ModelParams) -> Result<ModelParams> {
    let p = *params;
    if !(p.omega_c > 0.0) || !p.omega_c.is_finite() {
        return Err(Error::NonPositiveCutoff { omega_c: p.omega_c });
    }
    if !(p.delta > 0.0) || !p.delta.is_finite() {
        return Err(Error::NonPositiveDelta { delta: p.delta });
    }
    if p.s > 1.0 {
        return Err(Error::SuperOhmicUnsupported { s: p.s });
    }
    if !(p.s > 0.0) {
        return Err(Error::NonPositiveBathExponent { s: p.s });
    }
    if !(p.alpha >= 0.0) || !p.alpha.is_finite() {
        return Err(Error::NegativeAlpha { alpha: p.alpha });
    }
    let eps_rel = p.epsilon / p.omega_c;
    if !(eps_rel >= 0.0) || eps_rel > EPSILON_MAX {
        return Err(Error::BiasOutOfRange { epsilon: p.epsilon });
    }
    if eps_rel > EPSILON_WARN {
        log::warn!(
            "bias epsilon/omega_c = {eps_rel:.3e} exceeds the strict linear-response window {EPSILON_WARN:.0e}"
        );
    }
    Ok(ModelParams {
        delta: p.delta / p.omega_c,
        epsilon: p.epsilon / p.omega_c,
        k_ising: p.k_ising / p.omega_c,
        alpha: p.alpha,
        s: p.s,
        omega_c: 1.0,
    })
}

/// One discrete bath mode: coupling amplitude g and frequency ω > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub g: f64,
    pub omega: f64,
}

/// The bath: either a continuum spectral density or an explicit mode list.
///
/// Discrete baths are first-class so that the exact-diagonalization oracle
/// and the variational ansatz consume identical Hamiltonian data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BathSpec {
    /// J(ω) = 2α ω^s ω_c^{1−s} for 0 ≤ ω ≤ ω_c, zero above (hard cutoff).
    Continuum { alpha: f64, s: f64, omega_c: f64 },
    /// Explicit modes {g_k, ω_k}; all bath sums run over this list.
    Discrete { modes: Vec<BathMode> },
}

impl BathSpec {
    /// The continuum bath described by a parameter set.
    pub fn from_params(params: &ModelParams) -> Self {
        BathSpec::Continuum { alpha: params.alpha, s: params.s, omega_c: params.omega_c }
    }

    /// Check the variant-specific constraints.
    pub fn validate(&self) -> Result<()> {
        match self {
            BathSpec::Continuum { alpha, s, omega_c } => {
                if !(*alpha >= 0.0) || !alpha.is_finite() {
                    return Err(Error::NegativeAlpha { alpha: *alpha });
                }
                if *s > 1.0 {
                    return Err(Error::SuperOhmicUnsupported { s: *s });
                }
                if !(*s > 0.0) {
                    return Err(Error::NonPositiveBathExponent { s: *s });
                }
                if !(*omega_c > 0.0) || !omega_c.is_finite() {
                    return Err(Error::NonPositiveCutoff { omega_c: *omega_c });
                }
                Ok(())
            }
            BathSpec::Discrete { modes } => {
                if modes.is_empty() {
                    return Err(Error::EmptyBath);
                }
                for (index, m) in modes.iter().enumerate() {
                    if !(m.omega > 0.0) || !m.omega.is_finite() || !m.g.is_finite() {
                        return Err(Error::InvalidBathMode { index, g: m.g, omega: m.omega });
                    }
                }
                Ok(())
            }
        }
    }

    /// Spectral density J(ω).
    ///
    /// Continuum: 2α ω^s ω_c^{1−s} below the cutoff, zero above (and zero
    /// for ω < 0, where J is not defined). Discrete baths carry no density
    /// function and report [`Error::DiscreteBathHasNoDensity`].
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        match self {
            BathSpec::Continuum { alpha, s, omega_c } => {
                if omega <= 0.0 || omega > *omega_c {
                    Ok(0.0)
                } else {
                    Ok(2.0 * alpha * omega.powf(*s) * omega_c.powf(1.0 - s))
                }
            }
            BathSpec::Discrete { .. } => Err(Error::DiscreteBathHasNoDensity),
        }
    }
}

/// Free-function form of [`BathSpec::spectral_density`].
pub fn spectral_density(bath: &BathSpec, omega: f64) -> Result<f64> {
    bath.spectral_density(omega)
}

/// The converged self-consistent variables of the variational ansatz.
///
/// * `eta`   — dressed-tunneling factor η = exp{−Σ_k g_k²ξ_k²/(2ω_k²)} ∈ (0, 1];
/// * `v_ind` — bath-induced ferromagnetic Ising coupling V ≥ 0;
/// * `f_stat`— static-shift energy F = Σ_k g_k²(1−ξ_k)²/ω_k ≥ 0;
/// * `w`     — two-qubit level splitting W = √(η²Δ² + (V−K)²);
/// * `u`,`v` — eigenbasis coefficients, u² + v² = 1;
/// * `sigma_cap` — effective gap Σ = √((W−V+K)² + 4ε′²u²);
/// * `theta` — mixing angle of the bias sector, θ ∈ [0, π/4] at convergence;
/// * `sigma0`— static displacement number, σ₀ = 4u²ε′/Σ; ⟨σᶻ⟩ = σ₀/2;
/// * `eps_prime` — renormalized bias ε′ = ε + F·σ₀.
///
/// The mode function ξ_k = ω_k/(ω_k + Σ) is derived from `sigma_cap` on
/// demand ([`AnsatzState::xi`]) and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzState {
    pub eta: f64,
    pub v_ind: f64,
    pub f_stat: f64,
    pub w: f64,
    pub u: f64,
    pub v: f64,
    pub sigma_cap: f64,
    pub theta: f64,
    pub sigma0: f64,
    pub eps_prime: f64,
}

impl AnsatzState {
    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    pub fn sin_theta(&self) -> f64 {
        self.theta.sin()
    }

    /// Variational mode function ξ(ω) = ω/(ω + Σ).
    pub fn xi(&self, omega: f64) -> f64 {
        omega / (omega + self.sigma_cap)
    }

    /// Residuals of the five defining identities, for assertions:
    ///
    /// 0. u² + v² − 1                                  (absolute)
    /// 1. W² − [η²Δ² + (V−K)²]                         (relative to W²)
    /// 2. Σ² − [(W−V+K)² + 4ε′²u²]                     (relative to Σ²)
    /// 3. cos²θ + sin²θ − 1                            (absolute)
    /// 4. σ₀ − 4u²ε′/Σ                                 (relative to max(|σ₀|, 1e-30))
    pub fn identity_residuals(&self, params: &ModelParams) -> [f64; 5] {
        let (ct, st) = (self.cos_theta(), self.sin_theta());
        let w2 = self.eta * self.eta * params.delta * params.delta
            + (self.v_ind - params.k_ising) * (self.v_ind - params.k_ising);
        let q = self.w - self.v_ind + params.k_ising;
        let s2 = q * q + 4.0 * self.eps_prime * self.eps_prime * self.u * self.u;
        [
            self.u * self.u + self.v * self.v - 1.0,
            (self.w * self.w - w2) / w2,
            (self.sigma_cap * self.sigma_cap - s2) / s2,
            ct * ct + st * st - 1.0,
            (self.sigma0 - 4.0 * self.u * self.u * self.eps_prime / self.sigma_cap)
                / self.sigma0.abs().max(1e-30),
        ]
    }
}
