//! The three bath functionals η(Σ), V(Σ), F(Σ).
//!
//! With the variational mode function ξ(ω) = ω/(ω + Σ), the transformed
//! Hamiltonian is governed by three bath moments:
//!
//! ```text
//! η = exp{ −Σ_k g_k² ξ_k²/(2ω_k²) }     dressed tunneling ∈ (0, 1]
//! V = Σ_k g_k² ξ_k(2−ξ_k)/(2ω_k)        induced ferromagnetic coupling
//! F = Σ_k g_k² (1−ξ_k)²/ω_k             static-shift energy
//! ```
//!
//! For a continuum bath J(ω) = 2α ω^s ω_c^{1−s} θ(ω_c−ω) the sums become
//! integrals with a ω^{s−1} endpoint weight:
//!
//! ```text
//! η = exp{ −α ω_c^{1−s} ∫₀^{ω_c} ω^{s−1} · ω/(ω+Σ)²        dω }
//! V =       α ω_c^{1−s} ∫₀^{ω_c} ω^{s−1} · ω(ω+2Σ)/(ω+Σ)²  dω
//! F =     2 α ω_c^{1−s} ∫₀^{ω_c} ω^{s−1} · Σ²/(ω+Σ)²       dω
//! ```
//!
//! The integrals are split at ω = Σ, and on [0, min(Σ, ω_c)] the
//! substitution ω = t^{1/s} absorbs the ω^{s−1} weight exactly:
//! ∫₀^a ω^{s−1} φ(ω) dω = (1/s)∫₀^{a^s} φ(t^{1/s}) dt. Accurate small-Σ
//! behavior matters: F(Σ → 0) ∝ Σ^s controls the phase transition
//! criterion, and the self-consistent Σ reaches ~10⁻⁷ω_c for small Δ.
//!
//! [`SigmaFunctionals`] computes all three in one pass per Σ and memoizes
//! them on the exact bits of Σ — the fixed-point solver re-queries the same
//! Σ when evaluating observables and branch diagnostics.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BathMode, BathSpec};
use crate::quad::{integrate, QuadratureOpts};

/// Values of the three functionals at one Σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub eta: f64,
    pub v_ind: f64,
    pub f_stat: f64,
}

/// ∫₀^{ω_c} ω^{s−1} φ(ω) dω with the endpoint weight handled by
/// substitution below ω = Σ and directly above.
fn weighted_integral<F: Fn(f64) -> f64>(
    phi: F,
    s: f64,
    omega_c: f64,
    sigma: f64,
    opts: &QuadratureOpts,
) -> Result<f64> {
    let split = sigma.min(omega_c);
    // ω = t^{1/s} on [0, split]: the weight becomes the constant 1/s.
    let inv_s = 1.0 / s;
    let lower = integrate(|t| inv_s * phi(t.powf(inv_s)), 0.0, split.powf(s), opts);
    if !lower.converged {
        return Err(Error::QuadratureNotConverged {
            error: lower.error,
            subdivisions: lower.subdivisions,
        });
    }
    let mut total = lower.value;
    if split < omega_c {
        let upper = integrate(|w| w.powf(s - 1.0) * phi(w), split, omega_c, opts);
        if !upper.converged {
            return Err(Error::QuadratureNotConverged {
                error: upper.error,
                subdivisions: upper.subdivisions,
            });
        }
        total += upper.value;
    }
    Ok(total)
}

/// All three functionals at one Σ, computed directly (no cache).
pub fn functionals_at(bath: &BathSpec, sigma: f64, opts: &QuadratureOpts) -> Result<Functionals> {
    debug_assert!(sigma > 0.0, "functionals require sigma > 0");
    match bath {
        BathSpec::Continuum { alpha, s, omega_c } => {
            let (alpha, s, omega_c) = (*alpha, *s, *omega_c);
            // α-independent kernels; the coupling scales them afterwards.
            let a_eta = weighted_integral(|w| w / ((w + sigma) * (w + sigma)), s, omega_c, sigma, opts)?;
            let a_v = weighted_integral(
                |w| w * (w + 2.0 * sigma) / ((w + sigma) * (w + sigma)),
                s,
                omega_c,
                sigma,
                opts,
            )?;
            let a_f = weighted_integral(
                |w| sigma * sigma / ((w + sigma) * (w + sigma)),
                s,
                omega_c,
                sigma,
                opts,
            )?;
            let scale = alpha * omega_c.powf(1.0 - s);
            Ok(Functionals {
                eta: (-scale * a_eta).exp(),
                v_ind: scale * a_v,
                f_stat: 2.0 * scale * a_f,
            })
        }
        BathSpec::Discrete { modes } => {
            let mut exponent = 0.0;
            let mut v_ind = 0.0;
            let mut f_stat = 0.0;
            for m in modes {
                let g2 = m.g * m.g;
                let xi = m.omega / (m.omega + sigma);
                exponent += g2 * xi * xi / (2.0 * m.omega * m.omega);
                v_ind += g2 * xi * (2.0 - xi) / (2.0 * m.omega);
                f_stat += g2 * (1.0 - xi) * (1.0 - xi) / m.omega;
            }
            Ok(Functionals { eta: (-exponent).exp(), v_ind, f_stat })
        }
    }
}

/// Dressed-tunneling factor η(Σ) ∈ (0, 1].
pub fn eta_of_sigma(bath: &BathSpec, sigma: f64, opts: &QuadratureOpts) -> Result<f64> {
    Ok(functionals_at(bath, sigma, opts)?.eta)
}

/// Induced Ising coupling V(Σ) ≥ 0.
pub fn v_of_sigma(bath: &BathSpec, sigma: f64, opts: &QuadratureOpts) -> Result<f64> {
    Ok(functionals_at(bath, sigma, opts)?.v_ind)
}

/// Static-shift energy F(Σ) ≥ 0.
pub fn f_of_sigma(bath: &BathSpec, sigma: f64, opts: &QuadratureOpts) -> Result<f64> {
    Ok(functionals_at(bath, sigma, opts)?.f_stat)
}

/// Small-Σ asymptotic form of F:
///
/// ```text
/// F ≈ 2πα ω_c · (1−s)/sin[π(1−s)] · (Σ/ω_c)^s
/// ```
///
/// The prefactor has the finite limit 1/π at s → 1, giving F → 2αΣ for the
/// Ohmic bath; a series in π(1−s) is used near that point to avoid 0/0.
pub fn f_asymptotic(alpha: f64, s: f64, sigma: f64, omega_c: f64) -> f64 {
    let x = std::f64::consts::PI * (1.0 - s);
    // (1−s)/sin[π(1−s)] = (1/π) · x/sin(x)
    let x_over_sin = if x.abs() < 1e-6 {
        1.0 + x * x / 6.0 + 7.0 * x.powi(4) / 360.0
    } else {
        x / x.sin()
    };
    let prefactor = x_over_sin / std::f64::consts::PI;
    2.0 * std::f64::consts::PI * alpha * omega_c * prefactor * (sigma / omega_c).powf(s)
}

/// Memoizing evaluator of all three functionals for one bath.
///
/// Thread-safe: the cache is behind a mutex, but integration happens
/// outside the lock so concurrent misses on distinct Σ never serialize
/// against each other (a racing duplicate computation writes the same
/// value).
pub struct SigmaFunctionals {
    bath: BathSpec,
    opts: QuadratureOpts,
    cache: Mutex<HashMap<u64, Functionals>>,
}

impl SigmaFunctionals {
    /// Validates the bath up front so evaluation can't fail on shape.
    pub fn new(bath: BathSpec, opts: QuadratureOpts) -> Result<Self> {
        bath.validate()?;
        Ok(Self { bath, opts, cache: Mutex::new(HashMap::new()) })
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn opts(&self) -> &QuadratureOpts {
        &self.opts
    }

    /// η, V, F at Σ, memoized on the exact bits of Σ.
    pub fn at(&self, sigma: f64) -> Result<Functionals> {
        let key = sigma.to_bits();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        let value = functionals_at(&self.bath, sigma, &self.opts)?;
        self.cache.lock().unwrap().insert(key, value);
        Ok(value)
    }
}

/// Logarithmic discretization of a continuum bath into `n_modes` modes.
///
/// Bin n spans [ω_c Λ^{−(n+1)}, ω_c Λ^{−n}]. Each mode carries the full
/// spectral weight of its bin, g_k² = ∫_bin J(ω) dω, and sits at the
/// J-weighted centroid ω_k = ∫_bin ωJ dω / ∫_bin J dω, so low-order bath
/// moments converge to their continuum values as the bin count grows.
pub fn discretize_log(
    alpha: f64,
    s: f64,
    omega_c: f64,
    n_modes: usize,
    lambda: f64,
) -> Result<Vec<BathMode>> {
    BathSpec::Continuum { alpha, s, omega_c }.validate()?;
    if n_modes == 0 {
        return Err(Error::EmptyBath);
    }
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidOpts { reason: "discretization base lambda must exceed 1" });
    }
    let prefactor = 2.0 * alpha * omega_c.powf(1.0 - s);
    let mut modes = Vec::with_capacity(n_modes);
    for n in 0..n_modes {
        let hi = omega_c * lambda.powi(-(n as i32));
        let lo = omega_c * lambda.powi(-(n as i32 + 1));
        // ∫ J = prefactor (hi^{s+1} − lo^{s+1})/(s+1); centroid analogous.
        let m1 = (hi.powf(s + 1.0) - lo.powf(s + 1.0)) / (s + 1.0);
        let m2 = (hi.powf(s + 2.0) - lo.powf(s + 2.0)) / (s + 2.0);
        modes.push(BathMode { g: (prefactor * m1).sqrt(), omega: m2 / m1 });
    }
    Ok(modes)
}
