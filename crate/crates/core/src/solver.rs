//! Self-consistent solution of the variational equations.
//!
//! Everything is driven by a single scalar: given Σ, the bath functionals
//! (η, V, F) follow from the `spectral` module, the two-qubit eigenbasis
//! (W, u, v) from [`uvw`], and the bias sector closes through
//!
//! ```text
//! σ₀ = 4u²ε′/Σ,   ε′ = ε + F·σ₀,   Σ = √(Q² + 4ε′²u²),   Q = W − V + K.
//! ```
//!
//! The solver therefore iterates a one-dimensional map M(Σ):
//!
//! 1. evaluate η, V, F at the current Σ (memoized quadrature / mode sums);
//! 2. W, u, v and the gap Q = W − V + K (computed in a cancellation-free
//!    form: Q = η²Δ²/(W + V − K) when V − K > 0, so Q > 0 always holds —
//!    W ≥ |V − K| with equality only at ηΔ = 0);
//! 3. close the inner pair (σ₀, ε′) *exactly* at frozen functionals: the
//!    scalar equation ε′ = ε + 4u²F ε′/√(Q² + 4u²ε′²) has a concave
//!    right-hand side, hence a unique root ≥ ε, found by safeguarded
//!    Newton (closed forms at ε = 0: ε′ = 0 below the transition,
//!    ε′ = √(c² − Q²)/2u with c = 4u²F above it);
//! 4. Σ_new = √(Q² + 4u²ε′²).
//!
//! Always closing the inner pair exactly (rather than using the one-step
//! update σ₀ = (4u²ε/Σ)/(1 − 4u²F/Σ), whose denominator vanishes at the
//! transition) keeps M smooth through the critical point; both forms have
//! identical fixed points. The outer loop is damped Picard (mixing 0.5,
//! halved after three sign-alternating residuals) accelerated by secant
//! steps, and switches to safeguarded false position once a sign change of
//! r(Σ) = M(Σ) − Σ brackets the fixed point — plain Picard contracts like
//! 1 − O(τ) at distance τ from the critical coupling and would need ~1/τ
//! iterations there.
//!
//! For sub-Ohmic baths the map also has a collapsed attractor at Σ → 0
//! (η → 0 faster than any power). When the iteration drains below
//! 10⁻¹⁴ ω_c and is still being pulled down, no physical fixed point
//! exists above that floor and the solve reports [`Error::DegenerateGap`];
//! the phase module interprets this as a deeply localized point.
//!
//! Bistability was a concern a priori; within the supported window
//! (α ≤ 1.1·α_c) the inner closure is unique and warm starts from either
//! side land on the same fixed point — the property suite checks this.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnsatzState, BathSpec, ModelParams};
use crate::quad::QuadratureOpts;
use crate::spectral::{Functionals, SigmaFunctionals};

/// Iteration drains below this (×ω_c) while still contracting ⇒ collapsed.
pub(crate) const SIGMA_FLOOR_REL: f64 = 1e-14;

/// Where the fixed-point iteration starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialGuess {
    /// Start from the α = 0 state (η = 1, V = F = 0).
    Decoupled,
    /// Start from a previously converged state (scan continuation).
    WarmStart(AnsatzState),
}

/// Options for [`solve`] / [`solve_pinned`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOpts {
    pub max_iter: usize,
    /// Relative fixed-point tolerance on every state component.
    pub fp_tol: f64,
    /// Picard mixing factor ∈ (0, 1].
    pub damping: f64,
    pub init: InitialGuess,
    /// Tolerances for the bath-functional quadrature.
    pub quad: QuadratureOpts,
}

impl Default for SolverOpts {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            fp_tol: 1e-11,
            damping: 0.5,
            init: InitialGuess::Decoupled,
            quad: QuadratureOpts::default(),
        }
    }
}

/// Phase classification of a converged solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Delocalized,
    Localized,
}

/// Validity of the ansatz at the converged point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// ε′/ω_c ≤ 0.05 — the window in which the dropped |G⟩⟨D| transition
    /// term is negligible.
    pub eps_prime_in_window: bool,
    /// α ≤ 1.1·α_c; `None` until a caller that knows α_c fills it in.
    pub alpha_in_window: Option<bool>,
}

/// A converged self-consistent solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub state: AnsatzState,
    /// Number of outer map evaluations.
    pub iterations: usize,
    /// Final max relative change (state components and map residual).
    pub residual: f64,
    pub branch: Branch,
    pub validity: Validity,
}

/// Two-qubit level splitting and eigenbasis coefficients:
///
/// ```text
/// W = √(η²Δ² + (V−K)²),  u = √((1 + (V−K)/W)/2),  v = √((1 − (V−K)/W)/2).
/// ```
///
/// The smaller of u, v is evaluated through η²Δ²/(2W(W + |V−K|)) to avoid
/// the cancellation in 1 − |V−K|/W when the Ising scale dominates.
pub fn uvw(eta: f64, v_ind: f64, k_ising: f64, delta: f64) -> (f64, f64, f64) {
    let d = v_ind - k_ising;
    let ed = eta * delta;
    let w = ed.hypot(d);
    let minor2 = ed * ed / (2.0 * w * (w + d.abs()));
    let major2 = 0.5 * (1.0 + d.abs() / w);
    let (u2, v2) = if d >= 0.0 { (major2, minor2) } else { (minor2, major2) };
    (w, u2.sqrt(), v2.sqrt())
}

/// Gap Q = W − (V − K) without cancellation: for V − K > 0 this is
/// η²Δ²/(W + V − K) exactly.
fn stable_gap(eta_delta: f64, w: f64, d: f64) -> f64 {
    if d > 0.0 {
        eta_delta * eta_delta / (w + d)
    } else {
        w - d
    }
}

/// Gap Σ and mixing angle of the bias sector:
///
/// ```text
/// Σ = √(Q² + 4ε′²u²),  cos²θ = (1 + Q/Σ)/2,  sin²θ = (1 − Q/Σ)/2,
/// ```
///
/// with Q = W − V + K of either sign (θ ∈ [0, π/4] for Q > 0, reaching
/// θ = π/2 as Q/Σ → −1). The subtractions are organized so the small
/// squared coefficient is computed as 4ε′²u²/(2Σ(Σ + |Q|)).
pub fn theta_sigma(w: f64, v_ind: f64, k_ising: f64, eps_prime: f64, u: f64) -> Result<(f64, f64, f64)> {
    let q = w - v_ind + k_ising;
    let m = 2.0 * eps_prime * u;
    let sigma = q.hypot(m);
    if sigma < 1e-300 {
        return Err(Error::DegenerateGap { sigma });
    }
    let minor2 = m * m / (2.0 * sigma * (sigma + q.abs()));
    let major2 = 0.5 * (1.0 + q.abs() / sigma);
    let (cos2, sin2) = if q >= 0.0 { (major2, minor2) } else { (minor2, major2) };
    Ok((sigma, cos2.sqrt(), sin2.sqrt()))
}

/// Exact solution of the inner pair at frozen functionals:
/// the unique root ε′ ≥ ε of ε′ = ε + c·ε′/√(Q² + b·ε′²), with b = 4u²,
/// c = bF. Returns (ε′, σ₀ = b ε′ / Σ(ε′)).
fn inner_solve(eps: f64, q: f64, b: f64, f_stat: f64) -> (f64, f64) {
    let c = b * f_stat;
    if c == 0.0 {
        let sigma = q.hypot(b.sqrt() * eps);
        let sigma0 = if eps == 0.0 { 0.0 } else { b * eps / sigma };
        return (eps, sigma0);
    }
    if eps == 0.0 {
        if c <= q {
            return (0.0, 0.0);
        }
        // Supercritical closed form: √(Q² + bε′²) = c.
        let x = ((c - q) * (c + q) / b).sqrt();
        return (x, b * x / c);
    }
    // g(x) = x − ε − c·x/√(Q²+bx²) is convex with g(ε) ≤ 0 ≤ g(ε + c/√b):
    // Newton from the upper end is monotone; bisection backstops it.
    let sqrt_b = b.sqrt();
    let mut lo = eps;
    let mut hi = eps + c / sqrt_b;
    let mut x = hi;
    for _ in 0..200 {
        let t = q * q + b * x * x;
        let root = t.sqrt();
        let gx = x - eps - c * x / root;
        if gx >= 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dg = 1.0 - c * q * q / (t * root);
        let mut next = if dg > 0.0 { x - gx / dg } else { f64::NAN };
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-16 * x.abs() || hi - lo <= 1e-16 * hi;
        x = next;
        if done {
            break;
        }
    }
    let sigma = q.hypot(sqrt_b * x);
    (x, b * x / sigma)
}

/// One evaluation of the self-consistency map at a given Σ.
struct MapPoint {
    fun: Functionals,
    w: f64,
    u: f64,
    v: f64,
    q: f64,
    eps_prime: f64,
    sigma0: f64,
    sigma_out: f64,
}

fn eval_point(
    table: &SigmaFunctionals,
    p: &ModelParams,
    sigma: f64,
    pinned: bool,
) -> Result<MapPoint> {
    let fun = table.at(sigma)?;
    let (w, u, v) = uvw(fun.eta, fun.v_ind, p.k_ising, p.delta);
    let q = stable_gap(fun.eta * p.delta, w, fun.v_ind - p.k_ising);
    let b = 4.0 * u * u;
    let (eps_prime, sigma0) =
        if pinned { (p.epsilon, 0.0) } else { inner_solve(p.epsilon, q, b, fun.f_stat) };
    let sigma_out = q.hypot(2.0 * u * eps_prime);
    Ok(MapPoint { fun, w, u, v, q, eps_prime, sigma0, sigma_out })
}

/// Max relative change across all state components of two map points.
fn rel_change(a: &MapPoint, b: &MapPoint) -> f64 {
    let pairs = [
        (a.fun.eta, b.fun.eta),
        (a.fun.v_ind, b.fun.v_ind),
        (a.fun.f_stat, b.fun.f_stat),
        (a.w, b.w),
        (a.u, b.u),
        (a.v, b.v),
        (a.eps_prime, b.eps_prime),
        (a.sigma0, b.sigma0),
        (a.sigma_out, b.sigma_out),
    ];
    let mut worst = 0.0f64;
    for (x, y) in pairs {
        let scale = x.abs().max(y.abs());
        if scale > 0.0 {
            worst = worst.max((x - y).abs() / scale);
        }
    }
    worst
}

/// The α = 0 state: η = 1, V = F = 0 — exact for a decoupled bath and the
/// default initial guess otherwise.
pub fn decoupled_state(params: &ModelParams) -> AnsatzState {
    let (w, u, v) = uvw(1.0, 0.0, params.k_ising, params.delta);
    let q = stable_gap(params.delta, w, -params.k_ising);
    let b = 4.0 * u * u;
    let (eps_prime, sigma0) = inner_solve(params.epsilon, q, b, 0.0);
    let sigma = q.hypot(2.0 * u * eps_prime);
    let minor2 = 4.0 * eps_prime * eps_prime * u * u / (2.0 * sigma * (sigma + q));
    let cos2 = 0.5 * (1.0 + q / sigma);
    let theta = minor2.sqrt().atan2(cos2.sqrt());
    AnsatzState {
        eta: 1.0,
        v_ind: 0.0,
        f_stat: 0.0,
        w,
        u,
        v,
        sigma_cap: sigma,
        theta,
        sigma0,
        eps_prime,
    }
}

fn check_opts(opts: &SolverOpts) -> Result<()> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidOpts { reason: "damping must lie in (0, 1]" });
    }
    if !(opts.fp_tol > 0.0) {
        return Err(Error::InvalidOpts { reason: "fp_tol must be positive" });
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidOpts { reason: "max_iter must be at least 1" });
    }
    Ok(())
}

fn drive(
    table: &SigmaFunctionals,
    params: &ModelParams,
    opts: &SolverOpts,
    pinned: bool,
) -> Result<(MapPoint, usize, f64)> {
    check_opts(opts)?;
    let floor = SIGMA_FLOOR_REL * params.omega_c;
    let mut sigma = match &opts.init {
        InitialGuess::Decoupled => decoupled_state(params).sigma_cap,
        InitialGuess::WarmStart(state) => state.sigma_cap,
    }
    .max(floor);

    let mut damping = opts.damping;
    let mut prev: Option<(f64, f64, MapPoint)> = None; // (sigma, r, point)
    let mut below: Option<(f64, f64)> = None; // r > 0 side of the bracket
    let mut above: Option<(f64, f64)> = None; // r < 0 side
    let mut last_sign = 0i32;
    let mut alternations = 0u32;
    let mut bisect_toggle = false;
    let mut last_residual = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let pt = eval_point(table, params, sigma, pinned)?;
        let r = pt.sigma_out - sigma;
        let rel_r = (r / sigma.max(f64::MIN_POSITIVE)).abs();
        let change = prev.as_ref().map(|(_, _, p)| rel_change(p, &pt)).unwrap_or(f64::INFINITY);
        last_residual = rel_r.max(change);
        if last_residual <= opts.fp_tol {
            return Ok((pt, iter, last_residual));
        }

        if sigma <= floor && r < 0.0 {
            // Still contracting at the floor: the only fixed point left is
            // the collapsed η → 0 one.
            return Err(Error::DegenerateGap { sigma });
        }

        // Bracket maintenance. Position guards keep a stray far-side point
        // (possible if the map is non-monotone) from poisoning the bracket.
        let sign = if r > 0.0 {
            1
        } else if r < 0.0 {
            -1
        } else {
            0
        };
        if sign == 1 && above.map_or(true, |(s, _)| sigma < s) {
            if below.map_or(true, |(s, _)| sigma > s) {
                below = Some((sigma, r));
            }
        } else if sign == -1 && below.map_or(true, |(s, _)| sigma > s) {
            if above.map_or(true, |(s, _)| sigma < s) {
                above = Some((sigma, r));
            }
        }

        // Oscillating residuals stiffen the Picard phase: halve the mixing.
        if sign != 0 && last_sign != 0 && sign != last_sign {
            alternations += 1;
            if alternations >= 3 {
                damping = (0.5 * damping).max(opts.damping / 64.0);
                alternations = 0;
            }
        }
        if sign != 0 {
            last_sign = sign;
        }

        let mut next = match (below, above) {
            (Some((a, fa)), Some((b, fb))) if a < b => {
                // Safeguarded false position, alternated with bisection so
                // the bracket provably shrinks.
                bisect_toggle = !bisect_toggle;
                let fp = b - fb * (b - a) / (fb - fa);
                if bisect_toggle && fp.is_finite() && fp > a && fp < b {
                    fp
                } else {
                    0.5 * (a + b)
                }
            }
            _ => {
                let picard = sigma + damping * r;
                let secant = match prev {
                    Some((ps, pr, _)) if (r - pr).abs() > 0.0 => {
                        let sec = sigma - r * (sigma - ps) / (r - pr);
                        if sec.is_finite() {
                            sec
                        } else {
                            picard
                        }
                    }
                    _ => picard,
                };
                // Never jump past a point whose residual sign is known.
                let mut step = secant.clamp(sigma / 16.0, sigma * 16.0);
                if let Some((s, _)) = below {
                    step = step.max(s);
                }
                if let Some((s, _)) = above {
                    step = step.min(s);
                }
                step
            }
        };
        if !next.is_finite() {
            return Err(Error::NotConverged { iterations: iter, residual: last_residual });
        }
        next = next.max(floor);
        prev = Some((sigma, r, pt));
        sigma = next;
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: last_residual })
}

fn assemble(pt: MapPoint, params: &ModelParams, iterations: usize, residual: f64) -> Result<SolveReport> {
    let sigma = pt.sigma_out;
    if sigma < 1e-300 {
        return Err(Error::DegenerateGap { sigma });
    }
    let m = 2.0 * pt.eps_prime * pt.u;
    let sin2 = m * m / (2.0 * sigma * (sigma + pt.q));
    let cos2 = 0.5 * (1.0 + pt.q / sigma);
    let theta = sin2.sqrt().atan2(cos2.sqrt());
    let state = AnsatzState {
        eta: pt.fun.eta,
        v_ind: pt.fun.v_ind,
        f_stat: pt.fun.f_stat,
        w: pt.w,
        u: pt.u,
        v: pt.v,
        sigma_cap: sigma,
        theta,
        sigma0: pt.sigma0,
        eps_prime: pt.eps_prime,
    };
    // σ₀ has detached from the O(ε) bias-response scale exactly when the
    // zero-bias closure at the converged functionals localizes on its own,
    // i.e. 4u²F > Q. (A fixed multiple of ε/Δ would misfire below the
    // transition, where the response is enhanced by 1/(1 − 4u²F/Q) and σ₀
    // legitimately reaches thousands of ε while still vanishing as ε → 0.)
    let branch = if 4.0 * pt.u * pt.u * pt.fun.f_stat > pt.q {
        Branch::Localized
    } else {
        Branch::Delocalized
    };
    let validity = Validity {
        eps_prime_in_window: pt.eps_prime <= 0.05 * params.omega_c,
        alpha_in_window: None,
    };
    Ok(SolveReport { state, iterations, residual, branch, validity })
}

/// Solve the full self-consistency (σ₀ free).
///
/// Expects validated parameters (see [`crate::model::validate`]); the
/// routine itself is covariant under a common rescaling of (Δ, ε, K, ω_c).
pub fn solve(params: &ModelParams, bath: &BathSpec, opts: &SolverOpts) -> Result<SolveReport> {
    let table = SigmaFunctionals::new(bath.clone(), opts.quad)?;
    let (pt, iterations, residual) = drive(&table, params, opts, false)?;
    assemble(pt, params, iterations, residual)
}

/// Solve with the static displacement pinned to σ₀ = 0 (ε′ = ε): the
/// reference ansatz without the low-frequency shift. Used for the phase
/// criterion (with ε = 0, where Σ = W − V + K exactly) and for variational
/// comparisons. Note the converged state intentionally violates the
/// σ₀ = 4u²ε′/Σ identity when ε > 0 — it is a restricted ansatz.
pub fn solve_pinned(params: &ModelParams, bath: &BathSpec, opts: &SolverOpts) -> Result<SolveReport> {
    let table = SigmaFunctionals::new(bath.clone(), opts.quad)?;
    let (pt, iterations, residual) = drive(&table, params, opts, true)?;
    assemble(pt, params, iterations, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    fn ohmic(alpha: f64) -> BathSpec {
        BathSpec::Continuum { alpha, s: 1.0, omega_c: 1.0 }
    }

    #[test]
    fn uvw_symmetric_point() {
        let (w, u, v) = uvw(1.0, 0.0, 0.0, 0.1);
        assert!((w - 0.1).abs() < 1e-15);
        assert!((u - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn uvw_arithmetic_example() {
        let (w, u, v) = uvw(1.0, 0.3, 0.0, 0.1);
        assert!((w - (0.01f64 + 0.09).sqrt()).abs() < 1e-15);
        let u2 = (1.0 + 0.3 / w) / 2.0;
        assert!((u - u2.sqrt()).abs() < 1e-14, "u = {} vs {}", u, u2.sqrt());
        assert!((u * u + v * v - 1.0).abs() < 1e-14, "normalization");
    }

    #[test]
    fn uvw_ising_dominated_limit() {
        let (w, u, v) = uvw(1.0, 1e6, 0.0, 0.1);
        assert!(u > 1.0 - 1e-12 && v < 1e-6, "u → 1, v → 0; got u={u} v={v}");
        assert!((w - 1e6).abs() / 1e6 < 1e-12);
        // Antiferromagnetic mirror image: V − K < 0 swaps the roles.
        let (_, u, v) = uvw(1.0, 0.0, 1e6, 0.1);
        assert!(v > 1.0 - 1e-12 && u < 1e-6);
        // The stable path must keep u²+v²=1 even at extreme scale ratios.
        assert!((u * u + v * v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn theta_sigma_limits_and_arithmetic() {
        let (sigma, c, s) = theta_sigma(0.1, 0.02, 0.0, 0.0, 0.7).unwrap();
        assert_eq!((sigma, c, s), (0.08, 1.0, 0.0), "no bias, positive gap: θ = 0");
        let (sigma, c, s) = theta_sigma(0.1, 0.3, 0.0, 0.0, 0.7).unwrap();
        assert!((sigma - 0.2).abs() < 1e-15 && c == 0.0 && s == 1.0, "negative gap flips the sector");
        let (sigma, c, s) = theta_sigma(0.104, 0.1, 0.0, 1e-3, 1.0).unwrap();
        assert!((sigma - (1.6e-5f64 + 4e-6).sqrt()).abs() < 1e-15);
        let cos2 = (1.0 + 0.004 / sigma) / 2.0;
        assert!((c * c - cos2).abs() < 1e-14);
        assert!((c * c + s * s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inner_solve_reproduces_closed_forms() {
        // Subcritical at ε = 0: the only root is zero.
        assert_eq!(inner_solve(0.0, 0.1, 2.0, 0.01), (0.0, 0.0));
        // Supercritical at ε = 0: √(Q²+bx²) = c.
        let (x, s0) = inner_solve(0.0, 0.1, 2.0, 0.2);
        let c: f64 = 2.0 * 0.2;
        assert!((x - ((c * c - 0.01) / 2.0).sqrt()).abs() < 1e-15);
        assert!((s0 - 2.0 * x / c).abs() < 1e-15);
        // ε > 0: the root satisfies the fixed-point equation to round-off.
        for &(eps, q, b, f) in
            &[(1e-8, 0.0145, 3.8, 0.0038), (1e-5, 0.1, 2.0, 0.06), (1e-3, 0.004, 3.9, 0.002)]
        {
            let (x, s0) = inner_solve(eps, q, b, f);
            let sigma = (q * q + b * x * x).sqrt() as f64;
            let lhs = x - eps - b * f * x / sigma;
            assert!(lhs.abs() < 1e-14 * x, "inner residual {lhs:.2e} at eps={eps}");
            assert!((s0 - b * x / sigma).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupled_solve_matches_single_qubit_algebra() {
        let p = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.0, 1.0)).unwrap();
        let r = solve(&p, &ohmic(0.0), &SolverOpts::default()).unwrap();
        assert_eq!(r.branch, Branch::Delocalized);
        assert_eq!(r.state.eta, 1.0);
        assert_eq!(r.state.v_ind, 0.0);
        assert_eq!(r.state.f_stat, 0.0);
        assert!((r.state.w - 0.1).abs() < 1e-15);
        let sigma = (0.1f64 * 0.1 + 4.0 * 1e-10 * 0.5).sqrt();
        assert!((r.state.sigma_cap - sigma).abs() < 1e-16);
        let sigma0 = 2.0 * 1e-5 / sigma;
        assert!((r.state.sigma0 - sigma0).abs() < 1e-15, "σ₀ ≈ 2ε/Δ in the decoupled limit");
        assert!(r.iterations <= 3, "constant map must converge immediately");
    }

    #[test]
    fn converged_state_satisfies_all_identities() {
        let p = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.1, 1.0)).unwrap();
        let r = solve(&p, &ohmic(0.1), &SolverOpts::default()).unwrap();
        let res = r.state.identity_residuals(&p);
        assert!(res[0].abs() < 1e-12, "u²+v²−1 = {:.2e}", res[0]);
        assert!(res[1].abs() < 1e-10, "W² identity: {:.2e}", res[1]);
        assert!(res[2].abs() < 1e-10, "Σ² identity: {:.2e}", res[2]);
        assert!(res[3].abs() < 1e-12, "cos²+sin²−1 = {:.2e}", res[3]);
        assert!(res[4].abs() < 1e-8, "σ₀ closure: {:.2e}", res[4]);
        assert!(r.residual <= 1e-11);
        assert!(r.validity.eps_prime_in_window);
    }

    #[test]
    fn reapplying_the_map_barely_moves_a_converged_state() {
        let p = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.12, 1.0)).unwrap();
        let opts = SolverOpts::default();
        let r = solve(&p, &ohmic(0.12), &opts).unwrap();
        let table = SigmaFunctionals::new(ohmic(0.12), opts.quad).unwrap();
        let pt = eval_point(&table, &p, r.state.sigma_cap, false).unwrap();
        let drift = (pt.sigma_out - r.state.sigma_cap).abs() / r.state.sigma_cap;
        assert!(drift <= 10.0 * opts.fp_tol, "map drift {drift:.2e} beyond 10·fp_tol");
    }

    #[test]
    fn branches_straddle_the_ohmic_transition() {
        // α_c ≈ 0.1338 at s=1, Δ=0.1, K=0.
        let below = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.12, 1.0)).unwrap();
        let r = solve(&below, &ohmic(0.12), &SolverOpts::default()).unwrap();
        assert_eq!(r.branch, Branch::Delocalized);
        // Enhanced by 1/(1−4u²F/Q) ≈ 8 but still on the linear-response
        // scale, i.e. "nearly zero" against the localized σ₀ ~ 2u.
        assert!(r.state.sigma0 < 0.05, "σ₀ = {} not small", r.state.sigma0);

        let above = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.145, 1.0)).unwrap();
        let r145 = solve(&above, &ohmic(0.145), &SolverOpts::default()).unwrap();
        assert_eq!(r145.branch, Branch::Localized);
        let further = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.15, 1.0)).unwrap();
        let r150 = solve(&further, &ohmic(0.15), &SolverOpts::default()).unwrap();
        assert!(
            r150.state.sigma0 > r145.state.sigma0,
            "σ₀ keeps rising beyond the transition: {} vs {}",
            r150.state.sigma0,
            r145.state.sigma0
        );
    }

    #[test]
    fn zero_bias_solves_select_the_phase_exactly() {
        let sub = validate(&ModelParams::new(0.1, 0.0, 0.0, 0.10, 1.0)).unwrap();
        let r = solve(&sub, &ohmic(0.10), &SolverOpts::default()).unwrap();
        assert_eq!(r.state.sigma0, 0.0, "subcritical ε = 0 has exactly zero displacement");
        assert_eq!(r.branch, Branch::Delocalized);

        let sup = validate(&ModelParams::new(0.1, 0.0, 0.0, 0.15, 1.0)).unwrap();
        let r = solve(&sup, &ohmic(0.15), &SolverOpts::default()).unwrap();
        assert!(r.state.sigma0 > 0.05, "supercritical ε = 0 localizes spontaneously");
        assert_eq!(r.branch, Branch::Localized);
    }

    #[test]
    fn warm_start_agrees_with_cold_start() {
        let p11 = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.11, 1.0)).unwrap();
        let prior = solve(&p11, &ohmic(0.11), &SolverOpts::default()).unwrap();
        let p12 = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.12, 1.0)).unwrap();
        let cold = solve(&p12, &ohmic(0.12), &SolverOpts::default()).unwrap();
        let warm_opts =
            SolverOpts { init: InitialGuess::WarmStart(prior.state), ..SolverOpts::default() };
        let warm = solve(&p12, &ohmic(0.12), &warm_opts).unwrap();
        let diff = (warm.state.sigma_cap - cold.state.sigma_cap).abs() / cold.state.sigma_cap;
        assert!(diff < 1e-9, "warm and cold starts disagree by {diff:.2e}");
        assert!(warm.iterations <= cold.iterations, "warm start may not be slower");
    }

    #[test]
    fn tiny_tunneling_sub_ohmic_point_converges() {
        // Small-Δ scaling regime: Σ* is ~Δ/5 here, far below ω_c.
        let p = validate(&ModelParams::new(1e-3, 0.0, 0.0, 1e-3, 0.5)).unwrap();
        let bath = BathSpec::Continuum { alpha: 1e-3, s: 0.5, omega_c: 1.0 };
        let r = solve(&p, &bath, &SolverOpts::default()).unwrap();
        assert_eq!(r.branch, Branch::Delocalized);
        assert!(
            r.state.sigma_cap > 1e-5 && r.state.sigma_cap < 1e-2,
            "Σ* = {} outside the expected window",
            r.state.sigma_cap
        );
    }

    #[test]
    fn collapsed_sub_ohmic_point_reports_degenerate_gap() {
        // Deep in the localized regime the σ₀-pinned (ε = 0) map has no
        // fixed point above the floor: η collapses.
        let p = validate(&ModelParams::new(1e-3, 0.0, 0.0, 0.5, 0.5)).unwrap();
        let bath = BathSpec::Continuum { alpha: 0.5, s: 0.5, omega_c: 1.0 };
        let r = solve_pinned(&p, &bath, &SolverOpts::default());
        assert!(matches!(r, Err(Error::DegenerateGap { .. })), "got {r:?}");
    }

    #[test]
    fn iteration_budget_is_honored() {
        let p = validate(&ModelParams::new(0.1, 1e-5, 0.0, 0.13, 1.0)).unwrap();
        let opts = SolverOpts { max_iter: 2, ..SolverOpts::default() };
        assert!(matches!(
            solve(&p, &ohmic(0.13), &opts),
            Err(Error::NotConverged { iterations: 2, .. })
        ));
    }

    #[test]
    fn invalid_options_are_rejected() {
        let p = validate(&ModelParams::new(0.1, 0.0, 0.0, 0.1, 1.0)).unwrap();
        let opts = SolverOpts { damping: 0.0, ..SolverOpts::default() };
        assert!(matches!(solve(&p, &ohmic(0.1), &opts), Err(Error::InvalidOpts { .. })));
        let opts = SolverOpts { fp_tol: -1.0, ..SolverOpts::default() };
        assert!(matches!(solve(&p, &ohmic(0.1), &opts), Err(Error::InvalidOpts { .. })));
    }

    #[test]
    fn pinned_solve_at_zero_bias_has_sigma_equal_gap() {
        let p = validate(&ModelParams::new(0.1, 0.0, 0.0, 0.1, 1.0)).unwrap();
        let r = solve_pinned(&p, &ohmic(0.1), &SolverOpts::default()).unwrap();
        let q = r.state.w - r.state.v_ind + p.k_ising;
        assert!(
            (r.state.sigma_cap - q).abs() < 1e-10 * q,
            "pinned ε=0 must close on Σ = W − V + K"
        );
        assert_eq!(r.state.sigma0, 0.0);
    }
}
