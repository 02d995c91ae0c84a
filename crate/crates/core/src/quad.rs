//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair on each panel gives the value
//! (Kronrod) and an error estimate from the embedded Gauss rule, rescaled
//! QUADPACK-style so it is conservative for rough integrands without being
//! absurd for smooth ones. Panels live in a max-heap keyed on the error
//! estimate; the worst panel is bisected until the global estimate meets
//! `max(abs_tol, rel_tol·|I|)` or the subdivision budget runs out.
//!
//! The bath integrands this crate cares about have a power-law endpoint
//! ω^{s−1} at ω → 0; callers absorb it with the substitution ω = t^{1/s}
//! *before* integrating (see the `spectral` module), so the integrands seen
//! here are smooth and a few subdivisions usually suffice.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOpts {
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Absolute tolerance floor (dominates for integrals near zero).
    pub abs_tol: f64,
    /// Maximum number of panel bisections.
    pub max_subdivisions: u32,
}

impl Default for QuadratureOpts {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 200 }
    }
}

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    /// Accumulated error estimate over all panels.
    pub error: f64,
    pub evaluations: u32,
    pub subdivisions: u32,
    /// Whether `error ≤ max(abs_tol, rel_tol·|value|)` was reached.
    pub converged: bool,
}

// 15-point Kronrod abscissae on [-1, 1] (non-negative half; symmetric).
// Odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.2077849550078985,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224,
    0.06309209262997856,
    0.10479001032225018,
    0.14065325971552592,
    0.1690047266392679,
    0.1903505780647854,
    0.20443294007529889,
    0.20948214108472782,
];

// Weights of the embedded 7-point Gauss rule, matching XGK[1], XGK[3],
// XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.1294849661688697,
    0.27970539148927664,
    0.3818300505051189,
    0.4179591836734694,
];

/// QUADPACK-style smoothing of the raw |Kronrod − Gauss| difference.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let underflow_guard = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > underflow_guard {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

/// One G7K15 evaluation on [a, b]: (value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let fc = f(center);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    let mut res_abs = WGK[7] * fc.abs();

    // Stored so the mean-deviation term can be accumulated afterwards.
    let mut fv = [0.0f64; 14];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * i] = f1;
        fv[2 * i + 1] = f2;
        res_k += WGK[i] * (f1 + f2);
        res_abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            res_g += WG[i / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        res_asc += WGK[i] * ((fv[2 * i] - mean).abs() + (fv[2 * i + 1] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over [a, b].
///
/// Panics only on non-finite interval endpoints; a NaN-producing integrand
/// surfaces as `converged == false`. Callers translate that into
/// [`crate::error::Error::QuadratureNotConverged`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadratureOpts) -> QuadEstimate {
    assert!(a.is_finite() && b.is_finite(), "integration endpoints must be finite");
    if a == b {
        return QuadEstimate { value: 0.0, error: 0.0, evaluations: 0, subdivisions: 0, converged: true };
    }

    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total_value = value;
    let mut total_error = error;
    let mut evaluations = 15u32;
    let mut subdivisions = 0u32;

    let tolerance = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());

    while total_error > tolerance(total_value) && subdivisions < opts.max_subdivisions {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel at floating-point resolution; cannot be refined further.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        evaluations += 30;
        subdivisions += 1;
    }

    // Re-accumulate from the panel list to shed the incremental-update
    // rounding drift (the heap order is deterministic, so the sum is too).
    total_value = heap.iter().map(|p| p.value).sum();
    total_error = heap.iter().map(|p| p.error).sum();

    let converged = total_error <= tolerance(total_value) && total_error.is_finite();
    QuadEstimate { value: total_value, error: total_error, evaluations, subdivisions, converged }
}
