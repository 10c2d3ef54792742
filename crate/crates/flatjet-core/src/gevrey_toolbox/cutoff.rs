//! Gevrey cutoff and the flat smoothstep underlying it.
//!
//! The cutoff is `ρ(t) = Φ((3T/4 − t)/(T/2))` with
//! `Φ(u) = φ(u)/(φ(u) + φ(1−u))` and `φ(u) = exp(−u^{−1/(σ−1)})` for `u > 0`
//! (zero otherwise). Derivatives come from composing the closed form through
//! truncated Taylor arithmetic at the evaluation point — never finite
//! differences, which are meaningless on the flat plateaus.
//!
//! On `[0, T/4]` the quotient is `φ/φ = 1` whose series division yields the
//! constant-one stack exactly; on `[3T/4, T]` the numerator underflows to an
//! exact zero. The plateau identities therefore hold bit-exactly.

use super::trace::{Trace, TraceError, TraceKind};
use crate::series_core::Taylor1;
use std::sync::Arc;

/// Largest `x` with `exp(-1/x^beta)`-type terms still representable; below the
/// matching `u` the whole φ-series is a numerical zero.
fn phi_underflow_threshold(beta: f64) -> f64 {
    // exp(−u^{−β}) < DBL_MIN ⟺ u < 709^{−1/β}
    709.0f64.powf(-1.0 / beta)
}

/// Taylor stack of `φ(u(s)) = exp(−u(s)^{−β})` at `s = 0` for affine
/// `u(s) = u0 + du·s`, or `None` when the value underflows to zero.
fn phi_series(u0: f64, du: f64, beta: f64, order: usize) -> Option<Taylor1> {
    if u0 <= phi_underflow_threshold(beta) {
        return None;
    }
    // g(s) = −(u0 + du s)^{−β}: coefficients −C(−β, k) u0^{−β−k} du^k.
    let mut g = Taylor1::real_power_of_variable(u0, -beta, order);
    let mut du_pow = 1.0f64;
    for k in 0..=order {
        g.coeffs[k] *= -du_pow;
        du_pow *= du;
    }
    Some(g.exp())
}

/// Taylor stack of the smoothstep `Φ(u(s))` (1 for `u ≥ 1`, 0 for `u ≤ 0`) for
/// affine `u(s) = u0 + du·s`.
pub(crate) fn smoothstep_series(u0: f64, du: f64, beta: f64, order: usize) -> Taylor1 {
    let phi1 = phi_series(u0, du, beta, order);
    let phi2 = phi_series(1.0 - u0, -du, beta, order);
    match (phi1, phi2) {
        (None, _) => Taylor1::constant(0.0, order),
        (Some(p1), None) => p1.div(&p1.clone()),
        (Some(p1), Some(p2)) => p1.div(&p1.add(&p2)),
    }
}

/// Gevrey cutoff of order `σ` on `[0, T]`: identically 1 on `[0, T/4]`,
/// identically 0 on `[3T/4, T]`, `ρ(T/2) = 1/2` by symmetry.
pub fn gevrey_cutoff(t_end: f64, sigma: f64) -> Result<Trace<f64>, TraceError> {
    gevrey_cutoff_with_order(t_end, sigma, 64)
}

/// Same with an explicit derivative-order cap `Q`.
pub fn gevrey_cutoff_with_order(
    t_end: f64,
    sigma: f64,
    q_max: usize,
) -> Result<Trace<f64>, TraceError> {
    if sigma <= 1.0 {
        return Err(TraceError::BadCutoffOrder(sigma));
    }
    assert!(t_end > 0.0);
    let beta = 1.0 / (sigma - 1.0);
    let batch = move |t: f64, q: usize| -> Vec<f64> {
        let u0 = (0.75 * t_end - t) / (0.5 * t_end);
        let du = -2.0 / t_end;
        let series = smoothstep_series(u0, du, beta, q);
        (0..=q).map(|d| series.derivative(d)).collect()
    };
    Ok(Trace::new(TraceKind::Cutoff, t_end, q_max, Arc::new(batch)))
}
