//! Concrete smooth functions of `t` with derivative evaluators.
//!
//! A [`Trace`] is an immutable evaluator `(q, t) ↦ u^{(q)}(t)` on `[0, T]`,
//! supporting derivatives up to a fixed order `Q`. Cutoffs, Borel realizations
//! and blends all produce traces; simulators and the field builder only ever
//! consume this interface.

use crate::scalar::Scalar;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("cutoff order sigma must exceed 1 (got {0})")]
    BadCutoffOrder(f64),
    #[error("traces live on mismatched domains ({0} vs {1})")]
    DomainMismatch(f64, f64),
    #[error("traces support different derivative orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("derivative growth hypothesis |d_q| <= C H^q (lambda q)! fails at q={q}: ratio {ratio}")]
    GrowthHypothesis { q: usize, ratio: f64 },
    #[error("target rate H~ = {ht} must exceed e^(1/e) H = {threshold}")]
    RateTooTight { ht: f64, threshold: f64 },
    #[error("no admissible bump width for term q={q}")]
    NoAdmissibleWidth { q: usize },
    #[error("sequence D_{q} is outside ker(B): residual {residual}")]
    OutsideKernel { q: usize, residual: f64 },
    #[error("boundary matrix has a trivial kernel; only the zero sequence is realizable")]
    TrivialKernel,
}

/// How a trace was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceKind {
    Cutoff,
    Borel,
    Blend,
    Zero,
    Tabulated,
}

type BatchFn<S> = dyn Fn(f64, usize) -> Vec<S> + Send + Sync;

/// Smooth function on `[0, T]` with derivatives to order `Q`.
#[derive(Clone)]
pub struct Trace<S: Scalar> {
    kind: TraceKind,
    t_end: f64,
    q_max: usize,
    batch: Arc<BatchFn<S>>,
}

impl<S: Scalar> std::fmt::Debug for Trace<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trace")
            .field("kind", &self.kind)
            .field("t_end", &self.t_end)
            .field("q_max", &self.q_max)
            .finish()
    }
}

impl<S: Scalar> Trace<S> {
    pub fn new(
        kind: TraceKind,
        t_end: f64,
        q_max: usize,
        batch: Arc<BatchFn<S>>,
    ) -> Self {
        assert!(
            !S::EXACT,
            "traces are float-domain objects; exact backends are for jets"
        );
        Trace {
            kind,
            t_end,
            q_max,
            batch,
        }
    }

    pub fn zero(t_end: f64, q_max: usize) -> Self {
        Trace::new(
            TraceKind::Zero,
            t_end,
            q_max,
            Arc::new(move |_t, q| vec![S::zero(); q + 1]),
        )
    }

    /// Polynomial `Σ α_n t^n / n!` from derivative values `α_n` at `t = 0`.
    pub fn polynomial(alphas: Vec<S>, t_end: f64, q_max: usize) -> Self {
        Trace::new(
            TraceKind::Tabulated,
            t_end,
            q_max,
            Arc::new(move |t, q| {
                let ts = S::try_from_f64_pair(t, 0.0).expect("float backend");
                (0..=q)
                    .map(|d| {
                        // d-th derivative: Σ_{n≥d} α_n t^{n−d}/(n−d)!
                        let mut acc = S::zero();
                        let mut pow = S::one();
                        let mut fact = 1.0f64;
                        for (m, alpha) in alphas.iter().skip(d).enumerate() {
                            if m > 0 {
                                pow = pow * ts.clone();
                                fact *= m as f64;
                            }
                            let inv = S::try_from_f64_pair(1.0 / fact, 0.0).unwrap();
                            acc = acc + alpha.clone() * pow.clone() * inv;
                        }
                        acc
                    })
                    .collect()
            }),
        )
    }

    /// Wrap an arbitrary derivative evaluator (testing and tabulated data).
    pub fn from_fn(
        t_end: f64,
        q_max: usize,
        f: impl Fn(usize, f64) -> S + Send + Sync + 'static,
    ) -> Self {
        Trace::new(
            TraceKind::Tabulated,
            t_end,
            q_max,
            Arc::new(move |t, q| (0..=q).map(|d| f(d, t)).collect()),
        )
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    /// Derivatives `u^{(0)}(t) … u^{(q)}(t)`.
    pub fn derivs(&self, t: f64, q: usize) -> Vec<S> {
        debug_assert!(q <= self.q_max, "derivative order {q} exceeds Q={}", self.q_max);
        (self.batch)(t, q)
    }

    pub fn deriv(&self, q: usize, t: f64) -> S {
        self.derivs(t, q).pop().unwrap()
    }

    pub fn value(&self, t: f64) -> S {
        self.deriv(0, t)
    }
}

/// Componentwise blend `ρ·hat + (1−ρ)·tilde` with derivatives by the 1D
/// Leibniz rule. On the plateaus of `ρ` the result equals `hat` (left) or
/// `tilde` (right) with all derivatives, exactly: the vanishing cutoff
/// derivatives multiply by literal zeros.
pub fn blend_traces<S: Scalar>(
    hat: &[Trace<S>],
    tilde: &[Trace<S>],
    rho: &Trace<f64>,
) -> Result<Vec<Trace<S>>, TraceError> {
    assert_eq!(hat.len(), tilde.len());
    let mut out = Vec::with_capacity(hat.len());
    for (h, g) in hat.iter().zip(tilde) {
        if (h.t_end - g.t_end).abs() > 1e-12 || (h.t_end - rho.t_end).abs() > 1e-12 {
            return Err(TraceError::DomainMismatch(h.t_end, g.t_end));
        }
        if h.q_max != g.q_max {
            return Err(TraceError::OrderMismatch(h.q_max, g.q_max));
        }
        let q_max = h.q_max.min(rho.q_max);
        let (h, g, rho) = (h.clone(), g.clone(), rho.clone());
        out.push(Trace::new(
            TraceKind::Blend,
            h.t_end,
            q_max,
            Arc::new(move |t, q| {
                let rho_d = rho.derivs(t, q);
                let h_d = h.derivs(t, q);
                let g_d = g.derivs(t, q);
                (0..=q)
                    .map(|n| {
                        let mut acc = S::zero();
                        for j in 0..=n {
                            let c = crate::scalar::binomial_f64(n as u32, j as u32);
                            let rho_j = rho_d[j];
                            let one_minus_rho_j = if j == 0 { 1.0 - rho_d[0] } else { -rho_d[j] };
                            let w_hat = S::try_from_f64_pair(c * rho_j, 0.0).unwrap();
                            let w_til = S::try_from_f64_pair(c * one_minus_rho_j, 0.0).unwrap();
                            acc = acc
                                + w_hat * h_d[n - j].clone()
                                + w_til * g_d[n - j].clone();
                        }
                        acc
                    })
                    .collect()
            }),
        ));
    }
    Ok(out)
}
