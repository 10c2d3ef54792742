//! The jet correspondence at `x = 0`.
//!
//! Forward direction ([`time_jets_from_state`]): from the space-Taylor
//! coefficients of the time components, fill the full 2D jet row by row using
//! `d_n^k = Σ_j ζ_j d_{n−N}^{k+j} + (nonlinear Leibniz term)`. The recursion is
//! deterministic and never assumes a solution exists.
//!
//! Inverse direction ([`complete_jet_from_traces`]): from the `M` boundary rows,
//! solve the same identity for `d_{n−N}^{k+M}` and march sideways column by
//! column. Each block of `M` columns consumes `N` time orders, so the filled
//! region is a staircase; entries outside it are reported absent, never
//! zero-filled.

pub mod kdv;

pub use kdv::{kdv_compat_polys, kdv_project_to_compat, KdvCompatPoly};

use crate::pde_model::{AnalyticState, NonlinearTerm, PdeSpec};
use crate::scalar::Scalar;
use crate::series_core::{factorials, Jet2D, JetBoundParams};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("component {component} supplies coefficients to order {got} but order {needed} is required")]
    InsufficientInput {
        component: usize,
        needed: usize,
        got: usize,
    },
    #[error("state has {found} components, spec requires N={want}")]
    ComponentMismatch { found: usize, want: usize },
    #[error("boundary rows must cover k < {m} up to n_max={n_max}; row {n} has {got}")]
    IncompleteBoundaryRows {
        m: usize,
        n_max: usize,
        n: usize,
        got: usize,
    },
    #[error("operation requires an empty nonlinearity table")]
    NonlinearTable,
    #[error("spec is not parity-symmetric: {0}")]
    NotSymmetric(String),
    #[error(transparent)]
    Jet(#[from] crate::series_core::JetError),
}

/// Incrementally evaluated product `A_p(x) · Π_i (∂_x^i y)^{p_i} (∂_x^i ȳ)^{p̄_i}`
/// over a growing base jet. Level 0 is the `A_p` jet; each further level
/// multiplies one flattened factor in. Entries are cached and extended on
/// demand; the caller guarantees that requested entries only depend on base
/// entries that already exist.
struct ProductPyramid<S: Scalar> {
    /// Taylor coefficients `a_{p,r}` of `A_p` indexed by `r`.
    a_coeffs: Vec<S>,
    /// Flattened factors: (x-shift, conjugated).
    factors: Vec<(usize, bool)>,
    /// levels[j][n] = cached row prefix of the product through factor j.
    levels: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> ProductPyramid<S> {
    fn new(term_group: &[&NonlinearTerm<S>]) -> Vec<ProductPyramid<S>> {
        // One pyramid per distinct (p, pbar); terms differing only in r share it.
        use std::collections::BTreeMap;
        let mut groups: BTreeMap<(Vec<u32>, Vec<u32>), Vec<S>> = BTreeMap::new();
        for t in term_group {
            let coeffs = groups.entry((t.p.clone(), t.pbar.clone())).or_default();
            if coeffs.len() <= t.r as usize {
                coeffs.resize(t.r as usize + 1, S::zero());
            }
            coeffs[t.r as usize] = coeffs[t.r as usize].clone() + t.a.clone();
        }
        groups
            .into_iter()
            .map(|((p, pbar), a_coeffs)| {
                let mut factors = Vec::new();
                for (i, &pw) in p.iter().enumerate() {
                    for _ in 0..pw {
                        factors.push((i, false));
                    }
                }
                for (i, &pw) in pbar.iter().enumerate() {
                    for _ in 0..pw {
                        factors.push((i, true));
                    }
                }
                ProductPyramid {
                    a_coeffs,
                    factors,
                    levels: Vec::new(),
                }
            })
            .collect()
    }

    /// Entry `(n, k)` of the `A_p` level: `k! a_{p,k}` on row 0, zero elsewhere.
    fn a_entry(&self, n: usize, k: usize) -> S {
        if n > 0 {
            return S::zero();
        }
        match self.a_coeffs.get(k) {
            None => S::zero(),
            Some(a) => {
                let mut fact = S::one();
                for i in 1..=k {
                    fact = fact * S::from_i64(i as i64);
                }
                a.clone() * fact
            }
        }
    }

    fn factor_entry(&self, base: &[Vec<S>], level: usize, n: usize, k: usize) -> S {
        let (shift, conj) = self.factors[level];
        let v = base[n][k + shift].clone();
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// Entry `(n, k)` of the full product; extends caches as needed.
    fn entry(&mut self, base: &[Vec<S>], n: usize, k: usize) -> S {
        if self.factors.is_empty() {
            return self.a_entry(n, k);
        }
        self.levels.resize_with(self.factors.len(), Vec::new);
        for j in 0..self.factors.len() {
            for r in 0..=n {
                // Row r of level j must reach column k.
                if self.levels[j].len() <= r {
                    self.levels[j].resize_with(r + 1, Vec::new);
                }
                while self.levels[j][r].len() <= k {
                    let c = self.levels[j][r].len();
                    let mut acc = S::zero();
                    for i in 0..=r {
                        let cn = S::from_binomial(r as u32, i as u32);
                        for l in 0..=c {
                            let left = if j == 0 {
                                self.a_entry(i, l)
                            } else {
                                self.levels[j - 1][i][l].clone()
                            };
                            if left.is_zero() {
                                continue;
                            }
                            let right = self.factor_entry(base, j, r - i, c - l);
                            let ck = S::from_binomial(c as u32, l as u32);
                            acc = acc + left * right * cn.clone() * ck;
                        }
                    }
                    self.levels[j][r].push(acc);
                }
            }
        }
        self.levels[self.factors.len() - 1][n][k].clone()
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Per-row column budget for the forward recursion: row `n` is computed out to
/// `k_max + M·⌈(n_max − n)/N⌉`, so consuming `M` columns per `N` time orders
/// still lands row `n_max` on `k_max`.
fn forward_row_len(n: usize, n_max: usize, k_max: usize, n_ord: usize, m_ord: usize) -> usize {
    k_max + m_ord * ceil_div(n_max - n, n_ord)
}

/// The forward jet correspondence: full jet `d_n^k` for `n ≤ n_max`,
/// `k ≤ k_max` from an analytic state (rows `n < N` are the input coefficient
/// sequences; rows `n ≥ N` follow from the recursion).
///
/// Input sequences must reach order `k_max + M·⌈n_max/N⌉`.
pub fn time_jets_from_state<S: Scalar>(
    spec: &PdeSpec<S>,
    y0: &AnalyticState<S>,
    n_max: usize,
    k_max: usize,
) -> Result<Jet2D<S>, EngineError> {
    let (n_ord, m_ord) = (spec.n_order, spec.m_order);
    if y0.n_components() != n_ord {
        return Err(EngineError::ComponentMismatch {
            found: y0.n_components(),
            want: n_ord,
        });
    }
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(n_max + 1);
    for l in 0..n_ord.min(n_max + 1) {
        let need = forward_row_len(l, n_max, k_max, n_ord, m_ord);
        let comp = &y0.components[l];
        if comp.len() < need + 1 {
            return Err(EngineError::InsufficientInput {
                component: l,
                needed: need,
                got: comp.len() - 1,
            });
        }
        rows.push(comp[..=need].to_vec());
    }
    let mut pyramids = ProductPyramid::new(&spec.nonlinearity.terms().iter().collect::<Vec<_>>());
    for n in n_ord..=n_max {
        let len = forward_row_len(n, n_max, k_max, n_ord, m_ord);
        let mut row = Vec::with_capacity(len + 1);
        for k in 0..=len {
            let mut v = S::zero();
            for (j, zeta) in spec.zeta.iter().enumerate() {
                if zeta.is_zero() {
                    continue;
                }
                v = v + zeta.clone() * rows[n - n_ord][k + j].clone();
            }
            for pyr in pyramids.iter_mut() {
                v = v + pyr.entry(&rows, n - n_ord, k);
            }
            row.push(v);
        }
        rows.push(row);
    }
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().take(k_max + 1).collect())
        .collect();
    Ok(Jet2D::from_rows(rows, k_max, S::zero(), 0.0))
}

/// Staircase height: largest `n` with a stored entry in column `k`, for a
/// completion run to time order `n_max` on a spec with orders `(N, M)`.
pub fn staircase_height(k: usize, n_max: usize, n_ord: usize, m_ord: usize) -> isize {
    if k < m_ord {
        return n_max as isize;
    }
    let steps = ceil_div(k - m_ord + 1, m_ord);
    n_max as isize - (n_ord * steps) as isize
}

/// Sideways completion: rebuild columns `k ≥ M` from the boundary rows
/// (`e_n^k` for `k < M`, `n ≤ n_max`) by solving the PDE identity for
/// `∂_x^M`. The result is a staircase jet; entries beyond it are absent.
pub fn complete_jet_from_traces<S: Scalar>(
    spec: &PdeSpec<S>,
    boundary_rows: &[Vec<S>],
    k_max: usize,
) -> Result<Jet2D<S>, EngineError> {
    let (n_ord, m_ord) = (spec.n_order, spec.m_order);
    let n_max = boundary_rows.len() - 1;
    for (n, row) in boundary_rows.iter().enumerate() {
        if row.len() < m_ord {
            return Err(EngineError::IncompleteBoundaryRows {
                m: m_ord,
                n_max,
                n,
                got: row.len(),
            });
        }
    }
    let mut rows: Vec<Vec<S>> = boundary_rows
        .iter()
        .map(|r| r[..m_ord].to_vec())
        .collect();
    let mut pyramids = ProductPyramid::new(&spec.nonlinearity.terms().iter().collect::<Vec<_>>());
    let zeta_m_inv = S::one() / spec.zeta[m_ord].clone();
    for c in m_ord..=k_max {
        let h = staircase_height(c, n_max, n_ord, m_ord);
        if h < 0 {
            break;
        }
        for n in 0..=(h as usize) {
            // d_n^c = ζ_M^{-1} ( d_{n+N}^{c−M} − Σ_{j<M} ζ_j d_n^{c−M+j} − I_2(n+N, c−M) )
            let mut v = rows[n + n_ord][c - m_ord].clone();
            for j in 0..m_ord {
                if spec.zeta[j].is_zero() {
                    continue;
                }
                v = v - spec.zeta[j].clone() * rows[n][c - m_ord + j].clone();
            }
            for pyr in pyramids.iter_mut() {
                v = v - pyr.entry(&rows, n, c - m_ord);
            }
            let value = zeta_m_inv.clone() * v;
            rows[n].push(value);
        }
    }
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().take(k_max + 1).collect())
        .collect();
    Ok(Jet2D::from_rows(rows, k_max, S::zero(), 0.0))
}

/// Smallest `C'` certifying `|d_n^k| ≤ C' (λn+k)!/(R^k R'^{λn} (λn+k+1)^μ)`
/// over the stored entries.
pub fn certify_jet_bound<S: Scalar>(jet: &Jet2D<S>, params: &JetBoundParams) -> f64 {
    jet.bound_constant(params)
}

/// Default envelope parameters for a spec and a state radius: radii squeezed
/// between the synthesis threshold and `min(R̃, b2)`, decay exponent `μ = M+2`.
pub fn default_bound_params<S: Scalar>(spec: &PdeSpec<S>, state_radius: f64) -> JetBoundParams {
    let rhat = spec.rhat();
    let r_eff = state_radius.min(spec.nonlinearity.b2);
    let (r, rp) = if r_eff > rhat {
        (rhat + 0.75 * (r_eff - rhat), rhat + 0.5 * (r_eff - rhat))
    } else {
        (0.95 * r_eff, 0.85 * r_eff)
    };
    JetBoundParams::new(r, rp, spec.m_order as f64 + 2.0, spec.lambda_f64())
}

/// Per-time-order report of `‖B·D_n‖_∞` against the compatibility conditions.
#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    /// `‖B·D_n‖_∞` for `n = 0..=n_checked`.
    pub max_violation: Vec<f64>,
    /// Pass thresholds per `n` (zero in exact mode).
    pub thresholds: Vec<f64>,
    pub n_checked: usize,
    pub verdict: bool,
    /// `(n, boundary row, violation)` for offending rows.
    pub details: Vec<(usize, usize, f64)>,
}

impl CompatReport {
    fn trivially_pass(n_max: usize) -> Self {
        CompatReport {
            max_violation: vec![0.0; n_max + 1],
            thresholds: vec![0.0; n_max + 1],
            n_checked: n_max,
            verdict: true,
            details: Vec::new(),
        }
    }
}

/// Compatibility check `B·D_n = 0` for `n ≤ n_max`, with `D_n` the first `M`
/// entries of jet row `n`. Exact scalars are compared to literal zero; float
/// scalars to `tol` scaled by the row's certified envelope.
pub fn compat_check<S: Scalar>(
    spec: &PdeSpec<S>,
    y0: &AnalyticState<S>,
    n_max: usize,
    tol: f64,
) -> Result<CompatReport, EngineError> {
    if spec.num_boundary_rows() == 0 {
        return Ok(CompatReport::trivially_pass(n_max));
    }
    let jet = time_jets_from_state(spec, y0, n_max, spec.m_order - 1)?;
    let params = default_bound_params(spec, y0.radius);
    let cfit = if S::EXACT { 0.0 } else { certify_jet_bound(&jet, &params) };
    compat_report_from_jet(spec, &jet, n_max, tol, cfit, &params)
}

fn compat_report_from_jet<S: Scalar>(
    spec: &PdeSpec<S>,
    jet: &Jet2D<S>,
    n_max: usize,
    tol: f64,
    cfit: f64,
    params: &JetBoundParams,
) -> Result<CompatReport, EngineError> {
    let m = spec.m_order;
    let mut report = CompatReport {
        max_violation: Vec::with_capacity(n_max + 1),
        thresholds: Vec::with_capacity(n_max + 1),
        n_checked: n_max,
        verdict: true,
        details: Vec::new(),
    };
    for n in 0..=n_max {
        let mut row_scale: f64 = 0.0;
        if !S::EXACT {
            for k in 0..m {
                row_scale = row_scale.max(
                    cfit * factorials::log_envelope(
                        n as u32,
                        k as u32,
                        params.lambda,
                        params.r,
                        params.rp,
                        params.mu,
                    )
                    .exp(),
                );
            }
        }
        let threshold = if S::EXACT { 0.0 } else { tol * row_scale };
        let mut worst = 0.0f64;
        for (ri, brow) in spec.boundary.iter().enumerate() {
            let mut acc = S::zero();
            for k in 0..m {
                acc = acc + brow[k].clone() * jet.get(n, k)?.clone();
            }
            let viol = acc.abs_f64();
            worst = worst.max(viol);
            if viol > threshold {
                report.details.push((n, ri, viol));
                report.verdict = false;
            }
        }
        report.max_violation.push(worst);
        report.thresholds.push(threshold);
    }
    Ok(report)
}

/// Linear-case compatibility: checks `B·(P^k Y^{x,l})(0) = 0` directly on the
/// coefficient sequences. Errors on a nonempty nonlinearity table; agrees with
/// [`compat_check`] where both apply.
pub fn linear_compat_check<S: Scalar>(
    spec: &PdeSpec<S>,
    y0: &AnalyticState<S>,
    n_max: usize,
    tol: f64,
) -> Result<CompatReport, EngineError> {
    if !spec.nonlinearity.is_empty() {
        return Err(EngineError::NonlinearTable);
    }
    if spec.num_boundary_rows() == 0 {
        return Ok(CompatReport::trivially_pass(n_max));
    }
    let (n_ord, m_ord) = (spec.n_order, spec.m_order);
    if y0.n_components() != n_ord {
        return Err(EngineError::ComponentMismatch {
            found: y0.n_components(),
            want: n_ord,
        });
    }
    // Apply P coefficientwise: (P a)_i = Σ_j ζ_j a_{i+j}.
    let apply_p = |a: &[S]| -> Vec<S> {
        let out_len = a.len().saturating_sub(m_ord);
        (0..out_len)
            .map(|i| {
                let mut acc = S::zero();
                for (j, z) in spec.zeta.iter().enumerate() {
                    if z.is_zero() {
                        continue;
                    }
                    acc = acc + z.clone() * a[i + j].clone();
                }
                acc
            })
            .collect()
    };
    let mut report = CompatReport {
        max_violation: vec![0.0; n_max + 1],
        thresholds: vec![0.0; n_max + 1],
        n_checked: n_max,
        verdict: true,
        details: Vec::new(),
    };
    // Amplitude scale for float thresholds: largest input coefficient magnitude.
    let input_scale: f64 = y0
        .components
        .iter()
        .flatten()
        .map(Scalar::abs_f64)
        .fold(0.0, f64::max);
    for (l, comp) in y0.components.iter().enumerate() {
        let mut seq = comp.clone();
        let mut power = 0usize;
        loop {
            let n = n_ord * power + l;
            if n > n_max {
                break;
            }
            if seq.len() < m_ord {
                return Err(EngineError::InsufficientInput {
                    component: l,
                    needed: m_ord * (power + 1) - 1,
                    got: comp.len() - 1,
                });
            }
            let threshold = if S::EXACT {
                0.0
            } else {
                // Crude envelope: ‖ζ‖₁^power times the input scale.
                let z1: f64 = spec.zeta.iter().map(Scalar::abs_f64).sum();
                tol * input_scale * z1.powi(power as i32).max(1.0)
            };
            let mut worst = 0.0f64;
            for (ri, brow) in spec.boundary.iter().enumerate() {
                let mut acc = S::zero();
                for k in 0..m_ord {
                    acc = acc + brow[k].clone() * seq[k].clone();
                }
                let viol = acc.abs_f64();
                worst = worst.max(viol);
                if viol > threshold {
                    report.details.push((n, ri, viol));
                    report.verdict = false;
                }
            }
            report.max_violation[n] = report.max_violation[n].max(worst);
            report.thresholds[n] = threshold;
            seq = apply_p(&seq);
            power += 1;
        }
    }
    Ok(report)
}

/// Requested symmetry class for [`parity_compat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    /// Odd data: all even-order coefficients must vanish.
    Odd,
    /// Even data: all odd-order coefficients must vanish.
    Even,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParityReport {
    pub parity: Parity,
    pub pass: bool,
    /// `(component, coefficient order, magnitude)` of offending coefficients.
    pub offenders: Vec<(usize, usize, f64)>,
}

/// Verify the preset satisfies the parity symmetry hypotheses (even `M`,
/// even-derivative `P`, sign condition on every nonlinear term), then decide
/// whether the state has the required parity.
pub fn parity_compat<S: Scalar>(
    spec: &PdeSpec<S>,
    y0: &AnalyticState<S>,
    parity: Parity,
    k_max: usize,
) -> Result<ParityReport, EngineError> {
    if spec.m_order % 2 != 0 {
        return Err(EngineError::NotSymmetric(format!(
            "M = {} is odd",
            spec.m_order
        )));
    }
    for (j, z) in spec.zeta.iter().enumerate() {
        if j % 2 == 1 && !z.is_zero() {
            return Err(EngineError::NotSymmetric(format!(
                "operator has an odd derivative term zeta_{j}"
            )));
        }
    }
    for t in spec.nonlinearity.terms() {
        let weighted: u32 = t
            .p
            .iter()
            .zip(t.pbar.iter())
            .enumerate()
            .map(|(i, (a, b))| {
                let shift = match parity {
                    Parity::Odd => i as u32 + 1,
                    Parity::Even => i as u32,
                };
                shift * (a + b)
            })
            .sum();
        let total = t.r + weighted;
        let ok = match parity {
            Parity::Odd => total % 2 == 1,
            Parity::Even => total % 2 == 0,
        };
        if !ok {
            return Err(EngineError::NotSymmetric(format!(
                "term p={:?} pbar={:?} r={} breaks the {:?}-parity sign condition",
                t.p, t.pbar, t.r, parity
            )));
        }
    }
    let mut offenders = Vec::new();
    for (l, comp) in y0.components.iter().enumerate() {
        for (order, a) in comp.iter().take(k_max + 1).enumerate() {
            let forbidden = match parity {
                Parity::Odd => order % 2 == 0,
                Parity::Even => order % 2 == 1,
            };
            if forbidden && !a.is_zero() {
                offenders.push((l, order, a.abs_f64()));
            }
        }
    }
    Ok(ParityReport {
        parity,
        pass: offenders.is_empty(),
        offenders,
    })
}
