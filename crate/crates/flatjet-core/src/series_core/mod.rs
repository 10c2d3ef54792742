//! Exact and floating jet/series algebra.
//!
//! The central object is [`Jet2D`]: the truncated array `e[n][k]` of mixed
//! derivatives `∂_t^n ∂_x^k y` at a point. Entries live in any [`Scalar`]
//! backend; rows may be ragged, since sideways completion fills a staircase
//! rather than a rectangle, and absent entries are represented by absence, not
//! by zero-filling.

pub mod factorials;
pub mod mpoly;
pub mod taylor1;

pub use factorials::{leibniz_constant, log_envelope, log_factorial_ratio};
pub use mpoly::MultiPoly;
pub use taylor1::Taylor1;

use crate::scalar::Scalar;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum JetError {
    #[error("jets anchored at different points")]
    PointMismatch,
    #[error("jets have different truncation orders ({0}×{1} vs {2}×{3})")]
    TruncationMismatch(usize, usize, usize, usize),
    #[error("nonlinearity table is over {expected} arguments but {found} jets were supplied")]
    ArityMismatch { expected: usize, found: usize },
    #[error("entry ({0},{1}) is outside the stored region")]
    AbsentEntry(usize, usize),
}

/// Truncated 2D jet `e[n][k] = ∂_t^n ∂_x^k y (x0, t0)`.
///
/// Row `n` stores entries for `k < rows[n].len()`; a full jet is rectangular,
/// a completed jet is a staircase. `n_max`/`k_max` give the nominal bounding
/// box. Exactness is a property of the scalar type (`S::EXACT`).
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2D<S: Scalar> {
    rows: Vec<Vec<S>>,
    k_max: usize,
    x0: S,
    t0: f64,
}

impl<S: Scalar> Jet2D<S> {
    pub fn zeros(n_max: usize, k_max: usize, x0: S, t0: f64) -> Self {
        Jet2D {
            rows: vec![vec![S::zero(); k_max + 1]; n_max + 1],
            k_max,
            x0,
            t0,
        }
    }

    /// Build from explicit (possibly ragged) rows.
    pub fn from_rows(rows: Vec<Vec<S>>, k_max: usize, x0: S, t0: f64) -> Self {
        assert!(!rows.is_empty());
        Jet2D { rows, k_max, x0, t0 }
    }

    /// Jet of the constant function `c` (single entry `e_0^0`), on the given box.
    pub fn constant(c: S, n_max: usize, k_max: usize, x0: S, t0: f64) -> Self {
        let mut jet = Self::zeros(n_max, k_max, x0, t0);
        jet.rows[0][0] = c;
        jet
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn x0(&self) -> &S {
        &self.x0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn is_exact(&self) -> bool {
        S::EXACT
    }

    /// Number of stored entries in row `n` (0 when the row itself is absent).
    pub fn row_len(&self, n: usize) -> usize {
        self.rows.get(n).map_or(0, |r| r.len())
    }

    pub fn entry(&self, n: usize, k: usize) -> Option<&S> {
        self.rows.get(n).and_then(|r| r.get(k))
    }

    pub fn get(&self, n: usize, k: usize) -> Result<&S, JetError> {
        self.entry(n, k).ok_or(JetError::AbsentEntry(n, k))
    }

    pub fn set(&mut self, n: usize, k: usize, v: S) {
        self.rows[n][k] = v;
    }

    /// Grow row `n` by one entry.
    pub fn push_entry(&mut self, n: usize, v: S) {
        self.rows[n].push(v);
    }

    /// True when every row spans the full `k_max` box.
    pub fn is_rectangular(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.k_max + 1)
    }

    /// Entries outside the stored staircase but inside the bounding box.
    pub fn absent_set(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (n, row) in self.rows.iter().enumerate() {
            for k in row.len()..=self.k_max {
                out.push((n, k));
            }
        }
        out
    }

    /// Jet of `∂_x^i y` obtained by shifting columns left by `i`.
    pub fn x_shift(&self, i: usize) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().skip(i).cloned().collect::<Vec<_>>())
            .collect();
        Jet2D {
            rows,
            k_max: self.k_max.saturating_sub(i),
            x0: self.x0.clone(),
            t0: self.t0,
        }
    }

    /// Entrywise complex conjugate (jet of `ȳ`).
    pub fn conj(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(Scalar::conj).collect())
            .collect();
        Jet2D {
            rows,
            k_max: self.k_max,
            x0: self.x0.conj(),
            t0: self.t0,
        }
    }

    /// Restrict to the box `n ≤ n_max`, `k ≤ k_max` (rows clipped, not padded).
    pub fn truncate(&self, n_max: usize, k_max: usize) -> Self {
        let rows = self
            .rows
            .iter()
            .take(n_max + 1)
            .map(|r| r.iter().take(k_max + 1).cloned().collect())
            .collect();
        Jet2D {
            rows,
            k_max,
            x0: self.x0.clone(),
            t0: self.t0,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| x.clone() + y.clone())
                    .collect()
            })
            .collect();
        Ok(Jet2D {
            rows,
            k_max: self.k_max,
            x0: self.x0.clone(),
            t0: self.t0,
        })
    }

    pub fn scale(&self, s: &S) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.clone() * s.clone()).collect())
            .collect();
        Jet2D {
            rows,
            k_max: self.k_max,
            x0: self.x0.clone(),
            t0: self.t0,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), JetError> {
        if self.x0 != other.x0 || self.t0 != other.t0 {
            return Err(JetError::PointMismatch);
        }
        if self.n_max() != other.n_max() || self.k_max != other.k_max {
            return Err(JetError::TruncationMismatch(
                self.n_max(),
                self.k_max,
                other.n_max(),
                other.k_max,
            ));
        }
        Ok(())
    }

    /// Largest `C'` with `|e_n^k| ≤ C' (λn+k)!/(R^k R'^{λn} (λn+k+1)^μ)` over
    /// stored entries (log-domain evaluation).
    pub fn bound_constant(&self, params: &JetBoundParams) -> f64 {
        let mut cfit = 0.0f64;
        for (n, row) in self.rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let a = v.abs_f64();
                if a == 0.0 {
                    continue;
                }
                let log_ratio = a.ln()
                    - log_envelope(n as u32, k as u32, params.lambda, params.r, params.rp, params.mu);
                cfit = cfit.max(log_ratio.exp());
            }
        }
        cfit
    }

    /// CSV matrix (row per `n`, column per `k`); absent entries are empty fields.
    pub fn to_csv(&self, part: CsvPart) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut first = true;
            for k in 0..=self.k_max {
                if !first {
                    out.push(',');
                }
                first = false;
                if let Some(v) = row.get(k) {
                    let x = match part {
                        CsvPart::Re => v.re_f64(),
                        CsvPart::Im => v.im_f64(),
                        CsvPart::Abs => v.abs_f64(),
                    };
                    out.push_str(&format!("{x:e}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Which component of the entries a CSV export carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CsvPart {
    Re,
    Im,
    Abs,
}

/// Parameters of the jet bound envelope `(λn+k)!/(R^k R'^{λn} (λn+k+1)^μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetBoundParams {
    /// Space radius `R > 0`.
    pub r: f64,
    /// Time radius `R' > 0`.
    pub rp: f64,
    /// Polynomial decay exponent `μ`.
    pub mu: f64,
    /// Anisotropy ratio `λ = M/N > 1`.
    pub lambda: f64,
    /// Smallest certified bound constant (0 until certified).
    pub cfit: f64,
}

impl JetBoundParams {
    pub fn new(r: f64, rp: f64, mu: f64, lambda: f64) -> Self {
        assert!(r > 0.0 && rp > 0.0, "radii must be positive");
        assert!(lambda > 1.0, "anisotropy ratio must exceed 1");
        JetBoundParams {
            r,
            rp,
            mu,
            lambda,
            cfit: 0.0,
        }
    }
}

/// The 2D Leibniz map: `π(a, b)[n][k] = Σ_{i≤n} Σ_{j≤k} C(n,i) C(k,j) a[i][j] b[n−i][k−j]`.
///
/// Requires matching points and truncation boxes. On ragged inputs the result
/// row `n` extends as far as every contributing row of both factors does.
pub fn jet_product<S: Scalar>(a: &Jet2D<S>, b: &Jet2D<S>) -> Result<Jet2D<S>, JetError> {
    a.check_compatible(b)?;
    let n_max = a.n_max();
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut limit = usize::MAX;
        for i in 0..=n {
            limit = limit.min(a.row_len(i)).min(b.row_len(i));
        }
        let len = if limit == usize::MAX { 0 } else { limit };
        rows.push(product_row(a, b, n, len));
    }
    Ok(Jet2D {
        rows,
        k_max: a.k_max,
        x0: a.x0.clone(),
        t0: a.t0,
    })
}

/// Row `n` of `π(a, b)` up to `len` entries, assuming the needed entries exist.
pub(crate) fn product_row<S: Scalar>(a: &Jet2D<S>, b: &Jet2D<S>, n: usize, len: usize) -> Vec<S> {
    let mut row = vec![S::zero(); len];
    for i in 0..=n {
        let cn = S::from_binomial(n as u32, i as u32);
        let ra = &a.rows[i];
        let rb = &b.rows[n - i];
        for (k, slot) in row.iter_mut().enumerate() {
            let mut acc = S::zero();
            for j in 0..=k {
                let v = ra[j].clone() * rb[k - j].clone();
                acc = acc + v * S::from_binomial(k as u32, j as u32);
            }
            *slot = slot.clone() + acc * cn.clone();
        }
    }
    row
}

/// `jet^p` by repeated Leibniz products; `jet^0` is the constant-1 jet on the
/// same box.
pub fn jet_pow<S: Scalar>(jet: &Jet2D<S>, p: u32) -> Result<Jet2D<S>, JetError> {
    if p == 0 {
        // Constant-1 jet matching the ragged shape, so later products do not
        // over-extend past entries the base jet lacks.
        let rows: Vec<Vec<S>> = jet.rows.iter().map(|r| vec![S::zero(); r.len()]).collect();
        let mut one = Jet2D {
            rows,
            k_max: jet.k_max,
            x0: jet.x0.clone(),
            t0: jet.t0,
        };
        if !one.rows[0].is_empty() {
            one.rows[0][0] = S::one();
        }
        return Ok(one);
    }
    let mut acc = jet.clone();
    for _ in 1..p {
        acc = jet_product(&acc, jet)?;
    }
    Ok(acc)
}

/// 2D jet of `f(x, y, ∂_x y, …, ∂_x^{M−1} y)` from the argument jets.
///
/// `jets[i]` must be the jet of `∂_x^i y` at a common point, all on the same
/// truncation box. The `x`-dependence of each `A_p(x)` enters through its
/// Taylor coefficients re-expanded at the jets' base point; conjugate powers
/// multiply by the conjugated jets.
pub fn jet_poly_apply<S: Scalar>(
    table: &crate::pde_model::NonlinearityTable<S>,
    jets: &[Jet2D<S>],
) -> Result<Jet2D<S>, JetError> {
    if table.arity() != 0 && jets.len() != table.arity() {
        return Err(JetError::ArityMismatch {
            expected: table.arity(),
            found: jets.len(),
        });
    }
    assert!(!jets.is_empty(), "need at least one argument jet for the shape");
    let shape = &jets[0];
    for j in jets.iter().skip(1) {
        shape.check_compatible(j)?;
    }
    let (n_max, k_max) = (shape.n_max(), shape.k_max());
    let (x0, t0) = (shape.x0.clone(), shape.t0);

    // Group monomials sharing (p, pbar): they share one A_{p}(x) factor.
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(Vec<u32>, Vec<u32>), Vec<(u32, S)>> = BTreeMap::new();
    for term in table.terms() {
        groups
            .entry((term.p.clone(), term.pbar.clone()))
            .or_default()
            .push((term.r, term.a.clone()));
    }

    let mut acc = Jet2D::zeros(n_max, k_max, x0.clone(), t0);
    for ((p, pbar), coeffs) in groups {
        // Jet of A_p at x0: row 0 only, ∂_x^k A(x0) = Σ_{r≥k} r!/(r−k)! a_r x0^{r−k}.
        let mut a_jet = Jet2D::zeros(n_max, k_max, x0.clone(), t0);
        for (r, a) in &coeffs {
            let r = *r as usize;
            for k in 0..=k_max.min(r) {
                // r!/(r−k)! = falling factorial
                let mut fall = S::one();
                for i in 0..k {
                    fall = fall * S::from_i64((r - i) as i64);
                }
                let mut xpow = S::one();
                for _ in 0..(r - k) {
                    xpow = xpow * x0.clone();
                }
                let cur = a_jet.get(0, k).unwrap().clone();
                a_jet.set(0, k, cur + a.clone() * fall * xpow);
            }
        }
        let mut prod = a_jet;
        for (i, &pw) in p.iter().enumerate() {
            if pw > 0 {
                prod = jet_product(&prod, &jet_pow(&jets[i], pw)?)?;
            }
        }
        for (i, &pw) in pbar.iter().enumerate() {
            if pw > 0 {
                prod = jet_product(&prod, &jet_pow(&jets[i].conj(), pw)?)?;
            }
        }
        acc = acc.add(&prod)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{CRational, Complex64, Rational, Scalar};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn jet_x<S: Scalar>(n_max: usize, k_max: usize) -> Jet2D<S> {
        // The function y(x) = x at x0 = 0: only e_0^1 = 1.
        let mut j = Jet2D::zeros(n_max, k_max, S::zero(), 0.0);
        j.set(0, 1, S::one());
        j
    }

    #[test]
    fn constant_multiplier() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut b: Jet2D<f64> = Jet2D::zeros(3, 4, 0.0, 0.0);
        for n in 0..=3 {
            for k in 0..=4 {
                b.set(n, k, rng.gen_range(-1.0..1.0));
            }
        }
        let two = Jet2D::constant(2.0, 3, 4, 0.0, 0.0);
        let prod = jet_product(&two, &b).unwrap();
        for n in 0..=3 {
            for k in 0..=4 {
                assert_eq!(*prod.entry(n, k).unwrap(), 2.0 * b.entry(n, k).unwrap());
            }
        }
    }

    #[test]
    fn x_times_x_is_x_squared() {
        let a: Jet2D<Rational> = jet_x(2, 4);
        let p = jet_product(&a, &a).unwrap();
        for n in 0..=2 {
            for k in 0..=4 {
                let expected = if n == 0 && k == 2 {
                    Rational::from_i64(2)
                } else {
                    Rational::from_i64(0)
                };
                assert_eq!(*p.entry(n, k).unwrap(), expected);
            }
        }
    }

    #[test]
    fn product_commutative_associative_exact() {
        let mut rng = StdRng::seed_from_u64(11);
        let mut mk = || {
            let mut j: Jet2D<Rational> = Jet2D::zeros(3, 3, Rational::from_i64(0), 0.0);
            for n in 0..=3 {
                for k in 0..=3 {
                    j.set(n, k, Rational::from_ratio(rng.gen_range(-9..9), rng.gen_range(1..7)));
                }
            }
            j
        };
        let (a, b, c) = (mk(), mk(), mk());
        assert_eq!(jet_product(&a, &b).unwrap(), jet_product(&b, &a).unwrap());
        let ab_c = jet_product(&jet_product(&a, &b).unwrap(), &c).unwrap();
        let a_bc = jet_product(&a, &jet_product(&b, &c).unwrap()).unwrap();
        assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn product_commutative_float_tolerance() {
        let mut rng = StdRng::seed_from_u64(13);
        let mut mk = || {
            let mut j: Jet2D<f64> = Jet2D::zeros(4, 4, 0.0, 0.0);
            for n in 0..=4 {
                for k in 0..=4 {
                    j.set(n, k, rng.gen_range(-1.0..1.0));
                }
            }
            j
        };
        let (a, b, c) = (mk(), mk(), mk());
        let ab_c = jet_product(&jet_product(&a, &b).unwrap(), &c).unwrap();
        let a_bc = jet_product(&a, &jet_product(&b, &c).unwrap()).unwrap();
        for n in 0..=4 {
            for k in 0..=4 {
                let x = ab_c.entry(n, k).unwrap();
                let y = a_bc.entry(n, k).unwrap();
                assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0));
            }
        }
    }

    #[test]
    fn constant_one_is_identity() {
        let a: Jet2D<Rational> = jet_x(3, 3);
        let one = Jet2D::constant(Rational::from_i64(1), 3, 3, Rational::from_i64(0), 0.0);
        assert_eq!(jet_product(&one, &a).unwrap(), a);
    }

    #[test]
    fn mismatch_errors() {
        let a: Jet2D<f64> = Jet2D::zeros(2, 2, 0.0, 0.0);
        let b: Jet2D<f64> = Jet2D::zeros(2, 3, 0.0, 0.0);
        assert!(matches!(
            jet_product(&a, &b),
            Err(JetError::TruncationMismatch(..))
        ));
        let c: Jet2D<f64> = Jet2D::zeros(2, 2, 0.5, 0.0);
        assert_eq!(jet_product(&a, &c), Err(JetError::PointMismatch));
    }

    #[test]
    fn vandermonde_identity_lemma() {
        // Σ_{j+p=a} C(k,j) C(q,p) = C(k+q, a) for all k, q ≤ 20, a ≤ k+q.
        for k in 0..=20u32 {
            for q in 0..=20u32 {
                for a in 0..=(k + q) {
                    let mut sum: u128 = 0;
                    for j in 0..=k.min(a) {
                        let p = a - j;
                        if p <= q {
                            sum += factorials::binomial_u128(k, j) * factorials::binomial_u128(q, p);
                        }
                    }
                    assert_eq!(sum, factorials::binomial_u128(k + q, a), "k={k} q={q} a={a}");
                }
            }
        }
    }

    #[test]
    fn binomial_product_inequality_lemma() {
        // C(k,j)·C(n,i) ≤ λ·C(k+λn, j+λi), generalized binomials via log-Gamma.
        use factorials::log_binomial_general;
        for lambda in [1.5f64, 2.0, 3.0, 4.0] {
            for k in (0..=15u32).step_by(3) {
                for n in (0..=15u32).step_by(3) {
                    for j in 0..=k {
                        for i in 0..=n {
                            let lhs = log_binomial_general(k as f64, j as f64)
                                + log_binomial_general(n as f64, i as f64);
                            let rhs = lambda.ln()
                                + log_binomial_general(
                                    k as f64 + lambda * n as f64,
                                    j as f64 + lambda * i as f64,
                                );
                            assert!(
                                lhs <= rhs + 1e-10,
                                "lambda={lambda} k={k} j={j} n={n} i={i}"
                            );
                        }
                    }
                }
            }
        }
    }

    /// Random jets satisfying the Leibniz-lemma envelope keep it under products,
    /// with constant `K_{q,μ} C_1 C_2`.
    #[test]
    fn product_preserves_leibniz_bound() {
        let (lambda, q, mu, r, rp) = (2.0f64, 1u32, 4.0f64, 8.0f64, 8.0f64);
        let kqmu = leibniz_constant(lambda, q, mu);
        let mut rng = StdRng::seed_from_u64(23);
        for trial in 0..20 {
            let (c1, c2) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
            let mk = |c: f64, rng: &mut StdRng| {
                let mut j: Jet2D<f64> = Jet2D::zeros(6, 6, 0.0, 0.0);
                for n in 0..=6u32 {
                    for k in 0..=6u32 {
                        let env =
                            factorials::log_envelope_shifted(n, k, q, lambda, r, rp, mu).exp();
                        j.set(n as usize, k as usize, c * rng.gen_range(-1.0..1.0) * env);
                    }
                }
                j
            };
            let a = mk(c1, &mut rng);
            let b = mk(c2, &mut rng);
            let p = jet_product(&a, &b).unwrap();
            for n in 0..=6u32 {
                for k in 0..=6u32 {
                    let env = factorials::log_envelope_shifted(n, k, q, lambda, r, rp, mu).exp();
                    let bound = kqmu * c1 * c2 * env;
                    let v = p.entry(n as usize, k as usize).unwrap().abs();
                    assert!(v <= bound * (1.0 + 1e-12), "trial {trial} n={n} k={k}: {v} > {bound}");
                }
            }
        }
    }

    #[test]
    fn complex_conjugate_product() {
        // (1+i)^2 (1-i) = 2 + 2i on constant jets, both float and exact complex.
        let zf = Complex64::new(1.0, 1.0);
        let jf: Jet2D<Complex64> = Jet2D::constant(zf, 1, 1, Complex64::new(0.0, 0.0), 0.0);
        let sq = jet_product(&jf, &jf).unwrap();
        let triple = jet_product(&sq, &jf.conj()).unwrap();
        assert_eq!(*triple.entry(0, 0).unwrap(), Complex64::new(2.0, 2.0));

        let ze = CRational::try_from_f64_pair(1.0, 1.0).unwrap();
        let je: Jet2D<CRational> = Jet2D::constant(ze, 1, 1, CRational::from_i64(0), 0.0);
        let sq = jet_product(&je, &je).unwrap();
        let triple = jet_product(&sq, &je.conj()).unwrap();
        assert_eq!(triple.entry(0, 0).unwrap().re_f64(), 2.0);
        assert_eq!(triple.entry(0, 0).unwrap().im_f64(), 2.0);
    }
}
