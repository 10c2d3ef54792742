//! Sparse multivariate polynomials with exact coefficients.
//!
//! Monomials are stored as trimmed exponent vectors in a `BTreeMap`, which keeps
//! arithmetic deterministic. This backs the symbolic compatibility polynomials
//! of the KdV preset; typical sizes stay in the hundreds of monomials.

use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// Polynomial in variables `y_0, y_1, …` over the scalar `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<S: Scalar> {
    /// Map from trimmed exponent vector to coefficient. Zero coefficients are
    /// never stored; the zero polynomial is the empty map.
    terms: BTreeMap<Vec<u32>, S>,
}

fn trim(mut exps: Vec<u32>) -> Vec<u32> {
    while exps.last() == Some(&0) {
        exps.pop();
    }
    exps
}

impl<S: Scalar> MultiPoly<S> {
    pub fn zero() -> Self {
        MultiPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![], c);
        p
    }

    /// The monomial `y_i`.
    pub fn variable(i: usize) -> Self {
        let mut exps = vec![0u32; i + 1];
        exps[i] = 1;
        let mut p = Self::zero();
        p.add_term(exps, S::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest variable index that occurs, or `None` for constants.
    pub fn max_variable(&self) -> Option<usize> {
        self.terms
            .keys()
            .filter(|e| !e.is_empty())
            .map(|e| e.len() - 1)
            .max()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let exps = trim(exps);
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = vec![0u32; ea.len().max(eb.len())];
                for (i, v) in ea.iter().enumerate() {
                    e[i] += v;
                }
                for (i, v) in eb.iter().enumerate() {
                    e[i] += v;
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to `y_i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let p = e.get(i).copied().unwrap_or(0);
            if p == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.add_term(ne, c.clone() * S::from_i64(p as i64));
        }
        out
    }

    pub fn eval(&self, values: &[S]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, p) in e.iter().enumerate() {
                for _ in 0..*p {
                    term = term * values[i].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn arithmetic_and_partials() {
        // H = y_1 + y_0 y_1
        let h: MultiPoly<Rational> = MultiPoly::variable(1).add(&MultiPoly::variable(0).mul(&MultiPoly::variable(1)));
        assert_eq!(h.num_terms(), 2);
        let d0 = h.partial(0);
        assert_eq!(d0, MultiPoly::variable(1));
        let d1 = h.partial(1);
        // ∂H/∂y_1 = 1 + y_0
        let expected = MultiPoly::constant(r(1)).add(&MultiPoly::variable(0));
        assert_eq!(d1, expected);
        assert_eq!(h.eval(&[r(2), r(3)]), r(9));
    }

    #[test]
    fn cancellation_keeps_map_trimmed() {
        let p: MultiPoly<Rational> = MultiPoly::variable(2);
        let q = p.scale(&r(-1));
        assert!(p.add(&q).is_zero());
    }
}
