//! Truncated 1D Taylor arithmetic on `f64` coefficients.
//!
//! A [`Taylor1`] holds the coefficients `c_i = f^{(i)}(t_0)/i!` of a function at
//! a point, up to a fixed order. Composing the closed forms of the Gevrey
//! cutoff through these recurrences differentiates them exactly (up to
//! rounding): no finite differences anywhere, which matters because high-order
//! finite differences of flat functions are numerically meaningless.

/// Taylor coefficients `c_0 … c_q` of a scalar function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor1 {
    pub coeffs: Vec<f64>,
}

impl Taylor1 {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Taylor1 { coeffs }
    }

    /// The identity function `t ↦ t` expanded at `t0`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = t0;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Taylor1 { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// q-th derivative value: `q! · c_q`.
    pub fn derivative(&self, q: usize) -> f64 {
        if q >= self.coeffs.len() {
            return 0.0;
        }
        let mut fact = 1.0f64;
        for i in 1..=q {
            fact *= i as f64;
        }
        fact * self.coeffs[q]
    }

    pub fn scale(&self, s: f64) -> Self {
        Taylor1 {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        Taylor1 {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        Taylor1 {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order();
        let mut coeffs = vec![0.0; n + 1];
        for i in 0..=n {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Taylor1 { coeffs }
    }

    /// Series division; requires a nonzero constant term in the divisor.
    pub fn div(&self, other: &Self) -> Self {
        let n = self.order();
        assert!(other.coeffs[0] != 0.0, "division by series with zero constant term");
        let mut q = vec![0.0; n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q[k] = acc / other.coeffs[0];
        }
        Taylor1 { coeffs: q }
    }

    /// `exp` of the series via the standard recurrence
    /// `e_k = (1/k) Σ_{j=1}^{k} j g_j e_{k−j}`.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.coeffs[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Taylor1 { coeffs: e }
    }

    /// `(t0 + ε)^α` expanded by the binomial series; requires `t0 > 0`.
    pub fn real_power_of_variable(t0: f64, alpha: f64, order: usize) -> Self {
        assert!(t0 > 0.0);
        let mut coeffs = vec![0.0; order + 1];
        // c_k = C(α, k) t0^{α−k}
        let mut binom = 1.0f64;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = binom * t0.powf(alpha - k as f64);
            binom *= (alpha - k as f64) / (k as f64 + 1.0);
        }
        Taylor1 { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_variable() {
        let t = Taylor1::variable(0.0, 6);
        let e = t.exp();
        let mut fact = 1.0;
        for k in 0..=6 {
            if k > 0 {
                fact *= k as f64;
            }
            assert_relative_eq!(e.coeffs[k], 1.0 / fact, max_relative = 1e-14);
        }
        assert_relative_eq!(e.derivative(4), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn division_by_self_is_exactly_one() {
        let g = Taylor1 {
            coeffs: vec![0.3, -1.25, 4.0, 0.5, -2.0],
        };
        let one = g.div(&g);
        assert_eq!(one.coeffs[0], 1.0);
        for c in &one.coeffs[1..] {
            assert_eq!(*c, 0.0);
        }
    }

    #[test]
    fn power_series_derivatives() {
        // d/dt t^{-2} at t0=2: -2 t^{-3} = -0.25
        let p = Taylor1::real_power_of_variable(2.0, -2.0, 4);
        assert_relative_eq!(p.derivative(0), 0.25, max_relative = 1e-14);
        assert_relative_eq!(p.derivative(1), -0.25, max_relative = 1e-14);
        assert_relative_eq!(p.derivative(2), 6.0 / 16.0, max_relative = 1e-14);
    }
}
