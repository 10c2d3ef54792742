//! The equation data model.
//!
//! A [`PdeSpec`] carries the operator `P = Σ ζ_j ∂_x^j`, the nonlinearity as a
//! finite coefficient table with certified analyticity bounds, and the boundary
//! matrix `B` whose rows are the homogeneous conditions at `x = 0`. Presets for
//! the worked equations (KdV, Boussinesq, Ginzburg–Landau, Kuramoto–Sivashinsky,
//! heat variants) construct validated specs.

pub mod io;
pub mod presets;

pub use io::{spec_from_json, spec_to_json, state_from_json, SpecJson};
pub use presets::{make_preset, Preset};

use crate::scalar::Scalar;
use crate::series_core::factorials::log_factorial;
use num::rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("leading coefficient zeta_M must be nonzero")]
    ZeroLeadingCoefficient,
    #[error("orders must satisfy M > N >= 1 (got N={n}, M={m})")]
    BadOrders { n: usize, m: usize },
    #[error("zeta has {found} coefficients but M={m} requires {want}")]
    BadZetaLength { found: usize, m: usize, want: usize },
    #[error("boundary matrix has {rows} rows but at most M={m} are allowed")]
    TooManyBoundaryRows { rows: usize, m: usize },
    #[error("boundary matrix rows are linearly dependent")]
    RankDeficientBoundary,
    #[error("boundary matrix row has {found} columns, expected {want}")]
    BadBoundaryWidth { found: usize, want: usize },
    #[error("nonlinearity term violates the analyticity bound: |a|={a} > {bound} for |p|+|pbar|={deg}, r={r}")]
    TableBoundViolated { a: f64, bound: f64, deg: u32, r: u32 },
    #[error("nonlinearity term with |p|+|pbar|=0 is forbidden (f(x,0)=0)")]
    ConstantTerm,
    #[error("conjugate powers require a complex spec")]
    ConjugateInRealSpec,
    #[error("nonlinearity term indexes argument {index} but only y_0..y_{max} exist")]
    ArgumentOutOfRange { index: usize, max: usize },
    #[error("analyticity bound constants must satisfy C_a > 0, b > 4, b2 > 4")]
    BadBoundConstants,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{0}` requires a complex scalar backend")]
    NeedsComplexBackend(String),
    #[error("preset parameter not representable in this scalar backend: {0}")]
    UnrepresentableParameter(String),
    #[error("empty coefficient sequences")]
    EmptyState,
    #[error("state has {found} components, spec requires N={want}")]
    ComponentCountMismatch { found: usize, want: usize },
}

/// One monomial `a · y^p ȳ^pbar x^r` of the nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerm<S: Scalar> {
    /// Powers of `y_0 … y_{M−1}`.
    pub p: Vec<u32>,
    /// Powers of the conjugates `ȳ_0 … ȳ_{M−1}` (all zero for real specs).
    pub pbar: Vec<u32>,
    /// Power of `x`.
    pub r: u32,
    /// Coefficient `a_{p,p̄,r}`.
    pub a: S,
}

impl<S: Scalar> NonlinearTerm<S> {
    pub fn total_degree(&self) -> u32 {
        self.p.iter().sum::<u32>() + self.pbar.iter().sum::<u32>()
    }
}

/// Finite nonlinearity table with its certified analyticity bound data
/// `|a_{p,p̄,r}| ≤ C_a / (b^{|p|+|p̄|} b2^r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityTable<S: Scalar> {
    terms: Vec<NonlinearTerm<S>>,
    /// Number of arguments `y_0 … y_{M−1}` the table closes over (0 = empty table).
    arity: usize,
    /// Amplitude constant `C_a`.
    pub c_a: f64,
    /// Argument radius `b > 4`.
    pub b: f64,
    /// `x` radius `b2 > 4`.
    pub b2: f64,
}

impl<S: Scalar> NonlinearityTable<S> {
    /// Empty table (linear PDE); bound constants are still required to be valid.
    pub fn empty() -> Self {
        NonlinearityTable {
            terms: Vec::new(),
            arity: 0,
            c_a: 1.0,
            b: 8.0,
            b2: 8.0,
        }
    }

    pub fn new(
        m: usize,
        terms: Vec<NonlinearTerm<S>>,
        c_a: f64,
        b: f64,
        b2: f64,
        complex: bool,
    ) -> Result<Self, SpecError> {
        if !(c_a > 0.0 && b > 4.0 && b2 > 4.0) {
            return Err(SpecError::BadBoundConstants);
        }
        for t in &terms {
            if t.p.len() > m || t.pbar.len() > m {
                let index = t.p.len().max(t.pbar.len()) - 1;
                return Err(SpecError::ArgumentOutOfRange { index, max: m - 1 });
            }
            let deg = t.total_degree();
            if deg == 0 {
                return Err(SpecError::ConstantTerm);
            }
            if !complex && t.pbar.iter().any(|&q| q > 0) {
                return Err(SpecError::ConjugateInRealSpec);
            }
            let bound = c_a / (b.powi(deg as i32) * b2.powi(t.r as i32));
            let a = t.a.abs_f64();
            if a > bound * (1.0 + 1e-12) {
                return Err(SpecError::TableBoundViolated {
                    a,
                    bound,
                    deg,
                    r: t.r,
                });
            }
        }
        let mut terms = terms;
        for t in &mut terms {
            t.p.resize(m, 0);
            t.pbar.resize(m, 0);
        }
        Ok(NonlinearityTable {
            terms,
            arity: m,
            c_a,
            b,
            b2,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of jet arguments the table expects (0 when empty).
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[NonlinearTerm<S>] {
        &self.terms
    }

    /// Pointwise value `f(x, y_0, …, y_{M−1})`.
    pub fn eval(&self, x: &S, args: &[S]) -> S {
        let mut acc = S::zero();
        for t in &self.terms {
            let mut v = t.a.clone();
            for _ in 0..t.r {
                v = v * x.clone();
            }
            for (i, &pw) in t.p.iter().enumerate() {
                for _ in 0..pw {
                    v = v * args[i].clone();
                }
            }
            for (i, &pw) in t.pbar.iter().enumerate() {
                let c = args[i].conj();
                for _ in 0..pw {
                    v = v * c.clone();
                }
            }
            acc = acc + v;
        }
        acc
    }
}

/// Validated PDE `∂_t^N y = Σ_{j≤M} ζ_j ∂_x^j y + f(x, y, …, ∂_x^{M−1} y)`,
/// with boundary conditions `B·(y, ∂_x y, …, ∂_x^{M−1} y)(0, t) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSpec<S: Scalar> {
    /// Time order `N ≥ 1`.
    pub n_order: usize,
    /// Space order `M > N`.
    pub m_order: usize,
    /// Operator coefficients `ζ_0 … ζ_M`.
    pub zeta: Vec<S>,
    pub nonlinearity: NonlinearityTable<S>,
    /// Row-reduced boundary matrix, `v × M` with `v ≤ M`.
    pub boundary: Vec<Vec<S>>,
    /// x-derivative orders whose traces at `x = 1` act as controls.
    pub control_rows: Vec<usize>,
    pub complex: bool,
    pub name: String,
    /// Validation warnings (soft; e.g. analyticity radii below the synthesis threshold).
    pub warnings: Vec<String>,
}

impl<S: Scalar> PdeSpec<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        n_order: usize,
        m_order: usize,
        zeta: Vec<S>,
        nonlinearity: NonlinearityTable<S>,
        boundary: Vec<Vec<S>>,
        control_rows: Vec<usize>,
        complex: bool,
    ) -> Result<Self, SpecError> {
        if n_order < 1 || m_order <= n_order {
            return Err(SpecError::BadOrders {
                n: n_order,
                m: m_order,
            });
        }
        if zeta.len() != m_order + 1 {
            return Err(SpecError::BadZetaLength {
                found: zeta.len(),
                m: m_order,
                want: m_order + 1,
            });
        }
        if zeta[m_order].is_zero() {
            return Err(SpecError::ZeroLeadingCoefficient);
        }
        if boundary.len() > m_order {
            return Err(SpecError::TooManyBoundaryRows {
                rows: boundary.len(),
                m: m_order,
            });
        }
        for row in &boundary {
            if row.len() != m_order {
                return Err(SpecError::BadBoundaryWidth {
                    found: row.len(),
                    want: m_order,
                });
            }
        }
        let boundary = row_reduce(boundary)?;
        let mut spec = PdeSpec {
            n_order,
            m_order,
            zeta,
            nonlinearity,
            boundary,
            control_rows,
            complex,
            name: name.to_string(),
            warnings: Vec::new(),
        };
        let rhat = spec.rhat();
        if !spec.nonlinearity.is_empty() && (spec.nonlinearity.b <= rhat || spec.nonlinearity.b2 <= rhat)
        {
            spec.warnings.push(format!(
                "analyticity radii (b={}, b2={}) are below the synthesis threshold R^ = {rhat:.4}; \
                 the steering construction may not apply at full strength",
                spec.nonlinearity.b, spec.nonlinearity.b2
            ));
        }
        Ok(spec)
    }

    /// Anisotropy ratio `λ = M/N` as an exact rational.
    pub fn lambda(&self) -> Ratio<i64> {
        Ratio::new(self.m_order as i64, self.n_order as i64)
    }

    pub fn lambda_f64(&self) -> f64 {
        self.m_order as f64 / self.n_order as f64
    }

    /// The threshold radius `R^ = 4M e^{1/(λe)}`.
    pub fn rhat(&self) -> f64 {
        let lambda = self.lambda_f64();
        4.0 * self.m_order as f64 * (1.0 / (lambda * std::f64::consts::E)).exp()
    }

    /// Number of boundary conditions `v`.
    pub fn num_boundary_rows(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_normalized(&self) -> bool {
        (self.zeta[self.m_order].abs_f64() - 1.0).abs() <= 1e-12
    }

    /// Rescale so `|ζ_M| = 1`; returns the normalized spec and the time scale
    /// `|ζ_M|^{1/N}` with `y(x,t) = ỹ(x, time_scale · t)` mapping solutions back.
    pub fn normalize(&self) -> (Self, f64) {
        let zm = self.zeta[self.m_order].abs_f64();
        if (zm - 1.0).abs() <= 1e-12 {
            return (self.clone(), 1.0);
        }
        let time_scale = zm.powf(1.0 / self.n_order as f64);
        let inv = S::try_from_f64_pair(1.0 / zm, 0.0)
            .expect("normalization of exact specs with non-unit |zeta_M| requires a float backend");
        let mut spec = self.clone();
        for z in &mut spec.zeta {
            *z = z.clone() * inv.clone();
        }
        for t in &mut spec.nonlinearity.terms {
            t.a = t.a.clone() * inv.clone();
        }
        spec.nonlinearity.c_a /= zm;
        (spec, time_scale)
    }
}

/// Exact Gaussian elimination to row echelon form; errors on dependent rows.
fn row_reduce<S: Scalar>(mut rows: Vec<Vec<S>>) -> Result<Vec<Vec<S>>, SpecError> {
    if rows.is_empty() {
        return Ok(rows);
    }
    let width = rows[0].len();
    let mut pivot_row = 0usize;
    for col in 0..width {
        if pivot_row >= rows.len() {
            break;
        }
        // Favor the largest magnitude pivot for float backends.
        let mut best = None;
        let mut best_mag = 0.0f64;
        for (i, row) in rows.iter().enumerate().skip(pivot_row) {
            let mag = row[col].abs_f64();
            if mag > best_mag && mag > 1e-12 {
                best = Some(i);
                best_mag = mag;
            }
        }
        let Some(best) = best else { continue };
        rows.swap(pivot_row, best);
        let inv = S::one() / rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        // Pin the pivot to an exact one so kernel vectors annihilate B bitwise.
        rows[pivot_row][col] = S::one();
        for i in 0..rows.len() {
            if i == pivot_row {
                continue;
            }
            let factor = rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..width {
                let delta = factor.clone() * rows[pivot_row][j].clone();
                rows[i][j] = rows[i][j].clone() - delta;
            }
            rows[i][col] = S::zero();
        }
        pivot_row += 1;
    }
    if rows
        .iter()
        .any(|r| r.iter().all(|v| v.abs_f64() <= 1e-12))
    {
        return Err(SpecError::RankDeficientBoundary);
    }
    Ok(rows)
}

/// `N`-component vector of space-Taylor coefficient sequences with a certified
/// radius/amplitude pair: `|α_n| ≤ C n!/R^n` for every stored coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticState<S: Scalar> {
    /// Component `l` holds `α_n = ∂_x^n y_l(0)` for `n ≤ n_cut`.
    pub components: Vec<Vec<S>>,
    /// Certified radius `R`.
    pub radius: f64,
    /// Certified amplitude `C`.
    pub amplitude: f64,
}

impl<S: Scalar> AnalyticState<S> {
    pub fn zero(n_components: usize, n_cut: usize, radius: f64) -> Self {
        AnalyticState {
            components: vec![vec![S::zero(); n_cut + 1]; n_components],
            radius,
            amplitude: 0.0,
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn max_order(&self) -> usize {
        self.components.iter().map(|c| c.len()).min().unwrap_or(1) - 1
    }

    pub fn scale(&self, s: &S) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| c.iter().map(|v| v.clone() * s.clone()).collect())
            .collect();
        let mut out = AnalyticState {
            components,
            radius: self.radius,
            amplitude: self.amplitude * s.abs_f64(),
        };
        out.amplitude = certified_amplitude(&out);
        out
    }

    /// Taylor evaluation `Σ α_n x^n / n!` of component `l` over stored orders.
    pub fn eval(&self, l: usize, x: f64) -> S {
        let xs = S::try_from_f64_pair(x, 0.0).unwrap_or_else(|| {
            panic!("evaluation point {x} not representable in this backend")
        });
        let mut acc = S::zero();
        let mut pow = S::one();
        let mut fact = 1.0f64;
        for (n, a) in self.components[l].iter().enumerate() {
            if n > 0 {
                pow = pow * xs.clone();
                fact *= n as f64;
            }
            let inv = S::try_from_f64_pair(1.0 / fact, 0.0).unwrap();
            acc = acc + a.clone() * pow.clone() * inv;
        }
        acc
    }
}

fn certified_amplitude<S: Scalar>(state: &AnalyticState<S>) -> f64 {
    let mut c = 0.0f64;
    for comp in &state.components {
        for (n, a) in comp.iter().enumerate() {
            let mag = a.abs_f64();
            if mag == 0.0 {
                continue;
            }
            // |α_n| R^n / n! in the log domain; n! overflows past 170.
            let log_ratio = mag.ln() + n as f64 * state.radius.ln() - log_factorial(n as f64);
            c = c.max(log_ratio.exp());
        }
    }
    c
}

/// Certify membership of coefficient sequences in the analytic ball of radius
/// `R`: computes the smallest `C` with `|α_n| ≤ C n!/R^n` over stored orders.
pub fn certify_state<S: Scalar>(
    components: Vec<Vec<S>>,
    radius: f64,
) -> Result<AnalyticState<S>, SpecError> {
    if components.is_empty() || components.iter().any(|c| c.is_empty()) {
        return Err(SpecError::EmptyState);
    }
    assert!(radius > 0.0);
    let mut state = AnalyticState {
        components,
        radius,
        amplitude: 0.0,
    };
    state.amplitude = certified_amplitude(&state);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use approx::assert_relative_eq;

    #[test]
    fn normalize_examples() {
        // Heat variant ∂_t y = 4 ∂_x² y → time scale 4.
        let spec = PdeSpec::<f64>::new(
            "heat4",
            1,
            2,
            vec![0.0, 0.0, 4.0],
            NonlinearityTable::empty(),
            vec![vec![1.0, 0.0]],
            vec![0],
            false,
        )
        .unwrap();
        let (norm, scale) = spec.normalize();
        assert_relative_eq!(scale, 4.0);
        assert_relative_eq!(norm.zeta[2], 1.0);
        // Idempotent.
        let (again, scale2) = norm.normalize();
        assert_eq!(scale2, 1.0);
        assert_eq!(again, norm);

        // ∂_t² y = 16 ∂_x⁴ y → time scale 16^{1/2} = 4.
        let spec = PdeSpec::<f64>::new(
            "wave16",
            2,
            4,
            vec![0.0, 0.0, 0.0, 0.0, 16.0],
            NonlinearityTable::empty(),
            vec![],
            vec![0],
            false,
        )
        .unwrap();
        assert_relative_eq!(spec.normalize().1, 4.0);
    }

    #[test]
    fn certify_state_examples() {
        // All-zero coefficients → C = 0.
        let z = certify_state::<f64>(vec![vec![0.0; 5]], 10.0).unwrap();
        assert_eq!(z.amplitude, 0.0);

        // α_n = n!/ρ^n with R ≤ ρ → C = 1 (attained at n = 0).
        let rho = 9.0f64;
        let coeffs: Vec<f64> = (0..12)
            .map(|n| (1..=n).map(|i| i as f64).product::<f64>() / rho.powi(n as i32))
            .collect();
        let s = certify_state(vec![coeffs], 7.0).unwrap();
        assert_relative_eq!(s.amplitude, 1.0, max_relative = 1e-12);

        // α = (0,1,0,…) (the function x), R = 14 → C = 14.
        let s = certify_state::<f64>(vec![vec![0.0, 1.0, 0.0, 0.0]], 14.0).unwrap();
        assert_relative_eq!(s.amplitude, 14.0, max_relative = 1e-12);

        assert_eq!(
            certify_state::<f64>(vec![], 1.0).unwrap_err(),
            SpecError::EmptyState
        );
    }

    #[test]
    fn hardy_ball_inclusion_on_polynomial_samples() {
        // For a polynomial f = Σ α_m z^m/m! bounded on B(0,R), the certified C
        // never exceeds sup |f| on the ball (Cauchy estimates; sup attained on
        // the circle |z| = R).
        let r = 5.0f64;
        let samples: Vec<Vec<f64>> = vec![
            vec![0.0, 1.0 / r, 0.0, 0.0],
            vec![0.5, 0.0, 2.0 / (r * r), 0.0],
            vec![0.0, -0.3, 0.1, 6.0 * 0.2 / (r * r * r)],
        ];
        for alphas in samples {
            let mut sup = 0.0f64;
            for i in 0..720 {
                let th = i as f64 * std::f64::consts::TAU / 720.0;
                let (mut re, mut im) = (0.0, 0.0);
                let (mut zr, mut zi) = (1.0f64, 0.0f64);
                let mut fact = 1.0;
                for (m, a) in alphas.iter().enumerate() {
                    if m > 0 {
                        let (nr, ni) = (
                            zr * r * th.cos() - zi * r * th.sin(),
                            zr * r * th.sin() + zi * r * th.cos(),
                        );
                        zr = nr;
                        zi = ni;
                        fact *= m as f64;
                    }
                    re += a / fact * zr;
                    im += a / fact * zi;
                }
                sup = sup.max(re.hypot(im));
            }
            let s = certify_state(vec![alphas], r).unwrap();
            assert!(
                s.amplitude <= sup * (1.0 + 1e-9),
                "certified {} vs sup {}",
                s.amplitude,
                sup
            );
        }
    }

    #[test]
    fn table_validation() {
        // Bound violation rejected.
        let term = NonlinearTerm {
            p: vec![1, 0],
            pbar: vec![],
            r: 0,
            a: 10.0f64,
        };
        let err = NonlinearityTable::new(2, vec![term], 1.0, 8.0, 8.0, false).unwrap_err();
        assert!(matches!(err, SpecError::TableBoundViolated { .. }));

        // Constant term rejected.
        let term = NonlinearTerm {
            p: vec![0, 0],
            pbar: vec![],
            r: 1,
            a: 0.01f64,
        };
        assert_eq!(
            NonlinearityTable::new(2, vec![term], 1.0, 8.0, 8.0, false).unwrap_err(),
            SpecError::ConstantTerm
        );

        // Conjugates need a complex spec.
        let term = NonlinearTerm {
            p: vec![0, 0],
            pbar: vec![1, 0],
            r: 0,
            a: 0.01f64,
        };
        assert_eq!(
            NonlinearityTable::new(2, vec![term], 1.0, 8.0, 8.0, false).unwrap_err(),
            SpecError::ConjugateInRealSpec
        );
    }

    #[test]
    fn row_reduction_rejects_dependent_rows() {
        let rows = vec![
            vec![Rational::from_i64(1), Rational::from_i64(2), Rational::from_i64(0)],
            vec![Rational::from_i64(2), Rational::from_i64(4), Rational::from_i64(0)],
        ];
        assert_eq!(row_reduce(rows).unwrap_err(), SpecError::RankDeficientBoundary);
    }
}
