//! Symbolic compatibility machinery for the KdV preset.
//!
//! For `∂_t y = ∂_x³ y + ∂_x y + y ∂_x y`, the `l`-th time derivative of the
//! boundary vector is an exact polynomial `J_l = (J_{l,1}, J_{l,2}, J_{l,3})`
//! in `y_0 … y_{3l+2}` built from generator polynomials `H_l`:
//!
//! * `H_0 = 0`, `H_1 = y_1 + y_0 y_1`;
//! * `H_{l+1} = y_{3l+1} + ½ Σ_k C(3l+1,k) y_k y_{3l+1−k}
//!    + Σ_{i≤3l−2} ∂H_l/∂y_i (y_{i+3} + y_{i+1} + ½ Σ_{k≤i+1} C(i+1,k) y_k y_{i+1−k})`.
//!
//! These serve as an independent oracle for the numeric jet recursion, and the
//! relations `α_{3l} = −H_l(α)`, `α_{3l+1} = −Σ ∂H_l/∂y_i(α) α_{i+1}` project a
//! free coefficient subsequence onto the compatibility set.

use crate::pde_model::{certify_state, AnalyticState};
use crate::scalar::Scalar;
use crate::series_core::MultiPoly;

/// Level-`l` compatibility polynomials for KdV.
#[derive(Debug, Clone)]
pub struct KdvCompatPoly<S: Scalar> {
    pub l: usize,
    /// Highest coefficient index consumed: `m(l) = 3l + 2`.
    pub m: usize,
    /// Generator `H_l(y_0, …, y_{3l−2})`.
    pub h: MultiPoly<S>,
    /// `J_{l,1}, J_{l,2}, J_{l,3}`.
    pub j: [MultiPoly<S>; 3],
}

fn half_square_convolution<S: Scalar>(top: usize) -> MultiPoly<S> {
    // ½ Σ_{k=0}^{top} C(top, k) y_k y_{top−k}
    let mut acc = MultiPoly::zero();
    for k in 0..=top {
        let c = S::from_ratio(1, 2) * S::from_binomial(top as u32, k as u32);
        let term = MultiPoly::variable(k).mul(&MultiPoly::variable(top - k));
        acc = acc.add(&term.scale(&c));
    }
    acc
}

/// The exact `H_l` and `J_{l,·}` polynomials for `l ≤ l_max`.
pub fn kdv_compat_polys<S: Scalar>(l_max: usize) -> Vec<KdvCompatPoly<S>> {
    let mut out: Vec<KdvCompatPoly<S>> = Vec::with_capacity(l_max + 1);
    let mut h: MultiPoly<S> = MultiPoly::zero();
    for l in 0..=l_max {
        let j = assemble_j(l, &h);
        out.push(KdvCompatPoly {
            l,
            m: 3 * l + 2,
            h: h.clone(),
            j,
        });
        if l == l_max {
            break;
        }
        // Step H_l → H_{l+1}.
        let top = 3 * l + 1;
        let mut next = MultiPoly::variable(top).add(&half_square_convolution(top));
        let bound = if l == 0 { 0 } else { 3 * l - 1 };
        for i in 0..bound {
            let dh = h.partial(i);
            if dh.is_zero() {
                continue;
            }
            let bracket = MultiPoly::variable(i + 3)
                .add(&MultiPoly::variable(i + 1))
                .add(&half_square_convolution(i + 1));
            next = next.add(&dh.mul(&bracket));
        }
        h = next;
    }
    out
}

fn assemble_j<S: Scalar>(l: usize, h: &MultiPoly<S>) -> [MultiPoly<S>; 3] {
    let j1 = MultiPoly::variable(3 * l).add(h);
    let mut j2 = MultiPoly::variable(3 * l + 1);
    let mut j3 = MultiPoly::variable(3 * l + 2);
    let bound = if l == 0 { 0 } else { 3 * l - 1 };
    for i in 0..bound {
        let dhi = h.partial(i);
        if dhi.is_zero() {
            continue;
        }
        j2 = j2.add(&dhi.mul(&MultiPoly::variable(i + 1)));
        j3 = j3.add(&dhi.mul(&MultiPoly::variable(i + 2)));
        for jj in 0..bound {
            let d2 = dhi.partial(jj);
            if d2.is_zero() {
                continue;
            }
            let quad = MultiPoly::variable(jj + 1).mul(&MultiPoly::variable(i + 1));
            j3 = j3.add(&d2.mul(&quad));
        }
    }
    [j1, j2, j3]
}

/// Project a free subsequence `α_{3l+2} = free[l]` onto the KdV compatibility
/// set: `α_0 = α_1 = 0`, `α_{3l} = −H_l(α)`, `α_{3l+1} = −Σ ∂H_l/∂y_i(α) α_{i+1}`.
///
/// Returns the state certified at the given radius. No claim is made that the
/// certified amplitude of the output is controlled by that of the free input.
pub fn kdv_project_to_compat<S: Scalar>(
    free: &[S],
    l_max: usize,
    radius: f64,
) -> AnalyticState<S> {
    assert!(free.len() >= l_max + 1, "need a free coefficient per level");
    let polys = kdv_compat_polys::<S>(l_max);
    let mut alpha: Vec<S> = vec![S::zero(); 3 * l_max + 3];
    alpha[2] = free[0].clone();
    for l in 1..=l_max {
        let h = &polys[l].h;
        alpha[3 * l] = S::zero() - h.eval(&alpha);
        let mut a31 = S::zero();
        for i in 0..(3 * l - 1) {
            let dh = h.partial(i);
            if dh.is_zero() {
                continue;
            }
            a31 = a31 + dh.eval(&alpha) * alpha[i + 1].clone();
        }
        alpha[3 * l + 1] = S::zero() - a31;
        alpha[3 * l + 2] = free[l].clone();
    }
    certify_state(vec![alpha], radius).expect("projector output is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet_engine::{compat_check, time_jets_from_state};
    use crate::pde_model::presets::{make_preset, Preset};
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn levels_zero_and_one_match_paper() {
        let polys = kdv_compat_polys::<Rational>(1);
        // l = 0: H_0 = 0, J_0 = (y_0, y_1, y_2), m(0) = 2.
        assert!(polys[0].h.is_zero());
        assert_eq!(polys[0].m, 2);
        assert_eq!(polys[0].j[0], MultiPoly::variable(0));
        assert_eq!(polys[0].j[1], MultiPoly::variable(1));
        assert_eq!(polys[0].j[2], MultiPoly::variable(2));
        // l = 1: H_1 = y_1 + y_0 y_1.
        let h1 = MultiPoly::variable(1).add(&MultiPoly::variable(0).mul(&MultiPoly::variable(1)));
        assert_eq!(polys[1].h, h1);
        // J_{1,2} = y_4 + y_2 + y_0 y_2 + y_1².
        let j12 = MultiPoly::variable(4)
            .add(&MultiPoly::variable(2))
            .add(&MultiPoly::variable(0).mul(&MultiPoly::variable(2)))
            .add(&MultiPoly::variable(1).mul(&MultiPoly::variable(1)));
        assert_eq!(polys[1].j[1], j12);
        // J_{1,1} = y_3 + y_1 + y_0 y_1.
        let j11 = MultiPoly::variable(3).add(&h1);
        assert_eq!(polys[1].j[0], j11);
    }

    #[test]
    fn symbolic_levels_match_numeric_jets() {
        // J_{l,k+1}(α) must equal d_l^k from the jet recursion, exactly.
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let spec = make_preset::<Rational>(Preset::Kdv, None, None).unwrap();
        let polys = kdv_compat_polys::<Rational>(4);
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..5 {
            let coeffs: Vec<Rational> = (0..30)
                .map(|_| Rational::from_ratio(rng.gen_range(-4..4), rng.gen_range(1..5)))
                .collect();
            let y0 = certify_state(vec![coeffs.clone()], 10.0).unwrap();
            let jet = time_jets_from_state(&spec, &y0, 4, 2).unwrap();
            for l in 0..=4usize {
                for k in 0..=2usize {
                    let sym = polys[l].j[k].eval(&coeffs);
                    assert_eq!(&sym, jet.get(l, k).unwrap(), "l={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn projector_hand_example() {
        // free = (ε, 0), l_max = 1: α_3 = −H_1(0,0) = 0 and
        // α_4 = −[∂H_1/∂y_0·α_1 + ∂H_1/∂y_1·α_2] = −ε.
        let eps = Rational::from_ratio(1, 1000);
        let state = kdv_project_to_compat(&[eps.clone(), r(0)], 1, 14.0);
        let a = &state.components[0];
        assert!(a[0].is_zero() && a[1].is_zero());
        assert_eq!(a[2], eps);
        assert!(a[3].is_zero());
        assert_eq!(a[4], -eps.clone());
        assert!(a[5].is_zero());
    }

    #[test]
    fn projected_states_pass_compat_exactly() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let spec = make_preset::<Rational>(Preset::Kdv, None, None).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..3 {
            let free: Vec<Rational> = (0..6)
                .map(|_| Rational::from_ratio(rng.gen_range(-3..4), 1000))
                .collect();
            // Level 5 fills α_0..α_17; compat to n_max = 4 consumes α_0..α_14.
            let state = kdv_project_to_compat(&free, 5, 14.0);
            let report = compat_check(&spec, &state, 4, 1e-10).unwrap();
            assert!(report.verdict, "violations: {:?}", report.details);
        }
    }
}
