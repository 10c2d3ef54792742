//! Preset catalog for the worked equations.

use super::{NonlinearTerm, NonlinearityTable, PdeSpec, SpecError};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Equations available by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `∂_t y = ∂_x² y`, Dirichlet row at 0.
    Heat,
    /// `∂_t y = ∂_x² y`, Neumann row at 0.
    HeatNeumann,
    /// `∂_t y = −∂_x² y` (ill-posed forward).
    BackwardHeat,
    /// `∂_t y = ∂_x³ y + ∂_x y + y ∂_x y`, rows `(y, ∂_x y)` at 0.
    Kdv,
    /// `∂_t² y = −∂_x⁴ y + ∂_x² y − 2(y_0 y_2 + y_1²)`, Neumann rows.
    GoodBoussinesqNeumann,
    /// `∂_t² y = +∂_x⁴ y + ∂_x² y − 2(y_0 y_2 + y_1²)`, Neumann rows (ill-posed).
    BadBoussinesqNeumann,
    /// `∂_t² y = −∂_x⁴ y + ∂_x² y − 2 y_0 y_1`, Dirichlet rows.
    GoodBoussinesqDirichlet,
    /// `∂_t² y = +∂_x⁴ y + ∂_x² y − 2 y_0 y_1`, Dirichlet rows (ill-posed).
    BadBoussinesqDirichlet,
    /// `∂_t y = e^{iθ} ∂_x² y + e^{iφ} |y|² y`, Dirichlet row.
    GinzburgLandau,
    /// Same with a Neumann row.
    GinzburgLandauNeumann,
    /// `∂_t y = −∂_x⁴ y − ∂_x² y − y ∂_x y`, rows `(y, ∂_x² y)` at 0.
    Ks,
    /// `∂_t y = ∂_x² y + V(x) y`, Dirichlet row.
    LinearPotential,
}

impl Preset {
    pub const ALL: [Preset; 12] = [
        Preset::Heat,
        Preset::HeatNeumann,
        Preset::BackwardHeat,
        Preset::Kdv,
        Preset::GoodBoussinesqNeumann,
        Preset::BadBoussinesqNeumann,
        Preset::GoodBoussinesqDirichlet,
        Preset::BadBoussinesqDirichlet,
        Preset::GinzburgLandau,
        Preset::GinzburgLandauNeumann,
        Preset::Ks,
        Preset::LinearPotential,
    ];

    pub fn parse(name: &str) -> Result<Preset, SpecError> {
        match name {
            "heat" => Ok(Preset::Heat),
            "heat_neumann" => Ok(Preset::HeatNeumann),
            "backward_heat" => Ok(Preset::BackwardHeat),
            "kdv" => Ok(Preset::Kdv),
            "good_boussinesq_neumann" | "boussinesq" => Ok(Preset::GoodBoussinesqNeumann),
            "bad_boussinesq_neumann" => Ok(Preset::BadBoussinesqNeumann),
            "good_boussinesq_dirichlet" => Ok(Preset::GoodBoussinesqDirichlet),
            "bad_boussinesq_dirichlet" => Ok(Preset::BadBoussinesqDirichlet),
            "gl" | "ginzburg_landau" => Ok(Preset::GinzburgLandau),
            "gl_neumann" | "ginzburg_landau_neumann" => Ok(Preset::GinzburgLandauNeumann),
            "ks" => Ok(Preset::Ks),
            "linear_potential" => Ok(Preset::LinearPotential),
            other => Err(SpecError::UnknownPreset(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Heat => "heat",
            Preset::HeatNeumann => "heat_neumann",
            Preset::BackwardHeat => "backward_heat",
            Preset::Kdv => "kdv",
            Preset::GoodBoussinesqNeumann => "good_boussinesq_neumann",
            Preset::BadBoussinesqNeumann => "bad_boussinesq_neumann",
            Preset::GoodBoussinesqDirichlet => "good_boussinesq_dirichlet",
            Preset::BadBoussinesqDirichlet => "bad_boussinesq_dirichlet",
            Preset::GinzburgLandau => "ginzburg_landau",
            Preset::GinzburgLandauNeumann => "ginzburg_landau_neumann",
            Preset::Ks => "ks",
            Preset::LinearPotential => "linear_potential",
        }
    }

    /// Forward-in-time initial value problem is well posed (simulable).
    pub fn forward_well_posed(&self) -> bool {
        matches!(
            self,
            Preset::Heat
                | Preset::HeatNeumann
                | Preset::Kdv
                | Preset::Ks
                | Preset::GinzburgLandau
                | Preset::GinzburgLandauNeumann
                | Preset::LinearPotential
        )
    }

    /// Forward problem is genuinely ill posed (as opposed to merely unsupported).
    pub fn ill_posed(&self) -> bool {
        matches!(
            self,
            Preset::BackwardHeat | Preset::BadBoussinesqNeumann | Preset::BadBoussinesqDirichlet
        )
    }
}

/// Build a validated preset spec. `GinzburgLandau*` takes angles `(θ, φ)`;
/// `LinearPotential` takes the Taylor coefficients of `V`; both are `None`-able
/// for the other presets.
pub fn make_preset<S: Scalar>(
    preset: Preset,
    gl_angles: Option<(f64, f64)>,
    potential: Option<Vec<S>>,
) -> Result<PdeSpec<S>, SpecError> {
    let one = S::one;
    let zero = S::zero;
    let i64_ = S::from_i64;
    match preset {
        Preset::Heat | Preset::HeatNeumann | Preset::BackwardHeat => {
            let sign = if preset == Preset::BackwardHeat { -1 } else { 1 };
            let (b, controls) = if preset == Preset::HeatNeumann {
                (vec![vec![zero(), one()]], vec![1])
            } else {
                (vec![vec![one(), zero()]], vec![0])
            };
            PdeSpec::new(
                preset.name(),
                1,
                2,
                vec![zero(), zero(), i64_(sign)],
                NonlinearityTable::empty(),
                b,
                controls,
                false,
            )
        }
        Preset::Kdv => {
            // f = y ∂_x y: term p = (1,1,0), r = 0, coefficient 1.
            let terms = vec![NonlinearTerm {
                p: vec![1, 1, 0],
                pbar: vec![],
                r: 0,
                a: one(),
            }];
            let table = NonlinearityTable::new(3, terms, 404.0, 14.2, 14.2, false)?;
            PdeSpec::new(
                preset.name(),
                1,
                3,
                vec![zero(), one(), zero(), one()],
                table,
                vec![vec![one(), zero(), zero()], vec![zero(), one(), zero()]],
                vec![0],
                false,
            )
        }
        Preset::GoodBoussinesqNeumann | Preset::BadBoussinesqNeumann => {
            let sign = if preset == Preset::BadBoussinesqNeumann { 1 } else { -1 };
            // f = −2 (y_0 y_2 + y_1²)
            let terms = vec![
                NonlinearTerm {
                    p: vec![1, 0, 1, 0],
                    pbar: vec![],
                    r: 0,
                    a: i64_(-2),
                },
                NonlinearTerm {
                    p: vec![0, 2, 0, 0],
                    pbar: vec![],
                    r: 0,
                    a: i64_(-2),
                },
            ];
            let table = NonlinearityTable::new(4, terms, 800.0, 20.0, 20.0, false)?;
            PdeSpec::new(
                preset.name(),
                2,
                4,
                vec![zero(), zero(), one(), zero(), i64_(sign)],
                table,
                vec![
                    vec![zero(), one(), zero(), zero()],
                    vec![zero(), zero(), zero(), one()],
                ],
                vec![1, 3],
                false,
            )
        }
        Preset::GoodBoussinesqDirichlet | Preset::BadBoussinesqDirichlet => {
            let sign = if preset == Preset::BadBoussinesqDirichlet { 1 } else { -1 };
            // f = −∂_x(y²) = −2 y_0 y_1
            let terms = vec![NonlinearTerm {
                p: vec![1, 1, 0, 0],
                pbar: vec![],
                r: 0,
                a: i64_(-2),
            }];
            let table = NonlinearityTable::new(4, terms, 800.0, 20.0, 20.0, false)?;
            PdeSpec::new(
                preset.name(),
                2,
                4,
                vec![zero(), zero(), one(), zero(), i64_(sign)],
                table,
                vec![
                    vec![one(), zero(), zero(), zero()],
                    vec![zero(), zero(), one(), zero()],
                ],
                vec![0, 2],
                false,
            )
        }
        Preset::GinzburgLandau | Preset::GinzburgLandauNeumann => {
            if !S::COMPLEX {
                return Err(SpecError::NeedsComplexBackend(preset.name().into()));
            }
            let (theta, phi) = gl_angles.unwrap_or((0.0, 0.0));
            let e_itheta = S::try_from_f64_pair(theta.cos(), theta.sin()).ok_or_else(|| {
                SpecError::UnrepresentableParameter(format!("e^(i {theta}) in exact backend"))
            })?;
            let e_iphi = S::try_from_f64_pair(phi.cos(), phi.sin()).ok_or_else(|| {
                SpecError::UnrepresentableParameter(format!("e^(i {phi}) in exact backend"))
            })?;
            // f = e^{iφ} y² ȳ
            let terms = vec![NonlinearTerm {
                p: vec![2, 0],
                pbar: vec![1, 0],
                r: 0,
                a: e_iphi,
            }];
            let table = NonlinearityTable::new(2, terms, 1000.0, 10.0, 10.0, true)?;
            let (b, controls) = if preset == Preset::GinzburgLandauNeumann {
                (vec![vec![zero(), one()]], vec![1])
            } else {
                (vec![vec![one(), zero()]], vec![0])
            };
            PdeSpec::new(
                preset.name(),
                1,
                2,
                vec![zero(), zero(), e_itheta],
                table,
                b,
                controls,
                true,
            )
        }
        Preset::Ks => {
            // ∂_t y = −∂_x⁴ y − ∂_x² y − y ∂_x y
            let terms = vec![NonlinearTerm {
                p: vec![1, 1, 0, 0],
                pbar: vec![],
                r: 0,
                a: i64_(-1),
            }];
            let table = NonlinearityTable::new(4, terms, 400.0, 20.0, 20.0, false)?;
            PdeSpec::new(
                preset.name(),
                1,
                4,
                vec![zero(), zero(), i64_(-1), zero(), i64_(-1)],
                table,
                vec![
                    vec![one(), zero(), zero(), zero()],
                    vec![zero(), zero(), one(), zero()],
                ],
                vec![0, 2],
                false,
            )
        }
        Preset::LinearPotential => {
            // f = V(x) y: terms (p = e_0, r) → V_r with V_r = ∂_x^r V(0)/r!.
            let v = potential.unwrap_or_default();
            let mut terms = Vec::new();
            for (r, vr) in v.into_iter().enumerate() {
                terms.push(NonlinearTerm {
                    p: vec![1, 0],
                    pbar: vec![],
                    r: r as u32,
                    a: vr,
                });
            }
            let c_a = terms
                .iter()
                .map(|t| t.a.abs_f64() * 10.0f64.powi(1 + t.r as i32))
                .fold(1.0f64, f64::max);
            let table = NonlinearityTable::new(2, terms, c_a, 10.0, 10.0, false)?;
            PdeSpec::new(
                preset.name(),
                1,
                2,
                vec![zero(), zero(), one()],
                table,
                vec![vec![one(), zero()]],
                vec![0],
                false,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{CRational, Complex64, Rational};
    use approx::assert_relative_eq;

    #[test]
    fn kdv_preset_matches_citation() {
        let spec = make_preset::<Rational>(Preset::Kdv, None, None).unwrap();
        assert_eq!((spec.n_order, spec.m_order), (1, 3));
        assert_eq!(
            spec.zeta,
            vec![
                Rational::from_i64(0),
                Rational::from_i64(1),
                Rational::from_i64(0),
                Rational::from_i64(1)
            ]
        );
        let t = &spec.nonlinearity.terms()[0];
        assert_eq!((t.p.as_slice(), t.r), ([1u32, 1, 0].as_slice(), 0));
        assert_eq!(t.a, Rational::from_i64(1));
        assert_eq!(spec.boundary.len(), 2);
        assert_eq!(spec.lambda_f64(), 3.0);
    }

    #[test]
    fn ks_preset_matches_citation() {
        let spec = make_preset::<f64>(Preset::Ks, None, None).unwrap();
        assert_eq!((spec.n_order, spec.m_order), (1, 4));
        assert_eq!(spec.zeta, vec![0.0, 0.0, -1.0, 0.0, -1.0]);
        let t = &spec.nonlinearity.terms()[0];
        assert_eq!(t.p, vec![1, 1, 0, 0]);
        assert_eq!(t.a, -1.0);
    }

    #[test]
    fn bad_boussinesq_neumann_matches_citation() {
        let spec = make_preset::<f64>(Preset::BadBoussinesqNeumann, None, None).unwrap();
        assert_eq!((spec.n_order, spec.m_order), (2, 4));
        assert_eq!(spec.zeta, vec![0.0, 0.0, 1.0, 0.0, 1.0]);
        let mut coeffs: Vec<(Vec<u32>, f64)> = spec
            .nonlinearity
            .terms()
            .iter()
            .map(|t| (t.p.clone(), t.a))
            .collect();
        coeffs.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(
            coeffs,
            vec![(vec![0, 2, 0, 0], -2.0), (vec![1, 0, 1, 0], -2.0)]
        );
    }

    #[test]
    fn rhat_values() {
        let kdv = make_preset::<f64>(Preset::Kdv, None, None).unwrap();
        assert_relative_eq!(kdv.rhat(), 13.565545107829056, max_relative = 1e-12);
        let bous = make_preset::<f64>(Preset::GoodBoussinesqNeumann, None, None).unwrap();
        assert_relative_eq!(bous.rhat(), 19.231093895525031, max_relative = 1e-12);
        let gl = make_preset::<Complex64>(Preset::GinzburgLandau, None, None).unwrap();
        assert_relative_eq!(gl.rhat(), 9.615546947762516, max_relative = 1e-12);
    }

    #[test]
    fn gl_needs_complex_backend() {
        let err = make_preset::<f64>(Preset::GinzburgLandau, Some((0.1, 0.2)), None).unwrap_err();
        assert!(matches!(err, SpecError::NeedsComplexBackend(_)));
        // Exact Gaussian rationals work only for representable angles.
        assert!(make_preset::<CRational>(Preset::GinzburgLandau, Some((0.0, 0.0)), None).is_ok());
    }

    #[test]
    fn unknown_preset_name() {
        assert!(matches!(
            Preset::parse("warp_drive"),
            Err(SpecError::UnknownPreset(_))
        ));
    }

    #[test]
    fn all_presets_validate() {
        for p in Preset::ALL {
            if matches!(p, Preset::GinzburgLandau | Preset::GinzburgLandauNeumann) {
                make_preset::<Complex64>(p, Some((0.3, -0.7)), None).unwrap();
            } else {
                make_preset::<f64>(p, None, Some(vec![0.5, 0.1])).unwrap();
            }
        }
    }
}
