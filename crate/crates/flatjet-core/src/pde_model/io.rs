//! JSON schema for custom spec and state files (schema version 1).
//!
//! Scalars are written as `x` (real) or `[re, im]` (complex); both forms parse
//! in either kind of spec.

use super::{certify_state, AnalyticState, NonlinearTerm, NonlinearityTable, PdeSpec, SpecError};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberJson {
    Real(f64),
    Complex([f64; 2]),
}

impl NumberJson {
    fn to_scalar<S: Scalar>(&self) -> Result<S, SpecError> {
        let (re, im) = match self {
            NumberJson::Real(x) => (*x, 0.0),
            NumberJson::Complex([re, im]) => (*re, *im),
        };
        S::try_from_f64_pair(re, im)
            .ok_or_else(|| SpecError::UnrepresentableParameter(format!("({re}, {im})")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub p: Vec<u32>,
    #[serde(default)]
    pub pbar: Vec<u32>,
    #[serde(default)]
    pub r: u32,
    pub a: NumberJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonlinearityJson {
    #[serde(default)]
    pub terms: Vec<TermJson>,
    #[serde(rename = "Ca")]
    pub ca: f64,
    pub b: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecJson {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub zeta: Vec<NumberJson>,
    pub nonlinearity: NonlinearityJson,
    #[serde(rename = "B")]
    pub b_matrix: Vec<Vec<NumberJson>>,
    #[serde(default)]
    pub complex: bool,
    #[serde(default)]
    pub name: Option<String>,
    /// x-derivative orders controlled at x = 1; defaults to the complement
    /// count being unspecified (empty = controls not declared).
    #[serde(default)]
    pub control_rows: Vec<usize>,
}

fn default_version() -> u32 {
    1
}

pub fn spec_from_json<S: Scalar>(text: &str) -> Result<PdeSpec<S>, String> {
    let json: SpecJson = serde_json::from_str(text).map_err(|e| format!("spec JSON: {e}"))?;
    if json.version != 1 {
        return Err(format!("unsupported spec schema version {}", json.version));
    }
    let zeta = json
        .zeta
        .iter()
        .map(NumberJson::to_scalar)
        .collect::<Result<Vec<S>, _>>()
        .map_err(|e| e.to_string())?;
    let terms = json
        .nonlinearity
        .terms
        .iter()
        .map(|t| {
            Ok(NonlinearTerm {
                p: t.p.clone(),
                pbar: t.pbar.clone(),
                r: t.r,
                a: t.a.to_scalar()?,
            })
        })
        .collect::<Result<Vec<_>, SpecError>>()
        .map_err(|e| e.to_string())?;
    let table = NonlinearityTable::new(
        json.m,
        terms,
        json.nonlinearity.ca,
        json.nonlinearity.b,
        json.nonlinearity.b2,
        json.complex,
    )
    .map_err(|e| e.to_string())?;
    let b = json
        .b_matrix
        .iter()
        .map(|row| row.iter().map(NumberJson::to_scalar).collect::<Result<Vec<S>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let control_rows = if json.control_rows.is_empty() {
        vec![0]
    } else {
        json.control_rows.clone()
    };
    PdeSpec::new(
        json.name.as_deref().unwrap_or("custom"),
        json.n,
        json.m,
        zeta,
        table,
        b,
        control_rows,
        json.complex,
    )
    .map_err(|e| e.to_string())
}

pub fn spec_to_json<S: Scalar>(spec: &PdeSpec<S>) -> SpecJson {
    let num = |v: &S| {
        if S::COMPLEX {
            NumberJson::Complex([v.re_f64(), v.im_f64()])
        } else {
            NumberJson::Real(v.re_f64())
        }
    };
    SpecJson {
        version: 1,
        n: spec.n_order,
        m: spec.m_order,
        zeta: spec.zeta.iter().map(num).collect(),
        nonlinearity: NonlinearityJson {
            terms: spec
                .nonlinearity
                .terms()
                .iter()
                .map(|t| TermJson {
                    p: t.p.clone(),
                    pbar: t.pbar.clone(),
                    r: t.r,
                    a: num(&t.a),
                })
                .collect(),
            ca: spec.nonlinearity.c_a,
            b: spec.nonlinearity.b,
            b2: spec.nonlinearity.b2,
        },
        b_matrix: spec
            .boundary
            .iter()
            .map(|row| row.iter().map(num).collect())
            .collect(),
        complex: spec.complex,
        name: Some(spec.name.clone()),
        control_rows: spec.control_rows.clone(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(default = "default_version")]
    pub version: u32,
    /// One coefficient sequence `α_n` per time component.
    pub components: Vec<Vec<NumberJson>>,
    #[serde(rename = "R")]
    pub radius: f64,
}

pub fn state_from_json<S: Scalar>(text: &str) -> Result<AnalyticState<S>, String> {
    let json: StateJson = serde_json::from_str(text).map_err(|e| format!("state JSON: {e}"))?;
    if json.version != 1 {
        return Err(format!("unsupported state schema version {}", json.version));
    }
    let components = json
        .components
        .iter()
        .map(|c| c.iter().map(NumberJson::to_scalar).collect::<Result<Vec<S>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    certify_state(components, json.radius).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_model::presets::{make_preset, Preset};

    #[test]
    fn spec_round_trip() {
        let spec = make_preset::<f64>(Preset::Kdv, None, None).unwrap();
        let json = serde_json::to_string(&spec_to_json(&spec)).unwrap();
        let back: PdeSpec<f64> = spec_from_json(&json).unwrap();
        assert_eq!(back.zeta, spec.zeta);
        assert_eq!(back.boundary, spec.boundary);
        assert_eq!(back.nonlinearity.terms().len(), 1);
    }

    #[test]
    fn state_parses() {
        let s: AnalyticState<f64> =
            state_from_json(r#"{"components": [[0.0, 1e-3, 0.0, -1e-3]], "R": 12.0}"#).unwrap();
        assert_eq!(s.components[0][1], 1e-3);
        assert!((s.amplitude - 1e-3 * 12.0f64.powi(3) / 6.0).abs() < 1e-12);
    }
}
