//! Independent forward-in-time simulators for the well-posed presets.
//!
//! These are deliberately plain finite-difference schemes — Crank–Nicolson for
//! the linear part, explicit nonlinearity — used as oracles against the series
//! field, never as part of the synthesis itself. Ill-posed presets (backward
//! heat, bad Boussinesq) are refused with a structured error; the good
//! Boussinesq forward march is not wired up in this version, so it is refused
//! as unsupported and its validation rests on residual checks.

use crate::gevrey_toolbox::Trace;
use crate::pde_model::{AnalyticState, PdeSpec, Preset};
use crate::scalar::Scalar;
use nalgebra::{ComplexField, DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("preset `{preset}` is ill posed forward in time: {reason}")]
    IllPosed { preset: String, reason: String },
    #[error("preset `{preset}` has no forward scheme: {reason}")]
    Unsupported { preset: String, reason: String },
    #[error("instability detected at step {step}: norm grew to {norm:e}")]
    Unstable { step: usize, norm: f64 },
    #[error("states sampled on different grids")]
    GridMismatch,
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
}

/// Scalars the finite-difference schemes can integrate.
pub trait SimScalar: Scalar + ComplexField<RealField = f64> {}
impl SimScalar for f64 {}
impl SimScalar for crate::scalar::Complex64 {}

/// Forward simulation configuration; validated at construction.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub preset: Preset,
    /// Spatial points on `[0, 1]`.
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl SimConfig {
    pub fn new(preset: Preset, nx: usize, dt: f64, t_end: f64) -> Result<Self, SimError> {
        if nx < 8 {
            return Err(SimError::BadConfig(format!("nx = {nx} too small")));
        }
        if !(dt > 0.0) || !(t_end > 0.0) || dt > t_end {
            return Err(SimError::BadConfig(format!(
                "need 0 < dt <= T (got dt={dt}, T={t_end})"
            )));
        }
        // The linear part is integrated implicitly (unconditional); the
        // explicit nonlinearity's advective margin is checked per step.
        Ok(SimConfig {
            preset,
            nx,
            dt,
            t_end,
        })
    }

    pub fn x_grid(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|i| i as f64 / (self.nx - 1) as f64)
            .collect()
    }
}

/// Grid samples of the state components on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SampledState<S: Scalar> {
    pub x: Vec<f64>,
    pub components: Vec<Vec<S>>,
}

impl<S: Scalar> SampledState<S> {
    pub fn zero(x: Vec<f64>, n_components: usize) -> Self {
        let components = vec![vec![S::zero(); x.len()]; n_components];
        SampledState { x, components }
    }

    /// Sample an analytic state's Taylor series on a grid.
    pub fn from_analytic(state: &AnalyticState<S>, x: &[f64]) -> Self {
        let components = (0..state.n_components())
            .map(|l| x.iter().map(|&xi| state.eval(l, xi)).collect())
            .collect();
        SampledState {
            x: x.to_vec(),
            components,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub sup_err: f64,
    pub l2_err: f64,
    pub per_component: Vec<(f64, f64)>,
}

/// Sup and (trapezoidal) L² distance between two sampled states.
pub fn compare_states<S: Scalar>(
    a: &SampledState<S>,
    b: &SampledState<S>,
) -> Result<CompareReport, SimError> {
    if a.x.len() != b.x.len()
        || a.components.len() != b.components.len()
        || a.x.iter().zip(&b.x).any(|(p, q)| (p - q).abs() > 1e-12)
    {
        return Err(SimError::GridMismatch);
    }
    let mut per_component = Vec::with_capacity(a.components.len());
    let (mut sup_all, mut l2_sq_all) = (0.0f64, 0.0f64);
    for (ca, cb) in a.components.iter().zip(&b.components) {
        let mut sup = 0.0f64;
        let mut l2_sq = 0.0f64;
        let h = if ca.len() > 1 {
            (a.x[a.x.len() - 1] - a.x[0]) / (ca.len() - 1) as f64
        } else {
            1.0
        };
        for i in 0..ca.len() {
            let d = (ca[i].clone() - cb[i].clone()).abs_f64();
            sup = sup.max(d);
            let w = if i == 0 || i + 1 == ca.len() { 0.5 } else { 1.0 };
            l2_sq += w * h * d * d;
        }
        per_component.push((sup, l2_sq.sqrt()));
        sup_all = sup_all.max(sup);
        l2_sq_all += l2_sq;
    }
    Ok(CompareReport {
        sup_err: sup_all,
        l2_err: l2_sq_all.sqrt(),
        per_component,
    })
}

/// Fornberg weights for the `order`-th derivative at `x0` from nodes `xs`.
fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0f64; order + 1]; n];
    let mut c1 = 1.0f64;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0f64;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Row of FD weights for `∂^order` at grid point `j`, windowed to stay inside
/// the grid; returns (start index, weights).
fn derivative_row(nx: usize, dx: f64, j: usize, order: usize, width: usize) -> (usize, Vec<f64>) {
    let half = width / 2;
    let lo = j.saturating_sub(half).min(nx.saturating_sub(width));
    let xs: Vec<f64> = (0..width).map(|i| (lo + i) as f64 * dx).collect();
    let w = fd_weights(j as f64 * dx, &xs, order);
    (lo, w)
}

enum BcRow {
    /// `y[row] = controls[vi](t)`.
    Value { vi: usize },
    /// `Σ w_k y[lo+k] = controls[vi](t)`.
    Deriv { lo: usize, w: Vec<f64>, vi: usize },
    /// `Σ w_k y[lo+k] = 0`.
    HomDeriv { lo: usize, w: Vec<f64> },
    /// `y[row] = 0`.
    HomValue,
}

struct Scheme<S: SimScalar> {
    bc_rows: Vec<(usize, BcRow)>,
    /// Linear operator `P` on PDE rows (untouched rows only).
    linear: DMatrix<S>,
    has_nonlinearity: bool,
}

fn build_scheme<S: SimScalar>(
    config: &SimConfig,
    spec: &PdeSpec<S>,
) -> Result<Scheme<S>, SimError> {
    let preset = config.preset;
    if preset.ill_posed() {
        return Err(SimError::IllPosed {
            preset: preset.name().to_string(),
            reason: "the forward initial value problem amplifies high frequencies without bound"
                .to_string(),
        });
    }
    if !preset.forward_well_posed() {
        return Err(SimError::Unsupported {
            preset: preset.name().to_string(),
            reason: "second-order-in-time fourth-order schemes are not wired up; validate via residual checks"
                .to_string(),
        });
    }
    let nx = config.nx;
    let dx = 1.0 / (nx - 1) as f64;
    let m = spec.m_order;
    let width = m + 1;

    // Boundary rows at x = 0 from the spec's B (selector rows), packed at the
    // left edge; control rows at x = 1 packed at the right edge.
    let mut bc_rows: Vec<(usize, BcRow)> = Vec::new();
    let mut used = vec![false; nx];
    for brow in &spec.boundary {
        let order = brow
            .iter()
            .position(|v| !num_traits::Zero::is_zero(v))
            .expect("row-reduced boundary");
        let row_idx = bc_rows.len();
        used[row_idx] = true;
        if order == 0 {
            bc_rows.push((row_idx, BcRow::HomValue));
        } else {
            let (lo, w) = derivative_row(nx, dx, 0, order, width.max(order + 2));
            bc_rows.push((row_idx, BcRow::HomDeriv { lo, w }));
        }
    }
    for (vi, &order) in spec.control_rows.iter().enumerate() {
        let row_idx = nx - 1 - vi;
        used[row_idx] = true;
        if order == 0 {
            bc_rows.push((row_idx, BcRow::Value { vi }));
        } else {
            let (lo, w) = derivative_row(nx, dx, nx - 1, order, width.max(order + 2));
            bc_rows.push((row_idx, BcRow::Deriv { lo, w, vi }));
        }
    }

    let mut linear = DMatrix::<S>::zeros(nx, nx);
    for j in 0..nx {
        if used[j] {
            continue;
        }
        for (ord, zeta) in spec.zeta.iter().enumerate() {
            if num_traits::Zero::is_zero(zeta) {
                continue;
            }
            if ord == 0 {
                linear[(j, j)] += zeta.clone();
                continue;
            }
            let (lo, w) = derivative_row(nx, dx, j, ord, width);
            for (k, &wk) in w.iter().enumerate() {
                linear[(j, lo + k)] += zeta.clone() * S::try_from_f64_pair(wk, 0.0).unwrap();
            }
        }
    }
    Ok(Scheme {
        bc_rows,
        linear,
        has_nonlinearity: !spec.nonlinearity.is_empty(),
    })
}

#[derive(Debug, Clone)]
pub struct SimResult<S: Scalar> {
    pub terminal: SampledState<S>,
    /// `(t, values)` snapshots when requested.
    pub trajectory: Vec<(f64, Vec<S>)>,
    pub steps: usize,
}

/// March the preset forward from `initial` with boundary controls sampled
/// from trace evaluators at scheme time points (no interpolation beyond
/// machine evaluation).
///
/// Supported: first-order-in-time presets (heat family, KdV, KS, GL,
/// linear-with-potential) via Crank–Nicolson on `P` plus explicit
/// nonlinearity. Refuses ill-posed and unsupported presets.
pub fn simulate_forward<S: SimScalar>(
    config: &SimConfig,
    spec: &PdeSpec<S>,
    initial: &SampledState<S>,
    controls: &[Trace<S>],
    keep_trajectory: Option<usize>,
) -> Result<SimResult<S>, SimError> {
    let scheme = build_scheme(config, spec)?;
    if spec.n_order != 1 {
        return Err(SimError::Unsupported {
            preset: config.preset.name().to_string(),
            reason: "only first-order-in-time presets are integrated".to_string(),
        });
    }
    if controls.len() != spec.control_rows.len() {
        return Err(SimError::BadConfig(format!(
            "{} control traces supplied, preset wants {}",
            controls.len(),
            spec.control_rows.len()
        )));
    }
    let nx = config.nx;
    if initial.x.len() != nx || initial.components.len() != 1 {
        return Err(SimError::GridMismatch);
    }
    let dt = config.dt;
    let steps = (config.t_end / dt).round() as usize;
    let half = S::try_from_f64_pair(dt / 2.0, 0.0).unwrap();

    let mut m_impl = DMatrix::<S>::identity(nx, nx) - scheme.linear.clone() * half.clone();
    let m_expl = DMatrix::<S>::identity(nx, nx) + scheme.linear.clone() * half;
    for (row, bc) in &scheme.bc_rows {
        for c in 0..nx {
            m_impl[(*row, c)] = S::zero();
        }
        match bc {
            BcRow::Value { .. } | BcRow::HomValue => {
                m_impl[(*row, *row)] = S::one();
            }
            BcRow::Deriv { lo, w, .. } | BcRow::HomDeriv { lo, w } => {
                for (k, &wk) in w.iter().enumerate() {
                    m_impl[(*row, lo + k)] = S::try_from_f64_pair(wk, 0.0).unwrap();
                }
            }
        }
    }
    let lu = m_impl.lu();

    let mut y = DVector::<S>::from_vec(initial.components[0].clone());
    let base_scale = y.iter().map(Scalar::abs_f64).fold(0.0f64, f64::max);
    let mut trajectory = Vec::new();
    let snap_every = keep_trajectory.unwrap_or(0);
    let dx = 1.0 / (nx - 1) as f64;

    for step in 0..steps {
        let t_next = (step + 1) as f64 * dt;
        let mut rhs = &m_expl * &y;
        if scheme.has_nonlinearity {
            let f = eval_nonlinearity(spec, &y, dx, &scheme);
            let dt_s = S::try_from_f64_pair(dt, 0.0).unwrap();
            rhs += f * dt_s;
        }
        for (row, bc) in &scheme.bc_rows {
            rhs[*row] = match bc {
                BcRow::HomValue | BcRow::HomDeriv { .. } => S::zero(),
                BcRow::Value { vi } | BcRow::Deriv { vi, .. } => controls[*vi].value(t_next),
            };
        }
        y = lu.solve(&rhs).ok_or(SimError::Unstable {
            step,
            norm: f64::INFINITY,
        })?;
        let norm = y.iter().map(Scalar::abs_f64).fold(0.0f64, f64::max);
        let ctrl_scale = controls
            .iter()
            .map(|c| c.value(t_next).abs_f64())
            .fold(0.0f64, f64::max);
        if !norm.is_finite() || norm > 1e6 * (base_scale + ctrl_scale + 1e-12) {
            return Err(SimError::Unstable { step, norm });
        }
        if snap_every > 0 && (step + 1) % snap_every == 0 {
            trajectory.push((t_next, y.iter().cloned().collect()));
        }
    }
    Ok(SimResult {
        terminal: SampledState {
            x: initial.x.clone(),
            components: vec![y.iter().cloned().collect()],
        },
        trajectory,
        steps,
    })
}

/// Pointwise nonlinearity on PDE rows (zeroed on boundary rows).
fn eval_nonlinearity<S: SimScalar>(
    spec: &PdeSpec<S>,
    y: &DVector<S>,
    dx: f64,
    scheme: &Scheme<S>,
) -> DVector<S> {
    let nx = y.len();
    let m = spec.m_order;
    let mut derivs: Vec<Vec<S>> = vec![y.iter().cloned().collect()];
    for ord in 1..m {
        let width = (ord + 3).min(nx);
        let mut d = vec![S::zero(); nx];
        for (j, slot) in d.iter_mut().enumerate() {
            let (lo, w) = derivative_row(nx, dx, j, ord, width);
            let mut acc = S::zero();
            for (k, &wk) in w.iter().enumerate() {
                acc = acc + y[lo + k].clone() * S::try_from_f64_pair(wk, 0.0).unwrap();
            }
            *slot = acc;
        }
        derivs.push(d);
    }
    let mut out = DVector::<S>::zeros(nx);
    let bc_set: Vec<usize> = scheme.bc_rows.iter().map(|(r, _)| *r).collect();
    for j in 0..nx {
        if bc_set.contains(&j) {
            continue;
        }
        let args: Vec<S> = (0..m).map(|i| derivs[i][j].clone()).collect();
        let xj = S::try_from_f64_pair(j as f64 * dx, 0.0).unwrap();
        out[j] = spec.nonlinearity.eval(&xj, &args);
    }
    out
}
