//! The sphere-elastic model and its ε-generalization.
//!
//! A state is a point `v` on the unit sphere. A context is an axis `u`
//! carrying an elastic from `u` to `-u` that can only break within a central
//! segment of half-length `ε`. The state falls orthogonally onto the elastic
//! at signed position `c = u·v`; it ends at `u` when the break point lies
//! below `c`, and at `-u` otherwise. `ε = 1` is the spin-1/2 model, `ε = 0`
//! the deterministic classical limit.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{KernelError, TransitionKernel};
use crate::rng::SimRng;

/// Unit vectors must have norm 1 within this tolerance.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("vector {0:?} is not a unit vector")]
    NotUnit([f64; 3]),
    #[error("epsilon {0} outside [0, 1]")]
    Epsilon(f64),
    #[error("empty state or context list")]
    Empty,
    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(v: &[f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

fn check_unit(v: [f64; 3]) -> Result<[f64; 3], SphereError> {
    if v.iter().all(|x| x.is_finite()) && (norm(&v) - 1.0).abs() <= UNIT_TOL {
        Ok(v)
    } else {
        Err(SphereError::NotUnit(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SphereState {
    v: [f64; 3],
}

impl SphereState {
    pub fn new(v: [f64; 3]) -> Result<Self, SphereError> {
        check_unit(v).map(|v| SphereState { v })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(v: [f64; 3]) -> Result<Self, SphereError> {
        let r = norm(&v);
        if !(r.is_finite() && r > 0.0) {
            return Err(SphereError::NotUnit(v));
        }
        Self::new([v[0] / r, v[1] / r, v[2] / r])
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        SphereState {
            v: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        }
    }

    pub fn vector(&self) -> [f64; 3] {
        self.v
    }

    pub fn antipode(&self) -> Self {
        SphereState {
            v: [-self.v[0], -self.v[1], -self.v[2]],
        }
    }
}

impl TryFrom<[f64; 3]> for SphereState {
    type Error = SphereError;
    fn try_from(v: [f64; 3]) -> Result<Self, SphereError> {
        SphereState::new(v)
    }
}

impl From<SphereState> for [f64; 3] {
    fn from(s: SphereState) -> [f64; 3] {
        s.v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContext")]
pub struct EpsilonContext {
    pub axis: SphereState,
    epsilon: f64,
}

#[derive(Deserialize)]
struct RawContext {
    axis: [f64; 3],
    epsilon: f64,
}

impl TryFrom<RawContext> for EpsilonContext {
    type Error = SphereError;
    fn try_from(raw: RawContext) -> Result<Self, SphereError> {
        EpsilonContext::new(raw.axis, raw.epsilon)
    }
}

impl EpsilonContext {
    pub fn new(axis: [f64; 3], epsilon: f64) -> Result<Self, SphereError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(SphereError::Epsilon(epsilon));
        }
        Ok(EpsilonContext {
            axis: SphereState::new(axis)?,
            epsilon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Signed foot-point of `state` on the elastic.
    pub fn foot_point(&self, state: &SphereState) -> f64 {
        dot(&self.axis.v, &state.v).clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum End {
    Axis,
    AntiAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub end: End,
    pub resulting_state: SphereState,
    /// Where the elastic broke; `None` for analytic evaluation.
    pub break_point: Option<f64>,
}

/// `(p_axis, p_anti)` for `ctx` acting on `state`.
pub fn transition_probability(state: &SphereState, ctx: &EpsilonContext) -> (f64, f64) {
    let c = ctx.foot_point(state);
    let eps = ctx.epsilon;
    if eps == 0.0 {
        // unstable equilibrium at the exact middle point
        return if c > 0.0 {
            (1.0, 0.0)
        } else if c < 0.0 {
            (0.0, 1.0)
        } else {
            (0.5, 0.5)
        };
    }
    if c >= eps {
        (1.0, 0.0)
    } else if c <= -eps {
        (0.0, 1.0)
    } else {
        let p = (eps + c) / (2.0 * eps);
        (p, 1.0 - p)
    }
}

/// Draws a break point and returns where the state ends up.
pub fn simulate_measurement(
    state: &SphereState,
    ctx: &EpsilonContext,
    rng: &mut SimRng,
) -> MeasurementOutcome {
    let c = ctx.foot_point(state);
    let eps = ctx.epsilon;
    let (break_point, to_axis) = if eps == 0.0 {
        let to_axis = if c == 0.0 { rng.random::<bool>() } else { c > 0.0 };
        (0.0, to_axis)
    } else {
        let bp = -eps + 2.0 * eps * rng.random::<f64>();
        (bp, c > bp)
    };
    let (end, resulting_state) = if to_axis {
        (End::Axis, ctx.axis)
    } else {
        (End::AntiAxis, ctx.axis.antipode())
    };
    MeasurementOutcome {
        end,
        resulting_state,
        break_point: Some(break_point),
    }
}

/// Predetermined answer of a state for one question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Answer {
    /// Predetermined yes: `c >= ε`.
    Y,
    /// Predetermined no: `c <= -ε`.
    N,
    /// Undetermined; the answer forms during questioning.
    U,
}

/// Region of the sphere relative to three questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern(pub [Answer; 3]);

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.0 {
            write!(f, "{a:?}")?;
        }
        Ok(())
    }
}

pub fn classify_answer(state: &SphereState, ctx: &EpsilonContext) -> Answer {
    let c = ctx.foot_point(state);
    if c >= ctx.epsilon {
        Answer::Y
    } else if c <= -ctx.epsilon {
        Answer::N
    } else {
        Answer::U
    }
}

pub fn classify_region(state: &SphereState, axes: &[EpsilonContext; 3]) -> SignPattern {
    SignPattern([
        classify_answer(state, &axes[0]),
        classify_answer(state, &axes[1]),
        classify_answer(state, &axes[2]),
    ])
}

/// Finite kernel over the given states plus the two end states of every
/// context (labelled `"<context>:axis"` and `"<context>:anti"`).
pub fn export_finite_kernel(
    states: &[(String, SphereState)],
    contexts: &[(String, EpsilonContext)],
) -> Result<TransitionKernel, SphereError> {
    if states.is_empty() || contexts.is_empty() {
        return Err(SphereError::Empty);
    }
    let mut all: Vec<(String, SphereState)> = states.to_vec();
    for (label, ctx) in contexts {
        all.push((format!("{label}:axis"), ctx.axis));
        all.push((format!("{label}:anti"), ctx.axis.antipode()));
    }
    let mut seen = std::collections::HashSet::new();
    for (label, _) in &all {
        if !seen.insert(label.as_str()) {
            return Err(SphereError::DuplicateLabel(label.clone()));
        }
    }
    let n = all.len();
    let base = states.len();
    let prob = contexts
        .iter()
        .enumerate()
        .map(|(k, (_, ctx))| {
            all.iter()
                .map(|(_, s)| {
                    let (p_axis, p_anti) = transition_probability(s, ctx);
                    let mut row = vec![0.0; n];
                    row[base + 2 * k] = p_axis;
                    row[base + 2 * k + 1] = p_anti;
                    row
                })
                .collect()
        })
        .collect();
    Ok(TransitionKernel::new(
        all.into_iter().map(|(l, _)| l).collect(),
        contexts.iter().map(|(l, _)| l.clone()).collect(),
        prob,
    )?)
}
