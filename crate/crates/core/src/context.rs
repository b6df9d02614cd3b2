//! Finite state/context systems and their transition kernels.
//!
//! An entity is described by a set of states, a set of contexts, and a kernel
//! `prob(q, p, e)` giving the probability that context `e` changes state `p`
//! into state `q`. Kernels are immutable once built; row validity is computed
//! once at construction and sampling refuses invalid kernels.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, SimRng};

/// Row sums must equal one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("empty or duplicate label: {0:?}")]
    Label(String),
    #[error("kernel is not a valid transition kernel ({0} offending rows)")]
    Invalid(usize),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown context {0:?}")]
    UnknownContext(String),
    #[error("context sequence is empty")]
    EmptyContexts,
    #[error("malformed kernel file: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateId {
    pub label: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextId {
    pub label: String,
    pub index: usize,
}

/// On-disk kernel layout. `prob` is indexed `[context][source][target]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub states: Vec<String>,
    pub contexts: Vec<String>,
    pub prob: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct TransitionKernel {
    states: Vec<StateId>,
    contexts: Vec<ContextId>,
    // flat [context][source][target]
    prob: Vec<f64>,
    valid: bool,
}

/// One `(source, context)` row that fails the kernel invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    pub source: String,
    pub context: String,
    pub sum: f64,
    /// Targets whose entry is outside `[0, 1]` (or not a number).
    pub out_of_range: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<RowViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial: StateId,
    pub steps: Vec<(ContextId, StateId)>,
    pub seed: u64,
}

fn check_labels(labels: &[String]) -> Result<(), KernelError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if l.is_empty() || !seen.insert(l.as_str()) {
            return Err(KernelError::Label(l.clone()));
        }
    }
    Ok(())
}

impl TransitionKernel {
    /// Builds a kernel from labels and a `[context][source][target]` table.
    ///
    /// Only the structure is checked here; probabilistic validity is recorded
    /// and can be inspected with [`validate_kernel`].
    pub fn new(
        states: Vec<String>,
        contexts: Vec<String>,
        prob: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, KernelError> {
        check_labels(&states)?;
        check_labels(&contexts)?;
        let n = states.len();
        if n == 0 || contexts.is_empty() {
            return Err(KernelError::Dimension("state and context sets must be nonempty".into()));
        }
        if prob.len() != contexts.len() {
            return Err(KernelError::Dimension(format!(
                "{} context tables for {} contexts",
                prob.len(),
                contexts.len()
            )));
        }
        let mut flat = Vec::with_capacity(contexts.len() * n * n);
        for (e, table) in prob.iter().enumerate() {
            if table.len() != n {
                return Err(KernelError::Dimension(format!(
                    "context {:?}: {} source rows for {} states",
                    contexts[e],
                    table.len(),
                    n
                )));
            }
            for (p, row) in table.iter().enumerate() {
                if row.len() != n {
                    return Err(KernelError::Dimension(format!(
                        "context {:?}, source {:?}: {} entries for {} states",
                        contexts[e],
                        states[p],
                        row.len(),
                        n
                    )));
                }
                flat.extend_from_slice(row);
            }
        }
        let mut kernel = TransitionKernel {
            states: states
                .into_iter()
                .enumerate()
                .map(|(index, label)| StateId { label, index })
                .collect(),
            contexts: contexts
                .into_iter()
                .enumerate()
                .map(|(index, label)| ContextId { label, index })
                .collect(),
            prob: flat,
            valid: false,
        };
        kernel.valid = validate_kernel(&kernel).valid;
        Ok(kernel)
    }

    pub fn from_file(file: KernelFile) -> Result<Self, KernelError> {
        Self::new(file.states, file.contexts, file.prob)
    }

    /// Parses the JSON kernel format and enforces every kernel invariant.
    pub fn from_json(text: &str) -> Result<Self, KernelError> {
        let file: KernelFile = serde_json::from_str(text)?;
        let kernel = Self::from_file(file)?;
        if !kernel.valid {
            return Err(KernelError::Invalid(validate_kernel(&kernel).violations.len()));
        }
        Ok(kernel)
    }

    pub fn to_file(&self) -> KernelFile {
        let n = self.states.len();
        KernelFile {
            description: None,
            states: self.states.iter().map(|s| s.label.clone()).collect(),
            contexts: self.contexts.iter().map(|c| c.label.clone()).collect(),
            prob: (0..self.contexts.len())
                .map(|e| (0..n).map(|p| self.row(p, e).to_vec()).collect())
                .collect(),
        }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn contexts(&self) -> &[ContextId] {
        &self.contexts
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn state(&self, label: &str) -> Option<&StateId> {
        self.states.iter().find(|s| s.label == label)
    }

    pub fn context(&self, label: &str) -> Option<&ContextId> {
        self.contexts.iter().find(|c| c.label == label)
    }

    /// `prob(target, source, context)` by index.
    pub fn prob(&self, target: usize, source: usize, context: usize) -> f64 {
        self.row(source, context)[target]
    }

    /// Distribution over targets for a `(source, context)` pair.
    pub fn row(&self, source: usize, context: usize) -> &[f64] {
        let n = self.states.len();
        let start = (context * n + source) * n;
        &self.prob[start..start + n]
    }

    fn resolve_state(&self, s: &StateId) -> Result<usize, KernelError> {
        match self.states.get(s.index) {
            Some(k) if k.label == s.label => Ok(s.index),
            _ => Err(KernelError::UnknownState(s.label.clone())),
        }
    }

    fn resolve_context(&self, c: &ContextId) -> Result<usize, KernelError> {
        match self.contexts.get(c.index) {
            Some(k) if k.label == c.label => Ok(c.index),
            _ => Err(KernelError::UnknownContext(c.label.clone())),
        }
    }
}

/// Checks that every `(source, context)` row is a probability distribution.
pub fn validate_kernel(kernel: &TransitionKernel) -> ValidationReport {
    let mut violations = Vec::new();
    for ctx in &kernel.contexts {
        for src in &kernel.states {
            let row = kernel.row(src.index, ctx.index);
            let sum: f64 = row.iter().sum();
            let out_of_range: Vec<String> = row
                .iter()
                .zip(&kernel.states)
                .filter(|(p, _)| !(0.0..=1.0).contains(*p))
                .map(|(_, t)| t.label.clone())
                .collect();
            if !out_of_range.is_empty() || (sum - 1.0).abs() > NORMALIZATION_TOL || sum.is_nan() {
                violations.push(RowViolation {
                    source: src.label.clone(),
                    context: ctx.label.clone(),
                    sum,
                    out_of_range,
                });
            }
        }
    }
    ValidationReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// Draws the state that `context` sends `state` to.
pub fn sample_step(
    kernel: &TransitionKernel,
    state: &StateId,
    context: &ContextId,
    rng: &mut SimRng,
) -> Result<StateId, KernelError> {
    if !kernel.valid {
        return Err(KernelError::Invalid(validate_kernel(kernel).violations.len()));
    }
    let p = kernel.resolve_state(state)?;
    let e = kernel.resolve_context(context)?;
    let row = kernel.row(p, e);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (q, &w) in row.iter().enumerate() {
        if w > 0.0 {
            last_positive = q;
            acc += w;
            if u < acc {
                return Ok(kernel.states[q].clone());
            }
        }
    }
    // u landed in the rounding gap above the accumulated sum
    Ok(kernel.states[last_positive].clone())
}

/// Applies `contexts` in order starting from `initial`, reproducibly from `seed`.
pub fn sample_trajectory(
    kernel: &TransitionKernel,
    initial: &StateId,
    contexts: &[ContextId],
    seed: u64,
) -> Result<Trajectory, KernelError> {
    if contexts.is_empty() {
        return Err(KernelError::EmptyContexts);
    }
    kernel.resolve_state(initial)?;
    let mut rng = rng::seeded(seed);
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(contexts.len());
    for ctx in contexts {
        let next = sample_step(kernel, &current, ctx, &mut rng)?;
        steps.push((ctx.clone(), next.clone()));
        current = next;
    }
    Ok(Trajectory {
        initial: initial.clone(),
        steps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(rows: [[f64; 2]; 2]) -> TransitionKernel {
        TransitionKernel::new(
            vec!["a".into(), "b".into()],
            vec!["e".into()],
            vec![rows.iter().map(|r| r.to_vec()).collect()],
        )
        .unwrap()
    }

    #[test]
    fn uniform_kernel_is_valid() {
        let k = two_state([[0.5, 0.5], [0.5, 0.5]]);
        let r = validate_kernel(&k);
        assert!(r.valid);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn broken_row_is_reported() {
        let k = two_state([[0.5, 0.4], [0.5, 0.5]]);
        let r = validate_kernel(&k);
        assert!(!r.valid);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].source, "a");
        assert!((r.violations[0].sum - 0.9).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_entry_is_reported() {
        let k = two_state([[1.5, -0.5], [0.5, 0.5]]);
        let r = validate_kernel(&k);
        assert!(!r.valid);
        assert_eq!(r.violations[0].out_of_range, vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn sphere_row_at_sixty_degrees_is_valid() {
        // cos^2(pi/6) = 3/4
        let p = (std::f64::consts::FRAC_PI_6).cos().powi(2);
        let k = two_state([[p, 1.0 - p], [0.0, 1.0]]);
        assert!((p - 0.75).abs() < 1e-15);
        assert!(validate_kernel(&k).valid);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = TransitionKernel::new(
            vec!["a".into(), "b".into()],
            vec!["e".into()],
            vec![vec![vec![1.0, 0.0]]],
        )
        .unwrap_err();
        assert!(matches!(err, KernelError::Dimension(_)));
        let err = TransitionKernel::new(
            vec!["a".into(), "a".into()],
            vec!["e".into()],
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        )
        .unwrap_err();
        assert!(matches!(err, KernelError::Label(_)));
    }

    #[test]
    fn invalid_kernel_rejected_before_sampling() {
        let k = two_state([[0.5, 0.4], [0.5, 0.5]]);
        let mut rng = rng::seeded(0);
        let err = sample_step(&k, &k.states()[0], &k.contexts()[0], &mut rng).unwrap_err();
        assert!(matches!(err, KernelError::Invalid(1)));
        assert!(TransitionKernel::from_json(
            r#"{"states":["a","b"],"contexts":["e"],"prob":[[[0.5,0.4],[0.5,0.5]]]}"#
        )
        .is_err());
    }

    #[test]
    fn deterministic_row_always_hits() {
        let k = two_state([[0.0, 1.0], [0.5, 0.5]]);
        for seed in 0..50 {
            let mut rng = rng::seeded(seed);
            let q = sample_step(&k, &k.states()[0], &k.contexts()[0], &mut rng).unwrap();
            assert_eq!(q.label, "b");
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let k = two_state([[0.75, 0.25], [0.5, 0.5]]);
        let draw = |seed| {
            let mut rng = rng::seeded(seed);
            (0..100)
                .map(|_| sample_step(&k, &k.states()[0], &k.contexts()[0], &mut rng).unwrap().index)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
    }

    #[test]
    fn single_context_trajectory_hits_forced_state() {
        let k = two_state([[0.0, 1.0], [0.0, 1.0]]);
        let t = sample_trajectory(&k, &k.states()[0], &k.contexts()[..1], 3).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].1.label, "b");
    }

    #[test]
    fn identity_kernel_gives_constant_trajectory() {
        let k = TransitionKernel::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec!["e".into(), "f".into()],
            vec![
                vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
                2
            ],
        )
        .unwrap();
        let ctxs: Vec<ContextId> = [0, 1, 1, 0, 1].iter().map(|&i| k.contexts()[i].clone()).collect();
        let t = sample_trajectory(&k, &k.states()[1], &ctxs, 9).unwrap();
        assert!(t.steps.iter().all(|(_, s)| s.label == "y"));
    }

    #[test]
    fn trajectory_errors() {
        let k = two_state([[0.5, 0.5], [0.5, 0.5]]);
        assert!(matches!(
            sample_trajectory(&k, &k.states()[0], &[], 1),
            Err(KernelError::EmptyContexts)
        ));
        let ghost = StateId { label: "ghost".into(), index: 0 };
        assert!(matches!(
            sample_trajectory(&k, &ghost, &k.contexts()[..1], 1),
            Err(KernelError::UnknownState(_))
        ));
        let ghost_ctx = ContextId { label: "f".into(), index: 3 };
        assert!(matches!(
            sample_trajectory(&k, &k.states()[0], &[ghost_ctx], 1),
            Err(KernelError::UnknownContext(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let k = two_state([[0.75, 0.25], [0.5, 0.5]]);
        let text = serde_json::to_string(&k.to_file()).unwrap();
        let back = TransitionKernel::from_json(&text).unwrap();
        assert_eq!(back.row(0, 0), k.row(0, 0));
    }
}
