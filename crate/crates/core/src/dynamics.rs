//! Continuous-time interpolation of the inference step.
//!
//! The step matrix `U_D` is a permutation, so it is unitary and diagonalizes
//! cycle by cycle: on a cycle `c_0 → c_1 → … → c_{L-1} → c_0` the vectors
//! `v_k = L^{-1/2} Σ_j ω^{-jk} e_{c_j}` (with `ω = e^{2πi/L}`) satisfy
//! `U_D v_k = ω^k v_k`. Taking the principal branch of each eigenphase gives
//! the generator `H = log(U_D)/τ` and the one-parameter group
//! `U(t) = exp(tH)` with `U(τ) = U_D`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::liar::{build_step_matrix, Claim, LiarConfig, LiarError, StepMatrix};

pub type C64 = Complex<f64>;

/// Step duration putting the five-sentence contradiction at `t = 5π/2`.
pub const DEFAULT_TAU: f64 = PI / 2.0;
/// `exp(τH)` must reproduce the step matrix within this bound.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// A claim counts as reached when its probability is at least `1 - this`.
pub const CONTRADICTION_TOL: f64 = 1e-6;
/// Description of the logarithm branch, recorded in run metadata.
pub const BRANCH: &str = "principal: eigenphases in (-pi, pi], phase pi kept as +pi";

#[derive(Debug, Clone)]
struct Mode {
    phase: f64,
    vector: DVector<C64>,
}

#[derive(Debug, Clone)]
pub struct EvolutionOperator {
    generator: DMatrix<C64>,
    tau: f64,
    modes: Vec<Mode>,
}

/// `2πk/L` wrapped into `(-π, π]`.
fn principal_phase(k: usize, len: usize) -> f64 {
    if 2 * k == len {
        PI
    } else if 2 * k < len {
        2.0 * PI * k as f64 / len as f64
    } else {
        -2.0 * PI * (len - k) as f64 / len as f64
    }
}

fn outer(v: &DVector<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Generator of the continuous evolution interpolating `step` at spacing `tau`.
pub fn extract_hamiltonian(step: &StepMatrix, tau: f64) -> Result<EvolutionOperator, LiarError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(LiarError::Tau(tau));
    }
    let n = step.dim();
    let mut modes = Vec::with_capacity(n);
    for cycle in step.cycles() {
        let len = cycle.len();
        let norm = (len as f64).sqrt().recip();
        for k in 0..len {
            let mut v = DVector::from_element(n, C64::new(0.0, 0.0));
            for (j, &basis) in cycle.iter().enumerate() {
                // ω^{-jk}; reduce jk mod L first to keep the angle small
                let angle = -2.0 * PI * ((j * k) % len) as f64 / len as f64;
                v[basis] = C64::from_polar(norm, angle);
            }
            modes.push(Mode {
                phase: principal_phase(k, len),
                vector: v,
            });
        }
    }

    let mut generator = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for mode in &modes {
        generator += outer(&mode.vector) * C64::new(0.0, mode.phase / tau);
    }
    // remove roundoff so the generator is skew-Hermitian to the last bit
    let generator = (&generator - generator.adjoint()) * C64::new(0.5, 0.0);

    let op = EvolutionOperator { generator, tau, modes };
    let err = max_abs_diff(&op.unitary(tau), &to_complex(&step.matrix()));
    if err > RECONSTRUCTION_TOL || err.is_nan() {
        return Err(LiarError::Decomposition(err));
    }
    Ok(op)
}

impl EvolutionOperator {
    pub fn generator(&self) -> &DMatrix<C64> {
        &self.generator
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    /// Eigenvalues of the generator (purely imaginary, `iφ/τ`).
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.modes.iter().map(|m| C64::new(0.0, m.phase / self.tau)).collect()
    }

    /// Principal eigenphases `φ` of the step matrix.
    pub fn eigenphases(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.phase).collect()
    }

    /// `U(t) = exp(tH)`, assembled from the spectral decomposition.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let n = self.dim();
        let mut u = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for mode in &self.modes {
            u += outer(&mode.vector) * C64::from_polar(1.0, mode.phase * t / self.tau);
        }
        u
    }

    /// `U(t) ψ` without forming the full matrix.
    pub fn evolve(&self, t: f64, psi: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::from_element(self.dim(), C64::new(0.0, 0.0));
        for mode in &self.modes {
            let coeff = mode.vector.dotc(psi) * C64::from_polar(1.0, mode.phase * t / self.tau);
            out += &mode.vector * coeff;
        }
        out
    }
}

/// Outcome probabilities of every claim along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityTrace {
    pub hypothesis: Claim,
    pub tau: f64,
    /// Claims in basis order; `probs[t][k]` belongs to `claims[k]`.
    pub claims: Vec<Claim>,
    pub times: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
}

impl ProbabilityTrace {
    pub fn claim_index(&self, claim: Claim) -> Option<usize> {
        self.claims.iter().position(|c| *c == claim)
    }

    /// Probability series of one claim.
    pub fn series(&self, claim: Claim) -> Option<Vec<f64>> {
        let k = self.claim_index(claim)?;
        Some(self.probs.iter().map(|row| row[k]).collect())
    }
}

/// Equal-weight superposition of all `2m` claims.
pub fn initial_superposition(dim: usize) -> DVector<C64> {
    DVector::from_element(dim, C64::new((dim as f64).sqrt().recip(), 0.0))
}

/// `P_h Ψ₀`, renormalized: the state right after the hypothesis is taken.
pub fn hypothesis_state(config: &LiarConfig, hypothesis: Claim) -> Result<DVector<C64>, LiarError> {
    config.check_claim(hypothesis)?;
    let psi0 = initial_superposition(config.dim());
    let h = config.index_of(hypothesis);
    let mut projected = DVector::from_element(config.dim(), C64::new(0.0, 0.0));
    projected[h] = psi0[h];
    let norm = projected.norm();
    Ok(projected / C64::new(norm, 0.0))
}

/// `|⟨e_claim, U(t) P_h Ψ₀⟩|²` for every claim and every time in `times`.
pub fn probability_trace(
    config: &LiarConfig,
    hypothesis: Claim,
    times: &[f64],
    tau: f64,
) -> Result<ProbabilityTrace, LiarError> {
    if times.is_empty() {
        return Err(LiarError::EmptyGrid);
    }
    let psi = hypothesis_state(config, hypothesis)?;
    let op = extract_hamiltonian(&build_step_matrix(config), tau)?;
    let probs = times
        .par_iter()
        .map(|&t| op.evolve(t, &psi).iter().map(|z| z.norm_sqr()).collect())
        .collect();
    Ok(ProbabilityTrace {
        hypothesis,
        tau,
        claims: config.claims(),
        times: times.to_vec(),
        probs,
    })
}

/// Grid times at which the negated hypothesis is (numerically) certain.
pub fn find_contradiction_times(trace: &ProbabilityTrace, hypothesis: Claim) -> Vec<f64> {
    let Some(k) = trace.claim_index(hypothesis.negated()) else {
        return Vec::new();
    };
    let mut out: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.probs)
        .filter(|(_, row)| row[k] >= 1.0 - CONTRADICTION_TOL)
        .map(|(t, _)| *t)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// `start, start + step, …` up to `stop` (inclusive within half a step).
pub fn time_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, LiarError> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(LiarError::Grid("non-finite bound".into()));
    }
    if step <= 0.0 {
        return Err(LiarError::Grid(format!("step {step} must be positive")));
    }
    if stop < start {
        return Err(LiarError::Grid(format!("stop {stop} before start {start}")));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(LiarError::Grid(format!("{count} points is too many")));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liar::{is_paradoxical, parse_config};

    const FIVE: &str = "1: sentence 3 is false
2: sentence 5 is false
3: sentence 2 is true
4: sentence 1 is true
5: sentence 4 is false";

    fn five() -> LiarConfig {
        parse_config(FIVE).unwrap()
    }

    #[test]
    fn phases_are_principal() {
        assert_eq!(principal_phase(0, 10), 0.0);
        assert_eq!(principal_phase(5, 10), PI);
        assert!((principal_phase(6, 10) + 0.8 * PI).abs() < 1e-15);
        assert_eq!(principal_phase(1, 2), PI);
    }

    #[test]
    fn ten_cycle_generator() {
        let step = build_step_matrix(&five());
        let op = extract_hamiltonian(&step, DEFAULT_TAU).unwrap();
        let h = op.generator();
        assert!(max_abs_diff(h, &-h.adjoint()) <= 1e-12);
        // oracle: direct Padé exponential of τH
        let direct = (h * C64::new(DEFAULT_TAU, 0.0)).exp();
        assert!(max_abs_diff(&direct, &to_complex(&step.matrix())) <= 1e-10);
        let mut phases: Vec<f64> = op.eigenphases();
        phases.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = (0..10)
            .map(|k| {
                let p = 2.0 * PI * k as f64 / 10.0;
                if p > PI + 1e-12 { p - 2.0 * PI } else { p }
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in phases.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_has_zero_generator() {
        let step = build_step_matrix(&parse_config("1: sentence 1 is true").unwrap());
        let op = extract_hamiltonian(&step, 1.3).unwrap();
        assert!(op.generator().iter().all(|z| z.norm() == 0.0));
        for t in [0.0, 0.7, 12.0] {
            assert!(max_abs_diff(&op.unitary(t), &DMatrix::identity(2, 2)) < 1e-15);
        }
    }

    #[test]
    fn swap_is_periodic() {
        let step = build_step_matrix(&parse_config("1: sentence 1 is false").unwrap());
        let op = extract_hamiltonian(&step, DEFAULT_TAU).unwrap();
        let swap = to_complex(&step.matrix());
        assert!(max_abs_diff(&op.unitary(PI / 2.0), &swap) < 1e-15);
        for t in [0.1, 1.0, 2.5] {
            assert!(max_abs_diff(&op.unitary(t), &op.unitary(t + 2.0 * PI)) < 1e-12);
        }
        // analytic: P(F) = sin²(t) at τ = π/2
        let tr = probability_trace(&parse_config("1: sentence 1 is false").unwrap(), Claim::new(1, true), &[0.3, 1.1], DEFAULT_TAU).unwrap();
        for (t, row) in tr.times.iter().zip(&tr.probs) {
            assert!((row[1] - t.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_tau_rejected() {
        let step = build_step_matrix(&five());
        assert_eq!(extract_hamiltonian(&step, 0.0).unwrap_err(), LiarError::Tau(0.0));
        assert!(extract_hamiltonian(&step, f64::NAN).is_err());
    }

    #[test]
    fn trace_landmarks() {
        let times = [0.0, 2.5 * PI, 5.0 * PI];
        let tr = probability_trace(&five(), Claim::new(1, true), &times, DEFAULT_TAU).unwrap();
        let idx = |c| tr.claim_index(c).unwrap();
        assert!((tr.probs[0][idx(Claim::new(1, true))] - 1.0).abs() < 1e-12);
        assert!((tr.probs[1][idx(Claim::new(1, false))] - 1.0).abs() < 1e-9);
        assert!((tr.probs[2][idx(Claim::new(1, true))] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hypothesis_projection_renormalizes() {
        let psi = hypothesis_state(&five(), Claim::new(2, false)).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!((psi[6].re - 1.0).abs() < 1e-15);
        assert!(hypothesis_state(&five(), Claim::new(6, true)).is_err());
    }

    #[test]
    fn contradiction_times_on_fine_grid() {
        let grid = time_grid(0.0, 10.0 * PI, PI / 20.0).unwrap();
        assert_eq!(grid.len(), 201);
        let tr = probability_trace(&five(), Claim::new(1, true), &grid, DEFAULT_TAU).unwrap();
        let hits = find_contradiction_times(&tr, Claim::new(1, true));
        assert_eq!(hits.len(), 2, "{hits:?}");
        assert!((hits[0] - 2.5 * PI).abs() < 1e-9);
        assert!((hits[1] - 7.5 * PI).abs() < 1e-9);
    }

    #[test]
    fn truth_teller_never_contradicts() {
        let c = parse_config("1: sentence 1 is true").unwrap();
        let tr = probability_trace(&c, Claim::new(1, true), &time_grid(0.0, 20.0, 0.1).unwrap(), DEFAULT_TAU).unwrap();
        assert!(find_contradiction_times(&tr, Claim::new(1, true)).is_empty());
    }

    #[test]
    fn liar_contradicts_every_pi() {
        let c = parse_config("1: sentence 1 is false").unwrap();
        let grid = time_grid(0.0, 4.0 * PI, PI / 4.0).unwrap();
        let tr = probability_trace(&c, Claim::new(1, true), &grid, DEFAULT_TAU).unwrap();
        let hits = find_contradiction_times(&tr, Claim::new(1, true));
        let expected = [0.5, 1.5, 2.5, 3.5].map(|k| k * PI);
        assert_eq!(hits.len(), expected.len());
        for (h, e) in hits.iter().zip(expected) {
            assert!((h - e).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_grid_rejected() {
        assert_eq!(probability_trace(&five(), Claim::new(1, true), &[], 1.0).unwrap_err(), LiarError::EmptyGrid);
        assert!(time_grid(1.0, 0.0, 0.1).is_err());
        assert!(time_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn consistent_chain_uses_two_cycles() {
        let c = parse_config("1: sentence 2 is true\n2: sentence 1 is true").unwrap();
        assert!(!is_paradoxical(&c));
        let step = build_step_matrix(&c);
        let op = extract_hamiltonian(&step, 0.9).unwrap();
        let direct = (op.generator() * C64::new(0.9, 0.0)).exp();
        assert!(max_abs_diff(&direct, &to_complex(&step.matrix())) <= 1e-10);
    }

    #[test]
    fn eigenvalues_match_schur_oracle() {
        // independent route: complex Schur form of the step matrix itself
        let step = build_step_matrix(&five());
        let schur = to_complex(&step.matrix()).schur();
        let (_, t) = schur.unpack();
        let mut from_schur: Vec<f64> = (0..10).map(|k| t[(k, k)].arg()).map(|a| if a <= -PI + 1e-9 { a + 2.0 * PI } else { a }).collect();
        let mut ours = extract_hamiltonian(&step, 1.0).unwrap().eigenphases();
        from_schur.sort_by(f64::total_cmp);
        ours.sort_by(f64::total_cmp);
        for (a, b) in from_schur.iter().zip(&ours) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
