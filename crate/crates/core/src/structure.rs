//! Does a table of sequential conditional probabilities between dichotomic
//! contexts admit a classical (single joint distribution) model, a pure
//! sphere-model (spin-1/2) model, both, or neither?
//!
//! Outcomes are indexed `0 = '+'`, `1 = '-'` everywhere in this module.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, LpOutcome};

/// Tolerance on the equality constraints a witness must satisfy.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Row normalization tolerance for conditional distributions.
pub const ROW_TOL: f64 = 1e-9;
/// Largest number of contexts accepted by [`kolmogorov_fit`].
pub const MAX_CONTEXTS: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("need at least one context")]
    Empty,
    #[error("{0} contexts exceeds the limit of {MAX_CONTEXTS} (2^n sample points)")]
    TooManyContexts(usize),
    #[error("table shape does not match n = {0}")]
    Shape(usize),
    #[error("cond[{i}][{a}][{j}] = {row:?} is not a probability distribution")]
    Row { i: usize, a: usize, j: usize, row: [f64; 2] },
    #[error("diagonal entry cond[{0}][..][{0}] must be null")]
    Diagonal(usize),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
}

/// `cond[i][a][j] = [P(+), P(-)]` for context `j` applied right after
/// context `i` left the entity in its outcome-`a` state.
///
/// Entries are `None` on the diagonal and for ordered pairs that were never
/// observed. `counts`, when present, records how many transitions each entry
/// was estimated from (same shape as `cond`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionData {
    pub n: usize,
    pub cond: Vec<Vec<Vec<Option<[f64; 2]>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<Vec<u64>>>>,
}

impl TransitionData {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Symmetric data where the outcome of `j` agrees with the outcome of
    /// `i` with probability `agree[i][j]`.
    pub fn from_agreement(agree: &[Vec<f64>]) -> Self {
        let n = agree.len();
        let cond = (0..n)
            .map(|i| {
                (0..2)
                    .map(|a| {
                        (0..n)
                            .map(|j| {
                                (i != j).then(|| {
                                    let p = agree[i][j];
                                    if a == 0 { [p, 1.0 - p] } else { [1.0 - p, p] }
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TransitionData { n, cond, counts: None }
    }

    /// Three-context symmetric data from `(p12, p13, p23)`.
    pub fn from_pairwise(p12: f64, p13: f64, p23: f64) -> Self {
        Self::from_agreement(&[
            vec![1.0, p12, p13],
            vec![p12, 1.0, p23],
            vec![p13, p23, 1.0],
        ])
    }

    /// Exact conditionals of a joint distribution over `{+,-}^n`.
    ///
    /// `joint[s]` is the weight of the sample point whose bit `k` is set iff
    /// context `k` yields `-`. Conditioning on a null event gives `(1/2, 1/2)`.
    pub fn from_joint(n: usize, joint: &[f64]) -> Self {
        assert_eq!(joint.len(), 1 << n);
        let marg = |i: usize, a: usize| -> f64 {
            joint
                .iter()
                .enumerate()
                .filter(|(s, _)| bit(*s, i) == a)
                .map(|(_, w)| w)
                .sum()
        };
        let pair = |i: usize, a: usize, j: usize, b: usize| -> f64 {
            joint
                .iter()
                .enumerate()
                .filter(|(s, _)| bit(*s, i) == a && bit(*s, j) == b)
                .map(|(_, w)| w)
                .sum()
        };
        let cond = (0..n)
            .map(|i| {
                (0..2)
                    .map(|a| {
                        (0..n)
                            .map(|j| {
                                if i == j {
                                    return None;
                                }
                                let m = marg(i, a);
                                if m <= 0.0 {
                                    return Some([0.5, 0.5]);
                                }
                                let plus = pair(i, a, j, 0) / m;
                                Some([plus, 1.0 - plus])
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TransitionData { n, cond, counts: None }
    }

    pub fn get(&self, i: usize, a: usize, j: usize) -> Option<[f64; 2]> {
        self.cond[i][a][j]
    }

    pub fn count(&self, i: usize, a: usize, j: usize) -> Option<u64> {
        self.counts.as_ref().map(|c| c[i][a][j])
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        if self.n == 0 {
            return Err(StructureError::Empty);
        }
        let n = self.n;
        if self.cond.len() != n || self.cond.iter().any(|c| c.len() != 2 || c.iter().any(|r| r.len() != n)) {
            return Err(StructureError::Shape(n));
        }
        if let Some(counts) = &self.counts {
            if counts.len() != n || counts.iter().any(|c| c.len() != 2 || c.iter().any(|r| r.len() != n)) {
                return Err(StructureError::Shape(n));
            }
        }
        for i in 0..n {
            for a in 0..2 {
                for j in 0..n {
                    match self.cond[i][a][j] {
                        Some(_) if i == j => return Err(StructureError::Diagonal(i)),
                        Some(row) => {
                            let ok = row.iter().all(|p| (0.0..=1.0).contains(p))
                                && (row[0] + row[1] - 1.0).abs() <= ROW_TOL;
                            if !ok {
                                return Err(StructureError::Row { i, a, j, row });
                            }
                        }
                        None => {}
                    }
                }
            }
        }
        Ok(())
    }
}

fn bit(s: usize, k: usize) -> usize {
    (s >> k) & 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Weights over `{+,-}^n`, indexed as in [`TransitionData::from_joint`].
    Joint { weights: Vec<f64> },
    /// Measurement axes on the unit sphere.
    Axes { axes: Vec<[f64; 3]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Multipliers `z` over the constraint rows with `Aᵀz >= 0`, `bᵀz = -1`.
    /// Rows are the normalization row followed by one row per observed
    /// `(i, a, j)` entry in lexicographic order (see [`kolmogorov_system`]).
    Farkas { multipliers: Vec<f64> },
    /// Angles `(θ12, θ13, θ23)` violating the spherical triangle conditions.
    SphericalTriangle { angles: [f64; 3], violation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub witness: Option<Witness>,
    pub certificate: Option<Certificate>,
    /// Largest constraint violation of the witness (feasible case) or of the
    /// certificate (infeasible case).
    pub residual: f64,
}

/// The linear system `A ρ = b` whose nonnegative solutions are the joint
/// distributions compatible with `data`.
pub fn kolmogorov_system(data: &TransitionData) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = data.n;
    let points = 1usize << n;
    let mut a = vec![vec![1.0; points]];
    let mut b = vec![1.0];
    for i in 0..n {
        for sa in 0..2 {
            for j in 0..n {
                let Some(row) = data.get(i, sa, j) else { continue };
                // rho(s_i = a, s_j = +) - cond * rho(s_i = a) = 0; the '-'
                // outcome gives the negated row, so it is left out
                let c = row[0];
                let coeffs = (0..points)
                    .map(|s| match (bit(s, i) == sa, bit(s, j) == 0) {
                        (false, _) => 0.0,
                        (true, true) => 1.0 - c,
                        (true, false) => -c,
                    })
                    .collect();
                a.push(coeffs);
                b.push(0.0);
            }
        }
    }
    (a, b)
}

/// Searches for a single joint distribution reproducing every conditional in
/// `data`; returns it, or a Farkas certificate that none exists.
pub fn kolmogorov_fit(data: &TransitionData) -> Result<FeasibilityResult, StructureError> {
    data.validate()?;
    if data.n > MAX_CONTEXTS {
        return Err(StructureError::TooManyContexts(data.n));
    }
    let (a, b) = kolmogorov_system(data);
    Ok(match lp::find_feasible_point(&a, &b) {
        LpOutcome::Feasible(mut x) => {
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
            let residual = lp::equality_residual(&a, &b, &x);
            FeasibilityResult {
                feasible: residual <= FEASIBILITY_TOL,
                witness: Some(Witness::Joint { weights: x }),
                certificate: None,
                residual,
            }
        }
        LpOutcome::Infeasible(z) => {
            let residual = lp::certificate_violation(&a, &b, &z);
            FeasibilityResult {
                feasible: false,
                witness: None,
                certificate: Some(Certificate::Farkas { multipliers: z }),
                residual,
            }
        }
    })
}

/// `θ = 2·arccos(√p)`, the axis angle producing agreement probability `p`.
pub fn agreement_angle(p: f64) -> f64 {
    2.0 * p.sqrt().clamp(0.0, 1.0).acos()
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Largest `|(1 + u_i·u_j)/2 - p_ij|` over the three pairs.
pub fn axes_residual(axes: &[[f64; 3]; 3], p12: f64, p13: f64, p23: f64) -> f64 {
    [
        ((1.0 + dot(&axes[0], &axes[1])) / 2.0 - p12).abs(),
        ((1.0 + dot(&axes[0], &axes[2])) / 2.0 - p13).abs(),
        ((1.0 + dot(&axes[1], &axes[2])) / 2.0 - p23).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Amount by which the angles violate
/// `|θ12 - θ13| <= θ23 <= min(θ12 + θ13, 2π - θ12 - θ13)`.
pub fn spherical_triangle_violation(t12: f64, t13: f64, t23: f64) -> f64 {
    let lower = (t12 - t13).abs() - t23;
    let upper = t23 - (t12 + t13).min(2.0 * PI - t12 - t13);
    lower.max(upper).max(0.0)
}

/// Looks for unit vectors `u1, u2, u3` with `cos²(θ_ij/2) = p_ij`.
pub fn sphere_quantum_fit(p12: f64, p13: f64, p23: f64) -> Result<FeasibilityResult, StructureError> {
    for p in [p12, p13, p23] {
        if !(0.0..=1.0).contains(&p) {
            return Err(StructureError::Probability(p));
        }
    }
    let (t12, t13, t23) = (agreement_angle(p12), agreement_angle(p13), agreement_angle(p23));
    // u1 at the pole, u2 in the xz-plane, u3 at polar angle θ13 and the
    // azimuth that makes its angle to u2 equal θ23
    let denom = t12.sin() * t13.sin();
    let cos_phi = if denom.abs() < 1e-300 {
        1.0
    } else {
        ((t23.cos() - t12.cos() * t13.cos()) / denom).clamp(-1.0, 1.0)
    };
    let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
    let axes = [
        [0.0, 0.0, 1.0],
        [t12.sin(), 0.0, t12.cos()],
        [t13.sin() * cos_phi, t13.sin() * sin_phi, t13.cos()],
    ];
    let residual = axes_residual(&axes, p12, p13, p23);
    Ok(if residual <= FEASIBILITY_TOL {
        FeasibilityResult {
            feasible: true,
            witness: Some(Witness::Axes { axes: axes.to_vec() }),
            certificate: None,
            residual,
        }
    } else {
        FeasibilityResult {
            feasible: false,
            witness: None,
            certificate: Some(Certificate::SphericalTriangle {
                angles: [t12, t13, t23],
                violation: spherical_triangle_violation(t12, t13, t23),
            }),
            residual,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Kolmogorovian,
    PureQuantum,
    Both,
    Neither,
    /// No classical model exists and the sphere-model test does not apply.
    NonKolmogorovian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub kolmogorov: FeasibilityResult,
    /// `None` when the data does not reduce to three pairwise agreement
    /// probabilities.
    pub quantum: Option<FeasibilityResult>,
    /// `(p12, p13, p23)` used for the sphere-model test.
    pub pairwise: Option<[f64; 3]>,
}

/// Reduces three-context data to agreement probabilities `(p12, p13, p23)`.
///
/// Every observed entry `cond[i][a][j][a]` for the pair `{i, j}` (both
/// directions, both outcomes) must agree. Exact data is held to
/// [`ROW_TOL`]; estimated data (with `counts`) to four binomial standard
/// errors around the count-weighted pooled value.
pub fn pairwise_agreement(data: &TransitionData) -> Option<[f64; 3]> {
    if data.n != 3 {
        return None;
    }
    let mut out = [0.0; 3];
    for (slot, (i, j)) in out.iter_mut().zip([(0, 1), (0, 2), (1, 2)]) {
        let mut obs: Vec<(f64, Option<u64>)> = Vec::new();
        for (x, y) in [(i, j), (j, i)] {
            for a in 0..2 {
                if let Some(row) = data.get(x, a, y) {
                    obs.push((row[a], data.count(x, a, y)));
                }
            }
        }
        if obs.is_empty() {
            return None;
        }
        let estimated = obs.iter().all(|(_, c)| c.is_some());
        let pooled = if estimated {
            let total: u64 = obs.iter().map(|(_, c)| c.unwrap()).sum();
            if total == 0 {
                return None;
            }
            obs.iter().map(|(p, c)| p * c.unwrap() as f64).sum::<f64>() / total as f64
        } else {
            obs.iter().map(|(p, _)| p).sum::<f64>() / obs.len() as f64
        };
        for (p, c) in &obs {
            let tol = match c {
                Some(k) if estimated && *k > 0 => {
                    4.0 * (pooled * (1.0 - pooled) / *k as f64).sqrt() + ROW_TOL
                }
                _ => ROW_TOL,
            };
            if (p - pooled).abs() > tol {
                return None;
            }
        }
        *slot = pooled.clamp(0.0, 1.0);
    }
    Some(out)
}

pub fn classify_structure(data: &TransitionData) -> Result<Classification, StructureError> {
    let kolmogorov = kolmogorov_fit(data)?;
    let pairwise = pairwise_agreement(data);
    let quantum = match pairwise {
        Some([p12, p13, p23]) => Some(sphere_quantum_fit(p12, p13, p23)?),
        None => None,
    };
    let verdict = match (kolmogorov.feasible, quantum.as_ref().map(|q| q.feasible)) {
        (true, Some(true)) => Verdict::Both,
        (true, _) => Verdict::Kolmogorovian,
        (false, Some(true)) => Verdict::PureQuantum,
        (false, Some(false)) => Verdict::Neither,
        (false, None) => Verdict::NonKolmogorovian,
    };
    Ok(Classification {
        verdict,
        kolmogorov,
        quantum,
        pairwise,
    })
}
