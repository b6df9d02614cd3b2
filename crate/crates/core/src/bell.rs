//! Expectation values and the CHSH form of the Bell inequality for four
//! dichotomic experiments and their four coincidence experiments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coincidence tables must be normalized within this tolerance.
pub const TABLE_TOL: f64 = 1e-9;
/// Slack on the classical bound of 2, so the boundary itself is not a violation.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// The pairs `(i, j)` entering `|E13 - E14| + |E23 + E24|`, in report order.
pub const CHSH_PAIRS: [(u8, u8); 4] = [(1, 3), (1, 4), (2, 3), (2, 4)];

#[derive(Debug, Error, PartialEq)]
pub enum BellError {
    #[error("table {pair:?}: probabilities sum to {sum}, expected 1")]
    Normalization { pair: (u8, u8), sum: f64 },
    #[error("table {pair:?}: probability {value} outside [0, 1]")]
    Range { pair: (u8, u8), value: f64 },
    #[error("expectation value {0} outside [-1, 1]")]
    Expectation(f64),
    #[error("invalid experiment {id}: {reason}")]
    Experiment { id: u8, reason: String },
    #[error("scenario must contain exactly the pairs (1,3), (1,4), (2,3), (2,4): {0}")]
    Pairs(String),
    #[error("no samples in count table {0:?}")]
    EmptyCounts((u8, u8)),
}

fn plus_one() -> i8 {
    1
}

fn minus_one() -> i8 {
    -1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomicExperiment {
    pub id: u8,
    #[serde(default)]
    pub description: String,
    #[serde(default = "plus_one")]
    pub outcome_value_up: i8,
    #[serde(default = "minus_one")]
    pub outcome_value_down: i8,
}

impl DichotomicExperiment {
    pub fn new(id: u8, description: impl Into<String>) -> Self {
        DichotomicExperiment {
            id,
            description: description.into(),
            outcome_value_up: 1,
            outcome_value_down: -1,
        }
    }

    fn check(&self) -> Result<(), BellError> {
        if !(1..=4).contains(&self.id) {
            return Err(BellError::Experiment {
                id: self.id,
                reason: "id must be in 1..=4".into(),
            });
        }
        if self.outcome_value_up != 1 || self.outcome_value_down != -1 {
            return Err(BellError::Experiment {
                id: self.id,
                reason: "outcome values must be +1 (up) and -1 (down)".into(),
            });
        }
        Ok(())
    }
}

/// Joint outcome probabilities of a coincidence experiment `e_i e_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointOutcomeTable {
    pub pair: (u8, u8),
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
}

/// A table estimated from raw coincidence counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountedTable {
    pub table: JointOutcomeTable,
    pub samples: u64,
}

impl JointOutcomeTable {
    pub fn new(pair: (u8, u8), p_uu: f64, p_ud: f64, p_du: f64, p_dd: f64) -> Self {
        JointOutcomeTable { pair, p_uu, p_ud, p_du, p_dd }
    }

    /// Normalizes `[n_uu, n_ud, n_du, n_dd]` into a probability table.
    pub fn from_counts(pair: (u8, u8), counts: [u64; 4]) -> Result<CountedTable, BellError> {
        let samples: u64 = counts.iter().sum();
        if samples == 0 {
            return Err(BellError::EmptyCounts(pair));
        }
        let n = samples as f64;
        Ok(CountedTable {
            table: JointOutcomeTable::new(
                pair,
                counts[0] as f64 / n,
                counts[1] as f64 / n,
                counts[2] as f64 / n,
                counts[3] as f64 / n,
            ),
            samples,
        })
    }

    fn cells(&self) -> [f64; 4] {
        [self.p_uu, self.p_ud, self.p_du, self.p_dd]
    }

    pub fn check(&self) -> Result<(), BellError> {
        for v in self.cells() {
            if !(0.0..=1.0).contains(&v) {
                return Err(BellError::Range { pair: self.pair, value: v });
            }
        }
        let sum: f64 = self.cells().iter().sum();
        if (sum - 1.0).abs() > TABLE_TOL {
            return Err(BellError::Normalization { pair: self.pair, sum });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub experiments: Vec<DichotomicExperiment>,
    pub joints: Vec<JointOutcomeTable>,
}

impl BellScenario {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Scenario with generic experiment descriptions.
    pub fn from_tables(joints: [JointOutcomeTable; 4]) -> Self {
        BellScenario {
            notes: None,
            experiments: (1..=4).map(|i| DichotomicExperiment::new(i, format!("e{i}"))).collect(),
            joints: joints.to_vec(),
        }
    }

    /// Tables in `CHSH_PAIRS` order, after checking the scenario invariants.
    pub fn ordered_tables(&self) -> Result<[JointOutcomeTable; 4], BellError> {
        if self.experiments.len() != 4 {
            return Err(BellError::Pairs(format!(
                "{} experiments given, expected 4",
                self.experiments.len()
            )));
        }
        let mut ids: Vec<u8> = self.experiments.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids != [1, 2, 3, 4] {
            return Err(BellError::Pairs(format!("experiment ids {ids:?}")));
        }
        for e in &self.experiments {
            e.check()?;
        }
        if self.joints.len() != 4 {
            return Err(BellError::Pairs(format!("{} joint tables given", self.joints.len())));
        }
        let mut out = [JointOutcomeTable::new((0, 0), 0.0, 0.0, 0.0, 0.0); 4];
        for (slot, pair) in out.iter_mut().zip(CHSH_PAIRS) {
            let mut found = self.joints.iter().filter(|t| t.pair == pair);
            match (found.next(), found.next()) {
                (Some(t), None) => {
                    t.check()?;
                    *slot = *t;
                }
                (None, _) => return Err(BellError::Pairs(format!("missing pair {pair:?}"))),
                (Some(_), Some(_)) => {
                    return Err(BellError::Pairs(format!("duplicate pair {pair:?}")))
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub e13: f64,
    pub e14: f64,
    pub e23: f64,
    pub e24: f64,
    pub chsh: f64,
    pub violated: bool,
}

impl BellReport {
    pub fn summary(&self) -> String {
        format!(
            "E13={:+.6} E14={:+.6} E23={:+.6} E24={:+.6} CHSH={:.6} -> {}",
            self.e13,
            self.e14,
            self.e23,
            self.e24,
            self.chsh,
            if self.violated { "VIOLATED (> 2)" } else { "satisfied (<= 2)" }
        )
    }
}

/// `E = P(uu) + P(dd) - P(ud) - P(du)`.
pub fn expectation_value(table: &JointOutcomeTable) -> Result<f64, BellError> {
    table.check()?;
    let e = table.p_uu + table.p_dd - table.p_ud - table.p_du;
    // normalization slack can push |e| a hair past 1
    Ok(e.clamp(-1.0, 1.0))
}

/// `|E13 - E14| + |E23 + E24|`.
pub fn chsh_value(e13: f64, e14: f64, e23: f64, e24: f64) -> Result<f64, BellError> {
    for e in [e13, e14, e23, e24] {
        if !(-1.0..=1.0).contains(&e) {
            return Err(BellError::Expectation(e));
        }
    }
    Ok((e13 - e14).abs() + (e23 + e24).abs())
}

pub fn evaluate_bell_scenario(scenario: &BellScenario) -> Result<BellReport, BellError> {
    let tables = scenario.ordered_tables()?;
    let e13 = expectation_value(&tables[0])?;
    let e14 = expectation_value(&tables[1])?;
    let e23 = expectation_value(&tables[2])?;
    let e24 = expectation_value(&tables[3])?;
    let chsh = chsh_value(e13, e14, e23, e24)?;
    Ok(BellReport {
        e13,
        e14,
        e23,
        e24,
        chsh,
        violated: chsh > 2.0 + VIOLATION_SLACK,
    })
}
