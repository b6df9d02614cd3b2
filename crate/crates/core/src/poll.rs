//! Three-question opinion poll on the ε-model.
//!
//! Respondents are points drawn uniformly on the sphere. Each one is asked
//! the questions in order, every answer collapsing the state onto `±u` of the
//! question just asked. The report tallies first answers, predetermined
//! regions of the initial population, and the sequential conditional table
//! built from consecutive question pairs.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::sphere::{
    classify_region, simulate_measurement, Answer, End, EpsilonContext, SignPattern, SphereError,
    SphereState,
};
use crate::structure::TransitionData;

/// Coplanar fan: `u1·u2 = u2·u3 = cos 45°`, `u1·u3 = 0`.
pub const DEFAULT_FAN: [[f64; 3]; 3] = [
    [1.0, 0.0, 0.0],
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0],
    [0.0, 1.0, 0.0],
];

/// Respondents handled per parallel work item.
const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum PollError {
    #[error("population must be positive")]
    EmptyPopulation,
    #[error("question order {0:?} is not a permutation of 1, 2, 3")]
    Order([u8; 3]),
    #[error("question axes {0} and {1} coincide")]
    DuplicateAxes(usize, usize),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

fn default_fan() -> [[f64; 3]; 3] {
    DEFAULT_FAN
}

fn default_order() -> [u8; 3] {
    [1, 2, 3]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollConfig {
    pub epsilon: f64,
    #[serde(default = "default_fan")]
    pub axes: [[f64; 3]; 3],
    pub population: u64,
    #[serde(default)]
    pub seed: u64,
    /// 1-based question indices, asked left to right.
    #[serde(default = "default_order")]
    pub question_order: [u8; 3],
    /// Shuffle the order independently for every respondent.
    #[serde(default)]
    pub randomize_order: bool,
    /// Re-ask the first question at the end of each session, so the pair
    /// (last, first) also enters the conditional table.
    #[serde(default = "yes")]
    pub close_cycle: bool,
}

impl PollConfig {
    pub fn new(epsilon: f64, population: u64, seed: u64) -> Self {
        PollConfig {
            epsilon,
            axes: DEFAULT_FAN,
            population,
            seed,
            question_order: default_order(),
            randomize_order: false,
            close_cycle: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn contexts(&self) -> Result<[EpsilonContext; 3], PollError> {
        let ctx = |k: usize| EpsilonContext::new(self.axes[k], self.epsilon);
        let out = [ctx(0)?, ctx(1)?, ctx(2)?];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if self.axes[i] == self.axes[j] {
                return Err(PollError::DuplicateAxes(i + 1, j + 1));
            }
        }
        Ok(out)
    }

    fn order(&self) -> Result<[usize; 3], PollError> {
        let mut sorted = self.question_order;
        sorted.sort_unstable();
        if sorted != [1, 2, 3] {
            return Err(PollError::Order(self.question_order));
        }
        Ok(self.question_order.map(|q| q as usize - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollReport {
    pub population: u64,
    pub epsilon: f64,
    pub seed: u64,
    pub question_order: [u8; 3],
    pub randomize_order: bool,
    pub close_cycle: bool,
    /// Fraction answering yes the first time each question is asked.
    pub marginal_yes: [f64; 3],
    /// Initial states in the yes cap (`c >= ε`) of each question.
    pub predetermined_yes: [f64; 3],
    /// Initial states in the no cap (`c <= -ε`).
    pub predetermined_no: [f64; 3],
    /// `predetermined_yes + predetermined_no`.
    pub predetermined_total: [f64; 3],
    /// Initial states with no predetermined answer.
    pub formed: [f64; 3],
    /// Count per `(Y|N|U)^3` pattern of the initial states.
    pub region_census: BTreeMap<String, u64>,
    /// Patterns corresponding to the numbered regions of the classic
    /// three-question illustration.
    pub named_regions: BTreeMap<String, String>,
    pub conditional: TransitionData,
}

impl PollReport {
    /// `pattern,count,fraction` rows, header first.
    pub fn census_csv(&self) -> String {
        let mut out = String::from("pattern,count,fraction\n");
        for (pattern, count) in &self.region_census {
            let frac = *count as f64 / self.population as f64;
            out.push_str(&format!("{pattern},{count},{frac:.16e}\n"));
        }
        out
    }
}

#[derive(Clone)]
struct Tally {
    census: [u64; 27],
    yes: [u64; 3],
    pred_yes: [u64; 3],
    pred_no: [u64; 3],
    // [from question][from answer][to question][to answer]
    transitions: [[[[u64; 2]; 3]; 2]; 3],
}

impl Tally {
    fn zero() -> Self {
        Tally {
            census: [0; 27],
            yes: [0; 3],
            pred_yes: [0; 3],
            pred_no: [0; 3],
            transitions: [[[[0; 2]; 3]; 2]; 3],
        }
    }

    fn merge(mut self, other: &Tally) -> Self {
        self.census.iter_mut().zip(&other.census).for_each(|(a, b)| *a += b);
        for k in 0..3 {
            self.yes[k] += other.yes[k];
            self.pred_yes[k] += other.pred_yes[k];
            self.pred_no[k] += other.pred_no[k];
        }
        for i in 0..3 {
            for a in 0..2 {
                for j in 0..3 {
                    for b in 0..2 {
                        self.transitions[i][a][j][b] += other.transitions[i][a][j][b];
                    }
                }
            }
        }
        self
    }
}

const PATTERN_ORDER: [Answer; 3] = [Answer::Y, Answer::N, Answer::U];

fn answer_index(a: Answer) -> usize {
    match a {
        Answer::Y => 0,
        Answer::N => 1,
        Answer::U => 2,
    }
}

fn pattern_index(p: &SignPattern) -> usize {
    p.0.iter().fold(0, |acc, a| acc * 3 + answer_index(*a))
}

fn pattern_from_index(mut k: usize) -> SignPattern {
    let mut out = [Answer::U; 3];
    for slot in out.iter_mut().rev() {
        *slot = PATTERN_ORDER[k % 3];
        k /= 3;
    }
    SignPattern(out)
}

fn interview(
    respondent: u64,
    config: &PollConfig,
    axes: &[EpsilonContext; 3],
    order: [usize; 3],
    tally: &mut Tally,
) {
    let mut rng = rng::split(config.seed, respondent);
    let v: [f64; 3] = UnitSphere.sample(&mut rng);
    let mut state = SphereState::normalized(v).expect("sampled point is on the sphere");

    let region = classify_region(&state, axes);
    tally.census[pattern_index(&region)] += 1;
    for (k, a) in region.0.iter().enumerate() {
        match a {
            Answer::Y => tally.pred_yes[k] += 1,
            Answer::N => tally.pred_no[k] += 1,
            Answer::U => {}
        }
    }

    let mut order = order;
    if config.randomize_order {
        order.shuffle(&mut rng);
    }
    let mut session: Vec<usize> = order.to_vec();
    if config.close_cycle {
        session.push(order[0]);
    }

    let mut previous: Option<(usize, usize)> = None;
    let mut asked = [false; 3];
    for q in session {
        let outcome = simulate_measurement(&state, &axes[q], &mut rng);
        let ans = match outcome.end {
            End::Axis => 0,
            End::AntiAxis => 1,
        };
        if !asked[q] {
            asked[q] = true;
            if ans == 0 {
                tally.yes[q] += 1;
            }
        }
        if let Some((pq, pa)) = previous {
            tally.transitions[pq][pa][q][ans] += 1;
        }
        previous = Some((q, ans));
        state = outcome.resulting_state;
    }
}

/// Runs the poll. The result depends only on the config (including its
/// seed), never on the number of worker threads.
pub fn run_opinion_poll(config: &PollConfig) -> Result<PollReport, PollError> {
    if config.population == 0 {
        return Err(PollError::EmptyPopulation);
    }
    let axes = config.contexts()?;
    let order = config.order()?;

    let n = config.population;
    let chunks = n.div_ceil(CHUNK as u64);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::zero();
            let start = c * CHUNK as u64;
            for r in start..(start + CHUNK as u64).min(n) {
                interview(r, config, &axes, order, &mut t);
            }
            t
        })
        .reduce(Tally::zero, |a, b| a.merge(&b));

    let frac = |k: u64| k as f64 / n as f64;
    let marginal_yes = tally.yes.map(frac);
    let predetermined_yes = tally.pred_yes.map(frac);
    let predetermined_no = tally.pred_no.map(frac);
    let mut formed = [0.0; 3];
    let mut predetermined_total = [0.0; 3];
    for k in 0..3 {
        formed[k] = frac(n - tally.pred_yes[k] - tally.pred_no[k]);
        predetermined_total[k] = frac(tally.pred_yes[k] + tally.pred_no[k]);
    }

    let region_census = (0..27)
        .map(|k| (pattern_from_index(k).to_string(), tally.census[k]))
        .collect();
    let named_regions = [("1", "YUU"), ("4", "UYY"), ("10", "UNN"), ("13", "UUU")]
        .into_iter()
        .map(|(r, p)| (format!("region {r}"), p.to_string()))
        .collect();

    let mut cond = vec![vec![vec![None; 3]; 2]; 3];
    let mut counts = vec![vec![vec![0u64; 3]; 2]; 3];
    for i in 0..3 {
        for a in 0..2 {
            for j in 0..3 {
                let [plus, minus] = tally.transitions[i][a][j];
                let total = plus + minus;
                counts[i][a][j] = total;
                if i != j && total > 0 {
                    let p = plus as f64 / total as f64;
                    cond[i][a][j] = Some([p, minus as f64 / total as f64]);
                }
            }
        }
    }

    Ok(PollReport {
        population: n,
        epsilon: config.epsilon,
        seed: config.seed,
        question_order: config.question_order,
        randomize_order: config.randomize_order,
        close_cycle: config.close_cycle,
        marginal_yes,
        predetermined_yes,
        predetermined_no,
        predetermined_total,
        formed,
        region_census,
        named_regions,
        conditional: TransitionData {
            n: 3,
            cond,
            counts: Some(counts),
        },
    })
}
