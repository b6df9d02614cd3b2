//! Generalized m-sentence liar configurations and their discrete inference
//! dynamics.
//!
//! Sentence `i` asserts "sentence `target(i)` is `asserted(i)`", and the
//! targets close into a single cycle. Reasoning moves between *claims*
//! `(sentence, truth value)`: holding sentence `i` true endorses its
//! assertion about `target(i)`; holding it false endorses the negation.
//!
//! Claims are numbered in the canonical basis order
//! `(1,T) … (m,T), (1,F) … (m,F)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LiarError {
    #[error("line {line}: expected \"<i>: sentence <j> is <true|false>\", got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("no sentences given")]
    Empty,
    #[error("sentence numbers must be exactly 1..={m}; problem with {index}")]
    Numbering { m: usize, index: usize },
    #[error("targets {0:?} are not a permutation of the sentences")]
    NotPermutation(Vec<usize>),
    #[error("targets form {0} separate cycles; a closed chain needs exactly one")]
    MultiCycle(usize),
    #[error("claim {0:?} is out of range")]
    Claim(String),
    #[error("matrix is not a permutation matrix: {0}")]
    NotPermutationMatrix(String),
    #[error("step duration must be positive and finite, got {0}")]
    Tau(f64),
    #[error("spectral reconstruction of the step matrix failed (error {0:e})")]
    Decomposition(f64),
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("bad time grid: {0}")]
    Grid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub target: usize,
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiarConfig {
    sentences: Vec<Sentence>,
}

/// Cycles of a permutation given as `image[k]`, each starting at its
/// smallest element, ordered by that element.
pub fn cycles_of(image: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; image.len()];
    let mut out = Vec::new();
    for start in 0..image.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            cycle.push(k);
            k = image[k];
        }
        out.push(cycle);
    }
    out
}

impl LiarConfig {
    /// `sentences[i]` describes sentence `i + 1`; targets are 1-based.
    pub fn new(sentences: Vec<Sentence>) -> Result<Self, LiarError> {
        let m = sentences.len();
        if m == 0 {
            return Err(LiarError::Empty);
        }
        let targets: Vec<usize> = sentences.iter().map(|s| s.target).collect();
        let mut hit = vec![false; m];
        for &t in &targets {
            if t == 0 || t > m || hit[t - 1] {
                return Err(LiarError::NotPermutation(targets));
            }
            hit[t - 1] = true;
        }
        let image: Vec<usize> = targets.iter().map(|t| t - 1).collect();
        let cycles = cycles_of(&image).len();
        if cycles != 1 {
            return Err(LiarError::MultiCycle(cycles));
        }
        Ok(LiarConfig { sentences })
    }

    pub fn m(&self) -> usize {
        self.sentences.len()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn dim(&self) -> usize {
        2 * self.m()
    }

    /// Basis position of a claim.
    pub fn index_of(&self, claim: Claim) -> usize {
        if claim.value {
            claim.sentence - 1
        } else {
            self.m() + claim.sentence - 1
        }
    }

    pub fn claim_at(&self, index: usize) -> Claim {
        let m = self.m();
        Claim {
            sentence: index % m + 1,
            value: index < m,
        }
    }

    /// All claims in basis order.
    pub fn claims(&self) -> Vec<Claim> {
        (0..self.dim()).map(|k| self.claim_at(k)).collect()
    }

    pub fn check_claim(&self, claim: Claim) -> Result<(), LiarError> {
        if claim.sentence == 0 || claim.sentence > self.m() {
            return Err(LiarError::Claim(claim.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for LiarConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sentences.iter().enumerate() {
            writeln!(f, "{}: sentence {} is {}", i + 1, s.target, if s.asserted { "true" } else { "false" })?;
        }
        Ok(())
    }
}

/// "Sentence `sentence` is `value`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Claim {
    pub sentence: usize,
    pub value: bool,
}

impl Claim {
    pub fn new(sentence: usize, value: bool) -> Self {
        Claim { sentence, value }
    }

    pub fn negated(self) -> Self {
        Claim {
            value: !self.value,
            ..self
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.sentence, if self.value { "T" } else { "F" })
    }
}

fn parse_truth(word: &str) -> Option<bool> {
    match word.to_ascii_lowercase().as_str() {
        "true" | "t" => Some(true),
        "false" | "f" => Some(false),
        _ => None,
    }
}

impl FromStr for Claim {
    type Err = LiarError;

    /// Accepts `"1:true"`, `"1:T"`, `"3:false"`.
    fn from_str(s: &str) -> Result<Self, LiarError> {
        let bad = || LiarError::Claim(s.to_string());
        let (num, val) = s.split_once(':').ok_or_else(bad)?;
        let sentence: usize = num.trim().parse().map_err(|_| bad())?;
        let value = parse_truth(val.trim()).ok_or_else(bad)?;
        Ok(Claim { sentence, value })
    }
}

fn parse_line(line: &str) -> Option<(usize, Sentence)> {
    let (head, rest) = line.split_once(':')?;
    let index: usize = head.trim().parse().ok()?;
    let words: Vec<&str> = rest.split_whitespace().collect();
    let words = match words.first() {
        Some(w) if w.eq_ignore_ascii_case("sentence") => &words[1..],
        _ => &words[..],
    };
    match words {
        [target, is, value] if is.eq_ignore_ascii_case("is") => Some((
            index,
            Sentence {
                target: target.parse().ok()?,
                asserted: parse_truth(value)?,
            },
        )),
        _ => None,
    }
}

/// Parses one sentence per line, `"<i>: sentence <j> is <true|false>"`.
/// Blank lines and `#` comments are ignored; lines may come in any order.
pub fn parse_config(text: &str) -> Result<LiarConfig, LiarError> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let entry = parse_line(line).ok_or_else(|| LiarError::Syntax {
            line: n + 1,
            text: line.to_string(),
        })?;
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(LiarError::Empty);
    }
    let m = entries.len();
    let mut slots: Vec<Option<Sentence>> = vec![None; m];
    for (index, sentence) in entries {
        if index == 0 || index > m || slots[index - 1].is_some() {
            return Err(LiarError::Numbering { m, index });
        }
        slots[index - 1] = Some(sentence);
    }
    LiarConfig::new(slots.into_iter().map(|s| s.expect("every slot filled")).collect())
}

/// One inference step: endorse the assertion of a sentence held true, or
/// its negation for a sentence held false.
pub fn inference_step(claim: Claim, config: &LiarConfig) -> Claim {
    let s = config.sentences[claim.sentence - 1];
    Claim {
        sentence: s.target,
        value: if claim.value { s.asserted } else { !s.asserted },
    }
}

/// An odd number of "is false" links turns every hypothesis into its
/// negation after one trip around the chain.
pub fn is_paradoxical(config: &LiarConfig) -> bool {
    config.sentences.iter().filter(|s| !s.asserted).count() % 2 == 1
}

/// Permutation matrix of [`inference_step`] in the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMatrix {
    /// `image[k]` is the basis index the step sends basis vector `k` to.
    image: Vec<usize>,
}

impl StepMatrix {
    /// Reads a 0/1 matrix whose column `k` has its single 1 at row `image[k]`.
    pub fn from_matrix(matrix: &DMatrix<f64>) -> Result<Self, LiarError> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n == 0 {
            return Err(LiarError::NotPermutationMatrix(format!(
                "shape {}x{}",
                n,
                matrix.ncols()
            )));
        }
        let mut image = vec![usize::MAX; n];
        let mut row_used = vec![false; n];
        for col in 0..n {
            for row in 0..n {
                let v = matrix[(row, col)];
                if v == 1.0 {
                    if image[col] != usize::MAX || row_used[row] {
                        return Err(LiarError::NotPermutationMatrix(format!(
                            "extra 1 at ({row}, {col})"
                        )));
                    }
                    image[col] = row;
                    row_used[row] = true;
                } else if v != 0.0 {
                    return Err(LiarError::NotPermutationMatrix(format!(
                        "entry {v} at ({row}, {col})"
                    )));
                }
            }
            if image[col] == usize::MAX {
                return Err(LiarError::NotPermutationMatrix(format!("empty column {col}")));
            }
        }
        Ok(StepMatrix { image })
    }

    pub fn from_image(image: Vec<usize>) -> Result<Self, LiarError> {
        let n = image.len();
        let mut m = DMatrix::zeros(n, n);
        for (col, &row) in image.iter().enumerate() {
            if row >= n {
                return Err(LiarError::NotPermutationMatrix(format!("image {row} out of range")));
            }
            m[(row, col)] += 1.0;
        }
        Self::from_matrix(&m)
    }

    pub fn dim(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (col, &row) in self.image.iter().enumerate() {
            m[(row, col)] = 1.0;
        }
        m
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        cycles_of(&self.image)
    }

    /// Cycle lengths in descending order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }
}

pub fn build_step_matrix(config: &LiarConfig) -> StepMatrix {
    let image = config
        .claims()
        .into_iter()
        .map(|c| config.index_of(inference_step(c, config)))
        .collect();
    StepMatrix { image }
}
