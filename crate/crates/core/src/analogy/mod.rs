//! Analogical word pairs relative to the `he`/`she` axis.
//!
//! A candidate `(x, y)` is scored by how far the unit direction of `x - y`
//! sits from the unit direction of `he - she`:
//!
//! ```text
//! score(x, y) = ‖ n(he − she) − n(x − y) ‖      n(v) = v / ‖v‖
//! ```
//!
//! which ranges over `[0, 2]` and equals `sqrt(2 − 2·cos(he − she, x − y))`.
//! Pairs with `score <= tau` are kept and labeled from the cosine distances
//! `d_h = 1 − cos(x, he)` and `d_w = 1 − cos(y, she)`: the pair is
//! gender-specific when `d_h < tau1` or `d_w < tau2`, otherwise
//! gender-neutral.

pub mod kb;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kb::{
    load_kb, read_kb, save_kb, write_kb, EmbeddingSource, KbError, KnowledgeBase, Provenance,
};

use crate::embeddings::{cosine, normalized, EmbeddingTable};
use crate::exec::Execution;
use crate::textproc::stem;

pub const HE: &str = "he";
pub const SHE: &str = "she";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalogyError {
    #[error("word {0:?} is not in the embedding vocabulary")]
    OutOfVocabulary(String),
    #[error("pair ({0:?}, {1:?}) has a zero difference vector")]
    ZeroDifference(String, String),
    #[error("word {0:?} has a zero vector")]
    ZeroVector(String),
    #[error("invalid pair config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    pub tau: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            tau: 0.7,
            tau1: 0.35,
            tau2: 0.35,
        }
    }
}

impl PairConfig {
    pub fn validate(&self) -> Result<(), AnalogyError> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(AnalogyError::Config(format!("tau {} must be >= 0", self.tau)));
        }
        for (name, t) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(t > 0.0 && t < 2.0) {
                return Err(AnalogyError::Config(format!("{name} {t} must lie in (0, 2)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    GenderSpecific,
    GenderNeutral,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairLabel::GenderSpecific => "gender-specific",
            PairLabel::GenderNeutral => "gender-neutral",
        })
    }
}

/// Label from the two pole distances; pure in its inputs.
pub fn label_for(d_h: f64, d_w: f64, tau1: f64, tau2: f64) -> PairLabel {
    if d_h < tau1 || d_w < tau2 {
        PairLabel::GenderSpecific
    } else {
        PairLabel::GenderNeutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalogicalPair {
    /// Slot aligned with `he`.
    pub x: String,
    /// Slot aligned with `she`.
    pub y: String,
    pub score: f64,
    pub d_h: f64,
    pub d_w: f64,
    pub label: PairLabel,
}

/// Table key for a query word: the word itself, else its stem.
pub fn resolve_word(table: &EmbeddingTable, word: &str) -> Result<String, AnalogyError> {
    let lower = word.to_lowercase();
    if table.contains(&lower) {
        return Ok(lower);
    }
    let stemmed = stem(&lower);
    if table.contains(&stemmed) {
        return Ok(stemmed);
    }
    Err(AnalogyError::OutOfVocabulary(word.to_string()))
}

fn vector<'a>(table: &'a EmbeddingTable, word: &str) -> Result<&'a [f64], AnalogyError> {
    table
        .get(word)
        .ok_or_else(|| AnalogyError::OutOfVocabulary(word.to_string()))
}

fn unit_difference(table: &EmbeddingTable, x: &str, y: &str) -> Result<Vec<f64>, AnalogyError> {
    let (vx, vy) = (vector(table, x)?, vector(table, y)?);
    let diff: Vec<f64> = vx.iter().zip(vy).map(|(a, b)| a - b).collect();
    normalized(&diff).map_err(|_| AnalogyError::ZeroDifference(x.into(), y.into()))
}

/// The `he`/`she` poles and the unit `he − she` direction of one table.
pub struct GenderAxis<'a> {
    table: &'a EmbeddingTable,
    he: &'a [f64],
    she: &'a [f64],
    direction: Vec<f64>,
}

impl<'a> GenderAxis<'a> {
    pub fn new(table: &'a EmbeddingTable) -> Result<Self, AnalogyError> {
        let he = vector(table, HE)?;
        let she = vector(table, SHE)?;
        let direction = unit_difference(table, HE, SHE)?;
        Ok(GenderAxis {
            table,
            he,
            she,
            direction,
        })
    }

    pub fn score(&self, x: &str, y: &str) -> Result<f64, AnalogyError> {
        if x == y {
            return Err(AnalogyError::ZeroDifference(x.into(), y.into()));
        }
        let d = unit_difference(self.table, x, y)?;
        Ok(self
            .direction
            .iter()
            .zip(&d)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Cosine distances `(d_h, d_w)` of `x` to `he` and `y` to `she`.
    pub fn distances(&self, x: &str, y: &str) -> Result<(f64, f64), AnalogyError> {
        let (vx, vy) = (vector(self.table, x)?, vector(self.table, y)?);
        let d_h = 1.0 - cosine(vx, self.he).map_err(|_| AnalogyError::ZeroVector(x.into()))?;
        let d_w = 1.0 - cosine(vy, self.she).map_err(|_| AnalogyError::ZeroVector(y.into()))?;
        Ok((d_h, d_w))
    }

    pub fn classify(
        &self,
        x: &str,
        y: &str,
        config: &PairConfig,
    ) -> Result<(f64, f64, PairLabel), AnalogyError> {
        let (d_h, d_w) = self.distances(x, y)?;
        Ok((d_h, d_w, label_for(d_h, d_w, config.tau1, config.tau2)))
    }
}

pub fn pair_score(x: &str, y: &str, table: &EmbeddingTable) -> Result<f64, AnalogyError> {
    GenderAxis::new(table)?.score(x, y)
}

pub fn classify_pair(
    x: &str,
    y: &str,
    table: &EmbeddingTable,
    config: &PairConfig,
) -> Result<(f64, f64, PairLabel), AnalogyError> {
    GenderAxis::new(table)?.classify(x, y, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub x: String,
    pub y: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairExtraction {
    pub pairs: Vec<AnalogicalPair>,
    /// Candidates that could not be scored, in candidate order.
    pub rejections: Vec<Rejection>,
}

fn pair_order(a: &AnalogicalPair, b: &AnalogicalPair) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then_with(|| a.x.cmp(&b.x))
        .then_with(|| a.y.cmp(&b.y))
}

/// Scores every candidate and keeps those with `score <= tau`, sorted by
/// ascending score then lexicographically. Candidates that cannot be scored
/// are logged, not fatal; a table without `he`/`she` is.
pub fn extract_pairs(
    table: &EmbeddingTable,
    candidates: &[(String, String)],
    config: &PairConfig,
    exec: Execution,
) -> Result<PairExtraction, AnalogyError> {
    config.validate()?;
    let axis = GenderAxis::new(table)?;

    let mut seen = HashSet::new();
    let unique: Vec<&(String, String)> = candidates.iter().filter(|c| seen.insert(*c)).collect();

    let scored = exec.map(&unique, |(x, y)| -> Result<Option<AnalogicalPair>, AnalogyError> {
        let x = resolve_word(table, x)?;
        let y = resolve_word(table, y)?;
        let score = axis.score(&x, &y)?;
        if score > config.tau {
            return Ok(None);
        }
        let (d_h, d_w, label) = axis.classify(&x, &y, config)?;
        Ok(Some(AnalogicalPair {
            x,
            y,
            score,
            d_h,
            d_w,
            label,
        }))
    });

    let mut out = PairExtraction::default();
    let mut kept = HashSet::new();
    for (cand, result) in unique.iter().zip(scored) {
        match result {
            Ok(Some(p)) => {
                // two spellings can resolve to the same stems
                if kept.insert((p.x.clone(), p.y.clone())) {
                    out.pairs.push(p);
                }
            }
            Ok(None) => {}
            Err(e) => out.rejections.push(Rejection {
                x: cand.0.clone(),
                y: cand.1.clone(),
                reason: e.to_string(),
            }),
        }
    }
    out.pairs.sort_by(pair_order);
    Ok(out)
}

/// All ordered pairs over the first `limit` non-stopword vocabulary words.
pub fn default_candidates(
    table: &EmbeddingTable,
    stopwords: &HashSet<String>,
    limit: usize,
) -> Vec<(String, String)> {
    let top: Vec<&String> = table
        .words()
        .iter()
        .filter(|w| !stopwords.contains(w.as_str()))
        .take(limit)
        .collect();
    let mut out = Vec::with_capacity(top.len() * top.len().saturating_sub(1));
    for x in &top {
        for y in &top {
            if x != y {
                out.push(((*x).clone(), (*y).clone()));
            }
        }
    }
    out
}

pub const DEFAULT_CANDIDATE_LIMIT: usize = 2000;

/// Parses a candidate CSV (`x,y` rows, optional `x,y` header).
pub fn parse_candidates(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line.eq_ignore_ascii_case("x,y")) {
            continue;
        }
        let (x, y) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected `x,y`", idx + 1))?;
        let (x, y) = (x.trim(), y.trim());
        if x.is_empty() || y.is_empty() || y.contains(',') {
            return Err(format!("line {}: expected `x,y`", idx + 1));
        }
        out.push((x.to_lowercase(), y.to_lowercase()));
    }
    Ok(out)
}
