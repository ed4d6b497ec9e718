//! Knowledge-base persistence.
//!
//! Newline-delimited JSON. The first record is the provenance header, every
//! following record one pair:
//!
//! ```text
//! {"record":"header","version":"biaslens 0.1.0","embeddings":{...},"config":{"tau":0.7,...},"candidates":"top-2000"}
//! {"record":"pair","x":"doctor","y":"nurs","score":0.12,"d_h":0.61,"d_w":0.58,"label":"GenderNeutral"}
//! ```

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, BufRead, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{AnalogicalPair, PairConfig};
use crate::embeddings::EmbeddingTable;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
}

/// Identity of the vectors a knowledge base was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSource {
    pub path: String,
    /// Hex SHA-256 of the embedding file bytes, or of the saved table when trained in-process.
    pub sha256: String,
    pub words: usize,
    pub dim: usize,
}

impl EmbeddingSource {
    pub fn from_file(path: impl AsRef<Path>, table: &EmbeddingTable) -> io::Result<Self> {
        let path = path.as_ref();
        let mut file = fs::File::open(path)?;
        let mut hasher = Sha256::new();
        let mut buf = [0u8; 64 * 1024];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
        Ok(EmbeddingSource {
            path: path.display().to_string(),
            sha256: hex::encode(hasher.finalize()),
            words: table.len(),
            dim: table.dim(),
        })
    }

    /// Identity of an in-memory table, hashed over its saved form.
    pub fn from_table(label: impl Into<String>, table: &EmbeddingTable) -> Self {
        let mut bytes = Vec::new();
        crate::embeddings::write_embeddings(table, &mut bytes).expect("writing to memory");
        EmbeddingSource {
            path: label.into(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            words: table.len(),
            dim: table.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub version: String,
    pub embeddings: EmbeddingSource,
    pub config: PairConfig,
    /// How candidates were chosen (e.g. `top-2000` or a candidate file path).
    pub candidates: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub provenance: Provenance,
    pub pairs: Vec<AnalogicalPair>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum KbRecord {
    Header(Provenance),
    Pair(AnalogicalPair),
}

impl KnowledgeBase {
    pub fn new(provenance: Provenance, pairs: Vec<AnalogicalPair>) -> Self {
        KnowledgeBase { provenance, pairs }
    }

    /// Pairs whose `x` (male-aligned) slot is `term`.
    pub fn by_x(&self) -> HashMap<&str, Vec<&AnalogicalPair>> {
        let mut map: HashMap<&str, Vec<&AnalogicalPair>> = HashMap::new();
        for p in &self.pairs {
            map.entry(p.x.as_str()).or_default().push(p);
        }
        map
    }

    pub fn by_y(&self) -> HashMap<&str, Vec<&AnalogicalPair>> {
        let mut map: HashMap<&str, Vec<&AnalogicalPair>> = HashMap::new();
        for p in &self.pairs {
            map.entry(p.y.as_str()).or_default().push(p);
        }
        map
    }
}

pub fn write_kb<W: Write>(kb: &KnowledgeBase, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer(&mut out, &KbRecord::Header(kb.provenance.clone()))?;
    out.write_all(b"\n")?;
    for p in &kb.pairs {
        serde_json::to_writer(&mut out, &KbRecord::Pair(p.clone()))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_kb(kb: &KnowledgeBase, path: impl AsRef<Path>) -> Result<(), KbError> {
    let path = path.as_ref();
    let wrap = |source| KbError::Io {
        path: path.display().to_string(),
        source,
    };
    write_kb(kb, fs::File::create(path).map_err(wrap)?).map_err(wrap)
}

pub fn read_kb<R: BufRead>(reader: R) -> Result<KnowledgeBase, KbError> {
    let mut provenance = None;
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| KbError::Io {
            path: "<kb>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: KbRecord = serde_json::from_str(&line).map_err(|e| KbError::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        match (record, provenance.is_some()) {
            (KbRecord::Header(p), false) => provenance = Some(p),
            (KbRecord::Header(_), true) => {
                return Err(KbError::Record {
                    line: line_no,
                    message: "second header record".into(),
                })
            }
            (KbRecord::Pair(_), false) => {
                return Err(KbError::Record {
                    line: line_no,
                    message: "pair record before the header".into(),
                })
            }
            (KbRecord::Pair(p), true) => {
                if !(p.score.is_finite() && p.d_h.is_finite() && p.d_w.is_finite()) {
                    return Err(KbError::Record {
                        line: line_no,
                        message: "non-finite value".into(),
                    });
                }
                if !seen.insert((p.x.clone(), p.y.clone())) {
                    return Err(KbError::Record {
                        line: line_no,
                        message: format!("duplicate pair ({}, {})", p.x, p.y),
                    });
                }
                pairs.push(p);
            }
        }
    }
    let provenance = provenance.ok_or(KbError::Record {
        line: 1,
        message: "missing header record".into(),
    })?;
    Ok(KnowledgeBase { provenance, pairs })
}

pub fn load_kb(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_kb(io::BufReader::new(file))
}
