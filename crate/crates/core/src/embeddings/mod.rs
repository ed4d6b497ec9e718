//! Word vectors: storage, word2vec text I/O, cosine similarity, fact-data
//! preprocessing and a skip-gram trainer.

mod train;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

pub use train::{train_skipgram, TrainConfig};

use crate::textproc::stem;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("vector for {word:?} has {found} components, expected {expected}")]
    Dimension {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("vector for {0:?} has a non-finite component")]
    NonFinite(String),
    #[error("duplicate word {0:?}")]
    Duplicate(String),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("vocabulary is empty after applying min count {0}")]
    EmptyVocabulary(usize),
    #[error("invalid training config: {0}")]
    Config(String),
}

/// Vocabulary of dense vectors sharing one dimension.
///
/// Words keep insertion order (the order of the source file, which for
/// word2vec output is descending frequency).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl PartialEq for EmbeddingTable {
    /// Same dimension and the same word → vector map, regardless of order.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self
                .words
                .iter()
                .all(|w| other.get(w).is_some_and(|v| v == self.get(w).unwrap()))
    }
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(EmbeddingTable {
            dim,
            words: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn from_pairs<S: AsRef<str>>(
        dim: usize,
        pairs: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut t = Self::new(dim)?;
        for (w, v) in pairs {
            t.insert(w.as_ref(), &v)?;
        }
        Ok(t)
    }

    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<(), EmbeddingError> {
        let word = word.to_lowercase();
        if vector.len() != self.dim {
            return Err(EmbeddingError::Dimension {
                word,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|c| !c.is_finite()) {
            return Err(EmbeddingError::NonFinite(word));
        }
        if self.index.contains_key(&word) {
            return Err(EmbeddingError::Duplicate(word));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Copy with every component multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|c| *c *= factor);
        t
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Unit vector in the direction of `u`.
pub fn normalized(u: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
    let n = norm(u);
    if n == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok(u.iter().map(|c| c / n).collect())
}

/// Cosine similarity, clamped to [-1, 1]. Cosine distance is `1 - cosine`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::Mismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn read_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable, EmbeddingError> {
    let io_err = |source| EmbeddingError::Io {
        path: "<embeddings>".into(),
        source,
    };
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(io_err)?,
        None => {
            return Err(EmbeddingError::Format {
                line: 1,
                message: "missing `V D` header".into(),
            })
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parsed = match fields.as_slice() {
        [v, d] => v.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
        _ => None,
    };
    let Some((count, dim)) = parsed.filter(|&(_, d)| d > 0) else {
        return Err(EmbeddingError::Format {
            line: 1,
            message: format!("expected `V D` header, found {header:?}"),
        });
    };
    let mut table = EmbeddingTable::new(dim)?;
    let mut last_line = 1;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        last_line = line_no;
        if table.len() == count {
            return Err(EmbeddingError::Format {
                line: line_no,
                message: format!("more than the {count} vectors declared in the header"),
            });
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default();
        let comps: Vec<&str> = parts.collect();
        if comps.len() != dim {
            return Err(EmbeddingError::Format {
                line: line_no,
                message: format!("expected {dim} components, found {}", comps.len()),
            });
        }
        let mut vector = Vec::with_capacity(dim);
        for c in comps {
            let x: f64 = c.parse().map_err(|_| EmbeddingError::Format {
                line: line_no,
                message: format!("non-numeric component {c:?}"),
            })?;
            vector.push(x);
        }
        table.insert(word, &vector).map_err(|e| EmbeddingError::Format {
            line: line_no,
            message: e.to_string(),
        })?;
    }
    if table.len() != count {
        return Err(EmbeddingError::Format {
            line: last_line,
            message: format!("header declares {count} vectors, found {}", table.len()),
        });
    }
    Ok(table)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_embeddings(io::BufReader::new(file))
}

/// Writes the word2vec text format in table order (frequency order for
/// trained tables), six decimals per component.
pub fn write_embeddings<W: Write>(table: &EmbeddingTable, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for i in 0..table.len() {
        out.write_all(table.words[i].as_bytes())?;
        for c in table.row(i) {
            write!(out, " {c:.6}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    let wrap = |source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(wrap)?;
    write_embeddings(table, file).map_err(wrap)
}

/// Lowercase wordlist standing in for a lexical database presence check.
#[derive(Debug, Clone, Default)]
pub struct Dictionary(HashSet<String>);

impl Dictionary {
    pub fn parse(text: &str) -> Self {
        Dictionary(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Dictionary(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Drops words absent from the dictionary, then lowercases and stems the rest.
pub fn preprocess_facts<S: AsRef<str>>(tokens: &[S], dictionary: &Dictionary) -> Vec<String> {
    tokens
        .iter()
        .map(|t| t.as_ref().to_lowercase())
        .filter(|w| dictionary.contains(w))
        .map(|w| stem(&w))
        .collect()
}

/// Splits plain text into alphabetic words for `preprocess_facts`.
pub fn fact_words(text: &str) -> Vec<&str> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn preprocess_examples() {
        let dict = Dictionary::from_words(["run", "running", "dog", "dogs"]);
        assert_eq!(preprocess_facts(&["Running", "xqzt", "dogs"], &dict), ["run", "dog"]);
        assert!(preprocess_facts::<&str>(&[], &dict).is_empty());
        assert!(preprocess_facts(&["zzz", "qqq"], &dict).is_empty());
    }

    #[test]
    fn minimal_file() {
        let t = read_embeddings("2 3\nhe 1 0 0\nshe 0 1 0\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("she").unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn malformed_lines_are_cited() {
        let err = read_embeddings("2 3\nhe 1 0 0\nshe 0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 3, .. }), "{err}");
        let err = read_embeddings("2 3\nhe 1 0 x\nshe 0 1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 2, .. }), "{err}");
        let err = read_embeddings("3 3\nhe 1 0 0\nshe 0 1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 3, .. }), "{err}");
        let err = read_embeddings("1 3\nhe 1 0 0\nshe 0 1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 3, .. }), "{err}");
        let err = read_embeddings("two 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 1, .. }), "{err}");
        let err = read_embeddings("1 2\nhe NaN 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn save_shapes() {
        let mut buf = Vec::new();
        write_embeddings(&EmbeddingTable::new(4).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 4\n");
        let t = EmbeddingTable::from_pairs(2, [("b", vec![1.0, -0.5]), ("a", vec![0.25, 2.0])]).unwrap();
        let mut buf = Vec::new();
        write_embeddings(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "2 2\nb 1.000000 -0.500000\na 0.250000 2.000000\n"
        );
    }

    #[test]
    fn cosine_basics() {
        let v = [0.3, -1.2, 4.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = v.iter().map(|c| -c).collect();
        assert!((cosine(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(EmbeddingError::ZeroVector)));
    }

    #[test]
    fn table_rejects_bad_vectors() {
        let mut t = EmbeddingTable::new(2).unwrap();
        assert!(t.insert("a", &[1.0]).is_err());
        assert!(t.insert("a", &[f64::INFINITY, 0.0]).is_err());
        t.insert("A", &[1.0, 0.0]).unwrap();
        assert!(t.contains("a"));
        assert!(matches!(t.insert("a", &[1.0, 0.0]), Err(EmbeddingError::Duplicate(_))));
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_bounded(
            u in prop::collection::vec(-10.0f64..10.0, 5),
            v in prop::collection::vec(-10.0f64..10.0, 5),
        ) {
            prop_assume!(norm(&u) > 1e-9 && norm(&v) > 1e-9);
            let a = cosine(&u, &v).unwrap();
            let b = cosine(&v, &u).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn preprocess_output_in_dictionary_stems(words in prop::collection::vec("[a-z]{1,8}", 0..20)) {
            let dict = Dictionary::from_words(words.iter().step_by(2));
            let allowed: HashSet<String> = words.iter().step_by(2)
                .flat_map(|w| [w.clone(), stem(w)])
                .collect();
            for out in preprocess_facts(&words, &dict) {
                prop_assert!(allowed.contains(&out));
            }
        }
    }
}
