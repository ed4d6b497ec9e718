//! Corpus records and companion lexicons.
//!
//! A corpus file holds one JSON object per line:
//!
//! ```text
//! {"id":"b001","title":"...","author":"Jane Doe","year":1971,"shortlisted":true,"winner":false,"description":"..."}
//! ```
//!
//! Blank lines are ignored. Census and occupation lexicons are headed CSV
//! files (`name,gender,frequency` and `term,level`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: invalid record: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
}

impl CorpusError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Io { .. } => None,
            CorpusError::Malformed { line, .. }
            | CorpusError::Invalid { line, .. }
            | CorpusError::DuplicateId { line, .. } => Some(*line),
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("missing or wrong header, expected `{expected}`")]
    Header { expected: &'static str },
}

/// One book of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookRecord {
    pub id: String,
    pub title: String,
    #[serde(rename = "author")]
    pub author_name: String,
    pub year: i32,
    pub shortlisted: bool,
    pub winner: bool,
    pub description: String,
}

impl BookRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("id is empty".into());
        }
        if !(1900..=2100).contains(&self.year) {
            return Err(format!("year {} outside 1900..=2100", self.year));
        }
        if self.description.trim().is_empty() {
            return Err("description is empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderLabel {
    Male,
    Female,
    Unknown,
}

impl GenderLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Male => "male",
            GenderLabel::Female => "female",
            GenderLabel::Unknown => "unknown",
        }
    }

    pub fn opposite(self) -> GenderLabel {
        match self {
            GenderLabel::Male => GenderLabel::Female,
            GenderLabel::Female => GenderLabel::Male,
            GenderLabel::Unknown => GenderLabel::Unknown,
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses a corpus from any reader, stopping at the first error.
pub fn parse_corpus_from<R: Read>(reader: R) -> Result<Vec<BookRecord>, CorpusError> {
    let scan = scan_corpus_from(reader)?;
    match scan.errors.into_iter().next() {
        Some(err) => Err(err),
        None => Ok(scan.records),
    }
}

pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Vec<BookRecord>, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus_from(io::BufReader::new(file))
}

/// Result of a lenient corpus scan: every valid record plus every line-level error.
#[derive(Debug, Default)]
pub struct CorpusScan {
    pub records: Vec<BookRecord>,
    pub errors: Vec<CorpusError>,
}

/// Reads every line, keeping valid records and collecting all line errors.
/// Only I/O failures abort the scan.
pub fn scan_corpus_from<R: Read>(mut reader: R) -> Result<CorpusScan, CorpusError> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|source| CorpusError::Io {
            path: "<corpus>".into(),
            source,
        })?;

    let mut scan = CorpusScan::default();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: BookRecord = match serde_json::from_str(raw) {
            Ok(r) => r,
            Err(e) => {
                scan.errors.push(CorpusError::Malformed {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if let Err(message) = record.validate() {
            scan.errors.push(CorpusError::Invalid { line, message });
            continue;
        }
        if !seen.insert(record.id.clone()) {
            scan.errors.push(CorpusError::DuplicateId {
                line,
                id: record.id,
            });
            continue;
        }
        scan.records.push(record);
    }
    Ok(scan)
}

pub fn scan_corpus(path: impl AsRef<Path>) -> Result<CorpusScan, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    scan_corpus_from(io::BufReader::new(file))
}

pub fn write_corpus<W: Write>(records: &[BookRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Given-name gender lookup built from census rows.
///
/// Frequencies for the same (name, gender) are summed, so row order never
/// affects the result. A name seen under both genders resolves to the more
/// frequent one; an exact tie resolves to `Unknown`.
#[derive(Debug, Clone, Default)]
pub struct NameCensus {
    counts: HashMap<String, (u64, u64)>,
}

impl NameCensus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, gender: GenderLabel, frequency: u64) {
        let slot = self.counts.entry(name.trim().to_lowercase()).or_default();
        match gender {
            GenderLabel::Male => slot.0 += frequency,
            GenderLabel::Female => slot.1 += frequency,
            GenderLabel::Unknown => {}
        }
    }

    pub fn from_rows<'a, I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, GenderLabel, u64)>,
    {
        let mut census = Self::new();
        for (name, gender, freq) in rows {
            census.add(name, gender, freq);
        }
        census
    }

    pub fn lookup(&self, name: &str) -> GenderLabel {
        self.entry(name).map_or(GenderLabel::Unknown, |(g, _)| g)
    }

    /// Resolved gender and the frequency backing it.
    pub fn entry(&self, name: &str) -> Option<(GenderLabel, u64)> {
        let &(male, female) = self.counts.get(&name.trim().to_lowercase())?;
        Some(match male.cmp(&female) {
            std::cmp::Ordering::Greater => (GenderLabel::Male, male),
            std::cmp::Ordering::Less => (GenderLabel::Female, female),
            std::cmp::Ordering::Equal => (GenderLabel::Unknown, male),
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn check_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &'static [&'static str],
    label: &'static str,
) -> Result<bool, LexiconError> {
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            return Err(LexiconError::Row {
                line: 1,
                message: e.to_string(),
            })
        }
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(false);
    }
    let got: Vec<String> = headers.iter().map(|h| h.to_lowercase()).collect();
    if got != expected {
        return Err(LexiconError::Header { expected: label });
    }
    Ok(true)
}

fn record_line(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

pub fn load_census_from<R: Read>(reader: R) -> Result<NameCensus, LexiconError> {
    let mut rdr = csv_reader(reader);
    let mut census = NameCensus::new();
    if !check_header(&mut rdr, &["name", "gender", "frequency"], "name,gender,frequency")? {
        return Ok(census);
    }
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LexiconError::Row {
            line: idx + 2,
            message: e.to_string(),
        })?;
        let line = record_line(&rec, idx + 2);
        if rec.len() != 3 {
            return Err(LexiconError::Row {
                line,
                message: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let gender = match rec[1].to_ascii_uppercase().as_str() {
            "M" => GenderLabel::Male,
            "F" => GenderLabel::Female,
            other => {
                return Err(LexiconError::Row {
                    line,
                    message: format!("gender must be M or F, found {other:?}"),
                })
            }
        };
        let frequency: u64 = rec[2].parse().map_err(|_| LexiconError::Row {
            line,
            message: format!("frequency {:?} is not a nonnegative integer", &rec[2]),
        })?;
        if rec[0].is_empty() {
            return Err(LexiconError::Row {
                line,
                message: "empty name".into(),
            });
        }
        census.add(&rec[0], gender, frequency);
    }
    Ok(census)
}

pub fn load_census(path: impl AsRef<Path>) -> Result<NameCensus, LexiconError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_census_from(io::BufReader::new(file))
}

/// Occupation terms (possibly multiword) with a seniority level in 1..=5.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccupationLexicon {
    entries: BTreeMap<String, u8>,
    /// Where the lexicon came from; carried into every level-based report.
    pub source: String,
}

pub fn normalize_term(term: &str) -> String {
    term.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl OccupationLexicon {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            entries: BTreeMap::new(),
            source: source.into(),
        }
    }

    pub fn insert(&mut self, term: &str, level: u8) -> Result<(), String> {
        if !(1..=5).contains(&level) {
            return Err(format!("level {level} outside 1..=5"));
        }
        let key = normalize_term(term);
        if key.is_empty() {
            return Err("empty term".into());
        }
        self.entries.insert(key, level);
        Ok(())
    }

    pub fn level(&self, term: &str) -> Option<u8> {
        self.entries.get(&normalize_term(term)).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.level(term).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u8)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_occupations_from<R: Read>(
    reader: R,
    source: impl Into<String>,
) -> Result<OccupationLexicon, LexiconError> {
    let mut rdr = csv_reader(reader);
    let mut lex = OccupationLexicon::new(source);
    if !check_header(&mut rdr, &["term", "level"], "term,level")? {
        return Ok(lex);
    }
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LexiconError::Row {
            line: idx + 2,
            message: e.to_string(),
        })?;
        let line = record_line(&rec, idx + 2);
        if rec.len() != 2 {
            return Err(LexiconError::Row {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let level: u8 = rec[1].parse().map_err(|_| LexiconError::Row {
            line,
            message: format!("level {:?} is not an integer in 1..=5", &rec[1]),
        })?;
        lex.insert(&rec[0], level)
            .map_err(|message| LexiconError::Row { line, message })?;
    }
    Ok(lex)
}

pub fn load_occupations(path: impl AsRef<Path>) -> Result<OccupationLexicon, LexiconError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_occupations_from(io::BufReader::new(file), path.display().to_string())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorCounts {
    pub male: u64,
    pub female: u64,
    pub unknown: u64,
}

impl AuthorCounts {
    pub fn total(&self) -> u64 {
        self.male + self.female + self.unknown
    }
}

/// First given-name token of an author name, stripped of surrounding punctuation.
pub fn forename(author: &str) -> Option<&str> {
    author
        .split_whitespace()
        .next()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
}

pub fn author_gender_counts(
    corpus: &[BookRecord],
    census: &NameCensus,
) -> BTreeMap<i32, AuthorCounts> {
    let mut out: BTreeMap<i32, AuthorCounts> = BTreeMap::new();
    for book in corpus {
        let slot = out.entry(book.year).or_default();
        match forename(&book.author_name).map_or(GenderLabel::Unknown, |n| census.lookup(n)) {
            GenderLabel::Male => slot.male += 1,
            GenderLabel::Female => slot.female += 1,
            GenderLabel::Unknown => slot.unknown += 1,
        }
    }
    out
}
