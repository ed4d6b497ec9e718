//! Lexicons bundled with the crate.

use std::collections::HashSet;

use crate::corpus::{self, BookRecord, NameCensus, OccupationLexicon};
use crate::textproc::{Abbreviations, TagLexicon};

pub const TAG_LEXICON: &str = include_str!("../data/tag_lexicon.csv");
pub const ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");
pub const OCCUPATIONS: &str = include_str!("../data/occupations.csv");
pub const STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const CENSUS_SAMPLE: &str = include_str!("../data/census_sample.csv");
/// Fifty synthetic book records with planted statistics: every description
/// has four male and two female mentions (one name and one pronoun per
/// gender, twice over for the male character), one level-5 occupation for
/// the man and one level-2 occupation for the woman.
pub const FIXTURE_CORPUS: &str = include_str!("../data/fixture_corpus.jsonl");

pub fn tag_lexicon() -> TagLexicon {
    TagLexicon::parse(TAG_LEXICON).expect("bundled tag lexicon parses")
}

pub fn abbreviations() -> Abbreviations {
    Abbreviations::parse(ABBREVIATIONS)
}

pub fn occupations() -> OccupationLexicon {
    corpus::load_occupations_from(OCCUPATIONS.as_bytes(), "bundled:occupations.csv")
        .expect("bundled occupation lexicon parses")
}

pub fn stopwords() -> HashSet<String> {
    STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Small given-name census used by the fixture corpus and examples.
pub fn census_sample() -> NameCensus {
    corpus::load_census_from(CENSUS_SAMPLE.as_bytes()).expect("bundled census parses")
}

pub fn fixture_corpus() -> Vec<BookRecord> {
    corpus::parse_corpus_from(FIXTURE_CORPUS.as_bytes()).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_resources_load() {
        assert!(tag_lexicon().len() > 300);
        let occ = occupations();
        assert!((330..=380).contains(&occ.len()), "{} occupations", occ.len());
        assert_eq!(occ.level("doctor"), Some(5));
        assert_eq!(occ.level("nurse"), Some(2));
        assert!(stopwords().contains("the"));
        assert!(!census_sample().is_empty());
        assert!(abbreviations().contains("Dr"));
    }
}
