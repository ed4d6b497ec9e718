use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::Token;
use crate::corpus::GenderLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Noun,
    ProperNoun,
    Verb,
    Adjective,
    PronounMale,
    PronounFemale,
    PronounOther,
    Determiner,
    Other,
}

impl Tag {
    pub fn pronoun_gender(self) -> Option<GenderLabel> {
        match self {
            Tag::PronounMale => Some(GenderLabel::Male),
            Tag::PronounFemale => Some(GenderLabel::Female),
            _ => None,
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Tag::Noun | Tag::ProperNoun)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "noun" | "n" => Tag::Noun,
            "propernoun" | "proper" => Tag::ProperNoun,
            "verb" | "v" => Tag::Verb,
            "adjective" | "adj" => Tag::Adjective,
            "pronounmale" => Tag::PronounMale,
            "pronounfemale" => Tag::PronounFemale,
            "pronounother" | "pronoun" => Tag::PronounOther,
            "determiner" | "det" => Tag::Determiner,
            "other" => Tag::Other,
            other => return Err(format!("unknown tag {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: Tag,
}

const MALE_PRONOUNS: &[&str] = &["he", "him", "his", "himself"];
const FEMALE_PRONOUNS: &[&str] = &["she", "her", "hers", "herself"];
const OTHER_PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "we", "us", "our",
    "ours", "ourselves", "they", "them", "their", "theirs", "themselves", "it", "its", "itself",
    "who", "whom", "whose",
];
const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "every", "each", "some", "any", "no",
    "another", "such", "both", "either", "neither", "all",
];

/// Honorifics; always `Other`, and a gender hint when the census has none.
pub const TITLES: &[(&str, GenderLabel)] = &[
    ("mr", GenderLabel::Male),
    ("sir", GenderLabel::Male),
    ("lord", GenderLabel::Male),
    ("mrs", GenderLabel::Female),
    ("ms", GenderLabel::Female),
    ("miss", GenderLabel::Female),
    ("madam", GenderLabel::Female),
    ("dame", GenderLabel::Female),
    ("dr", GenderLabel::Unknown),
    ("prof", GenderLabel::Unknown),
];

pub fn title_gender(lower: &str) -> Option<GenderLabel> {
    TITLES.iter().find(|(t, _)| *t == lower).map(|&(_, g)| g)
}

/// Copular verbs used by the predicate-adjective rule.
pub const COPULAS: &[&str] = &[
    "is", "was", "are", "were", "be", "been", "being", "am", "becomes", "became", "become",
    "seems", "seemed", "remains", "remained", "looks", "looked", "appears", "appeared", "feels",
    "felt", "grows", "grew",
];

pub fn is_copula(lower: &str) -> bool {
    COPULAS.contains(&lower)
}

/// Closed-class tag for pronouns and determiners, if any.
pub fn closed_class(lower: &str) -> Option<Tag> {
    if MALE_PRONOUNS.contains(&lower) {
        Some(Tag::PronounMale)
    } else if FEMALE_PRONOUNS.contains(&lower) {
        Some(Tag::PronounFemale)
    } else if OTHER_PRONOUNS.contains(&lower) {
        Some(Tag::PronounOther)
    } else if DETERMINERS.contains(&lower) {
        Some(Tag::Determiner)
    } else if title_gender(lower).is_some() {
        Some(Tag::Other)
    } else {
        None
    }
}

/// Word → tag table (`word,tag` rows).
#[derive(Debug, Clone, Default)]
pub struct TagLexicon {
    entries: HashMap<String, Tag>,
}

impl TagLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lex = Self::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (idx == 0 && line == "word,tag") {
                continue;
            }
            let (word, tag) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected `word,tag`", idx + 1))?;
            let tag: Tag = tag.parse().map_err(|e| format!("line {}: {e}", idx + 1))?;
            lex.insert(word, tag);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: &str, tag: Tag) {
        self.entries.insert(word.trim().to_lowercase(), tag);
    }

    /// Adds `word` as a noun unless the lexicon already knows it.
    pub fn insert_noun_if_absent(&mut self, word: &str) {
        self.entries
            .entry(word.trim().to_lowercase())
            .or_insert(Tag::Noun);
    }

    pub fn get(&self, lower: &str) -> Option<Tag> {
        self.entries.get(lower).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Suffix fallback for words the lexicon does not know.
pub fn suffix_tag(lower: &str) -> Tag {
    if lower.ends_with("ly") {
        Tag::Other
    } else if lower.ends_with("ed") || lower.ends_with("ing") {
        Tag::Verb
    } else if lower.ends_with("ous") || lower.ends_with("ful") || lower.ends_with("ive") {
        Tag::Adjective
    } else {
        Tag::Noun
    }
}

/// Tags one sentence.
///
/// Order of rules: punctuation and numbers are `Other`; pronouns and
/// determiners come from closed tables; a capitalized word becomes a
/// `ProperNoun` when the lexicon does not know it, or when it is known but
/// not sentence-initial; the rest use the lexicon, then suffix rules.
pub fn pos_tag(sentence: &[Token], lexicon: &TagLexicon) -> Vec<TaggedToken> {
    sentence
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let lower = tok.lowercase.as_str();
            let tag = if !tok.surface.chars().next().is_some_and(char::is_alphabetic) {
                Tag::Other
            } else if let Some(tag) = closed_class(lower) {
                tag
            } else {
                let known = lexicon.get(lower);
                let initial = sentence[..i].iter().all(|t| !t.is_word());
                match (tok.is_capitalized(), known) {
                    (true, None) => Tag::ProperNoun,
                    (true, Some(_)) if !initial => Tag::ProperNoun,
                    (_, Some(tag)) => tag,
                    (false, None) => suffix_tag(lower),
                }
            };
            TaggedToken {
                token: tok.clone(),
                tag,
            }
        })
        .collect()
}
