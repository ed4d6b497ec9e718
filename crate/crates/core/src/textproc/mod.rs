//! Self-contained text pipeline: tokenization, tagging, stemming,
//! coreference and subject–verb–object extraction.

pub mod coref;
pub mod stem;
pub mod svo;
pub mod tagger;
pub mod tokenize;

use serde::{Deserialize, Serialize};

pub use coref::{
    resolve_coreference, AnonymousMention, CharacterEntity, CorefConfig, Coreference, Mention,
    MentionKind, Owner, TokenRef,
};
pub use stem::{stem, stem_lower};
pub use svo::{extract_svo, SvoTriple};
pub use tagger::{pos_tag, Tag, TagLexicon, TaggedToken};
pub use tokenize::{tokenize, Abbreviations, Span, Token};

use crate::corpus::NameCensus;
use crate::resources;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub text: String,
    pub sentences: Vec<Vec<TaggedToken>>,
}

impl TaggedDocument {
    pub fn token(&self, at: TokenRef) -> &TaggedToken {
        &self.sentences[at.sentence][at.token]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TaggedToken> {
        self.sentences.iter().flatten()
    }
}

/// Output of the full text pipeline for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedDocument {
    pub doc: TaggedDocument,
    pub coref: Coreference,
    pub triples: Vec<SvoTriple>,
}

/// Lexicons and settings shared by every document.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub lexicon: TagLexicon,
    pub abbreviations: Abbreviations,
    pub coref: CorefConfig,
}

impl Pipeline {
    pub fn new(lexicon: TagLexicon, abbreviations: Abbreviations) -> Self {
        Pipeline {
            lexicon,
            abbreviations,
            coref: CorefConfig::default(),
        }
    }

    /// Pipeline built from the lexicons shipped with the crate.
    pub fn bundled() -> Self {
        Self::new(resources::tag_lexicon(), resources::abbreviations())
    }

    pub fn tag(&self, text: &str) -> TaggedDocument {
        let sentences = tokenize(text, &self.abbreviations)
            .iter()
            .map(|s| pos_tag(s, &self.lexicon))
            .collect();
        TaggedDocument {
            text: text.to_string(),
            sentences,
        }
    }

    pub fn process(&self, text: &str, census: &NameCensus) -> ProcessedDocument {
        let doc = self.tag(text);
        let coref = resolve_coreference(&doc, census, &self.coref);
        let triples = extract_svo(&doc, &coref);
        ProcessedDocument {
            doc,
            coref,
            triples,
        }
    }
}
