use serde::{Deserialize, Serialize};

use super::coref::{Coreference, Owner, TokenRef};
use super::stem::stem_lower;
use super::tagger::Tag;
use super::tokenize::Span;
use super::TaggedDocument;

/// Subject–verb–object triple anchored in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvoTriple {
    /// Index into `Coreference::entities`.
    pub subject: usize,
    pub verb_lemma: String,
    /// Empty for intransitive uses.
    pub object_lemma: String,
    pub sentence: usize,
    pub verb_span: Span,
    pub object_span: Option<Span>,
    /// Set when the object token is a name mention of another entity.
    pub object_entity: Option<usize>,
}

/// For each verb: subject is the nearest entity mention before it in the
/// sentence, object the first noun or proper noun after it. Sentences
/// without an entity subject produce nothing.
pub fn extract_svo(doc: &TaggedDocument, coref: &Coreference) -> Vec<SvoTriple> {
    let owners = coref.token_owners();
    let mut out = Vec::new();
    for (si, sentence) in doc.sentences.iter().enumerate() {
        for (vi, verb) in sentence.iter().enumerate() {
            if verb.tag != Tag::Verb {
                continue;
            }
            let subject = (0..vi).rev().find_map(|ti| {
                match owners.get(&TokenRef { sentence: si, token: ti }) {
                    Some((Owner::Entity(e), _)) => Some(*e),
                    _ => None,
                }
            });
            let Some(subject) = subject else { continue };
            let object = sentence[vi + 1..]
                .iter()
                .enumerate()
                .find(|(_, t)| t.tag.is_nominal())
                .map(|(off, t)| (vi + 1 + off, t));
            let (object_lemma, object_span, object_entity) = match object {
                Some((oi, tok)) => {
                    let owner = owners.get(&TokenRef { sentence: si, token: oi });
                    let entity = match owner {
                        Some((Owner::Entity(e), _)) => Some(*e),
                        _ => None,
                    };
                    (stem_lower(&tok.token.surface), Some(tok.token.span), entity)
                }
                None => (String::new(), None, None),
            };
            out.push(SvoTriple {
                subject,
                verb_lemma: stem_lower(&verb.token.surface),
                object_lemma,
                sentence: si,
                verb_span: verb.token.span,
                object_span,
                object_entity,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{GenderLabel, NameCensus};
    use crate::textproc::coref::{resolve_coreference, CorefConfig};
    use crate::textproc::Pipeline;

    fn triples(text: &str) -> (Coreference, Vec<SvoTriple>) {
        let census = NameCensus::from_rows([
            ("john", GenderLabel::Male, 10),
            ("mary", GenderLabel::Female, 10),
        ]);
        let doc = Pipeline::bundled().tag(text);
        let coref = resolve_coreference(&doc, &census, &CorefConfig::default());
        let t = extract_svo(&doc, &coref);
        (coref, t)
    }

    #[test]
    fn transitive() {
        let (c, t) = triples("John bought fruits.");
        assert_eq!(t.len(), 1);
        assert_eq!(c.entities[t[0].subject].canonical_name, "John");
        assert_eq!(t[0].verb_lemma, stem_lower("bought"));
        assert_eq!(t[0].object_lemma, "fruit");
        assert_eq!(t[0].object_span, Some((12, 18)));
    }

    #[test]
    fn pronoun_subject_resolves() {
        let (c, t) = triples("John sat. He slept.");
        let slept: Vec<_> = t.iter().filter(|t| t.verb_lemma == "slept").collect();
        assert_eq!(slept.len(), 1);
        assert_eq!(c.entities[slept[0].subject].canonical_name, "John");
        assert!(slept[0].object_lemma.is_empty());
    }

    #[test]
    fn no_subject_no_triple() {
        let (_, t) = triples("The rain fell.");
        assert!(t.is_empty());
    }

    #[test]
    fn entity_object() {
        let (c, t) = triples("John loved Mary.");
        assert_eq!(t.len(), 1);
        let mary = c.entity_index("Mary").unwrap();
        assert_eq!(t[0].object_entity, Some(mary));
    }
}
