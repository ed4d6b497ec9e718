//! Rule-based character extraction and pronoun resolution.
//!
//! * Runs of adjacent `ProperNoun` tokens form one name mention.
//! * Name mentions are grouped into entities keyed by their first token
//!   (the forename). A single-token mention equal to the surname of an
//!   existing multi-token entity joins that entity.
//! * Entity gender comes from the census lookup of the forename.
//! * A gendered pronoun attaches to the entity of the nearest preceding
//!   mention with matching gender, searched back through the configured
//!   sentence window. Attached pronouns extend the chain. Pronouns that find
//!   no antecedent are kept as anonymous gendered mentions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tagger::{title_gender, Tag, TaggedToken};
use super::tokenize::Span;
use super::TaggedDocument;
use crate::corpus::{GenderLabel, NameCensus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MentionKind {
    Name,
    Pronoun,
}

/// Position of a token inside a tagged document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenRef {
    pub sentence: usize,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub span: Span,
    pub kind: MentionKind,
    pub surface: String,
    /// First and last token covered by the mention (inclusive).
    pub first: TokenRef,
    pub last: TokenRef,
}

impl Mention {
    pub fn sentence(&self) -> usize {
        self.first.sentence
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterEntity {
    pub canonical_name: String,
    pub gender: GenderLabel,
    /// Mentions in document order.
    pub mentions: Vec<Mention>,
}

impl CharacterEntity {
    pub fn name_mentions(&self) -> usize {
        self.mentions
            .iter()
            .filter(|m| m.kind == MentionKind::Name)
            .count()
    }

    pub fn pronoun_mentions(&self) -> usize {
        self.mentions.len() - self.name_mentions()
    }
}

/// A gendered pronoun with no antecedent in the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymousMention {
    pub gender: GenderLabel,
    pub mention: Mention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefConfig {
    /// Number of sentences searched for an antecedent, counting the
    /// pronoun's own sentence.
    pub window: usize,
}

impl Default for CorefConfig {
    fn default() -> Self {
        CorefConfig { window: 3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coreference {
    pub entities: Vec<CharacterEntity>,
    pub anonymous: Vec<AnonymousMention>,
}

/// Which entity (if any) owns a mention, addressable by token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Entity(usize),
    Anonymous(usize),
}

impl Coreference {
    /// Total mentions: entity mentions plus anonymous pronouns.
    pub fn mention_count(&self) -> usize {
        self.entities.iter().map(|e| e.mentions.len()).sum::<usize>() + self.anonymous.len()
    }

    /// Maps every token covered by a mention to its owner and the mention.
    pub fn token_owners(&self) -> HashMap<TokenRef, (Owner, &Mention)> {
        let mut map = HashMap::new();
        for (ei, e) in self.entities.iter().enumerate() {
            for m in &e.mentions {
                for t in m.first.token..=m.last.token {
                    map.insert(
                        TokenRef {
                            sentence: m.first.sentence,
                            token: t,
                        },
                        (Owner::Entity(ei), m),
                    );
                }
            }
        }
        for (ai, a) in self.anonymous.iter().enumerate() {
            map.insert(a.mention.first, (Owner::Anonymous(ai), &a.mention));
        }
        map
    }

    pub fn gender_of(&self, owner: Owner) -> GenderLabel {
        match owner {
            Owner::Entity(i) => self.entities[i].gender,
            Owner::Anonymous(i) => self.anonymous[i].gender,
        }
    }

    pub fn entity_index(&self, name: &str) -> Option<usize> {
        self.entities.iter().position(|e| e.canonical_name == name)
    }
}

fn key_token(t: &TaggedToken) -> String {
    t.token.lowercase.clone()
}

/// Gender of an honorific right before `start` ("Mrs Dalloway", "Mr. Darcy").
fn preceding_title(sentence: &[TaggedToken], start: usize) -> Option<GenderLabel> {
    let mut i = start.checked_sub(1)?;
    if sentence[i].token.surface == "." {
        i = i.checked_sub(1)?;
    }
    title_gender(&sentence[i].token.lowercase).filter(|g| *g != GenderLabel::Unknown)
}

pub fn resolve_coreference(
    doc: &TaggedDocument,
    census: &NameCensus,
    config: &CorefConfig,
) -> Coreference {
    let mut entities: Vec<CharacterEntity> = Vec::new();
    let mut by_forename: HashMap<String, usize> = HashMap::new();
    let mut by_surname: HashMap<String, usize> = HashMap::new();
    let mut anonymous = Vec::new();
    // (sentence, entity) for every resolved mention, in document order
    let mut history: Vec<(usize, usize)> = Vec::new();

    for (si, sentence) in doc.sentences.iter().enumerate() {
        let mut ti = 0;
        while ti < sentence.len() {
            let tok = &sentence[ti];
            if tok.tag == Tag::ProperNoun {
                let start = ti;
                while ti + 1 < sentence.len() && sentence[ti + 1].tag == Tag::ProperNoun {
                    ti += 1;
                }
                let run = &sentence[start..=ti];
                let span = (run[0].token.span.0, run[run.len() - 1].token.span.1);
                let surface = doc.text[span.0..span.1].to_string();
                let forename = key_token(&run[0]);
                let entity = if run.len() == 1 {
                    by_forename
                        .get(&forename)
                        .or_else(|| by_surname.get(&forename))
                        .copied()
                } else {
                    by_forename.get(&forename).copied()
                };
                let ei = entity.unwrap_or_else(|| {
                    let gender = match census.lookup(&forename) {
                        GenderLabel::Unknown => preceding_title(sentence, start)
                            .unwrap_or(GenderLabel::Unknown),
                        g => g,
                    };
                    entities.push(CharacterEntity {
                        canonical_name: surface.clone(),
                        gender,
                        mentions: Vec::new(),
                    });
                    by_forename.insert(forename.clone(), entities.len() - 1);
                    entities.len() - 1
                });
                if run.len() > 1 {
                    by_surname
                        .entry(key_token(&run[run.len() - 1]))
                        .or_insert(ei);
                    let e = &mut entities[ei];
                    if surface.len() > e.canonical_name.len() {
                        e.canonical_name = surface.clone();
                    }
                }
                entities[ei].mentions.push(Mention {
                    span,
                    kind: MentionKind::Name,
                    surface,
                    first: TokenRef { sentence: si, token: start },
                    last: TokenRef { sentence: si, token: ti },
                });
                history.push((si, ei));
            } else if let Some(gender) = tok.tag.pronoun_gender() {
                let mention = Mention {
                    span: tok.token.span,
                    kind: MentionKind::Pronoun,
                    surface: tok.token.surface.clone(),
                    first: TokenRef { sentence: si, token: ti },
                    last: TokenRef { sentence: si, token: ti },
                };
                let lowest = (si + 1).saturating_sub(config.window.max(1));
                let antecedent = history
                    .iter()
                    .rev()
                    .take_while(|(s, _)| *s >= lowest)
                    .find(|(_, e)| entities[*e].gender == gender)
                    .map(|&(_, e)| e);
                match antecedent {
                    Some(ei) => {
                        entities[ei].mentions.push(mention);
                        history.push((si, ei));
                    }
                    None => anonymous.push(AnonymousMention { gender, mention }),
                }
            }
            ti += 1;
        }
    }

    Coreference {
        entities,
        anonymous,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::Pipeline;

    fn census() -> NameCensus {
        NameCensus::from_rows([
            ("john", GenderLabel::Male, 100),
            ("mary", GenderLabel::Female, 100),
            ("ann", GenderLabel::Female, 100),
        ])
    }

    fn run(text: &str) -> Coreference {
        let p = Pipeline::bundled();
        resolve_coreference(&p.tag(text), &census(), &CorefConfig::default())
    }

    #[test]
    fn he_maps_to_john() {
        let c = run("John went to market. He bought fruits.");
        assert_eq!(c.entities.len(), 1);
        let john = &c.entities[0];
        assert_eq!(john.canonical_name, "John");
        assert_eq!(john.gender, GenderLabel::Male);
        let surfaces: Vec<_> = john.mentions.iter().map(|m| m.surface.as_str()).collect();
        assert_eq!(surfaces, ["John", "He"]);
        assert!(c.anonymous.is_empty());
    }

    #[test]
    fn gender_mismatch_leaves_pronoun_anonymous() {
        let c = run("Mary slept. He ran.");
        assert_eq!(c.entities.len(), 1);
        assert_eq!(c.entities[0].gender, GenderLabel::Female);
        assert_eq!(c.entities[0].mentions.len(), 1);
        assert_eq!(c.anonymous.len(), 1);
        assert_eq!(c.anonymous[0].gender, GenderLabel::Male);
        assert_eq!(c.anonymous[0].mention.surface, "He");
    }

    #[test]
    fn nothing_to_resolve() {
        let c = run("the rain fell on the old town.");
        assert!(c.entities.is_empty());
        assert!(c.anonymous.is_empty());
    }

    #[test]
    fn full_names_merge() {
        let c = run("John Smith arrived. Later John left and Smith laughed.");
        assert_eq!(c.entities.len(), 1);
        assert_eq!(c.entities[0].canonical_name, "John Smith");
        assert_eq!(c.entities[0].mentions.len(), 3);
    }

    #[test]
    fn window_limits_antecedents() {
        // Mary is three sentences back: outside the default window
        let c = run("Mary slept. The rain fell. The wind rose. She woke.");
        assert_eq!(c.anonymous.len(), 1);
        let c = resolve_coreference(
            &Pipeline::bundled().tag("Mary slept. The rain fell. The wind rose. She woke."),
            &census(),
            &CorefConfig { window: 4 },
        );
        assert!(c.anonymous.is_empty());
    }

    #[test]
    fn nearest_matching_antecedent_wins() {
        let c = run("Mary met Ann. She smiled.");
        let ann = c.entity_index("Ann").unwrap();
        assert_eq!(c.entities[ann].mentions.len(), 2);
    }

    #[test]
    fn title_supplies_gender() {
        let c = run("Mrs. Dalloway bought flowers. She smiled.");
        assert_eq!(c.entities.len(), 1);
        assert_eq!(c.entities[0].canonical_name, "Dalloway");
        assert_eq!(c.entities[0].gender, GenderLabel::Female);
        assert_eq!(c.entities[0].mentions.len(), 2);
    }

    #[test]
    fn deterministic() {
        let text = "John met Mary. She laughed and he smiled. Mary left.";
        assert_eq!(run(text), run(text));
    }
}
