//! Stereotype detection against the knowledge base and role interchange.
//!
//! A finding is a character whose verb, object or occupation term sits in
//! the slot of a knowledge-base pair that matches the character's gender
//! (`x` for male, `y` for female). Counter-stereotypical uses are not
//! reported.
//!
//! Rewriting pairs a male finding with a female finding on the same
//! gender-neutral pair when the two characters are swap candidates in the
//! character graph. In term mode the two term surfaces trade places; in name
//! mode the characters' names are exchanged and their pronouns repaired.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::analogy::kb::KnowledgeBase;
use crate::analogy::{AnalogicalPair, PairLabel};
use crate::analysis::{occupation_matches, OccupationMatcher};
use crate::corpus::GenderLabel;
use crate::graph::{swap_candidates, CharacterGraph};
use crate::textproc::{stem_lower, MentionKind, Owner, ProcessedDocument, Span, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    X,
    Y,
}

impl Slot {
    fn gender(self) -> GenderLabel {
        match self {
            Slot::X => GenderLabel::Male,
            Slot::Y => GenderLabel::Female,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermSource {
    Occupation,
    Verb,
    Object,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasFinding {
    pub character: String,
    pub gender: GenderLabel,
    /// Index into the document's coreference entities.
    pub entity: usize,
    /// Source text at `span`.
    pub term: String,
    pub source: TermSource,
    pub kb_pair: AnalogicalPair,
    pub slot: Slot,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditReason {
    RoleInterchange,
    PronounRepair,
    OccupationSwap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebiasEdit {
    pub span: Span,
    pub original: String,
    pub replacement: String,
    pub reason: EditReason,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewriteMode {
    /// Exchange the matched terms, keep names.
    #[default]
    Terms,
    /// Exchange the character names and repair pronouns.
    Names,
}

impl std::str::FromStr for RewriteMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "terms" => Ok(RewriteMode::Terms),
            "names" => Ok(RewriteMode::Names),
            other => Err(format!("unknown rewrite mode {other:?} (expected terms or names)")),
        }
    }
}

fn stem_key(s: &str) -> String {
    s.split_whitespace().map(stem_lower).collect::<Vec<_>>().join(" ")
}

pub fn detect_bias(
    p: &ProcessedDocument,
    matcher: &OccupationMatcher,
    kb: &KnowledgeBase,
) -> Vec<BiasFinding> {
    let mut index: HashMap<String, Vec<(&AnalogicalPair, Slot)>> = HashMap::new();
    for pair in &kb.pairs {
        index.entry(stem_key(&pair.x)).or_default().push((pair, Slot::X));
        index.entry(stem_key(&pair.y)).or_default().push((pair, Slot::Y));
    }

    let mut terms: Vec<(usize, Span, TermSource)> = Vec::new();
    for m in occupation_matches(&p.doc, &p.coref, matcher) {
        if let Owner::Entity(e) = m.owner {
            terms.push((e, m.span, TermSource::Occupation));
        }
    }
    for t in &p.triples {
        terms.push((t.subject, t.verb_span, TermSource::Verb));
        if let (Some(span), None) = (t.object_span, t.object_entity) {
            terms.push((t.subject, span, TermSource::Object));
        }
    }

    let mut seen: HashSet<(usize, Span)> = HashSet::new();
    let mut out = Vec::new();
    for (entity, span, source) in terms {
        let ent = &p.coref.entities[entity];
        if ent.gender == GenderLabel::Unknown || seen.contains(&(entity, span)) {
            continue;
        }
        let term = &p.doc.text[span.0..span.1];
        let Some(hits) = index.get(&stem_key(term)) else { continue };
        let best = hits
            .iter()
            .filter(|(_, slot)| slot.gender() == ent.gender)
            .min_by(|a, b| {
                a.0.score
                    .total_cmp(&b.0.score)
                    .then_with(|| a.0.x.cmp(&b.0.x))
                    .then_with(|| a.0.y.cmp(&b.0.y))
            });
        if let Some(&(pair, slot)) = best {
            seen.insert((entity, span));
            out.push(BiasFinding {
                character: ent.canonical_name.clone(),
                gender: ent.gender,
                entity,
                term: term.to_string(),
                source,
                kb_pair: pair.clone(),
                slot,
                span,
            });
        }
    }
    out.sort_by(|a, b| a.span.cmp(&b.span).then(a.character.cmp(&b.character)));
    out
}

/// `word` with its first letter cased like the first letter of `template`.
fn match_case(template: &str, word: &str) -> String {
    let upper = template.chars().next().is_some_and(char::is_uppercase);
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if upper => c.to_uppercase().chain(chars).collect(),
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn overlaps(a: Span, b: Span) -> bool {
    a.0 < b.1 && b.0 < a.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rewrite {
    pub text: String,
    /// Ordered by span start, never overlapping.
    pub edits: Vec<DebiasEdit>,
    /// Indices of findings that produced an edit.
    pub rewritten: BTreeSet<usize>,
    /// Candidate edits dropped because they overlapped an earlier one.
    pub dropped: Vec<String>,
}

/// Applies non-overlapping edits (sorted by span) to `text`.
pub fn apply_edits(text: &str, edits: &[DebiasEdit]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for e in edits {
        out.push_str(&text[at..e.span.0]);
        out.push_str(&e.replacement);
        at = e.span.1;
    }
    out.push_str(&text[at..]);
    out
}

/// Male/female finding pairs eligible for interchange, in male span order.
fn match_findings(
    findings: &[BiasFinding],
    graph: &CharacterGraph,
    epsilon: f64,
) -> Vec<(usize, usize)> {
    let swaps: HashMap<(String, String), f64> = swap_candidates(graph, epsilon)
        .into_iter()
        .map(|s| ((s.male, s.female), s.difference))
        .collect();

    let neutral = |f: &BiasFinding| f.kb_pair.label == PairLabel::GenderNeutral;
    let mut used = vec![false; findings.len()];
    let mut out = Vec::new();
    for (mi, m) in findings.iter().enumerate() {
        if m.slot != Slot::X || !neutral(m) || used[mi] {
            continue;
        }
        let partner = findings
            .iter()
            .enumerate()
            .filter(|(fi, f)| {
                !used[*fi]
                    && f.slot == Slot::Y
                    && neutral(f)
                    && f.kb_pair.x == m.kb_pair.x
                    && f.kb_pair.y == m.kb_pair.y
            })
            .filter_map(|(fi, f)| {
                swaps
                    .get(&(m.character.clone(), f.character.clone()))
                    .map(|&d| (fi, d))
            })
            .min_by(|a, b| {
                a.1.total_cmp(&b.1)
                    .then_with(|| findings[a.0].character.cmp(&findings[b.0].character))
                    .then(findings[a.0].span.cmp(&findings[b.0].span))
            });
        if let Some((fi, _)) = partner {
            used[mi] = true;
            used[fi] = true;
            out.push((mi, fi));
        }
    }
    out
}

fn repair_pronoun(lower: &str, next_is_nominal: bool) -> Option<&'static str> {
    Some(match lower {
        "he" => "she",
        "she" => "he",
        "him" => "her",
        "himself" => "herself",
        "herself" => "himself",
        "hers" => "his",
        "his" if next_is_nominal => "her",
        "his" => "hers",
        "her" if next_is_nominal => "his",
        "her" => "him",
        _ => return None,
    })
}

/// Name-mode edits for one character pair: every name mention takes the
/// other character's name and every pronoun flips gender.
fn name_edits(p: &ProcessedDocument, a: usize, b: usize) -> Vec<DebiasEdit> {
    let ents = &p.coref.entities;
    let mut edits = Vec::new();
    for (this, other) in [(a, b), (b, a)] {
        let other_name = &ents[other].canonical_name;
        let other_short = other_name.split_whitespace().next().unwrap_or(other_name);
        for m in &ents[this].mentions {
            let original = p.doc.text[m.span.0..m.span.1].to_string();
            match m.kind {
                MentionKind::Name => {
                    let single = m.first.token == m.last.token;
                    edits.push(DebiasEdit {
                        span: m.span,
                        original,
                        replacement: if single { other_short } else { other_name }.to_string(),
                        reason: EditReason::RoleInterchange,
                    });
                }
                MentionKind::Pronoun => {
                    let sentence = &p.doc.sentences[m.first.sentence];
                    let next_is_nominal = sentence.get(m.first.token + 1).is_some_and(|t| {
                        t.tag.is_nominal() || t.tag == Tag::Adjective
                    });
                    if let Some(r) = repair_pronoun(&original.to_lowercase(), next_is_nominal) {
                        edits.push(DebiasEdit {
                            span: m.span,
                            replacement: match_case(&original, r),
                            original,
                            reason: EditReason::PronounRepair,
                        });
                    }
                }
            }
        }
    }
    edits
}

pub fn rewrite(
    p: &ProcessedDocument,
    findings: &[BiasFinding],
    graph: &CharacterGraph,
    epsilon: f64,
    mode: RewriteMode,
) -> Rewrite {
    let text = &p.doc.text;
    let mut accepted: Vec<DebiasEdit> = Vec::new();
    let mut rewritten = BTreeSet::new();
    let mut dropped = Vec::new();
    let mut renamed: HashSet<(usize, usize)> = HashSet::new();

    let mut pairs = match_findings(findings, graph, epsilon);
    pairs.sort_by_key(|&(m, f)| findings[m].span.min(findings[f].span));
    for (mi, fi) in pairs {
        let (m, f) = (&findings[mi], &findings[fi]);
        let candidate = match mode {
            RewriteMode::Terms => {
                let reason = if m.source == TermSource::Occupation || f.source == TermSource::Occupation {
                    EditReason::OccupationSwap
                } else {
                    EditReason::RoleInterchange
                };
                vec![
                    DebiasEdit {
                        span: m.span,
                        original: m.term.clone(),
                        replacement: match_case(&m.term, &f.term),
                        reason,
                    },
                    DebiasEdit {
                        span: f.span,
                        original: f.term.clone(),
                        replacement: match_case(&f.term, &m.term),
                        reason,
                    },
                ]
            }
            RewriteMode::Names => {
                if !renamed.insert((m.entity, f.entity)) {
                    rewritten.extend([mi, fi]);
                    continue;
                }
                name_edits(p, m.entity, f.entity)
            }
        };
        let clash = candidate.iter().any(|c| {
            accepted.iter().any(|a| overlaps(a.span, c.span))
        }) || candidate
            .iter()
            .enumerate()
            .any(|(i, c)| candidate[..i].iter().any(|d| overlaps(c.span, d.span)));
        if clash {
            dropped.push(format!(
                "{}..{} {:?} ({}) and {}..{} {:?} ({}): overlaps an earlier edit",
                m.span.0, m.span.1, m.term, m.character, f.span.0, f.span.1, f.term, f.character
            ));
            continue;
        }
        rewritten.extend([mi, fi]);
        accepted.extend(candidate);
    }
    accepted.retain(|e| e.original != e.replacement);
    accepted.sort_by_key(|e| e.span);
    Rewrite {
        text: apply_edits(text, &accepted),
        edits: accepted,
        rewritten,
        dropped,
    }
}

/// Human-readable audit of findings and edits.
pub fn explain(
    findings: &[BiasFinding],
    result: &Rewrite,
    kb: &KnowledgeBase,
    epsilon: f64,
) -> String {
    let prov = &kb.provenance;
    let mut out = String::new();
    let _ = writeln!(out, "# {}", crate::VERSION);
    let _ = writeln!(
        out,
        "# knowledge base: {} pairs from {} (sha256 {}), built by {}",
        kb.pairs.len(),
        prov.embeddings.path,
        prov.embeddings.sha256,
        prov.version
    );
    let _ = writeln!(
        out,
        "# thresholds: tau={} tau1={} tau2={} epsilon={:.6}",
        prov.config.tau, prov.config.tau1, prov.config.tau2, epsilon
    );
    let _ = writeln!(out, "# findings: {}, edits: {}", findings.len(), result.edits.len());
    for (i, f) in findings.iter().enumerate() {
        let status = if result.rewritten.contains(&i) {
            "rewritten"
        } else {
            "detected, not rewritten"
        };
        let _ = writeln!(
            out,
            "finding {}..{} {} ({}) {:?} matches {} of ({}, {}) score={:.6} label={}: {}",
            f.span.0,
            f.span.1,
            f.character,
            f.gender,
            f.term,
            match f.slot {
                Slot::X => "x",
                Slot::Y => "y",
            },
            f.kb_pair.x,
            f.kb_pair.y,
            f.kb_pair.score,
            f.kb_pair.label,
            status
        );
    }
    for e in &result.edits {
        let _ = writeln!(
            out,
            "edit {}..{} {:?} -> {:?} ({})",
            e.span.0, e.span.1, e.original, e.replacement, e.reason
        );
    }
    for d in &result.dropped {
        let _ = writeln!(out, "dropped {d}");
    }
    out
}

impl fmt::Display for EditReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EditReason::RoleInterchange => "role-interchange",
            EditReason::PronounRepair => "pronoun-repair",
            EditReason::OccupationSwap => "occupation-swap",
        })
    }
}
