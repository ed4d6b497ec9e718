//! Corpus analytics over processed documents: mention counts, adjective and
//! verb association profiles, occupation matching and central characters.

pub mod report;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{author_gender_counts, AuthorCounts, BookRecord, GenderLabel, NameCensus};
use crate::corpus::{normalize_term, OccupationLexicon};
use crate::exec::Execution;
use crate::graph::{build_graph, CharacterGraph};
use crate::textproc::tagger::is_copula;
use crate::textproc::{
    stem_lower, Coreference, MentionKind, Owner, Pipeline, ProcessedDocument, Span, SvoTriple,
    Tag, TaggedDocument, TokenRef,
};

pub use report::{emit_reports, ReportContext, DEFAULT_TOP_K};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionStats {
    pub male_name: u64,
    pub male_pronoun: u64,
    pub female_name: u64,
    pub female_pronoun: u64,
    pub unknown: u64,
}

impl MentionStats {
    pub fn male(&self) -> u64 {
        self.male_name + self.male_pronoun
    }

    pub fn female(&self) -> u64 {
        self.female_name + self.female_pronoun
    }

    pub fn total(&self) -> u64 {
        self.male() + self.female() + self.unknown
    }

    /// Male to female mentions, `None` without female mentions.
    pub fn ratio(&self) -> Option<f64> {
        (self.female() > 0).then(|| self.male() as f64 / self.female() as f64)
    }

    pub fn merge(&mut self, other: &MentionStats) {
        self.male_name += other.male_name;
        self.male_pronoun += other.male_pronoun;
        self.female_name += other.female_name;
        self.female_pronoun += other.female_pronoun;
        self.unknown += other.unknown;
    }
}

pub fn count_mentions(coref: &Coreference) -> MentionStats {
    let mut s = MentionStats::default();
    let mut tally = |gender: GenderLabel, kind: MentionKind| match (gender, kind) {
        (GenderLabel::Male, MentionKind::Name) => s.male_name += 1,
        (GenderLabel::Male, MentionKind::Pronoun) => s.male_pronoun += 1,
        (GenderLabel::Female, MentionKind::Name) => s.female_name += 1,
        (GenderLabel::Female, MentionKind::Pronoun) => s.female_pronoun += 1,
        (GenderLabel::Unknown, _) => s.unknown += 1,
    };
    for e in &coref.entities {
        for m in &e.mentions {
            tally(e.gender, m.kind);
        }
    }
    for a in &coref.anonymous {
        tally(a.gender, MentionKind::Pronoun);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    Adjective,
    Verb,
    Occupation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationProfile {
    pub gender: GenderLabel,
    pub kind: ProfileKind,
    pub counts: BTreeMap<String, u64>,
}

/// One association profile per gender label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderProfiles {
    pub male: AssociationProfile,
    pub female: AssociationProfile,
    pub unknown: AssociationProfile,
}

impl GenderProfiles {
    pub fn new(kind: ProfileKind) -> Self {
        let empty = |gender| AssociationProfile {
            gender,
            kind,
            counts: BTreeMap::new(),
        };
        GenderProfiles {
            male: empty(GenderLabel::Male),
            female: empty(GenderLabel::Female),
            unknown: empty(GenderLabel::Unknown),
        }
    }

    pub fn get(&self, gender: GenderLabel) -> &AssociationProfile {
        match gender {
            GenderLabel::Male => &self.male,
            GenderLabel::Female => &self.female,
            GenderLabel::Unknown => &self.unknown,
        }
    }

    fn get_mut(&mut self, gender: GenderLabel) -> &mut AssociationProfile {
        match gender {
            GenderLabel::Male => &mut self.male,
            GenderLabel::Female => &mut self.female,
            GenderLabel::Unknown => &mut self.unknown,
        }
    }

    pub fn add(&mut self, gender: GenderLabel, term: &str, n: u64) {
        if n > 0 {
            *self.get_mut(gender).counts.entry(term.to_string()).or_default() += n;
        }
    }

    pub fn merge(&mut self, other: &GenderProfiles) {
        for p in [&other.male, &other.female, &other.unknown] {
            for (term, &n) in &p.counts {
                self.add(p.gender, term, n);
            }
        }
    }

    /// The `k` most frequent terms, by count descending then term.
    pub fn top(&self, gender: GenderLabel, k: usize) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self
            .get(gender)
            .counts
            .iter()
            .map(|(t, &n)| (t.as_str(), n))
            .collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v.truncate(k);
        v
    }
}

/// Nearest mention strictly before token `before` in sentence `si`.
fn preceding_owner(
    owners: &HashMap<TokenRef, (Owner, &crate::textproc::Mention)>,
    si: usize,
    before: usize,
) -> Option<Owner> {
    (0..before)
        .rev()
        .find_map(|ti| owners.get(&TokenRef { sentence: si, token: ti }).map(|(o, _)| *o))
}

fn is_adjective_link(lower: &str) -> bool {
    lower == "and" || lower == ","
}

/// Adjectives modifying a mention: a run of adjectives directly before it,
/// or predicate adjectives after a copula whose subject is the nearest
/// preceding mention in the sentence. Terms are stemmed.
pub fn adjective_profile(doc: &TaggedDocument, coref: &Coreference) -> GenderProfiles {
    let owners = coref.token_owners();
    let mut out = GenderProfiles::new(ProfileKind::Adjective);
    let mut credited: HashSet<(TokenRef, GenderLabel)> = HashSet::new();
    let mut credit = |at: TokenRef, gender: GenderLabel, out: &mut GenderProfiles| {
        if credited.insert((at, gender)) {
            out.add(gender, &stem_lower(&doc.token(at).token.surface), 1);
        }
    };

    let mut starts: Vec<(TokenRef, Owner)> = Vec::new();
    for (ei, e) in coref.entities.iter().enumerate() {
        starts.extend(e.mentions.iter().map(|m| (m.first, Owner::Entity(ei))));
    }
    for (ai, a) in coref.anonymous.iter().enumerate() {
        starts.push((a.mention.first, Owner::Anonymous(ai)));
    }
    starts.sort_by_key(|&(at, _)| at);

    for (at, owner) in starts {
        let sentence = &doc.sentences[at.sentence];
        let gender = coref.gender_of(owner);
        let mut i = at.token;
        while i > 0 {
            let t = &sentence[i - 1];
            if t.tag == Tag::Adjective {
                credit(TokenRef { sentence: at.sentence, token: i - 1 }, gender, &mut out);
            } else if !(is_adjective_link(&t.token.lowercase)
                && i >= 2
                && sentence[i - 2].tag == Tag::Adjective)
            {
                break;
            }
            i -= 1;
        }
    }

    for (si, sentence) in doc.sentences.iter().enumerate() {
        for (ci, cop) in sentence.iter().enumerate() {
            if cop.tag != Tag::Verb || !is_copula(&cop.token.lowercase) {
                continue;
            }
            let Some(owner) = preceding_owner(&owners, si, ci) else { continue };
            let gender = coref.gender_of(owner);
            let mut seen_adjective = false;
            for (ti, t) in sentence.iter().enumerate().skip(ci + 1) {
                match t.tag {
                    Tag::Adjective => {
                        seen_adjective = true;
                        credit(TokenRef { sentence: si, token: ti }, gender, &mut out);
                    }
                    Tag::Other if t.token.is_word() => {}
                    Tag::Other if seen_adjective && t.token.lowercase == "," => {}
                    _ => break,
                }
            }
        }
    }
    out
}

/// Each triple's verb lemma credited to its subject's gender.
pub fn verb_profile(triples: &[SvoTriple], coref: &Coreference) -> GenderProfiles {
    let mut out = GenderProfiles::new(ProfileKind::Verb);
    for t in triples {
        out.add(coref.entities[t.subject].gender, &t.verb_lemma, 1);
    }
    out
}

/// Occupation lexicon indexed by stemmed word sequence.
#[derive(Debug, Clone)]
pub struct OccupationMatcher {
    by_stems: HashMap<Vec<String>, (String, u8)>,
    longest: usize,
}

impl OccupationMatcher {
    pub fn new(lexicon: &OccupationLexicon) -> Self {
        let mut by_stems = HashMap::new();
        let mut longest = 0;
        for (term, level) in lexicon.iter() {
            let stems: Vec<String> = term.split_whitespace().map(stem_lower).collect();
            longest = longest.max(stems.len());
            by_stems.entry(stems).or_insert_with(|| (term.to_string(), level));
        }
        OccupationMatcher { by_stems, longest }
    }

    /// Greedy longest-first occurrences in one sentence as
    /// `(first token, last token, term, level)`; the last token must be a noun.
    pub fn occurrences(
        &self,
        sentence: &[crate::textproc::TaggedToken],
    ) -> Vec<(usize, usize, String, u8)> {
        let stems: Vec<Option<String>> = sentence
            .iter()
            .map(|t| t.token.is_word().then(|| stem_lower(&t.token.surface)))
            .collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < sentence.len() {
            let mut matched = None;
            for len in (1..=self.longest.min(sentence.len() - i)).rev() {
                let last = i + len - 1;
                if sentence[last].tag != Tag::Noun {
                    continue;
                }
                let Some(key) = stems[i..=last].iter().cloned().collect::<Option<Vec<_>>>()
                else {
                    continue;
                };
                if let Some((term, level)) = self.by_stems.get(&key) {
                    matched = Some((i, last, term.clone(), *level));
                    break;
                }
            }
            match matched {
                Some(m) => {
                    i = m.1 + 1;
                    out.push(m);
                }
                None => i += 1,
            }
        }
        out
    }
}

/// An occupation noun attributed to a mention owner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationMatch {
    pub owner: Owner,
    pub term: String,
    pub level: u8,
    pub sentence: usize,
    pub span: Span,
}

/// For every mention, the nearest occupation noun in its sentence (ties go
/// to the earlier occurrence). Each occurrence counts once per owner.
pub fn occupation_matches(
    doc: &TaggedDocument,
    coref: &Coreference,
    matcher: &OccupationMatcher,
) -> Vec<OccupationMatch> {
    let mut mentions: Vec<(Owner, TokenRef, TokenRef)> = Vec::new();
    for (ei, e) in coref.entities.iter().enumerate() {
        mentions.extend(e.mentions.iter().map(|m| (Owner::Entity(ei), m.first, m.last)));
    }
    for (ai, a) in coref.anonymous.iter().enumerate() {
        mentions.push((Owner::Anonymous(ai), a.mention.first, a.mention.last));
    }
    mentions.sort_by_key(|&(_, first, _)| first);

    let per_sentence: Vec<_> = doc.sentences.iter().map(|s| matcher.occurrences(s)).collect();
    let mut taken: HashSet<(usize, usize, Owner)> = HashSet::new();
    let mut out = Vec::new();
    for (owner, first, last) in mentions {
        let occ = &per_sentence[first.sentence];
        let distance = |&(a, b, _, _): &(usize, usize, String, u8)| {
            if a > last.token {
                a - last.token
            } else {
                first.token.saturating_sub(b)
            }
        };
        let Some(best) = occ
            .iter()
            .min_by(|x, y| distance(x).cmp(&distance(y)).then(x.0.cmp(&y.0)))
        else {
            continue;
        };
        if !taken.insert((first.sentence, best.0, owner)) {
            continue;
        }
        let sentence = &doc.sentences[first.sentence];
        out.push(OccupationMatch {
            owner,
            term: best.2.clone(),
            level: best.3,
            sentence: first.sentence,
            span: (sentence[best.0].token.span.0, sentence[best.1].token.span.1),
        });
    }
    out.sort_by(|a, b| a.span.cmp(&b.span).then(a.term.cmp(&b.term)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationStats {
    pub counts: GenderProfiles,
    /// Sum of levels with multiplicity, per gender (male, female, unknown).
    pub level_sums: [u64; 3],
}

impl Default for OccupationStats {
    fn default() -> Self {
        OccupationStats {
            counts: GenderProfiles::new(ProfileKind::Occupation),
            level_sums: [0; 3],
        }
    }
}

fn gender_slot(g: GenderLabel) -> usize {
    match g {
        GenderLabel::Male => 0,
        GenderLabel::Female => 1,
        GenderLabel::Unknown => 2,
    }
}

impl OccupationStats {
    pub fn add(&mut self, gender: GenderLabel, term: &str, level: u8) {
        self.counts.add(gender, term, 1);
        self.level_sums[gender_slot(gender)] += u64::from(level);
    }

    pub fn merge(&mut self, other: &OccupationStats) {
        self.counts.merge(&other.counts);
        for (a, b) in self.level_sums.iter_mut().zip(other.level_sums) {
            *a += b;
        }
    }

    pub fn count(&self, gender: GenderLabel) -> u64 {
        self.counts.get(gender).counts.values().sum()
    }

    pub fn mean_level(&self, gender: GenderLabel) -> Option<f64> {
        let n = self.count(gender);
        (n > 0).then(|| self.level_sums[gender_slot(gender)] as f64 / n as f64)
    }

    /// Level of a counted term, recovered from the lexicon.
    pub fn level_of(lexicon: &OccupationLexicon, term: &str) -> Option<u8> {
        lexicon.level(term)
    }
}

pub fn occupation_stats(
    doc: &TaggedDocument,
    coref: &Coreference,
    matcher: &OccupationMatcher,
) -> OccupationStats {
    let mut stats = OccupationStats::default();
    for m in occupation_matches(doc, coref, matcher) {
        stats.add(coref.gender_of(m.owner), &m.term, m.level);
    }
    stats
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralCharacter {
    pub name: String,
    pub gender: GenderLabel,
    pub mentions: usize,
    pub centrality: f64,
}

/// Entity with the most mentions; ties go to higher centrality, then to the
/// lexicographically smaller name.
pub fn central_character(coref: &Coreference, graph: &CharacterGraph) -> Option<CentralCharacter> {
    coref
        .entities
        .iter()
        .map(|e| CentralCharacter {
            name: e.canonical_name.clone(),
            gender: e.gender,
            mentions: e.mentions.len(),
            centrality: graph.centrality_of(&e.canonical_name).unwrap_or(0.0),
        })
        .min_by(|a, b| {
            b.mentions
                .cmp(&a.mentions)
                .then(b.centrality.total_cmp(&a.centrality))
                .then_with(|| a.name.cmp(&b.name))
        })
}

/// Everything computed for one book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookAnalysis {
    pub id: String,
    pub year: i32,
    pub mentions: MentionStats,
    pub adjectives: GenderProfiles,
    pub verbs: GenderProfiles,
    pub occupations: OccupationStats,
    pub central: Option<CentralCharacter>,
}

/// Shared, read-only inputs for analysing documents.
#[derive(Debug, Clone)]
pub struct Analyzer {
    pub pipeline: Pipeline,
    pub census: NameCensus,
    pub occupations: OccupationLexicon,
    matcher: OccupationMatcher,
}

impl Analyzer {
    /// Occupation words missing from the tag lexicon are added as nouns.
    pub fn new(mut pipeline: Pipeline, census: NameCensus, occupations: OccupationLexicon) -> Self {
        for (term, _) in occupations.iter() {
            for word in term.split_whitespace() {
                pipeline.lexicon.insert_noun_if_absent(&normalize_term(word));
            }
        }
        let matcher = OccupationMatcher::new(&occupations);
        Analyzer {
            pipeline,
            census,
            occupations,
            matcher,
        }
    }

    pub fn matcher(&self) -> &OccupationMatcher {
        &self.matcher
    }

    pub fn process(&self, text: &str) -> ProcessedDocument {
        self.pipeline.process(text, &self.census)
    }

    pub fn analyze_text(&self, id: &str, year: i32, text: &str) -> BookAnalysis {
        let p = self.process(text);
        let graph = build_graph(&p.triples, &p.coref.entities, Execution::Sequential);
        BookAnalysis {
            id: id.to_string(),
            year,
            mentions: count_mentions(&p.coref),
            adjectives: adjective_profile(&p.doc, &p.coref),
            verbs: verb_profile(&p.triples, &p.coref),
            occupations: occupation_stats(&p.doc, &p.coref, &self.matcher),
            central: central_character(&p.coref, &graph),
        }
    }

    pub fn analyze_book(&self, book: &BookRecord) -> BookAnalysis {
        self.analyze_text(&book.id, book.year, &book.description)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusAnalysis {
    /// In corpus order.
    pub books: Vec<BookAnalysis>,
    pub authors: BTreeMap<i32, AuthorCounts>,
    pub mentions: MentionStats,
    pub adjectives: GenderProfiles,
    pub verbs: GenderProfiles,
    pub occupations: OccupationStats,
}

impl CorpusAnalysis {
    /// Per-year mean of each mention count, with the number of books.
    pub fn mentions_by_year(&self) -> BTreeMap<i32, (usize, [f64; 5])> {
        let mut acc: BTreeMap<i32, (usize, MentionStats)> = BTreeMap::new();
        for b in &self.books {
            let slot = acc.entry(b.year).or_default();
            slot.0 += 1;
            slot.1.merge(&b.mentions);
        }
        acc.into_iter()
            .map(|(year, (n, s))| {
                let mean = |v: u64| v as f64 / n as f64;
                let means = [
                    mean(s.male_name),
                    mean(s.male_pronoun),
                    mean(s.female_name),
                    mean(s.female_pronoun),
                    mean(s.unknown),
                ];
                (year, (n, means))
            })
            .collect()
    }
}

/// Per-book work fans out over `exec`; the merge runs in corpus order.
pub fn analyze_corpus(
    books: &[BookRecord],
    analyzer: &Analyzer,
    exec: Execution,
) -> CorpusAnalysis {
    let per_book = exec.map(books, |b| analyzer.analyze_book(b));
    let mut mentions = MentionStats::default();
    let mut adjectives = GenderProfiles::new(ProfileKind::Adjective);
    let mut verbs = GenderProfiles::new(ProfileKind::Verb);
    let mut occupations = OccupationStats::default();
    for b in &per_book {
        mentions.merge(&b.mentions);
        adjectives.merge(&b.adjectives);
        verbs.merge(&b.verbs);
        occupations.merge(&b.occupations);
    }
    CorpusAnalysis {
        books: per_book,
        authors: author_gender_counts(books, &analyzer.census),
        mentions,
        adjectives,
        verbs,
        occupations,
    }
}
