//! Per-document character graphs and betweenness centrality.
//!
//! Edges are undirected and come from subject–verb–object triples:
//!
//! * a triple whose object is another character joins subject and object;
//! * two triples in the same sentence with the same verb lemma join their
//!   subjects.
//!
//! Weights count occurrences and only ride along as metadata; centrality
//! treats the graph as unweighted.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::GenderLabel;
use crate::exec::Execution;
use crate::textproc::{stem_lower, CharacterEntity, MentionKind, SvoTriple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub name: String,
    pub gender: GenderLabel,
    pub centrality: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub weight: u64,
    pub verbs: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CharacterGraph {
    pub nodes: Vec<GraphNode>,
    /// Sorted by `(source, target)` with `source < target`.
    pub edges: Vec<GraphEdge>,
}

impl CharacterGraph {
    /// Graph with the given nodes and edges; centrality is computed immediately.
    pub fn from_parts(
        nodes: Vec<(String, GenderLabel)>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        exec: Execution,
    ) -> Self {
        let mut acc: BTreeMap<(usize, usize), GraphEdge> = BTreeMap::new();
        for (a, b) in edges {
            add_edge(&mut acc, a, b, None);
        }
        let mut g = CharacterGraph {
            nodes: nodes
                .into_iter()
                .map(|(name, gender)| GraphNode {
                    name,
                    gender,
                    centrality: 0.0,
                })
                .collect(),
            edges: acc.into_values().collect(),
        };
        g.refresh_centrality(exec);
        g
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn centrality_of(&self, name: &str) -> Option<f64> {
        self.node_index(name).map(|i| self.nodes[i].centrality)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.source].push(e.target);
            adj[e.target].push(e.source);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn refresh_centrality(&mut self, exec: Execution) {
        let scores = betweenness(&self.adjacency(), exec);
        for (n, c) in self.nodes.iter_mut().zip(scores) {
            n.centrality = c;
        }
    }

    pub fn max_centrality(&self) -> f64 {
        self.nodes.iter().map(|n| n.centrality).fold(0.0, f64::max)
    }
}

fn add_edge(
    acc: &mut BTreeMap<(usize, usize), GraphEdge>,
    a: usize,
    b: usize,
    verb: Option<&str>,
) {
    if a == b {
        return;
    }
    let (s, t) = if a < b { (a, b) } else { (b, a) };
    let e = acc.entry((s, t)).or_insert_with(|| GraphEdge {
        source: s,
        target: t,
        weight: 0,
        verbs: BTreeSet::new(),
    });
    e.weight += 1;
    if let Some(v) = verb {
        e.verbs.insert(v.to_string());
    }
}

/// Entity referred to by a triple's object: the resolved object entity, or
/// an entity with a name word whose stem equals the object lemma.
fn object_target(triple: &SvoTriple, entities: &[CharacterEntity]) -> Option<usize> {
    if triple.object_entity.is_some() {
        return triple.object_entity;
    }
    if triple.object_lemma.is_empty() {
        return None;
    }
    entities.iter().position(|e| {
        e.mentions
            .iter()
            .filter(|m| m.kind == MentionKind::Name)
            .map(|m| m.surface.as_str())
            .chain(std::iter::once(e.canonical_name.as_str()))
            .flat_map(str::split_whitespace)
            .any(|w| stem_lower(w) == triple.object_lemma)
    })
}

pub fn build_graph(
    triples: &[SvoTriple],
    entities: &[CharacterEntity],
    exec: Execution,
) -> CharacterGraph {
    let mut acc: BTreeMap<(usize, usize), GraphEdge> = BTreeMap::new();
    for t in triples {
        if let Some(o) = object_target(t, entities) {
            add_edge(&mut acc, t.subject, o, Some(&t.verb_lemma));
        }
    }
    let mut shared: BTreeMap<(usize, &str), BTreeSet<usize>> = BTreeMap::new();
    for t in triples {
        shared
            .entry((t.sentence, t.verb_lemma.as_str()))
            .or_default()
            .insert(t.subject);
    }
    for ((_, verb), subjects) in &shared {
        let subjects: Vec<usize> = subjects.iter().copied().collect();
        for i in 0..subjects.len() {
            for j in i + 1..subjects.len() {
                add_edge(&mut acc, subjects[i], subjects[j], Some(verb));
            }
        }
    }
    let mut g = CharacterGraph {
        nodes: entities
            .iter()
            .map(|e| GraphNode {
                name: e.canonical_name.clone(),
                gender: e.gender,
                centrality: 0.0,
            })
            .collect(),
        edges: acc.into_values().collect(),
    };
    g.refresh_centrality(exec);
    g
}

/// Dependencies of every vertex on shortest paths from `source` (one Brandes pass).
fn single_source_dependency(adj: &[Vec<usize>], source: usize) -> Vec<f64> {
    let n = adj.len();
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    sigma[source] = 1.0;
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        stack.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    while let Some(w) = stack.pop() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
    }
    delta[source] = 0.0;
    delta
}

/// Exact, unnormalized betweenness of an undirected graph given as
/// adjacency lists; each unordered pair contributes once.
///
/// Per-source passes may run in parallel; their results are summed in source
/// order so the output does not depend on scheduling.
pub fn betweenness(adj: &[Vec<usize>], exec: Execution) -> Vec<f64> {
    let n = adj.len();
    let per_source = exec.map_range(n, |s| single_source_dependency(adj, s));
    let mut total = vec![0.0f64; n];
    for delta in per_source {
        for (t, d) in total.iter_mut().zip(delta) {
            *t += d;
        }
    }
    total.iter_mut().for_each(|c| *c /= 2.0);
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapPair {
    pub male: String,
    pub female: String,
    pub difference: f64,
}

/// Default gate: a quarter of the largest centrality in the graph.
pub fn default_epsilon(graph: &CharacterGraph) -> f64 {
    0.25 * graph.max_centrality()
}

/// Male × female pairs whose centralities differ by at most `epsilon`,
/// sorted by difference, then male name, then female name.
pub fn swap_candidates(graph: &CharacterGraph, epsilon: f64) -> Vec<SwapPair> {
    let mut out = Vec::new();
    for m in graph.nodes.iter().filter(|n| n.gender == GenderLabel::Male) {
        for f in graph.nodes.iter().filter(|n| n.gender == GenderLabel::Female) {
            let difference = (m.centrality - f.centrality).abs();
            if difference <= epsilon {
                out.push(SwapPair {
                    male: m.name.clone(),
                    female: f.name.clone(),
                    difference,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.difference
            .total_cmp(&b.difference)
            .then_with(|| a.male.cmp(&b.male))
            .then_with(|| a.female.cmp(&b.female))
    });
    out
}
