//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run alone with `cargo test -p biaslens-cli --test acceptance`.

mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use biaslens::analogy::{
    classify_pair, extract_pairs, load_kb, pair_score, save_kb, AnalogicalPair, GenderAxis,
    PairConfig, PairLabel,
};
use biaslens::embeddings::{
    fact_words, preprocess_facts, read_embeddings, train_skipgram, write_embeddings, cosine,
    Dictionary, EmbeddingError, EmbeddingTable, TrainConfig,
};
use biaslens::graph::betweenness;
use biaslens::textproc::Pipeline;
use biaslens::{resources, Execution, GenderLabel};

use common::*;

type Check = Result<(), String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn random_table(rng: &mut ChaCha8Rng, words: usize, dim: usize) -> EmbeddingTable {
    let mut t = EmbeddingTable::new(dim).unwrap();
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    t.insert("he", &row(rng)).unwrap();
    t.insert("she", &row(rng)).unwrap();
    for i in 0..words - 2 {
        t.insert(&format!("w{i:04}"), &row(rng)).unwrap();
    }
    t
}

fn all_ordered_pairs(t: &EmbeddingTable) -> Vec<(String, String)> {
    let w = t.words();
    let mut out = Vec::new();
    for x in w {
        for y in w {
            if x != y {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------

fn c1_score_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = random_table(&mut rng, 100, 16);
    let s = pair_score("he", "she", &t).map_err(|e| e.to_string())?;
    check!(s.abs() <= 1e-12, "score(he, she) = {s}");
    let words = t.words().to_vec();
    for _ in 0..1000 {
        let x = words.choose(&mut rng).unwrap();
        let y = words.choose(&mut rng).unwrap();
        if x == y {
            continue;
        }
        let s = pair_score(x, y, &t).map_err(|e| e.to_string())?;
        check!(s >= 0.0, "score({x}, {y}) = {s}");
    }
    Ok(())
}

fn c2_partition() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = random_table(&mut rng, 30, 6);
    let cands = all_ordered_pairs(&t);
    let all = PairConfig { tau: 2.0, ..PairConfig::default() };
    let got = extract_pairs(&t, &cands, &all, Execution::Sequential).map_err(|e| e.to_string())?;
    check!(got.rejections.is_empty(), "rejections: {:?}", got.rejections);
    check!(got.pairs.len() == cands.len(), "{} labels for {} candidates", got.pairs.len(), cands.len());
    let labelled: HashSet<(&str, &str)> = got.pairs.iter().map(|p| (p.x.as_str(), p.y.as_str())).collect();
    check!(labelled.len() == cands.len(), "a candidate was labelled twice");

    for p in &got.pairs {
        let cfg = |tau1: f64| PairConfig { tau: 2.0, tau1, tau2: p.d_w / 2.0 };
        let label = |tau1: f64| classify_pair(&p.x, &p.y, &t, &cfg(tau1)).map(|r| r.2).map_err(|e| e.to_string());
        check!(label(p.d_h)? == PairLabel::GenderNeutral, "tau1 = d_h must stay neutral for {p:?}");
        check!(label(p.d_h.next_down())? == PairLabel::GenderNeutral, "below d_h must be neutral for {p:?}");
        check!(label(p.d_h.next_up())? == PairLabel::GenderSpecific, "above d_h must be specific for {p:?}");
    }
    Ok(())
}

/// Independent score: unit(he - she) against unit(x - y), computed here.
fn oracle_score(t: &EmbeddingTable, x: &str, y: &str) -> f64 {
    let unit = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.into_iter().map(|v| v / n).collect()
    };
    let g = unit(t.get("he").unwrap(), t.get("she").unwrap());
    let d = unit(t.get(x).unwrap(), t.get(y).unwrap());
    g.iter().zip(&d).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn c3_monotone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = random_table(&mut rng, 50, 3);
    let cands = all_ordered_pairs(&t);
    let mut previous: Option<BTreeSet<(String, String)>> = None;
    for tau in [0.1, 0.3, 0.5, 0.7] {
        let cfg = PairConfig { tau, ..PairConfig::default() };
        let got: BTreeSet<(String, String)> = extract_pairs(&t, &cands, &cfg, Execution::default())
            .map_err(|e| e.to_string())?
            .pairs
            .into_iter()
            .map(|p| (p.x, p.y))
            .collect();
        let oracle: BTreeSet<(String, String)> = cands
            .iter()
            .filter(|(x, y)| oracle_score(&t, x, y) <= tau)
            .cloned()
            .collect();
        check!(got == oracle, "tau={tau}: {} pairs vs oracle {}", got.len(), oracle.len());
        if let Some(prev) = &previous {
            check!(prev.is_subset(&got), "tau={tau}: result set shrank");
        }
        previous = Some(got);
    }
    check!(previous.is_some_and(|s| !s.is_empty()), "no pairs at tau 0.7; test is vacuous");
    Ok(())
}

fn c4_scale_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = random_table(&mut rng, 40, 5);
    let scaled = t.scaled(7.3);
    let cfg = PairConfig::default();
    let (a, b) = (
        GenderAxis::new(&t).map_err(|e| e.to_string())?,
        GenderAxis::new(&scaled).map_err(|e| e.to_string())?,
    );
    for (x, y) in all_ordered_pairs(&t) {
        let (s1, s2) = (a.score(&x, &y).unwrap(), b.score(&x, &y).unwrap());
        check!((s1 - s2).abs() <= 1e-9, "score({x},{y}) {s1} vs {s2}");
        let (h1, w1, l1) = a.classify(&x, &y, &cfg).unwrap();
        let (h2, w2, l2) = b.classify(&x, &y, &cfg).unwrap();
        check!((h1 - h2).abs() <= 1e-9 && (w1 - w2).abs() <= 1e-9, "distances of ({x},{y}) moved");
        check!(l1 == l2, "label of ({x},{y}) changed");
    }
    Ok(())
}

fn bfs(adj: &[Vec<usize>], s: usize) -> (Vec<Option<usize>>, Vec<f64>) {
    let mut dist = vec![None; adj.len()];
    let mut sigma = vec![0.0; adj.len()];
    dist[s] = Some(0);
    sigma[s] = 1.0;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dist[v].unwrap() + 1);
                q.push_back(w);
            }
            if dist[w] == Some(dist[v].unwrap() + 1) {
                sigma[w] += sigma[v];
            }
        }
    }
    (dist, sigma)
}

/// Sum over unordered pairs {s, t} of sigma_st(v) / sigma_st.
fn brute_force_betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let runs: Vec<_> = (0..n).map(|s| bfs(adj, s)).collect();
    let mut c = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let Some(d_st) = runs[s].0[t] else { continue };
            for v in (0..n).filter(|&v| v != s && v != t) {
                if let (Some(a), Some(b)) = (runs[s].0[v], runs[v].0[t]) {
                    if a + b == d_st {
                        c[v] += runs[s].1[v] * runs[v].1[t] / runs[s].1[t];
                    }
                }
            }
        }
    }
    c
}

fn c5_brandes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in 0..200 {
        let n = rng.gen_range(1..=10);
        let p: f64 = rng.gen_range(0.1..0.9);
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let want = brute_force_betweenness(&adj);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let got = betweenness(&adj, exec);
            for v in 0..n {
                check!((got[v] - want[v]).abs() <= 1e-9, "graph {g} node {v}: {} vs {}", got[v], want[v]);
            }
        }
    }
    Ok(())
}

fn c6_coreference() -> Check {
    let p = Pipeline::bundled().process("John went to market. He bought fruits.", &resources::census_sample());
    check!(p.coref.entities.len() == 1, "{} entities", p.coref.entities.len());
    let e = &p.coref.entities[0];
    check!(e.gender == GenderLabel::Male, "gender {}", e.gender);
    check!(e.mentions.len() == 2, "{} mentions", e.mentions.len());
    check!(p.coref.anonymous.is_empty(), "unresolved pronouns left");
    Ok(())
}

fn c7_planted_skew() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let args = ["analyze", "--corpus", "corpus.jsonl", "--census", "census.csv", "--out", "reports"];
    for dir in [a.path(), b.path()] {
        stage_fixture(dir);
        let o = run_in(dir, &args);
        check!(o.status.success(), "analyze failed: {}", stderr(&o));
    }

    let mut rows = csv::Reader::from_path(a.path().join("reports/mentions_by_book.csv")).map_err(|e| e.to_string())?;
    let headers = rows.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (male, female) = (col("male_total"), col("female_total"));
    let mut books = 0;
    for r in rows.records() {
        let r = r.map_err(|e| e.to_string())?;
        check!(&r[male] == "4" && &r[female] == "2", "book {} has {}:{}", &r[0], &r[male], &r[female]);
        books += 1;
    }
    check!(books == 50, "{books} books in report");

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("reports/summary.json")).unwrap()).map_err(|e| e.to_string())?;
    check!(summary["mentions"]["male_female_ratio"] == "2.000000", "ratio {}", summary["mentions"]["male_female_ratio"]);
    check!(summary["occupations"]["male_mean_level"] == "5.000000", "male level {}", summary["occupations"]["male_mean_level"]);
    check!(summary["occupations"]["female_mean_level"] == "2.000000", "female level {}", summary["occupations"]["female_mean_level"]);

    let first = read_dir_files(&a.path().join("reports"));
    let second = read_dir_files(&b.path().join("reports"));
    check!(first == second, "two runs differ");
    let golden = read_dir_files(&golden_dir());
    check!(first == golden, "reports differ from {}", golden_dir().display());

    let o = run_in(a.path(), &["analyze", "--corpus", "corpus.jsonl", "--census", "census.csv", "--out", "serial", "--jobs", "1"]);
    check!(o.status.success(), "analyze --jobs 1 failed: {}", stderr(&o));
    let csvs = |files: Vec<(String, Vec<u8>)>| files.into_iter().filter(|(n, _)| n.ends_with(".csv")).collect::<Vec<_>>();
    check!(
        csvs(read_dir_files(&a.path().join("serial"))) == csvs(first),
        "single-threaded reports differ"
    );
    Ok(())
}

fn c8_debias_round_trip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    fs::write(d.join("census.csv"), resources::CENSUS_SAMPLE).unwrap();
    fs::write(d.join("vectors.txt"), TOY_EMBEDDINGS).unwrap();
    fs::write(d.join("candidates.csv"), TOY_CANDIDATES).unwrap();
    let o = run_in(d, &["pairs", "--embeddings", "vectors.txt", "--candidates", "candidates.csv", "--kb", "kb.jsonl"]);
    check!(o.status.success(), "pairs failed: {}", stderr(&o));
    let kb = load_kb(d.join("kb.jsonl")).map_err(|e| e.to_string())?;
    let label = |x: &str| kb.pairs.iter().find(|p| p.x == x).map(|p| p.label);
    check!(label("doctor") == Some(PairLabel::GenderNeutral), "doctor/nurse label {:?}", label("doctor"));
    check!(label("king") == Some(PairLabel::GenderSpecific), "king/queen label {:?}", label("king"));

    let mut symmetric = kb.clone();
    let dn = kb.pairs.iter().find(|p| p.x == "doctor").unwrap();
    symmetric.pairs.push(AnalogicalPair { x: dn.y.clone(), y: dn.x.clone(), ..dn.clone() });
    save_kb(&symmetric, d.join("kb_sym.jsonl")).map_err(|e| e.to_string())?;

    let debias = |input: &str, kb: &str, out: &str| -> Result<String, String> {
        fs::write(d.join(format!("{out}.txt")), input).unwrap();
        let o = run_in(d, &["debias", "--input", &format!("{out}.txt"), "--kb", kb, "--census", "census.csv", "--out", out]);
        if !o.status.success() {
            return Err(stderr(&o));
        }
        fs::read_to_string(d.join(out).join("debiased.txt")).map_err(|e| e.to_string())
    };

    let original = "John is a doctor. Mary is a nurse.";
    let swapped = "John is a nurse. Mary is a doctor.";
    check!(debias(original, "kb.jsonl", "a")? == swapped, "doctor/nurse not swapped");
    let once = debias(original, "kb_sym.jsonl", "b")?;
    check!(once == swapped, "symmetric kb: {once:?}");
    let twice = debias(&once, "kb_sym.jsonl", "c")?;
    check!(twice == original, "second pass gave {twice:?}");
    for (i, text) in ["The king spoke to the queen.", "John is a king. Mary is a queen."].iter().enumerate() {
        let out = debias(text, "kb.jsonl", &format!("k{i}"))?;
        check!(out.as_bytes() == text.as_bytes(), "king/queen text changed: {out:?}");
    }
    check!(fs::read_to_string(d.join("a.txt")).unwrap() == original, "input was modified");
    Ok(())
}

fn c9_embedding_io() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut t = EmbeddingTable::new(8).unwrap();
    for i in 0..1000 {
        let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
        t.insert(&format!("word{i}"), &v).unwrap();
    }
    let mut buf = Vec::new();
    write_embeddings(&t, &mut buf).map_err(|e| e.to_string())?;
    let back = read_embeddings(buf.as_slice()).map_err(|e| e.to_string())?;
    check!(back.len() == 1000 && back.words() == t.words(), "vocabulary changed");
    for w in t.words() {
        for (a, b) in t.get(w).unwrap().iter().zip(back.get(w).unwrap()) {
            let rounded: f64 = format!("{a:.6}").parse().unwrap();
            check!(*b == rounded, "{w}: {a} loaded as {b}");
        }
    }
    let mut again = Vec::new();
    write_embeddings(&back, &mut again).map_err(|e| e.to_string())?;
    check!(again == buf, "save(load(save(t))) differs from save(t)");

    let cases: [(&str, usize); 6] = [
        ("2 x\na 1 2\nb 3 4\n", 1),
        ("3 2\na 1 2\nb 3 4\nc 5\n", 4),
        ("3 2\na 1 2\nb 3 oops\nc 5 6\n", 3),
        ("3 2\na 1 2\nb 3 4\na 5 6\n", 4),
        ("2 2\na 1 2\nb NaN 4\n", 3),
        ("3 2\na 1 2\n\nb 3 4\n", 4),
    ];
    for (text, line) in cases {
        match read_embeddings(text.as_bytes()) {
            Err(EmbeddingError::Format { line: got, .. }) => check!(got == line, "{text:?}: cited line {got}, want {line}"),
            other => return Err(format!("{text:?}: expected a line error, got {other:?}")),
        }
    }
    Ok(())
}

fn synthetic_fact_text(rng: &mut ChaCha8Rng, bytes: usize) -> String {
    const CLINIC: &[&str] = &["patient", "hospital", "ward", "medicine", "clinic", "treated", "examined", "wound", "fever", "bandage"];
    const FARM: &[&str] = &["field", "barn", "harvest", "tractor", "cattle", "ploughed", "planted", "crops", "soil", "wheat"];
    const FILLER: &[&str] = &["the", "a", "morning", "city", "walked", "said", "people", "evening", "quickly", "today", "road", "house", "old", "new", "went", "saw"];
    let mut text = String::with_capacity(bytes + 200);
    while text.len() < bytes {
        let (subject, topic): (&str, &[&str]) = match rng.gen_range(0..4) {
            0 => ("doctor", CLINIC),
            1 => ("nurse", CLINIC),
            2 => ("farmer", FARM),
            _ => ("shepherd", FARM),
        };
        text.push_str("the ");
        text.push_str(subject);
        for _ in 0..6 {
            text.push(' ');
            text.push_str(topic.choose(rng).unwrap());
        }
        for _ in 0..4 {
            text.push(' ');
            text.push_str(FILLER.choose(rng).unwrap());
        }
        text.push_str(". ");
    }
    text
}

fn c10_trainer() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let text = synthetic_fact_text(&mut rng, 1 << 20);
    check!(text.len() >= 1 << 20, "corpus is {} bytes", text.len());
    let words = fact_words(&text);
    let dict = Dictionary::from_words(words.iter().map(|w| w.to_lowercase()));
    let tokens = preprocess_facts(&words, &dict);
    let cfg = TrainConfig { seed: 42, ..TrainConfig::default() };
    let a = train_skipgram(&tokens, &cfg).map_err(|e| e.to_string())?;
    let b = train_skipgram(&tokens, &cfg).map_err(|e| e.to_string())?;
    check!(a.words() == b.words(), "vocabulary order differs");
    for w in a.words() {
        let same = a.get(w).unwrap().iter().zip(b.get(w).unwrap()).all(|(x, y)| x.to_bits() == y.to_bits());
        check!(same, "vector for {w} differs between runs");
    }
    let cos = |x: &str, y: &str| cosine(a.get(x).unwrap(), a.get(y).unwrap()).unwrap();
    let (dn, df) = (cos("doctor", "nurs"), cos("doctor", "farmer"));
    let (nd, nf) = (cos("nurs", "doctor"), cos("nurs", "farmer"));
    check!(dn > df && nd > nf, "cos(doctor,nurse)={dn:.4} cos(doctor,farmer)={df:.4} cos(nurse,farmer)={nf:.4}");
    Ok(())
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, name: "pair score identity and non-negativity", budget: secs(1), run: c1_score_identity },
        Criterion { id: 2, name: "label partition and tau1 boundary", budget: secs(5), run: c2_partition },
        Criterion { id: 3, name: "threshold monotonicity against brute force", budget: secs(5), run: c3_monotone },
        Criterion { id: 4, name: "scale invariance", budget: None, run: c4_scale_invariance },
        Criterion { id: 5, name: "Brandes against brute force", budget: secs(10), run: c5_brandes },
        Criterion { id: 6, name: "coreference worked example", budget: None, run: c6_coreference },
        Criterion { id: 7, name: "planted-skew reproduction and golden reports", budget: secs(30), run: c7_planted_skew },
        Criterion { id: 8, name: "debias round trip", budget: None, run: c8_debias_round_trip },
        Criterion { id: 9, name: "embedding I/O", budget: None, run: c9_embedding_io },
        Criterion { id: 10, name: "trainer determinism and context similarity", budget: secs(120), run: c10_trainer },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(()), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match result {
            Ok(()) => println!("criterion {:>2} PASS  {} ({elapsed:.2?})", c.id, c.name),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {} ({elapsed:.2?}): {e}", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
