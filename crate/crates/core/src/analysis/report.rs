//! Plot-ready report files.
//!
//! | file | columns |
//! |------|---------|
//! | `author_gender.csv` | year, male, female, unknown |
//! | `mentions_by_book.csv` | id, year, male_name, male_pronoun, female_name, female_pronoun, unknown, male_total, female_total |
//! | `mentions_by_year.csv` | year, books, mean_male_name, mean_male_pronoun, mean_female_name, mean_female_pronoun, mean_unknown |
//! | `adjectives.csv`, `verbs.csv` | gender, rank, term, count |
//! | `occupations.csv` | gender, rank, term, level, count |
//! | `central_characters.csv` | id, year, name, gender, mentions, centrality |
//! | `summary.json` | version, run configuration and headline numbers |
//!
//! Term tables hold the top K terms per gender (male rows first), ranked by
//! count then term. Reals are written with six decimals.

use std::fs;
use std::io;
use std::path::Path;

use serde_json::{json, Value};

use super::{CorpusAnalysis, GenderProfiles};
use crate::corpus::{GenderLabel, OccupationLexicon};

pub const DEFAULT_TOP_K: usize = 20;

pub const REPORT_FILES: &[&str] = &[
    "author_gender.csv",
    "mentions_by_book.csv",
    "mentions_by_year.csv",
    "adjectives.csv",
    "verbs.csv",
    "occupations.csv",
    "central_characters.csv",
    "summary.json",
];

/// Run metadata written into `summary.json`.
#[derive(Debug, Clone)]
pub struct ReportContext {
    pub run_config: Value,
    pub top_k: usize,
}

fn real(v: f64) -> String {
    format!("{v:.6}")
}

fn opt_real(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| Value::String(real(x)))
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
}

const GENDERS: [GenderLabel; 2] = [GenderLabel::Male, GenderLabel::Female];

fn term_rows(p: &GenderProfiles, k: usize) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for g in GENDERS {
        for (rank, (term, n)) in p.top(g, k).into_iter().enumerate() {
            rows.push(vec![g.to_string(), (rank + 1).to_string(), term.into(), n.to_string()]);
        }
    }
    rows
}

pub fn emit_reports(
    analysis: &CorpusAnalysis,
    lexicon: &OccupationLexicon,
    ctx: &ReportContext,
    dir: impl AsRef<Path>,
) -> io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    write_csv(
        &dir.join("author_gender.csv"),
        &["year", "male", "female", "unknown"],
        analysis
            .authors
            .iter()
            .map(|(y, c)| {
                vec![y.to_string(), c.male.to_string(), c.female.to_string(), c.unknown.to_string()]
            })
            .collect(),
    )?;

    write_csv(
        &dir.join("mentions_by_book.csv"),
        &[
            "id",
            "year",
            "male_name",
            "male_pronoun",
            "female_name",
            "female_pronoun",
            "unknown",
            "male_total",
            "female_total",
        ],
        analysis
            .books
            .iter()
            .map(|b| {
                let m = &b.mentions;
                vec![
                    b.id.clone(),
                    b.year.to_string(),
                    m.male_name.to_string(),
                    m.male_pronoun.to_string(),
                    m.female_name.to_string(),
                    m.female_pronoun.to_string(),
                    m.unknown.to_string(),
                    m.male().to_string(),
                    m.female().to_string(),
                ]
            })
            .collect(),
    )?;

    write_csv(
        &dir.join("mentions_by_year.csv"),
        &[
            "year",
            "books",
            "mean_male_name",
            "mean_male_pronoun",
            "mean_female_name",
            "mean_female_pronoun",
            "mean_unknown",
        ],
        analysis
            .mentions_by_year()
            .into_iter()
            .map(|(y, (n, means))| {
                let mut row = vec![y.to_string(), n.to_string()];
                row.extend(means.iter().map(|&v| real(v)));
                row
            })
            .collect(),
    )?;

    let header = ["gender", "rank", "term", "count"];
    write_csv(&dir.join("adjectives.csv"), &header, term_rows(&analysis.adjectives, ctx.top_k))?;
    write_csv(&dir.join("verbs.csv"), &header, term_rows(&analysis.verbs, ctx.top_k))?;

    let mut occ_rows = Vec::new();
    for g in GENDERS {
        for (rank, (term, n)) in analysis.occupations.counts.top(g, ctx.top_k).into_iter().enumerate() {
            let level = lexicon.level(term).map_or(String::new(), |l| l.to_string());
            occ_rows.push(vec![
                g.to_string(),
                (rank + 1).to_string(),
                term.to_string(),
                level,
                n.to_string(),
            ]);
        }
    }
    write_csv(
        &dir.join("occupations.csv"),
        &["gender", "rank", "term", "level", "count"],
        occ_rows,
    )?;

    write_csv(
        &dir.join("central_characters.csv"),
        &["id", "year", "name", "gender", "mentions", "centrality"],
        analysis
            .books
            .iter()
            .filter_map(|b| {
                b.central.as_ref().map(|c| {
                    vec![
                        b.id.clone(),
                        b.year.to_string(),
                        c.name.clone(),
                        c.gender.to_string(),
                        c.mentions.to_string(),
                        real(c.centrality),
                    ]
                })
            })
            .collect(),
    )?;

    let central = |g: GenderLabel| {
        analysis
            .books
            .iter()
            .filter(|b| b.central.as_ref().is_some_and(|c| c.gender == g))
            .count()
    };
    let m = &analysis.mentions;
    let occ = &analysis.occupations;
    let summary = json!({
        "version": crate::VERSION,
        "run_config": ctx.run_config,
        "books": analysis.books.len(),
        "mentions": {
            "male_name": m.male_name,
            "male_pronoun": m.male_pronoun,
            "female_name": m.female_name,
            "female_pronoun": m.female_pronoun,
            "unknown": m.unknown,
            "male_total": m.male(),
            "female_total": m.female(),
            "male_female_ratio": opt_real(m.ratio()),
        },
        "occupations": {
            "lexicon": lexicon.source,
            "male_count": occ.count(GenderLabel::Male),
            "female_count": occ.count(GenderLabel::Female),
            "male_mean_level": opt_real(occ.mean_level(GenderLabel::Male)),
            "female_mean_level": opt_real(occ.mean_level(GenderLabel::Female)),
        },
        "central_characters": {
            "male": central(GenderLabel::Male),
            "female": central(GenderLabel::Female),
            "unknown": central(GenderLabel::Unknown),
        },
        "top_k": ctx.top_k,
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)
}
