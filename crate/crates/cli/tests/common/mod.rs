#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use biaslens::resources;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biaslens"))
}

/// Runs the binary inside `dir` so relative paths (and therefore the
/// recorded run configuration) do not depend on where the tests live.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes the bundled fixture corpus and census as `corpus.jsonl` and `census.csv`.
pub fn stage_fixture(dir: &Path) {
    fs::write(dir.join("corpus.jsonl"), resources::FIXTURE_CORPUS).unwrap();
    fs::write(dir.join("census.csv"), resources::CENSUS_SAMPLE).unwrap();
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/analyze_fixture")
}

/// File name → bytes for every file in `dir`, sorted by name.
pub fn read_dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

/// Tiny embedding table: doctor/nurse align with he/she but sit far from
/// both poles; king/queen sit right on them.
pub const TOY_EMBEDDINGS: &str = "\
6 3
he 1 0 0
she 0 1 0
doctor 1 0 3
nurse 0 1 3
king 1 0 0.3
queen 0 1 0.3
";

pub const TOY_CANDIDATES: &str = "x,y\ndoctor,nurse\nking,queen\n";
