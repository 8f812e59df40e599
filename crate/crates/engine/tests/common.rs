#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use mpead_core::{expand, parse, parse_file, FlatGraph};
use mpead_engine::kernel::Registry;
use mpead_engine::{compile, ExecutionPlan, RunConfig};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.mpead"))
}

pub fn flat(name: &str) -> FlatGraph {
    let d = parse_file(name, &fs::read_to_string(corpus_path(name)).unwrap()).unwrap();
    expand(&d).unwrap()
}

pub fn flat_src(src: &str) -> FlatGraph {
    expand(&parse(src).unwrap()).unwrap()
}

pub fn plan(name: &str, cfg: &RunConfig) -> ExecutionPlan {
    compile(&flat(name), cfg, &Registry::with_builtins()).unwrap()
}
