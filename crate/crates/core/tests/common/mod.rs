#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

use padel::{parse_model, ModelFile};

pub const MODELS: &[&str] = &["virus", "epistemic", "merge_exit", "rumor"];

pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(format!("{name}.padel"))
}

pub fn bundled(name: &str) -> ModelFile {
    let text = std::fs::read_to_string(model_path(name)).expect("bundled model");
    parse_model(&text).expect("bundled model parses")
}
