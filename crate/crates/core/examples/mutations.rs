//! Shows how each deliberately broken rule surfaces as schema failures.
//!
//! cargo run --release --example mutations

use padel::axioms::{verify, SchemaId, SuiteConfig};
use padel::{parse_model, Mutation, Semantics, Universe, UniverseConfig};

const MODELS: [(&str, &str); 4] = [
    ("virus", include_str!("../models/virus.padel")),
    ("epistemic", include_str!("../models/epistemic.padel")),
    ("merge_exit", include_str!("../models/merge_exit.padel")),
    ("rumor", include_str!("../models/rumor.padel")),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in Mutation::ALL {
        println!("{m}:");
        for (name, text) in MODELS {
            let model = parse_model(text)?;
            let u = Universe::generate(&model, UniverseConfig::new(2).semantics(Semantics::mutated(m)))?;
            let failed: Vec<&str> = verify(&u, SchemaId::ALL, &SuiteConfig::default())?
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.schema.name())
                .collect();
            if !failed.is_empty() {
                println!("  {name:<11} {}", failed.join(" "));
            }
        }
    }
    Ok(())
}
