//! Parses a model, prints each initial state as a tree and the canonical text.
//!
//! cargo run --example parse_model -- models/epistemic.padel

use padel::state::forest_of;
use padel::{parse_model, serialize};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "models/epistemic.padel".into());
    let model = parse_model(&std::fs::read_to_string(&path)?)?;
    for (name, state) in &model.initial_states {
        println!("{name}:");
        print!("{}", forest_of(state).render(state));
    }
    for (name, phi) in &model.formulas {
        println!("formula {name}: {phi}");
    }
    println!("\ncanonical text:\n{}", serialize(&model));

    // errors carry positions
    let broken = "agents A;\ninit s0 { A = enter. ; }";
    if let Err(e) = parse_model(broken) {
        println!("error example: {e}");
    }
    Ok(())
}
