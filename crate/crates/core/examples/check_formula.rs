//! Evaluates formulas at histories and over whole universes.
//!
//! cargo run --example check_formula -- "[(enter@A, accept@C, E)] A < C"

use padel::{parse_formula, parse_model, Checker, Universe, UniverseConfig};

const VIRUS: &str = include_str!("../models/virus.padel");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = parse_model(VIRUS)?;
    let agents = model.agent_set();
    let u = Universe::generate(&model, UniverseConfig::new(2))?;
    let checker = Checker::new(&u);

    let mut formulas = vec![
        "<(enter@A, accept@C, E)> true => A < E & C < E".to_string(),
        "[(enter@A, accept@C, E)] A < C".to_string(),
        "A <+ C => K[C] (A <+ C)".to_string(),
        "A < E".to_string(),
    ];
    formulas.extend(std::env::args().skip(1));
    for text in &formulas {
        let phi = parse_formula(text, &agents)?;
        let at_start = checker.satisfies(u.resolve("s0")?, &phi)?;
        let verdict = checker.valid_in_universe(&phi)?;
        print!("{text}\n  at s0: {at_start}; ");
        match verdict.counterexample {
            None => println!("valid in all {} histories", verdict.checked),
            Some(h) => println!("fails at {}", u.path(h)),
        }
    }

    // strict mode refuses boxes that would need a longer history
    let shallow = Universe::generate(&model, UniverseConfig::new(0))?;
    let phi = parse_formula("[(enter@A, accept@C, E)] A < C", &agents)?;
    match Checker::strict(&shallow).satisfies(0, &phi) {
        Ok(v) => println!("depth 0 strict: {v}"),
        Err(e) => println!("depth 0 strict: {e}"),
    }
    Ok(())
}
