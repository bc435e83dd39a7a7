//! Individual and distributed knowledge in the two-world model.
//!
//! cargo run --example knowledge

use padel::{parse_model, Checker, Universe, UniverseConfig};

const MODEL: &str = include_str!("../models/epistemic.padel");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = parse_model(MODEL)?;
    let u = Universe::generate(&model, UniverseConfig::new(2))?;
    for a in u.agents() {
        let classes = u.classes(a);
        let groups: Vec<String> = u
            .slice(0)
            .iter()
            .map(|&h| format!("{}:{}", u.path(h), classes[h]))
            .collect();
        println!("{a} classes at length 0: {}", groups.join(" "));
    }
    let checker = Checker::new(&u);
    for (name, phi) in &model.formulas {
        for &h in u.slice(0) {
            println!("{name:<8} {phi:<24} at {:<4} {}", u.path(h), checker.satisfies(h, phi)?);
        }
    }
    Ok(())
}
