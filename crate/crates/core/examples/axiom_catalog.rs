//! Runs the full axiom catalog on a model file.
//!
//! cargo run --example axiom_catalog -- models/virus.padel 2 [mutation]

use padel::axioms::{verify, SchemaId, SuiteConfig};
use padel::{parse_model, Semantics, Universe, UniverseConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).map_or("models/virus.padel", String::as_str);
    let depth = args.get(2).map_or(Ok(2), |d| d.parse())?;
    let semantics = match args.get(3) {
        Some(m) => Semantics::mutated(m.parse()?),
        None => Semantics::standard(),
    };
    let model = parse_model(&std::fs::read_to_string(path)?)?;
    let universe = Universe::generate(&model, UniverseConfig::new(depth).semantics(semantics))?;
    println!("{path}: depth {depth}, histories per length {:?}", universe.counts_per_length());
    for report in verify(&universe, SchemaId::ALL, &SuiteConfig::default())? {
        let verdict = if report.passed() { "PASS" } else { "FAIL" };
        println!(
            "{:<22} {verdict} instances={:<6} checks={:<7} failures={} ({:.2?})",
            report.schema.name(),
            report.instances,
            report.checks,
            report.failure_count,
            report.elapsed
        );
        if let Some(f) = report.failures.first() {
            println!("    at {}: {}", f.path, f.formula);
        }
    }
    Ok(())
}
