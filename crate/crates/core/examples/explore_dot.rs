//! Generates a bounded universe and writes Graphviz files for it.
//!
//! cargo run --example explore_dot -- models/rumor.padel 3 /tmp/rumor-dot

use std::path::PathBuf;

use padel::dot::write_dot;
use padel::{parse_model, Universe, UniverseConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).map_or("models/rumor.padel", String::as_str);
    let depth = args.get(2).map_or(Ok(3), |d| d.parse())?;
    let out = args.get(3).map_or_else(|| std::env::temp_dir().join("padel-dot"), PathBuf::from);

    let model = parse_model(&std::fs::read_to_string(path)?)?;
    let u = Universe::generate(&model, UniverseConfig::new(depth))?;
    println!("{} histories, per length {:?}", u.len(), u.counts_per_length());
    for h in u.ids() {
        let action = u.last_action(h).map(|a| a.to_string()).unwrap_or_default();
        println!("  {:<10} {action}", u.path(h));
    }
    for file in write_dot(&u, &out)? {
        println!("wrote {}", file.display());
    }
    println!("render with: dot -Tsvg {}/transitions.dot", out.display());
    Ok(())
}
