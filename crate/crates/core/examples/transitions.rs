//! Walks the merge/exit model through an entry, an exit and a merge.
//!
//! cargo run --example transitions

use padel::state::forest_of;
use padel::{enabled_actions, parse_action, parse_model, participates, Semantics};

const MODEL: &str = include_str!("../models/merge_exit.padel");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = parse_model(MODEL)?;
    let agents = model.agent_set();
    let mut state = model.initial_states[0].1.clone();
    print!("{}", forest_of(&state).render(&state));
    for text in ["(enter@V, accept@C, W)", "(exit@C, expel@W, E)", "(merge+@M, merge-@W, E)"] {
        let alpha = parse_action(text, &agents)?;
        let enabled: Vec<String> = enabled_actions(&state).iter().map(ToString::to_string).collect();
        println!("\nenabled: {}", enabled.join(", "));
        let who: Vec<String> = agents.iter().filter(|b| participates(b, &state, &alpha)).map(ToString::to_string).collect();
        println!("{alpha}, participants {}", who.join(" "));
        let step = Semantics::standard().step(&state, &alpha)?;
        if let Some(amb) = &step.ambiguity {
            println!("  note: {} possible post-states", amb.post_states.len());
        }
        state = step.state;
        print!("{}", forest_of(&state).render(&state));
    }
    let stale = parse_action("(enter@V, accept@C, W)", &agents)?;
    println!("\nreplaying the entry: {}", padel::apply(&state, &stale).unwrap_err());
    Ok(())
}
