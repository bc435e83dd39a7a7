//! Graphviz output for states and universes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::histories::Universe;
use crate::state::{forest_of, State};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The agent forest of `s`: one node per agent, an edge `child -> parent`
/// labelled `<`, and the agent's process as tooltip.
pub fn state_dot(s: &State, name: &str) -> String {
    let mut out = format!("digraph \"{}\" {{\n  node [shape=box];\n", escape(name));
    for a in s.agents() {
        let _ = writeln!(
            out,
            "  \"{0}\" [label=\"{0}\", tooltip=\"{1}\"];",
            escape(a.as_str()),
            escape(&s.get(a).to_string())
        );
    }
    for (child, parent) in &forest_of(s).parent {
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"<\"];", escape(child.as_str()), escape(parent.as_str()));
    }
    out.push_str("}\n");
    out
}

/// Distinct states of the universe and the labelled transitions between them.
pub fn transitions_dot(u: &Universe) -> String {
    let mut out = String::from("digraph transitions {\n  node [shape=ellipse];\n");
    let initial: BTreeSet<usize> = u.slice(0).iter().map(|&h| u.state_id(h)).collect();
    for id in 0..u.states().len() {
        let shape = if initial.contains(&id) { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  s{id} [label=\"s{id}\"{shape}];");
    }
    let mut edges = BTreeSet::new();
    for h in u.ids() {
        if let (Some(p), Some(alpha)) = (u.parent(h), u.last_action(h)) {
            edges.insert((u.state_id(p), u.state_id(h), alpha.to_string()));
        }
    }
    for (from, to, label) in edges {
        let _ = writeln!(out, "  s{from} -> s{to} [label=\"{}\"];", escape(&label));
    }
    out.push_str("}\n");
    out
}

/// Writes `state_<id>.dot` for every distinct state and `transitions.dot`.
pub fn write_dot(u: &Universe, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = vec![];
    for (id, s) in u.states().iter().enumerate() {
        let path = dir.join(format!("state_{id}.dot"));
        std::fs::write(&path, state_dot(s, &format!("s{id}")))?;
        written.push(path);
    }
    let path = dir.join("transitions.dot");
    std::fs::write(&path, transitions_dot(u))?;
    written.push(path);
    Ok(written)
}
