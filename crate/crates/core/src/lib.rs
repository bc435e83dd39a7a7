//! PADEL: a logic of agents that move, merge and talk inside a tree of
//! processes, and know what they can observe of it.
//!
//! The crate is organised bottom-up:
//!
//! - [`syntax`]: processes, action labels and formulas
//! - [`parser`]: the text format for all of the above
//! - [`state`]: assignments of processes to agents and the subagent tree
//! - [`transitions`]: the four action types
//! - [`histories`]: bounded universes of runs and indistinguishability
//! - [`checker`]: truth of formulas at histories
//! - [`axioms`]: the axiom catalog, instantiated and checked over a universe

pub mod axioms;
pub mod checker;
pub mod cli;
pub mod dot;
pub mod histories;
pub mod parser;
pub mod semantics;
pub mod state;
pub mod syntax;
pub mod transitions;

pub use axioms::{verify, SchemaId, SchemaReport, SuiteConfig};
pub use checker::{CheckError, Checker, Truth, Verdict};
pub use histories::{History, HistoryId, Universe, UniverseConfig, UniverseError};
pub use parser::{parse_action, parse_formula, parse_model, parse_process, serialize, ModelFile, ParseError};
pub use semantics::{Mutation, Semantics};
pub use state::{state_equiv, validate_state, State, StateError};
pub use syntax::{ActionKind, ActionLabel, AgentId, Capability, Formula, Process};
pub use transitions::{apply, enabled_actions, executable, participates, TransitionError};
