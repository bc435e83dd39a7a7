//! The four action-pair transition rules.
//!
//! | kind | first executor | second executor | mediator after the step          |
//! |------|----------------|-----------------|----------------------------------|
//! | I    | `recv(φ)`      | `send(φ)`       | none                             |
//! | II   | `enter`        | `accept`        | `E = C ∣ Γ` (A moved into C)     |
//! | III  | `exit`         | `expel`         | `E = C ∣ A ∣ Γ` (A moved out of C) |
//! | IV   | `merge+`       | `merge-`        | `E = A ∣ Γ` (C absorbed by A)    |
//!
//! Firing `a.P` out of a choice discards the other alternatives.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::semantics::{Mutation, Semantics};
use crate::state::{validate_state, State, StateError};
use crate::syntax::{is_top_level_agent, ActionKind, ActionLabel, AgentId, Component, Prefixed, Process};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("action {0} is not executable")]
    NotExecutable(ActionLabel),
    #[error("action {action} produced an invalid state: {error}")]
    InvalidPostState { action: ActionLabel, error: StateError },
}

/// How one executor's process matches `Σᵢ aᵢ.Pᵢ + a.P ∣ Q`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Selection {
    /// The whole choice component the capability was taken from.
    pub sum: Vec<Prefixed>,
    /// The alternative that fires.
    pub chosen: Prefixed,
    /// Everything else in parallel (for the expelling agent of kind III, the
    /// exiting agent is removed from it as well).
    pub rest: Process,
}

/// A decomposition witness for one action at one state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Redex {
    pub a: Selection,
    pub c: Selection,
    /// Mediator remainder `Γ` for kinds II to IV.
    pub gamma: Option<Process>,
}

impl Redex {
    /// Rebuilds the pre-state assignments of the named agents.
    pub fn reconstruct(&self, alpha: &ActionLabel) -> Vec<(AgentId, Process)> {
        let a = alpha.executor_a().clone();
        let c = alpha.executor_c().clone();
        let sum_a = Process::from_components([Component::Sum(self.a.sum.clone())]);
        let sum_c = Process::from_components([Component::Sum(self.c.sum.clone())]);
        let mut out = vec![(a.clone(), sum_a.par(&self.a.rest))];
        let mut pc = sum_c.par(&self.c.rest);
        if alpha.kind() == ActionKind::III {
            pc = pc.par(&Process::agent(a.clone()));
        }
        out.push((c.clone(), pc));
        if let (Some(e), Some(gamma)) = (alpha.mediator(), &self.gamma) {
            let pe = match alpha.kind() {
                ActionKind::III => Process::agent(c).par(gamma),
                _ => Process::par_all([&Process::agent(a), &Process::agent(c), gamma]),
            };
            out.push((e.clone(), pe));
        }
        out
    }
}

/// Ways an agent's process can offer `cap`, deduplicated and ordered.
fn selections(p: &Process, cap: &crate::syntax::Capability) -> Vec<Selection> {
    let mut out = BTreeSet::new();
    for (i, comp) in p.components().iter().enumerate() {
        if let Component::Sum(alts) = comp {
            for alt in alts.iter().filter(|alt| &alt.cap == cap) {
                out.insert(Selection {
                    sum: alts.clone(),
                    chosen: alt.clone(),
                    rest: p.without(i),
                });
            }
        }
    }
    out.into_iter().collect()
}

/// All decompositions of `s` matching the premises of `alpha`, in canonical
/// order. Empty when `alpha` is not executable.
pub fn find_redexes(s: &State, alpha: &ActionLabel) -> Vec<Redex> {
    let a = alpha.executor_a();
    let c = alpha.executor_c();
    let (Some(pa), Some(pc)) = (s.try_get(a), s.try_get(c)) else {
        return vec![];
    };
    let gamma = match (alpha.kind(), alpha.mediator()) {
        (ActionKind::I, _) => None,
        (_, None) => return vec![],
        (kind, Some(e)) => {
            let Some(pe) = s.try_get(e) else { return vec![] };
            let g = match kind {
                ActionKind::II | ActionKind::IV => pe.without_agent(a).and_then(|r| r.without_agent(c)),
                _ => pe.without_agent(c),
            };
            match g {
                Some(g) => Some(g),
                None => return vec![],
            }
        }
    };
    // kind III needs `s(C) = Σ + expel.R ∣ A ∣ S`
    let pc = if alpha.kind() == ActionKind::III {
        match pc.without_agent(a) {
            Some(rest) => rest,
            None => return vec![],
        }
    } else {
        pc.clone()
    };
    let sel_a = selections(pa, alpha.cap_a());
    let sel_c = selections(&pc, alpha.cap_c());
    let mut out = Vec::with_capacity(sel_a.len() * sel_c.len());
    for sa in &sel_a {
        for sc in &sel_c {
            out.push(Redex {
                a: sa.clone(),
                c: sc.clone(),
                gamma: gamma.clone(),
            });
        }
    }
    out
}

pub fn executable(s: &State, alpha: &ActionLabel) -> bool {
    !find_redexes(s, alpha).is_empty()
}

/// Diagnostic attached when decompositions disagree on the next state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguousRedex {
    pub action: ActionLabel,
    /// Every distinct post-state, the applied one first.
    pub post_states: Vec<State>,
}

/// Result of a single step.
#[derive(Clone, Debug)]
pub struct Step {
    pub state: State,
    pub ambiguity: Option<AmbiguousRedex>,
}

impl Semantics {
    fn post_assignment(&self, s: &State, alpha: &ActionLabel, r: &Redex) -> Vec<(AgentId, Process)> {
        let a = alpha.executor_a().clone();
        let c = alpha.executor_c().clone();
        let p = &r.a.chosen.cont;
        let q = &r.a.rest;
        let rr = &r.c.chosen.cont;
        let ss = &r.c.rest;
        match alpha.kind() {
            ActionKind::I => {
                if self.is(Mutation::SkipSumConsumptionOnCommunicate) {
                    let keep_a = Process::from_components([Component::Sum(r.a.sum.clone())]);
                    let keep_c = Process::from_components([Component::Sum(r.c.sum.clone())]);
                    vec![
                        (a, Process::par_all([&keep_a, p, q])),
                        (c, Process::par_all([&keep_c, rr, ss])),
                    ]
                } else {
                    vec![(a, p.par(q)), (c, rr.par(ss))]
                }
            }
            ActionKind::II => {
                let e = alpha.mediator().expect("mediated").clone();
                let gamma = r.gamma.as_ref().expect("mediated");
                let new_e = if self.is(Mutation::DropMediatorUpdateOnEnter) {
                    s.get(&e).clone()
                } else {
                    Process::agent(c.clone()).par(gamma)
                };
                vec![
                    (a.clone(), p.par(q)),
                    (c, Process::par_all([&Process::agent(a), rr, ss])),
                    (e, new_e),
                ]
            }
            ActionKind::III => {
                let e = alpha.mediator().expect("mediated").clone();
                let gamma = r.gamma.as_ref().expect("mediated");
                vec![
                    (a.clone(), p.par(q)),
                    (c.clone(), rr.par(ss)),
                    (e, Process::par_all([&Process::agent(c), &Process::agent(a), gamma])),
                ]
            }
            ActionKind::IV => {
                let e = alpha.mediator().expect("mediated").clone();
                let gamma = r.gamma.as_ref().expect("mediated");
                let mut new_e = Process::agent(a.clone()).par(gamma);
                if self.is(Mutation::KeepMergedInMediator) {
                    new_e = new_e.par(&Process::agent(c.clone()));
                }
                vec![(a, Process::par_all([p, q, rr, ss])), (c, Process::zero()), (e, new_e)]
            }
        }
    }

    fn build(&self, s: &State, alpha: &ActionLabel, r: &Redex) -> Result<State, TransitionError> {
        let next = s.with_updates(self.post_assignment(s, alpha, r));
        if self.mutation.is_some() {
            return Ok(State::unchecked(next));
        }
        validate_state(&s.agent_set(), next).map_err(|error| TransitionError::InvalidPostState {
            action: alpha.clone(),
            error,
        })
    }

    /// Applies the canonically least redex, reporting ambiguity.
    pub fn step(&self, s: &State, alpha: &ActionLabel) -> Result<Step, TransitionError> {
        let redexes = find_redexes(s, alpha);
        let Some(first) = redexes.first() else {
            return Err(TransitionError::NotExecutable(alpha.clone()));
        };
        let state = self.build(s, alpha, first)?;
        let mut post_states = vec![state.clone()];
        for r in &redexes[1..] {
            let t = self.build(s, alpha, r)?;
            if !post_states.contains(&t) {
                post_states.push(t);
            }
        }
        let ambiguity = (post_states.len() > 1).then(|| AmbiguousRedex {
            action: alpha.clone(),
            post_states,
        });
        Ok(Step { state, ambiguity })
    }

    pub fn apply(&self, s: &State, alpha: &ActionLabel) -> Result<State, TransitionError> {
        self.step(s, alpha).map(|st| st.state)
    }

    /// `B :ₛ α`: α is executable and an executor is `≤⁺` below `b`.
    pub fn participates(&self, b: &AgentId, s: &State, alpha: &ActionLabel) -> bool {
        let below = |x: &AgentId| {
            if self.reflexive_subtree() {
                s.subagent_refl(x, b)
            } else {
                s.subagent_iter(x, b)
            }
        };
        (below(alpha.executor_a()) || below(alpha.executor_c())) && executable(s, alpha)
    }
}

pub fn apply(s: &State, alpha: &ActionLabel) -> Result<State, TransitionError> {
    Semantics::standard().apply(s, alpha)
}

pub fn participates(b: &AgentId, s: &State, alpha: &ActionLabel) -> bool {
    Semantics::standard().participates(b, s, alpha)
}

/// Every executable label at `s`, ordered by kind and then by text.
pub fn enabled_actions(s: &State) -> Vec<ActionLabel> {
    let agents: Vec<&AgentId> = s.agents().collect();
    let mut found = BTreeSet::new();
    for a in &agents {
        for comp in s.get(a).components() {
            let Component::Sum(alts) = comp else { continue };
            for alt in alts {
                let Some(kind) = ActionKind::ALL.into_iter().find(|k| k.capabilities().0 == alt.cap.kind()) else {
                    continue;
                };
                for c in agents.iter().filter(|c| *c != a) {
                    for dual in dual_caps(s.get(c), &alt.cap, kind) {
                        for e in mediators(s, a, c, kind) {
                            if let Ok(label) = ActionLabel::new(alt.cap.clone(), (*a).clone(), dual.clone(), (*c).clone(), e) {
                                found.insert(label);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out: Vec<ActionLabel> = found.into_iter().filter(|l| executable(s, l)).collect();
    out.sort_by_cached_key(|l| (l.kind(), l.to_string()));
    out
}

fn dual_caps<'a>(p: &'a Process, cap: &'a crate::syntax::Capability, kind: ActionKind) -> impl Iterator<Item = &'a crate::syntax::Capability> {
    let want = kind.capabilities().1;
    p.components()
        .iter()
        .filter_map(|c| match c {
            Component::Sum(alts) => Some(alts),
            _ => None,
        })
        .flatten()
        .map(|alt| &alt.cap)
        .filter(move |d| d.kind() == want && d.payload() == cap.payload())
}

/// Candidate mediators: derived from the tree, never guessed.
fn mediators(s: &State, a: &AgentId, c: &AgentId, kind: ActionKind) -> Vec<Option<AgentId>> {
    let holds = |x: &AgentId, e: &AgentId| is_top_level_agent(x, s.get(e));
    match kind {
        ActionKind::I => vec![None],
        ActionKind::II | ActionKind::IV => s
            .agents()
            .filter(|e| holds(a, e) && holds(c, e))
            .map(|e| Some(e.clone()))
            .collect(),
        ActionKind::III => {
            if !holds(a, c) {
                return vec![];
            }
            s.agents().filter(|e| holds(c, e)).map(|e| Some(e.clone())).collect()
        }
    }
}
