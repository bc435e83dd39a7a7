//! States: total assignments of processes to agents satisfying the
//! uniqueness and acyclicity constraint, with the subagent relations they
//! induce.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{is_top_level_agent, occurs, AgentId, Process};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("agent {0} occurs in the processes of both {1} and {2}")]
    SharedOccurrence(AgentId, AgentId, AgentId),
    #[error("agent {agent} occurs transitively in its own process (via {})", fmt_chain(.chain))]
    SelfOccurrence { agent: AgentId, chain: Vec<AgentId> },
    #[error("no process assigned to {}", fmt_chain(.0))]
    PartialAssignment(Vec<AgentId>),
    #[error("process mentions undeclared agent {0}")]
    UnknownAgent(AgentId),
}

fn fmt_chain(chain: &[AgentId]) -> String {
    chain.iter().map(AgentId::to_string).collect::<Vec<_>>().join(" -> ")
}

/// Precomputed subagent relations.
#[derive(Debug, Default)]
struct Relations {
    /// One-step subagents, deduplicated.
    children: BTreeMap<AgentId, BTreeSet<AgentId>>,
    /// Strict transitive subagents.
    below: BTreeMap<AgentId, BTreeSet<AgentId>>,
}

impl Relations {
    fn compute(assignment: &BTreeMap<AgentId, Process>) -> Self {
        let children: BTreeMap<AgentId, BTreeSet<AgentId>> = assignment
            .iter()
            .map(|(a, p)| (a.clone(), p.top_level_agents().cloned().collect()))
            .collect();
        let below = children
            .keys()
            .map(|a| {
                let mut seen = BTreeSet::new();
                let mut queue: VecDeque<&AgentId> = children[a].iter().collect();
                while let Some(x) = queue.pop_front() {
                    if seen.insert(x.clone()) {
                        if let Some(next) = children.get(x) {
                            queue.extend(next.iter());
                        }
                    }
                }
                (a.clone(), seen)
            })
            .collect();
        Relations { children, below }
    }
}

/// A total assignment of processes to the model's agents.
///
/// Equality and hashing consider the assignment only.
#[derive(Clone)]
pub struct State {
    assignment: BTreeMap<AgentId, Process>,
    relations: Arc<Relations>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.assignment == other.assignment
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.assignment.hash(state);
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.assignment.cmp(&other.assignment)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, p)) in self.assignment.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, " {a} = {p}")?;
        }
        f.write_str(" }")
    }
}

/// `a ⊑⁺ p`: a chain of occurrences from `a` to `p`, where stepping through
/// an agent reference `B` continues into `s(B)`.
pub fn occurs_trans(a: &AgentId, p: &Process, s: &BTreeMap<AgentId, Process>) -> bool {
    occurrence_chain(a, p, s).is_some()
}

/// Witness for [`occurs_trans`]: the agents passed through, outermost first.
fn occurrence_chain(a: &AgentId, p: &Process, s: &BTreeMap<AgentId, Process>) -> Option<Vec<AgentId>> {
    if occurs(a, p) {
        return Some(vec![]);
    }
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<(AgentId, Vec<AgentId>)> =
        p.agents_anywhere().into_iter().map(|b| (b.clone(), vec![b])).collect();
    while let Some((b, path)) = queue.pop_front() {
        if !seen.insert(b.clone()) {
            continue;
        }
        let Some(q) = s.get(&b) else { continue };
        if occurs(a, q) {
            return Some(path);
        }
        for c in q.agents_anywhere() {
            let mut next = path.clone();
            next.push(c.clone());
            queue.push_back((c, next));
        }
    }
    None
}

/// Checks constraint (1) and totality over `agents`.
pub fn validate_state(
    agents: &BTreeSet<AgentId>,
    assignment: BTreeMap<AgentId, Process>,
) -> Result<State, StateError> {
    let missing: Vec<AgentId> = agents
        .iter()
        .filter(|a| !assignment.contains_key(*a))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(StateError::PartialAssignment(missing));
    }
    if let Some(extra) = assignment.keys().find(|a| !agents.contains(*a)) {
        return Err(StateError::UnknownAgent(extra.clone()));
    }
    let mut owner: BTreeMap<AgentId, AgentId> = BTreeMap::new();
    for (a, p) in &assignment {
        for c in p.agents_anywhere() {
            if !agents.contains(&c) {
                return Err(StateError::UnknownAgent(c));
            }
            if let Some(prev) = owner.get(&c) {
                return Err(StateError::SharedOccurrence(c, prev.clone(), a.clone()));
            }
            owner.insert(c, a.clone());
        }
    }
    for (a, p) in &assignment {
        if let Some(path) = occurrence_chain(a, p, &assignment) {
            let mut chain = vec![a.clone()];
            chain.extend(path);
            chain.push(a.clone());
            return Err(StateError::SelfOccurrence { agent: a.clone(), chain });
        }
    }
    Ok(State::unchecked(assignment))
}

impl State {
    /// Wraps an assignment without checking constraint (1). Used for
    /// deliberately broken rule variants; everything else should go through
    /// [`validate_state`].
    pub fn unchecked(assignment: BTreeMap<AgentId, Process>) -> State {
        let relations = Arc::new(Relations::compute(&assignment));
        State { assignment, relations }
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.assignment.keys()
    }

    pub fn agent_set(&self) -> BTreeSet<AgentId> {
        self.assignment.keys().cloned().collect()
    }

    pub fn assignment(&self) -> &BTreeMap<AgentId, Process> {
        &self.assignment
    }

    /// `s(a)`. Panics if `a` is not one of the state's agents.
    pub fn get(&self, a: &AgentId) -> &Process {
        self.assignment
            .get(a)
            .unwrap_or_else(|| panic!("agent {a} is not assigned in this state"))
    }

    pub fn try_get(&self, a: &AgentId) -> Option<&Process> {
        self.assignment.get(a)
    }

    /// Copy of the state with some assignments replaced.
    pub fn with_updates(&self, updates: impl IntoIterator<Item = (AgentId, Process)>) -> BTreeMap<AgentId, Process> {
        let mut next = self.assignment.clone();
        for (a, p) in updates {
            next.insert(a, p);
        }
        next
    }

    /// `a <ₛ b`
    pub fn subagent_one_step(&self, a: &AgentId, b: &AgentId) -> bool {
        self.assignment.get(b).is_some_and(|p| is_top_level_agent(a, p))
    }

    /// `a <ₛ⁺ b`
    pub fn subagent_iter(&self, a: &AgentId, b: &AgentId) -> bool {
        self.relations.below.get(b).is_some_and(|s| s.contains(a))
    }

    /// `a ≤ₛ⁺ b`
    pub fn subagent_refl(&self, a: &AgentId, b: &AgentId) -> bool {
        a == b || self.subagent_iter(a, b)
    }

    /// One-step subagents of `a`.
    pub fn children(&self, a: &AgentId) -> impl Iterator<Item = &AgentId> {
        self.relations.children.get(a).into_iter().flatten()
    }

    /// Strict transitive subagents of `a`.
    pub fn strict_subagents(&self, a: &AgentId) -> impl Iterator<Item = &AgentId> {
        self.relations.below.get(a).into_iter().flatten()
    }

    /// The one-step superagent of `a`, if any. On a valid state it is unique.
    pub fn parent(&self, a: &AgentId) -> Option<&AgentId> {
        self.relations
            .children
            .iter()
            .find(|(_, kids)| kids.contains(a))
            .map(|(p, _)| p)
    }

    /// Assignments of `observer` and everything below it. Two states are
    /// indistinguishable for `observer` exactly when these views coincide.
    pub fn view(&self, observer: &AgentId, reflexive: bool) -> BTreeMap<AgentId, Process> {
        let own = reflexive.then_some(observer);
        own.into_iter()
            .chain(self.strict_subagents(observer))
            .map(|x| (x.clone(), self.get(x).clone()))
            .collect()
    }
}

/// `s ~_A t`: every agent `X ≤ₛ⁺ A` has the same process in both states.
pub fn state_equiv(observer: &AgentId, s: &State, t: &State) -> bool {
    state_equiv_with(observer, s, t, true)
}

/// [`state_equiv`] with the subtree taken reflexively or strictly.
pub fn state_equiv_with(observer: &AgentId, s: &State, t: &State, reflexive: bool) -> bool {
    let own = reflexive.then_some(observer);
    own.into_iter()
        .chain(s.strict_subagents(observer))
        .all(|x| t.try_get(x) == Some(s.get(x)))
}

/// Indistinguishability for every member of a group.
pub fn state_equiv_group<'a>(observers: impl IntoIterator<Item = &'a AgentId>, s: &State, t: &State) -> bool {
    observers.into_iter().all(|a| state_equiv(a, s, t))
}

/// The agent tree of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentForest {
    pub parent: BTreeMap<AgentId, AgentId>,
    pub roots: BTreeSet<AgentId>,
}

pub fn forest_of(s: &State) -> AgentForest {
    let mut parent = BTreeMap::new();
    for (p, kids) in &s.relations.children {
        for k in kids {
            parent.insert(k.clone(), p.clone());
        }
    }
    let roots = s.agents().filter(|a| !parent.contains_key(*a)).cloned().collect();
    AgentForest { parent, roots }
}

impl AgentForest {
    /// Children of each agent, in agent order.
    pub fn children(&self) -> BTreeMap<&AgentId, Vec<&AgentId>> {
        let mut out: BTreeMap<&AgentId, Vec<&AgentId>> = BTreeMap::new();
        for (c, p) in &self.parent {
            out.entry(p).or_default().push(c);
        }
        out
    }

    /// Indented tree rendering, one agent per line.
    pub fn render(&self, s: &State) -> String {
        let children = self.children();
        let mut out = String::new();
        fn walk(
            a: &AgentId,
            depth: usize,
            s: &State,
            children: &BTreeMap<&AgentId, Vec<&AgentId>>,
            out: &mut String,
        ) {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&format!("{a} = {}\n", s.get(a)));
            for c in children.get(a).into_iter().flatten() {
                walk(c, depth + 1, s, children, out);
            }
        }
        for r in &self.roots {
            walk(r, 0, s, &children, &mut out);
        }
        out
    }
}
