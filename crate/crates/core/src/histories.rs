//! Histories and bounded history universes.
//!
//! A [`Universe`] holds every history of length `0..=depth` reachable from the
//! model's initial states, as a prefix tree. Indistinguishability for an
//! observer is an equivalence relation on each length slice, so it is stored
//! as one class id per history, computed lazily per observer.
//!
//! Two histories are indistinguishable for `X` when, index by index, the
//! states agree on everything `X` can see and the actions agree whenever `X`
//! took part in them. Participation is judged in each history's own state:
//! an action is visible to `X` exactly when one of its executors sits in
//! `X`'s subtree, and that subtree is the same on both sides.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::parser::ModelFile;
use crate::semantics::{Mutation, Semantics};
use crate::state::State;
use crate::syntax::{ActionLabel, AgentId, Process};
use crate::transitions::{enabled_actions, AmbiguousRedex, TransitionError};

pub const DEFAULT_DEPTH_CAP: usize = 6;
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Index of a history in a universe. Ids follow breadth-first order.
pub type HistoryId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("history budget of {budget} exceeded at length {length}")]
    BudgetExceeded { budget: usize, length: usize },
    #[error("depth {depth} exceeds the configured cap {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("model has no initial states")]
    NoInitialStates,
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty history path")]
    Empty,
    #[error("unknown initial state `{0}`")]
    UnknownInitial(String),
    #[error("`{0}` is not an action index")]
    BadIndex(String),
    #[error("action index {index} out of range at `{prefix}` ({available} enabled)")]
    OutOfRange { prefix: String, index: usize, available: usize },
    #[error("path `{0}` is longer than the universe depth")]
    TooDeep(String),
}

/// A concrete history: states `s₀..sₙ` and actions `α₀..αₙ₋₁`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct History {
    states: Vec<State>,
    actions: Vec<ActionLabel>,
}

impl History {
    pub fn initial(s: State) -> Self {
        History {
            states: vec![s],
            actions: vec![],
        }
    }

    /// `(h, α, t)` where `last(h) →α t`.
    pub fn extend(&self, alpha: &ActionLabel) -> Result<History, TransitionError> {
        self.extend_with(&Semantics::standard(), alpha)
    }

    pub fn extend_with(&self, sem: &Semantics, alpha: &ActionLabel) -> Result<History, TransitionError> {
        let t = sem.apply(self.last(), alpha)?;
        let mut h = self.clone();
        h.states.push(t);
        h.actions.push(alpha.clone());
        Ok(h)
    }

    /// `|h|`: the number of actions.
    pub fn size(&self) -> usize {
        self.actions.len()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("histories are nonempty")
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn actions(&self) -> &[ActionLabel] {
        &self.actions
    }

    pub fn prefix(&self, len: usize) -> History {
        History {
            states: self.states[..=len].to_vec(),
            actions: self.actions[..len].to_vec(),
        }
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.states[0])?;
        for (a, s) in self.actions.iter().zip(&self.states[1..]) {
            write!(f, " --{a}--> {s}")?;
        }
        Ok(())
    }
}

/// `α ~ₛ^X β` with participation judged at the single state `s`.
pub fn action_equiv(observer: &AgentId, s: &State, alpha: &ActionLabel, beta: &ActionLabel) -> bool {
    action_equiv_with(&Semantics::standard(), observer, s, alpha, beta)
}

pub fn action_equiv_with(sem: &Semantics, observer: &AgentId, s: &State, alpha: &ActionLabel, beta: &ActionLabel) -> bool {
    if sem.participates(observer, s, alpha) {
        alpha == beta
    } else {
        !sem.participates(observer, s, beta)
    }
}

/// Action equivalence between two histories at one index, each action judged
/// in the state it was taken from.
pub fn step_equiv(
    sem: &Semantics,
    observer: &AgentId,
    s: &State,
    alpha: &ActionLabel,
    t: &State,
    beta: &ActionLabel,
) -> bool {
    if sem.is(Mutation::IgnoreActionsInHistories) {
        return true;
    }
    match (sem.participates(observer, s, alpha), sem.participates(observer, t, beta)) {
        (true, true) => alpha == beta,
        (false, false) => true,
        _ => false,
    }
}

fn states_equiv(sem: &Semantics, observer: &AgentId, s: &State, t: &State) -> bool {
    s.view(observer, sem.reflexive_subtree()) == t.view(observer, sem.reflexive_subtree())
}

/// `h ~_X h′` by unfolding the definition index by index.
pub fn history_equiv_direct(sem: &Semantics, observer: &AgentId, h: &History, g: &History) -> bool {
    h.size() == g.size()
        && h.states.iter().zip(&g.states).all(|(s, t)| states_equiv(sem, observer, s, t))
        && (0..h.size()).all(|i| {
            step_equiv(sem, observer, &h.states[i], &h.actions[i], &g.states[i], &g.actions[i])
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniverseConfig {
    pub depth: usize,
    pub depth_cap: usize,
    pub budget: usize,
    pub semantics: Semantics,
}

impl UniverseConfig {
    pub fn new(depth: usize) -> Self {
        UniverseConfig {
            depth,
            depth_cap: DEFAULT_DEPTH_CAP,
            budget: DEFAULT_BUDGET,
            semantics: Semantics::standard(),
        }
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn semantics(mut self, semantics: Semantics) -> Self {
        self.semantics = semantics;
        self
    }
}

#[derive(Clone, Debug)]
struct Node {
    parent: Option<HistoryId>,
    /// Label id of the last action.
    action: Option<usize>,
    state: usize,
    len: usize,
    root: usize,
    /// Position among the parent's enabled actions.
    step: usize,
    children: Vec<HistoryId>,
}

/// A frozen, prefix-closed set of histories.
pub struct Universe {
    agents: Vec<AgentId>,
    initial_names: Vec<String>,
    depth: usize,
    semantics: Semantics,
    states: Vec<State>,
    labels: Vec<ActionLabel>,
    nodes: Vec<Node>,
    slices: Vec<Vec<HistoryId>>,
    ambiguities: Vec<(HistoryId, AmbiguousRedex)>,
    classes: Vec<OnceLock<Vec<usize>>>,
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Universe")
            .field("depth", &self.depth)
            .field("histories", &self.nodes.len())
            .field("states", &self.states.len())
            .finish()
    }
}

struct Interner<T: std::hash::Hash + Eq + Clone> {
    items: Vec<T>,
    ids: HashMap<T, usize>,
}

impl<T: std::hash::Hash + Eq + Clone> Interner<T> {
    fn new() -> Self {
        Interner {
            items: vec![],
            ids: HashMap::new(),
        }
    }

    fn intern(&mut self, x: &T) -> usize {
        if let Some(&id) = self.ids.get(x) {
            return id;
        }
        self.items.push(x.clone());
        self.ids.insert(x.clone(), self.items.len() - 1);
        self.items.len() - 1
    }
}

impl Universe {
    /// Breadth-first closure of the model's initial states up to `depth`.
    pub fn generate(model: &ModelFile, config: UniverseConfig) -> Result<Universe, UniverseError> {
        Self::from_states(model.agents.clone(), model.initial_states.clone(), config)
    }

    pub fn from_states(
        agents: Vec<AgentId>,
        initial: Vec<(String, State)>,
        config: UniverseConfig,
    ) -> Result<Universe, UniverseError> {
        if config.depth > config.depth_cap {
            return Err(UniverseError::DepthCap {
                depth: config.depth,
                cap: config.depth_cap,
            });
        }
        if initial.is_empty() {
            return Err(UniverseError::NoInitialStates);
        }
        let sem = config.semantics;
        let mut states = Interner::new();
        let mut labels = Interner::new();
        let mut nodes = Vec::new();
        let mut ambiguities = Vec::new();
        let mut enabled_cache: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut transitions: HashMap<(usize, usize), (usize, Option<AmbiguousRedex>)> = HashMap::new();
        let check_budget = |n: usize, length: usize| {
            if n > config.budget {
                Err(UniverseError::BudgetExceeded {
                    budget: config.budget,
                    length,
                })
            } else {
                Ok(())
            }
        };
        let mut slice = Vec::new();
        for (root, (_, s)) in initial.iter().enumerate() {
            let state = states.intern(s);
            nodes.push(Node {
                parent: None,
                action: None,
                state,
                len: 0,
                root,
                step: 0,
                children: vec![],
            });
            slice.push(nodes.len() - 1);
        }
        check_budget(nodes.len(), 0)?;
        let mut slices = vec![slice];
        for len in 1..=config.depth {
            let mut next = Vec::new();
            for &h in &slices[len - 1] {
                let sid = nodes[h].state;
                let enabled = enabled_cache
                    .entry(sid)
                    .or_insert_with(|| enabled_actions(&states.items[sid]).iter().map(|l| labels.intern(l)).collect())
                    .clone();
                for (step, lid) in enabled.into_iter().enumerate() {
                    let (tid, ambiguity) = match transitions.get(&(sid, lid)) {
                        Some(t) => t.clone(),
                        None => {
                            let st = sem.step(&states.items[sid], &labels.items[lid])?;
                            let t = (states.intern(&st.state), st.ambiguity);
                            transitions.insert((sid, lid), t.clone());
                            t
                        }
                    };
                    let id = nodes.len();
                    nodes.push(Node {
                        parent: Some(h),
                        action: Some(lid),
                        state: tid,
                        len,
                        root: nodes[h].root,
                        step,
                        children: vec![],
                    });
                    nodes[h].children.push(id);
                    if let Some(a) = ambiguity {
                        ambiguities.push((id, a));
                    }
                    next.push(id);
                    check_budget(nodes.len(), len)?;
                }
            }
            slices.push(next);
        }
        Ok(Universe {
            classes: (0..agents.len()).map(|_| OnceLock::new()).collect(),
            agents,
            initial_names: initial.into_iter().map(|(n, _)| n).collect(),
            depth: config.depth,
            semantics: sem,
            states: states.items,
            labels: labels.items,
            nodes,
            slices,
            ambiguities,
        })
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent_set(&self) -> BTreeSet<AgentId> {
        self.agents.iter().cloned().collect()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn semantics(&self) -> &Semantics {
        &self.semantics
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> std::ops::Range<HistoryId> {
        0..self.nodes.len()
    }

    /// Histories of length `n`.
    pub fn slice(&self, n: usize) -> &[HistoryId] {
        self.slices.get(n).map_or(&[], Vec::as_slice)
    }

    pub fn counts_per_length(&self) -> Vec<usize> {
        self.slices.iter().map(Vec::len).collect()
    }

    /// Distinct states occurring anywhere in the universe.
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state_id(&self, h: HistoryId) -> usize {
        self.nodes[h].state
    }

    /// Every action label that occurs in the universe.
    pub fn labels(&self) -> &[ActionLabel] {
        &self.labels
    }

    pub fn ambiguities(&self) -> &[(HistoryId, AmbiguousRedex)] {
        &self.ambiguities
    }

    pub fn size(&self, h: HistoryId) -> usize {
        self.nodes[h].len
    }

    pub fn last(&self, h: HistoryId) -> &State {
        &self.states[self.nodes[h].state]
    }

    pub fn parent(&self, h: HistoryId) -> Option<HistoryId> {
        self.nodes[h].parent
    }

    pub fn last_action(&self, h: HistoryId) -> Option<&ActionLabel> {
        self.nodes[h].action.map(|l| &self.labels[l])
    }

    /// Extensions in enabled-action order.
    pub fn children(&self, h: HistoryId) -> &[HistoryId] {
        &self.nodes[h].children
    }

    pub fn initial_name(&self, h: HistoryId) -> &str {
        &self.initial_names[self.nodes[h].root]
    }

    /// The in-universe `h′` with `h →α h′`, if any.
    pub fn successor(&self, h: HistoryId, alpha: &ActionLabel) -> Option<HistoryId> {
        self.nodes[h]
            .children
            .iter()
            .copied()
            .find(|&c| self.last_action(c) == Some(alpha))
    }

    /// Whether `h` can have extensions in the universe.
    pub fn at_max_depth(&self, h: HistoryId) -> bool {
        self.nodes[h].len >= self.depth
    }

    /// The history with id `h` as a concrete value.
    pub fn history(&self, h: HistoryId) -> History {
        let mut chain = vec![h];
        while let Some(p) = self.nodes[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        chain.reverse();
        History {
            states: chain.iter().map(|&i| self.last(i).clone()).collect(),
            actions: chain[1..].iter().map(|&i| self.last_action(i).unwrap().clone()).collect(),
        }
    }

    /// Finds `h` in the universe by value.
    pub fn find(&self, h: &History) -> Option<HistoryId> {
        let mut cur = *self
            .slice(0)
            .iter()
            .find(|&&r| self.last(r) == &h.states[0])?;
        for (alpha, s) in h.actions.iter().zip(&h.states[1..]) {
            cur = self.successor(cur, alpha)?;
            if self.last(cur) != s {
                return None;
            }
        }
        Some(cur)
    }

    /// `s0/0/1`: the initial state's name followed by enabled-action indices.
    pub fn path(&self, h: HistoryId) -> String {
        let mut steps = vec![];
        let mut cur = h;
        while let Some(p) = self.nodes[cur].parent {
            steps.push(self.nodes[cur].step.to_string());
            cur = p;
        }
        steps.push(self.initial_names[self.nodes[cur].root].clone());
        steps.reverse();
        steps.join("/")
    }

    pub fn resolve(&self, path: &str) -> Result<HistoryId, PathError> {
        let mut parts = path.split('/');
        let name = parts.next().filter(|s| !s.is_empty()).ok_or(PathError::Empty)?;
        let root = self
            .initial_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PathError::UnknownInitial(name.to_string()))?;
        let mut cur = self.slices[0][root];
        for part in parts {
            let index: usize = part.parse().map_err(|_| PathError::BadIndex(part.to_string()))?;
            if self.at_max_depth(cur) {
                return Err(PathError::TooDeep(path.to_string()));
            }
            let children = &self.nodes[cur].children;
            cur = *children.get(index).ok_or_else(|| PathError::OutOfRange {
                prefix: self.path(cur),
                index,
                available: children.len(),
            })?;
        }
        Ok(cur)
    }

    fn agent_index(&self, a: &AgentId) -> usize {
        self.agents
            .iter()
            .position(|x| x == a)
            .unwrap_or_else(|| panic!("agent `{a}` is not in the universe"))
    }

    /// Class ids of `~_observer`; equal ids mean indistinguishable histories.
    pub fn classes(&self, observer: &AgentId) -> &[usize] {
        let i = self.agent_index(observer);
        self.classes[i].get_or_init(|| self.compute_classes(observer))
    }

    fn compute_classes(&self, observer: &AgentId) -> Vec<usize> {
        let sem = &self.semantics;
        let reflexive = sem.reflexive_subtree();
        let mut views: Interner<BTreeMap<AgentId, Process>> = Interner::new();
        let view_of: Vec<usize> = self.states.iter().map(|s| views.intern(&s.view(observer, reflexive))).collect();
        let mut keys: HashMap<(Option<usize>, usize, Option<usize>), usize> = HashMap::new();
        let mut out = vec![0; self.nodes.len()];
        for id in self.ids() {
            let node = &self.nodes[id];
            let key = match node.parent {
                None => (None, view_of[node.state], None),
                Some(p) => {
                    // A visible action is recorded by label, an invisible one by a shared marker.
                    let visible = !sem.is(Mutation::IgnoreActionsInHistories)
                        && sem.participates(observer, self.last(p), &self.labels[node.action.unwrap()]);
                    let tag = if sem.is(Mutation::IgnoreActionsInHistories) {
                        None
                    } else if visible {
                        Some(node.action.unwrap() + 1)
                    } else {
                        Some(0)
                    };
                    (Some(out[p]), view_of[node.state], tag)
                }
            };
            let next = keys.len();
            out[id] = *keys.entry(key).or_insert(next);
        }
        out
    }

    pub fn history_equiv(&self, observer: &AgentId, h: HistoryId, g: HistoryId) -> bool {
        let c = self.classes(observer);
        c[h] == c[g]
    }

    /// Intersection of the members' relations.
    pub fn history_equiv_group<'a>(&self, observers: impl IntoIterator<Item = &'a AgentId>, h: HistoryId, g: HistoryId) -> bool {
        observers.into_iter().all(|a| self.history_equiv(a, h, g))
    }

    /// Histories of the same length indistinguishable from `h` for every member of `group`.
    pub fn equivalents<'a>(&'a self, group: &'a BTreeSet<AgentId>, h: HistoryId) -> impl Iterator<Item = HistoryId> + 'a {
        let classes: Vec<&[usize]> = group.iter().map(|a| self.classes(a)).collect();
        self.slice(self.size(h))
            .iter()
            .copied()
            .filter(move |&g| classes.iter().all(|c| c[g] == c[h]))
    }
}

/// A violated relational property, with the histories involved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub observer: AgentId,
    /// The subagent, for subagent monotonicity.
    pub subagent: Option<AgentId>,
    pub left: HistoryId,
    pub right: HistoryId,
}

/// Perfect Recall: equivalent nonempty histories have equivalent prefixes and
/// equivalent last actions.
pub fn check_perfect_recall(u: &Universe) -> (usize, Vec<Violation>) {
    let sem = *u.semantics();
    let mut checked = 0;
    let mut bad = vec![];
    for x in u.agents() {
        for len in 1..=u.depth() {
            for_each_equivalent_pair(u, x, len, |h, g| {
                checked += 1;
                let (hp, gp) = (u.parent(h).unwrap(), u.parent(g).unwrap());
                let ok = u.size(hp) == u.size(gp)
                    && u.history_equiv(x, hp, gp)
                    && step_equiv(&sem, x, u.last(hp), u.last_action(h).unwrap(), u.last(gp), u.last_action(g).unwrap());
                if !ok {
                    bad.push(Violation {
                        observer: x.clone(),
                        subagent: None,
                        left: h,
                        right: g,
                    });
                }
            });
        }
    }
    (checked, bad)
}

/// `h ~_C h′ ∧ A <⁺ C at last(h) ⇒ h ~_A h′`.
pub fn check_subagent_mono(u: &Universe) -> (usize, Vec<Violation>) {
    let mut checked = 0;
    let mut bad = vec![];
    for c in u.agents() {
        for len in 0..=u.depth() {
            for_each_equivalent_pair(u, c, len, |h, g| {
                for a in u.last(h).strict_subagents(c) {
                    checked += 1;
                    if !u.history_equiv(a, h, g) {
                        bad.push(Violation {
                            observer: c.clone(),
                            subagent: Some(a.clone()),
                            left: h,
                            right: g,
                        });
                    }
                }
            });
        }
    }
    (checked, bad)
}

/// Calls `f` on every ordered pair of distinct `~_x`-equivalent histories of length `len`.
fn for_each_equivalent_pair(u: &Universe, x: &AgentId, len: usize, mut f: impl FnMut(HistoryId, HistoryId)) {
    let classes = u.classes(x);
    let mut buckets: BTreeMap<usize, Vec<HistoryId>> = BTreeMap::new();
    for &h in u.slice(len) {
        buckets.entry(classes[h]).or_default().push(h);
    }
    for members in buckets.values() {
        for &h in members {
            for &g in members {
                if h != g {
                    f(h, g);
                }
            }
        }
    }
}
