//! Terms of the language: agents, capabilities, processes, formulas and
//! action labels.
//!
//! Processes are kept in a canonical normal form. Parallel composition is a
//! flattened multiset of components, choice is a multiset of prefixed
//! alternatives and the empty multiset is `0`. Structural congruence is
//! therefore plain equality on [`Process`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Name of an agent in the model's finite agent set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(Arc<str>);

impl AgentId {
    pub fn new(name: impl AsRef<str>) -> Self {
        AgentId(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId::new(s)
    }
}

impl Serialize for AgentId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CapKind {
    Recv,
    Send,
    Enter,
    Accept,
    Exit,
    Expel,
    MergePlus,
    MergeMinus,
}

impl CapKind {
    pub fn keyword(self) -> &'static str {
        match self {
            CapKind::Recv => "recv",
            CapKind::Send => "send",
            CapKind::Enter => "enter",
            CapKind::Accept => "accept",
            CapKind::Exit => "exit",
            CapKind::Expel => "expel",
            CapKind::MergePlus => "merge+",
            CapKind::MergeMinus => "merge-",
        }
    }
}

/// An atomic action prefix. Communication capabilities carry a formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Capability {
    Recv(Box<Formula>),
    Send(Box<Formula>),
    Enter,
    Accept,
    Exit,
    Expel,
    MergePlus,
    MergeMinus,
}

impl Capability {
    pub fn kind(&self) -> CapKind {
        match self {
            Capability::Recv(_) => CapKind::Recv,
            Capability::Send(_) => CapKind::Send,
            Capability::Enter => CapKind::Enter,
            Capability::Accept => CapKind::Accept,
            Capability::Exit => CapKind::Exit,
            Capability::Expel => CapKind::Expel,
            Capability::MergePlus => CapKind::MergePlus,
            Capability::MergeMinus => CapKind::MergeMinus,
        }
    }

    pub fn payload(&self) -> Option<&Formula> {
        match self {
            Capability::Recv(f) | Capability::Send(f) => Some(f),
            _ => None,
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capability::Recv(phi) => write!(f, "recv({phi})"),
            Capability::Send(phi) => write!(f, "send({phi})"),
            other => f.write_str(other.kind().keyword()),
        }
    }
}

/// `cap.P`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefixed {
    pub cap: Capability,
    pub cont: Process,
}

impl Prefixed {
    pub fn new(cap: Capability, cont: Process) -> Self {
        Prefixed { cap, cont }
    }
}

impl fmt::Display for Prefixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.cap)?;
        self.cont.fmt_atom(f)
    }
}

/// One parallel component of a process.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Agent(AgentId),
    /// Nonempty, canonically ordered choice.
    Sum(Vec<Prefixed>),
}

impl Component {
    pub fn as_agent(&self) -> Option<&AgentId> {
        match self {
            Component::Agent(a) => Some(a),
            Component::Sum(_) => None,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Agent(a) => write!(f, "{a}"),
            Component::Sum(alts) => {
                for (i, alt) in alts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{alt}")?;
                }
                Ok(())
            }
        }
    }
}

/// A process in canonical form: a multiset of components.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Process {
    components: Vec<Component>,
}

/// Canonical position: agent references first, then sums, each by text.
fn component_key(c: &Component) -> (u8, String) {
    match c {
        Component::Agent(a) => (0, a.to_string()),
        Component::Sum(_) => (1, c.to_string()),
    }
}

impl Process {
    pub fn zero() -> Self {
        Process::default()
    }

    pub fn agent(a: impl Into<AgentId>) -> Self {
        Process {
            components: vec![Component::Agent(a.into())],
        }
    }

    /// A one-component choice. Empty input yields `0`.
    pub fn sum(alts: impl IntoIterator<Item = Prefixed>) -> Self {
        let mut alts: Vec<Prefixed> = alts.into_iter().collect();
        if alts.is_empty() {
            return Process::zero();
        }
        alts.sort_by_cached_key(|p| p.to_string());
        Process {
            components: vec![Component::Sum(alts)],
        }
    }

    pub fn prefix(cap: Capability, cont: Process) -> Self {
        Process::sum([Prefixed::new(cap, cont)])
    }

    /// Builds a canonical process from arbitrary components. Empty sums are
    /// dropped.
    pub fn from_components(components: impl IntoIterator<Item = Component>) -> Self {
        let mut components: Vec<Component> = components
            .into_iter()
            .filter_map(|c| match c {
                Component::Sum(mut alts) if !alts.is_empty() => {
                    alts.sort_by_cached_key(|p| p.to_string());
                    Some(Component::Sum(alts))
                }
                Component::Sum(_) => None,
                agent => Some(agent),
            })
            .collect();
        components.sort_by_cached_key(component_key);
        Process { components }
    }

    /// Parallel composition of two canonical processes.
    pub fn par(&self, other: &Process) -> Process {
        Process::from_components(self.components.iter().chain(&other.components).cloned())
    }

    pub fn par_all<'a>(parts: impl IntoIterator<Item = &'a Process>) -> Process {
        Process::from_components(parts.into_iter().flat_map(|p| p.components.iter().cloned()))
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// The process with the component at `index` removed.
    pub fn without(&self, index: usize) -> Process {
        let mut components = self.components.clone();
        components.remove(index);
        Process { components }
    }

    /// Removes one occurrence of the top-level agent `a`, if present.
    pub fn without_agent(&self, a: &AgentId) -> Option<Process> {
        let idx = self
            .components
            .iter()
            .position(|c| c.as_agent() == Some(a))?;
        Some(self.without(idx))
    }

    /// Top-level agent references, with multiplicity.
    pub fn top_level_agents(&self) -> impl Iterator<Item = &AgentId> {
        self.components.iter().filter_map(Component::as_agent)
    }

    /// Every agent reference anywhere in the term, including under prefixes.
    pub fn agents_anywhere(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<AgentId>) {
        for c in &self.components {
            match c {
                Component::Agent(a) => {
                    out.insert(a.clone());
                }
                Component::Sum(alts) => {
                    for alt in alts {
                        alt.cont.collect_agents(out);
                    }
                }
            }
        }
    }

    /// Formulas carried by communication capabilities anywhere in the term.
    pub fn payloads(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_payloads(&mut out);
        out
    }

    fn collect_payloads<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        for c in &self.components {
            if let Component::Sum(alts) = c {
                for alt in alts {
                    if let Some(phi) = alt.cap.payload() {
                        out.push(phi);
                    }
                    alt.cont.collect_payloads(out);
                }
            }
        }
    }

    /// Writes the process so that it can follow a prefix dot.
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.components.as_slice() {
            [] => f.write_str("0"),
            [Component::Agent(a)] => write!(f, "{a}"),
            [Component::Sum(alts)] if alts.len() == 1 => write!(f, "{}", alts[0]),
            _ => write!(f, "({self})"),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("0");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Process term as written, before normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawProcess {
    Zero,
    Agent(AgentId),
    Par(Box<RawProcess>, Box<RawProcess>),
    Prefix(Capability, Box<RawProcess>),
    Choice(Vec<RawProcess>),
}

impl RawProcess {
    pub fn par(a: RawProcess, b: RawProcess) -> Self {
        RawProcess::Par(Box::new(a), Box::new(b))
    }

    pub fn prefix(cap: Capability, cont: RawProcess) -> Self {
        RawProcess::Prefix(cap, Box::new(cont))
    }
}

/// A choice operand that is not a prefixed process (or a choice of them).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("choice operand `{0}` is not a prefixed process")]
pub struct BadChoiceOperand(pub String);

/// Flattens a raw term into canonical form.
pub fn normalize(raw: &RawProcess) -> Result<Process, BadChoiceOperand> {
    Ok(match raw {
        RawProcess::Zero => Process::zero(),
        RawProcess::Agent(a) => Process::agent(a.clone()),
        RawProcess::Par(a, b) => normalize(a)?.par(&normalize(b)?),
        RawProcess::Prefix(cap, cont) => Process::prefix(cap.clone(), normalize(cont)?),
        RawProcess::Choice(ops) => {
            let mut alts = Vec::new();
            for op in ops {
                let p = normalize(op)?;
                match p.components.as_slice() {
                    [Component::Sum(inner)] => alts.extend(inner.iter().cloned()),
                    _ => return Err(BadChoiceOperand(p.to_string())),
                }
            }
            Process::sum(alts)
        }
    })
}

/// `a ⊑ p`: the agent occurs somewhere in the term, under parallel
/// composition or under any capability prefix.
pub fn occurs(a: &AgentId, p: &Process) -> bool {
    p.components.iter().any(|c| match c {
        Component::Agent(b) => b == a,
        Component::Sum(alts) => alts.iter().any(|alt| occurs(a, &alt.cont)),
    })
}

/// `a < p`: the agent is a top-level parallel component of `p`.
pub fn is_top_level_agent(a: &AgentId, p: &Process) -> bool {
    p.top_level_agents().any(|b| b == a)
}

/// Kind of an action pair. Kinds II to IV are mediated by a superagent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ActionKind {
    I,
    II,
    III,
    IV,
}

impl ActionKind {
    pub fn is_mediated(self) -> bool {
        self != ActionKind::I
    }

    /// Capability kinds held by the first and second executor.
    pub fn capabilities(self) -> (CapKind, CapKind) {
        match self {
            ActionKind::I => (CapKind::Recv, CapKind::Send),
            ActionKind::II => (CapKind::Enter, CapKind::Accept),
            ActionKind::III => (CapKind::Exit, CapKind::Expel),
            ActionKind::IV => (CapKind::MergePlus, CapKind::MergeMinus),
        }
    }

    pub const ALL: [ActionKind; 4] = [ActionKind::I, ActionKind::II, ActionKind::III, ActionKind::IV];
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ActionKind::I => "I",
            ActionKind::II => "II",
            ActionKind::III => "III",
            ActionKind::IV => "IV",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("capabilities `{0}` and `{1}` do not form a dual pair")]
    NotDual(String, String),
    #[error("communication pair carries different formulas")]
    PayloadMismatch,
    #[error("action of kind {0} requires a mediating agent")]
    MissingMediator(ActionKind),
    #[error("communication actions take no mediating agent")]
    UnexpectedMediator,
    #[error("agents named in an action must be distinct")]
    NotDistinct,
}

/// A dual capability pair with its executors and, for mediated kinds, the
/// common superagent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel {
    kind: ActionKind,
    cap_a: Capability,
    executor_a: AgentId,
    cap_c: Capability,
    executor_c: AgentId,
    mediator: Option<AgentId>,
}

impl ActionLabel {
    pub fn new(
        cap_a: Capability,
        executor_a: AgentId,
        cap_c: Capability,
        executor_c: AgentId,
        mediator: Option<AgentId>,
    ) -> Result<Self, LabelError> {
        let kind = ActionKind::ALL
            .into_iter()
            .find(|k| k.capabilities() == (cap_a.kind(), cap_c.kind()))
            .ok_or_else(|| LabelError::NotDual(cap_a.to_string(), cap_c.to_string()))?;
        if kind == ActionKind::I && cap_a.payload() != cap_c.payload() {
            return Err(LabelError::PayloadMismatch);
        }
        match (&mediator, kind.is_mediated()) {
            (None, true) => return Err(LabelError::MissingMediator(kind)),
            (Some(_), false) => return Err(LabelError::UnexpectedMediator),
            _ => {}
        }
        if executor_a == executor_c
            || mediator
                .as_ref()
                .is_some_and(|e| *e == executor_a || *e == executor_c)
        {
            return Err(LabelError::NotDistinct);
        }
        Ok(ActionLabel {
            kind,
            cap_a,
            executor_a,
            cap_c,
            executor_c,
            mediator,
        })
    }

    /// `(recv(φ)@a, send(φ)@c)`
    pub fn communicate(phi: Formula, a: impl Into<AgentId>, c: impl Into<AgentId>) -> Result<Self, LabelError> {
        let phi = Box::new(phi);
        Self::new(Capability::Recv(phi.clone()), a.into(), Capability::Send(phi), c.into(), None)
    }

    /// `(enter@a, accept@c, e)`
    pub fn enter(a: impl Into<AgentId>, c: impl Into<AgentId>, e: impl Into<AgentId>) -> Result<Self, LabelError> {
        Self::new(Capability::Enter, a.into(), Capability::Accept, c.into(), Some(e.into()))
    }

    /// `(exit@a, expel@c, e)`
    pub fn exit(a: impl Into<AgentId>, c: impl Into<AgentId>, e: impl Into<AgentId>) -> Result<Self, LabelError> {
        Self::new(Capability::Exit, a.into(), Capability::Expel, c.into(), Some(e.into()))
    }

    /// `(merge+@a, merge-@c, e)`
    pub fn merge(a: impl Into<AgentId>, c: impl Into<AgentId>, e: impl Into<AgentId>) -> Result<Self, LabelError> {
        Self::new(Capability::MergePlus, a.into(), Capability::MergeMinus, c.into(), Some(e.into()))
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn cap_a(&self) -> &Capability {
        &self.cap_a
    }

    pub fn cap_c(&self) -> &Capability {
        &self.cap_c
    }

    pub fn executor_a(&self) -> &AgentId {
        &self.executor_a
    }

    pub fn executor_c(&self) -> &AgentId {
        &self.executor_c
    }

    pub fn mediator(&self) -> Option<&AgentId> {
        self.mediator.as_ref()
    }

    /// All agents named by the label.
    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        [&self.executor_a, &self.executor_c]
            .into_iter()
            .chain(self.mediator.as_ref())
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}@{}, {}@{}",
            self.cap_a, self.executor_a, self.cap_c, self.executor_c
        )?;
        if let Some(e) = &self.mediator {
            write!(f, ", {e}")?;
        }
        f.write_str(")")
    }
}

/// Core formula grammar. Derived connectives are removed by [`desugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// `A <+ B`: iterative subagent relation.
    SubagentPlus(AgentId, AgentId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Knows(AgentId, Box<Formula>),
    /// Distributed knowledge of a nonempty group.
    DistKnows(BTreeSet<AgentId>, Box<Formula>),
    /// `[α]φ`
    Box(ActionLabel, Box<Formula>),
}

impl Formula {
    pub fn sub_plus(a: impl Into<AgentId>, b: impl Into<AgentId>) -> Self {
        Formula::SubagentPlus(a.into(), b.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// `¬(¬a ∧ ¬b)`
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// Material implication, `¬a ∨ b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn knows(a: impl Into<AgentId>, f: Formula) -> Self {
        Formula::Knows(a.into(), Box::new(f))
    }

    pub fn dist_knows(group: impl IntoIterator<Item = AgentId>, f: Formula) -> Self {
        Formula::DistKnows(group.into_iter().collect(), Box::new(f))
    }

    pub fn boxed(alpha: ActionLabel, f: Formula) -> Self {
        Formula::Box(alpha, Box::new(f))
    }

    /// `⟨α⟩φ := ¬[α]¬φ`
    pub fn diamond(alpha: ActionLabel, f: Formula) -> Self {
        Formula::not(Formula::boxed(alpha, Formula::not(f)))
    }

    /// Conjunction of a list, left nested. `None` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    /// Maximum nesting of dynamic modalities.
    pub fn box_depth(&self) -> usize {
        match self {
            Formula::SubagentPlus(..) => 0,
            Formula::Not(f) | Formula::Knows(_, f) | Formula::DistKnows(_, f) => f.box_depth(),
            Formula::And(a, b) => a.box_depth().max(b.box_depth()),
            Formula::Box(_, f) => 1 + f.box_depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::SubagentPlus(..) => 1,
            Formula::Not(f) | Formula::Knows(_, f) | Formula::DistKnows(_, f) | Formula::Box(_, f) => 1 + f.size(),
            Formula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn fmt_unary_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::SubagentPlus(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::SubagentPlus(a, b) => write!(f, "{a} <+ {b}"),
            Formula::Not(g) => {
                f.write_str("~")?;
                g.fmt_unary_operand(f)
            }
            Formula::And(a, b) => {
                f.write_str("(")?;
                write!(f, "{a} & {b}")?;
                f.write_str(")")
            }
            Formula::Knows(a, g) => {
                write!(f, "K[{a}] ")?;
                g.fmt_unary_operand(f)
            }
            Formula::DistKnows(group, g) => {
                f.write_str("DK[")?;
                for (i, a) in group.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("] ")?;
                g.fmt_unary_operand(f)
            }
            Formula::Box(alpha, g) => {
                write!(f, "[{alpha}] ")?;
                g.fmt_unary_operand(f)
            }
        }
    }
}

/// Formula as written, including derived connectives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Surface {
    SubagentPlus(AgentId, AgentId),
    /// `A < C`, the one-step subagent relation expressed via `<+`.
    Subagent(AgentId, AgentId),
    Not(Box<Surface>),
    And(Box<Surface>, Box<Surface>),
    Or(Box<Surface>, Box<Surface>),
    Implies(Box<Surface>, Box<Surface>),
    Iff(Box<Surface>, Box<Surface>),
    Knows(AgentId, Box<Surface>),
    DistKnows(Vec<AgentId>, Box<Surface>),
    Box(SurfaceAction, Box<Surface>),
    Diamond(SurfaceAction, Box<Surface>),
    True,
    False,
}

/// Action label as written; payload formulas are still surface syntax.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceAction {
    pub cap_a: SurfaceCap,
    pub executor_a: AgentId,
    pub cap_c: SurfaceCap,
    pub executor_c: AgentId,
    pub mediator: Option<AgentId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceCap {
    Recv(Box<Surface>),
    Send(Box<Surface>),
    Plain(CapKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("undeclared agent `{0}`")]
    UndeclaredAgent(String),
    #[error("empty agent set")]
    NoAgents,
    #[error("empty group in distributed knowledge")]
    EmptyGroup,
    #[error("invalid action: {0}")]
    Label(#[from] LabelError),
}

/// The fixed atom used for `true`/`false`: the least `A <+ B` over the
/// sorted agent set, with distinct agents when there are at least two.
pub fn fixed_atom(agents: &BTreeSet<AgentId>) -> Option<Formula> {
    let mut it = agents.iter();
    let first = it.next()?;
    let second = it.next().unwrap_or(first);
    Some(Formula::SubagentPlus(first.clone(), second.clone()))
}

/// `p ∨ ¬p`
pub fn top(agents: &BTreeSet<AgentId>) -> Option<Formula> {
    let p = fixed_atom(agents)?;
    Some(Formula::or(p.clone(), Formula::not(p)))
}

/// `p ∧ ¬p`
pub fn bottom(agents: &BTreeSet<AgentId>) -> Option<Formula> {
    let p = fixed_atom(agents)?;
    Some(Formula::and(p.clone(), Formula::not(p)))
}

/// `A < C := A <+ C ∧ ⋀_{B} ¬(A <+ B ∧ B <+ C)` over the agents other than
/// `A` and `C`.
pub fn one_step(a: &AgentId, c: &AgentId, agents: &BTreeSet<AgentId>) -> Formula {
    let base = Formula::SubagentPlus(a.clone(), c.clone());
    agents
        .iter()
        .filter(|b| *b != a && *b != c)
        .fold(base, |acc, b| {
            Formula::and(
                acc,
                Formula::not(Formula::and(
                    Formula::SubagentPlus(a.clone(), b.clone()),
                    Formula::SubagentPlus(b.clone(), c.clone()),
                )),
            )
        })
}

/// Rewrites derived connectives into the core grammar.
pub fn desugar(f: &Surface, agents: &BTreeSet<AgentId>) -> Result<Formula, DesugarError> {
    let check = |a: &AgentId| {
        if agents.contains(a) {
            Ok(a.clone())
        } else {
            Err(DesugarError::UndeclaredAgent(a.to_string()))
        }
    };
    let rec = |g: &Surface| desugar(g, agents);
    Ok(match f {
        Surface::SubagentPlus(a, b) => Formula::SubagentPlus(check(a)?, check(b)?),
        Surface::Subagent(a, c) => one_step(&check(a)?, &check(c)?, agents),
        Surface::Not(g) => Formula::not(rec(g)?),
        Surface::And(a, b) => Formula::and(rec(a)?, rec(b)?),
        Surface::Or(a, b) => Formula::or(rec(a)?, rec(b)?),
        Surface::Implies(a, b) => Formula::implies(rec(a)?, rec(b)?),
        Surface::Iff(a, b) => Formula::iff(rec(a)?, rec(b)?),
        Surface::Knows(a, g) => Formula::knows(check(a)?, rec(g)?),
        Surface::DistKnows(group, g) => {
            if group.is_empty() {
                return Err(DesugarError::EmptyGroup);
            }
            let group = group.iter().map(check).collect::<Result<BTreeSet<_>, _>>()?;
            Formula::DistKnows(group, Box::new(rec(g)?))
        }
        Surface::Box(alpha, g) => Formula::boxed(desugar_action(alpha, agents)?, rec(g)?),
        Surface::Diamond(alpha, g) => Formula::diamond(desugar_action(alpha, agents)?, rec(g)?),
        Surface::True => top(agents).ok_or(DesugarError::NoAgents)?,
        Surface::False => bottom(agents).ok_or(DesugarError::NoAgents)?,
    })
}

pub fn desugar_cap(cap: &SurfaceCap, agents: &BTreeSet<AgentId>) -> Result<Capability, DesugarError> {
    Ok(match cap {
        SurfaceCap::Recv(g) => Capability::Recv(Box::new(desugar(g, agents)?)),
        SurfaceCap::Send(g) => Capability::Send(Box::new(desugar(g, agents)?)),
        SurfaceCap::Plain(kind) => match kind {
            CapKind::Enter => Capability::Enter,
            CapKind::Accept => Capability::Accept,
            CapKind::Exit => Capability::Exit,
            CapKind::Expel => Capability::Expel,
            CapKind::MergePlus => Capability::MergePlus,
            CapKind::MergeMinus => Capability::MergeMinus,
            CapKind::Recv | CapKind::Send => unreachable!("communication capabilities carry a payload"),
        },
    })
}

pub fn desugar_action(alpha: &SurfaceAction, agents: &BTreeSet<AgentId>) -> Result<ActionLabel, DesugarError> {
    let check = |a: &AgentId| {
        if agents.contains(a) {
            Ok(a.clone())
        } else {
            Err(DesugarError::UndeclaredAgent(a.to_string()))
        }
    };
    Ok(ActionLabel::new(
        desugar_cap(&alpha.cap_a, agents)?,
        check(&alpha.executor_a)?,
        desugar_cap(&alpha.cap_c, agents)?,
        check(&alpha.executor_c)?,
        alpha.mediator.as_ref().map(check).transpose()?,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agents(names: &[&str]) -> BTreeSet<AgentId> {
        names.iter().map(|n| AgentId::new(n)).collect()
    }

    fn enter0() -> RawProcess {
        RawProcess::prefix(Capability::Enter, RawProcess::Zero)
    }

    #[test]
    fn zero_is_parallel_unit() {
        let p = RawProcess::par(RawProcess::par(RawProcess::Agent("P".into()), RawProcess::Agent("Q".into())), RawProcess::Zero);
        let n = normalize(&p).unwrap();
        assert_eq!(n.components(), &[Component::Agent("P".into()), Component::Agent("Q".into())]);
        assert!(normalize(&RawProcess::par(RawProcess::Zero, RawProcess::Zero)).unwrap().is_zero());
    }

    #[test]
    fn every_association_normalizes_identically() {
        let leaves = [RawProcess::Agent("A".into()), RawProcess::Agent("B".into()), enter0()];
        let mut seen = BTreeSet::new();
        // all orders and both bracketings of a three-leaf parallel term
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let [x, y, z] = perm.map(|i| leaves[i].clone());
            let left = RawProcess::par(RawProcess::par(x.clone(), y.clone()), z.clone());
            let right = RawProcess::par(x, RawProcess::par(y, z));
            seen.insert(normalize(&left).unwrap());
            seen.insert(normalize(&right).unwrap());
        }
        assert_eq!(seen.len(), 1);
        let p = seen.into_iter().next().unwrap();
        assert_eq!(p.to_string(), "A | B | enter.0");
    }

    #[test]
    fn choice_is_a_multiset() {
        let a = Prefixed::new(Capability::Enter, Process::zero());
        let b = Prefixed::new(Capability::Exit, Process::zero());
        assert_eq!(Process::sum([a.clone(), b.clone()]), Process::sum([b, a]));
    }

    #[test]
    fn choice_operand_must_be_prefix() {
        let raw = RawProcess::Choice(vec![enter0(), RawProcess::Agent("A".into())]);
        assert!(normalize(&raw).is_err());
    }

    #[test]
    fn occurrence_clauses() {
        let a = AgentId::new("A");
        assert!(occurs(&a, &Process::agent("A")));
        let guarded = Process::prefix(Capability::Enter, Process::agent("A"));
        assert!(occurs(&a, &guarded));
        assert!(!occurs(&a, &Process::zero()));
    }

    #[test]
    fn subagent_needs_top_level_component() {
        let a = AgentId::new("A");
        let p = Process::agent("A").par(&Process::agent("Q"));
        assert!(is_top_level_agent(&a, &p));
        let guarded = Process::prefix(Capability::Enter, Process::agent("A"));
        assert!(!is_top_level_agent(&a, &guarded));
        assert!(!is_top_level_agent(&a, &Process::zero()));
    }

    #[test]
    fn label_validation() {
        assert!(ActionLabel::enter("A", "C", "E").is_ok());
        assert_eq!(ActionLabel::enter("A", "A", "E"), Err(LabelError::NotDistinct));
        assert_eq!(
            ActionLabel::new(Capability::Enter, "A".into(), Capability::Expel, "C".into(), Some("E".into())),
            Err(LabelError::NotDual("enter".into(), "expel".into()))
        );
        let p = Box::new(Formula::sub_plus("A", "C"));
        let q = Box::new(Formula::sub_plus("C", "A"));
        assert_eq!(
            ActionLabel::new(Capability::Recv(p), "A".into(), Capability::Send(q), "C".into(), None),
            Err(LabelError::PayloadMismatch)
        );
    }

    #[test]
    fn one_step_expansion() {
        let abc = agents(&["A", "B", "C"]);
        let f = desugar(&Surface::Subagent("A".into(), "C".into()), &abc).unwrap();
        let expected = Formula::and(
            Formula::sub_plus("A", "C"),
            Formula::not(Formula::and(Formula::sub_plus("A", "B"), Formula::sub_plus("B", "C"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn diamond_top_expansion() {
        let ace = agents(&["A", "C", "E"]);
        let alpha = SurfaceAction {
            cap_a: SurfaceCap::Plain(CapKind::Enter),
            executor_a: "A".into(),
            cap_c: SurfaceCap::Plain(CapKind::Accept),
            executor_c: "C".into(),
            mediator: Some("E".into()),
        };
        let f = desugar(&Surface::Diamond(alpha, Box::new(Surface::True)), &ace).unwrap();
        let p = Formula::sub_plus("A", "C");
        let label = ActionLabel::enter("A", "C", "E").unwrap();
        let expected = Formula::not(Formula::boxed(
            label,
            Formula::not(Formula::or(p.clone(), Formula::not(p))),
        ));
        assert_eq!(f, expected);
    }

    #[test]
    fn iff_is_two_implications() {
        let ace = agents(&["A", "C", "E"]);
        let phi = Surface::SubagentPlus("A".into(), "C".into());
        let psi = Surface::SubagentPlus("C".into(), "E".into());
        let f = desugar(&Surface::Iff(Box::new(phi), Box::new(psi)), &ace).unwrap();
        let (p, q) = (Formula::sub_plus("A", "C"), Formula::sub_plus("C", "E"));
        let expected = Formula::and(
            Formula::or(Formula::not(p.clone()), q.clone()),
            Formula::or(Formula::not(q), p),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn undeclared_agent_in_one_step() {
        let ace = agents(&["A", "C", "E"]);
        let err = desugar(&Surface::Subagent("A".into(), "Z".into()), &ace).unwrap_err();
        assert_eq!(err, DesugarError::UndeclaredAgent("Z".into()));
    }

    #[test]
    fn box_depth_counts_nesting() {
        let alpha = ActionLabel::enter("A", "C", "E").unwrap();
        let f = Formula::knows("A", Formula::boxed(alpha.clone(), Formula::boxed(alpha, Formula::sub_plus("A", "C"))));
        assert_eq!(f.box_depth(), 2);
    }
}
