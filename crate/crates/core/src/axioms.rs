//! The axiom catalog, instantiated over a model and checked on a universe.
//!
//! Every schema is instantiated over all agent tuples that satisfy its printed
//! side conditions. Free formulas `φ` range over a fixed pool (see
//! [`formula_pool`]). Mediated actions range over every triple of distinct
//! agents; communication actions range over the labels occurring in the
//! universe, since their payloads are arbitrary formulas.
//!
//! An instance with modal depth `d` is checked at the histories `h` with
//! `|h| + d ≤ depth`, so evaluation never looks past the universe boundary.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::checker::{CheckError, Checker, Truth};
use crate::histories::{check_perfect_recall, check_subagent_mono, HistoryId, Universe, Violation};
use crate::syntax::{one_step, top, ActionKind, ActionLabel, AgentId, Capability, Formula};

macro_rules! schemas {
    ($($variant:ident => $name:literal, $law:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum SchemaId { $($variant),* }

        impl SchemaId {
            pub const ALL: &'static [SchemaId] = &[$(SchemaId::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(SchemaId::$variant => $name),* }
            }

            /// The law in ASCII notation.
            pub fn law(self) -> &'static str {
                match self { $(SchemaId::$variant => $law),* }
            }
        }
    };
}

schemas! {
    G1 => "G1", "DK[A] p <=> K[A] p";
    KtoDK => "KtoDK", "K[A] p => DK[A, B1..Bn] p";
    KOwn => "KOwn", "A <+ C => K[C] (A <+ C)";
    DKOwn => "DKOwn", "A <+ C & C <+ B => DK[B, A1..An] (A <+ C)";
    KfromDK => "KfromDK", "B1..Bn <+ A & DK[B1..Bn] p => K[A] p";
    R => "R", "~ A <+ A";
    Trans => "Trans", "A <+ B & B <+ C => A <+ C";
    Tree => "Tree", "X <+ A & X <+ B => A <+ B or B <+ A";
    PartialFunctionality => "PartialFunctionality", "[a] ~p <=> (<a> true => ~[a] p)";
    PF1 => "PF1", "[aI] p <=> (<aI> true => p)";
    PF2a => "PF2a", "X != A: [aII] X < Y <=> (<aII> true => X < Y)";
    PF2b => "PF2b", "Y != E, C: [aII] A < Y <=> (<aII> true => A < Y)";
    PF3a => "PF3a", "X != A: [aIII] X < Y <=> (<aIII> true => X < Y)";
    PF3b => "PF3b", "Y != E, C: [aIII] A < Y <=> (<aIII> true => A < Y)";
    PF4a => "PF4a", "X < C => [aIV] X < A";
    PF4b => "PF4b", "X != C: ~ X < A => ([aIV] X < Y <=> (<aIV> true => X < Y))";
    AcKn1a => "AcKn1a", "X in {A, C}: [aI] K[X] p <=> (<aI> true => K[X] [aI] p)";
    AcKn1b => "AcKn1b", "A <+ X or C <+ X => ([aI] K[X] p <=> (<aI> true => K[X] [aI] p))";
    AcKn2a => "AcKn2a", "[aII] K[C] p <=> (<aII> true => DK[A, C] [aII] p)";
    AcKn2b => "AcKn2b", "C <+ X => ([aII] K[X] p <=> (<aII> true => K[X] [aII] p))";
    AcKn2c => "AcKn2c", "[aII] K[A] p <=> (<aII> true => K[A] [aII] p)";
    AcKn3a => "AcKn3a", "X in {A, C}: [aIII] K[X] p <=> (<aIII> true => K[X] [aIII] p)";
    AcKn3b => "AcKn3b", "A <+ X => ([aIII] K[X] p <=> (<aIII> true => K[X] [aIII] p))";
    AcKn4a => "AcKn4a", "[aIV] K[A] p <=> (<aIV> true => DK[A, C] [aIV] p)";
    AcKn4b => "AcKn4b", "A <+ X => ([aIV] K[X] p <=> (<aIV> true => K[X] [aIV] p))";
    AcKnNP => "AcKnNP", "X <+ A & X <+ C => ([a] K[X] p <=> AND{b ~X a} (<a> true => [b] p))";
    ConsIIPre => "Cons-II-pre", "<aII> true => A < E & C < E";
    ConsIIIPre => "Cons-III-pre", "<aIII> true => A < C & C < E";
    ConsIVPre => "Cons-IV-pre", "<aIV> true => A < E & C < E";
    ConsIIPost => "Cons-II-post", "[aII] A < C";
    ConsIIIPost => "Cons-III-post", "[aIII] A < E";
    ConsIVPost => "Cons-IV-post", "[aIV] ~ C < E";
    Cor1 => "Cor1", "A < B => A <+ B";
    Cor2 => "Cor2", "X < A => ~ X < B";
    Cor3 => "Cor3", "A <+ C & C <+ B1..Bn => DK[B1..Bn] (A <+ C)";
    Cor4 => "Cor4", "A <+ C & C <+ B => K[B] (A <+ C)";
    Cor5 => "Cor5", "B1..Bn <+ A & DK[B1..Bn, A] p => K[A] p";
    Cor6 => "Cor6", "X <+ A => [aIII] ~ X <+ C";
    PerfectRecall => "PerfectRecall", "h' ~C h'', h' = (h1, a, s'), h'' = (h2, b, s'') => |h1| = |h2|, h1 ~C h2, a ~C b";
    SubagentMono => "SubagentMono", "h ~C h', A <+ C at last(h) => h ~A h'";
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemaId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemaId::ALL
            .iter()
            .copied()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown schema `{s}`"))
    }
}

impl Serialize for SchemaId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// One failing instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub bindings: Vec<(String, String)>,
    pub formula: String,
    pub history: HistoryId,
    pub path: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemaReport {
    pub schema: SchemaId,
    pub instances: usize,
    /// Instance-history pairs evaluated.
    pub checks: usize,
    pub failure_count: usize,
    /// The first failures, in instance order.
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SchemaReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    /// How many failures each report keeps.
    pub keep_failures: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { keep_failures: 5 }
    }
}

/// Test formulas for free `φ`: every `A <+ B` with `A ≠ B`, its negation, and
/// `K[X] (A <+ B)` for every agent `X`.
pub fn formula_pool(agents: &[AgentId]) -> Vec<Formula> {
    let atoms: Vec<Formula> = pairs(agents).map(|(a, b)| Formula::sub_plus(a.clone(), b.clone())).collect();
    let mut pool = atoms.clone();
    pool.extend(atoms.iter().cloned().map(Formula::not));
    for x in agents {
        pool.extend(atoms.iter().map(|p| Formula::knows(x.clone(), p.clone())));
    }
    pool
}

fn pairs(agents: &[AgentId]) -> impl Iterator<Item = (&AgentId, &AgentId)> {
    agents.iter().flat_map(move |a| agents.iter().filter(move |b| *b != a).map(move |b| (a, b)))
}

fn triples(agents: &[AgentId]) -> impl Iterator<Item = (&AgentId, &AgentId, &AgentId)> {
    pairs(agents).flat_map(move |(a, b)| agents.iter().filter(move |c| *c != a && *c != b).map(move |c| (a, b, c)))
}

/// Nonempty subsets, smallest first.
fn subsets(items: &[AgentId]) -> Vec<BTreeSet<AgentId>> {
    let mut out: Vec<BTreeSet<AgentId>> = (1u64..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect();
    out.sort_by_key(|s| s.len());
    out
}

fn group_text(g: &BTreeSet<AgentId>) -> String {
    g.iter().map(AgentId::to_string).collect::<Vec<_>>().join(", ")
}

/// Action labels of one kind that instances range over.
pub fn label_domain(u: &Universe, kind: ActionKind) -> Vec<ActionLabel> {
    if kind == ActionKind::I {
        return u.labels().iter().filter(|l| l.kind() == kind).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    }
    let (ca, cc) = match kind {
        ActionKind::II => (Capability::Enter, Capability::Accept),
        ActionKind::III => (Capability::Exit, Capability::Expel),
        _ => (Capability::MergePlus, Capability::MergeMinus),
    };
    triples(u.agents())
        .map(|(a, c, e)| ActionLabel::new(ca.clone(), a.clone(), cc.clone(), c.clone(), Some(e.clone())).expect("well-formed"))
        .collect()
}

struct Instance {
    bindings: Vec<(String, String)>,
    formula: Formula,
}

struct Ctx<'u> {
    u: &'u Universe,
    checker: Checker<'u>,
    agents: Vec<AgentId>,
    agent_set: BTreeSet<AgentId>,
    pool: Vec<Formula>,
    top: Formula,
}

fn bind(pairs: &[(&str, &dyn fmt::Display)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

impl<'u> Ctx<'u> {
    fn new(u: &'u Universe) -> Self {
        let agents = u.agents().to_vec();
        let agent_set = u.agent_set();
        Ctx {
            u,
            checker: Checker::strict(u),
            pool: formula_pool(&agents),
            top: top(&agent_set).expect("models have agents"),
            agents,
            agent_set,
        }
    }

    fn lt(&self, a: &AgentId, b: &AgentId) -> Formula {
        one_step(a, b, &self.agent_set)
    }

    fn sub(&self, a: &AgentId, b: &AgentId) -> Formula {
        Formula::sub_plus(a.clone(), b.clone())
    }

    fn can(&self, alpha: &ActionLabel) -> Formula {
        Formula::diamond(alpha.clone(), self.top.clone())
    }

    fn labels(&self, kind: ActionKind) -> Vec<ActionLabel> {
        label_domain(self.u, kind)
    }

    fn all_labels(&self) -> Vec<ActionLabel> {
        ActionKind::ALL.into_iter().flat_map(|k| self.labels(k)).collect()
    }

    fn instances(&self, id: SchemaId) -> Vec<Instance> {
        let ags = &self.agents;
        let mut out = vec![];
        let mut push = |bindings, formula| out.push(Instance { bindings, formula });
        match id {
            SchemaId::G1 => {
                for a in ags {
                    for p in &self.pool {
                        let f = Formula::iff(
                            Formula::dist_knows([a.clone()], p.clone()),
                            Formula::knows(a.clone(), p.clone()),
                        );
                        push(bind(&[("A", a), ("p", p)]), f);
                    }
                }
            }
            SchemaId::KtoDK => {
                for a in ags {
                    for g in subsets(ags).into_iter().filter(|g| g.contains(a)) {
                        for p in &self.pool {
                            let f = Formula::implies(
                                Formula::knows(a.clone(), p.clone()),
                                Formula::dist_knows(g.iter().cloned(), p.clone()),
                            );
                            push(bind(&[("A", a), ("group", &group_text(&g)), ("p", p)]), f);
                        }
                    }
                }
            }
            SchemaId::KOwn => {
                for (a, c) in pairs(ags) {
                    let f = Formula::implies(self.sub(a, c), Formula::knows(c.clone(), self.sub(a, c)));
                    push(bind(&[("A", a), ("C", c)]), f);
                }
            }
            SchemaId::DKOwn => {
                for (a, c, b) in triples(ags) {
                    for g in subsets(ags).into_iter().filter(|g| g.contains(b)) {
                        let f = Formula::implies(
                            Formula::and(self.sub(a, c), self.sub(c, b)),
                            Formula::dist_knows(g.iter().cloned(), self.sub(a, c)),
                        );
                        push(bind(&[("A", a), ("C", c), ("B", b), ("group", &group_text(&g))]), f);
                    }
                }
            }
            SchemaId::KfromDK | SchemaId::Cor5 => {
                for a in ags {
                    let others: Vec<AgentId> = ags.iter().filter(|x| *x != a).cloned().collect();
                    for g in subsets(&others) {
                        let below = Formula::conj(g.iter().map(|b| self.sub(b, a))).expect("nonempty");
                        let mut dk_group = g.clone();
                        if id == SchemaId::Cor5 {
                            dk_group.insert(a.clone());
                        }
                        for p in &self.pool {
                            let f = Formula::implies(
                                Formula::and(below.clone(), Formula::dist_knows(dk_group.iter().cloned(), p.clone())),
                                Formula::knows(a.clone(), p.clone()),
                            );
                            push(bind(&[("A", a), ("group", &group_text(&g)), ("p", p)]), f);
                        }
                    }
                }
            }
            SchemaId::R => {
                for a in ags {
                    push(bind(&[("A", a)]), Formula::not(self.sub(a, a)));
                }
            }
            SchemaId::Trans => {
                for (a, b, c) in triples(ags) {
                    let f = Formula::implies(Formula::and(self.sub(a, b), self.sub(b, c)), self.sub(a, c));
                    push(bind(&[("A", a), ("B", b), ("C", c)]), f);
                }
            }
            SchemaId::Tree => {
                for (a, b, x) in triples(ags) {
                    let f = Formula::implies(
                        Formula::and(self.sub(x, a), self.sub(x, b)),
                        Formula::or(self.sub(a, b), self.sub(b, a)),
                    );
                    push(bind(&[("X", x), ("A", a), ("B", b)]), f);
                }
            }
            SchemaId::PartialFunctionality => {
                for alpha in self.all_labels() {
                    for p in &self.pool {
                        let f = Formula::iff(
                            Formula::boxed(alpha.clone(), Formula::not(p.clone())),
                            Formula::implies(self.can(&alpha), Formula::not(Formula::boxed(alpha.clone(), p.clone()))),
                        );
                        push(bind(&[("a", &alpha), ("p", p)]), f);
                    }
                }
            }
            SchemaId::PF1 => {
                for alpha in self.labels(ActionKind::I) {
                    for p in &self.pool {
                        let f = Formula::iff(
                            Formula::boxed(alpha.clone(), p.clone()),
                            Formula::implies(self.can(&alpha), p.clone()),
                        );
                        push(bind(&[("a", &alpha), ("p", p)]), f);
                    }
                }
            }
            SchemaId::PF2a | SchemaId::PF3a => {
                let kind = if id == SchemaId::PF2a { ActionKind::II } else { ActionKind::III };
                for alpha in self.labels(kind) {
                    for x in ags.iter().filter(|x| *x != alpha.executor_a()) {
                        for y in ags {
                            let f = self.preservation(&alpha, self.lt(x, y));
                            push(bind(&[("a", &alpha), ("X", x), ("Y", y)]), f);
                        }
                    }
                }
            }
            SchemaId::PF2b | SchemaId::PF3b => {
                let kind = if id == SchemaId::PF2b { ActionKind::II } else { ActionKind::III };
                for alpha in self.labels(kind) {
                    let (a, c, e) = executors(&alpha);
                    for y in ags.iter().filter(|y| *y != e && *y != c) {
                        let f = self.preservation(&alpha, self.lt(a, y));
                        push(bind(&[("a", &alpha), ("Y", y)]), f);
                    }
                }
            }
            SchemaId::PF4a => {
                for alpha in self.labels(ActionKind::IV) {
                    let (a, c, _) = executors(&alpha);
                    for x in ags {
                        let f = Formula::implies(self.lt(x, c), Formula::boxed(alpha.clone(), self.lt(x, a)));
                        push(bind(&[("a", &alpha), ("X", x)]), f);
                    }
                }
            }
            SchemaId::PF4b => {
                for alpha in self.labels(ActionKind::IV) {
                    let (a, c, _) = executors(&alpha);
                    for x in ags.iter().filter(|x| *x != c) {
                        for y in ags {
                            let f = Formula::implies(Formula::not(self.lt(x, a)), self.preservation(&alpha, self.lt(x, y)));
                            push(bind(&[("a", &alpha), ("X", x), ("Y", y)]), f);
                        }
                    }
                }
            }
            SchemaId::AcKn1a | SchemaId::AcKn3a => {
                let kind = if id == SchemaId::AcKn1a { ActionKind::I } else { ActionKind::III };
                for alpha in self.labels(kind) {
                    for x in [alpha.executor_a(), alpha.executor_c()] {
                        for p in &self.pool {
                            push(bind(&[("a", &alpha), ("X", x), ("p", p)]), self.action_knowledge(&alpha, x, p, None));
                        }
                    }
                }
            }
            SchemaId::AcKn1b | SchemaId::AcKn2b | SchemaId::AcKn3b | SchemaId::AcKn4b => {
                let kind = match id {
                    SchemaId::AcKn1b => ActionKind::I,
                    SchemaId::AcKn2b => ActionKind::II,
                    SchemaId::AcKn3b => ActionKind::III,
                    _ => ActionKind::IV,
                };
                for alpha in self.labels(kind) {
                    let (a, c, _) = executors(&alpha);
                    for x in ags {
                        let guard = match id {
                            SchemaId::AcKn1b => Formula::or(self.sub(a, x), self.sub(c, x)),
                            SchemaId::AcKn2b => self.sub(c, x),
                            _ => self.sub(a, x),
                        };
                        for p in &self.pool {
                            let f = Formula::implies(guard.clone(), self.action_knowledge(&alpha, x, p, None));
                            push(bind(&[("a", &alpha), ("X", x), ("p", p)]), f);
                        }
                    }
                }
            }
            SchemaId::AcKn2a | SchemaId::AcKn2c | SchemaId::AcKn4a => {
                let kind = if id == SchemaId::AcKn4a { ActionKind::IV } else { ActionKind::II };
                for alpha in self.labels(kind) {
                    let (a, c, _) = executors(&alpha);
                    let (x, group) = match id {
                        SchemaId::AcKn2a => (c, Some([a.clone(), c.clone()])),
                        SchemaId::AcKn2c => (a, None),
                        _ => (a, Some([a.clone(), c.clone()])),
                    };
                    for p in &self.pool {
                        push(bind(&[("a", &alpha), ("p", p)]), self.action_knowledge(&alpha, x, p, group.clone()));
                    }
                }
            }
            SchemaId::ConsIIPre | SchemaId::ConsIIIPre | SchemaId::ConsIVPre => {
                let kind = match id {
                    SchemaId::ConsIIPre => ActionKind::II,
                    SchemaId::ConsIIIPre => ActionKind::III,
                    _ => ActionKind::IV,
                };
                for alpha in self.labels(kind) {
                    let (a, c, e) = executors(&alpha);
                    let post = if kind == ActionKind::III {
                        Formula::and(self.lt(a, c), self.lt(c, e))
                    } else {
                        Formula::and(self.lt(a, e), self.lt(c, e))
                    };
                    push(bind(&[("a", &alpha)]), Formula::implies(self.can(&alpha), post));
                }
            }
            SchemaId::ConsIIPost | SchemaId::ConsIIIPost | SchemaId::ConsIVPost => {
                let kind = match id {
                    SchemaId::ConsIIPost => ActionKind::II,
                    SchemaId::ConsIIIPost => ActionKind::III,
                    _ => ActionKind::IV,
                };
                for alpha in self.labels(kind) {
                    let (a, c, e) = executors(&alpha);
                    let post = match kind {
                        ActionKind::II => self.lt(a, c),
                        ActionKind::III => self.lt(a, e),
                        _ => Formula::not(self.lt(c, e)),
                    };
                    push(bind(&[("a", &alpha)]), Formula::boxed(alpha.clone(), post));
                }
            }
            SchemaId::Cor1 => {
                for (a, b) in pairs(ags) {
                    push(bind(&[("A", a), ("B", b)]), Formula::implies(self.lt(a, b), self.sub(a, b)));
                }
            }
            SchemaId::Cor2 => {
                for (x, a, b) in triples(ags) {
                    let f = Formula::implies(self.lt(x, a), Formula::not(self.lt(x, b)));
                    push(bind(&[("X", x), ("A", a), ("B", b)]), f);
                }
            }
            SchemaId::Cor3 => {
                for (a, c) in pairs(ags) {
                    let others: Vec<AgentId> = ags.iter().filter(|x| *x != a && *x != c).cloned().collect();
                    for g in subsets(&others) {
                        let above = Formula::conj(g.iter().map(|b| self.sub(c, b))).expect("nonempty");
                        let f = Formula::implies(
                            Formula::and(self.sub(a, c), above),
                            Formula::dist_knows(g.iter().cloned(), self.sub(a, c)),
                        );
                        push(bind(&[("A", a), ("C", c), ("group", &group_text(&g))]), f);
                    }
                }
            }
            SchemaId::Cor4 => {
                for (a, c, b) in triples(ags) {
                    let f = Formula::implies(
                        Formula::and(self.sub(a, c), self.sub(c, b)),
                        Formula::knows(b.clone(), self.sub(a, c)),
                    );
                    push(bind(&[("A", a), ("C", c), ("B", b)]), f);
                }
            }
            SchemaId::Cor6 => {
                for alpha in self.labels(ActionKind::III) {
                    let (a, c, _) = executors(&alpha);
                    for x in ags {
                        let f = Formula::implies(self.sub(x, a), Formula::boxed(alpha.clone(), Formula::not(self.sub(x, c))));
                        push(bind(&[("a", &alpha), ("X", x)]), f);
                    }
                }
            }
            SchemaId::AcKnNP | SchemaId::PerfectRecall | SchemaId::SubagentMono => {
                unreachable!("checked by dedicated procedures")
            }
        }
        out
    }

    /// `[α]ψ <=> (<α> true => ψ)`
    fn preservation(&self, alpha: &ActionLabel, psi: Formula) -> Formula {
        Formula::iff(
            Formula::boxed(alpha.clone(), psi.clone()),
            Formula::implies(self.can(alpha), psi),
        )
    }

    /// `[α] K[X] p <=> (<α> true => K[X] [α] p)`, or with `DK[group]` on the right.
    fn action_knowledge(&self, alpha: &ActionLabel, x: &AgentId, p: &Formula, group: Option<[AgentId; 2]>) -> Formula {
        let after = Formula::boxed(alpha.clone(), p.clone());
        let rhs = match group {
            Some(g) => Formula::dist_knows(g, after),
            None => Formula::knows(x.clone(), after),
        };
        Formula::iff(
            Formula::boxed(alpha.clone(), Formula::knows(x.clone(), p.clone())),
            Formula::implies(self.can(alpha), rhs),
        )
    }

    fn admissible(&self, f: &Formula) -> impl Iterator<Item = HistoryId> + '_ {
        let room = self.u.depth().checked_sub(f.box_depth());
        self.u.ids().filter(move |&h| room.is_some_and(|r| self.u.size(h) <= r))
    }

    fn check_formulas(&self, id: SchemaId, config: &SuiteConfig, started: Instant) -> Result<SchemaReport, CheckError> {
        let mut report = empty_report(id);
        for inst in self.instances(id) {
            report.instances += 1;
            let values = self.checker.eval(&inst.formula);
            for h in self.admissible(&inst.formula) {
                report.checks += 1;
                match values[h] {
                    Truth::True => {}
                    Truth::False => {
                        record(&mut report, config, || Failure {
                            bindings: inst.bindings.clone(),
                            formula: inst.formula.to_string(),
                            history: h,
                            path: self.u.path(h),
                        });
                        break;
                    }
                    Truth::Unknown => {
                        return Err(CheckError::DepthInsufficient {
                            formula: inst.formula.to_string(),
                            history: self.u.path(h),
                        })
                    }
                }
            }
        }
        report.elapsed = started.elapsed();
        Ok(report)
    }

    /// `X <+ A & X <+ C => ([α] K[X] p <=> AND (<α> true => [β] p))`, where
    /// `β` ranges over the universe's labels with `β ~X α` at `last(h)`. The
    /// conjunction depends on `h`, so each instance is a formula per history.
    fn check_non_participants(&self, config: &SuiteConfig, started: Instant) -> SchemaReport {
        let u = self.u;
        let sem = *u.semantics();
        let mut report = empty_report(SchemaId::AcKnNP);
        let universe_labels = u.labels();
        let admissible: Vec<HistoryId> = u.ids().filter(|&h| u.size(h) < u.depth()).collect();
        for alpha in self.all_labels() {
            let (a, c, _) = executors(&alpha);
            for x in &self.agents {
                let guarded: Vec<HistoryId> = admissible
                    .iter()
                    .copied()
                    .filter(|&h| u.last(h).subagent_iter(x, a) && u.last(h).subagent_iter(x, c))
                    .collect();
                for p in &self.pool {
                    report.instances += 1;
                    let lhs = self.checker.eval(&Formula::boxed(alpha.clone(), Formula::knows(x.clone(), p.clone())));
                    let can = self.checker.eval(&self.can(&alpha));
                    for &h in &guarded {
                        report.checks += 1;
                        let s = u.last(h);
                        let betas: Vec<&ActionLabel> = universe_labels
                            .iter()
                            .filter(|b| crate::histories::action_equiv_with(&sem, x, s, &alpha, b))
                            .collect();
                        let rhs = betas.iter().fold(Truth::True, |acc, b| {
                            let after = self.checker.eval(&Formula::boxed((*b).clone(), p.clone()))[h];
                            let imp = if can[h] == Truth::True { after } else { Truth::True };
                            acc.and(imp)
                        });
                        if lhs[h] != rhs {
                            record(&mut report, config, || {
                                let conj = Formula::conj(
                                    betas
                                        .iter()
                                        .map(|b| Formula::implies(self.can(&alpha), Formula::boxed((*b).clone(), p.clone()))),
                                )
                                .unwrap_or_else(|| self.top.clone());
                                let f = Formula::implies(
                                    Formula::and(self.sub(x, a), self.sub(x, c)),
                                    Formula::iff(Formula::boxed(alpha.clone(), Formula::knows(x.clone(), p.clone())), conj),
                                );
                                Failure {
                                    bindings: bind(&[("a", &alpha), ("X", x), ("p", p)]),
                                    formula: f.to_string(),
                                    history: h,
                                    path: u.path(h),
                                }
                            });
                            break;
                        }
                    }
                }
            }
        }
        report.elapsed = started.elapsed();
        report
    }

    fn check_relational(&self, id: SchemaId, config: &SuiteConfig, started: Instant) -> SchemaReport {
        let (checked, violations) = if id == SchemaId::PerfectRecall {
            check_perfect_recall(self.u)
        } else {
            check_subagent_mono(self.u)
        };
        let mut report = empty_report(id);
        report.instances = self.agents.len();
        report.checks = checked;
        for v in violations {
            record(&mut report, config, || violation_failure(self.u, &v));
        }
        report.elapsed = started.elapsed();
        report
    }
}

fn violation_failure(u: &Universe, v: &Violation) -> Failure {
    let mut bindings = vec![("C".to_string(), v.observer.to_string())];
    if let Some(a) = &v.subagent {
        bindings.push(("A".to_string(), a.to_string()));
    }
    bindings.push(("h'".to_string(), u.path(v.right)));
    Failure {
        bindings,
        formula: format!("{} ~{} {}", u.path(v.left), v.observer, u.path(v.right)),
        history: v.left,
        path: u.path(v.left),
    }
}

fn executors(alpha: &ActionLabel) -> (&AgentId, &AgentId, &AgentId) {
    let e = alpha.mediator().unwrap_or(alpha.executor_c());
    (alpha.executor_a(), alpha.executor_c(), e)
}

fn empty_report(schema: SchemaId) -> SchemaReport {
    SchemaReport {
        schema,
        instances: 0,
        checks: 0,
        failure_count: 0,
        failures: vec![],
        elapsed: Duration::ZERO,
    }
}

fn record(report: &mut SchemaReport, config: &SuiteConfig, failure: impl FnOnce() -> Failure) {
    report.failure_count += 1;
    if report.failures.len() < config.keep_failures {
        report.failures.push(failure());
    }
}

/// Checks the given schemas on a universe, in catalog order.
pub fn verify(u: &Universe, schemas: &[SchemaId], config: &SuiteConfig) -> Result<Vec<SchemaReport>, CheckError> {
    let mut wanted: Vec<SchemaId> = schemas.to_vec();
    wanted.sort();
    wanted.dedup();
    wanted
        .into_iter()
        .map(|id| {
            let started = Instant::now();
            // A fresh memo per schema keeps peak memory proportional to the largest schema.
            let ctx = Ctx::new(u);
            match id {
                SchemaId::AcKnNP => Ok(ctx.check_non_participants(config, started)),
                SchemaId::PerfectRecall | SchemaId::SubagentMono => Ok(ctx.check_relational(id, config, started)),
                _ => ctx.check_formulas(id, config, started),
            }
        })
        .collect()
}

/// Number of formula instances a schema produces on a universe.
pub fn instance_count(u: &Universe, id: SchemaId) -> usize {
    match id {
        SchemaId::AcKnNP | SchemaId::PerfectRecall | SchemaId::SubagentMono => {
            verify(u, &[id], &SuiteConfig::default()).map(|r| r[0].instances).unwrap_or(0)
        }
        _ => Ctx::new(u).instances(id).len(),
    }
}
