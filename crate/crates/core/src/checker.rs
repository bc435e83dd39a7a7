//! Truth of formulas at histories of a universe.
//!
//! Each formula is evaluated once over the whole universe and memoized by
//! structure. Knowledge at `h` ranges over the same-length histories that are
//! indistinguishable from `h`; `[α]φ` follows the in-universe extension.
//!
//! At a history of maximal length `[α]φ` has no extension to look at. By
//! default that is vacuous truth; in strict mode the value is
//! [`Truth::Unknown`] whenever α is executable there, and unknowns propagate
//! the three-valued (Kleene) way.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::histories::{HistoryId, Universe};
use crate::syntax::{ActionLabel, AgentId, Formula};
use crate::transitions::executable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    /// Three-valued conjunction.
    pub fn and(self, other: Truth) -> Self {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("history {0} is not in the universe")]
    HistoryNotInUniverse(HistoryId),
    #[error("depth insufficient: `{formula}` at `{history}` needs histories beyond the universe depth")]
    DepthInsufficient { formula: String, history: String },
}

/// Outcome of checking a formula at every history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    /// Least failing history in breadth-first order.
    pub counterexample: Option<HistoryId>,
    pub checked: usize,
}

/// Hash-consed formula node: children are referred to by id, so keys stay
/// small no matter how large the formula is.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Atom(AgentId, AgentId),
    Not(usize),
    And(usize, usize),
    Knows(AgentId, usize),
    DistKnows(BTreeSet<AgentId>, usize),
    Box(usize, usize),
}

#[derive(Default)]
struct Memo {
    ids: HashMap<Node, usize>,
    values: Vec<Arc<Vec<Truth>>>,
    labels: HashMap<ActionLabel, usize>,
}

pub struct Checker<'u> {
    universe: &'u Universe,
    strict: bool,
    memo: Mutex<Memo>,
}

impl<'u> Checker<'u> {
    pub fn new(universe: &'u Universe) -> Self {
        Checker {
            universe,
            strict: false,
            memo: Mutex::new(Memo::default()),
        }
    }

    /// A checker that reports depth artifacts instead of treating them as vacuous truth.
    pub fn strict(universe: &'u Universe) -> Self {
        Checker {
            strict: true,
            ..Checker::new(universe)
        }
    }

    pub fn universe(&self) -> &'u Universe {
        self.universe
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Truth values of `phi` at every history, indexed by id.
    pub fn eval(&self, phi: &Formula) -> Arc<Vec<Truth>> {
        let id = self.node(phi);
        self.memo.lock().unwrap().values[id].clone()
    }

    fn value(&self, id: usize) -> Arc<Vec<Truth>> {
        self.memo.lock().unwrap().values[id].clone()
    }

    /// Interns `phi`, evaluating it if it is new.
    fn node(&self, phi: &Formula) -> usize {
        let key = match phi {
            Formula::SubagentPlus(a, b) => Node::Atom(a.clone(), b.clone()),
            Formula::Not(g) => Node::Not(self.node(g)),
            Formula::And(f, g) => Node::And(self.node(f), self.node(g)),
            Formula::Knows(a, g) => Node::Knows(a.clone(), self.node(g)),
            Formula::DistKnows(group, g) => Node::DistKnows(group.clone(), self.node(g)),
            Formula::Box(alpha, g) => {
                let inner = self.node(g);
                let mut memo = self.memo.lock().unwrap();
                let next = memo.labels.len();
                let label = *memo.labels.entry(alpha.clone()).or_insert(next);
                Node::Box(label, inner)
            }
        };
        if let Some(&id) = self.memo.lock().unwrap().ids.get(&key) {
            return id;
        }
        let values = Arc::new(self.compute(phi, &key));
        let mut memo = self.memo.lock().unwrap();
        if let Some(&id) = memo.ids.get(&key) {
            return id;
        }
        memo.values.push(values);
        let id = memo.values.len() - 1;
        memo.ids.insert(key, id);
        id
    }

    fn compute(&self, phi: &Formula, key: &Node) -> Vec<Truth> {
        let u = self.universe;
        match (phi, key) {
            (Formula::SubagentPlus(a, b), _) => {
                let per_state: Vec<bool> = u.states().iter().map(|s| s.subagent_iter(a, b)).collect();
                u.ids().map(|h| Truth::from_bool(per_state[u.state_id(h)])).collect()
            }
            (_, Node::Not(g)) => self.value(*g).iter().map(|t| t.not()).collect(),
            (_, Node::And(f, g)) => {
                let (x, y) = (self.value(*f), self.value(*g));
                x.iter().zip(y.iter()).map(|(a, b)| a.and(*b)).collect()
            }
            (_, Node::Knows(a, g)) => self.knowledge(std::slice::from_ref(a), &self.value(*g)),
            (_, Node::DistKnows(group, g)) => {
                let members: Vec<AgentId> = group.iter().cloned().collect();
                self.knowledge(&members, &self.value(*g))
            }
            (Formula::Box(alpha, _), Node::Box(_, g)) => {
                let inner = self.value(*g);
                u.ids()
                    .map(|h| match u.successor(h, alpha) {
                        Some(next) => inner[next],
                        None if self.strict && u.at_max_depth(h) && executable(u.last(h), alpha) => Truth::Unknown,
                        None => Truth::True,
                    })
                    .collect()
            }
            _ => unreachable!("node built from this formula"),
        }
    }

    /// Aggregates `inner` over the intersection of the members' classes.
    fn knowledge(&self, members: &[AgentId], inner: &[Truth]) -> Vec<Truth> {
        let u = self.universe;
        let classes: Vec<&[usize]> = members.iter().map(|a| u.classes(a)).collect();
        let key = |h: HistoryId| -> (usize, Vec<usize>) { (u.size(h), classes.iter().map(|c| c[h]).collect()) };
        let mut agg: HashMap<(usize, Vec<usize>), Truth> = HashMap::new();
        for h in u.ids() {
            let t = agg.entry(key(h)).or_insert(Truth::True);
            *t = t.and(inner[h]);
        }
        u.ids().map(|h| agg[&key(h)]).collect()
    }

    pub fn truth(&self, h: HistoryId, phi: &Formula) -> Result<Truth, CheckError> {
        if h >= self.universe.len() {
            return Err(CheckError::HistoryNotInUniverse(h));
        }
        Ok(self.eval(phi)[h])
    }

    /// `h ⊨ φ`.
    pub fn satisfies(&self, h: HistoryId, phi: &Formula) -> Result<bool, CheckError> {
        match self.truth(h, phi)? {
            Truth::True => Ok(true),
            Truth::False => Ok(false),
            Truth::Unknown => Err(self.depth_error(h, phi)),
        }
    }

    fn depth_error(&self, h: HistoryId, phi: &Formula) -> CheckError {
        CheckError::DepthInsufficient {
            formula: phi.to_string(),
            history: self.universe.path(h),
        }
    }

    /// Checks `phi` at every history.
    pub fn valid_in_universe(&self, phi: &Formula) -> Result<Verdict, CheckError> {
        self.valid_at(phi, self.universe.ids())
    }

    /// Checks `phi` at the given histories, which must be in increasing order
    /// for the counterexample to be the least one.
    pub fn valid_at(&self, phi: &Formula, histories: impl IntoIterator<Item = HistoryId>) -> Result<Verdict, CheckError> {
        let values = self.eval(phi);
        let mut checked = 0;
        let mut unknown = None;
        for h in histories {
            checked += 1;
            match values.get(h).ok_or(CheckError::HistoryNotInUniverse(h))? {
                Truth::True => {}
                Truth::False => {
                    return Ok(Verdict {
                        valid: false,
                        counterexample: Some(h),
                        checked,
                    })
                }
                Truth::Unknown => {
                    unknown.get_or_insert(h);
                }
            }
        }
        match unknown {
            Some(h) => Err(self.depth_error(h, phi)),
            None => Ok(Verdict {
                valid: true,
                counterexample: None,
                checked,
            }),
        }
    }
}

/// The agents mentioned in a formula, including inside action labels.
pub fn formula_agents(phi: &Formula) -> BTreeSet<AgentId> {
    let mut out = BTreeSet::new();
    collect_agents(phi, &mut out);
    out
}

fn collect_agents(phi: &Formula, out: &mut BTreeSet<AgentId>) {
    match phi {
        Formula::SubagentPlus(a, b) => {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        Formula::Not(g) => collect_agents(g, out),
        Formula::And(f, g) => {
            collect_agents(f, out);
            collect_agents(g, out);
        }
        Formula::Knows(a, g) => {
            out.insert(a.clone());
            collect_agents(g, out);
        }
        Formula::DistKnows(group, g) => {
            out.extend(group.iter().cloned());
            collect_agents(g, out);
        }
        Formula::Box(alpha, g) => {
            out.extend(alpha.agents().cloned());
            for cap in [alpha.cap_a(), alpha.cap_c()] {
                if let Some(p) = cap.payload() {
                    collect_agents(p, out);
                }
            }
            collect_agents(g, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histories::UniverseConfig;
    use crate::parser::{parse_formula, parse_model};

    const VIRUS: &str = "agents A, C, E; init s0 { E = A | C; C = accept.0; A = enter.0; }";
    const PAIR: &str = "agents A, B, D, E;
        init s0 { E = A | B; A = 0; B = D; D = 0; }
        init s1 { E = A; A = 0; B = D; D = 0; }";

    fn setup(text: &str, depth: usize) -> (Universe, BTreeSet<AgentId>) {
        let m = parse_model(text).unwrap();
        (Universe::generate(&m, UniverseConfig::new(depth)).unwrap(), m.agent_set())
    }

    #[test]
    fn virus_entry() {
        let (u, ags) = setup(VIRUS, 1);
        let c = Checker::new(&u);
        let f = |s| parse_formula(s, &ags).unwrap();
        assert!(c.satisfies(0, &f("[(enter@A, accept@C, E)] A <+ C")).unwrap());
        assert!(c.satisfies(0, &f("[(enter@A, accept@C, E)] A < C")).unwrap());
        assert!(c.satisfies(1, &f("K[C] A <+ C")).unwrap());
        assert!(c.satisfies(0, &f("<(enter@A, accept@C, E)> true => A < E & C < E")).unwrap());
        assert!(!c.satisfies(0, &f("<(merge+@A, merge-@C, E)> true")).unwrap());
        assert!(c.satisfies(1, &f("true")).unwrap());
    }

    #[test]
    fn knowledge_differs_from_distributed_knowledge() {
        let (u, ags) = setup(PAIR, 0);
        let c = Checker::new(&u);
        let f = |s| parse_formula(s, &ags).unwrap();
        assert!(c.satisfies(0, &f("B <+ E")).unwrap());
        assert!(c.satisfies(0, &f("K[E] B <+ E")).unwrap());
        assert!(!c.satisfies(0, &f("K[A] B <+ E")).unwrap());
        assert!(c.satisfies(0, &f("DK[A, E] B <+ E")).unwrap());
        assert_eq!(c.eval(&f("DK[A] B <+ E")), c.eval(&f("K[A] B <+ E")));
    }

    #[test]
    fn validity_and_counterexamples() {
        let (u, ags) = setup(VIRUS, 1);
        let c = Checker::new(&u);
        let f = |s| parse_formula(s, &ags).unwrap();
        assert!(c.valid_in_universe(&f("~A <+ A")).unwrap().valid);
        assert!(c.valid_in_universe(&f("true")).unwrap().valid);
        let v = c.valid_in_universe(&f("A <+ C")).unwrap();
        assert_eq!(v.counterexample, Some(0));
    }

    #[test]
    fn strict_depth() {
        let (u, ags) = setup(VIRUS, 0);
        let f = parse_formula("[(enter@A, accept@C, E)] A <+ C", &ags).unwrap();
        assert!(Checker::new(&u).satisfies(0, &f).unwrap());
        let strict = Checker::strict(&u);
        assert!(matches!(strict.satisfies(0, &f), Err(CheckError::DepthInsufficient { .. })));
        assert!(matches!(strict.valid_in_universe(&f), Err(CheckError::DepthInsufficient { .. })));
        // Not executable, so no extension exists at any depth.
        let g = parse_formula("[(merge+@A, merge-@C, E)] A <+ C", &ags).unwrap();
        assert!(strict.satisfies(0, &g).unwrap());
        // A definite falsehood wins over an unknown.
        let h = parse_formula("A <+ C & [(enter@A, accept@C, E)] A <+ C", &ags).unwrap();
        assert!(!strict.satisfies(0, &h).unwrap());
    }

    #[test]
    fn out_of_universe() {
        let (u, ags) = setup(VIRUS, 0);
        let c = Checker::new(&u);
        let f = parse_formula("true", &ags).unwrap();
        assert_eq!(c.satisfies(5, &f), Err(CheckError::HistoryNotInUniverse(5)));
    }

    #[test]
    fn agents_of_formula() {
        let ags: BTreeSet<AgentId> = ["A", "C", "E"].into_iter().map(AgentId::new).collect();
        let f = parse_formula("K[A] [(enter@A, accept@C, E)] C <+ E", &ags).unwrap();
        assert_eq!(formula_agents(&f), ags);
    }
}
