//! Brute-force reference semantics, written straight from the definitions
//! with no shared code paths beyond the data types.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use padel::syntax::{ActionKind, Capability, Component};
use padel::{ActionLabel, AgentId, Formula, History, HistoryId, Process, State, Universe};

/// `a` is a top-level agent reference of `s(b)`.
pub fn below_one(s: &State, a: &AgentId, b: &AgentId) -> bool {
    s.get(b).components().iter().any(|c| c == &Component::Agent(a.clone()))
}

/// `a <⁺ b` by trying every sequence of distinct intermediate agents.
pub fn below_plus(s: &State, a: &AgentId, b: &AgentId) -> bool {
    let agents: Vec<&AgentId> = s.agents().collect();
    fn extend(s: &State, agents: &[&AgentId], path: &mut Vec<AgentId>, b: &AgentId) -> bool {
        let last = path.last().unwrap().clone();
        if below_one(s, &last, b) {
            return true;
        }
        for x in agents {
            if !path.contains(x) && below_one(s, &last, x) {
                path.push((*x).clone());
                if extend(s, agents, path, b) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    extend(s, &agents, &mut vec![a.clone()], b)
}

pub fn below_refl(s: &State, a: &AgentId, b: &AgentId) -> bool {
    a == b || below_plus(s, a, b)
}

/// Every way to write `p` as `Σ + cap.P ∣ Q`: pairs `(P, Q)`.
fn offers(p: &Process, cap: &Capability) -> Vec<(Process, Process)> {
    let comps = p.components();
    let mut out = vec![];
    for (i, c) in comps.iter().enumerate() {
        let Component::Sum(alts) = c else { continue };
        for alt in alts {
            if &alt.cap == cap {
                let rest = comps.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.clone());
                out.push((alt.cont.clone(), Process::from_components(rest)));
            }
        }
    }
    out
}

/// Removes one top-level occurrence of each agent, or `None`.
fn remove_agents(p: &Process, xs: &[&AgentId]) -> Option<Process> {
    let mut comps: Vec<Component> = p.components().to_vec();
    for x in xs {
        let i = comps.iter().position(|c| c == &Component::Agent((*x).clone()))?;
        comps.remove(i);
    }
    Some(Process::from_components(comps))
}

/// All post-assignments allowed by the rule for `alpha` at `s`.
pub fn posts(s: &State, alpha: &ActionLabel) -> BTreeSet<BTreeMap<AgentId, Process>> {
    let (a, c) = (alpha.executor_a(), alpha.executor_c());
    let mut out = BTreeSet::new();
    let kind = alpha.kind();
    let e = alpha.mediator();
    let gamma = match (kind, e) {
        (ActionKind::I, _) => None,
        (ActionKind::III, Some(e)) => match remove_agents(s.get(e), &[c]) {
            Some(g) => Some(g),
            None => return out,
        },
        (_, Some(e)) => match remove_agents(s.get(e), &[a, c]) {
            Some(g) => Some(g),
            None => return out,
        },
        _ => return out,
    };
    let pc_source = if kind == ActionKind::III {
        match remove_agents(s.get(c), &[a]) {
            Some(p) => p,
            None => return out,
        }
    } else {
        s.get(c).clone()
    };
    for (p, q) in offers(s.get(a), alpha.cap_a()) {
        for (r, rest) in offers(&pc_source, alpha.cap_c()) {
            let mut next: BTreeMap<AgentId, Process> = s.assignment().clone();
            let pa = Process::agent(a.clone());
            let pcc = Process::agent(c.clone());
            match kind {
                ActionKind::I => {
                    next.insert(a.clone(), p.par(&q));
                    next.insert(c.clone(), r.par(&rest));
                }
                ActionKind::II => {
                    let g = gamma.as_ref().unwrap();
                    next.insert(a.clone(), p.par(&q));
                    next.insert(c.clone(), pa.par(&r).par(&rest));
                    next.insert(e.unwrap().clone(), pcc.par(g));
                }
                ActionKind::III => {
                    let g = gamma.as_ref().unwrap();
                    next.insert(a.clone(), p.par(&q));
                    next.insert(c.clone(), r.par(&rest));
                    next.insert(e.unwrap().clone(), pcc.par(&pa).par(g));
                }
                ActionKind::IV => {
                    let g = gamma.as_ref().unwrap();
                    next.insert(a.clone(), p.par(&q).par(&r).par(&rest));
                    next.insert(c.clone(), Process::zero());
                    next.insert(e.unwrap().clone(), pa.par(g));
                }
            }
            out.insert(next);
        }
    }
    out
}

pub fn executable(s: &State, alpha: &ActionLabel) -> bool {
    !posts(s, alpha).is_empty()
}

/// Every payload formula mentioned by a capability in `s`.
fn payloads_in(s: &State) -> BTreeSet<Formula> {
    fn walk(p: &Process, out: &mut BTreeSet<Formula>) {
        for c in p.components() {
            if let Component::Sum(alts) = c {
                for alt in alts {
                    if let Some(f) = alt.cap.payload() {
                        out.insert(f.clone());
                    }
                    walk(&alt.cont, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for a in s.agents() {
        walk(s.get(a), &mut out);
    }
    out
}

/// Every label over distinct agents that could possibly apply at `s`.
pub fn candidate_labels(s: &State) -> Vec<ActionLabel> {
    let agents: Vec<AgentId> = s.agents().cloned().collect();
    let payloads = payloads_in(s);
    let mut out = vec![];
    for a in &agents {
        for c in agents.iter().filter(|c| *c != a) {
            for phi in &payloads {
                out.extend(ActionLabel::communicate(phi.clone(), a.clone(), c.clone()));
            }
            for e in agents.iter().filter(|e| *e != a && *e != c) {
                out.extend(ActionLabel::enter(a.clone(), c.clone(), e.clone()));
                out.extend(ActionLabel::exit(a.clone(), c.clone(), e.clone()));
                out.extend(ActionLabel::merge(a.clone(), c.clone(), e.clone()));
            }
        }
    }
    out
}

pub fn enabled(s: &State) -> BTreeSet<ActionLabel> {
    candidate_labels(s).into_iter().filter(|l| executable(s, l)).collect()
}

pub fn participates(b: &AgentId, s: &State, alpha: &ActionLabel) -> bool {
    (below_refl(s, alpha.executor_a(), b) || below_refl(s, alpha.executor_c(), b)) && executable(s, alpha)
}

/// `s ~_b t`: every agent in `b`'s reflexive subtree, in either state, is
/// assigned the same process.
pub fn state_equiv(b: &AgentId, s: &State, t: &State) -> bool {
    let subtree = |x: &State| -> BTreeSet<AgentId> { x.agents().filter(|y| below_refl(x, y, b)).cloned().collect() };
    let (ss, ts) = (subtree(s), subtree(t));
    ss == ts && ss.iter().all(|x| s.get(x) == t.get(x))
}

/// One step: either `b` takes part in neither action, or in both and they
/// are the same action.
pub fn step_equiv(b: &AgentId, s: &State, alpha: &ActionLabel, t: &State, beta: &ActionLabel) -> bool {
    match (participates(b, s, alpha), participates(b, t, beta)) {
        (false, false) => true,
        (true, true) => alpha == beta,
        _ => false,
    }
}

pub fn history_equiv(b: &AgentId, h: &History, g: &History) -> bool {
    h.size() == g.size()
        && h.states().iter().zip(g.states()).all(|(s, t)| state_equiv(b, s, t))
        && h.actions()
            .iter()
            .zip(g.actions())
            .enumerate()
            .all(|(i, (alpha, beta))| step_equiv(b, &h.states()[i], alpha, &g.states()[i], beta))
}

/// The universe's histories materialized, with successor lookup by label.
pub struct Materialized {
    pub histories: Vec<History>,
    pub roots: Vec<usize>,
    next: HashMap<(usize, ActionLabel), usize>,
    pub depth: usize,
}

impl Materialized {
    pub fn new(u: &Universe) -> Self {
        let histories: Vec<History> = u.ids().map(|h| u.history(h)).collect();
        let roots: Vec<usize> = u.ids().map(|h| root_of(u, h)).collect();
        let mut index: HashMap<(usize, Vec<ActionLabel>), usize> = HashMap::new();
        for (i, h) in histories.iter().enumerate() {
            index.insert((roots[i], h.actions().to_vec()), i);
        }
        let mut next = HashMap::new();
        for (i, h) in histories.iter().enumerate() {
            if let Some((last, init)) = h.actions().split_last() {
                let parent = index[&(roots[i], init.to_vec())];
                next.insert((parent, last.clone()), i);
            }
        }
        Materialized {
            histories,
            roots,
            next,
            depth: u.depth(),
        }
    }

    pub fn successor(&self, h: usize, alpha: &ActionLabel) -> Option<usize> {
        self.next.get(&(h, alpha.clone())).copied()
    }

    /// Truth of `phi` at `h`; boxes past the depth bound hold vacuously.
    pub fn eval(&self, h: usize, phi: &Formula) -> bool {
        let hist = &self.histories[h];
        match phi {
            Formula::SubagentPlus(a, b) => below_plus(hist.last(), a, b),
            Formula::Not(f) => !self.eval(h, f),
            Formula::And(f, g) => self.eval(h, f) && self.eval(h, g),
            Formula::Knows(a, f) => self.group_holds(h, std::slice::from_ref(a), f),
            Formula::DistKnows(group, f) => {
                let members: Vec<AgentId> = group.iter().cloned().collect();
                self.group_holds(h, &members, f)
            }
            Formula::Box(alpha, f) => match self.successor(h, alpha) {
                Some(n) => self.eval(n, f),
                None => true,
            },
        }
    }

    fn group_holds(&self, h: usize, members: &[AgentId], f: &Formula) -> bool {
        let hist = &self.histories[h];
        self.histories
            .iter()
            .enumerate()
            .filter(|(_, g)| members.iter().all(|m| history_equiv(m, hist, g)))
            .all(|(g, _)| self.eval(g, f))
    }
}

fn root_of(u: &Universe, mut h: HistoryId) -> usize {
    while let Some(p) = u.parent(h) {
        h = p;
    }
    h
}

/// Tally of an agreement run.
#[derive(Debug, Default)]
pub struct Agreement {
    pub models: usize,
    pub queries: usize,
    /// Non-initial histories seen, i.e. transitions exercised.
    pub steps: usize,
    pub mismatches: Vec<String>,
    pub mismatch_count: usize,
}

impl Agreement {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.queries += 1;
        self.mismatch_count += usize::from(!ok);
        if !ok && self.mismatches.len() < 20 {
            self.mismatches.push(what());
        }
    }
}

/// Compares the library against the oracle on `models` random models with at
/// most four agents, each explored to depth one or two.
pub fn agreement(seed: u64, models: usize) -> Agreement {
    agreement_with(seed, models, padel::Semantics::standard())
}

/// As [`agreement`], but the library runs under `sem`.
pub fn agreement_with(seed: u64, models: usize, sem: padel::Semantics) -> Agreement {
    use super::gen::{self, GenConfig};
    use padel::{enabled_actions, Checker, UniverseConfig};
    use rand::seq::SliceRandom;
    use rand::Rng;

    let mut rng = gen::rng(seed);
    let mut out = Agreement::default();
    let cfg = GenConfig::small();
    while out.models < models {
        let model = gen::model(&mut rng, &cfg);
        let depth = rng.gen_range(1..=2);
        let Ok(u) = Universe::generate(&model, UniverseConfig::new(depth).budget(3000).semantics(sem)) else {
            continue;
        };
        out.models += 1;
        out.steps += u.len() - u.slice(0).len();
        let agents = model.agents.clone();

        for s in u.states() {
            for a in &agents {
                for b in &agents {
                    out.check(s.subagent_iter(a, b) == below_plus(s, a, b), || format!("{a} <+ {b} in {s}"));
                    out.check(s.subagent_refl(a, b) == below_refl(s, a, b), || format!("{a} <=+ {b} in {s}"));
                }
            }
            let lib: BTreeSet<ActionLabel> = enabled_actions(s).into_iter().collect();
            let ora = enabled(s);
            out.check(lib == ora, || format!("enabled at {s}: {lib:?} vs {ora:?}"));
            let mut labels = candidate_labels(s);
            labels.shuffle(&mut rng);
            labels.truncate(12);
            labels.extend(ora.iter().cloned());
            for alpha in &labels {
                let want = posts(s, alpha);
                let got = sem.step(s, alpha);
                let ok = match &got {
                    Err(padel::TransitionError::NotExecutable(_)) => want.is_empty(),
                    Err(padel::TransitionError::InvalidPostState { .. }) => !want.is_empty(),
                    Ok(st) => {
                        let all: BTreeSet<BTreeMap<AgentId, Process>> = match &st.ambiguity {
                            Some(a) => a.post_states.iter().map(|t| t.assignment().clone()).collect(),
                            None => [st.state.assignment().clone()].into(),
                        };
                        all == want
                    }
                };
                out.check(ok, || format!("{alpha} at {s}"));
                for b in &agents {
                    out.check(
                        sem.participates(b, s, alpha) == participates(b, s, alpha),
                        || format!("{b} : {alpha} at {s}"),
                    );
                }
            }
        }

        let mat = Materialized::new(&u);
        for h in u.ids() {
            if u.at_max_depth(h) {
                continue;
            }
            let kids: BTreeSet<ActionLabel> = u.children(h).iter().filter_map(|&g| u.last_action(g).cloned()).collect();
            out.check(kids == enabled(u.last(h)), || format!("children of {}", u.path(h)));
            for &g in u.children(h) {
                let alpha = u.last_action(g).unwrap();
                out.check(posts(u.last(h), alpha).contains(u.last(g).assignment()), || {
                    format!("post-state of {}", u.path(g))
                });
            }
        }

        for a in &agents {
            for len in 0..=depth {
                let slice = u.slice(len);
                let pairs = if slice.len() <= 8 { slice.len() * slice.len() } else { 64 };
                for k in 0..pairs {
                    let (h, g) = if slice.len() <= 8 {
                        (slice[k / slice.len()], slice[k % slice.len()])
                    } else {
                        (*slice.choose(&mut rng).unwrap(), *slice.choose(&mut rng).unwrap())
                    };
                    let want = history_equiv(a, &mat.histories[h], &mat.histories[g]);
                    out.check(u.history_equiv(a, h, g) == want, || {
                        format!("{} ~{a} {} in model\n{model}", u.path(h), u.path(g))
                    });
                }
            }
        }

        let checker = Checker::new(&u);
        for _ in 0..4 {
            let phi = gen::formula(&mut rng, &agents, u.labels(), 2);
            let values = checker.eval(&phi);
            for h in u.ids() {
                let want = mat.eval(h, &phi);
                out.check((values[h] == padel::Truth::True) == want, || format!("{phi} at {}\n{model}", u.path(h)));
            }
        }
    }
    out
}
