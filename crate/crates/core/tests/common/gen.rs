//! Seeded random models and formulas.

use std::collections::BTreeMap;

use padel::syntax::{Capability, Component, Prefixed};
use padel::{validate_state, ActionLabel, AgentId, Formula, ModelFile, Process, State};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_agents: usize,
    pub max_initial: usize,
    pub max_formulas: usize,
    /// Agent names are drawn from this pool when set, otherwise invented.
    pub names: Option<Vec<&'static str>>,
    /// Allow agent references under a prefix.
    pub guarded_refs: bool,
    /// Payloads of communication capabilities: when small, sends and
    /// receives match more often.
    pub payload_pool: usize,
    /// Upper bound on dual capability pairs planted where they can fire.
    pub plants: usize,
}

impl GenConfig {
    /// Small models for semantic cross-checks.
    pub fn small() -> Self {
        GenConfig {
            max_agents: 4,
            max_initial: 2,
            max_formulas: 0,
            names: Some(vec!["A", "B", "C", "D"]),
            guarded_refs: false,
            payload_pool: 1,
            plants: 3,
        }
    }

    /// Broad syntax coverage for round trips.
    pub fn syntax() -> Self {
        GenConfig {
            max_agents: 6,
            max_initial: 3,
            max_formulas: 3,
            names: None,
            guarded_refs: true,
            payload_pool: 4,
            plants: 1,
        }
    }
}

const SYLLABLES: &[&str] = &["ka", "Lo", "mi", "X", "r2", "Zu", "t_", "Q"];

fn invent_name(rng: &mut Rng8, taken: &[AgentId]) -> AgentId {
    loop {
        let mut name = String::new();
        for _ in 0..rng.gen_range(1..=2) {
            name.push_str(SYLLABLES.choose(rng).unwrap());
        }
        if rng.gen_bool(0.2) {
            name.push('\'');
        }
        let id = AgentId::new(&name);
        if !taken.contains(&id) && padel::parser::parse_formula(&format!("{name} <+ {name}"), &[id.clone()].into()).is_ok() {
            return id;
        }
    }
}

/// A random formula; boxes prefer labels from `labels` when it is nonempty.
pub fn formula(rng: &mut Rng8, agents: &[AgentId], labels: &[ActionLabel], depth: usize) -> Formula {
    let atom = |rng: &mut Rng8| {
        let a = agents.choose(rng).unwrap().clone();
        let b = agents.choose(rng).unwrap().clone();
        Formula::sub_plus(a, b)
    };
    if depth == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..7) {
        0 | 1 => atom(rng),
        2 => Formula::not(formula(rng, agents, labels, depth - 1)),
        3 => Formula::and(formula(rng, agents, labels, depth - 1), formula(rng, agents, labels, depth - 1)),
        4 => Formula::knows(agents.choose(rng).unwrap().clone(), formula(rng, agents, labels, depth - 1)),
        5 => {
            let k = rng.gen_range(1..=agents.len().min(3));
            let group: Vec<AgentId> = agents.choose_multiple(rng, k).cloned().collect();
            Formula::dist_knows(group, formula(rng, agents, labels, depth - 1))
        }
        _ => match labels.choose(rng).filter(|_| rng.gen_bool(0.7)).cloned().or_else(|| label(rng, agents, &payloads(agents, 2))) {
            Some(alpha) => Formula::boxed(alpha, formula(rng, agents, labels, depth - 1)),
            None => atom(rng),
        },
    }
}

/// Fixed payload formulas `agents[0] <+ agents[i]`.
pub fn payloads(agents: &[AgentId], n: usize) -> Vec<Formula> {
    (0..n.max(1)).map(|i| Formula::sub_plus(agents[0].clone(), agents[(i + 1) % agents.len()].clone())).collect()
}

pub fn capability(rng: &mut Rng8, payloads: &[Formula]) -> Capability {
    match rng.gen_range(0..8) {
        0 => Capability::Recv(Box::new(payloads.choose(rng).unwrap().clone())),
        1 => Capability::Send(Box::new(payloads.choose(rng).unwrap().clone())),
        2 => Capability::Enter,
        3 => Capability::Accept,
        4 => Capability::Exit,
        5 => Capability::Expel,
        6 => Capability::MergePlus,
        _ => Capability::MergeMinus,
    }
}

/// A random label over distinct agents, or `None` when there are too few.
pub fn label(rng: &mut Rng8, agents: &[AgentId], payloads: &[Formula]) -> Option<ActionLabel> {
    let kind = rng.gen_range(0..4);
    let need = if kind == 0 { 2 } else { 3 };
    if agents.len() < need {
        return None;
    }
    let picked: Vec<AgentId> = agents.choose_multiple(rng, need).cloned().collect();
    let (a, c) = (picked[0].clone(), picked[1].clone());
    let e = picked.get(2).cloned();
    let label = match kind {
        0 => ActionLabel::communicate(payloads.choose(rng).unwrap().clone(), a, c),
        1 => ActionLabel::enter(a, c, e.unwrap()),
        2 => ActionLabel::exit(a, c, e.unwrap()),
        _ => ActionLabel::merge(a, c, e.unwrap()),
    };
    label.ok()
}

fn sum(rng: &mut Rng8, payloads: &[Formula], guarded: &mut Vec<AgentId>, depth: usize) -> Component {
    let n = rng.gen_range(1..=3);
    let alts = (0..n)
        .map(|_| {
            let cap = capability(rng, payloads);
            let cont = if depth > 0 && rng.gen_bool(0.4) {
                let mut parts = vec![sum(rng, payloads, guarded, depth - 1)];
                if rng.gen_bool(0.3) {
                    if let Some(x) = guarded.pop() {
                        parts.push(Component::Agent(x));
                    }
                }
                Process::from_components(parts)
            } else if rng.gen_bool(0.15) {
                guarded.pop().map_or_else(Process::zero, Process::agent)
            } else {
                Process::zero()
            };
            Prefixed::new(cap, cont)
        })
        .collect::<Vec<_>>();
    Process::sum(alts).components()[0].clone()
}

/// One valid state over `agents`.
pub fn state(rng: &mut Rng8, agents: &[AgentId], payloads: &[Formula], guarded_refs: bool, plants: usize) -> State {
    loop {
        let mut order = agents.to_vec();
        order.shuffle(rng);
        let mut children: BTreeMap<AgentId, Vec<AgentId>> = BTreeMap::new();
        let mut roots = vec![];
        for (i, a) in order.iter().enumerate() {
            if i == 0 || rng.gen_bool(0.35) {
                roots.push(a.clone());
            } else {
                let parent = order[rng.gen_range(0..i)].clone();
                children.entry(parent).or_default().push(a.clone());
            }
        }
        // roots other than the first may instead hide under a prefix
        let mut guarded: Vec<AgentId> = if guarded_refs {
            roots[1..].iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
        } else {
            vec![]
        };
        let parent_of: BTreeMap<AgentId, AgentId> =
            children.iter().flat_map(|(p, cs)| cs.iter().map(move |c| (c.clone(), p.clone()))).collect();
        let mut planted: BTreeMap<AgentId, Vec<Component>> = BTreeMap::new();
        for _ in 0..rng.gen_range(0..=plants) {
            if let Some((a, ca, c, cc)) = plant(rng, agents, &children, &parent_of, payloads) {
                let mut extra = |x: AgentId, cap: Capability, rng: &mut Rng8| {
                    let mut alts = vec![Prefixed::new(cap, Process::zero())];
                    if rng.gen_bool(0.3) {
                        alts.push(Prefixed::new(capability(rng, payloads), Process::zero()));
                    }
                    planted.entry(x).or_default().push(Process::sum(alts).components()[0].clone());
                };
                extra(a, ca, rng);
                extra(c, cc, rng);
            }
        }
        let mut assignment = BTreeMap::new();
        for a in agents {
            let mut parts: Vec<Component> =
                children.get(a).into_iter().flatten().map(|c| Component::Agent(c.clone())).collect();
            parts.extend(planted.remove(a).unwrap_or_default());
            for _ in 0..rng.gen_range(0..=2) {
                parts.push(sum(rng, payloads, &mut guarded, 1));
            }
            assignment.insert(a.clone(), Process::from_components(parts));
        }
        let set = agents.iter().cloned().collect();
        if let Ok(s) = validate_state(&set, assignment) {
            return s;
        }
    }
}

/// Two agents and dual capabilities positioned so the pair can fire.
fn plant(
    rng: &mut Rng8,
    agents: &[AgentId],
    children: &BTreeMap<AgentId, Vec<AgentId>>,
    parent_of: &BTreeMap<AgentId, AgentId>,
    payloads: &[Formula],
) -> Option<(AgentId, Capability, AgentId, Capability)> {
    match rng.gen_range(0..4) {
        0 => {
            let pair: Vec<&AgentId> = agents.choose_multiple(rng, 2).collect();
            let phi = Box::new(payloads.choose(rng)?.clone());
            Some((pair[0].clone(), Capability::Recv(phi.clone()), pair[1].clone(), Capability::Send(phi)))
        }
        2 => {
            // A inside C inside some E
            let (a, c) = parent_of
                .iter()
                .filter(|(c, _)| parent_of.contains_key(*c))
                .collect::<Vec<_>>()
                .choose(rng)
                .map(|(a, c)| ((*a).clone(), (*c).clone()))?;
            Some((a, Capability::Exit, c, Capability::Expel))
        }
        k => {
            // siblings under a common parent
            let groups: Vec<&Vec<AgentId>> = children.values().filter(|cs| cs.len() >= 2).collect();
            let pair: Vec<&AgentId> = groups.choose(rng)?.choose_multiple(rng, 2).collect();
            let (ca, cc) = if k == 1 {
                (Capability::Enter, Capability::Accept)
            } else {
                (Capability::MergePlus, Capability::MergeMinus)
            };
            Some((pair[0].clone(), ca, pair[1].clone(), cc))
        }
    }
}

pub fn model(rng: &mut Rng8, cfg: &GenConfig) -> ModelFile {
    let n = rng.gen_range(2..=cfg.max_agents);
    let agents: Vec<AgentId> = match &cfg.names {
        Some(pool) => pool[..n.min(pool.len())].iter().map(AgentId::new).collect(),
        None => {
            let mut v = vec![];
            for _ in 0..n {
                let id = invent_name(rng, &v);
                v.push(id);
            }
            v
        }
    };
    let pay = payloads(&agents, cfg.payload_pool);
    let initial_states = (0..rng.gen_range(1..=cfg.max_initial))
        .map(|i| (format!("s{i}"), state(rng, &agents, &pay, cfg.guarded_refs, cfg.plants)))
        .collect();
    let formulas = (0..rng.gen_range(0..=cfg.max_formulas))
        .map(|i| (format!("f{i}"), formula(rng, &agents, &[], 3)))
        .collect();
    ModelFile {
        agents,
        initial_states,
        formulas,
    }
}
