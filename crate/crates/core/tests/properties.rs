mod common;

use common::gen::{self, GenConfig};
use padel::histories::history_equiv_direct;
use padel::{parse_formula, parse_model, serialize, state_equiv, Checker, Formula, Truth, Universe, UniverseConfig};
use proptest::prelude::*;

fn small_universe(seed: u64, guarded: bool) -> Option<Universe> {
    let mut cfg = GenConfig::small();
    cfg.guarded_refs = guarded;
    let m = gen::model(&mut gen::rng(seed), &cfg);
    Universe::generate(&m, UniverseConfig::new(2).budget(2000)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn model_text_round_trips(seed in any::<u64>()) {
        let m = gen::model(&mut gen::rng(seed), &GenConfig::syntax());
        let text = serialize(&m);
        prop_assert_eq!(parse_model(&text).unwrap(), m, "{}", text);
    }

    #[test]
    fn formula_text_round_trips(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let m = gen::model(&mut rng, &GenConfig::small());
        let phi = gen::formula(&mut rng, &m.agents, &[], 4);
        prop_assert_eq!(parse_formula(&phi.to_string(), &m.agent_set()).unwrap(), phi);
    }

    #[test]
    fn state_equivalence_is_symmetric(seed in any::<u64>(), guarded in any::<bool>()) {
        let Some(u) = small_universe(seed, guarded) else { return Ok(()) };
        for s in u.states() {
            for t in u.states() {
                for a in u.agents() {
                    prop_assert_eq!(state_equiv(a, s, t), state_equiv(a, t, s), "{} on {} / {}", a, s, t);
                }
            }
        }
    }

    #[test]
    fn history_equivalence_is_an_equivalence(seed in any::<u64>()) {
        let Some(u) = small_universe(seed, false) else { return Ok(()) };
        for a in u.agents() {
            for len in 0..=u.depth() {
                let slice = u.slice(len);
                for &h in slice {
                    prop_assert!(u.history_equiv(a, h, h));
                    for &g in slice {
                        let direct = history_equiv_direct(u.semantics(), a, &u.history(h), &u.history(g));
                        prop_assert_eq!(u.history_equiv(a, h, g), direct);
                        prop_assert_eq!(direct, history_equiv_direct(u.semantics(), a, &u.history(g), &u.history(h)));
                    }
                }
            }
        }
    }

    #[test]
    fn knowledge_is_veridical_and_pooling_helps(seed in any::<u64>()) {
        let Some(u) = small_universe(seed, false) else { return Ok(()) };
        let mut rng = gen::rng(seed ^ 0x5eed);
        let checker = Checker::new(&u);
        let agents = u.agents().to_vec();
        for _ in 0..5 {
            let p = gen::formula(&mut rng, &agents, u.labels(), 2);
            let a = agents[0].clone();
            let t = Formula::implies(Formula::knows(a.clone(), p.clone()), p.clone());
            prop_assert!(checker.valid_in_universe(&t).unwrap().valid);
            let pooled = Formula::implies(Formula::knows(a.clone(), p.clone()), Formula::dist_knows(agents.clone(), p.clone()));
            prop_assert!(checker.eval(&pooled).iter().all(|v| *v == Truth::True));
        }
    }
}
