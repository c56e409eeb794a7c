mod common;

use num_traits::{One, Zero};
use ocssg_core::model::{oc_to_reward_ssg, state_to_transition_rewards, transition_to_state_rewards};
use ocssg_core::oracle::{self, Profile, SimConfig};
use ocssg_core::ssg::solve_limit_ssg;
use ocssg_core::termination::{decide_term_one, decide_term_zero};
use ocssg_core::{parse_model, LimitObjective, Model, OcSsg, Owner, Rational, Ssg};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn game(seed: u64, n: usize) -> (Vec<common::StateSpec>, Ssg) {
    let spec = common::random_spec(&mut ChaCha8Rng::seed_from_u64(seed), n);
    let g = common::build(&spec);
    (spec, g)
}

fn objective() -> impl Strategy<Value = LimitObjective> {
    prop::sample::select(LimitObjective::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), n in 1usize..=5) {
        let (spec, g) = game(seed, n);
        let text = g.to_string();
        let Model::Ssg(back) = parse_model(&text).unwrap() else { panic!("kind changed") };
        prop_assert_eq!(back.to_string(), text);
        let oc = common::to_oc(&spec);
        let text = oc.to_string();
        let Model::OcSsg(back) = parse_model(&text).unwrap() else { panic!("kind changed") };
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn values_are_probabilities(seed in any::<u64>(), n in 1usize..=4, obj in objective()) {
        let (_, g) = game(seed, n);
        for v in solve_limit_ssg(&g, obj).result.values {
            prop_assert!(v >= Rational::zero() && v <= Rational::one());
        }
    }

    #[test]
    fn swapped_complement_adds_up_to_one(seed in any::<u64>(), n in 1usize..=4, obj in objective()) {
        // Determinacy: Max's chance of `obj` is one minus what Max, playing
        // Min's states, gets for the complement.
        let (mut spec, g) = game(seed, n);
        for st in &mut spec {
            st.0 = match st.0 {
                Owner::Max => Owner::Min,
                Owner::Min => Owner::Max,
                Owner::Random => Owner::Random,
            };
        }
        let a = solve_limit_ssg(&g, obj).result.values;
        let b = solve_limit_ssg(&common::build(&spec), obj.complement()).result.values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x + y, Rational::one());
        }
    }

    #[test]
    fn reward_encodings_agree(seed in any::<u64>(), n in 1usize..=4, obj in objective()) {
        let (_, g) = game(seed, n);
        let t = state_to_transition_rewards(&g);
        let s = transition_to_state_rewards(&t);
        let base = oracle::enumerate_solve(&g, obj).unwrap().values;
        prop_assert_eq!(&oracle::enumerate_solve(&t, obj).unwrap().values, &base);
        prop_assert_eq!(&oracle::enumerate_solve(&s, obj).unwrap().values[..g.len()], &base[..]);
    }

    #[test]
    fn counter_view_keeps_the_graph(seed in any::<u64>(), n in 1usize..=5) {
        let (spec, _) = game(seed, n);
        let oc = common::to_oc(&spec);
        let g = oc_to_reward_ssg(&oc);
        prop_assert_eq!(g.len(), oc.len());
        prop_assert_eq!(g.num_transitions(), oc.num_transitions());
    }

    #[test]
    fn extra_edges_help_their_owner(seed in any::<u64>(), n in 2usize..=4, obj in objective(), pick in any::<prop::sample::Index>(), to in any::<prop::sample::Index>()) {
        let (mut spec, g) = game(seed, n);
        let controlled: Vec<usize> = (0..n).filter(|&v| spec[v].0 != Owner::Random).collect();
        prop_assume!(!controlled.is_empty());
        let v = controlled[pick.index(controlled.len())];
        let free: Vec<usize> = (0..n).filter(|t| spec[v].2.iter().all(|e| e.0 != *t)).collect();
        prop_assume!(!free.is_empty());
        spec[v].2.push((free[to.index(free.len())], 0));
        let h = common::build(&spec);
        let before = solve_limit_ssg(&g, obj).result.values;
        let after = solve_limit_ssg(&h, obj).result.values;
        for (b, a) in before.iter().zip(&after) {
            match spec[v].0 {
                Owner::Max => prop_assert!(a >= b),
                _ => prop_assert!(a <= b),
            }
        }
    }

    #[test]
    fn termination_decisions_are_consistent(seed in any::<u64>(), n in 1usize..=4) {
        let (spec, _) = game(seed, n);
        let oc: OcSsg = common::to_oc(&spec);
        for s in 0..n {
            let mut prev = true;
            for j in 1..=(n as u64 + 1) {
                let one = decide_term_one(&oc, s, j).unwrap().value_one;
                let zero = decide_term_zero(&oc, s, j).unwrap().value_zero;
                prop_assert!(!(one && zero));
                // Termination from a higher counter passes through the lower one.
                prop_assert!(prev || !one);
                prev = one;
            }
        }
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), n in 1usize..=4) {
        let (_, g) = game(seed, n);
        let r = solve_limit_ssg(&g, LimitObjective::MeanGt);
        let profile = Profile {
            max: Some(oracle::PlayerStrategy::Memoryless(r.max_witness)),
            min: Some(oracle::PlayerStrategy::Memoryless(r.min_witness)),
        };
        let cfg = SimConfig::new(200, 20, seed);
        prop_assert_eq!(oracle::simulate(&g, &profile, 0, &cfg).unwrap(), oracle::simulate(&g, &profile, 0, &cfg).unwrap());
    }
}
