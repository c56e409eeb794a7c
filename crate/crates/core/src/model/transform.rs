//! Translations between the reward encodings.

use super::{OcSsg, Owner, RewardLocation, Ssg, Transition};
use crate::Rational;
use num_traits::One;

/// Reads counter deltas as transition rewards. The graph is unchanged.
pub fn oc_to_reward_ssg(game: &OcSsg) -> Ssg {
    game.as_reward_game().clone()
}

/// Moves transition rewards onto fresh random states: every `u -> v` with
/// reward `r` becomes `u -> aux -> v`, where `aux` has reward `r` and a
/// single probability-1 edge. Original states keep their indices and get
/// reward 0; auxiliary states follow in transition order.
pub fn transition_to_state_rewards(game: &Ssg) -> Ssg {
    assert_eq!(
        game.reward_location(),
        RewardLocation::Transitions,
        "game already carries state rewards"
    );
    let mut out = Ssg::new(RewardLocation::States);
    for st in game.states() {
        out.add_state(st.id.clone(), st.owner, Some(0)).expect("ids are unique");
    }
    for s in 0..game.len() {
        let mut succ = Vec::with_capacity(game.succ(s).len());
        for (k, t) in game.succ(s).iter().enumerate() {
            let mut id = format!("{}~{}", game.id(s), k);
            while game.state_index(&id).is_some() || out.state_index(&id).is_some() {
                id.push('~');
            }
            let aux = out
                .add_state(id, Owner::Random, Some(t.weight.unwrap_or(0)))
                .expect("fresh id");
            out.add_transition(aux, t.target, Some(Rational::one()), None).expect("in range");
            succ.push(Transition { target: aux, prob: t.prob.clone(), weight: None });
        }
        out.replace_transitions(s, succ);
    }
    out
}

/// Copies each state's reward onto all of its outgoing transitions.
pub fn state_to_transition_rewards(game: &Ssg) -> Ssg {
    if game.reward_location() == RewardLocation::Transitions {
        return game.clone();
    }
    let mut out = Ssg::new(RewardLocation::Transitions);
    for st in game.states() {
        out.add_state(st.id.clone(), st.owner, None).expect("ids are unique");
    }
    for s in 0..game.len() {
        let r = game.state(s).reward;
        let succ = game
            .succ(s)
            .iter()
            .map(|t| Transition { target: t.target, prob: t.prob.clone(), weight: r })
            .collect();
        out.replace_transitions(s, succ);
    }
    out
}
