//! One-player solvers: reachability, end components, expected mean payoff,
//! the positive-mean search loop, energy credits, almost-sure reachability
//! and limit objectives.
//!
//! A "one-player" model here is any game in which at most one of the two
//! players owns states. The states of that player are the controlled ones.

mod energy;
mod limit;
mod mean;
mod mec;
mod reach;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::chain::{self, MarkovChain};
use crate::model::{Direction, Owner, Player, PureMemorylessStrategy, RewardLocation, SolveResult, Ssg, Transition};
use crate::Rational;

pub use energy::{energy_min_credit, CreditMap};
pub use limit::{qualitative_limit, quantitative_limit, Qualitative};
pub use mean::{expected_mean_payoff, procedure_mp, MeanPayoff, MpAnswer};
pub use mec::{mec_decompose, Mec};
pub use reach::{almost_sure_reach, AlmostSure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MdpError {
    #[error("both players own states; fix one player's strategy first")]
    TwoPlayers,
    #[error("unknown state index {0}")]
    NoSuchState(usize),
}

/// The player owning the controlled states, or `None` when the model is a
/// Markov chain.
pub fn controller(game: &Ssg) -> Result<Option<Player>, MdpError> {
    match (game.has_owner(Owner::Max), game.has_owner(Owner::Min)) {
        (true, true) => Err(MdpError::TwoPlayers),
        (true, false) => Ok(Some(Player::Max)),
        (false, true) => Ok(Some(Player::Min)),
        (false, false) => Ok(None),
    }
}

pub(crate) fn is_controlled(game: &Ssg, s: usize) -> bool {
    game.owner(s) != Owner::Random
}

pub(crate) fn to_strategy(game: &Ssg, choices: Vec<Option<usize>>) -> PureMemorylessStrategy {
    let player = controller(game).ok().flatten().unwrap_or(Player::Max);
    PureMemorylessStrategy::new(player, choices)
}

pub(crate) fn mask(n: usize, set: &BTreeSet<usize>) -> Vec<bool> {
    let mut m = vec![false; n];
    for &s in set {
        m[s] = true;
    }
    m
}

pub(crate) fn set_of(mask: &[bool]) -> BTreeSet<usize> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// The sub-model on `members` (sorted) where controlled state `members[i]`
/// keeps only the transitions in `allowed[i]`; random states keep all of
/// theirs, which must stay inside. Rewards move onto transitions.
pub(crate) fn restrict(game: &Ssg, members: &[usize], allowed: &[Vec<usize>]) -> Ssg {
    let mut sub = Ssg::new(RewardLocation::Transitions);
    for &v in members {
        sub.add_state(game.id(v), game.owner(v), None).expect("distinct ids");
    }
    for (i, &v) in members.iter().enumerate() {
        let succ = allowed[i]
            .iter()
            .map(|&k| {
                let t = &game.succ(v)[k];
                Transition {
                    target: members.binary_search(&t.target).expect("edge stays inside"),
                    prob: t.prob.clone(),
                    weight: Some(game.step_reward(v, k) as i8),
                }
            })
            .collect();
        sub.replace_transitions(i, succ);
    }
    sub
}

/// Optimal probability of reaching `target`, with a pure memoryless
/// optimal strategy for the controlling player.
pub fn solve_reachability(
    game: &Ssg,
    target: &BTreeSet<usize>,
    direction: Direction,
) -> Result<SolveResult, MdpError> {
    controller(game)?;
    if let Some(&s) = target.iter().find(|&&s| s >= game.len()) {
        return Err(MdpError::NoSuchState(s));
    }
    let (values, choices) = reach_policy_iteration(game, &mask(game.len(), target), direction);
    let witness = to_strategy(game, choices);
    Ok(match witness.player {
        Player::Max => SolveResult::new(values, Some(witness), None),
        Player::Min => SolveResult::new(values, None, Some(witness)),
    })
}

/// States from which the controller can stay out of `target` forever.
fn sure_avoid(game: &Ssg, target: &[bool]) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = game.len();
    let mut safe: Vec<bool> = target.iter().map(|t| !t).collect();
    loop {
        let mut changed = false;
        for v in 0..n {
            if !safe[v] {
                continue;
            }
            let ok = if is_controlled(game, v) {
                game.succ(v).iter().any(|t| safe[t.target])
            } else {
                game.succ(v).iter().all(|t| safe[t.target])
            };
            if !ok {
                safe[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let stay = (0..n)
        .map(|v| {
            (safe[v] && is_controlled(game, v))
                .then(|| game.succ(v).iter().position(|t| safe[t.target]).expect("safe successor"))
        })
        .collect();
    (safe, stay)
}

/// Policy iteration with exact evaluation. Switches only on strict
/// improvement, to the smallest best index.
pub(crate) fn reach_policy_iteration(
    game: &Ssg,
    target: &[bool],
    direction: Direction,
) -> (Vec<Rational>, Vec<Option<usize>>) {
    let n = game.len();
    let mut choice: Vec<Option<usize>> = (0..n).map(|v| is_controlled(game, v).then_some(0)).collect();
    let mut frozen = vec![false; n];
    if direction == Direction::Min {
        // Value-0 states are exactly those where the target can be avoided
        // surely; fixing them first leaves a system with a unique solution.
        let (safe, stay) = sure_avoid(game, target);
        for v in 0..n {
            if safe[v] {
                frozen[v] = true;
                if stay[v].is_some() {
                    choice[v] = stay[v];
                }
            }
        }
    }
    loop {
        let chain = MarkovChain::induced(game, &choice).expect("total policy");
        let values = chain::reach_probabilities(&chain, target);
        let mut improved = false;
        for v in 0..n {
            if frozen[v] || target[v] || !is_controlled(game, v) {
                continue;
            }
            let cur = choice[v].expect("controlled");
            let val = |k: usize| &values[game.succ(v)[k].target];
            let ks = 0..game.succ(v).len();
            let best = match direction {
                Direction::Max => ks.map(val).max(),
                Direction::Min => ks.map(val).min(),
            }
            .expect("successor");
            if best != val(cur) {
                choice[v] = (0..game.succ(v).len()).find(|&k| val(k) == best);
                improved = true;
            }
        }
        if !improved {
            return (values, choice);
        }
    }
}

/// Chain value check used by tests and certificates: the exact value of
/// `choices` for a reachability target.
pub fn evaluate_reach(game: &Ssg, choices: &[Option<usize>], target: &BTreeSet<usize>) -> Vec<Rational> {
    let chain = MarkovChain::induced(game, choices).expect("total policy");
    chain::reach_probabilities(&chain, &mask(game.len(), target))
}
