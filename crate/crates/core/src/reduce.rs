//! Reductions from reachability games ("is the value of reaching `t` at
//! least 1/2?") to limit and termination objectives. Used to generate
//! instances with known answers.

use std::collections::BTreeSet;

use num_traits::One;
use thiserror::Error;

use crate::graph;
use crate::mdp;
use crate::model::{Direction, OcSsg, Owner, RewardLocation, Ssg, Transition};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("the two targets must differ")]
    SameTargets,
    #[error("from `{0}` some play avoids both targets with positive probability")]
    NotNormalized(String),
}

/// A reachability instance after normalisation, and the reduced game.
#[derive(Clone, Debug)]
pub struct Condon {
    /// The input with every state that cannot reach a target redirected
    /// to `t2`.
    pub normalized: Ssg,
    /// State rewards: `t` is -1, `t2` is +1, all others 0; `t` and `t2`
    /// belong to Max and move back to `s`.
    pub game: Ssg,
    pub s: usize,
    pub t: usize,
    pub t2: usize,
}

fn lookup(game: &Ssg, id: &str) -> Result<usize, ReduceError> {
    game.state_index(id).ok_or_else(|| ReduceError::UnknownState(id.to_string()))
}

/// Routes every state that cannot reach `{t, t2}` to `t2` and checks that
/// the targets are then reached with probability 1 under all strategies.
pub fn normalize(game: &Ssg, s: usize, t: usize, t2: usize) -> Result<Ssg, ReduceError> {
    if t == t2 {
        return Err(ReduceError::SameTargets);
    }
    let adj: Vec<Vec<usize>> = (0..game.len()).map(|v| game.succ(v).iter().map(|x| x.target).collect()).collect();
    let mut goal = vec![false; game.len()];
    goal[t] = true;
    goal[t2] = true;
    let live = graph::can_reach(&adj, &goal);
    let mut g = game.clone();
    for v in 0..game.len() {
        if !live[v] {
            let prob = (game.owner(v) == Owner::Random).then(Rational::one);
            g.replace_transitions(v, vec![Transition { target: t2, prob, weight: game.succ(v)[0].weight }]);
        }
    }
    // Both players cooperating to avoid the targets.
    let mut adversary = g.clone();
    for v in 0..g.len() {
        if g.owner(v) == Owner::Max {
            adversary.set_owner(v, Owner::Min);
        }
    }
    let values = mdp::solve_reachability(&adversary, &BTreeSet::from([t, t2]), Direction::Min)
        .expect("one-player model")
        .values;
    if !values[s].is_one() {
        return Err(ReduceError::NotNormalized(game.id(s).to_string()));
    }
    Ok(g)
}

/// Limit reduction: from `s` the LimInf=-inf value is 1 iff the value of
/// reaching `t` is at least 1/2 (else 0), and the LimInf=+inf value is 1
/// iff the value of reaching `t2` exceeds 1/2 (else 0).
pub fn condon_to_limit(game: &Ssg, s: &str, t: &str, t2: &str) -> Result<Condon, ReduceError> {
    let (s, t, t2) = (lookup(game, s)?, lookup(game, t)?, lookup(game, t2)?);
    let normalized = normalize(game, s, t, t2)?;
    let mut out = Ssg::new(RewardLocation::States);
    for v in 0..normalized.len() {
        let (owner, reward) = if v == t {
            (Owner::Max, -1)
        } else if v == t2 {
            (Owner::Max, 1)
        } else {
            (normalized.owner(v), 0)
        };
        out.add_state(normalized.id(v), owner, Some(reward)).expect("ids are unique");
    }
    for v in 0..normalized.len() {
        let succ = if v == t || v == t2 {
            vec![Transition { target: s, prob: None, weight: None }]
        } else {
            normalized.succ(v).iter().map(|x| Transition { target: x.target, prob: x.prob.clone(), weight: None }).collect()
        };
        out.replace_transitions(v, succ);
    }
    debug_assert!(out.validate().is_empty());
    Ok(Condon { normalized, game: out, s, t, t2 })
}

/// The limit reduction read as a counter game started from `s` with
/// counter `|V|`: the termination value is 1 iff reaching `t` has value
/// at least 1/2.
#[derive(Clone, Debug)]
pub struct CondonTerm {
    pub condon: Condon,
    pub game: OcSsg,
    pub s: usize,
    pub j: u64,
}

pub fn condon_to_termination(game: &Ssg, s: &str, t: &str, t2: &str) -> Result<CondonTerm, ReduceError> {
    let condon = condon_to_limit(game, s, t, t2)?;
    let g = &condon.game;
    let mut oc = OcSsg::new();
    for v in 0..g.len() {
        oc.add_state(g.id(v), g.owner(v)).expect("ids are unique");
    }
    for v in 0..g.len() {
        for (k, x) in g.succ(v).iter().enumerate() {
            oc.add_transition(v, x.target, x.prob.clone(), g.step_reward(v, k) as i8).expect("in range");
        }
    }
    let j = oc.len() as u64;
    Ok(CondonTerm { s: condon.s, condon, game: oc, j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LimitObjective;
    use crate::ssg::{solve_goal, solve_limit_ssg, Goal};
    use crate::termination::decide_term_one;
    use crate::testutil::{q, ssg};

    fn coin(p: &str, rest: &str) -> Ssg {
        ssg(&format!(
            "ssg rewards=states\nstate s owner=rand reward=0\nstate t owner=rand reward=0\nstate u owner=rand reward=0\ntrans s -> t p={p}\ntrans s -> u p={rest}\ntrans t -> t p=1\ntrans u -> u p=1\n"
        ))
    }

    fn limit_values(c: &Condon) -> (Rational, Rational) {
        let a = solve_limit_ssg(&c.game, LimitObjective::LimInfEqMinusInf).result.values[c.s].clone();
        let b = solve_limit_ssg(&c.game, LimitObjective::LimInfEqPlusInf).result.values[c.s].clone();
        (a, b)
    }

    #[test]
    fn fair_coin() {
        let c = condon_to_limit(&coin("1/2", "1/2"), "s", "t", "u").unwrap();
        assert_eq!(limit_values(&c), (q(1, 1), q(0, 1)));
        let term = condon_to_termination(&coin("1/2", "1/2"), "s", "t", "u").unwrap();
        assert_eq!(term.j, 3);
        assert!(decide_term_one(&term.game, term.s, term.j).unwrap().value_one);
    }

    #[test]
    fn one_third_coin() {
        let c = condon_to_limit(&coin("1/3", "2/3"), "s", "t", "u").unwrap();
        assert_eq!(limit_values(&c), (q(0, 1), q(1, 1)));
        let term = condon_to_termination(&coin("1/3", "2/3"), "s", "t", "u").unwrap();
        assert!(!decide_term_one(&term.game, term.s, term.j).unwrap().value_one);
    }

    #[test]
    fn deterministic_targets() {
        let g = ssg("ssg rewards=states\nstate s owner=max reward=0\nstate t owner=rand reward=0\nstate u owner=rand reward=0\ntrans s -> t\ntrans t -> t p=1\ntrans u -> u p=1\n");
        let c = condon_to_limit(&g, "s", "t", "u").unwrap();
        assert_eq!(limit_values(&c), (q(1, 1), q(0, 1)));
        let g = ssg("ssg rewards=states\nstate s owner=max reward=0\nstate t owner=rand reward=0\nstate u owner=rand reward=0\ntrans s -> u\ntrans t -> t p=1\ntrans u -> u p=1\n");
        let term = condon_to_termination(&g, "s", "t", "u").unwrap();
        assert!(!decide_term_one(&term.game, term.s, term.j).unwrap().value_one);
    }

    #[test]
    fn dead_ends_go_to_the_second_target() {
        let g = ssg("ssg rewards=states\nstate s owner=rand reward=0\nstate t owner=rand reward=0\nstate u owner=rand reward=0\nstate d owner=rand reward=0\ntrans s -> t p=1/2\ntrans s -> d p=1/2\ntrans t -> t p=1\ntrans u -> u p=1\ntrans d -> d p=1\n");
        let c = condon_to_limit(&g, "s", "t", "u").unwrap();
        let r = solve_goal(&c.normalized, &Goal::Reach(BTreeSet::from([2]))).unwrap();
        assert_eq!(r.result.values[0], q(1, 2));
    }

    #[test]
    fn avoiding_cycle_is_rejected() {
        let g = ssg("ssg rewards=states\nstate s owner=min reward=0\nstate t owner=rand reward=0\nstate u owner=rand reward=0\ntrans s -> s\ntrans s -> t\ntrans t -> t p=1\ntrans u -> u p=1\n");
        assert_eq!(condon_to_limit(&g, "s", "t", "u").unwrap_err(), ReduceError::NotNormalized("s".into()));
        assert_eq!(condon_to_limit(&g, "s", "t", "t").unwrap_err(), ReduceError::SameTargets);
    }
}
