use std::collections::HashSet;

use num_traits::{One, Signed};

use crate::chain::{self, MarkovChain};
use crate::model::{Direction, Owner, PureMemorylessStrategy, RewardLocation, Ssg, Transition};
use crate::Rational;

use super::{controller, is_controlled, reach_policy_iteration, to_strategy, MdpError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanPayoff {
    pub gain: Vec<Rational>,
    pub bias: Vec<Rational>,
    pub strategy: PureMemorylessStrategy,
}

/// Optimal expected mean payoff by multichain policy iteration: improve
/// the gain first, then the bias among gain-optimal transitions. The current
/// transition is kept whenever it is among the best.
pub fn expected_mean_payoff(game: &Ssg, direction: Direction) -> Result<MeanPayoff, MdpError> {
    controller(game)?;
    let (gain, bias, choices) = mean_policy_iteration(game, direction);
    Ok(MeanPayoff { gain, bias, strategy: to_strategy(game, choices) })
}

pub(crate) fn mean_policy_iteration(
    game: &Ssg,
    direction: Direction,
) -> (Vec<Rational>, Vec<Rational>, Vec<Option<usize>>) {
    let n = game.len();
    let sign: i64 = match direction {
        Direction::Max => 1,
        Direction::Min => -1,
    };
    let mut choice: Vec<Option<usize>> = (0..n).map(|v| is_controlled(game, v).then_some(0)).collect();
    let mut seen = HashSet::new();
    loop {
        let mut chain = MarkovChain::induced(game, &choice).expect("total policy");
        for steps in &mut chain.succ {
            for x in steps {
                x.reward *= sign;
            }
        }
        let (g, h) = chain::gain_bias(&chain);
        seen.insert(choice.clone());

        let mut changed = false;
        for v in (0..n).filter(|&v| is_controlled(game, v)) {
            let cur = choice[v].expect("controlled");
            let gt = |k: usize| &g[game.succ(v)[k].target];
            let best = (0..game.succ(v).len()).map(gt).max().expect("successor");
            if best > gt(cur) {
                choice[v] = (0..game.succ(v).len()).find(|&k| gt(k) == best);
                changed = true;
            }
        }
        if !changed {
            for v in (0..n).filter(|&v| is_controlled(game, v)) {
                let cur = choice[v].expect("controlled");
                let gcur = &g[game.succ(v)[cur].target];
                let val = |k: usize| {
                    Rational::from_integer((sign * game.step_reward(v, k)).into()) + &h[game.succ(v)[k].target]
                };
                let cands: Vec<usize> =
                    (0..game.succ(v).len()).filter(|&k| &g[game.succ(v)[k].target] == gcur).collect();
                let best = cands.iter().map(|&k| val(k)).max().expect("current is a candidate");
                if best > val(cur) {
                    choice[v] = cands.into_iter().find(|&k| val(k) == best);
                    changed = true;
                }
            }
        }
        if !changed || seen.contains(&choice) {
            debug_assert!(!changed, "mean-payoff policy iteration revisited a policy");
            let s = Rational::from_integer(sign.into());
            return (
                g.into_iter().map(|x| x * &s).collect(),
                h.into_iter().map(|x| x * &s).collect(),
                choice,
            );
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MpAnswer {
    No,
    /// A strategy under which mean payoff is positive almost surely from the
    /// queried state.
    Yes(PureMemorylessStrategy),
}

/// Decides whether the controller can make the mean payoff positive with
/// probability 1 from `s`, by repeatedly locating a positive-drift bottom
/// component of a gain-optimal strategy and cutting away everything that
/// reaches it (or an already cut state) almost surely.
pub fn procedure_mp(game: &Ssg, s: usize) -> Result<MpAnswer, MdpError> {
    controller(game)?;
    let n = game.len();
    if s >= n {
        return Err(MdpError::NoSuchState(s));
    }
    let mut cut = vec![false; n];
    let mut sigma: Vec<Option<usize>> = (0..n).map(|v| is_controlled(game, v).then_some(0)).collect();

    loop {
        let work = Working::build(game, &cut);
        let ls = work.local[s].expect("query state is not cut");
        let (gain, _, sigma_mp) = mean_policy_iteration(&work.game, Direction::Max);
        if !gain[ls].is_positive() {
            return Ok(MpAnswer::No);
        }
        let chain = MarkovChain::induced(&work.game, &sigma_mp).expect("total policy");
        let reach = crate::graph::reachable_from(&chain.adjacency(), &[ls]);
        let c = chain::analyze_all(&chain)
            .into_iter()
            .find(|an| an.mean_payoff.is_positive() && reach[an.members[0]])
            .expect("positive gain implies a positive reachable component");

        let mut target = vec![false; work.game.len()];
        for &v in &c.members {
            target[v] = true;
        }
        target[work.z] = true;
        let (vals, sigma_c) = reach_policy_iteration(&work.game, &target, Direction::Max);

        for lv in 0..work.z {
            if !vals[lv].is_one() {
                continue;
            }
            let v = work.orig[lv];
            cut[v] = true;
            if is_controlled(game, v) {
                let local_choice = if c.members.binary_search(&lv).is_ok() { sigma_mp[lv] } else { sigma_c[lv] };
                sigma[v] = Some(work.edge[lv][local_choice.expect("controlled")]);
            }
        }
        if cut[s] {
            return Ok(MpAnswer::Yes(to_strategy(game, sigma)));
        }
    }
}

/// The uncut part of the game plus an absorbing zero-reward state `z` that
/// receives the random transitions into cut states.
struct Working {
    game: Ssg,
    orig: Vec<usize>,
    local: Vec<Option<usize>>,
    /// Local transition index to original transition index.
    edge: Vec<Vec<usize>>,
    z: usize,
}

impl Working {
    fn build(game: &Ssg, cut: &[bool]) -> Self {
        let n = game.len();
        let orig: Vec<usize> = (0..n).filter(|&v| !cut[v]).collect();
        let mut local = vec![None; n];
        for (i, &v) in orig.iter().enumerate() {
            local[v] = Some(i);
        }
        let mut w = Ssg::new(RewardLocation::Transitions);
        for &v in &orig {
            w.add_state(game.id(v), game.owner(v), None).expect("distinct ids");
        }
        let mut zid = String::from("z");
        while game.state_index(&zid).is_some() {
            zid.push('\'');
        }
        let z = w.add_state(zid, Owner::Random, None).expect("fresh id");
        w.add_transition(z, z, Some(Rational::one()), Some(0)).expect("in range");

        let mut edge = Vec::with_capacity(orig.len());
        for (i, &v) in orig.iter().enumerate() {
            let mut succ = Vec::new();
            let mut map = Vec::new();
            for (k, t) in game.succ(v).iter().enumerate() {
                let target = match local[t.target] {
                    Some(lt) => lt,
                    None if is_controlled(game, v) => continue,
                    None => z,
                };
                succ.push(Transition {
                    target,
                    prob: t.prob.clone(),
                    weight: Some(game.step_reward(v, k) as i8),
                });
                map.push(k);
            }
            assert!(!succ.is_empty(), "uncut controlled state keeps an uncut successor");
            w.replace_transitions(i, succ);
            edge.push(map);
        }
        Working { game: w, orig, local, edge, z }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LimitObjective;
    use crate::testutil::{q, ssg};

    #[test]
    fn self_loop_gain() {
        let g = ssg("ssg rewards=states\nstate s owner=rand reward=1\ntrans s -> s p=1/1\n");
        let m = expected_mean_payoff(&g, Direction::Max).unwrap();
        assert_eq!(m.gain, vec![q(1, 1)]);
    }

    const PLUS_MINUS: &str = "ssg rewards=transitions
state m owner=max
trans m -> m reward=-1
trans m -> m reward=1
";

    #[test]
    fn max_picks_positive_loop() {
        let g = ssg(PLUS_MINUS);
        let m = expected_mean_payoff(&g, Direction::Max).unwrap();
        assert_eq!(m.gain, vec![q(1, 1)]);
        assert_eq!(m.strategy.choice(0), Some(1));
        let m = expected_mean_payoff(&g, Direction::Min).unwrap();
        assert_eq!(m.gain, vec![q(-1, 1)]);
        assert_eq!(procedure_mp(&g, 0).unwrap(), MpAnswer::Yes(PureMemorylessStrategy::new(crate::Player::Max, vec![Some(1)])));
    }

    #[test]
    fn zero_drift_cycle_with_idle_option() {
        // m -> r (0) or m -> m (0); r -> m with +1 or -1.
        let g = ssg("ssg rewards=transitions\nstate m owner=max\nstate r owner=rand\ntrans m -> r reward=0\ntrans m -> m reward=0\ntrans r -> m p=1/2 reward=1\ntrans r -> m p=1/2 reward=-1\n");
        let m = expected_mean_payoff(&g, Direction::Max).unwrap();
        assert_eq!(m.gain, vec![q(0, 1), q(0, 1)]);
    }

    #[test]
    fn nonpositive_rewards_answer_no() {
        let g = ssg("ssg rewards=states\nstate m owner=max reward=0\nstate a owner=rand reward=-1\ntrans m -> a\ntrans m -> m\ntrans a -> m p=1/1\n");
        assert_eq!(procedure_mp(&g, 0).unwrap(), MpAnswer::No);
    }

    #[test]
    fn half_chance_of_positive_component_is_no() {
        let g = ssg("ssg rewards=states\nstate r owner=rand reward=0\nstate u owner=rand reward=1\nstate d owner=max reward=-1\nstate e owner=max reward=0\ntrans r -> u p=1/2\ntrans r -> d p=1/2\ntrans u -> u p=1/1\ntrans d -> d\ntrans d -> e\ntrans e -> d\n");
        assert_eq!(procedure_mp(&g, 0).unwrap(), MpAnswer::No);
        assert!(matches!(procedure_mp(&g, 1).unwrap(), MpAnswer::Yes(_)));
    }

    #[test]
    fn two_positive_components_need_the_cut_state() {
        // Needs the previously cut region as a target, not only the newest
        // component: r splits between two separate +1 loops.
        let g = ssg("ssg rewards=states\nstate r owner=rand reward=0\nstate a owner=max reward=1\nstate b owner=max reward=1\ntrans r -> a p=1/2\ntrans r -> b p=1/2\ntrans a -> a\ntrans b -> b\n");
        let MpAnswer::Yes(sigma) = procedure_mp(&g, 0).unwrap() else { panic!("expected yes") };
        let chain = MarkovChain::induced(&g, sigma.choices()).unwrap();
        assert_eq!(chain::chain_tail_value(&chain, LimitObjective::MeanGt)[0], q(1, 1));
    }
}
