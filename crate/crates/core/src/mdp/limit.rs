use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{One, Signed};

use crate::model::{Direction, LimitObjective, Player, PureMemorylessStrategy, SolveResult, Ssg};
use crate::Rational;

use super::mean::mean_policy_iteration;
use super::mec::{mec_decompose, mecs_within, Mec};
use super::{
    controller, energy_min_credit, is_controlled, reach_policy_iteration, restrict, set_of, to_strategy,
    almost_sure_reach, MdpError,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qualitative {
    /// States with value 1.
    pub winning: BTreeSet<usize>,
    /// Optimal for the controller from every state.
    pub witness: PureMemorylessStrategy,
}

/// The value-1 set of a limit objective in a one-player model, with a
/// pure memoryless optimal strategy.
pub fn qualitative_limit(game: &Ssg, obj: LimitObjective, direction: Direction) -> Result<Qualitative, MdpError> {
    let player = controller(game)?;
    let n = game.len();
    let (region, choices) = match direction {
        Direction::Max => maximizing_region(game, obj),
        Direction::Min => maximizing_region(game, obj.complement()),
    };
    let winning = match direction {
        Direction::Max => {
            almost_sure_reach(game, &set_of(&region), player.unwrap_or(Player::Max)).set
        }
        Direction::Min => {
            // Value 1 for the complement-minimiser means the maximiser of the
            // complement cannot reach its region at all.
            let can = crate::graph::can_reach(&adjacency(game), &region);
            (0..n).filter(|&v| !can[v]).collect()
        }
    };
    let (_, witness) = stitched(game, &region, choices);
    Ok(Qualitative { winning, witness })
}

/// Exact values of a limit objective in a one-player model: the optimal
/// probability of reaching the value-1 region.
pub fn quantitative_limit(game: &Ssg, obj: LimitObjective, direction: Direction) -> Result<SolveResult, MdpError> {
    controller(game)?;
    let (region, choices) = match direction {
        Direction::Max => maximizing_region(game, obj),
        Direction::Min => maximizing_region(game, obj.complement()),
    };
    let (values, witness) = stitched(game, &region, choices);
    let values = match direction {
        Direction::Max => values,
        Direction::Min => values.into_iter().map(|v| Rational::one() - v).collect(),
    };
    Ok(match witness.player {
        Player::Max => SolveResult::new(values, Some(witness), None),
        Player::Min => SolveResult::new(values, None, Some(witness)),
    })
}

fn adjacency(game: &Ssg) -> Vec<Vec<usize>> {
    (0..game.len()).map(|v| game.succ(v).iter().map(|t| t.target).collect()).collect()
}

/// Maximum reach probability of `region`, and the strategy playing
/// `region_choice` inside the region and the reaching strategy elsewhere.
fn stitched(game: &Ssg, region: &[bool], region_choice: Vec<Option<usize>>) -> (Vec<Rational>, PureMemorylessStrategy) {
    let (values, reach) = reach_policy_iteration(game, region, Direction::Max);
    let choices = (0..game.len())
        .map(|v| {
            if !is_controlled(game, v) {
                None
            } else if region[v] {
                region_choice[v].or(Some(0))
            } else {
                reach[v]
            }
        })
        .collect();
    (values, to_strategy(game, choices))
}

/// A sub-model together with the map back to its parent.
struct Sub {
    game: Ssg,
    members: Vec<usize>,
    /// Local transition index to parent transition index.
    edge: Vec<Vec<usize>>,
}

impl Sub {
    fn new(parent: &Ssg, members: &[usize], allowed: &[Vec<usize>]) -> Self {
        Sub { game: restrict(parent, members, allowed), members: members.to_vec(), edge: allowed.to_vec() }
    }

    fn of_mec(parent: &Ssg, mec: &Mec) -> Self {
        Sub::new(parent, &mec.members, &mec.allowed)
    }

    /// Writes local choices into a parent-indexed choice vector.
    fn export(&self, local: &[Option<usize>], out: &mut [Option<usize>]) {
        for (i, &v) in self.members.iter().enumerate() {
            if let Some(k) = local[i] {
                out[v] = Some(self.edge[i][k]);
            }
        }
    }
}

/// The union of the end-component regions from which the maximiser wins
/// `obj` with probability 1 by staying there, and a strategy doing so.
/// The value of `obj` is the optimal probability of reaching this region.
fn maximizing_region(game: &Ssg, obj: LimitObjective) -> (Vec<bool>, Vec<Option<usize>>) {
    use LimitObjective::*;
    let n = game.len();
    let mut region = vec![false; n];
    let mut choice: Vec<Option<usize>> = vec![None; n];

    match obj {
        MeanGt | LimInfEqPlusInf | MeanLeq | LimInfLtPlusInf => {
            let (dir, wins): (Direction, fn(&Rational) -> bool) = match obj {
                MeanGt | LimInfEqPlusInf => (Direction::Max, |g| g.is_positive()),
                _ => (Direction::Min, |g| !g.is_positive()),
            };
            for mec in mec_decompose(game) {
                let sub = Sub::of_mec(game, &mec);
                let (g, _, local) = mean_policy_iteration(&sub.game, dir);
                debug_assert!(g.iter().all(|x| x == &g[0]), "gain is constant on an end component");
                if wins(&g[0]) {
                    mark(&mut region, &mec.members);
                    sub.export(&local, &mut choice);
                }
            }
        }
        LimInfEqMinusInf => {
            for mec in mec_decompose(game) {
                let sub = Sub::of_mec(game, &mec);
                if let Some(local) = diverging_strategy(&sub.game) {
                    mark(&mut region, &mec.members);
                    sub.export(&local, &mut choice);
                }
            }
        }
        LimInfGtMinusInf => {
            let (inf_region, inf_choice) = maximizing_region(game, LimInfEqPlusInf);
            let keeper = controller(game).ok().flatten().unwrap_or(Player::Max);
            let credit = energy_min_credit(game, keeper);
            for v in 0..n {
                if inf_region[v] {
                    region[v] = true;
                    choice[v] = inf_choice[v];
                } else if credit.is_finite(v) {
                    region[v] = true;
                    choice[v] = credit.keeper_choice[v];
                }
            }
        }
    }
    (region, choice)
}

fn mark(region: &mut [bool], members: &[usize]) {
    for &v in members {
        region[v] = true;
    }
}

/// On an end component (given as a whole model), a strategy under which
/// the accumulated reward has liminf -inf almost surely, if one exists.
///
/// Negative minimal gain suffices. With minimal gain zero, every bottom
/// component of zero drift only uses transitions that are tight for the
/// optimal bias; such a component diverges iff it carries a cycle of
/// nonzero total reward, so it is enough to look for one inside the end
/// components of the tight sub-model.
fn diverging_strategy(ec: &Ssg) -> Option<Vec<Option<usize>>> {
    let (g, h, sigma) = mean_policy_iteration(ec, Direction::Min);
    let gain = &g[0];
    if gain.is_negative() {
        return Some(sigma);
    }
    if gain.is_positive() {
        return None;
    }
    let n = ec.len();
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|v| {
            (0..ec.succ(v).len())
                .map(|k| Rational::from_integer(ec.step_reward(v, k).into()) + &h[ec.succ(v)[k].target] == h[v])
                .collect()
        })
        .collect();
    for tmec in mecs_within(ec, &vec![true; n], &tight) {
        let sub = Sub::of_mec(ec, &tmec);
        let Some(cycle) = nonzero_cycle(&sub.game) else { continue };

        // Follow the cycle, and head for it from the rest of the tight
        // component.
        let m = sub.game.len();
        let mut on_cycle = vec![false; m];
        for &(u, _) in &cycle {
            on_cycle[u] = true;
        }
        let (_, to_cycle) = reach_policy_iteration(&sub.game, &on_cycle, Direction::Max);
        let mut local: Vec<Option<usize>> = to_cycle;
        for &(u, k) in &cycle {
            if is_controlled(&sub.game, u) {
                local[u] = Some(k);
            }
        }
        let mut choice: Vec<Option<usize>> = (0..n).map(|v| is_controlled(ec, v).then_some(0)).collect();
        sub.export(&local, &mut choice);

        // Head for the tight component from the rest of the end component.
        let mut inside = vec![false; n];
        mark(&mut inside, &tmec.members);
        let (_, to_tight) = reach_policy_iteration(ec, &inside, Direction::Max);
        for v in 0..n {
            if !inside[v] && is_controlled(ec, v) {
                choice[v] = to_tight[v];
            }
        }
        return Some(choice);
    }
    None
}

/// A simple cycle with nonzero total reward in a strongly connected model,
/// as (state, transition) pairs, or `None` if every cycle sums to zero.
pub(crate) fn nonzero_cycle(g: &Ssg) -> Option<Vec<(usize, usize)>> {
    let n = g.len();
    // Breadth-first tree from state 0 with potentials along tree paths.
    let mut h: Vec<Option<i64>> = vec![None; n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    h[0] = Some(0);
    let mut queue = VecDeque::from([0]);
    let mut broken = None;
    while let Some(u) = queue.pop_front() {
        for (k, t) in g.succ(u).iter().enumerate() {
            let w = h[u].expect("visited") + g.step_reward(u, k);
            match h[t.target] {
                None => {
                    h[t.target] = Some(w);
                    parent[t.target] = Some((u, k));
                    queue.push_back(t.target);
                }
                Some(x) if x != w && broken.is_none() => broken = Some((u, k)),
                _ => {}
            }
        }
    }
    let (u, k) = broken?;
    let t = g.succ(u)[k].target;

    // Paths back to state 0 along a reverse breadth-first tree.
    let mut back: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut rev: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for v in 0..n {
        for (kk, e) in g.succ(v).iter().enumerate() {
            rev[e.target].push((v, kk));
        }
    }
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for &(v, kk) in &rev[x] {
            if !seen[v] {
                seen[v] = true;
                back[v] = Some((v, kk));
                queue.push_back(v);
            }
        }
    }
    let tree_path = |to: usize| {
        let mut p = Vec::new();
        let mut x = to;
        while let Some((v, kk)) = parent[x] {
            p.push((v, kk));
            x = v;
        }
        p.reverse();
        p
    };
    let home = |from: usize| {
        let mut p = Vec::new();
        let mut x = from;
        while x != 0 {
            let (v, kk) = back[x].expect("strongly connected");
            p.push((v, kk));
            x = g.succ(v)[kk].target;
        }
        p
    };
    let mut walk1 = tree_path(u);
    walk1.push((u, k));
    walk1.extend(home(t));
    let mut walk2 = tree_path(t);
    walk2.extend(home(t));
    let weight = |w: &[(usize, usize)]| w.iter().map(|&(v, kk)| g.step_reward(v, kk)).sum::<i64>();
    let walk = if weight(&walk1) != 0 { walk1 } else { walk2 };
    debug_assert_ne!(weight(&walk), 0);

    // Split the closed walk into simple cycles; one of them is nonzero.
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::from([(0, 0)]);
    let mut cur = 0;
    for (v, kk) in walk {
        debug_assert_eq!(v, cur);
        stack.push((v, kk));
        let next = g.succ(v)[kk].target;
        if let Some(&p) = pos.get(&next) {
            let cycle: Vec<(usize, usize)> = stack.split_off(p);
            if weight(&cycle) != 0 {
                return Some(cycle);
            }
            for &(x, _) in &cycle {
                if x != next {
                    pos.remove(&x);
                }
            }
        } else {
            pos.insert(next, stack.len());
        }
        cur = next;
    }
    unreachable!("a closed walk of nonzero weight contains a nonzero simple cycle")
}
