use std::collections::BTreeSet;

use crate::model::{Player, PureMemorylessStrategy, Ssg};

use super::{mask, set_of};

/// Result of the almost-sure reachability fixpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostSure {
    /// States where `player` reaches the target with probability 1.
    pub set: BTreeSet<usize>,
    /// Reaching strategy for `player`: inside `set` it always moves to a
    /// state closer to the target in the positive attractor.
    pub reacher: PureMemorylessStrategy,
    /// Strategy for the opponent keeping the reach probability below 1
    /// outside `set`.
    pub spoiler: PureMemorylessStrategy,
}

/// Classical alternating fixpoint for turn-based games: repeatedly remove
/// the states that cannot reach the target with positive probability inside
/// the current candidate set, together with everything the opponent and
/// chance can force into them.
pub fn almost_sure_reach(game: &Ssg, target: &BTreeSet<usize>, player: Player) -> AlmostSure {
    let n = game.len();
    let target = mask(n, target);
    let ours = |v: usize| game.owner(v) == player.owner();
    let theirs = |v: usize| game.owner(v) == player.opponent().owner();
    let mut alive = vec![true; n];
    let mut spoil: Vec<Option<usize>> = (0..n).map(|v| theirs(v).then_some(0)).collect();

    let rank = loop {
        // Positive attractor of the target for `player` and chance.
        let mut rank: Vec<Option<usize>> = (0..n).map(|v| (alive[v] && target[v]).then_some(0)).collect();
        let mut layer = 0;
        loop {
            layer += 1;
            let mut added = Vec::new();
            for v in 0..n {
                if !alive[v] || rank[v].is_some() {
                    continue;
                }
                let in_p = |t: usize| rank[t].is_some_and(|r| r < layer);
                let ok = if theirs(v) {
                    game.succ(v).iter().all(|t| in_p(t.target))
                } else {
                    game.succ(v).iter().any(|t| in_p(t.target))
                };
                if ok {
                    added.push(v);
                }
            }
            if added.is_empty() {
                break;
            }
            for v in added {
                rank[v] = Some(layer);
            }
        }
        let bad: Vec<usize> = (0..n).filter(|&v| alive[v] && rank[v].is_none()).collect();
        if bad.is_empty() {
            break rank;
        }

        // Opponent-and-chance attractor of the bad states and everything
        // already removed.
        let mut out: Vec<Option<usize>> = (0..n).map(|v| (!alive[v]).then_some(0)).collect();
        for &v in &bad {
            out[v] = Some(1);
            if theirs(v) {
                spoil[v] = game.succ(v).iter().position(|t| rank[t.target].is_none());
            }
        }
        let mut layer = 1;
        loop {
            layer += 1;
            let mut added = Vec::new();
            for v in 0..n {
                if out[v].is_some() || target[v] {
                    continue;
                }
                let gone = |t: usize| out[t].is_some_and(|r| r < layer);
                let ok = if ours(v) {
                    game.succ(v).iter().all(|t| gone(t.target))
                } else {
                    game.succ(v).iter().any(|t| gone(t.target))
                };
                if ok {
                    added.push(v);
                }
            }
            if added.is_empty() {
                break;
            }
            for v in added {
                if theirs(v) {
                    spoil[v] = game.succ(v).iter().position(|t| out[t.target].is_some_and(|r| r < layer));
                }
                out[v] = Some(layer);
            }
        }
        for v in 0..n {
            if out[v].is_some() {
                alive[v] = false;
            }
        }
    };

    let reach: Vec<Option<usize>> = (0..n)
        .map(|v| {
            if !ours(v) {
                return None;
            }
            match rank[v] {
                Some(r) if r > 0 => game.succ(v).iter().position(|t| rank[t.target].is_some_and(|q| q < r)),
                _ => Some(0),
            }
        })
        .collect();
    AlmostSure {
        set: set_of(&alive),
        reacher: PureMemorylessStrategy::new(player, reach),
        spoiler: PureMemorylessStrategy::new(player.opponent(), spoil),
    }
}
