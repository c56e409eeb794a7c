use crate::model::{Player, Ssg};

/// Minimal initial credit per state for the keeper to keep every prefix
/// sum of rewards (plus the credit) non-negative forever. Random states
/// belong to the keeper's adversary. `None` stands for infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CreditMap {
    pub credit: Vec<Option<u64>>,
    pub cutoff: u64,
    /// At keeper states with finite credit: a transition that keeps the
    /// credit invariant (smallest index among the best).
    pub keeper_choice: Vec<Option<usize>>,
}

impl CreditMap {
    pub fn is_finite(&self, s: usize) -> bool {
        self.credit[s].is_some()
    }

    /// States winnable with zero initial credit.
    pub fn zero_credit(&self) -> Vec<bool> {
        self.credit.iter().map(|c| *c == Some(0)).collect()
    }
}

fn lift(credit: Option<u64>, reward: i64) -> Option<u64> {
    credit.map(|c| (c as i64 - reward).max(0) as u64)
}

/// Least fixpoint of the lifting operator with values above `|V|` read as
/// infinite. Finite credits never exceed `|V|` since weights are in {-1,0,1}.
pub fn energy_min_credit(game: &Ssg, keeper: Player) -> CreditMap {
    let n = game.len();
    let cutoff = n as u64;
    let keeps = |v: usize| game.owner(v) == keeper.owner();
    let cap = |c: Option<u64>| c.filter(|&x| x <= cutoff);
    // Order with None as infinity.
    let key = |c: Option<u64>| c.map_or(u64::MAX, |x| x);

    let mut f: Vec<Option<u64>> = vec![Some(0); n];
    loop {
        let mut changed = false;
        for v in 0..n {
            let options = (0..game.succ(v).len()).map(|k| lift(f[game.succ(v)[k].target], game.step_reward(v, k)));
            let new = if keeps(v) { options.min_by_key(|&c| key(c)) } else { options.max_by_key(|&c| key(c)) }
                .expect("successor");
            let new = cap(new);
            if key(new) > key(f[v]) {
                f[v] = new;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let keeper_choice = (0..n)
        .map(|v| {
            if !keeps(v) || f[v].is_none() {
                return None;
            }
            let cost = |k: usize| key(lift(f[game.succ(v)[k].target], game.step_reward(v, k)));
            let best = (0..game.succ(v).len()).map(cost).min().expect("successor");
            (0..game.succ(v).len()).find(|&k| cost(k) == best)
        })
        .collect();
    CreditMap { credit: f, cutoff, keeper_choice }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::ssg;

    #[test]
    fn zero_loop_needs_no_credit() {
        let g = ssg("ssg rewards=transitions\nstate k owner=max\ntrans k -> k reward=0\n");
        assert_eq!(energy_min_credit(&g, Player::Max).credit, vec![Some(0)]);
    }

    #[test]
    fn adversary_draining_loop_is_infinite() {
        let g = ssg("ssg rewards=transitions\nstate a owner=min\ntrans a -> a reward=-1\n");
        assert_eq!(energy_min_credit(&g, Player::Max).credit, vec![None]);
    }

    #[test]
    fn path_then_gain_loop() {
        // h --(-1)--> l, l --(+1)--> l
        let g = ssg("ssg rewards=transitions\nstate h owner=max\nstate l owner=max\ntrans h -> l reward=-1\ntrans l -> l reward=1\n");
        assert_eq!(energy_min_credit(&g, Player::Max).credit, vec![Some(1), Some(0)]);
    }

    #[test]
    fn alternating_cycle_credits() {
        let g = ssg("ssg rewards=transitions\nstate a owner=max\nstate b owner=max\ntrans a -> b reward=1\ntrans b -> a reward=-1\n");
        assert_eq!(energy_min_credit(&g, Player::Max).credit, vec![Some(0), Some(1)]);
    }

    #[test]
    fn random_states_are_adversarial() {
        let g = ssg("ssg rewards=transitions\nstate r owner=rand\ntrans r -> r p=1/2 reward=1\ntrans r -> r p=1/2 reward=-1\n");
        assert_eq!(energy_min_credit(&g, Player::Max).credit, vec![None]);
    }
}
