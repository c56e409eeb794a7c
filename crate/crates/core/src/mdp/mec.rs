use crate::graph;
use crate::model::Ssg;

use super::is_controlled;

/// A maximal end component. `allowed[i]` lists the transitions of
/// `members[i]` that stay inside; for random states that is all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mec {
    pub members: Vec<usize>,
    pub allowed: Vec<Vec<usize>>,
}

impl Mec {
    pub fn contains(&self, s: usize) -> bool {
        self.members.binary_search(&s).is_ok()
    }
}

pub fn mec_decompose(game: &Ssg) -> Vec<Mec> {
    let n = game.len();
    let edges: Vec<Vec<bool>> = (0..n).map(|v| vec![true; game.succ(v).len()]).collect();
    mecs_within(game, &vec![true; n], &edges)
}

/// End components using only the states in `alive` and, at controlled
/// states, only the transitions marked in `edges`.
pub(crate) fn mecs_within(game: &Ssg, alive: &[bool], edges: &[Vec<bool>]) -> Vec<Mec> {
    let n = game.len();
    let mut alive = alive.to_vec();
    let mut edges: Vec<Vec<bool>> = edges.to_vec();
    for v in 0..n {
        if !is_controlled(game, v) {
            edges[v].iter_mut().for_each(|e| *e = true);
        }
    }
    let comp_of = loop {
        // Drop edges to dead states; random states with such an edge die.
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..n {
                if !alive[v] {
                    continue;
                }
                for (k, t) in game.succ(v).iter().enumerate() {
                    if edges[v][k] && !alive[t.target] {
                        edges[v][k] = false;
                        if !is_controlled(game, v) {
                            alive[v] = false;
                        }
                    }
                }
                if alive[v] && !edges[v].iter().any(|&e| e) {
                    alive[v] = false;
                }
                if !alive[v] {
                    changed = true;
                }
            }
        }
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                game.succ(v)
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| edges[v][*k])
                    .map(|(_, t)| t.target)
                    .collect()
            })
            .collect();
        let comps = graph::scc(&adj, &alive);
        let mut comp_of = vec![usize::MAX; n];
        for (c, members) in comps.iter().enumerate() {
            for &v in members {
                comp_of[v] = c;
            }
        }
        // Cut edges between components.
        let mut cut = false;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            for (k, t) in game.succ(v).iter().enumerate() {
                if edges[v][k] && comp_of[t.target] != comp_of[v] {
                    edges[v][k] = false;
                    cut = true;
                    if !is_controlled(game, v) {
                        alive[v] = false;
                    }
                }
            }
            if alive[v] && !edges[v].iter().any(|&e| e) {
                alive[v] = false;
                cut = true;
            }
        }
        if !cut {
            break comp_of;
        }
    };

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..n {
        if alive[v] {
            groups.entry(comp_of[v]).or_default().push(v);
        }
    }
    let mut out: Vec<Mec> = groups
        .into_values()
        .map(|members| {
            let allowed = members
                .iter()
                .map(|&v| (0..game.succ(v).len()).filter(|&k| edges[v][k]).collect())
                .collect();
            Mec { members, allowed }
        })
        .collect();
    out.sort_by(|a, b| a.members.cmp(&b.members));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::ssg;

    #[test]
    fn strongly_connected_chain_is_one_mec() {
        let g = ssg("ssg rewards=states\nstate a owner=rand reward=0\nstate b owner=rand reward=0\ntrans a -> b p=1/1\ntrans b -> a p=1/2\ntrans b -> b p=1/2\n");
        let m = mec_decompose(&g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].members, vec![0, 1]);
    }

    #[test]
    fn two_absorbing_loops() {
        let g = ssg("ssg rewards=states\nstate s owner=max reward=0\nstate a owner=rand reward=0\nstate b owner=rand reward=0\ntrans s -> a\ntrans s -> b\ntrans a -> a p=1/1\ntrans b -> b p=1/1\n");
        let m = mec_decompose(&g);
        assert_eq!(m.iter().map(|x| x.members.clone()).collect::<Vec<_>>(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn random_leak_breaks_component() {
        // m <-> r, but r leaks to an absorbing sink with probability 1/2.
        let g = ssg("ssg rewards=states\nstate m owner=max reward=0\nstate r owner=rand reward=0\nstate z owner=rand reward=0\ntrans m -> r\ntrans m -> m\ntrans r -> m p=1/2\ntrans r -> z p=1/2\ntrans z -> z p=1/1\n");
        let m = mec_decompose(&g);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].members, vec![0]);
        assert_eq!(m[0].allowed, vec![vec![1]]);
        assert_eq!(m[1].members, vec![2]);
    }
}
