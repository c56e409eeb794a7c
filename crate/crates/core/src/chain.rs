//! Finite Markov chains with rewards: BSCCs, stationary distributions,
//! mean payoff, tail-objective classification and hitting probabilities.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph;
use crate::linalg;
use crate::model::{LimitObjective, Owner, Ssg};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub target: usize,
    pub prob: Rational,
    pub reward: i64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("state `{0}` has a choice; fix a strategy first")]
    NotAChain(String),
    #[error("strategy has no choice at `{0}`")]
    MissingChoice(String),
    #[error("states {0:?} do not form a bottom strongly connected component")]
    NotBottom(Vec<usize>),
}

/// A Markov chain whose steps carry the reward of the game step they came
/// from. Parallel steps to the same target are kept apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    pub succ: Vec<Vec<Step>>,
}

impl MarkovChain {
    /// The chain of a game without choices. Player states with a single
    /// transition are accepted.
    pub fn from_ssg(game: &Ssg) -> Result<Self, ChainError> {
        let choices: Vec<Option<usize>> = (0..game.len())
            .map(|s| (game.owner(s) != Owner::Random && game.succ(s).len() == 1).then_some(0))
            .collect();
        for s in 0..game.len() {
            if game.owner(s) != Owner::Random && game.succ(s).len() > 1 {
                return Err(ChainError::NotAChain(game.id(s).to_string()));
            }
        }
        Self::induced(game, &choices)
    }

    /// The chain obtained by following `choices[s]` at every player state.
    pub fn induced(game: &Ssg, choices: &[Option<usize>]) -> Result<Self, ChainError> {
        let mut succ = Vec::with_capacity(game.len());
        for s in 0..game.len() {
            let steps = if game.owner(s) == Owner::Random {
                (0..game.succ(s).len())
                    .map(|k| Step {
                        target: game.succ(s)[k].target,
                        prob: game.step_prob(s, k),
                        reward: game.step_reward(s, k),
                    })
                    .collect()
            } else {
                let k = choices
                    .get(s)
                    .copied()
                    .flatten()
                    .filter(|&k| k < game.succ(s).len())
                    .ok_or_else(|| ChainError::MissingChoice(game.id(s).to_string()))?;
                vec![Step {
                    target: game.succ(s)[k].target,
                    prob: Rational::one(),
                    reward: game.step_reward(s, k),
                }]
            };
            succ.push(steps);
        }
        Ok(MarkovChain { succ })
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succ.iter().map(|st| st.iter().map(|x| x.target).collect()).collect()
    }

    /// Expected reward of one step from `s`.
    pub fn expected_reward(&self, s: usize) -> Rational {
        self.succ[s]
            .iter()
            .map(|x| &x.prob * Rational::from_integer(x.reward.into()))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Sorted by smallest member.
    pub bsccs: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
}

pub fn bscc_decompose(chain: &MarkovChain) -> Decomposition {
    let adj = chain.adjacency();
    let n = chain.len();
    let comps = graph::scc(&adj, &vec![true; n]);
    let mut comp_of = vec![0; n];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let mut bsccs = Vec::new();
    let mut in_bscc = vec![false; n];
    for (c, members) in comps.iter().enumerate() {
        if members.iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == c)) {
            for &v in members {
                in_bscc[v] = true;
            }
            bsccs.push(members.clone());
        }
    }
    bsccs.sort();
    let transient = (0..n).filter(|&v| !in_bscc[v]).collect();
    Decomposition { bsccs, transient }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsccAnalysis {
    pub members: Vec<usize>,
    /// Aligned with `members`.
    pub stationary: Vec<Rational>,
    pub mean_payoff: Rational,
    /// Aligned with `members`, zero at the first member. Present iff every
    /// cycle of the component has total reward zero.
    pub potential: Option<Vec<i64>>,
}

impl BsccAnalysis {
    /// Whether almost every run staying in this component satisfies `obj`.
    pub fn classifies(&self, obj: LimitObjective) -> bool {
        use LimitObjective::*;
        let mu = &self.mean_payoff;
        let bounded = self.potential.is_some();
        match obj {
            LimInfEqPlusInf | MeanGt => mu.is_positive(),
            LimInfLtPlusInf | MeanLeq => !mu.is_positive(),
            LimInfEqMinusInf => mu.is_negative() || (mu.is_zero() && !bounded),
            LimInfGtMinusInf => mu.is_positive() || (mu.is_zero() && bounded),
        }
    }

    pub fn potential_of(&self, s: usize) -> Option<i64> {
        let i = self.members.binary_search(&s).ok()?;
        self.potential.as_ref().map(|h| h[i])
    }
}

/// Integer potential with `h(v) - h(u)` equal to the step reward on every
/// edge listed by `edges` between members, if one exists.
/// Anchored at `members[0]`; `members` must be sorted and connected.
pub(crate) fn potential(
    members: &[usize],
    edges: impl Fn(usize) -> Vec<(usize, i64)>,
) -> Option<Vec<i64>> {
    let pos = |v: usize| members.binary_search(&v).ok();
    let mut h: Vec<Option<i64>> = vec![None; members.len()];
    h[0] = Some(0);
    let mut queue = VecDeque::from([members[0]]);
    while let Some(u) = queue.pop_front() {
        let hu = h[pos(u).expect("member")].expect("assigned");
        for (v, r) in edges(u) {
            let Some(i) = pos(v) else { continue };
            match h[i] {
                None => {
                    h[i] = Some(hu + r);
                    queue.push_back(v);
                }
                Some(hv) if hv != hu + r => return None,
                _ => {}
            }
        }
    }
    h.into_iter().collect()
}

pub fn analyze_bscc(chain: &MarkovChain, bscc: &[usize]) -> Result<BsccAnalysis, ChainError> {
    let mut members = bscc.to_vec();
    members.sort_unstable();
    members.dedup();
    let bad = || ChainError::NotBottom(members.clone());
    if members.is_empty() {
        return Err(bad());
    }
    let pos = |v: usize| members.binary_search(&v).ok();
    for &u in &members {
        if chain.succ[u].iter().any(|x| pos(x.target).is_none()) {
            return Err(bad());
        }
    }
    let mut active = vec![false; chain.len()];
    for &u in &members {
        active[u] = true;
    }
    if graph::scc(&chain.adjacency(), &active).len() != 1 {
        return Err(bad());
    }

    // Balance equations pi = pi P on the component, with the last one
    // replaced by the normalisation sum(pi) = 1.
    let m = members.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    for (i, &u) in members.iter().enumerate() {
        a[i][i] += Rational::one();
        for x in &chain.succ[u] {
            let j = pos(x.target).expect("closed");
            a[j][i] -= &x.prob;
        }
    }
    let mut b = vec![Rational::zero(); m];
    for v in a[m - 1].iter_mut() {
        *v = Rational::one();
    }
    b[m - 1] = Rational::one();
    let stationary = linalg::solve(&a, &b).expect("irreducible chain has a unique stationary law").x;

    let mean_payoff = members
        .iter()
        .zip(&stationary)
        .map(|(&u, p)| p * chain.expected_reward(u))
        .sum();

    let potential = potential(&members, |u| {
        chain.succ[u].iter().map(|x| (x.target, x.reward)).collect()
    });

    Ok(BsccAnalysis { members, stationary, mean_payoff, potential })
}

/// Every BSCC of the chain, analysed.
pub fn analyze_all(chain: &MarkovChain) -> Vec<BsccAnalysis> {
    bscc_decompose(chain)
        .bsccs
        .iter()
        .map(|c| analyze_bscc(chain, c).expect("decomposition yields BSCCs"))
        .collect()
}

/// Hitting probabilities together with the determinant of the linear system
/// that produced them (1 when no system had to be solved).
#[derive(Clone, Debug)]
pub struct CertifiedValues {
    pub values: Vec<Rational>,
    pub det: BigInt,
}

pub fn reach_probabilities(chain: &MarkovChain, target: &[bool]) -> Vec<Rational> {
    reach_probabilities_certified(chain, target).values
}

pub fn reach_probabilities_certified(chain: &MarkovChain, target: &[bool]) -> CertifiedValues {
    let n = chain.len();
    let reach = graph::can_reach(&chain.adjacency(), target);
    let unknown: Vec<usize> = (0..n).filter(|&v| reach[v] && !target[v]).collect();
    let mut col = vec![usize::MAX; n];
    for (i, &v) in unknown.iter().enumerate() {
        col[v] = i;
    }
    let m = unknown.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (i, &u) in unknown.iter().enumerate() {
        a[i][i] += Rational::one();
        for x in &chain.succ[u] {
            if target[x.target] {
                b[i] += &x.prob;
            } else if col[x.target] != usize::MAX {
                a[i][col[x.target]] -= &x.prob;
            }
        }
    }
    let sol = linalg::solve(&a, &b).expect("every unknown reaches the target");
    let mut values = vec![Rational::zero(); n];
    for v in 0..n {
        if target[v] {
            values[v] = Rational::one();
        }
    }
    for (i, &v) in unknown.iter().enumerate() {
        values[v] = sol.x[i].clone();
    }
    CertifiedValues { values, det: sol.det }
}

/// Probability that a run satisfies the tail objective `obj`.
pub fn chain_tail_value(chain: &MarkovChain, obj: LimitObjective) -> Vec<Rational> {
    chain_tail_value_certified(chain, obj).values
}

pub fn chain_tail_value_certified(chain: &MarkovChain, obj: LimitObjective) -> CertifiedValues {
    let mut target = vec![false; chain.len()];
    for an in analyze_all(chain) {
        if an.classifies(obj) {
            for &v in &an.members {
                target[v] = true;
            }
        }
    }
    reach_probabilities_certified(chain, &target)
}

/// Gain and bias of every state: `g = P g` and `g + h = r + P h`, with the
/// bias pinned to zero at the smallest state of each BSCC.
pub fn gain_bias(chain: &MarkovChain) -> (Vec<Rational>, Vec<Rational>) {
    let n = chain.len();
    let dec = bscc_decompose(chain);
    let mut g = vec![Rational::zero(); n];
    let mut h = vec![Rational::zero(); n];

    for members in &dec.bsccs {
        let an = analyze_bscc(chain, members).expect("bscc");
        let pos = |v: usize| members.binary_search(&v).ok();
        for &v in members {
            g[v] = an.mean_payoff.clone();
        }
        let m = members.len();
        let mut a = vec![vec![Rational::zero(); m]; m];
        let mut b = vec![Rational::zero(); m];
        a[0][0] = Rational::one();
        for (i, &u) in members.iter().enumerate().skip(1) {
            a[i][i] += Rational::one();
            for x in &chain.succ[u] {
                a[i][pos(x.target).expect("closed")] -= &x.prob;
            }
            b[i] = chain.expected_reward(u) - &an.mean_payoff;
        }
        let sol = linalg::solve(&a, &b).expect("anchored bias system is regular");
        for (i, &v) in members.iter().enumerate() {
            h[v] = sol.x[i].clone();
        }
    }

    let t = &dec.transient;
    if !t.is_empty() {
        let mut col = vec![usize::MAX; n];
        for (i, &v) in t.iter().enumerate() {
            col[v] = i;
        }
        let m = t.len();
        let mut a = vec![vec![Rational::zero(); m]; m];
        for (i, &u) in t.iter().enumerate() {
            a[i][i] += Rational::one();
            for x in &chain.succ[u] {
                if col[x.target] != usize::MAX {
                    a[i][col[x.target]] -= &x.prob;
                }
            }
        }
        let mut bg = vec![Rational::zero(); m];
        for (i, &u) in t.iter().enumerate() {
            for x in &chain.succ[u] {
                if col[x.target] == usize::MAX {
                    bg[i] += &x.prob * &g[x.target];
                }
            }
        }
        let gt = linalg::solve(&a, &bg).expect("transient block is regular").x;
        for (i, &v) in t.iter().enumerate() {
            g[v] = gt[i].clone();
        }
        let mut bh = vec![Rational::zero(); m];
        for (i, &u) in t.iter().enumerate() {
            bh[i] = chain.expected_reward(u) - &g[u];
            for x in &chain.succ[u] {
                if col[x.target] == usize::MAX {
                    bh[i] += &x.prob * &h[x.target];
                }
            }
        }
        let ht = linalg::solve(&a, &bh).expect("transient block is regular").x;
        for (i, &v) in t.iter().enumerate() {
            h[v] = ht[i].clone();
        }
    }
    (g, h)
}
