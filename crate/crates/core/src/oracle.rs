//! Ground truth for small instances: exhaustive enumeration of pure
//! memoryless strategy profiles, and a seeded Monte Carlo simulator.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{self, MarkovChain};
use crate::model::{
    FiniteMemoryStrategy, LimitObjective, Objective, Owner, Player, PureMemorylessStrategy, SolveResult, Ssg,
};
use crate::Rational;

/// Largest number of strategy profiles `enumerate_solve` will visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// Name of the pseudo-random generator behind [`simulate`].
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{profiles} strategy profiles exceed the enumeration limit of {limit}")]
    TooLarge { profiles: u128, limit: u128 },
    #[error("objective {0} cannot be enumerated")]
    Unsupported(String),
    #[error("no choice for `{0}`")]
    Unresolved(String),
    #[error("probabilities of `{0}` have a common denominator beyond 64 bits")]
    Denominator(String),
    #[error("unknown state index {0}")]
    NoSuchState(usize),
}

/// All pure memoryless strategies of `player`, in lexicographic order of
/// transition indices (states in id order).
pub fn memoryless_strategies(game: &Ssg, player: Player) -> Vec<PureMemorylessStrategy> {
    let owned: Vec<usize> = game.states_of(player.owner()).collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; owned.len()];
    loop {
        let mut choice = vec![None; game.len()];
        for (i, &s) in owned.iter().enumerate() {
            choice[s] = Some(digits[i]);
        }
        out.push(PureMemorylessStrategy::new(player, choice));
        // Mixed-radix increment, last owned state fastest.
        let mut i = owned.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < game.succ(owned[i]).len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

pub fn count_strategies(game: &Ssg, player: Player) -> u128 {
    game.states_of(player.owner())
        .map(|s| game.succ(s).len() as u128)
        .fold(1u128, |a, b| a.saturating_mul(b))
}

fn merge(game: &Ssg, max: &PureMemorylessStrategy, min: &PureMemorylessStrategy) -> Vec<Option<usize>> {
    (0..game.len())
        .map(|s| match game.owner(s) {
            Owner::Max => max.choice(s),
            Owner::Min => min.choice(s),
            Owner::Random => None,
        })
        .collect()
}

/// Per-profile values for each requested objective.
fn profile_values(game: &Ssg, choices: &[Option<usize>], objs: &[Objective]) -> Vec<Vec<Rational>> {
    let chain = MarkovChain::induced(game, choices).expect("complete profile");
    let needs_bsccs = objs.iter().any(|o| matches!(o, Objective::Limit(_)));
    let analyses = if needs_bsccs { chain::analyze_all(&chain) } else { Vec::new() };
    objs.iter()
        .map(|o| match o {
            Objective::Limit(l) => {
                let mut target = vec![false; game.len()];
                for an in analyses.iter().filter(|an| an.classifies(*l)) {
                    for &v in &an.members {
                        target[v] = true;
                    }
                }
                chain::reach_probabilities(&chain, &target)
            }
            Objective::Reach(t) => {
                let mut target = vec![false; game.len()];
                for &v in t {
                    target[v] = true;
                }
                chain::reach_probabilities(&chain, &target)
            }
            _ => unreachable!("checked by caller"),
        })
        .collect()
}

/// Exact values of a limit objective by visiting every pure memoryless
/// profile: `max over sigma of min over pi`, state by state.
pub fn enumerate_solve(game: &Ssg, obj: LimitObjective) -> Result<SolveResult, OracleError> {
    Ok(enumerate_many(game, &[Objective::Limit(obj)])?.remove(0))
}

/// As [`enumerate_solve`] for any tail or reachability objective; several
/// objectives share one pass over the profiles.
pub fn enumerate_many(game: &Ssg, objs: &[Objective]) -> Result<Vec<SolveResult>, OracleError> {
    for o in objs {
        if !matches!(o, Objective::Limit(_) | Objective::Reach(_)) {
            return Err(OracleError::Unsupported(format!("{:?}", o)));
        }
        if let Objective::Reach(t) = o {
            if let Some(&s) = t.iter().find(|&&s| s >= game.len()) {
                return Err(OracleError::NoSuchState(s));
            }
        }
    }
    let profiles = count_strategies(game, Player::Max).saturating_mul(count_strategies(game, Player::Min));
    if profiles > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge { profiles, limit: ENUMERATION_LIMIT });
    }
    let sigmas = memoryless_strategies(game, Player::Max);
    let pis = memoryless_strategies(game, Player::Min);
    let n = game.len();
    let k = objs.len();

    // table[i][j][o]: values of profile (sigma_i, pi_j) for objective o.
    let table: Vec<Vec<Vec<Vec<Rational>>>> = sigmas
        .par_iter()
        .map(|sigma| pis.iter().map(|pi| profile_values(game, &merge(game, sigma, pi), objs)).collect())
        .collect();

    let mut out = Vec::with_capacity(k);
    for o in 0..k {
        // Inner minimum for every sigma, then outer maximum.
        let inner: Vec<Vec<Rational>> = table
            .iter()
            .map(|row| (0..n).map(|s| row.iter().map(|v| &v[o][s]).min().expect("profile").clone()).collect())
            .collect();
        let values: Vec<Rational> =
            (0..n).map(|s| inner.iter().map(|v| &v[s]).max().expect("profile").clone()).collect();
        let outer: Vec<Vec<Rational>> = (0..pis.len())
            .map(|j| (0..n).map(|s| table.iter().map(|row| &row[j][o][s]).max().expect("profile").clone()).collect())
            .collect();
        let best_sigma = inner.iter().position(|v| *v == values).map(|i| sigmas[i].clone());
        let best_pi = outer.iter().position(|v| *v == values).map(|j| pis[j].clone());
        out.push(SolveResult::new(values, best_sigma, best_pi));
    }
    Ok(out)
}

/// Strategy of one player for simulation.
#[derive(Clone, Debug)]
pub enum PlayerStrategy {
    Memoryless(PureMemorylessStrategy),
    FiniteMemory(FiniteMemoryStrategy),
}

impl PlayerStrategy {
    fn as_finite(&self, game: &Ssg) -> FiniteMemoryStrategy {
        match self {
            PlayerStrategy::Memoryless(s) => FiniteMemoryStrategy::from_memoryless(game, s),
            PlayerStrategy::FiniteMemory(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Profile {
    pub max: Option<PlayerStrategy>,
    pub min: Option<PlayerStrategy>,
}

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub steps: u64,
    pub trials: u64,
    pub seed: u64,
    /// Counter level `j` whose hitting time (sum = -j) is recorded.
    pub term_level: Option<u64>,
    /// Threshold `B` for the liminf proxies.
    pub bound: i64,
    /// Stop a trial once the sum hits `-term_level`.
    pub stop_on_hit: bool,
}

impl SimConfig {
    pub fn new(steps: u64, trials: u64, seed: u64) -> Self {
        SimConfig { steps, trials, seed, term_level: None, bound: 50, stop_on_hit: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialStats {
    pub steps: u64,
    pub min_prefix: i64,
    pub max_prefix: i64,
    pub final_sum: i64,
    /// Step count at which the sum first equalled `-j`.
    pub hit_time: Option<u64>,
    /// The sum went below `-B`.
    pub dipped_below: bool,
    /// The sum exceeded `+B` and stayed above `B` from then on.
    pub stayed_above: bool,
    /// Some state of the reach target was visited (position 0 included).
    pub reached: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub rng: &'static str,
    pub seed: u64,
    pub trials: Vec<TrialStats>,
}

impl SimReport {
    pub fn hit_count(&self) -> u64 {
        self.trials.iter().filter(|t| t.hit_time.is_some()).count() as u64
    }

    pub fn frequency(&self, pred: impl Fn(&TrialStats) -> bool) -> f64 {
        if self.trials.is_empty() {
            return 0.0;
        }
        self.trials.iter().filter(|t| pred(t)).count() as f64 / self.trials.len() as f64
    }

    pub fn mean_payoff_estimate(&self) -> f64 {
        let per: Vec<f64> = self
            .trials
            .iter()
            .map(|t| if t.steps == 0 { 0.0 } else { t.final_sum as f64 / t.steps as f64 })
            .collect();
        per.iter().sum::<f64>() / per.len().max(1) as f64
    }

    pub fn min_prefix(&self) -> Option<i64> {
        self.trials.iter().map(|t| t.min_prefix).min()
    }

    pub fn max_prefix(&self) -> Option<i64> {
        self.trials.iter().map(|t| t.max_prefix).max()
    }
}

/// Pre-resolved sampling tables.
struct Sampler {
    /// Per random state: common denominator and cumulative numerators.
    tables: Vec<Option<(u64, Vec<u64>)>>,
    fm_max: Option<FiniteMemoryStrategy>,
    fm_min: Option<FiniteMemoryStrategy>,
}

impl Sampler {
    fn new(game: &Ssg, profile: &Profile) -> Result<Self, OracleError> {
        let mut tables = Vec::with_capacity(game.len());
        for s in 0..game.len() {
            if game.owner(s) != Owner::Random {
                tables.push(None);
                continue;
            }
            let mut den = BigInt::one();
            for k in 0..game.succ(s).len() {
                den = den.lcm(game.step_prob(s, k).denom());
            }
            let d = den.to_u64().ok_or_else(|| OracleError::Denominator(game.id(s).to_string()))?;
            let mut acc = 0u64;
            let mut cum = Vec::new();
            for k in 0..game.succ(s).len() {
                let p = game.step_prob(s, k);
                let num = (p.numer() * (&den / p.denom())).to_u64().expect("bounded by denominator");
                acc += num;
                cum.push(acc);
            }
            tables.push(Some((d, cum)));
        }
        let fm_max = profile.max.as_ref().map(|p| p.as_finite(game));
        let fm_min = profile.min.as_ref().map(|p| p.as_finite(game));
        for s in 0..game.len() {
            let fm = match game.owner(s) {
                Owner::Max => &fm_max,
                Owner::Min => &fm_min,
                Owner::Random => continue,
            };
            let ok = fm.as_ref().is_some_and(|f| f.choice.iter().all(|c| c[s].is_some_and(|k| k < game.succ(s).len())));
            if !ok {
                return Err(OracleError::Unresolved(game.id(s).to_string()));
            }
        }
        Ok(Sampler { tables, fm_max, fm_min })
    }
}

fn run_trial(
    game: &Ssg,
    sampler: &Sampler,
    start: usize,
    cfg: &SimConfig,
    target: &[bool],
    trial: u64,
) -> TrialStats {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let mut mem_max = sampler.fm_max.as_ref().map_or(0, |f| f.initial);
    let mut mem_min = sampler.fm_min.as_ref().map_or(0, |f| f.initial);
    let mut s = start;
    let mut sum = 0i64;
    let mut st = TrialStats {
        steps: 0,
        min_prefix: 0,
        max_prefix: 0,
        final_sum: 0,
        hit_time: None,
        dipped_below: false,
        stayed_above: false,
        reached: target.get(start).copied().unwrap_or(false),
    };
    let mut above_since: Option<u64> = None;
    let level = cfg.term_level.map(|j| -(j as i64));
    for step in 1..=cfg.steps {
        let k = match game.owner(s) {
            Owner::Random => {
                let (d, cum) = sampler.tables[s].as_ref().expect("random table");
                let u = rng.gen_range(0..*d);
                cum.iter().position(|&c| u < c).expect("cumulative reaches denominator")
            }
            Owner::Max => {
                let f = sampler.fm_max.as_ref().expect("checked");
                f.choice[mem_max][s].expect("checked")
            }
            Owner::Min => {
                let f = sampler.fm_min.as_ref().expect("checked");
                f.choice[mem_min][s].expect("checked")
            }
        };
        if let Some(f) = &sampler.fm_max {
            mem_max = f.update[mem_max][s][k];
        }
        if let Some(f) = &sampler.fm_min {
            mem_min = f.update[mem_min][s][k];
        }
        sum += game.step_reward(s, k);
        s = game.succ(s)[k].target;
        st.steps = step;
        st.min_prefix = st.min_prefix.min(sum);
        st.max_prefix = st.max_prefix.max(sum);
        if sum < -cfg.bound {
            st.dipped_below = true;
        }
        if sum > cfg.bound {
            above_since.get_or_insert(step);
        } else if above_since.is_some() {
            above_since = None;
            // Once it falls back the proxy can still be met by a later climb.
        }
        if target.get(s).copied().unwrap_or(false) {
            st.reached = true;
        }
        if st.hit_time.is_none() && Some(sum) == level {
            st.hit_time = Some(step);
            if cfg.stop_on_hit {
                break;
            }
        }
    }
    st.final_sum = sum;
    st.stayed_above = above_since.is_some();
    st
}

/// Runs `cfg.trials` independent runs of `cfg.steps` steps from `start`.
/// Trial `i` draws from the generator seeded with `cfg.seed` on stream
/// `i`, so results do not depend on scheduling.
pub fn simulate(game: &Ssg, profile: &Profile, start: usize, cfg: &SimConfig) -> Result<SimReport, OracleError> {
    simulate_with_target(game, profile, start, cfg, &BTreeSet::new())
}

fn simulate_with_target(
    game: &Ssg,
    profile: &Profile,
    start: usize,
    cfg: &SimConfig,
    target: &BTreeSet<usize>,
) -> Result<SimReport, OracleError> {
    if start >= game.len() {
        return Err(OracleError::NoSuchState(start));
    }
    let sampler = Sampler::new(game, profile)?;
    let mut mask = vec![false; game.len()];
    for &t in target {
        if t >= game.len() {
            return Err(OracleError::NoSuchState(t));
        }
        mask[t] = true;
    }
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(game, &sampler, start, cfg, &mask, i))
        .collect();
    Ok(SimReport { rng: RNG_ALGORITHM, seed: cfg.seed, trials })
}

/// Empirical frequency of a finite-horizon proxy for `obj`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub hits: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn frequency(&self) -> f64 {
        self.hits as f64 / self.trials.max(1) as f64
    }

    /// Three standard errors of a Bernoulli(`p`) mean over this many trials.
    pub fn three_sigma(&self, p: f64) -> f64 {
        3.0 * (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// Proxies: LimInf=-inf as dipping below `-B`, LimInf=+inf as exceeding `+B`
/// and staying above it, Mean> as a positive final average, Term{j} as
/// hitting `-j`, Reach as visiting the target, All(>=0) as never going
/// negative. Complemented objectives count the complementary trials.
pub fn estimate_objective(
    game: &Ssg,
    profile: &Profile,
    start: usize,
    obj: &Objective,
    bound: i64,
    steps: u64,
    trials: u64,
    seed: u64,
) -> Result<Estimate, OracleError> {
    assert!(bound > 0, "proxy bound must be positive");
    let mut cfg = SimConfig::new(steps, trials, seed);
    cfg.bound = bound;
    let mut target = BTreeSet::new();
    match obj {
        Objective::Term(j) => {
            cfg.term_level = Some(*j as u64);
            cfg.stop_on_hit = true;
        }
        Objective::Reach(t) => target = t.clone(),
        _ => {}
    }
    let report = simulate_with_target(game, profile, start, &cfg, &target)?;
    use LimitObjective::*;
    let pred = |t: &TrialStats| match obj {
        Objective::Term(_) => t.hit_time.is_some(),
        Objective::Reach(_) => t.reached,
        Objective::AllGeqZero => t.min_prefix >= 0,
        Objective::Limit(LimInfEqMinusInf) => t.dipped_below,
        Objective::Limit(LimInfGtMinusInf) => !t.dipped_below,
        Objective::Limit(LimInfEqPlusInf) => t.stayed_above,
        Objective::Limit(LimInfLtPlusInf) => !t.stayed_above,
        Objective::Limit(MeanGt) => t.final_sum > 0,
        Objective::Limit(MeanLeq) => t.final_sum <= 0,
    };
    let hits = report.trials.iter().filter(|t| pred(t)).count() as u64;
    Ok(Estimate { hits, trials })
}

/// Exact probability that the fair +-1 walk started at 0 visits -1 within
/// `n` steps: `1 - C(n, floor(n/2)) / 2^n`.
pub fn fair_walk_truncated_termination(n: u64) -> Rational {
    let n_us = n as usize;
    let mut c = BigInt::one();
    let k = n / 2;
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::one() - Rational::new(c, BigInt::one() << n_us)
}

/// Exact probability of hitting `-j` within `horizon` steps under a
/// memoryless profile, by propagating the joint law of state and sum.
pub fn truncated_term_probability(
    game: &Ssg,
    choices: &[Option<usize>],
    start: usize,
    j: u64,
    horizon: u64,
) -> Rational {
    use std::collections::HashMap;
    let chain = MarkovChain::induced(game, choices).expect("complete profile");
    let level = -(j as i64);
    let mut dist: HashMap<(usize, i64), Rational> = HashMap::from([((start, 0), Rational::one())]);
    let mut hit = Rational::zero();
    for _ in 0..horizon {
        let mut next: HashMap<(usize, i64), Rational> = HashMap::new();
        for ((s, sum), p) in dist {
            for x in &chain.succ[s] {
                let q = &p * &x.prob;
                let ns = sum + x.reward;
                if ns == level {
                    hit += q;
                } else {
                    *next.entry((x.target, ns)).or_insert_with(Rational::zero) += q;
                }
            }
        }
        dist = next;
    }
    hit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{q, ssg};

    const FAIR: &str = "ssg rewards=transitions\nstate s owner=rand\ntrans s -> s p=1/2 reward=1\ntrans s -> s p=1/2 reward=-1\n";

    #[test]
    fn player_free_matches_chain() {
        let g = ssg("ssg rewards=states\nstate s owner=rand reward=0\nstate u owner=rand reward=1\nstate d owner=rand reward=-1\ntrans s -> u p=1/4\ntrans s -> d p=3/4\ntrans u -> u p=1/1\ntrans d -> d p=1/1\n");
        for obj in LimitObjective::ALL {
            let e = enumerate_solve(&g, obj).unwrap();
            let c = chain::chain_tail_value(&MarkovChain::from_ssg(&g).unwrap(), obj);
            assert_eq!(e.values, c);
        }
    }

    #[test]
    fn enumeration_guard() {
        let mut text = String::from("ssg rewards=states\n");
        for i in 0..21 {
            text += &format!("state s{} owner=max reward=0\n", i);
        }
        for i in 0..21 {
            text += &format!("trans s{} -> s{}\ntrans s{} -> s0\n", i, (i + 1) % 21, i);
        }
        let g = ssg(&text);
        assert!(matches!(enumerate_solve(&g, LimitObjective::MeanGt), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn witnesses_are_uniform() {
        let g = ssg("ssg rewards=states\nstate m owner=max reward=0\nstate u owner=rand reward=1\nstate d owner=rand reward=-1\ntrans m -> d\ntrans m -> u\ntrans u -> u p=1/1\ntrans d -> d p=1/1\n");
        let r = enumerate_solve(&g, LimitObjective::LimInfEqPlusInf).unwrap();
        assert_eq!(r.values, vec![q(1, 1), q(1, 1), q(0, 1)]);
        assert_eq!(r.witness_max.unwrap().choice(0), Some(1));
    }

    #[test]
    fn increment_loop_never_goes_negative() {
        let g = ssg("ssg rewards=transitions\nstate s owner=rand\ntrans s -> s p=1/1 reward=1\n");
        let r = simulate(&g, &Profile::default(), 0, &SimConfig::new(100, 20, 7)).unwrap();
        assert_eq!(r.min_prefix(), Some(0));
        assert_eq!(r.rng, "chacha8");
    }

    #[test]
    fn simulation_is_deterministic() {
        let g = ssg(FAIR);
        let mut cfg = SimConfig::new(500, 200, 42);
        cfg.term_level = Some(1);
        let a = simulate(&g, &Profile::default(), 0, &cfg).unwrap();
        let b = simulate(&g, &Profile::default(), 0, &cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 43;
        assert_ne!(a, simulate(&g, &Profile::default(), 0, &cfg).unwrap());
    }

    #[test]
    fn closed_form_matches_truncated_chain() {
        let g = ssg(FAIR);
        for n in [1u64, 2, 3, 10, 31, 60] {
            assert_eq!(fair_walk_truncated_termination(n), truncated_term_probability(&g, &[None], 0, 1, n), "n = {n}");
        }
    }

    #[test]
    fn unresolved_choice_is_an_error() {
        let g = ssg("ssg rewards=states\nstate m owner=max reward=0\ntrans m -> m\n");
        let err = simulate(&g, &Profile::default(), 0, &SimConfig::new(1, 1, 0)).unwrap_err();
        assert_eq!(err, OracleError::Unresolved("m".into()));
    }

    #[test]
    fn bounded_cycle_never_dips() {
        let g = ssg("ssg rewards=transitions\nstate a owner=rand\nstate b owner=rand\ntrans a -> b p=1/1 reward=1\ntrans b -> a p=1/1 reward=-1\n");
        let e = estimate_objective(&g, &Profile::default(), 0, &Objective::Limit(LimitObjective::LimInfEqMinusInf), 2, 1000, 50, 1).unwrap();
        assert_eq!(e.hits, 0);
    }
}
