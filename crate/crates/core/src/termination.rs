//! Qualitative termination for one-counter games: does Max force the
//! counter from `j` down to 0 almost surely, or can Min keep it positive
//! surely? Strategies for both outcomes come with exact checks.

use std::collections::BTreeSet;

use num_traits::One;
use thiserror::Error;

use crate::graph;
use crate::mdp::{almost_sure_reach, energy_min_credit};
use crate::model::{FiniteMemoryStrategy, LimitObjective, OcSsg, Owner, Player, PureMemorylessStrategy, Ssg, Transition};
use crate::ssg::{fix_strategy, solve_limit_ssg, SsgSolve};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("initial counter must be at least 1")]
    ZeroCounter,
    #[error("level game needs 0 < j < |V| (j = {j}, |V| = {n})")]
    LevelRange { j: u64, n: usize },
    #[error("unknown state index {0}")]
    NoSuchState(usize),
    #[error("invalid strategy: {0}")]
    Strategy(String),
}

/// The game unfolded over accumulated reward levels `lo..=hi`, with
/// `lo = -j`. Both boundary levels are absorbing.
#[derive(Clone, Debug)]
pub struct LevelGame {
    pub j: u64,
    pub lo: i64,
    pub hi: i64,
    pub game: Ssg,
    /// Base state and level of every level state.
    pub origin: Vec<(usize, i64)>,
    /// Bottom level, and every level of a state whose LimInf=-inf value is 1.
    pub target: BTreeSet<usize>,
}

impl LevelGame {
    pub fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn state(&self, u: usize, level: i64) -> Option<usize> {
        (self.lo..=self.hi).contains(&level).then(|| u * self.width() + (level - self.lo) as usize)
    }

    pub fn is_boundary(&self, level: i64) -> bool {
        level == self.lo || level == self.hi
    }
}

/// The standard window `[-j, |V|-j]`; needs the LimInf=-inf value-1 set
/// of the base game.
pub fn build_level_game(game: &OcSsg, j: u64, limit_value_one: &BTreeSet<usize>) -> Result<LevelGame, TermError> {
    let n = game.len();
    if j == 0 || j >= n as u64 {
        return Err(TermError::LevelRange { j, n });
    }
    Ok(level_game_window(game, j, n as i64 - j as i64, limit_value_one))
}

/// Any window `[-j, hi]` with `hi > 0`.
pub fn level_game_window(game: &OcSsg, j: u64, hi: i64, limit_value_one: &BTreeSet<usize>) -> LevelGame {
    assert!(j >= 1 && hi >= 1, "window must contain level 0 in its interior");
    let base = game.as_reward_game();
    let lo = -(j as i64);
    let width = (hi - lo + 1) as usize;
    let mut g = Ssg::new(crate::RewardLocation::Transitions);
    let mut origin = Vec::with_capacity(base.len() * width);
    for u in 0..base.len() {
        for level in lo..=hi {
            g.add_state(format!("{}@{}", base.id(u), level), base.owner(u), None).expect("level ids are unique");
            origin.push((u, level));
        }
    }
    let idx = |u: usize, level: i64| u * width + (level - lo) as usize;
    let mut target = BTreeSet::new();
    for (x, &(u, level)) in origin.iter().enumerate() {
        if level == lo || limit_value_one.contains(&u) {
            target.insert(x);
        }
        let succ = if level == lo || level == hi {
            let prob = (base.owner(u) == Owner::Random).then(Rational::one);
            vec![Transition { target: x, prob, weight: Some(0) }]
        } else {
            base.succ(u)
                .iter()
                .enumerate()
                .map(|(k, t)| Transition {
                    target: idx(t.target, level + base.step_reward(u, k)),
                    prob: t.prob.clone(),
                    weight: Some(base.step_reward(u, k) as i8),
                })
                .collect()
        };
        g.replace_transitions(x, succ);
    }
    LevelGame { j, lo, hi, game: g, origin, target }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `j >= |V|`: value 1 iff the LimInf=-inf value is 1.
    Large,
    LevelGame,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::Large => "large-counter",
            Branch::LevelGame => "level-game",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TermCertificate {
    pub branch: Branch,
    /// LimInf=-inf value-1 states of the base game.
    pub limit_value_one: BTreeSet<usize>,
    /// Level states won almost surely (level game branch only).
    pub almost_sure: Option<BTreeSet<usize>>,
    pub level_states: usize,
}

#[derive(Clone, Debug)]
pub struct TermDecision {
    pub value_one: bool,
    pub certificate: TermCertificate,
}

fn check_query(game: &OcSsg, s: usize, j: u64) -> Result<(), TermError> {
    if j == 0 {
        return Err(TermError::ZeroCounter);
    }
    if s >= game.len() {
        return Err(TermError::NoSuchState(s));
    }
    Ok(())
}

fn limit_solve(game: &OcSsg) -> SsgSolve {
    solve_limit_ssg(game.as_reward_game(), LimitObjective::LimInfEqMinusInf)
}

/// Is the termination value from `s` with counter `j` equal to 1?
pub fn decide_term_one(game: &OcSsg, s: usize, j: u64) -> Result<TermDecision, TermError> {
    check_query(game, s, j)?;
    let w = limit_solve(game).result.value_one_set;
    if j >= game.len() as u64 {
        return Ok(TermDecision {
            value_one: w.contains(&s),
            certificate: TermCertificate { branch: Branch::Large, limit_value_one: w, almost_sure: None, level_states: 0 },
        });
    }
    let lg = build_level_game(game, j, &w)?;
    Ok(level_decision(&lg, s, w))
}

/// The level-game branch on an explicit window `[-j, hi]`, whatever `j`.
pub fn decide_term_one_window(game: &OcSsg, s: usize, j: u64, hi: i64) -> Result<TermDecision, TermError> {
    check_query(game, s, j)?;
    let w = limit_solve(game).result.value_one_set;
    Ok(level_decision(&level_game_window(game, j, hi, &w), s, w))
}

fn level_decision(lg: &LevelGame, s: usize, w: BTreeSet<usize>) -> TermDecision {
    let win = almost_sure_reach(&lg.game, &lg.target, Player::Max).set;
    let start = lg.state(s, 0).expect("level 0 is interior");
    TermDecision {
        value_one: win.contains(&start),
        certificate: TermCertificate {
            branch: Branch::LevelGame,
            limit_value_one: w,
            almost_sure: Some(win),
            level_states: lg.game.len(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermZero {
    pub value_zero: bool,
    /// Least counter value Min needs to avoid termination surely, minus 1
    /// (`None` when no counter suffices).
    pub credit: Option<u64>,
}

/// Is the termination value 0? Min must keep every prefix sum above `-j`
/// against Max and chance together.
pub fn decide_term_zero(game: &OcSsg, s: usize, j: u64) -> Result<TermZero, TermError> {
    check_query(game, s, j)?;
    let credit = energy_min_credit(game.as_reward_game(), Player::Min).credit[s];
    Ok(TermZero { value_zero: credit.is_some_and(|c| c < j), credit })
}

#[derive(Clone, Debug)]
pub struct TermStrategies {
    pub value_one: bool,
    /// Counter-oblivious Max strategy winning almost surely (value 1).
    pub max: Option<PureMemorylessStrategy>,
    /// Min strategy keeping the termination probability below 1 against
    /// every Max strategy (value below 1).
    pub min: Option<FiniteMemoryStrategy>,
    /// The returned strategy passed its exact check.
    pub verified: bool,
}

/// Optimal strategies for the qualitative termination question.
pub fn synthesize_term_strategies(game: &OcSsg, s: usize, j: u64) -> Result<TermStrategies, TermError> {
    check_query(game, s, j)?;
    let base = game.as_reward_game();
    let solve = limit_solve(game);
    let w = solve.result.value_one_set.clone();
    let n = game.len();

    if j >= n as u64 {
        if w.contains(&s) {
            let sigma = solve.max_witness;
            let verified = verify_max(game, &sigma, s, j)?;
            return Ok(TermStrategies { value_one: true, max: Some(sigma), min: None, verified });
        }
        let pi = FiniteMemoryStrategy::from_memoryless(base, &solve.min_witness);
        let verified = verify_min(game, &pi, s, j)?;
        return Ok(TermStrategies { value_one: false, max: None, min: Some(pi), verified });
    }

    let lg = build_level_game(game, j, &w)?;
    let reach = almost_sure_reach(&lg.game, &lg.target, Player::Max);
    let start = lg.state(s, 0).expect("interior");
    if reach.set.contains(&start) {
        let sigma = collapse_max(base, &lg, &reach.reacher, &solve, start);
        let verified = verify_max(game, &sigma, s, j)?;
        Ok(TermStrategies { value_one: true, max: Some(sigma), min: None, verified })
    } else {
        let pi = level_min_strategy(base, &lg, &reach.spoiler, &solve);
        let verified = verify_min(game, &pi, s, j)?;
        Ok(TermStrategies { value_one: false, max: None, min: Some(pi), verified })
    }
}

/// States with LimInf=-inf value 1 keep the limit witness; every other Max
/// state takes the level-game choice at the highest interior level it is
/// visited at from the start under the reaching strategy.
fn collapse_max(
    base: &Ssg,
    lg: &LevelGame,
    reacher: &PureMemorylessStrategy,
    solve: &SsgSolve,
    start: usize,
) -> PureMemorylessStrategy {
    let adj: Vec<Vec<usize>> = (0..lg.game.len())
        .map(|x| match reacher.choice(x) {
            Some(k) => vec![lg.game.succ(x)[k].target],
            None => lg.game.succ(x).iter().map(|t| t.target).collect(),
        })
        .collect();
    let seen = graph::reachable_from(&adj, &[start]);
    let mut top: Vec<Option<(i64, usize)>> = vec![None; base.len()];
    for (x, &(u, level)) in lg.origin.iter().enumerate() {
        if seen[x] && !lg.is_boundary(level) && base.owner(u) == Owner::Max
            && top[u].is_none_or(|(l, _)| level > l) {
                top[u] = Some((level, reacher.choice(x).expect("owned")));
            }
    }
    let choices = (0..base.len())
        .map(|u| {
            if base.owner(u) != Owner::Max {
                None
            } else if solve.result.value_one_set.contains(&u) {
                solve.max_witness.choice(u)
            } else {
                top[u].map(|(_, k)| k).or(solve.max_witness.choice(u))
            }
        })
        .collect();
    PureMemorylessStrategy::new(Player::Max, choices)
}

/// Memory `m < width - 2` is interior level `lo + 1 + m`; the last memory
/// state is entered once the top level is reached and plays the limit
/// witness from then on.
fn level_min_strategy(base: &Ssg, lg: &LevelGame, spoiler: &PureMemorylessStrategy, solve: &SsgSolve) -> FiniteMemoryStrategy {
    let interior = lg.width() - 2;
    let exit = interior;
    let level_of = |m: usize| lg.lo + 1 + m as i64;
    let mut choice = Vec::with_capacity(interior + 1);
    let mut update = Vec::with_capacity(interior + 1);
    for m in 0..=interior {
        choice.push(
            (0..base.len())
                .map(|u| {
                    if base.owner(u) != Owner::Min {
                        None
                    } else if m == exit {
                        solve.min_witness.choice(u)
                    } else {
                        spoiler.choice(lg.state(u, level_of(m)).expect("interior"))
                    }
                })
                .collect(),
        );
        update.push(
            (0..base.len())
                .map(|u| {
                    (0..base.succ(u).len())
                        .map(|k| {
                            if m == exit {
                                return exit;
                            }
                            let next = level_of(m) + base.step_reward(u, k);
                            if next >= lg.hi {
                                exit
                            } else if next <= lg.lo {
                                // Terminated; the memory no longer matters.
                                m
                            } else {
                                (next - lg.lo - 1) as usize
                            }
                        })
                        .collect()
                })
                .collect(),
        );
    }
    FiniteMemoryStrategy { player: Player::Min, initial: (-lg.lo - 1) as usize, update, choice }
}

/// Does `sigma` terminate almost surely against every Min strategy?
pub fn verify_max(game: &OcSsg, sigma: &PureMemorylessStrategy, s: usize, j: u64) -> Result<bool, TermError> {
    let fixed = fix_strategy(game.as_reward_game(), sigma).map_err(|e| TermError::Strategy(e.to_string()))?;
    Ok(decide_term_one(&OcSsg::from_reward_game(fixed), s, j)?.value_one)
}

/// Does `pi` keep the termination probability below 1 against every Max
/// strategy? Decided on the product of the game with the memory.
pub fn verify_min(game: &OcSsg, pi: &FiniteMemoryStrategy, s: usize, j: u64) -> Result<bool, TermError> {
    let base = game.as_reward_game();
    pi.check(base).map_err(TermError::Strategy)?;
    let (product, index) = memory_product(base, pi);
    Ok(!decide_term_one(&OcSsg::from_reward_game(product), index(s, pi.initial), j)?.value_one)
}

/// The game with `fm`'s memory in the state: `(u, m)` has id `u#m` and
/// index `u * |M| + m`; `fm`'s states become random with the single
/// transition the strategy takes.
pub fn memory_product(base: &Ssg, fm: &FiniteMemoryStrategy) -> (Ssg, impl Fn(usize, usize) -> usize) {
    let mem = fm.memory_size();
    let idx = move |u: usize, m: usize| u * mem + m;
    let mut g = Ssg::new(base.reward_location());
    for u in 0..base.len() {
        for m in 0..mem {
            let owner = if base.owner(u) == fm.player.owner() { Owner::Random } else { base.owner(u) };
            g.add_state(format!("{}#{}", base.id(u), m), owner, base.state(u).reward).expect("ids are unique");
        }
    }
    for u in 0..base.len() {
        for m in 0..mem {
            let succ = if base.owner(u) == fm.player.owner() {
                let k = fm.choice[m][u].expect("checked");
                let t = &base.succ(u)[k];
                vec![Transition { target: idx(t.target, fm.update[m][u][k]), prob: Some(Rational::one()), weight: t.weight }]
            } else {
                base.succ(u)
                    .iter()
                    .enumerate()
                    .map(|(k, t)| Transition { target: idx(t.target, fm.update[m][u][k]), prob: t.prob.clone(), weight: t.weight })
                    .collect()
            };
            g.replace_transitions(idx(u, m), succ);
        }
    }
    (g, idx)
}
