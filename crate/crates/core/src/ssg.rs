//! Two-player solving: exact best responses, strategy improvement for Min
//! with exhaustive enumeration as the fallback, and threshold queries.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::mdp::{self, quantitative_limit, MdpError};
use crate::model::{Direction, LimitObjective, Owner, Player, PureMemorylessStrategy, SolveResult, Ssg, Transition};
use crate::oracle::{count_strategies, memoryless_strategies};
use crate::Rational;

/// Enumeration of one player's strategies always runs below this size.
pub const ENUMERATION_FALLBACK: u128 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SsgError {
    #[error("invalid strategy: {0}")]
    Strategy(String),
    #[error("unknown state index {0}")]
    NoSuchState(usize),
    #[error("threshold {0} outside [0,1]")]
    Threshold(String),
}

/// What Max tries to achieve. Min minimises its probability.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Goal {
    Limit(LimitObjective),
    Reach(BTreeSet<usize>),
    /// Never visit the set.
    Avoid(BTreeSet<usize>),
}

impl Goal {
    pub fn complement(&self) -> Goal {
        match self {
            Goal::Limit(o) => Goal::Limit(o.complement()),
            Goal::Reach(t) => Goal::Avoid(t.clone()),
            Goal::Avoid(t) => Goal::Reach(t.clone()),
        }
    }

    fn check(&self, game: &Ssg) -> Result<(), SsgError> {
        match self {
            Goal::Limit(_) => Ok(()),
            Goal::Reach(t) | Goal::Avoid(t) => match t.iter().find(|&&s| s >= game.len()) {
                Some(&s) => Err(SsgError::NoSuchState(s)),
                None => Ok(()),
            },
        }
    }
}

impl From<LimitObjective> for Goal {
    fn from(o: LimitObjective) -> Self {
        Goal::Limit(o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Improvement,
    Enumeration,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Improvement => "improvement",
            Method::Enumeration => "enumeration",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsgSolve {
    pub result: SolveResult,
    pub max_witness: PureMemorylessStrategy,
    pub min_witness: PureMemorylessStrategy,
    pub method: Method,
    /// Whether improvement and enumeration both ran (and agreed, which is
    /// checked before returning).
    pub cross_checked: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Gt,
    Ge,
}

/// The game where `fixed.player` always takes its chosen transition: its
/// states become random states with a single probability-1 transition.
pub fn fix_strategy(game: &Ssg, fixed: &PureMemorylessStrategy) -> Result<Ssg, SsgError> {
    fixed.check(game).map_err(SsgError::Strategy)?;
    Ok(fix_choices(game, fixed.player, fixed.choices()))
}

fn fix_choices(game: &Ssg, player: Player, choices: &[Option<usize>]) -> Ssg {
    let mut g = game.clone();
    for s in game.states_of(player.owner()) {
        let k = choices[s].expect("checked strategy");
        let t = &game.succ(s)[k];
        g.set_owner(s, Owner::Random);
        g.replace_transitions(s, vec![Transition { target: t.target, prob: Some(Rational::one()), weight: t.weight }]);
    }
    g
}

/// Values of `goal` against the fixed strategy, with the opponent's best
/// response (choices at its own states).
fn respond(game: &Ssg, player: Player, choices: &[Option<usize>], goal: &Goal) -> (Vec<Rational>, Vec<Option<usize>>) {
    let residual = fix_choices(game, player, choices);
    let dir = match player {
        Player::Max => Direction::Min,
        Player::Min => Direction::Max,
    };
    let flip = |d: Direction| match d {
        Direction::Max => Direction::Min,
        Direction::Min => Direction::Max,
    };
    let res = match goal {
        Goal::Limit(o) => quantitative_limit(&residual, *o, dir),
        Goal::Reach(t) => mdp::solve_reachability(&residual, t, dir),
        Goal::Avoid(t) => mdp::solve_reachability(&residual, t, flip(dir)).map(|mut r| {
            r.values = r.values.into_iter().map(|v| Rational::one() - v).collect();
            r
        }),
    }
    .unwrap_or_else(|e: MdpError| unreachable!("residual is a one-player model: {e}"));
    let opp = player.opponent().owner();
    let witness = res.witness_max.or(res.witness_min);
    let reply = (0..game.len())
        .map(|s| if game.owner(s) == opp { witness.as_ref().and_then(|w| w.choice(s)) } else { None })
        .collect();
    (res.values, reply)
}

/// Exact values of a limit objective when `fixed` is played, and the
/// opponent's optimal pure memoryless reply as witness.
pub fn best_response(game: &Ssg, fixed: &PureMemorylessStrategy, obj: LimitObjective) -> Result<SolveResult, SsgError> {
    best_response_goal(game, fixed, &Goal::Limit(obj))
}

pub fn best_response_goal(game: &Ssg, fixed: &PureMemorylessStrategy, goal: &Goal) -> Result<SolveResult, SsgError> {
    fixed.check(game).map_err(SsgError::Strategy)?;
    goal.check(game)?;
    let (values, reply) = respond(game, fixed.player, fixed.choices(), goal);
    let other = PureMemorylessStrategy::new(fixed.player.opponent(), reply);
    Ok(match fixed.player {
        Player::Max => SolveResult::new(values, Some(fixed.clone()), Some(other)),
        Player::Min => SolveResult::new(values, Some(other), Some(fixed.clone())),
    })
}

/// Min's side of the game: values and an optimal Min strategy.
struct Half {
    values: Vec<Rational>,
    min_choices: Vec<Option<usize>>,
    improved: Option<Vec<Rational>>,
    enumerated: bool,
}

struct Responder<'a> {
    game: &'a Ssg,
    goal: &'a Goal,
    memo: HashMap<Vec<Option<usize>>, Vec<Rational>>,
}

impl Responder<'_> {
    fn values(&mut self, pi: &[Option<usize>]) -> Vec<Rational> {
        if let Some(v) = self.memo.get(pi) {
            return v.clone();
        }
        let v = respond(self.game, Player::Min, pi, self.goal).0;
        self.memo.insert(pi.to_vec(), v.clone());
        v
    }
}

/// Local search over Min strategies: in state order, take the first
/// single switch (smallest index) that lowers some value and raises none.
/// `None` if a profile is revisited.
fn improve(r: &mut Responder) -> Option<(Vec<Rational>, Vec<Option<usize>>)> {
    let game = r.game;
    let mut pi = PureMemorylessStrategy::first_choice(game, Player::Min).choices().to_vec();
    let mut seen = HashSet::new();
    let mut v = r.values(&pi);
    'outer: loop {
        if !seen.insert(pi.clone()) {
            return None;
        }
        for s in game.states_of(Owner::Min) {
            for k in 0..game.succ(s).len() {
                if Some(k) == pi[s] {
                    continue;
                }
                let mut cand = pi.clone();
                cand[s] = Some(k);
                let w = r.values(&cand);
                if w != v && w.iter().zip(&v).all(|(a, b)| a <= b) {
                    pi = cand;
                    v = w;
                    continue 'outer;
                }
            }
        }
        return Some((v, pi));
    }
}

fn enumerate(game: &Ssg, goal: &Goal) -> (Vec<Rational>, Vec<Option<usize>>) {
    let pis = memoryless_strategies(game, Player::Min);
    let all: Vec<Vec<Rational>> = pis.par_iter().map(|pi| respond(game, Player::Min, pi.choices(), goal).0).collect();
    let values: Vec<Rational> = (0..game.len())
        .map(|s| all.iter().map(|v| &v[s]).min().expect("at least one strategy").clone())
        .collect();
    let best = all.iter().position(|v| *v == values).expect("memoryless optimal strategies exist");
    (values, pis[best].choices().to_vec())
}

fn half_solve(game: &Ssg, goal: &Goal, force_enumeration: bool) -> Half {
    let mut r = Responder { game, goal, memo: HashMap::new() };
    let improved = improve(&mut r);
    let small = count_strategies(game, Player::Min) <= ENUMERATION_FALLBACK;
    if small || force_enumeration || improved.is_none() {
        let (values, min_choices) = enumerate(game, goal);
        return Half { values, min_choices, improved: improved.map(|x| x.0), enumerated: true };
    }
    let (values, min_choices) = improved.expect("checked");
    Half { improved: Some(values.clone()), values, min_choices, enumerated: false }
}

/// Max and Min swap roles.
fn swapped(game: &Ssg) -> Ssg {
    let mut g = game.clone();
    for s in 0..game.len() {
        match game.owner(s) {
            Owner::Max => g.set_owner(s, Owner::Min),
            Owner::Min => g.set_owner(s, Owner::Max),
            Owner::Random => {}
        }
    }
    g
}

/// Exact values of a limit objective with pure memoryless witnesses for
/// both players.
pub fn solve_limit_ssg(game: &Ssg, obj: LimitObjective) -> SsgSolve {
    solve_goal(game, &Goal::Limit(obj)).expect("limit goals need no state arguments")
}

/// Solves any goal. Min's witness comes from Min's side of the game, Max's
/// from Min's side of the role-swapped game with the complementary goal;
/// the two sides bound the value from above and below, so agreement
/// certifies both.
pub fn solve_goal(game: &Ssg, goal: &Goal) -> Result<SsgSolve, SsgError> {
    goal.check(game)?;
    let sw = swapped(game);
    let comp = goal.complement();
    let mut low = half_solve(game, goal, false);
    let mut high = half_solve(&sw, &comp, false);
    let certified = |a: &Half, b: &Half| a.values.iter().zip(&b.values).all(|(x, y)| x + y == Rational::one());
    if !certified(&low, &high) {
        if !low.enumerated {
            low = half_solve(game, goal, true);
        }
        if !high.enumerated {
            high = half_solve(&sw, &comp, true);
        }
    }
    assert!(certified(&low, &high), "enumerated sides must meet");
    let agreed = |h: &Half| h.improved.as_ref() == Some(&h.values);
    let method = if agreed(&low) && agreed(&high) { Method::Improvement } else { Method::Enumeration };
    let cross_checked = low.enumerated && high.enumerated && method == Method::Improvement;
    let max_witness = PureMemorylessStrategy::new(Player::Max, high.min_choices);
    let min_witness = PureMemorylessStrategy::new(Player::Min, low.min_choices);
    Ok(SsgSolve {
        result: SolveResult::new(low.values, Some(max_witness.clone()), Some(min_witness.clone())),
        max_witness,
        min_witness,
        method,
        cross_checked,
    })
}

/// Compares the exact value at `s` with `p`.
pub fn decide_threshold(
    game: &Ssg,
    obj: LimitObjective,
    s: usize,
    p: &Rational,
    relation: Relation,
) -> Result<bool, SsgError> {
    if s >= game.len() {
        return Err(SsgError::NoSuchState(s));
    }
    if *p < Rational::zero() || *p > Rational::one() {
        return Err(SsgError::Threshold(crate::fmt_rational(p)));
    }
    let v = &solve_limit_ssg(game, obj).result.values[s];
    Ok(match relation {
        Relation::Gt => v > p,
        Relation::Ge => v >= p,
    })
}
