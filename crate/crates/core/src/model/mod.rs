//! Game models: finite simple stochastic games with rewards, one-counter
//! games, strategies, objectives and solve results.
//!
//! Models are built once (by the parser or the builder methods) and then
//! treated as immutable by every solver.

mod parse;
mod print;
mod transform;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::Rational;

pub use parse::{parse_model, ParseError};
pub use transform::{oc_to_reward_ssg, state_to_transition_rewards, transition_to_state_rewards};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Max,
    Min,
    Random,
}

impl Owner {
    pub fn keyword(self) -> &'static str {
        match self {
            Owner::Max => "max",
            Owner::Min => "min",
            Owner::Random => "rand",
        }
    }

    pub fn player(self) -> Option<Player> {
        match self {
            Owner::Max => Some(Player::Max),
            Owner::Min => Some(Player::Min),
            Owner::Random => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Max,
    Min,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Max => Player::Min,
            Player::Min => Player::Max,
        }
    }

    pub fn owner(self) -> Owner {
        match self {
            Player::Max => Owner::Max,
            Player::Min => Owner::Min,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Max => "max",
            Player::Min => "min",
        })
    }
}

/// Optimisation direction of the controller of a one-player model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RewardLocation {
    States,
    Transitions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub id: String,
    pub owner: Owner,
    /// Present iff rewards live on states.
    pub reward: Option<i8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub target: usize,
    /// Present iff the source state is random.
    pub prob: Option<Rational>,
    /// Transition reward, or the counter delta in a one-counter game.
    pub weight: Option<i8>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("reward {0} outside {{-1,0,1}}")]
    RewardOutOfRange(i64),
    #[error("model is invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// A finite simple stochastic game with rewards in {-1,0,+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ssg {
    states: Vec<State>,
    transitions: Vec<Vec<Transition>>,
    reward_location: RewardLocation,
    index: HashMap<String, usize>,
}

impl Ssg {
    pub fn new(reward_location: RewardLocation) -> Self {
        Ssg {
            states: Vec::new(),
            transitions: Vec::new(),
            reward_location,
            index: HashMap::new(),
        }
    }

    pub fn add_state(
        &mut self,
        id: impl Into<String>,
        owner: Owner,
        reward: Option<i8>,
    ) -> Result<usize, ModelError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(ModelError::DuplicateState(id));
        }
        if let Some(r) = reward {
            check_unit(r as i64)?;
        }
        let i = self.states.len();
        self.index.insert(id.clone(), i);
        self.states.push(State { id, owner, reward });
        self.transitions.push(Vec::new());
        Ok(i)
    }

    pub fn add_transition(
        &mut self,
        src: usize,
        dst: usize,
        prob: Option<Rational>,
        reward: Option<i8>,
    ) -> Result<usize, ModelError> {
        if src >= self.states.len() {
            return Err(ModelError::StateOutOfRange(src));
        }
        if dst >= self.states.len() {
            return Err(ModelError::StateOutOfRange(dst));
        }
        if let Some(r) = reward {
            check_unit(r as i64)?;
        }
        self.transitions[src].push(Transition { target: dst, prob, weight: reward });
        Ok(self.transitions[src].len() - 1)
    }

    /// Adds a transition between named states.
    pub fn connect(
        &mut self,
        src: &str,
        dst: &str,
        prob: Option<Rational>,
        reward: Option<i8>,
    ) -> Result<usize, ModelError> {
        let s = self.require(src)?;
        let d = self.require(dst)?;
        self.add_transition(s, d, prob, reward)
    }

    fn require(&self, id: &str) -> Result<usize, ModelError> {
        self.state_index(id).ok_or_else(|| ModelError::UnknownState(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn reward_location(&self) -> RewardLocation {
        self.reward_location
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.states[s].id
    }

    pub fn owner(&self, s: usize) -> Owner {
        self.states[s].owner
    }

    pub fn succ(&self, s: usize) -> &[Transition] {
        &self.transitions[s]
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    /// Reward collected when leaving `s` along transition `k`. With state
    /// rewards this is the reward of `s` itself, so partial sums along a run
    /// agree with the state-reward sums up to the current position.
    pub fn step_reward(&self, s: usize, k: usize) -> i64 {
        match self.reward_location {
            RewardLocation::States => self.states[s].reward.unwrap_or(0) as i64,
            RewardLocation::Transitions => self.transitions[s][k].weight.unwrap_or(0) as i64,
        }
    }

    /// Probability of transition `k` when `s` is random; 1 otherwise.
    pub fn step_prob(&self, s: usize, k: usize) -> Rational {
        self.transitions[s][k].prob.clone().unwrap_or_else(Rational::one)
    }

    pub fn has_owner(&self, owner: Owner) -> bool {
        self.states.iter().any(|st| st.owner == owner)
    }

    pub fn states_of(&self, owner: Owner) -> impl Iterator<Item = usize> + '_ {
        self.states.iter().enumerate().filter(move |(_, st)| st.owner == owner).map(|(i, _)| i)
    }

    /// Changes the owner of a state. Probabilities are filled in (uniformly)
    /// or dropped so that the transition records stay consistent.
    pub fn set_owner(&mut self, s: usize, owner: Owner) {
        self.states[s].owner = owner;
        let n = self.transitions[s].len();
        for t in &mut self.transitions[s] {
            if owner == Owner::Random {
                if t.prob.is_none() {
                    t.prob = Some(Rational::new(1.into(), (n as i64).into()));
                }
            } else {
                t.prob = None;
            }
        }
    }

    /// Replaces every transition of `s`.
    pub fn replace_transitions(&mut self, s: usize, transitions: Vec<Transition>) {
        self.transitions[s] = transitions;
    }

    pub fn set_state_reward(&mut self, s: usize, reward: Option<i8>) {
        self.states[s].reward = reward;
    }

    /// Lists every broken invariant; empty iff the model is well formed.
    pub fn validate(&self) -> Vec<String> {
        validate_graph(&self.states, &self.transitions, |out, s, st| {
            match self.reward_location {
                RewardLocation::States => {
                    if st.reward.is_none() {
                        out.push(format!("{}: missing state reward", st.id));
                    }
                    for (k, t) in self.transitions[s].iter().enumerate() {
                        if t.weight.is_some() {
                            out.push(format!("{}#{}: reward on transition in a state-reward game", st.id, k));
                        }
                    }
                }
                RewardLocation::Transitions => {
                    if st.reward.is_some() {
                        out.push(format!("{}: reward on state in a transition-reward game", st.id));
                    }
                    for (k, t) in self.transitions[s].iter().enumerate() {
                        if t.weight.is_none() {
                            out.push(format!("{}#{}: missing transition reward", st.id, k));
                        }
                    }
                }
            }
        })
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(v))
        }
    }
}

fn check_unit(r: i64) -> Result<(), ModelError> {
    if (-1..=1).contains(&r) {
        Ok(())
    } else {
        Err(ModelError::RewardOutOfRange(r))
    }
}

fn validate_graph(
    states: &[State],
    transitions: &[Vec<Transition>],
    mut reward_check: impl FnMut(&mut Vec<String>, usize, &State),
) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (s, st) in states.iter().enumerate() {
        if seen.insert(st.id.as_str(), s).is_some() {
            out.push(format!("{}: duplicate state id", st.id));
        }
        let succ = &transitions[s];
        if succ.is_empty() {
            out.push(format!("{}: no successor", st.id));
        }
        for (k, t) in succ.iter().enumerate() {
            if t.target >= states.len() {
                out.push(format!("{}#{}: dangling target", st.id, k));
            }
            if let Some(w) = t.weight {
                if !(-1..=1).contains(&w) {
                    out.push(format!("{}#{}: weight {} outside {{-1,0,1}}", st.id, k, w));
                }
            }
        }
        if st.owner == Owner::Random {
            let mut sum = Rational::zero();
            for (k, t) in succ.iter().enumerate() {
                match &t.prob {
                    None => out.push(format!("{}#{}: missing probability", st.id, k)),
                    Some(p) => {
                        if !p.is_positive() {
                            out.push(format!("{}#{}: positivity violated", st.id, k));
                        }
                        sum += p;
                    }
                }
            }
            if !succ.is_empty() && sum != Rational::one() {
                out.push(format!("{}: probabilities sum {} ≠ 1", st.id, fmt_rational(&sum)));
            }
        } else {
            for (k, t) in succ.iter().enumerate() {
                if t.prob.is_some() {
                    out.push(format!("{}#{}: probability on a player state", st.id, k));
                }
            }
        }
        reward_check(&mut out, s, st);
    }
    out
}

/// A one-counter simple stochastic game: every transition carries a counter
/// delta in {-1,0,+1}. Stored as a transition-weighted graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OcSsg {
    graph: Ssg,
}

impl Default for OcSsg {
    fn default() -> Self {
        Self::new()
    }
}

impl OcSsg {
    pub fn new() -> Self {
        OcSsg { graph: Ssg::new(RewardLocation::Transitions) }
    }

    pub fn add_state(&mut self, id: impl Into<String>, owner: Owner) -> Result<usize, ModelError> {
        self.graph.add_state(id, owner, None)
    }

    pub fn add_transition(
        &mut self,
        src: usize,
        dst: usize,
        prob: Option<Rational>,
        delta: i8,
    ) -> Result<usize, ModelError> {
        self.graph.add_transition(src, dst, prob, Some(delta))
    }

    pub fn connect(
        &mut self,
        src: &str,
        dst: &str,
        prob: Option<Rational>,
        delta: i8,
    ) -> Result<usize, ModelError> {
        self.graph.connect(src, dst, prob, Some(delta))
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn states(&self) -> &[State] {
        self.graph.states()
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.graph.state_index(id)
    }

    pub fn id(&self, s: usize) -> &str {
        self.graph.id(s)
    }

    pub fn owner(&self, s: usize) -> Owner {
        self.graph.owner(s)
    }

    pub fn succ(&self, s: usize) -> &[Transition] {
        self.graph.succ(s)
    }

    pub fn num_transitions(&self) -> usize {
        self.graph.num_transitions()
    }

    pub fn delta(&self, s: usize, k: usize) -> i64 {
        self.graph.step_reward(s, k)
    }

    /// The same graph read as a transition-reward game.
    pub fn as_reward_game(&self) -> &Ssg {
        &self.graph
    }

    /// Reads a transition-reward game as counter deltas.
    pub fn from_transition_rewards(graph: Ssg) -> Result<Self, ModelError> {
        if graph.reward_location() != RewardLocation::Transitions {
            return Err(ModelError::Invalid(vec!["counter deltas must sit on transitions".into()]));
        }
        let g = OcSsg { graph };
        g.ensure_valid()?;
        Ok(g)
    }

    pub(crate) fn from_reward_game(graph: Ssg) -> Self {
        debug_assert_eq!(graph.reward_location(), RewardLocation::Transitions);
        OcSsg { graph }
    }

    pub fn validate(&self) -> Vec<String> {
        let g = &self.graph;
        validate_graph(&g.states, &g.transitions, |out, s, st| {
            if st.reward.is_some() {
                out.push(format!("{}: one-counter states carry no reward", st.id));
            }
            for (k, t) in g.transitions[s].iter().enumerate() {
                if t.weight.is_none() {
                    out.push(format!("{}#{}: missing counter delta", st.id, k));
                }
            }
        })
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(v))
        }
    }
}

/// Either kind of parsed model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Ssg(Ssg),
    OcSsg(OcSsg),
}

impl Model {
    pub fn validate(&self) -> Vec<String> {
        match self {
            Model::Ssg(g) => g.validate(),
            Model::OcSsg(g) => g.validate(),
        }
    }
}

/// Pure memoryless strategy: one transition index per owned state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PureMemorylessStrategy {
    pub player: Player,
    choice: Vec<Option<usize>>,
}

impl PureMemorylessStrategy {
    pub fn new(player: Player, choice: Vec<Option<usize>>) -> Self {
        PureMemorylessStrategy { player, choice }
    }

    /// Picks transition 0 everywhere.
    pub fn first_choice(game: &Ssg, player: Player) -> Self {
        let choice = (0..game.len())
            .map(|s| (game.owner(s) == player.owner()).then_some(0))
            .collect();
        PureMemorylessStrategy { player, choice }
    }

    pub fn choice(&self, s: usize) -> Option<usize> {
        self.choice.get(s).copied().flatten()
    }

    pub fn choices(&self) -> &[Option<usize>] {
        &self.choice
    }

    pub fn set(&mut self, s: usize, k: usize) {
        self.choice[s] = Some(k);
    }

    /// Checks that the strategy is defined on exactly the owned states and
    /// that each chosen index exists.
    pub fn check(&self, game: &Ssg) -> Result<(), String> {
        if self.choice.len() != game.len() {
            return Err(format!(
                "strategy covers {} states, game has {}",
                self.choice.len(),
                game.len()
            ));
        }
        for s in 0..game.len() {
            let owned = game.owner(s) == self.player.owner();
            match (owned, self.choice[s]) {
                (true, None) => return Err(format!("{}: no choice", game.id(s))),
                (true, Some(k)) if k >= game.succ(s).len() => {
                    return Err(format!("{}: choice {} out of range", game.id(s), k))
                }
                (false, Some(_)) => {
                    return Err(format!("{}: choice at a state not owned by {}", game.id(s), self.player))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Pure strategy driven by a finite memory automaton. Memory is updated on
/// every step from the transition just taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMemoryStrategy {
    pub player: Player,
    pub initial: usize,
    /// `update[m][s][k]`: memory after leaving `s` along transition `k` in memory `m`.
    pub update: Vec<Vec<Vec<usize>>>,
    /// `choice[m][s]`: transition taken at owned state `s` in memory `m`.
    pub choice: Vec<Vec<Option<usize>>>,
}

impl FiniteMemoryStrategy {
    pub fn memory_size(&self) -> usize {
        self.choice.len()
    }

    pub fn from_memoryless(game: &Ssg, strategy: &PureMemorylessStrategy) -> Self {
        let update = vec![(0..game.len()).map(|s| vec![0; game.succ(s).len()]).collect()];
        FiniteMemoryStrategy {
            player: strategy.player,
            initial: 0,
            update,
            choice: vec![strategy.choices().to_vec()],
        }
    }

    pub fn check(&self, game: &Ssg) -> Result<(), String> {
        let m = self.memory_size();
        if m == 0 || self.initial >= m || self.update.len() != m {
            return Err("malformed memory automaton".into());
        }
        for mem in 0..m {
            PureMemorylessStrategy::new(self.player, self.choice[mem].clone()).check(game)?;
            if self.update[mem].len() != game.len() {
                return Err("update table has wrong size".into());
            }
            for s in 0..game.len() {
                if self.update[mem][s].len() != game.succ(s).len()
                    || self.update[mem][s].iter().any(|&n| n >= m)
                {
                    return Err(format!("{}: bad memory update", game.id(s)));
                }
            }
        }
        Ok(())
    }
}

/// Limit and mean-payoff objectives; all of them are tail objectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LimitObjective {
    LimInfEqMinusInf,
    LimInfEqPlusInf,
    LimInfGtMinusInf,
    LimInfLtPlusInf,
    MeanGt,
    MeanLeq,
}

impl LimitObjective {
    pub const ALL: [LimitObjective; 6] = [
        LimitObjective::LimInfEqMinusInf,
        LimitObjective::LimInfEqPlusInf,
        LimitObjective::LimInfGtMinusInf,
        LimitObjective::LimInfLtPlusInf,
        LimitObjective::MeanGt,
        LimitObjective::MeanLeq,
    ];

    /// The objective holding on exactly the runs where `self` fails.
    pub fn complement(self) -> Self {
        use LimitObjective::*;
        match self {
            LimInfEqMinusInf => LimInfGtMinusInf,
            LimInfGtMinusInf => LimInfEqMinusInf,
            LimInfEqPlusInf => LimInfLtPlusInf,
            LimInfLtPlusInf => LimInfEqPlusInf,
            MeanGt => MeanLeq,
            MeanLeq => MeanGt,
        }
    }

    pub fn tag(self) -> &'static str {
        use LimitObjective::*;
        match self {
            LimInfEqMinusInf => "liminf-minus-inf",
            LimInfEqPlusInf => "liminf-plus-inf",
            LimInfGtMinusInf => "liminf-gt-minus-inf",
            LimInfLtPlusInf => "liminf-lt-plus-inf",
            MeanGt => "mean-gt",
            MeanLeq => "mean-leq",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.tag() == tag)
    }
}

impl fmt::Display for LimitObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Accumulated reward eventually hits `-j` (counter reaches zero from `j`).
    Term(u32),
    Limit(LimitObjective),
    Reach(BTreeSet<usize>),
    /// Every prefix sum is non-negative.
    AllGeqZero,
}

impl Objective {
    pub fn check(&self, game: &Ssg) -> Result<(), String> {
        match self {
            Objective::Term(0) => Err("termination needs j ≥ 1".into()),
            Objective::Reach(t) if t.is_empty() => Err("reachability target is empty".into()),
            Objective::Reach(t) if t.iter().any(|&s| s >= game.len()) => {
                Err("reachability target names a missing state".into())
            }
            _ => Ok(()),
        }
    }
}

impl From<LimitObjective> for Objective {
    fn from(o: LimitObjective) -> Self {
        Objective::Limit(o)
    }
}

/// Exact per-state values with optional witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub values: Vec<Rational>,
    pub witness_max: Option<PureMemorylessStrategy>,
    pub witness_min: Option<PureMemorylessStrategy>,
    pub value_one_set: BTreeSet<usize>,
}

impl SolveResult {
    pub fn new(
        values: Vec<Rational>,
        witness_max: Option<PureMemorylessStrategy>,
        witness_min: Option<PureMemorylessStrategy>,
    ) -> Self {
        let value_one_set = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_one())
            .map(|(i, _)| i)
            .collect();
        SolveResult { values, witness_max, witness_min, value_one_set }
    }
}

/// `num/den` in lowest terms, as used in every report.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
