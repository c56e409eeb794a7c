//! Exact solvers for simple stochastic games with rewards and one-counter
//! stochastic games: termination, limit and mean-payoff objectives.
//!
//! All values are exact rationals. Models are parsed from a small text format
//! (see [`model::parse_model`]) and never mutated by the solvers.

pub mod chain;
pub mod graph;
pub mod linalg;
pub mod mdp;
pub mod model;
pub mod oracle;
pub mod reduce;
pub mod ssg;
pub mod termination;

pub type Rational = num_rational::BigRational;

pub use model::{
    fmt_rational, parse_model, FiniteMemoryStrategy, LimitObjective, Model, ModelError, Objective,
    OcSsg, Owner, ParseError, Player, PureMemorylessStrategy, RewardLocation, SolveResult, Ssg,
};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::{parse_model, Model, Ssg};
    use crate::Rational;

    pub fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    pub fn ssg(text: &str) -> Ssg {
        match parse_model(text).unwrap() {
            Model::Ssg(g) => g,
            Model::OcSsg(g) => g.as_reward_game().clone(),
        }
    }
}
