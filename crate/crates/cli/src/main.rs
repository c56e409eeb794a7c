//! `ocssg`: exact solvers for stochastic games with rewards, from the
//! command line. Reports are `key = value` lines.

use std::fmt::Display;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ocssg_core::model::state_to_transition_rewards;
use ocssg_core::oracle::{self, PlayerStrategy, Profile, SimConfig};
use ocssg_core::reduce::{condon_to_limit, condon_to_termination};
use ocssg_core::ssg::{decide_threshold, solve_limit_ssg, Relation};
use ocssg_core::termination::{decide_term_one, decide_term_zero, synthesize_term_strategies};
use ocssg_core::{
    fmt_rational, parse_model, FiniteMemoryStrategy, LimitObjective, Model, OcSsg, PureMemorylessStrategy, Rational, Ssg,
};

#[derive(Parser)]
#[command(name = "ocssg", version, about = "Exact solvers for one-counter and reward stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Values and optimal strategies for a limit objective.
    Solve {
        /// Model file, or `-` for standard input.
        model: String,
        /// liminf-minus-inf, liminf-gt-minus-inf, liminf-plus-inf,
        /// liminf-lt-plus-inf, mean-gt or mean-leq.
        #[arg(long)]
        objective: String,
        /// Report only this state.
        #[arg(long)]
        state: Option<String>,
        /// Compare the value at `--state` with this probability.
        #[arg(long, requires_all = ["state", "relation"])]
        threshold: Option<String>,
        #[arg(long, value_enum)]
        relation: Option<Rel>,
        /// Exit with status 1 when the threshold decision is false.
        #[arg(long)]
        exit_status: bool,
    },
    /// Qualitative termination from a state with initial counter `j`.
    Term {
        model: String,
        #[arg(long)]
        j: u64,
        /// Start state (defaults to the first state).
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum)]
        qual: Option<Qual>,
        /// Exit with status 1 when the decision is false.
        #[arg(long)]
        exit_status: bool,
    },
    /// Transform a reachability instance.
    Reduce {
        model: String,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        t2: String,
    },
    /// Monte Carlo runs under the optimal strategies of a limit objective.
    Simulate {
        model: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 1_000)]
        trials: u64,
        #[arg(long)]
        state: Option<String>,
        /// Record hitting times of accumulated reward `-j`.
        #[arg(long)]
        j: Option<u64>,
        #[arg(long, default_value_t = 50)]
        bound: i64,
        /// Objective whose witnesses resolve the players' choices.
        #[arg(long)]
        witness: Option<String>,
    },
    /// Exhaustive enumeration of memoryless profiles, compared with `solve`.
    Oracle {
        model: String,
        /// liminf-minus-inf, liminf-gt-minus-inf, liminf-plus-inf,
        /// liminf-lt-plus-inf, mean-gt or mean-leq.
        #[arg(long)]
        objective: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rel {
    Gt,
    Ge,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Qual {
    One,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    CondonLimit,
    CondonTerm,
}

/// Input problems; reported with exit status 2.
struct InputError(String);

impl<E: Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

#[derive(Default)]
struct Report {
    lines: Vec<String>,
    failed: bool,
}

impl Report {
    fn put(&mut self, key: impl Display, value: impl Display) {
        self.lines.push(format!("{key} = {value}"));
    }
}

fn read_model(path: &str) -> Result<Model, InputError> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))?
    };
    Ok(parse_model(&text)?)
}

fn as_ssg(model: Model) -> Ssg {
    match model {
        Model::Ssg(g) => g,
        Model::OcSsg(g) => g.as_reward_game().clone(),
    }
}

fn as_oc(model: Model) -> Result<OcSsg, InputError> {
    match model {
        Model::OcSsg(g) => Ok(g),
        Model::Ssg(g) => Ok(OcSsg::from_transition_rewards(state_to_transition_rewards(&g))?),
    }
}

fn objective(tag: &str) -> Result<LimitObjective, InputError> {
    LimitObjective::from_tag(tag).ok_or_else(|| {
        let tags: Vec<&str> = LimitObjective::ALL.iter().map(|o| o.tag()).collect();
        InputError(format!("unknown objective `{tag}` (expected one of {})", tags.join(", ")))
    })
}

fn state(game: &Ssg, id: Option<&str>) -> Result<usize, InputError> {
    match id {
        None => Ok(0),
        Some(id) => game.state_index(id).ok_or_else(|| InputError(format!("unknown state `{id}`"))),
    }
}

fn parse_probability(text: &str) -> Result<Rational, InputError> {
    let r: Rational = text.parse().map_err(|_| InputError(format!("bad probability `{text}`")))?;
    Ok(r)
}

fn strategy_lines(rep: &mut Report, game: &Ssg, label: &str, s: &PureMemorylessStrategy) {
    for v in 0..game.len() {
        if let Some(k) = s.choice(v) {
            rep.put(format!("{label}[{}]", game.id(v)), format!("{k}:{}", game.id(game.succ(v)[k].target)));
        }
    }
}

fn memory_lines(rep: &mut Report, game: &Ssg, label: &str, s: &FiniteMemoryStrategy) {
    rep.put(format!("{label}.memory"), s.memory_size());
    rep.put(format!("{label}.initial"), s.initial);
    for m in 0..s.memory_size() {
        for v in 0..game.len() {
            if let Some(k) = s.choice[m][v] {
                rep.put(format!("{label}[{m}][{}]", game.id(v)), format!("{k}:{}", game.id(game.succ(v)[k].target)));
            }
        }
    }
    for m in 0..s.memory_size() {
        for v in 0..game.len() {
            let next: Vec<String> = s.update[m][v].iter().map(|x| x.to_string()).collect();
            rep.put(format!("{label}.update[{m}][{}]", game.id(v)), next.join(","));
        }
    }
}

fn frequency(hits: u64, trials: u64) -> String {
    fmt_rational(&Rational::new(hits.into(), trials.max(1).into()))
}

fn run(cmd: Command) -> Result<Report, InputError> {
    let mut rep = Report::default();
    match cmd {
        Command::Solve { model, objective: tag, state: at, threshold, relation, exit_status } => {
            let game = as_ssg(read_model(&model)?);
            let obj = objective(&tag)?;
            let only = at.as_deref().map(|id| state(&game, Some(id))).transpose()?;
            let r = solve_limit_ssg(&game, obj);
            rep.put("objective", obj.tag());
            rep.put("method", r.method.tag());
            for v in 0..game.len() {
                if only.is_none_or(|s| s == v) {
                    rep.put(game.id(v), fmt_rational(&r.result.values[v]));
                }
            }
            strategy_lines(&mut rep, &game, "max", &r.max_witness);
            strategy_lines(&mut rep, &game, "min", &r.min_witness);
            if let Some(p) = threshold {
                let p = parse_probability(&p)?;
                let rel = match relation.expect("required by clap") {
                    Rel::Gt => Relation::Gt,
                    Rel::Ge => Relation::Ge,
                };
                let s = only.expect("required by clap");
                let yes = decide_threshold(&game, obj, s, &p, rel)?;
                rep.put("decision", yes);
                rep.failed = exit_status && !yes;
            }
        }
        Command::Term { model, j, state: at, qual, exit_status } => {
            let game = as_oc(read_model(&model)?)?;
            let s = state(game.as_reward_game(), at.as_deref())?;
            rep.put("state", game.id(s));
            rep.put("j", j);
            let mut decision = None;
            if qual != Some(Qual::Zero) {
                let d = decide_term_one(&game, s, j)?;
                rep.put("branch", d.certificate.branch.tag());
                rep.put("level_states", d.certificate.level_states);
                let w: Vec<&str> = d.certificate.limit_value_one.iter().map(|&v| game.id(v)).collect();
                rep.put("liminf_minus_inf_value1", format!("{{{}}}", w.join(",")));
                rep.put("value1", d.value_one);
                let st = synthesize_term_strategies(&game, s, j)?;
                if let Some(sigma) = &st.max {
                    strategy_lines(&mut rep, game.as_reward_game(), "max", sigma);
                }
                if let Some(pi) = &st.min {
                    memory_lines(&mut rep, game.as_reward_game(), "min", pi);
                }
                rep.put("strategy_verified", st.verified);
                decision = Some(d.value_one);
            }
            if qual != Some(Qual::One) {
                let z = decide_term_zero(&game, s, j)?;
                rep.put("credit", z.credit.map_or("inf".to_string(), |c| c.to_string()));
                rep.put("value0", z.value_zero);
                decision.get_or_insert(z.value_zero);
            }
            rep.failed = exit_status && decision == Some(false);
        }
        Command::Reduce { model, kind, s, t, t2 } => {
            let game = as_ssg(read_model(&model)?);
            match kind {
                Kind::CondonLimit => {
                    let c = condon_to_limit(&game, &s, &t, &t2)?;
                    rep.lines.push(c.game.to_string().trim_end().to_string());
                }
                Kind::CondonTerm => {
                    let c = condon_to_termination(&game, &s, &t, &t2)?;
                    rep.lines.push(format!("# query: state {} with counter {}", c.game.id(c.s), c.j));
                    rep.lines.push(c.game.to_string().trim_end().to_string());
                }
            }
        }
        Command::Simulate { model, seed, steps, trials, state: at, j, bound, witness } => {
            let seed = seed.ok_or_else(|| InputError("simulate needs an explicit --seed".into()))?;
            if bound <= 0 {
                return Err(InputError("--bound must be positive".into()));
            }
            let game = as_ssg(read_model(&model)?);
            let s = state(&game, at.as_deref())?;
            let profile = match witness {
                Some(tag) => {
                    let r = solve_limit_ssg(&game, objective(&tag)?);
                    Profile {
                        max: Some(PlayerStrategy::Memoryless(r.max_witness)),
                        min: Some(PlayerStrategy::Memoryless(r.min_witness)),
                    }
                }
                None => Profile::default(),
            };
            let mut cfg = SimConfig::new(steps, trials, seed);
            cfg.term_level = j;
            cfg.bound = bound;
            let r = oracle::simulate(&game, &profile, s, &cfg)?;
            let count = |p: &dyn Fn(&oracle::TrialStats) -> bool| r.trials.iter().filter(|t| p(t)).count() as u64;
            rep.put("rng", r.rng);
            rep.put("seed", r.seed);
            rep.put("state", game.id(s));
            rep.put("steps", steps);
            rep.put("trials", trials);
            if let Some(j) = j {
                rep.put("j", j);
                rep.put("term_frequency", frequency(r.hit_count(), trials));
            }
            rep.put("bound", bound);
            rep.put("dipped_below_frequency", frequency(count(&|t| t.dipped_below), trials));
            rep.put("stayed_above_frequency", frequency(count(&|t| t.stayed_above), trials));
            rep.put("mean_positive_frequency", frequency(count(&|t| t.final_sum > 0), trials));
            rep.put("min_prefix", r.min_prefix().unwrap_or(0));
            rep.put("max_prefix", r.max_prefix().unwrap_or(0));
        }
        Command::Oracle { model, objective: tag } => {
            let game = as_ssg(read_model(&model)?);
            let obj = objective(&tag)?;
            let e = oracle::enumerate_solve(&game, obj)?;
            let r = solve_limit_ssg(&game, obj);
            rep.put("objective", obj.tag());
            for v in 0..game.len() {
                rep.put(game.id(v), fmt_rational(&e.values[v]));
            }
            rep.put("agrees", e.values == r.result.values);
        }
    }
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(rep) => {
            for line in &rep.lines {
                println!("{line}");
            }
            if rep.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
