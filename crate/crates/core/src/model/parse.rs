//! Line-oriented text format.
//!
//! ```text
//! # comment
//! ssg rewards=states|transitions      (or: ocssg)
//! state <id> owner=max|min|rand [reward=<-1|0|1>]
//! trans <src> -> <dst> [p=<num>/<den>] [reward=<-1|0|1>] [delta=<-1|0|1>]
//! ```

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{Model, OcSsg, Owner, RewardLocation, Ssg};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: expected {expected}, found `{found}`")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Ssg(RewardLocation),
    OcSsg,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in body.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &body[s..i], column: body[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &body[s..], column: body[..s].chars().count() + 1 });
    }
    out
}

struct PendingTransition {
    line: usize,
    src: String,
    dst: String,
    prob: Option<Rational>,
    reward: Option<i8>,
    delta: Option<i8>,
}

fn syntax(line: usize, column: usize, expected: &str, found: &str) -> ParseError {
    ParseError::Syntax { line, column, expected: expected.to_string(), found: found.to_string() }
}

fn semantic(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Semantic { line, message: message.into() }
}

fn parse_unit(line: usize, tok: &Token<'_>, value: &str) -> Result<i8, ParseError> {
    let v: i64 = value
        .parse()
        .map_err(|_| syntax(line, tok.column, "an integer in {-1,0,1}", tok.text))?;
    if !(-1..=1).contains(&v) {
        return Err(semantic(line, format!("value {} outside {{-1,0,1}}", v)));
    }
    Ok(v as i8)
}

fn parse_prob(line: usize, tok: &Token<'_>, value: &str) -> Result<Rational, ParseError> {
    let bad = || syntax(line, tok.column, "a probability <num>/<den>", tok.text);
    let (n, d) = match value.split_once('/') {
        Some((n, d)) => (n, d),
        None => (value, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(semantic(line, "probability with zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Parses a model in the text format, validating it completely.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    let mut kind: Option<Kind> = None;
    let mut g = Ssg::new(RewardLocation::States);
    let mut state_line: Vec<usize> = Vec::new();
    let mut pending: Vec<PendingTransition> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };

        let Some(k) = kind else {
            kind = Some(match head.text {
                "ocssg" => {
                    if let Some(extra) = toks.get(1) {
                        return Err(syntax(line, extra.column, "end of line", extra.text));
                    }
                    g = Ssg::new(RewardLocation::Transitions);
                    Kind::OcSsg
                }
                "ssg" => {
                    let tok = toks.get(1).ok_or_else(|| {
                        syntax(line, raw.chars().count() + 1, "rewards=states|transitions", "")
                    })?;
                    let loc = match tok.text {
                        "rewards=states" => RewardLocation::States,
                        "rewards=transitions" => RewardLocation::Transitions,
                        _ => return Err(syntax(line, tok.column, "rewards=states|transitions", tok.text)),
                    };
                    if let Some(extra) = toks.get(2) {
                        return Err(syntax(line, extra.column, "end of line", extra.text));
                    }
                    g = Ssg::new(loc);
                    Kind::Ssg(loc)
                }
                _ => return Err(syntax(line, head.column, "`ssg` or `ocssg` header", head.text)),
            });
            continue;
        };

        match head.text {
            "state" => {
                let id = toks
                    .get(1)
                    .ok_or_else(|| syntax(line, raw.chars().count() + 1, "state id", ""))?;
                let mut owner = None;
                let mut reward = None;
                for tok in &toks[2..] {
                    match tok.text.split_once('=') {
                        Some(("owner", v)) => {
                            owner = Some(match v {
                                "max" => Owner::Max,
                                "min" => Owner::Min,
                                "rand" => Owner::Random,
                                _ => return Err(syntax(line, tok.column, "owner=max|min|rand", tok.text)),
                            })
                        }
                        Some(("reward", v)) => reward = Some(parse_unit(line, tok, v)?),
                        _ => return Err(syntax(line, tok.column, "owner=… or reward=…", tok.text)),
                    }
                }
                let owner = owner.ok_or_else(|| semantic(line, format!("{}: missing owner", id.text)))?;
                match (k, reward) {
                    (Kind::Ssg(RewardLocation::States), None) => {
                        return Err(semantic(line, format!("{}: missing state reward", id.text)))
                    }
                    (Kind::Ssg(RewardLocation::Transitions) | Kind::OcSsg, Some(_)) => {
                        return Err(semantic(line, format!("{}: rewards are not placed on states", id.text)))
                    }
                    _ => {}
                }
                g.add_state(id.text, owner, reward)
                    .map_err(|e| semantic(line, e.to_string()))?;
                state_line.push(line);
            }
            "trans" => {
                let src = toks.get(1).ok_or_else(|| syntax(line, raw.chars().count() + 1, "source id", ""))?;
                match toks.get(2) {
                    Some(t) if t.text == "->" => {}
                    Some(t) => return Err(syntax(line, t.column, "`->`", t.text)),
                    None => return Err(syntax(line, raw.chars().count() + 1, "`->`", "")),
                }
                let dst = toks.get(3).ok_or_else(|| syntax(line, raw.chars().count() + 1, "target id", ""))?;
                let mut tr = PendingTransition {
                    line,
                    src: src.text.to_string(),
                    dst: dst.text.to_string(),
                    prob: None,
                    reward: None,
                    delta: None,
                };
                for tok in &toks[4..] {
                    match tok.text.split_once('=') {
                        Some(("p", v)) => tr.prob = Some(parse_prob(line, tok, v)?),
                        Some(("reward", v)) => tr.reward = Some(parse_unit(line, tok, v)?),
                        Some(("delta", v)) => tr.delta = Some(parse_unit(line, tok, v)?),
                        _ => return Err(syntax(line, tok.column, "p=…, reward=… or delta=…", tok.text)),
                    }
                }
                pending.push(tr);
            }
            _ => return Err(syntax(line, head.column, "`state` or `trans`", head.text)),
        }
    }

    let kind = kind.ok_or_else(|| semantic(1, "empty model: missing header"))?;

    for tr in pending {
        let line = tr.line;
        let s = g
            .state_index(&tr.src)
            .ok_or_else(|| semantic(line, format!("dangling source `{}`", tr.src)))?;
        let d = g
            .state_index(&tr.dst)
            .ok_or_else(|| semantic(line, format!("dangling target `{}`", tr.dst)))?;
        let random = g.owner(s) == Owner::Random;
        match (random, &tr.prob) {
            (true, None) => return Err(semantic(line, format!("{}: random state needs p=", tr.src))),
            (false, Some(_)) => {
                return Err(semantic(line, format!("{}: p= only allowed at random states", tr.src)))
            }
            _ => {}
        }
        let weight = match kind {
            Kind::Ssg(RewardLocation::States) => {
                if tr.reward.is_some() || tr.delta.is_some() {
                    return Err(semantic(line, "rewards are placed on states"));
                }
                None
            }
            Kind::Ssg(RewardLocation::Transitions) => {
                if tr.delta.is_some() {
                    return Err(semantic(line, "delta= only allowed in ocssg models"));
                }
                Some(tr.reward.ok_or_else(|| semantic(line, "missing transition reward"))?)
            }
            Kind::OcSsg => {
                if tr.reward.is_some() {
                    return Err(semantic(line, "reward= not allowed in ocssg models; use delta="));
                }
                Some(tr.delta.ok_or_else(|| semantic(line, "missing counter delta"))?)
            }
        };
        g.add_transition(s, d, tr.prob, weight)
            .map_err(|e| semantic(line, e.to_string()))?;
    }

    if let Some(v) = g.validate().into_iter().next() {
        let id = v.split([':', '#']).next().unwrap_or_default();
        let line = g.state_index(id).map(|s| state_line[s]).unwrap_or(0);
        return Err(semantic(line, v));
    }

    Ok(match kind {
        Kind::Ssg(_) => Model::Ssg(g),
        Kind::OcSsg => Model::OcSsg(OcSsg::from_reward_game(g)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_model() {
        let m = parse_model("ssg rewards=states\nstate a owner=max reward=0\ntrans a -> a\n").unwrap();
        let Model::Ssg(g) = m else { panic!("expected ssg") };
        assert_eq!(g.len(), 1);
        assert_eq!(g.succ(0).len(), 1);
        assert_eq!(g.succ(0)[0].target, 0);
    }

    #[test]
    fn probability_sum_reported() {
        let text = "ssg rewards=states\nstate a owner=rand reward=0\ntrans a -> a p=1/2\ntrans a -> a p=1/3\n";
        let err = parse_model(text).unwrap_err();
        assert_eq!(
            err,
            ParseError::Semantic { line: 2, message: "a: probabilities sum 5/6 ≠ 1".into() }
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_model("ssg rewards=states\nstate a owner=bob reward=0\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                column: 9,
                expected: "owner=max|min|rand".into(),
                found: "owner=bob".into()
            }
        );
    }

    #[test]
    fn dangling_and_duplicate() {
        let e = parse_model("ocssg\nstate a owner=max\ntrans a -> b delta=0\n").unwrap_err();
        assert!(matches!(e, ParseError::Semantic { line: 3, .. }));
        let e = parse_model("ocssg\nstate a owner=max\nstate a owner=min\n").unwrap_err();
        assert!(matches!(e, ParseError::Semantic { line: 3, .. }));
    }

    #[test]
    fn missing_delta_and_bad_reward() {
        assert!(parse_model("ocssg\nstate a owner=max\ntrans a -> a\n").is_err());
        let e = parse_model("ssg rewards=states\nstate a owner=max reward=2\ntrans a -> a\n").unwrap_err();
        assert!(matches!(e, ParseError::Semantic { line: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header follows\n\nocssg # one-counter\nstate a owner=rand\ntrans a -> a p=1/2 delta=-1\ntrans a -> a p=1/2 delta=1 # up\n";
        let Model::OcSsg(g) = parse_model(text).unwrap() else { panic!() };
        assert_eq!(g.num_transitions(), 2);
        assert_eq!(g.delta(0, 0), -1);
    }

    #[test]
    fn missing_state_no_successor() {
        let e = parse_model("ssg rewards=states\nstate a owner=max reward=0\n").unwrap_err();
        assert_eq!(e, ParseError::Semantic { line: 2, message: "a: no successor".into() });
    }
}
