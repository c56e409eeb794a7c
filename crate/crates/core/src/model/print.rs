//! Printing in the text format read by [`super::parse_model`].

use std::fmt;

use super::{fmt_rational, Model, OcSsg, RewardLocation, Ssg};

fn write_graph(f: &mut fmt::Formatter<'_>, g: &Ssg, oc: bool) -> fmt::Result {
    if oc {
        writeln!(f, "ocssg")?;
    } else {
        match g.reward_location() {
            RewardLocation::States => writeln!(f, "ssg rewards=states")?,
            RewardLocation::Transitions => writeln!(f, "ssg rewards=transitions")?,
        }
    }
    for st in g.states() {
        write!(f, "state {} owner={}", st.id, st.owner.keyword())?;
        if let Some(r) = st.reward {
            write!(f, " reward={}", r)?;
        }
        writeln!(f)?;
    }
    for (s, st) in g.states().iter().enumerate() {
        for t in g.succ(s) {
            write!(f, "trans {} -> {}", st.id, g.id(t.target))?;
            if let Some(p) = &t.prob {
                write!(f, " p={}", fmt_rational(p))?;
            }
            if let Some(w) = t.weight {
                let key = if oc { "delta" } else { "reward" };
                write!(f, " {}={}", key, w)?;
            }
            writeln!(f)?;
        }
    }
    Ok(())
}

impl fmt::Display for Ssg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_graph(f, self, false)
    }
}

impl fmt::Display for OcSsg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_graph(f, self.as_reward_game(), true)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Ssg(g) => g.fmt(f),
            Model::OcSsg(g) => g.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::model::parse_model;

    #[test]
    fn prints_bit_exact() {
        let text = "ssg rewards=transitions\nstate s owner=rand\nstate t owner=min\ntrans s -> t p=1/2 reward=-1\ntrans s -> s p=1/2 reward=1\ntrans t -> s reward=0\n";
        assert_eq!(parse_model(text).unwrap().to_string(), text);
    }

    #[test]
    fn probabilities_are_reduced() {
        let text = "ocssg\nstate s owner=rand\ntrans s -> s p=2/4 delta=1\ntrans s -> s p=3/6 delta=-1\n";
        let printed = parse_model(text).unwrap().to_string();
        assert!(printed.contains("p=1/2 delta=1"));
        assert!(!printed.contains("2/4"));
    }
}
