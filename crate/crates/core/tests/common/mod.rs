//! Instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use num_rational::BigRational;
use ocssg_core::{OcSsg, Owner, RewardLocation, Ssg};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Owner, reward and successor list (target, probability in quarters).
pub type StateSpec = (Owner, i8, Vec<(usize, u8)>);

fn quarter(k: u8) -> BigRational {
    BigRational::new(k.into(), 4.into())
}

/// Builds a state-reward game. Probabilities are in quarters.
pub fn build(spec: &[StateSpec]) -> Ssg {
    let mut g = Ssg::new(RewardLocation::States);
    for (i, (owner, reward, _)) in spec.iter().enumerate() {
        g.add_state(format!("s{i}"), *owner, Some(*reward)).unwrap();
    }
    for (i, (owner, _, succ)) in spec.iter().enumerate() {
        for &(t, p) in succ {
            let prob = (*owner == Owner::Random).then(|| quarter(p));
            g.add_transition(i, t, prob, None).unwrap();
        }
    }
    g.ensure_valid().unwrap();
    g
}

/// Every local shape of a state in an `n`-state game: controlled states
/// pick one or two distinct successors, random states a distribution with
/// probabilities in {1/4, 1/2, 3/4, 1}.
fn shapes(n: usize) -> Vec<(Owner, Vec<(usize, u8)>)> {
    let mut out = Vec::new();
    for owner in [Owner::Max, Owner::Min] {
        for a in 0..n {
            out.push((owner, vec![(a, 0)]));
            for b in a + 1..n {
                out.push((owner, vec![(a, 0), (b, 0)]));
            }
        }
    }
    let mut dists = Vec::new();
    fn split(n: usize, from: usize, left: u8, acc: &mut Vec<(usize, u8)>, out: &mut Vec<Vec<(usize, u8)>>) {
        if left == 0 {
            out.push(acc.clone());
            return;
        }
        for t in from..n {
            for p in 1..=left {
                acc.push((t, p));
                split(n, t + 1, left - p, acc, out);
                acc.pop();
            }
        }
    }
    split(n, 0, 4, &mut Vec::new(), &mut dists);
    for d in dists {
        out.push((Owner::Random, d));
    }
    out
}

fn permute(spec: &[StateSpec], perm: &[usize]) -> Vec<StateSpec> {
    let mut out = vec![(Owner::Random, 0, Vec::new()); spec.len()];
    for (i, (o, r, succ)) in spec.iter().enumerate() {
        let mut s: Vec<(usize, u8)> = succ.iter().map(|&(t, p)| (perm[t], p)).collect();
        s.sort();
        out[perm[i]] = (*o, *r, s);
    }
    out
}

fn key(spec: &[StateSpec]) -> Vec<(u8, i8, Vec<(usize, u8)>)> {
    spec.iter()
        .map(|(o, r, s)| {
            let o = match o {
                Owner::Max => 0,
                Owner::Min => 1,
                Owner::Random => 2,
            };
            (o, *r, s.clone())
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// All state-reward games with 1 to `max_states` states up to renaming.
pub fn grid(max_states: usize) -> Vec<Vec<StateSpec>> {
    let mut out = Vec::new();
    for n in 1..=max_states {
        let shapes = shapes(n);
        let locals: Vec<StateSpec> = shapes
            .iter()
            .flat_map(|(o, s)| [-1i8, 0, 1].into_iter().map(move |r| (*o, r, s.clone())))
            .collect();
        let perms = permutations(n);
        let mut seen = HashSet::new();
        let mut idx = vec![0usize; n];
        loop {
            let spec: Vec<StateSpec> = idx.iter().map(|&i| locals[i].clone()).collect();
            let canon = perms.iter().map(|p| key(&permute(&spec, p))).min().unwrap();
            if seen.insert(canon) {
                out.push(spec);
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < locals.len() {
                    break;
                }
                idx[i] = 0;
            }
            if idx.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    out
}

/// A random game with `n` states, controlled states with one or two
/// successors and random states with two or three quarter-valued branches.
pub fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> Vec<StateSpec> {
    (0..n)
        .map(|_| {
            let owner = [Owner::Max, Owner::Min, Owner::Random][rng.gen_range(0..3)];
            let reward = rng.gen_range(-1i8..=1);
            let succ = if owner == Owner::Random {
                let parts: &[u8] = [&[4][..], &[1, 3], &[2, 2], &[3, 1], &[1, 1, 2], &[2, 1, 1]][rng.gen_range(0..6)];
                let mut ts: Vec<usize> = (0..n).collect();
                let mut out = Vec::new();
                for &p in parts.iter().take(n) {
                    let t = ts.remove(rng.gen_range(0..ts.len()));
                    out.push((t, p));
                }
                // Fewer states than parts: the last target absorbs the rest.
                let total: u8 = out.iter().map(|x| x.1).sum();
                out.last_mut().unwrap().1 += 4 - total;
                out
            } else {
                let k = rng.gen_range(1..=2.min(n));
                let mut ts: Vec<usize> = (0..n).collect();
                (0..k).map(|_| (ts.remove(rng.gen_range(0..ts.len())), 0)).collect()
            };
            (owner, reward, succ)
        })
        .collect()
}

pub fn random_games(seed: u64, count: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<Ssg> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            build(&random_spec(&mut rng, n))
        })
        .collect()
}

/// Counter game with the source state's reward as the delta of each edge.
pub fn to_oc(spec: &[StateSpec]) -> OcSsg {
    let mut g = OcSsg::new();
    for (i, (owner, _, _)) in spec.iter().enumerate() {
        g.add_state(format!("s{i}"), *owner).unwrap();
    }
    for (i, (owner, r, succ)) in spec.iter().enumerate() {
        for &(t, p) in succ {
            let prob = (*owner == Owner::Random).then(|| quarter(p));
            g.add_transition(i, t, prob, *r).unwrap();
        }
    }
    g.ensure_valid().unwrap();
    g
}

/// Every counter game with one or two states where each edge carries its
/// own delta (random states: up to two branches).
pub fn oc_grid2() -> Vec<OcSsg> {
    let mut out = Vec::new();
    for n in 1..=2usize {
        // Local options: owner, list of (target, quarters, delta).
        let mut locals: Vec<(Owner, Vec<(usize, u8, i8)>)> = Vec::new();
        for (owner, shape) in shapes(n) {
            let k = shape.len();
            for code in 0..3usize.pow(k as u32) {
                let mut c = code;
                let edges = shape
                    .iter()
                    .map(|&(t, p)| {
                        let d = (c % 3) as i8 - 1;
                        c /= 3;
                        (t, p, d)
                    })
                    .collect();
                locals.push((owner, edges));
            }
        }
        let mut idx = vec![0usize; n];
        loop {
            let mut g = OcSsg::new();
            for (i, &x) in idx.iter().enumerate() {
                g.add_state(format!("s{i}"), locals[x].0).unwrap();
            }
            for (i, &x) in idx.iter().enumerate() {
                let (owner, edges) = &locals[x];
                for &(t, p, d) in edges {
                    let prob = (*owner == Owner::Random).then(|| quarter(p));
                    g.add_transition(i, t, prob, d).unwrap();
                }
            }
            out.push(g);
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < locals.len() {
                    break;
                }
                idx[i] = 0;
            }
            if idx.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    out
}
