//! Seeded random generators for expressions and networks, used by tests,
//! benches and the CLI corpus builder.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::{BoolExpr, BooleanNetwork, VarId};

/// Random expression over `vars` with at most `depth` levels.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, vars: &[VarId], depth: usize) -> BoolExpr {
    if depth <= 1 || vars.is_empty() || rng.gen_bool(0.25) {
        return match vars.choose(rng) {
            Some(&v) if rng.gen_bool(0.95) => BoolExpr::var(v),
            _ => BoolExpr::Const(rng.gen()),
        };
    }
    let sub = |rng: &mut R| random_expr(rng, vars, depth - 1);
    match rng.gen_range(0..9) {
        0 | 1 => BoolExpr::not(sub(rng)),
        2 | 3 => BoolExpr::and(sub(rng), sub(rng)),
        4 | 5 => BoolExpr::or(sub(rng), sub(rng)),
        6 | 7 => BoolExpr::xor(sub(rng), sub(rng)),
        _ => BoolExpr::iff(sub(rng), sub(rng)),
    }
}

/// Random function that reads every variable of `vars` in a random mix of
/// conjunctions and disjunctions with random polarities.
pub fn random_monotone_mix<R: Rng + ?Sized>(rng: &mut R, vars: &[VarId]) -> BoolExpr {
    let mut terms = vars.iter().map(|&v| {
        if rng.gen_bool(0.3) {
            BoolExpr::not(BoolExpr::var(v))
        } else {
            BoolExpr::var(v)
        }
    });
    let Some(first) = terms.next() else {
        return BoolExpr::Const(rng.gen());
    };
    let rest: Vec<BoolExpr> = terms.collect();
    rest.into_iter().fold(first, |acc, t| {
        if rng.gen_bool(0.5) {
            BoolExpr::and(acc, t)
        } else {
            BoolExpr::or(acc, t)
        }
    })
}

#[derive(Clone, Debug)]
pub struct NetworkShape {
    pub n: usize,
    pub p: usize,
    pub max_fan_in: usize,
    /// Restrict arcs to go from lower to higher index.
    pub acyclic: bool,
    /// Probability that a sensor reads a single variable.
    pub single_sensor_prob: f64,
}

impl NetworkShape {
    pub fn new(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            max_fan_in: 3,
            acyclic: false,
            single_sensor_prob: 0.8,
        }
    }
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// Random network with state names `X1..Xn` and outputs `Y1..Yp`.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, shape: &NetworkShape) -> BooleanNetwork {
    let n = shape.n.max(1);
    let vars = names("X", n)
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let pool: Vec<VarId> = if shape.acyclic {
                (0..i).collect()
            } else {
                (0..n).collect()
            };
            let k = rng.gen_range(0..=shape.max_fan_in.min(pool.len()));
            let mut chosen: Vec<VarId> = pool.choose_multiple(rng, k).copied().collect();
            chosen.sort_unstable();
            let rule = if rng.gen_bool(0.5) {
                random_monotone_mix(rng, &chosen)
            } else {
                random_expr(rng, &chosen, 3)
            };
            (name, Some(rule))
        })
        .collect();
    let outputs = names("Y", shape.p)
        .into_iter()
        .map(|name| {
            let sensor = if rng.gen_bool(shape.single_sensor_prob) {
                let v = BoolExpr::var(rng.gen_range(0..n));
                if rng.gen_bool(0.2) {
                    BoolExpr::not(v)
                } else {
                    v
                }
            } else {
                let k = rng.gen_range(1..=n.min(3));
                let chosen: Vec<VarId> = (0..n)
                    .collect::<Vec<_>>()
                    .choose_multiple(rng, k)
                    .copied()
                    .collect();
                random_monotone_mix(rng, &chosen)
            };
            (name, sensor)
        })
        .collect();
    BooleanNetwork::new(vars, outputs).expect("generated networks are well formed")
}

/// A network whose wiring is `paths` disjoint chains, each sensed at its end,
/// with `extra` random additional arcs.
pub fn chains_with_noise<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    paths: usize,
    extra: usize,
) -> BooleanNetwork {
    let paths = paths.clamp(1, n.max(1));
    let mut preds: Vec<Vec<VarId>> = vec![Vec::new(); n];
    let mut ends = Vec::new();
    for (i, pred) in preds.iter_mut().enumerate() {
        if i >= paths {
            pred.push(i - paths);
        }
    }
    for i in (n.saturating_sub(paths))..n {
        ends.push(i);
    }
    for _ in 0..extra {
        let dst = rng.gen_range(0..n);
        let src = rng.gen_range(0..n);
        if !preds[dst].contains(&src) && preds[dst].len() < 4 {
            preds[dst].push(src);
        }
    }
    let vars = names("X", n)
        .into_iter()
        .zip(preds)
        .map(|(name, mut p)| {
            p.sort_unstable();
            let rule = if p.is_empty() {
                BoolExpr::Const(rng.gen())
            } else {
                random_monotone_mix(rng, &p)
            };
            (name, Some(rule))
        })
        .collect();
    let outputs = names("Y", ends.len())
        .into_iter()
        .zip(ends)
        .map(|(name, v)| (name, BoolExpr::var(v)))
        .collect();
    BooleanNetwork::new(vars, outputs).expect("generated networks are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_deterministic_and_well_formed() {
        let shape = NetworkShape::new(8, 2);
        let a = random_network(&mut ChaCha8Rng::seed_from_u64(5), &shape);
        let b = random_network(&mut ChaCha8Rng::seed_from_u64(5), &shape);
        assert_eq!(a, b);
        assert_eq!(a.n_states(), 8);
        assert_eq!(a.n_outputs(), 2);
        assert!(a.max_in_degree() <= 3);
    }

    #[test]
    fn acyclic_shape_only_points_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shape = NetworkShape {
            acyclic: true,
            ..NetworkShape::new(8, 2)
        };
        for _ in 0..20 {
            let bn = random_network(&mut rng, &shape);
            for (i, v) in bn.vars().iter().enumerate() {
                assert!(v.functional().iter().all(|&j| j < i));
            }
        }
    }

    #[test]
    fn noiseless_chains_have_single_predecessors() {
        let bn = chains_with_noise(&mut ChaCha8Rng::seed_from_u64(1), 9, 3, 0);
        for (i, v) in bn.vars().iter().enumerate() {
            let expected: Vec<VarId> = if i >= 3 { vec![i - 3] } else { vec![] };
            assert_eq!(v.functional(), expected.as_slice());
        }
    }
}
