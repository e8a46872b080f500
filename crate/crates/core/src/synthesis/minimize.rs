//! Two-level (sum-of-products) minimization of small truth tables.

use std::collections::BTreeSet;

use crate::network::{column_value, BoolExpr, VarId};

/// A product term: `mask` bit j set means variable j is a literal, whose
/// polarity is bit j of `value` (1 = positive). Bit j is variable j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Cube {
    mask: u32,
    value: u32,
}

impl Cube {
    fn covers(self, minterm: u32) -> bool {
        minterm & self.mask == self.value
    }

    fn literals(self) -> u32 {
        self.mask.count_ones()
    }
}

/// Largest variable count for which the cover is chosen exactly.
const EXACT_LIMIT: usize = 6;

fn prime_implicants(k: usize, on: &[u32]) -> Vec<Cube> {
    let full = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let mut current: BTreeSet<Cube> = on
        .iter()
        .map(|&m| Cube {
            mask: full,
            value: m,
        })
        .collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let mut next = BTreeSet::new();
        let mut merged = BTreeSet::new();
        let cubes: Vec<Cube> = current.iter().copied().collect();
        for (i, a) in cubes.iter().enumerate() {
            for b in &cubes[i + 1..] {
                if a.mask != b.mask {
                    continue;
                }
                let diff = a.value ^ b.value;
                if diff.count_ones() == 1 {
                    next.insert(Cube {
                        mask: a.mask & !diff,
                        value: a.value & !diff,
                    });
                    merged.insert(*a);
                    merged.insert(*b);
                }
            }
        }
        primes.extend(current.difference(&merged).copied());
        current = next;
    }
    primes.into_iter().collect()
}

/// Smallest set of primes covering every minterm (fewest terms, then
/// fewest literals); exhaustive when small, greedy otherwise.
fn select_cover(primes: &[Cube], on: &[u32], exact: bool) -> Vec<Cube> {
    let mut chosen: Vec<Cube> = Vec::new();
    let mut uncovered: Vec<u32> = on.to_vec();
    // essential primes first
    loop {
        let essential = uncovered.iter().find_map(|&m| {
            let mut it = primes.iter().filter(|c| c.covers(m));
            match (it.next(), it.next()) {
                (Some(c), None) => Some(*c),
                _ => None,
            }
        });
        let Some(c) = essential else { break };
        chosen.push(c);
        uncovered.retain(|&m| !c.covers(m));
    }
    if uncovered.is_empty() {
        return chosen;
    }
    let useful: Vec<Cube> = primes
        .iter()
        .copied()
        .filter(|c| !chosen.contains(c) && uncovered.iter().any(|&m| c.covers(m)))
        .collect();
    if exact && useful.len() <= 20 {
        let mut best: Option<(usize, u32, u32)> = None;
        for subset in 1u32..(1 << useful.len()) {
            let terms = subset.count_ones() as usize;
            if best.is_some_and(|b| terms > b.0) {
                continue;
            }
            let ok = uncovered
                .iter()
                .all(|&m| (0..useful.len()).any(|i| subset >> i & 1 == 1 && useful[i].covers(m)));
            if !ok {
                continue;
            }
            let lits: u32 = (0..useful.len())
                .filter(|&i| subset >> i & 1 == 1)
                .map(|i| useful[i].literals())
                .sum();
            if best.is_none_or(|b| (terms, lits) < (b.0, b.1)) {
                best = Some((terms, lits, subset));
            }
        }
        let (_, _, subset) = best.expect("primes cover all minterms");
        chosen.extend(
            (0..useful.len())
                .filter(|&i| subset >> i & 1 == 1)
                .map(|i| useful[i]),
        );
    } else {
        while !uncovered.is_empty() {
            let c = *useful
                .iter()
                .max_by_key(|c| {
                    let n = uncovered.iter().filter(|&&m| c.covers(m)).count();
                    (n, std::cmp::Reverse(c.literals()), std::cmp::Reverse(**c))
                })
                .unwrap();
            chosen.push(c);
            uncovered.retain(|&m| !c.covers(m));
        }
    }
    chosen.sort();
    chosen
}

/// Minimized expression for a table over `vars` in structure-matrix column
/// order (first variable most significant, TRUE first).
pub fn minimize(table: &[bool], vars: &[VarId]) -> BoolExpr {
    let k = vars.len();
    assert_eq!(table.len(), 1 << k, "table length must be 2^k");
    // minterm bit j = value of vars[j]
    let to_minterm =
        |c: usize| (0..k).fold(0u32, |acc, j| acc | (u32::from(column_value(c, j, k)) << j));
    let on: Vec<u32> = (0..table.len())
        .filter(|&c| table[c])
        .map(to_minterm)
        .collect();
    if on.is_empty() {
        return BoolExpr::Const(false);
    }
    if on.len() == table.len() {
        return BoolExpr::Const(true);
    }
    let primes = prime_implicants(k, &on);
    let cover = select_cover(&primes, &on, k <= EXACT_LIMIT);
    BoolExpr::any(cover.into_iter().map(|c| {
        BoolExpr::all((0..k).filter(|&j| c.mask >> j & 1 == 1).map(|j| {
            let v = BoolExpr::var(vars[j]);
            if c.value >> j & 1 == 1 {
                v
            } else {
                BoolExpr::not(v)
            }
        }))
    }))
}
