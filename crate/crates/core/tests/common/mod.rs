#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pinobs::gen::{chains_with_noise, random_network, NetworkShape};
use pinobs::network::BooleanNetwork;
use pinobs::wiring::{augment, build_wiring_digraph, AugmentMode, AugmentedNetwork, WiringDigraph};

pub fn fixture(name: &str) -> BooleanNetwork {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

pub fn wiring(bn: &BooleanNetwork, mode: AugmentMode) -> (AugmentedNetwork, WiringDigraph) {
    let aug = augment(bn, mode).unwrap();
    let g = build_wiring_digraph(&aug);
    (aug, g)
}

pub fn ids(g: &WiringDigraph, names: &[&str]) -> Vec<usize> {
    names
        .iter()
        .map(|n| {
            (0..g.len())
                .find(|&v| g.name(v) == *n)
                .unwrap_or_else(|| panic!("no vertex {n}"))
        })
        .collect()
}

/// Minimum number of vertex-disjoint paths covering the state vertices of
/// an acyclic wiring, where directly observable vertices end their path.
/// Exhaustive backtracking over successor choices.
pub fn brute_force_min_cover(g: &WiringDigraph) -> usize {
    let states: Vec<usize> = g.state_vertices().collect();
    let succ_options: Vec<Vec<usize>> = states
        .iter()
        .map(|&u| {
            if g.is_directly_observable(u) {
                Vec::new()
            } else {
                g.out_neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&v| v != u && g.is_state(v))
                    .collect()
            }
        })
        .collect();
    fn go(i: usize, opts: &[Vec<usize>], taken: &mut Vec<bool>, edges: usize, best: &mut usize) {
        if i == opts.len() {
            *best = (*best).max(edges);
            return;
        }
        if edges + (opts.len() - i) <= *best {
            return;
        }
        for &v in &opts[i] {
            if !taken[v] {
                taken[v] = true;
                go(i + 1, opts, taken, edges + 1, best);
                taken[v] = false;
            }
        }
        go(i + 1, opts, taken, edges, best);
    }
    let mut taken = vec![false; g.len()];
    let mut best = 0;
    go(0, &succ_options, &mut taken, 0, &mut best);
    states.len() - best
}

/// Random network with 2..=max_n state variables: either noisy sensed
/// chains (often decomposable) or an unstructured random wiring.
pub fn small_network(seed: u64, max_n: usize) -> BooleanNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    if rng.gen_bool(0.4) {
        let paths = rng.gen_range(1..=n.min(3));
        let extra = rng.gen_range(0..=2);
        chains_with_noise(&mut rng, n, paths, extra)
    } else {
        let mut shape = NetworkShape::new(n, rng.gen_range(1..=3));
        shape.max_fan_in = rng.gen_range(1..=3);
        random_network(&mut rng, &shape)
    }
}

/// Random network whose wiring only points from lower to higher index.
pub fn acyclic_network(seed: u64, max_n: usize) -> BooleanNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shape = NetworkShape::new(rng.gen_range(2..=max_n), rng.gen_range(1..=3));
    shape.acyclic = true;
    random_network(&mut rng, &shape)
}
