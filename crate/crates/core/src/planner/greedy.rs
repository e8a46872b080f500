//! Greedy backward path growth.

use std::collections::BTreeSet;

use crate::wiring::WiringDigraph;

struct Growth<'a> {
    g: &'a WiringDigraph,
    visited: Vec<bool>,
    /// Reversed paths: terminal first, current head last.
    paths: Vec<Vec<usize>>,
    pins: BTreeSet<usize>,
}

impl Growth<'_> {
    fn free(&self, v: usize) -> bool {
        self.g.is_state(v) && !self.g.is_directly_observable(v) && !self.visited[v]
    }

    fn head(&self, i: usize) -> usize {
        *self.paths[i].last().unwrap()
    }

    fn push(&mut self, i: usize, v: usize) {
        self.visited[v] = true;
        self.paths[i].push(v);
    }

    /// Length of the chain reachable backward from `v` through sole
    /// in-neighbors that are still free.
    fn chain_len(&self, v: usize) -> usize {
        let mut len = 1;
        let mut seen = BTreeSet::from([v]);
        let mut cur = v;
        while let [u] = self.g.in_neighbors(cur) {
            if !self.free(*u) || !seen.insert(*u) {
                break;
            }
            len += 1;
            cur = *u;
        }
        len
    }

    fn extend_unique(&mut self, i: usize) {
        while let [v] = self.g.in_neighbors(self.head(i)) {
            if !self.free(*v) {
                break;
            }
            self.push(i, *v);
        }
    }

    /// One extension through a possibly non-unique in-neighbor.
    fn extend_any(&mut self, i: usize) -> bool {
        let head = self.head(i);
        let best = self
            .g
            .in_neighbors(head)
            .iter()
            .copied()
            .filter(|&v| self.free(v))
            .max_by_key(|&v| (self.chain_len(v), std::cmp::Reverse(v)));
        let Some(v) = best else { return false };
        if self.g.in_neighbors(head) != [v] {
            self.pins.insert(head);
        }
        self.push(i, v);
        true
    }
}

/// Grows one path backward from every directly observable vertex, first
/// through unique in-neighbors only, then through any free in-neighbor,
/// and finally by seeding uncovered vertices at the head of the last path.
///
/// Ties prefer the in-neighbor with the longest unique-in-neighbor chain
/// behind it, then the smallest id; seeds are taken by smallest id.
/// Returns the pin set and the paths, each ending with its output mirror.
pub fn greedy_paths(g: &WiringDigraph) -> (BTreeSet<usize>, Vec<Vec<usize>>) {
    let p = g.n_outputs();
    let mut s = Growth {
        g,
        visited: vec![false; g.len()],
        paths: (0..p).map(|j| vec![g.terminal(j)]).collect(),
        pins: BTreeSet::new(),
    };
    for j in 0..p {
        s.visited[g.terminal(j)] = true;
    }
    for i in 0..p {
        s.extend_unique(i);
    }
    let uncovered = |s: &Growth| g.state_vertices().find(|&v| !s.visited[v]);
    if p > 0 {
        while uncovered(&s).is_some() {
            if (0..p).any(|i| s.extend_any(i)) {
                continue;
            }
            let x = uncovered(&s).unwrap();
            let head = s.head(p - 1);
            if g.in_neighbors(head) != [x] {
                s.pins.insert(head);
            }
            s.push(p - 1, x);
        }
    }
    let paths = s
        .paths
        .into_iter()
        .enumerate()
        .map(|(j, mut rev)| {
            rev.reverse();
            rev.push(g.mirror(j));
            rev
        })
        .collect();
    (s.pins, paths)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{by_name, graph};
    use super::*;
    use crate::planner::categorize;

    #[test]
    fn tlgl_reference_run() {
        let g = graph(include_str!("../../fixtures/tlgl.bn"));
        let (pins, paths) = greedy_paths(&g);
        assert_eq!(paths[0], by_name(&g, &["X2", "X1", "Y1"]));
        assert_eq!(
            paths[1],
            by_name(
                &g,
                &["X9", "X8", "X10", "X17", "X6", "X7", "X4", "X3", "Y2"]
            )
        );
        assert_eq!(
            paths[2],
            by_name(
                &g,
                &["X5", "X13", "X11", "X16", "X14", "X15", "X12", "X18", "Y3"]
            )
        );
        let expected: BTreeSet<usize> = by_name(&g, &["X4", "X10", "X11", "X12", "X13", "X18"])
            .into_iter()
            .collect();
        assert_eq!(pins, expected);
        let detected: BTreeSet<usize> = categorize(&g, &paths).iter().map(|p| p.node).collect();
        assert_eq!(detected, pins);
    }

    #[test]
    fn decomposable_network_gets_no_pins() {
        let g = graph("X1 = X3\nX2 = X1\nX3 = 1\noutput Y = X2\n");
        let (pins, paths) = greedy_paths(&g);
        assert!(pins.is_empty());
        assert_eq!(paths, vec![by_name(&g, &["X3", "X1", "X2", "Y"])]);
    }

    #[test]
    fn unobserved_cycle_gets_a_pin() {
        let g = graph("X1 = X2\nX2 = X1\nX3 = X4\nX4 = X3\noutput Y1 = X2\n");
        let (pins, _) = greedy_paths(&g);
        let cyc: BTreeSet<usize> = by_name(&g, &["X1", "X3", "X4"]).into_iter().collect();
        assert!(!pins.is_empty() && pins.is_subset(&cyc));
    }
}
