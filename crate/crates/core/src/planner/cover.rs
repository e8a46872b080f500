//! Path cover via maximum matching on the split graph, with cycle repair.

use serde::Serialize;

use super::matching::hopcroft_karp;
use super::{CostWeights, CoverStats, Pin, PlanError};
use crate::wiring::WiringDigraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CycleRepair {
    /// The cycle was cut and its last vertex now precedes an existing head.
    AttachedToHead { head: usize },
    /// An existing tail now precedes a cycle vertex.
    AttachedFromTail { tail: usize },
    /// The cycle was cut into a path of its own.
    Opened,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleBreak {
    pub cycle: Vec<usize>,
    /// The cycle vertex that lost its cycle predecessor.
    pub opened_at: usize,
    pub repair: CycleRepair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathCover {
    /// Ordered by head id. Paths reaching an output end with its mirror.
    pub paths: Vec<Vec<usize>>,
    pub cycle_breaks: Vec<CycleBreak>,
    pub matching_size: usize,
}

impl PathCover {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn stats(&self) -> CoverStats {
        let attached = self
            .cycle_breaks
            .iter()
            .filter(|b| b.repair != CycleRepair::Opened)
            .count();
        CoverStats {
            cover_paths: self.paths.len(),
            matching_size: self.matching_size,
            cycles_found: self.cycle_breaks.len(),
            cycles_attached: attached,
            cycles_opened: self.cycle_breaks.len() - attached,
        }
    }
}

const NONE: usize = usize::MAX;

/// Cost of making `u` the path predecessor of `w`.
fn edge_cost(g: &WiringDigraph, w_: &CostWeights, u: usize, w: usize) -> f64 {
    if g.is_mirror(w) {
        return 0.0;
    }
    Pin::classify(g, w, u).map_or(0.0, |p| w_.of(p.pin_type))
}

struct Links {
    succ: Vec<usize>,
    pred: Vec<usize>,
}

impl Links {
    fn link(&mut self, u: usize, w: usize) {
        self.succ[u] = w;
        self.pred[w] = u;
    }

    fn cut(&mut self, u: usize) {
        let w = self.succ[u];
        self.succ[u] = NONE;
        self.pred[w] = NONE;
    }

    fn head_of(&self, mut v: usize) -> usize {
        while self.pred[v] != NONE {
            v = self.pred[v];
        }
        v
    }
}

/// Minimum path-and-cycle cover of the state and mirror vertices from a
/// maximum matching, with each matched cycle turned into path segments.
///
/// Directly observable vertices may only be followed by their mirror, and
/// inputs and self-loops are ignored. A cycle is preferably spliced onto an
/// existing path head or tail, choosing the splice that adds the least pin
/// cost; otherwise it is opened at its most expensive edge.
pub fn min_path_cover(g: &WiringDigraph, weights: &CostWeights) -> PathCover {
    let n = g.len();
    let in_cover = |v: usize| g.is_state(v) || g.is_mirror(v);
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            if !g.is_state(u) || g.is_directly_observable(u) {
                return Vec::new();
            }
            g.out_neighbors(u)
                .iter()
                .copied()
                .filter(|&w| w != u && g.is_state(w))
                .collect()
        })
        .collect();
    let seed: Vec<(usize, usize)> = (0..g.n_outputs())
        .map(|j| (g.terminal(j), g.mirror(j)))
        .collect();
    let mut adj_full = adj;
    for &(t, m) in &seed {
        adj_full[t] = vec![m];
    }
    let matching = hopcroft_karp(n, &adj_full, &seed);
    let mut links = Links {
        succ: vec![NONE; n],
        pred: vec![NONE; n],
    };
    let mut matching_size = 0;
    for (u, w) in matching.iter().enumerate() {
        if let Some(w) = *w {
            links.link(u, w);
            matching_size += 1;
        }
    }

    // Vertices on a path are reachable from a head; the rest lie on cycles.
    let mut on_path = vec![false; n];
    for v in (0..n).filter(|&v| in_cover(v) && links.pred[v] == NONE) {
        let mut x = v;
        while x != NONE {
            on_path[x] = true;
            x = links.succ[x];
        }
    }
    let mut cycles = Vec::new();
    let mut seen = on_path.clone();
    for v in (0..n).filter(|&v| in_cover(v)) {
        if seen[v] {
            continue;
        }
        let mut cycle = vec![v];
        seen[v] = true;
        let mut x = links.succ[v];
        while x != v {
            seen[x] = true;
            cycle.push(x);
            x = links.succ[x];
        }
        cycles.push(cycle);
    }

    let mut cycle_breaks = Vec::new();
    for cycle in cycles {
        let cost = |u: usize, w: usize| edge_cost(g, weights, u, w);
        // (delta, kind, a, b): kind 0 = cycle vertex a before head b,
        // kind 1 = tail a before cycle vertex b.
        let mut best: Option<(f64, u8, usize, usize)> = None;
        let mut consider = |cand: (f64, u8, usize, usize)| {
            let better = match best {
                None => true,
                Some(b) => {
                    cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2, cand.3) < (b.1, b.2, b.3))
                }
            };
            if better {
                best = Some(cand);
            }
        };
        for &v in &cycle {
            for &h in g.out_neighbors(v) {
                if on_path[h] && g.is_state(h) && links.pred[h] == NONE {
                    consider((cost(v, h) - cost(v, links.succ[v]), 0, v, h));
                }
            }
            for &t in g.in_neighbors(v) {
                if on_path[t]
                    && g.is_state(t)
                    && !g.is_directly_observable(t)
                    && links.succ[t] == NONE
                {
                    consider((cost(t, v) - cost(links.pred[v], v), 1, t, v));
                }
            }
        }
        let record = match best {
            Some((_, 0, v, h)) => {
                let s = links.succ[v];
                links.cut(v);
                links.link(v, h);
                CycleBreak {
                    cycle: cycle.clone(),
                    opened_at: s,
                    repair: CycleRepair::AttachedToHead { head: h },
                }
            }
            Some((_, _, t, v)) => {
                links.cut(links.pred[v]);
                links.link(t, v);
                CycleBreak {
                    cycle: cycle.clone(),
                    opened_at: v,
                    repair: CycleRepair::AttachedFromTail { tail: t },
                }
            }
            None => {
                let v = *cycle
                    .iter()
                    .min_by(|&&a, &&b| {
                        let (ca, cb) = (cost(links.pred[a], a), cost(links.pred[b], b));
                        cb.total_cmp(&ca).then(a.cmp(&b))
                    })
                    .unwrap();
                links.cut(links.pred[v]);
                CycleBreak {
                    cycle: cycle.clone(),
                    opened_at: v,
                    repair: CycleRepair::Opened,
                }
            }
        };
        for &v in &cycle {
            on_path[v] = true;
        }
        cycle_breaks.push(record);
    }

    // Opened cycles may leave tails that now reach other heads.
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for t in g.state_vertices() {
            if links.succ[t] != NONE || g.is_directly_observable(t) {
                continue;
            }
            let own_head = links.head_of(t);
            for &h in g.out_neighbors(t) {
                if g.is_state(h) && links.pred[h] == NONE && h != own_head {
                    let c = edge_cost(g, weights, t, h);
                    if best.is_none_or(|b| (c, t, h) < b) {
                        best = Some((c, t, h));
                    }
                }
            }
        }
        let Some((_, t, h)) = best else { break };
        links.link(t, h);
    }

    let paths = (0..n)
        .filter(|&v| in_cover(v) && links.pred[v] == NONE)
        .map(|h| {
            let mut path = vec![h];
            let mut x = links.succ[h];
            while x != NONE {
                path.push(x);
                x = links.succ[x];
            }
            path
        })
        .collect();
    PathCover {
        paths,
        cycle_breaks,
        matching_size,
    }
}

/// Concatenates the surplus cover paths, in cover order, in front of the
/// output path whose junction is cheapest (lowest output index on ties).
/// Returns one path per output, by output index.
pub fn merge_paths(
    g: &WiringDigraph,
    cover: &PathCover,
    weights: &CostWeights,
) -> Result<Vec<Vec<usize>>, PlanError> {
    let p = g.n_outputs();
    let mut by_output: Vec<Option<Vec<usize>>> = vec![None; p];
    let mut surplus: Vec<usize> = Vec::new();
    for path in &cover.paths {
        match path.last().and_then(|&m| match g.vertex(m).kind {
            crate::wiring::VertexKind::Mirror { output } => Some(output),
            _ => None,
        }) {
            Some(j) if by_output[j].is_none() => by_output[j] = Some(path.clone()),
            _ => surplus.extend(path),
        }
    }
    let found = by_output.iter().flatten().count();
    if found != p {
        return Err(PlanError::MalformedCover { found, expected: p });
    }
    let mut out: Vec<Vec<usize>> = by_output.into_iter().flatten().collect();
    if let Some(&tail) = surplus.last() {
        let j = (0..p)
            .min_by(|&a, &b| {
                edge_cost(g, weights, tail, out[a][0])
                    .total_cmp(&edge_cost(g, weights, tail, out[b][0]))
                    .then(a.cmp(&b))
            })
            .expect("at least one output");
        surplus.extend(&out[j]);
        out[j] = surplus;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{by_name, graph};
    use super::*;
    use crate::planner::{plan, PinType, PlannerKind};

    #[test]
    fn chain_is_one_path() {
        let g = graph("X1 = 1\nX2 = X1\nX3 = X2\noutput Y = X3\n");
        let cover = min_path_cover(&g, &CostWeights::default());
        assert_eq!(cover.paths, vec![vec![0, 1, 2, 3]]);
        assert!(cover.cycle_breaks.is_empty());
    }

    #[test]
    fn tlgl_cover_and_merge() {
        let g = graph(include_str!("../../fixtures/tlgl.bn"));
        let w = CostWeights::default();
        let cover = min_path_cover(&g, &w);
        assert_eq!(cover.len(), 4);
        let merged = merge_paths(&g, &cover, &w).unwrap();
        // the surplus path lands ahead of X2 (a Type 1 junction)
        assert!(merged[0].ends_with(&by_name(&g, &["X2", "X1", "Y1"])));
        assert!(merged[0].len() > 3);
        let plan = plan(&g, PlannerKind::Cover, w).unwrap();
        let [t1, _, t3] = plan.type_counts();
        assert_eq!(t1 + t3, cover.len() - g.n_outputs());
        assert_eq!(
            plan.pins_of(PinType::AddEdge),
            by_name(&g, &["X2"]).into_iter().collect()
        );
    }

    #[test]
    fn isolated_cycle_is_opened_and_merged() {
        let g = graph("X1 = X2\nX2 = X1\nX3 = X4\nX4 = X3\noutput Y1 = X2\n");
        let cover = min_path_cover(&g, &CostWeights::default());
        // X1 -> X2 -> Y1 plus the opened cycle {X3, X4}
        assert_eq!(cover.len(), 2);
        assert_eq!(cover.cycle_breaks.len(), 1);
        assert_eq!(cover.cycle_breaks[0].repair, CycleRepair::Opened);
        let merged = merge_paths(&g, &cover, &CostWeights::default()).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].len(), 5);
    }

    #[test]
    fn cycle_spliced_onto_a_head() {
        // the X3 <-> X4 cycle feeds X1, which heads the observed chain
        let g = graph("X1 = X3 & X4\nX2 = X1\nX3 = X4\nX4 = X3\noutput Y = X2\n");
        let cover = min_path_cover(&g, &CostWeights::default());
        assert!(cover
            .cycle_breaks
            .iter()
            .all(|b| b.repair != CycleRepair::Opened));
        assert_eq!(cover.len(), 1);
    }
}
