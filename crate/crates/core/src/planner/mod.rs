//! Pinning-node selection.
//!
//! A plan is a set of vertex-disjoint paths, one per output, that together
//! cover every state vertex. Any path vertex whose in-neighbor set is not
//! exactly its path predecessor becomes a pin, and its controller must make
//! the predecessor its only functional variable.

mod cover;
mod greedy;
pub mod matching;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wiring::WiringDigraph;

pub use cover::{merge_paths, min_path_cover, CycleBreak, CycleRepair, PathCover};
pub use greedy::greedy_paths;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("cover has {found} paths ending at an output, expected {expected}")]
    MalformedCover { found: usize, expected: usize },
    #[error("invalid plan: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Greedy,
    #[default]
    Cover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PinType {
    /// The desired predecessor is not an in-neighbor: an edge is added.
    #[serde(rename = "1")]
    AddEdge,
    /// The predecessor is kept and the other in-neighbors are dropped.
    #[serde(rename = "2")]
    DropEdges,
    /// Constant update: the predecessor becomes the only in-neighbor.
    #[serde(rename = "3")]
    FromConstant,
}

impl PinType {
    pub fn number(self) -> u8 {
        match self {
            PinType::AddEdge => 1,
            PinType::DropEdges => 2,
            PinType::FromConstant => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 1.0,
            c3: 2.0,
        }
    }
}

impl CostWeights {
    pub fn of(&self, t: PinType) -> f64 {
        match t {
            PinType::AddEdge => self.c1,
            PinType::DropEdges => self.c2,
            PinType::FromConstant => self.c3,
        }
    }
}

impl std::str::FromStr for CostWeights {
    type Err = String;

    /// Parses `C1,C2,C3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad weight `{x}`: {e}"))
            })
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [c1, c2, c3] if parts.iter().all(|c| c.is_finite() && *c >= 0.0) => {
                Ok(Self { c1, c2, c3 })
            }
            [_, _, _] => Err("weights must be finite and nonnegative".into()),
            _ => Err(format!(
                "expected three comma-separated weights, got {}",
                parts.len()
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pin {
    pub node: usize,
    pub pin_type: PinType,
    /// Desired sole in-neighbor (the path predecessor).
    pub predecessor: usize,
    /// One-based rank of `predecessor` within `extended`.
    pub position: usize,
    /// Current in-neighbors.
    pub inputs: Vec<usize>,
    /// `inputs` plus the predecessor, sorted.
    pub extended: Vec<usize>,
}

impl Pin {
    fn classify(g: &WiringDigraph, node: usize, predecessor: usize) -> Option<Pin> {
        let inputs = g.in_neighbors(node).to_vec();
        if inputs == [predecessor] {
            return None;
        }
        let pin_type = if inputs.is_empty() {
            PinType::FromConstant
        } else if inputs.contains(&predecessor) {
            PinType::DropEdges
        } else {
            PinType::AddEdge
        };
        let mut extended = inputs.clone();
        if let Err(at) = extended.binary_search(&predecessor) {
            extended.insert(at, predecessor);
        }
        let position = extended.binary_search(&predecessor).unwrap() + 1;
        Some(Pin {
            node,
            pin_type,
            predecessor,
            position,
            inputs,
            extended,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverStats {
    pub cover_paths: usize,
    pub matching_size: usize,
    pub cycles_found: usize,
    pub cycles_attached: usize,
    pub cycles_opened: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinningPlan {
    pub planner: PlannerKind,
    /// One path per output, by output index, each ending with the output's
    /// mirror vertex.
    pub paths: Vec<Vec<usize>>,
    /// Sorted by node id.
    pub pins: Vec<Pin>,
    pub weights: CostWeights,
    pub cover: Option<CoverStats>,
}

/// Pins induced by a set of paths.
pub fn categorize(g: &WiringDigraph, paths: &[Vec<usize>]) -> Vec<Pin> {
    let mut pins: Vec<Pin> = paths
        .iter()
        .flat_map(|p| p.windows(2))
        .filter(|w| !g.is_mirror(w[1]))
        .filter_map(|w| Pin::classify(g, w[1], w[0]))
        .collect();
    pins.sort_by_key(|p| p.node);
    pins
}

impl PinningPlan {
    pub fn new(
        g: &WiringDigraph,
        planner: PlannerKind,
        paths: Vec<Vec<usize>>,
        weights: CostWeights,
        cover: Option<CoverStats>,
    ) -> Self {
        let pins = categorize(g, &paths);
        Self {
            planner,
            paths,
            pins,
            weights,
            cover,
        }
    }

    pub fn pin_set(&self) -> BTreeSet<usize> {
        self.pins.iter().map(|p| p.node).collect()
    }

    pub fn pins_of(&self, t: PinType) -> BTreeSet<usize> {
        self.pins
            .iter()
            .filter(|p| p.pin_type == t)
            .map(|p| p.node)
            .collect()
    }

    /// `[|P1|, |P2|, |P3|]`.
    pub fn type_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for p in &self.pins {
            c[usize::from(p.pin_type.number()) - 1] += 1;
        }
        c
    }

    pub fn cost(&self) -> f64 {
        self.pins.iter().map(|p| self.weights.of(p.pin_type)).sum()
    }

    pub fn pin(&self, node: usize) -> Option<&Pin> {
        self.pins.iter().find(|p| p.node == node)
    }

    /// Checks the structural invariants of a plan against its digraph.
    pub fn validate(&self, g: &WiringDigraph) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::Invalid(m));
        if self.paths.len() != g.n_outputs() {
            return bad(format!(
                "{} paths for {} outputs",
                self.paths.len(),
                g.n_outputs()
            ));
        }
        let mut seen = BTreeSet::new();
        for (j, path) in self.paths.iter().enumerate() {
            let Some((&mirror, body)) = path.split_last() else {
                return bad(format!("path {j} is empty"));
            };
            if mirror != g.mirror(j) || body.last() != Some(&g.terminal(j)) {
                return bad(format!("path {j} does not end at output {j}"));
            }
            for &v in body {
                if !g.is_state(v) || !seen.insert(v) {
                    return bad(format!("vertex {} repeated or not a state", g.name(v)));
                }
                if v != g.terminal(j) && g.is_directly_observable(v) {
                    return bad(format!("{} is directly observable mid-path", g.name(v)));
                }
            }
        }
        if seen.len() != g.n_states() {
            return bad(format!(
                "paths cover {} of {} states",
                seen.len(),
                g.n_states()
            ));
        }
        for p in &self.pins {
            let ok = match p.pin_type {
                PinType::AddEdge => !p.inputs.is_empty() && !p.inputs.contains(&p.predecessor),
                PinType::DropEdges => p.inputs.contains(&p.predecessor) && p.inputs.len() > 1,
                PinType::FromConstant => p.inputs.is_empty(),
            };
            if !ok || p.extended[p.position - 1] != p.predecessor {
                return bad(format!("pin {} is misclassified", g.name(p.node)));
            }
        }
        Ok(())
    }

    /// Paths with vertex names, for reports.
    pub fn named_paths(&self, g: &WiringDigraph) -> Vec<Vec<String>> {
        self.paths
            .iter()
            .map(|p| p.iter().map(|&v| g.name(v).to_string()).collect())
            .collect()
    }

    pub fn report(&self, g: &WiringDigraph) -> PlanReport {
        let names = |vs: &[usize]| {
            vs.iter()
                .map(|&v| g.name(v).to_string())
                .collect::<Vec<_>>()
        };
        let [t1, t2, t3] = self.type_counts();
        PlanReport {
            planner: self.planner,
            paths: self.named_paths(g),
            pins: self
                .pins
                .iter()
                .map(|p| PinReport {
                    node: g.name(p.node).to_string(),
                    pin_type: p.pin_type.number(),
                    predecessor: g.name(p.predecessor).to_string(),
                    position: p.position,
                    in_neighbors: names(&p.inputs),
                    extended: names(&p.extended),
                })
                .collect(),
            type_counts: TypeCounts {
                type1: t1,
                type2: t2,
                type3: t3,
            },
            weights: self.weights,
            cost: self.cost(),
            cover: self.cover,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PinReport {
    pub node: String,
    #[serde(rename = "type")]
    pub pin_type: u8,
    pub predecessor: String,
    pub position: usize,
    pub in_neighbors: Vec<String>,
    pub extended: Vec<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TypeCounts {
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanReport {
    pub planner: PlannerKind,
    pub paths: Vec<Vec<String>>,
    pub pins: Vec<PinReport>,
    pub type_counts: TypeCounts,
    pub weights: CostWeights,
    pub cost: f64,
    pub cover: Option<CoverStats>,
}

/// Runs the selected planner.
pub fn plan(
    g: &WiringDigraph,
    planner: PlannerKind,
    weights: CostWeights,
) -> Result<PinningPlan, PlanError> {
    let plan = match planner {
        PlannerKind::Greedy => {
            let (_, paths) = greedy_paths(g);
            PinningPlan::new(g, planner, paths, weights, None)
        }
        PlannerKind::Cover => {
            let cover = min_path_cover(g, &weights);
            let stats = cover.stats();
            let paths = merge_paths(g, &cover, &weights)?;
            PinningPlan::new(g, planner, paths, weights, Some(stats))
        }
    };
    plan.validate(g)?;
    Ok(plan)
}
