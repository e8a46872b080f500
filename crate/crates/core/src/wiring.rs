//! Augmented networks, wiring digraphs and observed-path decomposition.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::network::{BoolExpr, BooleanNetwork, NetworkError, VarId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentMode {
    /// Mark single-variable sensed states as directly observable; falls back
    /// to [`AugmentMode::Generic`] when some sensor is not a distinct
    /// single-variable read.
    #[default]
    Collapse,
    /// Append one virtual state per output that copies the sensor value.
    Generic,
}

/// A network in which every output reads a distinct directly observable
/// state variable.
#[derive(Clone, Debug)]
pub struct AugmentedNetwork {
    pub base: BooleanNetwork,
    pub network: BooleanNetwork,
    pub mode: AugmentMode,
    /// Directly observable variable read by each output, by output index.
    pub terminals: Vec<VarId>,
    /// Ids of appended virtual variables (empty in collapse mode).
    pub virtual_vars: Vec<VarId>,
}

fn collapse_terminals(bn: &BooleanNetwork) -> Option<Vec<VarId>> {
    let mut seen = BTreeSet::new();
    bn.outputs()
        .iter()
        .map(|o| {
            let v = o.single_variable()?;
            (!bn.var(v).is_input() && seen.insert(v)).then_some(v)
        })
        .collect()
}

fn fresh_name(bn: &BooleanNetwork, taken: &BTreeSet<String>, base: &str) -> String {
    let mut name = format!("{base}_v");
    while bn.id_of(&name).is_some()
        || taken.contains(&name)
        || bn.outputs().iter().any(|o| o.name == name)
    {
        name.push('_');
    }
    name
}

pub fn augment(bn: &BooleanNetwork, mode: AugmentMode) -> Result<AugmentedNetwork, NetworkError> {
    if bn.n_outputs() == 0 {
        return Err(NetworkError::NoOutputs);
    }
    if mode == AugmentMode::Collapse {
        if let Some(terminals) = collapse_terminals(bn) {
            return Ok(AugmentedNetwork {
                base: bn.clone(),
                network: bn.clone(),
                mode,
                terminals,
                virtual_vars: Vec::new(),
            });
        }
    }
    let n = bn.vars().len();
    let mut vars: Vec<(String, Option<BoolExpr>)> = bn
        .vars()
        .iter()
        .map(|v| (v.name.clone(), v.update().cloned()))
        .collect();
    let mut taken = BTreeSet::new();
    let mut outputs = Vec::new();
    for (j, o) in bn.outputs().iter().enumerate() {
        let name = fresh_name(bn, &taken, &o.name);
        taken.insert(name.clone());
        vars.push((name, Some(o.sensor.clone())));
        outputs.push((o.name.clone(), BoolExpr::var(n + j)));
    }
    let network = BooleanNetwork::new(vars, outputs)?;
    let virtual_vars: Vec<VarId> = (n..n + bn.n_outputs()).collect();
    Ok(AugmentedNetwork {
        base: bn.clone(),
        network,
        mode: AugmentMode::Generic,
        terminals: virtual_vars.clone(),
        virtual_vars,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum VertexKind {
    State,
    Input,
    Mirror { output: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
    pub directly_observable: bool,
}

/// Functional-dependency digraph: vertex ids `0..vars` are the network
/// variables in declaration order, followed by one mirror per output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WiringDigraph {
    vertices: Vec<Vertex>,
    in_nbrs: Vec<Vec<usize>>,
    out_nbrs: Vec<Vec<usize>>,
    terminals: Vec<usize>,
    mirrors: Vec<usize>,
}

pub fn build_wiring_digraph(aug: &AugmentedNetwork) -> WiringDigraph {
    let bn = &aug.network;
    let nv = bn.vars().len();
    let mut vertices: Vec<Vertex> = bn
        .vars()
        .iter()
        .map(|v| Vertex {
            name: v.name.clone(),
            kind: if v.is_input() {
                VertexKind::Input
            } else {
                VertexKind::State
            },
            directly_observable: false,
        })
        .collect();
    for &t in &aug.terminals {
        vertices[t].directly_observable = true;
    }
    let mut in_nbrs: Vec<Vec<usize>> = bn.vars().iter().map(|v| v.functional().to_vec()).collect();
    let mut mirrors = Vec::new();
    for (j, o) in bn.outputs().iter().enumerate() {
        mirrors.push(nv + j);
        vertices.push(Vertex {
            name: o.name.clone(),
            kind: VertexKind::Mirror { output: j },
            directly_observable: false,
        });
        in_nbrs.push(vec![aug.terminals[j]]);
    }
    let mut out_nbrs = vec![Vec::new(); vertices.len()];
    for (dst, srcs) in in_nbrs.iter().enumerate() {
        for &src in srcs {
            out_nbrs[src].push(dst);
        }
    }
    WiringDigraph {
        vertices,
        in_nbrs,
        out_nbrs,
        terminals: aug.terminals.clone(),
        mirrors,
    }
}

/// Highlighting applied on top of a plain DOT rendering.
#[derive(Clone, Debug, Default)]
pub struct DotOverlay {
    pub paths: Vec<Vec<usize>>,
    /// `(vertex, label)` annotations, e.g. pin types.
    pub annotations: Vec<(usize, String)>,
}

impl WiringDigraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn name(&self, v: usize) -> &str {
        &self.vertices[v].name
    }

    /// Sorted in-neighbors, i.e. the functional variables of the update.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_nbrs[v]
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_nbrs[v]
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.in_nbrs[dst].binary_search(&src).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.in_nbrs
            .iter()
            .enumerate()
            .flat_map(|(dst, srcs)| srcs.iter().map(move |&src| (src, dst)))
    }

    pub fn edge_count(&self) -> usize {
        self.in_nbrs.iter().map(Vec::len).sum()
    }

    pub fn is_state(&self, v: usize) -> bool {
        self.vertices[v].kind == VertexKind::State
    }

    pub fn is_mirror(&self, v: usize) -> bool {
        matches!(self.vertices[v].kind, VertexKind::Mirror { .. })
    }

    pub fn is_directly_observable(&self, v: usize) -> bool {
        self.vertices[v].directly_observable
    }

    pub fn state_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| self.is_state(v))
    }

    pub fn n_states(&self) -> usize {
        self.state_vertices().count()
    }

    pub fn n_outputs(&self) -> usize {
        self.mirrors.len()
    }

    /// Directly observable vertex read by output `j`.
    pub fn terminal(&self, j: usize) -> usize {
        self.terminals[j]
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn mirror(&self, j: usize) -> usize {
        self.mirrors[j]
    }

    /// Output index whose terminal is `v`, if any.
    pub fn output_of_terminal(&self, v: usize) -> Option<usize> {
        self.terminals.iter().position(|&t| t == v)
    }

    pub fn max_in_degree(&self) -> usize {
        self.state_vertices()
            .map(|v| self.in_nbrs[v].len())
            .max()
            .unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.len())
            .map(|v| self.out_nbrs[v].len())
            .max()
            .unwrap_or(0)
    }

    /// Vertices of maximum in-degree among state vertices.
    pub fn argmax_in_degree(&self) -> Vec<usize> {
        let m = self.max_in_degree();
        self.state_vertices()
            .filter(|&v| self.in_nbrs[v].len() == m)
            .collect()
    }

    /// `u` is the sole in-neighbor of `w`.
    fn unique_pred(&self, w: usize) -> Option<usize> {
        match self.in_nbrs[w].as_slice() {
            [u] => Some(*u),
            _ => None,
        }
    }

    pub fn is_observed_path(&self, path: &[usize]) -> bool {
        let body = match path.split_last() {
            Some((&last, rest)) if self.is_mirror(last) => {
                if rest.last().is_none_or(|&t| self.in_nbrs[last] != [t]) {
                    return false;
                }
                rest
            }
            _ => path,
        };
        let Some((&end, _)) = body.split_last() else {
            return false;
        };
        if !body.iter().all(|&v| v < self.len() && self.is_state(v)) {
            return false;
        }
        let distinct: BTreeSet<usize> = body.iter().copied().collect();
        if distinct.len() != body.len() {
            return false;
        }
        self.is_directly_observable(end)
            && body[..body.len() - 1]
                .iter()
                .all(|&v| !self.is_directly_observable(v))
            && body
                .windows(2)
                .all(|w| self.unique_pred(w[1]) == Some(w[0]))
    }

    /// Splits the state vertices into one observed path per directly
    /// observable vertex, if possible. Paths are listed by output index and
    /// end with that output's mirror.
    pub fn decompose_into_observed_paths(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.len();
        let mut dist = vec![usize::MAX; n];
        let mut next = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &t in &self.terminals {
            dist[t] = 0;
            queue.push_back(t);
        }
        while let Some(w) = queue.pop_front() {
            let Some(u) = self.unique_pred(w) else {
                continue;
            };
            if self.is_state(u) && !self.is_directly_observable(u) && dist[u] == usize::MAX {
                dist[u] = dist[w] + 1;
                next[u] = w;
                queue.push_back(u);
            }
        }
        if self.state_vertices().any(|v| dist[v] == usize::MAX) {
            return None;
        }
        let mut has_pred = vec![false; n];
        for v in self.state_vertices() {
            if next[v] != usize::MAX {
                has_pred[next[v]] = true;
            }
        }
        let mut paths: Vec<Vec<usize>> = vec![Vec::new(); self.n_outputs()];
        for head in self.state_vertices().filter(|&v| !has_pred[v]) {
            let mut path = vec![head];
            let mut v = head;
            while next[v] != usize::MAX {
                v = next[v];
                path.push(v);
            }
            let j = self.output_of_terminal(v)?;
            path.push(self.mirrors[j]);
            paths[j] = path;
        }
        Some(paths)
    }

    /// Non-directly-observable state vertices with no out-neighbor whose
    /// in-neighbor set is exactly that vertex.
    pub fn check_p1(&self) -> Vec<usize> {
        self.state_vertices()
            .filter(|&i| !self.is_directly_observable(i))
            .filter(|&i| {
                !self.out_nbrs[i]
                    .iter()
                    .any(|&j| j != i && self.unique_pred(j) == Some(i))
            })
            .collect()
    }

    /// Deterministic Graphviz rendering.
    pub fn to_dot(&self, overlay: &DotOverlay) -> String {
        let mut path_edges = BTreeSet::new();
        for p in &overlay.paths {
            for w in p.windows(2) {
                path_edges.insert((w[0], w[1]));
            }
        }
        let mut out =
            String::from("digraph wiring {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
        for (v, vx) in self.vertices.iter().enumerate() {
            let mut label = vx.name.clone();
            for (_, a) in overlay.annotations.iter().filter(|(u, _)| *u == v) {
                let _ = write!(label, "\\n{a}");
            }
            let style = match vx.kind {
                VertexKind::State if vx.directly_observable => {
                    "shape=ellipse, style=filled, fillcolor=\"#9ecae1\""
                }
                VertexKind::State => "shape=ellipse",
                VertexKind::Input => "shape=diamond",
                VertexKind::Mirror { .. } => "shape=box, style=dashed",
            };
            let _ = writeln!(
                out,
                "  n{v} [label=\"{}\", {style}];",
                label.replace('"', "\\\"")
            );
        }
        for (src, dst) in self.edges() {
            if path_edges.contains(&(src, dst)) {
                let _ = writeln!(out, "  n{src} -> n{dst} [color=\"#d62728\", penwidth=2];");
            } else {
                let _ = writeln!(out, "  n{src} -> n{dst};");
            }
        }
        for (src, dst) in &path_edges {
            if !self.has_edge(*src, *dst) {
                let _ = writeln!(
                    out,
                    "  n{src} -> n{dst} [color=\"#d62728\", penwidth=2, style=dashed];"
                );
            }
        }
        out.push_str("}\n");
        out
    }
}
