//! Controller synthesis for pinned nodes.
//!
//! A pinned node `i` gets the update `x_i(t+1) = g_i(x) ⊕_i f_i(x)` where
//! `g_i` is a feedback function over the node's (extended) in-neighbors and
//! `⊕_i` one of the sixteen binary operators. The pair is chosen so that
//! the composed update depends on the planned predecessor only.

mod minimize;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::network::{
    column_value, matrix_to_table, structure_matrix, table_support, table_to_matrix, BoolExpr,
    BooleanNetwork, NetworkError, VarId,
};
use crate::planner::{Pin, PinType, PinningPlan};
use crate::stp::{self, DeltaVector, LogicalMatrix, StpError};
use crate::wiring::{build_wiring_digraph, AugmentedNetwork, WiringDigraph};

pub use minimize::minimize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("position {position} out of range 1..={k}")]
    PositionOutOfRange { position: usize, k: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no binary operator solves the equation for `{0}`")]
    Unsolvable(String),
    #[error("controller for `{0}` does not reproduce the target dynamics")]
    Inconsistent(String),
    #[error("pinned wiring does not realize the planned paths: {0}")]
    Certificate(String),
    #[error(transparent)]
    Stp(#[from] StpError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Desired polarity of the copied predecessor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// `Â = I_2`.
    #[default]
    Positive,
    /// `Â = δ_2[2,1]`.
    Negative,
}

impl Polarity {
    pub fn matrix(self) -> LogicalMatrix {
        match self {
            Polarity::Positive => LogicalMatrix::identity(2),
            Polarity::Negative => LogicalMatrix::new(2, vec![1, 0]).unwrap(),
        }
    }
}

/// The sixteen binary operators in solver order: conjunction, disjunction,
/// exclusive-or, equivalence, then the rest by column pattern. Each entry is
/// the 0-based column vector of `M_⊕` over `(u, f)`.
pub fn operators() -> Vec<LogicalMatrix> {
    let first: [[usize; 4]; 4] = [[0, 1, 1, 1], [0, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]];
    let mut ops: Vec<[usize; 4]> = first.to_vec();
    for bits in 0..16usize {
        let cols = [bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1];
        if !ops.contains(&cols) {
            ops.push(cols);
        }
    }
    ops.into_iter()
        .map(|c| LogicalMatrix::new(2, c.to_vec()).unwrap())
        .collect()
}

/// Short human name of a binary operator matrix.
pub fn operator_name(m: &LogicalMatrix) -> String {
    match m.col_indices() {
        [0, 1, 1, 1] => "and".into(),
        [0, 0, 0, 1] => "or".into(),
        [1, 0, 0, 1] => "xor".into(),
        [0, 1, 1, 0] => "xnor".into(),
        [0, 0, 1, 1] => "first".into(),
        [0, 1, 0, 1] => "second".into(),
        _ => m.to_string(),
    }
}

fn apply_op(m: &LogicalMatrix, u: bool, f: bool) -> bool {
    m.col(usize::from(!u) * 2 + usize::from(!f)) == 0
}

/// `(Â ⊗ 1ᵀ_{2^{k−1}}) Wᵀ_{[2,2^{ι−1}]}`: the structure matrix over `k`
/// variables that copies the ι-th through `Â`.
pub fn target_matrix(
    polarity: &LogicalMatrix,
    iota: usize,
    k: usize,
) -> Result<LogicalMatrix, SynthesisError> {
    if iota == 0 || iota > k {
        return Err(SynthesisError::PositionOutOfRange { position: iota, k });
    }
    let selector = stp::kron(polarity, &LogicalMatrix::ones_row(1 << (k - 1)))?;
    let w = stp::transpose(&stp::swap_matrix(2, 1 << (iota - 1))?)?;
    Ok(stp::stp(&selector, &w)?)
}

/// Lifts `L_f` over the `k−1` variables other than the ι-th to all `k`
/// variables by discarding the ι-th factor.
fn lift_without(
    l_f: &LogicalMatrix,
    iota: usize,
    k: usize,
) -> Result<LogicalMatrix, SynthesisError> {
    let drop = if iota < k {
        stp::kron(
            &LogicalMatrix::identity(1 << (iota - 1)),
            &stp::dummy_matrix(),
        )?
    } else {
        // The dummy matrix needs a following factor; at the last position
        // the discarded factor is the trailing one.
        stp::kron(
            &LogicalMatrix::identity(1 << (k - 1)),
            &LogicalMatrix::ones_row(2),
        )?
    };
    Ok(stp::stp(l_f, &drop)?)
}

/// Left-hand side of the controller equation for one pin type.
///
/// * Type 1: `M_⊕ L_g (I_{2^k} ⊗ (L_f (I_{2^{ι−1}} ⊗ D))) M_{r,2^k}`
/// * Type 2: `M_⊕ L_g (I_{2^k} ⊗ L_f) M_{r,2^k}`
/// * Type 3: `M_⊕ L_g W_{[2,2]} ϑ`
pub fn compose_pinned_matrix(
    pin_type: PinType,
    op: &LogicalMatrix,
    l_g: &LogicalMatrix,
    l_f: &LogicalMatrix,
    iota: usize,
    theta: Option<DeltaVector>,
) -> Result<LogicalMatrix, SynthesisError> {
    if op.rows() != 2 || op.ncols() != 4 {
        return Err(SynthesisError::Dimension(format!(
            "operator must be 2x4, got {op}"
        )));
    }
    let k = l_g.ncols().trailing_zeros() as usize;
    if l_g.rows() != 2 || !l_g.ncols().is_power_of_two() {
        return Err(SynthesisError::Dimension(format!(
            "feedback must be 2x2^k, got {l_g}"
        )));
    }
    let expand = |inner: &LogicalMatrix| -> Result<LogicalMatrix, SynthesisError> {
        let lifted = stp::kron(&LogicalMatrix::identity(1 << k), inner)?;
        let m_r = stp::power_reducing_matrix(1 << k)?;
        Ok(stp::stp_chain([op, l_g, &lifted, &m_r])?)
    };
    match pin_type {
        PinType::AddEdge => {
            if iota == 0 || iota > k {
                return Err(SynthesisError::PositionOutOfRange { position: iota, k });
            }
            if l_f.ncols() * 2 != l_g.ncols() {
                return Err(SynthesisError::Dimension(format!(
                    "type 1 needs L_f over k-1 = {} variables, got {} columns",
                    k - 1,
                    l_f.ncols()
                )));
            }
            expand(&lift_without(l_f, iota, k)?)
        }
        PinType::DropEdges => {
            if l_f.ncols() != l_g.ncols() {
                return Err(SynthesisError::Dimension(
                    "type 2 needs L_f and L_g over the same variables".into(),
                ));
            }
            expand(l_f)
        }
        PinType::FromConstant => {
            let theta =
                theta.ok_or_else(|| SynthesisError::Dimension("type 3 needs a constant".into()))?;
            if k != 1 {
                return Err(SynthesisError::Dimension(
                    "type 3 feedback reads exactly one variable".into(),
                ));
            }
            let w = stp::swap_matrix(2, 2)?;
            Ok(stp::stp_chain([op, l_g, &w, &theta.as_matrix()])?)
        }
    }
}

/// Solution of one controller equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllerSolution {
    pub op: LogicalMatrix,
    /// Feedback over the equation's variables (all `k` columns).
    pub l_g: LogicalMatrix,
    /// Positions (0-based) the feedback depends on.
    pub support: Vec<usize>,
}

/// Feedback table over positions `subset` that satisfies every column's
/// allowed-value set, if one exists.
fn fit_on_subset(allowed: &[[bool; 2]], k: usize, subset: &[usize]) -> Option<Vec<bool>> {
    let key = |c: usize| {
        subset
            .iter()
            .fold(0usize, |acc, &j| acc << 1 | (c >> (k - 1 - j) & 1))
    };
    let mut cls = vec![[true, true]; 1 << subset.len()];
    for (c, a) in allowed.iter().enumerate() {
        let slot = &mut cls[key(c)];
        slot[0] &= a[0];
        slot[1] &= a[1];
        if !slot[0] && !slot[1] {
            return None;
        }
    }
    // Prefer TRUE, then FALSE, per class.
    Some((0..allowed.len()).map(|c| cls[key(c)][0]).collect())
}

/// Pointwise solution of `⊕(g(x), f(x)) = target(x)` over `k` variables.
///
/// `f` and `target` are tables in structure-matrix column order. The first
/// operator (in [`operators`] order) admitting a solution wins; its feedback
/// is chosen with the fewest functional variables.
pub fn solve_pointwise(f: &[bool], target: &[bool], k: usize) -> Option<ControllerSolution> {
    const SEARCH_LIMIT: usize = 10;
    for op in operators() {
        let allowed: Vec<[bool; 2]> = f
            .iter()
            .zip(target)
            .map(|(&fx, &tx)| {
                [
                    apply_op(&op, true, fx) == tx,
                    apply_op(&op, false, fx) == tx,
                ]
            })
            .collect();
        if allowed.iter().any(|a| !a[0] && !a[1]) {
            continue;
        }
        let mut best = None;
        if k <= SEARCH_LIMIT {
            'size: for size in 0..=k {
                for mask in 0u32..(1 << k) {
                    if mask.count_ones() as usize != size {
                        continue;
                    }
                    let subset: Vec<usize> =
                        (0..k).filter(|&j| mask >> (k - 1 - j) & 1 == 1).collect();
                    if let Some(table) = fit_on_subset(&allowed, k, &subset) {
                        best = Some(table);
                        break 'size;
                    }
                }
            }
        }
        let table = best.unwrap_or_else(|| allowed.iter().map(|a| a[0]).collect());
        let support = table_support(&table, k);
        return Some(ControllerSolution {
            op,
            l_g: table_to_matrix(&table),
            support,
        });
    }
    None
}

/// Solves the controller equation of a pin given the structure matrix of
/// its current update over `pin.inputs` (or its constant value for Type 3).
pub fn solve_controller(
    pin_type: PinType,
    l_f: &LogicalMatrix,
    iota: usize,
    polarity: &LogicalMatrix,
    theta: Option<DeltaVector>,
) -> Result<ControllerSolution, SynthesisError> {
    let f_over = |k: usize| -> Result<Vec<bool>, SynthesisError> {
        match pin_type {
            PinType::AddEdge => {
                let f = matrix_to_table(l_f);
                // f ignores the ι-th of k variables
                Ok((0..1usize << k)
                    .map(|c| {
                        let high = c >> (k - iota + 1);
                        let low = c & ((1 << (k - iota)) - 1);
                        f[high << (k - iota) | low]
                    })
                    .collect())
            }
            PinType::DropEdges => Ok(matrix_to_table(l_f)),
            PinType::FromConstant => {
                let th = theta
                    .ok_or_else(|| SynthesisError::Dimension("type 3 needs a constant".into()))?;
                Ok(vec![th.index() == 1; 1 << k])
            }
        }
    };
    let k = match pin_type {
        PinType::AddEdge => l_f.ncols().trailing_zeros() as usize + 1,
        PinType::DropEdges => l_f.ncols().trailing_zeros() as usize,
        PinType::FromConstant => 1,
    };
    let target = matrix_to_table(&target_matrix(polarity, iota, k)?);
    let f = f_over(k)?;
    solve_pointwise(&f, &target, k)
        .ok_or_else(|| SynthesisError::Unsolvable(format!("{pin_type:?}")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PinController {
    pub node: VarId,
    pub pin_type: PinType,
    pub predecessor: VarId,
    pub position: usize,
    /// Variables of the feedback `L_g` (and of the target), sorted.
    pub vars: Vec<VarId>,
    /// Variables of the original update `L_f`, sorted.
    pub f_vars: Vec<VarId>,
    pub op: LogicalMatrix,
    pub l_g: LogicalMatrix,
    pub l_f: LogicalMatrix,
    pub polarity: LogicalMatrix,
    pub theta: Option<DeltaVector>,
    pub target: LogicalMatrix,
    /// Minimized feedback expression.
    pub feedback: BoolExpr,
    /// The replacement update `g ⊕ f`.
    pub update: BoolExpr,
}

fn op_expr(op: &LogicalMatrix, u: BoolExpr, f: BoolExpr) -> BoolExpr {
    match op.col_indices() {
        [0, 1, 1, 1] => BoolExpr::and(u, f),
        [0, 0, 0, 1] => BoolExpr::or(u, f),
        [1, 0, 0, 1] => BoolExpr::xor(u, f),
        [0, 1, 1, 0] => BoolExpr::iff(u, f),
        _ => {
            let table = matrix_to_table(op);
            minimize(&table, &[0, 1]).map_vars(&|v| if v == 0 { u.clone() } else { f.clone() })
        }
    }
}

/// Builds the controller of one pin of `bn` (the augmented network).
pub fn synthesize_pin(
    bn: &BooleanNetwork,
    pin: &Pin,
    polarity: Polarity,
) -> Result<PinController, SynthesisError> {
    let name = &bn.var(pin.node).name;
    let f_expr = bn
        .var(pin.node)
        .update()
        .cloned()
        .ok_or_else(|| SynthesisError::Dimension(format!("`{name}` is an input")))?;
    let a_hat = polarity.matrix();
    let (vars, theta) = match pin.pin_type {
        PinType::AddEdge => (pin.extended.clone(), None),
        PinType::DropEdges => (pin.inputs.clone(), None),
        PinType::FromConstant => (
            vec![pin.predecessor],
            Some(DeltaVector::from_bool(f_expr.eval(&|_| false))),
        ),
    };
    // syntactic mentions of non-functional variables do not affect f
    let f_reduced = f_expr.map_vars(&|v| {
        if pin.inputs.contains(&v) {
            BoolExpr::var(v)
        } else {
            BoolExpr::Const(false)
        }
    });
    let l_f = structure_matrix(&f_reduced, &pin.inputs)?;
    let iota = match pin.pin_type {
        PinType::FromConstant => 1,
        _ => pin.position,
    };
    let sol = solve_controller(pin.pin_type, &l_f, iota, &a_hat, theta)?;
    let target = target_matrix(&a_hat, iota, vars.len())?;
    let g_table = matrix_to_table(&sol.l_g);
    let support_vars: Vec<VarId> = sol.support.iter().map(|&j| vars[j]).collect();
    let reduced: Vec<bool> = (0..1usize << support_vars.len())
        .map(|c| {
            // lift the reduced column to a full column with other vars TRUE
            let full = sol.support.iter().enumerate().fold(0usize, |acc, (r, &j)| {
                let bit = c >> (support_vars.len() - 1 - r) & 1;
                acc | bit << (vars.len() - 1 - j)
            });
            g_table[full]
        })
        .collect();
    let feedback = minimize(&reduced, &support_vars);
    let update = op_expr(&sol.op, feedback.clone(), f_expr);
    Ok(PinController {
        node: pin.node,
        pin_type: pin.pin_type,
        predecessor: pin.predecessor,
        position: iota,
        vars,
        f_vars: pin.inputs.clone(),
        op: sol.op,
        l_g: sol.l_g,
        l_f,
        polarity: a_hat,
        theta,
        target,
        feedback,
        update,
    })
}

impl PinController {
    /// Algebraic check: the composed matrix equals the target.
    pub fn verify(&self) -> Result<bool, SynthesisError> {
        let composed = compose_pinned_matrix(
            self.pin_type,
            &self.op,
            &self.l_g,
            &self.l_f,
            self.position,
            self.theta,
        )?;
        Ok(composed == self.target)
    }

    /// Pointwise check over all assignments of `vars`.
    pub fn verify_pointwise(&self) -> bool {
        let k = self.vars.len();
        let g = matrix_to_table(&self.l_g);
        let t = matrix_to_table(&self.target);
        let f = matrix_to_table(&self.l_f);
        (0..1usize << k).all(|c| {
            let fx = match self.pin_type {
                PinType::FromConstant => self.theta.is_some_and(|th| th.index() == 1),
                _ => {
                    let fc = self.f_vars.iter().enumerate().fold(0usize, |acc, (r, v)| {
                        let j = self.vars.iter().position(|w| w == v).unwrap();
                        acc | usize::from(!column_value(c, j, k)) << (self.f_vars.len() - 1 - r)
                    });
                    f[fc]
                }
            };
            apply_op(&self.op, g[c], fx) == t[c]
        })
    }
}

#[derive(Clone, Debug)]
pub struct PinnedNetwork {
    /// The augmented network with pinned updates substituted.
    pub network: BooleanNetwork,
    pub controllers: Vec<PinController>,
    pub wiring: WiringDigraph,
    pub paths: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SynthesisOptions {
    pub polarity: Polarity,
    pub exec: Exec,
}

/// Largest equation size checked through the explicit matrix products.
const ALGEBRAIC_CHECK_LIMIT: usize = 10;

/// Solves every pin of `plan`, substitutes the pinned updates and certifies
/// that the new wiring splits into the planned observed paths.
pub fn synthesize(
    aug: &AugmentedNetwork,
    plan: &PinningPlan,
    opts: SynthesisOptions,
) -> Result<PinnedNetwork, SynthesisError> {
    let bn = &aug.network;
    let controllers: Vec<PinController> = opts
        .exec
        .map_slice(&plan.pins, |pin| synthesize_pin(bn, pin, opts.polarity))
        .into_iter()
        .collect::<Result<_, _>>()?;
    for c in &controllers {
        let ok = if c.vars.len() <= ALGEBRAIC_CHECK_LIMIT {
            c.verify()?
        } else {
            c.verify_pointwise()
        };
        if !ok {
            return Err(SynthesisError::Inconsistent(bn.var(c.node).name.clone()));
        }
    }
    let network = bn.with_updates(controllers.iter().map(|c| (c.node, c.update.clone())))?;
    let pinned_aug = AugmentedNetwork {
        network: network.clone(),
        ..aug.clone()
    };
    let wiring = build_wiring_digraph(&pinned_aug);
    let cert = |m: String| Err(SynthesisError::Certificate(m));
    for c in &controllers {
        if wiring.in_neighbors(c.node) != [c.predecessor] {
            return cert(format!(
                "`{}` still reads {:?}",
                bn.var(c.node).name,
                wiring.in_neighbors(c.node)
            ));
        }
    }
    for path in &plan.paths {
        if !wiring.is_observed_path(path) {
            return cert(format!(
                "path ending at `{}` is not observed",
                wiring.name(*path.last().unwrap())
            ));
        }
    }
    if wiring.decompose_into_observed_paths().is_none() {
        return cert("decomposition failed".into());
    }
    Ok(PinnedNetwork {
        network,
        controllers,
        wiring,
        paths: plan.paths.clone(),
    })
}

impl PinnedNetwork {
    /// `.bn` text with a comment header describing the pins.
    pub fn to_bn(&self, plan: &PinningPlan) -> String {
        let names = self.network.names();
        let mut out = String::new();
        let _ = writeln!(out, "# pinned network");
        let _ = writeln!(
            out,
            "# planner: {:?}, weights C1={} C2={} C3={}, cost {}",
            plan.planner,
            plan.weights.c1,
            plan.weights.c2,
            plan.weights.c3,
            plan.cost()
        );
        for c in &self.controllers {
            let _ = writeln!(
                out,
                "# pin {}: type {}, predecessor {}, op {}, g = {}",
                names[c.node],
                c.pin_type.number(),
                names[c.predecessor],
                operator_name(&c.op),
                c.feedback.display(&names)
            );
        }
        out.push_str(&self.network.to_bn());
        out
    }

    pub fn report(&self) -> Vec<ControllerReport> {
        let names = self.network.names();
        self.controllers
            .iter()
            .map(|c| ControllerReport {
                node: names[c.node].to_string(),
                pin_type: c.pin_type.number(),
                predecessor: names[c.predecessor].to_string(),
                op: operator_name(&c.op),
                op_matrix: c.op.to_string(),
                feedback: c.feedback.display(&names).to_string(),
                feedback_matrix: c.l_g.to_string(),
                feedback_vars: c.vars.iter().map(|&v| names[v].to_string()).collect(),
                update: c.update.display(&names).to_string(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ControllerReport {
    pub node: String,
    #[serde(rename = "type")]
    pub pin_type: u8,
    pub predecessor: String,
    pub op: String,
    pub op_matrix: String,
    pub feedback: String,
    pub feedback_matrix: String,
    pub feedback_vars: Vec<String>,
    pub update: String,
}
