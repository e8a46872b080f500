//! Boolean network model: variables with update rules, external inputs, and
//! output sensors.
//!
//! Functional signatures (the variables each rule *actually* depends on) are
//! computed eagerly when the network is built; everything downstream uses
//! them instead of the syntactic variable sets.

mod expr;
mod parse;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::stp::StpError;

pub use expr::{
    assignment_column, column_value, functional_vars, functional_vars_via_columns, matrix_to_table,
    structure_matrix, table_depends_on, table_support, table_to_matrix, truth_table, BoolExpr,
    ExprDisplay,
};
pub use parse::{parse_expr, parse_network, ParseError};

pub type VarId = usize;

/// Largest number of distinct variables a single rule may mention.
pub const MAX_FAN_IN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("invalid node name `{0}`")]
    InvalidName(String),
    #[error("expression refers to unknown variable id {0}")]
    MissingVariable(VarId),
    #[error("rule for `{node}` mentions {count} variables; the limit is {cap}")]
    FanInTooLarge {
        node: String,
        count: usize,
        cap: usize,
    },
    #[error("not a 2x2^k structure matrix: {0}")]
    NotStructureMatrix(String),
    #[error("variable position {position} out of range 1..={k}")]
    PositionOutOfRange { position: usize, k: usize },
    #[error("network has no outputs")]
    NoOutputs,
    #[error(transparent)]
    Stp(#[from] StpError),
}

/// Whether a variable is updated by a rule or driven from outside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarKind {
    State(BoolExpr),
    Input,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    functional: Vec<VarId>,
}

impl Variable {
    pub fn update(&self) -> Option<&BoolExpr> {
        match &self.kind {
            VarKind::State(e) => Some(e),
            VarKind::Input => None,
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self.kind, VarKind::Input)
    }

    /// Functional variables of the update rule in increasing declaration
    /// order; empty for inputs and constant rules.
    pub fn functional(&self) -> &[VarId] {
        &self.functional
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub sensor: BoolExpr,
    functional: Vec<VarId>,
}

impl Output {
    pub fn functional(&self) -> &[VarId] {
        &self.functional
    }

    /// The sensed variable when the sensor reads exactly one variable
    /// (directly or negated).
    pub fn single_variable(&self) -> Option<VarId> {
        match self.functional.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

/// A node-level functional signature, as reported by analysis commands.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FunctionalSignature {
    pub node: String,
    pub functional_vars: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanNetwork {
    vars: Vec<Variable>,
    outputs: Vec<Output>,
    states: Vec<VarId>,
    index: HashMap<String, VarId>,
}

pub fn is_valid_name(name: &str) -> bool {
    parse::lex_name(name.as_bytes(), 0) == Some(name.len())
}

fn functional_set(expr: &BoolExpr, node: &str) -> Result<Vec<VarId>, NetworkError> {
    let vars: Vec<VarId> = expr.variables().into_iter().collect();
    if vars.len() > MAX_FAN_IN {
        return Err(NetworkError::FanInTooLarge {
            node: node.to_string(),
            count: vars.len(),
            cap: MAX_FAN_IN,
        });
    }
    let table = truth_table(expr, &vars)?;
    Ok(table_support(&table, vars.len())
        .into_iter()
        .map(|j| vars[j])
        .collect())
}

impl BooleanNetwork {
    /// Builds a network from `(name, Some(update) | None)` variable
    /// declarations (in declaration order) and `(name, sensor)` outputs.
    pub fn new(
        vars: Vec<(String, Option<BoolExpr>)>,
        outputs: Vec<(String, BoolExpr)>,
    ) -> Result<Self, NetworkError> {
        let mut index = HashMap::new();
        for name in vars
            .iter()
            .map(|(n, _)| n)
            .chain(outputs.iter().map(|(n, _)| n))
        {
            if !is_valid_name(name) {
                return Err(NetworkError::InvalidName(name.clone()));
            }
            if index.insert(name.clone(), index.len()).is_some() {
                return Err(NetworkError::DuplicateName(name.clone()));
            }
        }
        index.retain(|_, &mut id| id < vars.len());

        let nvars = vars.len();
        let check_ids = |e: &BoolExpr| match e.variables().into_iter().find(|&v| v >= nvars) {
            Some(v) => Err(NetworkError::MissingVariable(v)),
            None => Ok(()),
        };

        let mut built = Vec::with_capacity(vars.len());
        for (name, update) in vars {
            let (kind, functional) = match update {
                Some(e) => {
                    check_ids(&e)?;
                    let f = functional_set(&e, &name)?;
                    (VarKind::State(e), f)
                }
                None => (VarKind::Input, Vec::new()),
            };
            built.push(Variable {
                name,
                kind,
                functional,
            });
        }
        let mut outs = Vec::with_capacity(outputs.len());
        for (name, sensor) in outputs {
            check_ids(&sensor)?;
            let functional = functional_set(&sensor, &name)?;
            outs.push(Output {
                name,
                sensor,
                functional,
            });
        }
        let states = built
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_input())
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            vars: built,
            outputs: outs,
            states,
            index,
        })
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id]
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    /// Ids of state (non-input) variables in declaration order.
    pub fn states(&self) -> &[VarId] {
        &self.states
    }

    pub fn inputs(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_input())
            .map(|(i, _)| i)
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn signatures(&self) -> Vec<FunctionalSignature> {
        let name = |&i: &VarId| self.vars[i].name.clone();
        self.states
            .iter()
            .map(|&i| FunctionalSignature {
                node: self.vars[i].name.clone(),
                functional_vars: self.vars[i].functional.iter().map(name).collect(),
            })
            .chain(self.outputs.iter().map(|o| FunctionalSignature {
                node: o.name.clone(),
                functional_vars: o.functional.iter().map(name).collect(),
            }))
            .collect()
    }

    /// Largest functional in-degree over state rules and sensors.
    pub fn max_in_degree(&self) -> usize {
        self.vars
            .iter()
            .map(|v| v.functional.len())
            .chain(self.outputs.iter().map(|o| o.functional.len()))
            .max()
            .unwrap_or(0)
    }

    /// Returns a copy with some update rules replaced.
    pub fn with_updates(
        &self,
        replacements: impl IntoIterator<Item = (VarId, BoolExpr)>,
    ) -> Result<Self, NetworkError> {
        let mut vars: Vec<(String, Option<BoolExpr>)> = self
            .vars
            .iter()
            .map(|v| (v.name.clone(), v.update().cloned()))
            .collect();
        for (id, e) in replacements {
            vars[id].1 = Some(e);
        }
        let outputs = self
            .outputs
            .iter()
            .map(|o| (o.name.clone(), o.sensor.clone()))
            .collect();
        Self::new(vars, outputs)
    }

    /// Canonical `.bn` text.
    pub fn to_bn(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BooleanNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names();
        for v in &self.vars {
            match &v.kind {
                VarKind::Input => writeln!(f, "input {}", v.name)?,
                VarKind::State(e) => writeln!(f, "{} = {}", v.name, e.display(&names))?,
            }
        }
        for o in &self.outputs {
            writeln!(f, "output {} = {}", o.name, o.sensor.display(&names))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BooleanNetwork {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_network(s)
    }
}
