//! Exhaustive observability check by state-space enumeration.
//!
//! States are packed little-endian: bit `i` holds the `i`-th state variable
//! in declaration order, set when TRUE. Inputs are frozen at a given
//! assignment, so the network is an autonomous Moore machine and
//! observability is decided by partition refinement on output classes.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::network::{truth_table, BoolExpr, BooleanNetwork, NetworkError, VarId};

/// Default cap on the number of state variables.
pub const DEFAULT_STATE_CAP: usize = 22;
/// Hard limit imposed by the packed representation.
pub const MAX_STATE_BITS: usize = 31;
pub const MAX_OUTPUTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} state variables exceed the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("{0} outputs exceed the packed limit of 64")]
    TooManyOutputs(usize),
    #[error("input assignment has {got} values, network has {expected} inputs")]
    InputArity { got: usize, expected: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// A rule compiled to a lookup table over its functional state variables,
/// given as state-bit positions.
struct Compiled {
    bits: Vec<u32>,
    table: Vec<bool>,
}

impl Compiled {
    fn new(
        expr: &BoolExpr,
        functional: &[VarId],
        bit_of: &[Option<u32>],
        inputs: &BTreeMap<VarId, bool>,
    ) -> Result<Self, NetworkError> {
        // substitute inputs, and syntactic non-dependencies, by constants
        let fixed = expr.map_vars(&|v| match inputs.get(&v) {
            Some(&b) => BoolExpr::Const(b),
            None if functional.contains(&v) => BoolExpr::var(v),
            None => BoolExpr::Const(false),
        });
        let vars: Vec<VarId> = functional
            .iter()
            .copied()
            .filter(|v| !inputs.contains_key(v))
            .collect();
        let table = truth_table(&fixed, &vars)?;
        Ok(Self {
            bits: vars
                .iter()
                .map(|&v| bit_of[v].expect("state variable"))
                .collect(),
            table,
        })
    }

    fn eval(&self, state: u32) -> bool {
        let k = self.bits.len();
        let col = self.bits.iter().enumerate().fold(0usize, |acc, (j, &b)| {
            acc | ((!(state >> b) & 1) as usize) << (k - 1 - j)
        });
        self.table[col]
    }
}

/// Successor and output maps of the input-frozen network.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub n: usize,
    pub succ: Vec<u32>,
    /// Bit `j` is output `j`.
    pub output: Vec<u64>,
    pub state_names: Vec<String>,
    pub input_values: Vec<(String, bool)>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    /// Output sequence `y(0), …, y(steps−1)` from `x0`.
    pub fn trace(&self, x0: u32, steps: usize) -> Vec<u64> {
        let mut x = x0;
        (0..steps)
            .map(|_| {
                let y = self.output[x as usize];
                x = self.succ[x as usize];
                y
            })
            .collect()
    }

    pub fn state_map(&self, x: u32) -> Assignment {
        Assignment(
            self.state_names
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), x >> i & 1 == 1))
                .collect(),
        )
    }
}

/// Enumerates all `2^n` states with the inputs held at `inputs` (in input
/// declaration order; all FALSE when `None`).
pub fn enumerate_state_space(
    bn: &BooleanNetwork,
    inputs: Option<&[bool]>,
    cap: usize,
    exec: Exec,
) -> Result<StateSpace, OracleError> {
    let n = bn.n_states();
    if n > cap.min(MAX_STATE_BITS) {
        return Err(OracleError::TooLarge {
            n,
            cap: cap.min(MAX_STATE_BITS),
        });
    }
    if bn.n_outputs() > MAX_OUTPUTS {
        return Err(OracleError::TooManyOutputs(bn.n_outputs()));
    }
    let input_ids: Vec<VarId> = bn.inputs().collect();
    let values = match inputs {
        Some(v) if v.len() != input_ids.len() => {
            return Err(OracleError::InputArity {
                got: v.len(),
                expected: input_ids.len(),
            })
        }
        Some(v) => v.to_vec(),
        None => vec![false; input_ids.len()],
    };
    let fixed: BTreeMap<VarId, bool> = input_ids
        .iter()
        .copied()
        .zip(values.iter().copied())
        .collect();
    let mut bit_of = vec![None; bn.vars().len()];
    for (i, &v) in bn.states().iter().enumerate() {
        bit_of[v] = Some(i as u32);
    }
    let updates: Vec<Compiled> = bn
        .states()
        .iter()
        .map(|&v| {
            let var = bn.var(v);
            Compiled::new(var.update().unwrap(), var.functional(), &bit_of, &fixed)
        })
        .collect::<Result<_, _>>()?;
    let sensors: Vec<Compiled> = bn
        .outputs()
        .iter()
        .map(|o| Compiled::new(&o.sensor, o.functional(), &bit_of, &fixed))
        .collect::<Result<_, _>>()?;
    let size = 1usize << n;
    let succ = exec.map_range(size, |x| {
        updates
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, u)| acc | u32::from(u.eval(x as u32)) << i)
    });
    let output = exec.map_range(size, |x| {
        sensors
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, s)| acc | u64::from(s.eval(x as u32)) << j)
    });
    Ok(StateSpace {
        n,
        succ,
        output,
        state_names: bn
            .states()
            .iter()
            .map(|&v| bn.var(v).name.clone())
            .collect(),
        input_values: input_ids
            .iter()
            .zip(&values)
            .map(|(&v, &b)| (bn.var(v).name.clone(), b))
            .collect(),
    })
}

/// Renumbers `keys` densely, preserving order; returns the class count.
fn renumber(keys: &[u64], exec: Exec) -> (Vec<u32>, usize) {
    let mut distinct = keys.to_vec();
    exec.sort_unstable(&mut distinct);
    distinct.dedup();
    let classes = exec.map_slice(keys, |k| distinct.binary_search(k).unwrap() as u32);
    (classes, distinct.len())
}

/// Result of Moore partition refinement.
#[derive(Clone, Debug)]
pub struct Refinement {
    /// Class of each state in the coarsest output-consistent partition.
    pub class: Vec<u32>,
    pub n_classes: usize,
    /// Rounds until the partition stabilized; the number of output steps
    /// that separate every separable pair is `rounds + 1`.
    pub rounds: usize,
}

pub fn refine(space: &StateSpace, exec: Exec) -> Refinement {
    let (mut class, mut count) = renumber(&space.output, exec);
    let mut rounds = 0;
    loop {
        let keys = exec.map_range(space.len(), |x| {
            u64::from(class[x]) << 32 | u64::from(class[space.succ[x] as usize])
        });
        let (next, next_count) = renumber(&keys, exec);
        if next_count == count {
            return Refinement {
                class,
                n_classes: count,
                rounds,
            };
        }
        class = next;
        count = next_count;
        rounds += 1;
    }
}

/// Variable values in declaration order; serialized as an ordered object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment(pub Vec<(String, bool)>);

impl Assignment {
    pub fn get(&self, name: &str) -> Option<bool> {
        self.0.iter().find(|(n, _)| n == name).map(|&(_, b)| b)
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub x0: Assignment,
    pub x1: Assignment,
    /// Steps over which the two output traces were compared and found equal.
    pub verified_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub observable: bool,
    pub state_variables: usize,
    pub states: usize,
    pub classes: usize,
    /// Output steps needed to tell every pair of initial states apart.
    pub horizon: Option<usize>,
    pub inputs: Assignment,
    pub witness: Option<Witness>,
}

/// Decides observability of `bn` with inputs frozen at `inputs`.
///
/// When unobservable, the witness pair is checked by simulating both
/// trajectories for `2^n` steps.
pub fn check_observability(
    bn: &BooleanNetwork,
    inputs: Option<&[bool]>,
    cap: usize,
    exec: Exec,
) -> Result<Verdict, OracleError> {
    let space = enumerate_state_space(bn, inputs, cap, exec)?;
    Ok(verdict(&space, exec))
}

pub fn verdict(space: &StateSpace, exec: Exec) -> Verdict {
    let r = refine(space, exec);
    let observable = r.n_classes == space.len();
    let witness = (!observable).then(|| {
        let mut first = vec![u32::MAX; r.n_classes];
        let (a, b) = (0..space.len() as u32)
            .find_map(|x| {
                let c = r.class[x as usize] as usize;
                if first[c] == u32::MAX {
                    first[c] = x;
                    None
                } else {
                    Some((first[c], x))
                }
            })
            .expect("a class with two states");
        let steps = space.len();
        assert_eq!(
            space.trace(a, steps),
            space.trace(b, steps),
            "refinement produced a separable pair"
        );
        Witness {
            x0: space.state_map(a),
            x1: space.state_map(b),
            verified_steps: steps,
        }
    });
    Verdict {
        observable,
        state_variables: space.n,
        states: space.len(),
        classes: r.n_classes,
        horizon: observable.then_some(r.rounds + 1),
        inputs: Assignment(space.input_values.clone()),
        witness,
    }
}

pub fn is_observable(
    bn: &BooleanNetwork,
    inputs: Option<&[bool]>,
    cap: usize,
    exec: Exec,
) -> Result<bool, OracleError> {
    Ok(check_observability(bn, inputs, cap, exec)?.observable)
}

/// Smallest `T` such that `y(0..T)` determines the initial state, if any.
pub fn distinguishing_horizon(
    bn: &BooleanNetwork,
    inputs: Option<&[bool]>,
    cap: usize,
    exec: Exec,
) -> Result<Option<usize>, OracleError> {
    Ok(check_observability(bn, inputs, cap, exec)?.horizon)
}
