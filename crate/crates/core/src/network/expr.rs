use std::collections::BTreeSet;
use std::fmt;

use crate::stp::{self, LogicalMatrix};

use super::{NetworkError, VarId, MAX_FAN_IN};

/// Logical expression tree over network variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Var(VarId),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
    Iff(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(id: VarId) -> Self {
        BoolExpr::Var(id)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn xor(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Xor(Box::new(a), Box::new(b))
    }

    pub fn iff(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Iff(Box::new(a), Box::new(b))
    }

    /// Conjunction of all terms; `TRUE` when empty.
    pub fn all(terms: impl IntoIterator<Item = BoolExpr>) -> Self {
        terms
            .into_iter()
            .reduce(BoolExpr::and)
            .unwrap_or(BoolExpr::Const(true))
    }

    /// Disjunction of all terms; `FALSE` when empty.
    pub fn any(terms: impl IntoIterator<Item = BoolExpr>) -> Self {
        terms
            .into_iter()
            .reduce(BoolExpr::or)
            .unwrap_or(BoolExpr::Const(false))
    }

    pub fn eval<F: Fn(VarId) -> bool>(&self, value: &F) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(v) => value(*v),
            BoolExpr::Not(e) => !e.eval(value),
            BoolExpr::And(a, b) => a.eval(value) && b.eval(value),
            BoolExpr::Or(a, b) => a.eval(value) || b.eval(value),
            BoolExpr::Xor(a, b) => a.eval(value) ^ b.eval(value),
            BoolExpr::Iff(a, b) => a.eval(value) == b.eval(value),
        }
    }

    /// Syntactic variables, in increasing id order.
    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(v) => {
                out.insert(*v);
            }
            BoolExpr::Not(e) => e.collect_vars(out),
            BoolExpr::And(a, b)
            | BoolExpr::Or(a, b)
            | BoolExpr::Xor(a, b)
            | BoolExpr::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces every variable reference through `f`.
    pub fn map_vars<F: Fn(VarId) -> BoolExpr>(&self, f: &F) -> BoolExpr {
        let bin = |a: &BoolExpr, b: &BoolExpr| (Box::new(a.map_vars(f)), Box::new(b.map_vars(f)));
        match self {
            BoolExpr::Const(b) => BoolExpr::Const(*b),
            BoolExpr::Var(v) => f(*v),
            BoolExpr::Not(e) => BoolExpr::Not(Box::new(e.map_vars(f))),
            BoolExpr::And(a, b) => {
                let (a, b) = bin(a, b);
                BoolExpr::And(a, b)
            }
            BoolExpr::Or(a, b) => {
                let (a, b) = bin(a, b);
                BoolExpr::Or(a, b)
            }
            BoolExpr::Xor(a, b) => {
                let (a, b) = bin(a, b);
                BoolExpr::Xor(a, b)
            }
            BoolExpr::Iff(a, b) => {
                let (a, b) = bin(a, b);
                BoolExpr::Iff(a, b)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BoolExpr::Const(_) | BoolExpr::Var(_) => 1,
            BoolExpr::Not(e) => 1 + e.depth(),
            BoolExpr::And(a, b)
            | BoolExpr::Or(a, b)
            | BoolExpr::Xor(a, b)
            | BoolExpr::Iff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Renders the expression in `.bn` syntax with minimal parentheses.
    pub fn display<'a, N: AsRef<str>>(&'a self, names: &'a [N]) -> ExprDisplay<'a, N> {
        ExprDisplay { expr: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Iff(..) => 1,
            BoolExpr::Or(..) => 2,
            BoolExpr::Xor(..) => 3,
            BoolExpr::And(..) => 4,
            BoolExpr::Not(_) => 5,
            BoolExpr::Const(_) | BoolExpr::Var(_) => 6,
        }
    }
}

pub struct ExprDisplay<'a, N> {
    expr: &'a BoolExpr,
    names: &'a [N],
}

impl<N: AsRef<str>> ExprDisplay<'_, N> {
    fn write(&self, e: &BoolExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |c: &BoolExpr, parens: bool, f: &mut fmt::Formatter<'_>| {
            if parens {
                f.write_str("(")?;
                self.write(c, f)?;
                f.write_str(")")
            } else {
                self.write(c, f)
            }
        };
        match e {
            BoolExpr::Const(b) => f.write_str(if *b { "1" } else { "0" }),
            BoolExpr::Var(v) => match self.names.get(*v) {
                Some(n) => f.write_str(n.as_ref()),
                None => write!(f, "#{v}"),
            },
            BoolExpr::Not(inner) => {
                f.write_str("!")?;
                child(inner, inner.precedence() < 5, f)
            }
            BoolExpr::And(a, b)
            | BoolExpr::Or(a, b)
            | BoolExpr::Xor(a, b)
            | BoolExpr::Iff(a, b) => {
                let p = e.precedence();
                let op = match e {
                    BoolExpr::And(..) => " & ",
                    BoolExpr::Or(..) => " | ",
                    BoolExpr::Xor(..) => " ^ ",
                    _ => " <-> ",
                };
                child(a, a.precedence() < p, f)?;
                f.write_str(op)?;
                child(b, b.precedence() <= p, f)
            }
        }
    }
}

impl<N: AsRef<str>> fmt::Display for ExprDisplay<'_, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

/// Column index of an assignment under the structure-matrix convention:
/// the first variable is the most significant digit and TRUE precedes FALSE.
/// `values[j]` is the value of the j-th variable.
pub fn assignment_column(values: &[bool]) -> usize {
    values
        .iter()
        .fold(0usize, |acc, &v| (acc << 1) | usize::from(!v))
}

/// Value of the j-th of `k` variables in column `c`.
pub fn column_value(c: usize, j: usize, k: usize) -> bool {
    (c >> (k - 1 - j)) & 1 == 0
}

/// Truth table of `expr` over `var_order`, indexed by structure-matrix column.
pub fn truth_table(expr: &BoolExpr, var_order: &[VarId]) -> Result<Vec<bool>, NetworkError> {
    let k = var_order.len();
    if k > MAX_FAN_IN {
        return Err(NetworkError::FanInTooLarge {
            node: String::new(),
            count: k,
            cap: MAX_FAN_IN,
        });
    }
    if let Some(&missing) = expr.variables().iter().find(|v| !var_order.contains(v)) {
        return Err(NetworkError::MissingVariable(missing));
    }
    let max_id = var_order.iter().copied().max().map_or(0, |m| m + 1);
    let mut slot = vec![usize::MAX; max_id];
    for (j, &v) in var_order.iter().enumerate() {
        slot[v] = j;
    }
    Ok((0..1usize << k)
        .map(|c| expr.eval(&|v| column_value(c, slot[v], k)))
        .collect())
}

/// Structure matrix `L_f ∈ L_{2×2^k}` with `f(x_1..x_k) = L_f ⋉ x_1 ⋉ … ⋉ x_k`.
pub fn structure_matrix(
    expr: &BoolExpr,
    var_order: &[VarId],
) -> Result<LogicalMatrix, NetworkError> {
    let table = truth_table(expr, var_order)?;
    Ok(table_to_matrix(&table))
}

pub fn table_to_matrix(table: &[bool]) -> LogicalMatrix {
    LogicalMatrix::new(2, table.iter().map(|&v| usize::from(!v)).collect())
        .expect("truth tables are nonempty")
}

pub fn matrix_to_table(m: &LogicalMatrix) -> Vec<bool> {
    m.col_indices().iter().map(|&i| i == 0).collect()
}

/// True iff flipping `candidate` changes the value of `expr` for at least
/// one assignment of the remaining variables.
pub fn functional_vars(expr: &BoolExpr, candidate: VarId) -> bool {
    let vars: Vec<VarId> = expr.variables().into_iter().collect();
    let Some(pos) = vars.iter().position(|&v| v == candidate) else {
        return false;
    };
    match truth_table(expr, &vars) {
        Ok(table) => table_depends_on(&table, pos, vars.len()),
        Err(_) => {
            // Beyond the table cap; fall back to direct evaluation.
            let k = vars.len();
            (0..1u64 << (k - 1)).any(|rest| {
                let value_of = |flip: bool| {
                    expr.eval(&|v| {
                        let j = vars.iter().position(|&w| w == v).unwrap();
                        if j == pos {
                            flip
                        } else {
                            let bit = if j < pos { j } else { j - 1 };
                            (rest >> bit) & 1 == 1
                        }
                    })
                };
                value_of(true) != value_of(false)
            })
        }
    }
}

/// Whether the table over `k` variables depends on variable `pos` (zero-based).
pub fn table_depends_on(table: &[bool], pos: usize, k: usize) -> bool {
    let bit = 1usize << (k - 1 - pos);
    (0..table.len()).any(|c| c & bit == 0 && table[c] != table[c | bit])
}

/// Functional variables of a truth table, as zero-based positions.
pub fn table_support(table: &[bool], k: usize) -> Vec<usize> {
    (0..k).filter(|&j| table_depends_on(table, j, k)).collect()
}

/// Column test on a structure matrix: variable `position` (one-based) is
/// nonfunctional iff the columns of `L_f W_[2,2^{i-1}]` agree pairwise across
/// the two halves. Returns true when the variable is functional.
pub fn functional_vars_via_columns(
    l_f: &LogicalMatrix,
    position: usize,
) -> Result<bool, NetworkError> {
    let ncols = l_f.ncols();
    if l_f.rows() != 2 || !ncols.is_power_of_two() {
        return Err(NetworkError::NotStructureMatrix(l_f.to_string()));
    }
    let k = ncols.trailing_zeros() as usize;
    if position == 0 || position > k {
        return Err(NetworkError::PositionOutOfRange { position, k });
    }
    let w = stp::swap_matrix(2, 1 << (position - 1))?;
    let moved = stp::stp(l_f, &w)?;
    let half = ncols / 2;
    Ok((0..half).any(|j| moved.col(j) != moved.col(j + half)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: usize) -> BoolExpr {
        BoolExpr::var(i)
    }

    fn delta(idx: &[usize]) -> LogicalMatrix {
        LogicalMatrix::from_delta(2, idx).unwrap()
    }

    #[test]
    fn structure_matrices_of_basic_functions() {
        assert_eq!(
            structure_matrix(&v(0), &[0]).unwrap(),
            LogicalMatrix::identity(2)
        );
        assert_eq!(
            structure_matrix(&BoolExpr::not(v(0)), &[0]).unwrap(),
            delta(&[2, 1])
        );
        assert_eq!(
            structure_matrix(&BoolExpr::and(v(0), v(1)), &[0, 1]).unwrap(),
            delta(&[1, 2, 2, 2])
        );
        assert_eq!(
            structure_matrix(&BoolExpr::or(v(0), v(1)), &[0, 1]).unwrap(),
            delta(&[1, 1, 1, 2])
        );
        // order matters: x0 & !x1 over [1, 0]
        assert_eq!(
            structure_matrix(&BoolExpr::and(v(0), BoolExpr::not(v(1))), &[1, 0]).unwrap(),
            delta(&[2, 2, 1, 2])
        );
    }

    #[test]
    fn missing_variable_is_an_error() {
        let err = structure_matrix(&BoolExpr::and(v(0), v(3)), &[0]).unwrap_err();
        assert_eq!(err, NetworkError::MissingVariable(3));
    }

    #[test]
    fn structure_matrix_reproduces_multilinear_form() {
        // f = L_f ⋉ x_1 ⋉ x_2 ⋉ x_3 for every assignment.
        let f = BoolExpr::or(
            BoolExpr::and(v(0), BoolExpr::not(v(2))),
            BoolExpr::xor(v(1), v(2)),
        );
        let l = structure_matrix(&f, &[0, 1, 2]).unwrap();
        for bits in 0..8u32 {
            let vals = [(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0];
            let x = vals
                .iter()
                .map(|&b| crate::stp::DeltaVector::from_bool(b).as_matrix())
                .collect::<Vec<_>>();
            let mut factors = vec![l.clone()];
            factors.extend(x);
            let out = stp::stp_chain(&factors).unwrap();
            let expected = f.eval(&|i| vals[i]);
            assert_eq!(
                out,
                crate::stp::DeltaVector::from_bool(expected).as_matrix()
            );
        }
    }

    #[test]
    fn functional_variable_examples() {
        let cancel = BoolExpr::or(v(0), BoolExpr::and(v(1), BoolExpr::not(v(1))));
        assert!(!functional_vars(&cancel, 1));
        assert!(functional_vars(&cancel, 0));
        assert!(!functional_vars(&BoolExpr::xor(v(0), v(0)), 0));
        assert!(!functional_vars(&v(0), 7));
    }

    #[test]
    fn column_test_examples() {
        let l = delta(&[1, 2, 1, 2]);
        assert!(!functional_vars_via_columns(&l, 1).unwrap());
        assert!(functional_vars_via_columns(&l, 2).unwrap());
        assert!(matches!(
            functional_vars_via_columns(&l, 3),
            Err(NetworkError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let names = ["a", "b", "c"];
        let e = BoolExpr::and(BoolExpr::or(v(0), v(1)), BoolExpr::not(v(2)));
        assert_eq!(e.display(&names).to_string(), "(a | b) & !c");
        let e = BoolExpr::or(v(0), BoolExpr::or(v(1), v(2)));
        assert_eq!(e.display(&names).to_string(), "a | (b | c)");
        let e = BoolExpr::not(BoolExpr::iff(v(0), BoolExpr::Const(true)));
        assert_eq!(e.display(&names).to_string(), "!(a <-> 1)");
    }

    fn arb_expr(nvars: usize) -> impl Strategy<Value = BoolExpr> {
        let leaf = prop_oneof![
            1 => any::<bool>().prop_map(BoolExpr::Const),
            6 => (0..nvars).prop_map(BoolExpr::Var),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(BoolExpr::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::xor(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| BoolExpr::iff(a, b)),
            ]
        })
    }

    // De Morgan / definitional rewrites that preserve semantics.
    fn rewrite(e: &BoolExpr) -> BoolExpr {
        match e {
            BoolExpr::And(a, b) => BoolExpr::not(BoolExpr::or(
                BoolExpr::not(rewrite(a)),
                BoolExpr::not(rewrite(b)),
            )),
            BoolExpr::Or(a, b) => BoolExpr::not(BoolExpr::and(
                BoolExpr::not(rewrite(a)),
                BoolExpr::not(rewrite(b)),
            )),
            BoolExpr::Xor(a, b) => BoolExpr::not(BoolExpr::iff(rewrite(a), rewrite(b))),
            BoolExpr::Iff(a, b) => BoolExpr::not(BoolExpr::xor(rewrite(a), rewrite(b))),
            BoolExpr::Not(x) => BoolExpr::not(rewrite(x)),
            other => other.clone(),
        }
    }

    proptest! {
        #[test]
        fn table_round_trip(e in arb_expr(8)) {
            let order: Vec<VarId> = (0..8).collect();
            let l = structure_matrix(&e, &order).unwrap();
            for c in 0..256usize {
                let expected = e.eval(&|i| column_value(c, i, 8));
                prop_assert_eq!(l.col(c) == 0, expected);
                let vals: Vec<bool> = (0..8).map(|i| column_value(c, i, 8)).collect();
                prop_assert_eq!(assignment_column(&vals), c);
            }
        }

        #[test]
        fn definition_matches_column_test(e in arb_expr(5)) {
            let order: Vec<VarId> = (0..5).collect();
            let l = structure_matrix(&e, &order).unwrap();
            for pos in 0..5 {
                prop_assert_eq!(
                    functional_vars(&e, pos),
                    functional_vars_via_columns(&l, pos + 1).unwrap()
                );
            }
        }

        #[test]
        fn structure_matrix_invariant_under_de_morgan(e in arb_expr(6)) {
            let order: Vec<VarId> = (0..6).collect();
            prop_assert_eq!(
                structure_matrix(&e, &order).unwrap(),
                structure_matrix(&rewrite(&e), &order).unwrap()
            );
        }
    }

    #[test]
    fn definition_matches_column_test_on_1000_random_expressions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let depth = rng.gen_range(1..=4);
            let e = crate::gen::random_expr(&mut rng, &[0, 1, 2, 3, 4], depth);
            let order: Vec<VarId> = (0..5).collect();
            let l = structure_matrix(&e, &order).unwrap();
            for pos in 0..5 {
                // brute force: flip and compare on every assignment
                let by_flip = (0..32usize).any(|c| {
                    let vals = |flip: bool| {
                        e.eval(&|i| {
                            if i == pos {
                                flip
                            } else {
                                column_value(c, i, 5)
                            }
                        })
                    };
                    vals(true) != vals(false)
                });
                assert_eq!(by_flip, functional_vars_via_columns(&l, pos + 1).unwrap());
                assert_eq!(by_flip, functional_vars(&e, pos));
            }
        }
    }
}
