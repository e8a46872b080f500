//! Semi-tensor product algebra over logical matrices.
//!
//! Every matrix in the pipeline is *logical*: each column is a canonical basis
//! vector. A [`LogicalMatrix`] therefore stores one row index per column and
//! all products reduce to index arithmetic. Indices are zero-based in memory;
//! [`LogicalMatrix::from_delta`] and the `Display` impl use the conventional
//! one-based `δ_m[i_1, …, i_n]` notation.
//!
//! Truth values are encoded as `TRUE ↦ δ_2^1`, `FALSE ↦ δ_2^2` throughout.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default ceiling on the number of rows or columns of any product.
pub const DEFAULT_SIZE_CAP: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StpError {
    #[error("matrix dimension {size} exceeds the size cap of {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("column {col} points at row {index}, but the matrix has {rows} rows")]
    IndexOutOfRange {
        col: usize,
        index: usize,
        rows: usize,
    },
    #[error("matrix dimensions must be positive")]
    EmptyDimension,
    #[error("transpose is only defined here for permutation matrices (got {rows}x{cols})")]
    NotPermutation { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
}

/// A column-stochastic 0/1 matrix stored as the row index of the single one
/// in each column.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalMatrix {
    rows: usize,
    cols: Vec<usize>,
}

impl LogicalMatrix {
    /// Builds a matrix from zero-based column indices.
    pub fn new(rows: usize, cols: Vec<usize>) -> Result<Self, StpError> {
        if rows == 0 || cols.is_empty() {
            return Err(StpError::EmptyDimension);
        }
        if let Some((col, &index)) = cols.iter().enumerate().find(|(_, &i)| i >= rows) {
            return Err(StpError::IndexOutOfRange { col, index, rows });
        }
        Ok(Self { rows, cols })
    }

    /// Builds `δ_rows[i_1, …, i_n]` from one-based indices.
    pub fn from_delta(rows: usize, one_based: &[usize]) -> Result<Self, StpError> {
        if let Some((col, &index)) = one_based.iter().enumerate().find(|(_, &i)| i == 0) {
            return Err(StpError::IndexOutOfRange { col, index, rows });
        }
        Self::new(rows, one_based.iter().map(|i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity of size zero");
        Self {
            rows: n,
            cols: (0..n).collect(),
        }
    }

    /// The `1×n` row of ones, `1ᵀ_n`. Every column is `δ_1^1`.
    pub fn ones_row(n: usize) -> Self {
        assert!(n > 0, "ones row of length zero");
        Self {
            rows: 1,
            cols: vec![0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Zero-based row index of the one in column `j`.
    pub fn col(&self, j: usize) -> usize {
        self.cols[j]
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn to_delta(&self) -> Vec<usize> {
        self.cols.iter().map(|i| i + 1).collect()
    }

    pub fn is_permutation(&self) -> bool {
        if self.rows != self.cols.len() {
            return false;
        }
        let mut seen = vec![false; self.rows];
        for &i in &self.cols {
            if std::mem::replace(&mut seen[i], true) {
                return false;
            }
        }
        true
    }

    /// Applies the matrix to `δ_{ncols}^{j+1}` and returns the zero-based
    /// index of the image.
    pub fn apply(&self, j: usize) -> usize {
        self.cols[j]
    }
}

impl fmt::Debug for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}[", self.rows)?;
        for (k, i) in self.cols.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("]")
    }
}

/// A canonical basis vector `δ_dim^index` (one-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeltaVector {
    dim: usize,
    index: usize,
}

impl DeltaVector {
    pub fn new(dim: usize, index: usize) -> Result<Self, StpError> {
        if dim == 0 {
            return Err(StpError::EmptyDimension);
        }
        if index == 0 || index > dim {
            return Err(StpError::IndexOutOfRange {
                col: 0,
                index,
                rows: dim,
            });
        }
        Ok(Self { dim, index })
    }

    /// `x = δ_2^{2−X}`: TRUE is `δ_2^1`, FALSE is `δ_2^2`.
    pub fn from_bool(value: bool) -> Self {
        Self {
            dim: 2,
            index: if value { 1 } else { 2 },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn as_matrix(&self) -> LogicalMatrix {
        LogicalMatrix {
            rows: self.dim,
            cols: vec![self.index - 1],
        }
    }
}

impl From<DeltaVector> for LogicalMatrix {
    fn from(v: DeltaVector) -> Self {
        v.as_matrix()
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_cap(size: usize, cap: usize) -> Result<(), StpError> {
    if size > cap {
        Err(StpError::SizeCap { size, cap })
    } else {
        Ok(())
    }
}

/// `A ⋉ B = (A ⊗ I_{α/n})(B ⊗ I_{α/p})` with `α = lcm(n, p)`, under the
/// default size cap.
pub fn stp(a: &LogicalMatrix, b: &LogicalMatrix) -> Result<LogicalMatrix, StpError> {
    stp_capped(a, b, DEFAULT_SIZE_CAP)
}

pub fn stp_capped(
    a: &LogicalMatrix,
    b: &LogicalMatrix,
    cap: usize,
) -> Result<LogicalMatrix, StpError> {
    let n = a.ncols();
    let p = b.rows;
    let g = gcd(n, p);
    let ka = p / g;
    let kb = n / g;
    let rows = a.rows.checked_mul(ka).ok_or(StpError::SizeCap {
        size: usize::MAX,
        cap,
    })?;
    let ncols = b.ncols().checked_mul(kb).ok_or(StpError::SizeCap {
        size: usize::MAX,
        cap,
    })?;
    check_cap(rows, cap)?;
    check_cap(ncols, cap)?;

    let cols = (0..ncols)
        .map(|c| {
            // column c of (B ⊗ I_kb) is δ at b[c / kb] * kb + c % kb,
            // which selects column idx of (A ⊗ I_ka).
            let idx = b.cols[c / kb] * kb + c % kb;
            a.cols[idx / ka] * ka + idx % ka
        })
        .collect();
    Ok(LogicalMatrix { rows, cols })
}

/// Left-to-right semi-tensor product of a sequence of factors.
pub fn stp_chain<'a, I>(factors: I) -> Result<LogicalMatrix, StpError>
where
    I: IntoIterator<Item = &'a LogicalMatrix>,
{
    let mut it = factors.into_iter();
    let first = it
        .next()
        .ok_or_else(|| StpError::Mismatch("empty product".into()))?;
    it.try_fold(first.clone(), |acc, m| stp(&acc, m))
}

/// Kronecker product in column-index form.
pub fn kron(a: &LogicalMatrix, b: &LogicalMatrix) -> Result<LogicalMatrix, StpError> {
    let rows = a.rows * b.rows;
    let ncols = a.ncols() * b.ncols();
    check_cap(rows, DEFAULT_SIZE_CAP)?;
    check_cap(ncols, DEFAULT_SIZE_CAP)?;
    let q = b.ncols();
    let cols = (0..ncols)
        .map(|c| a.cols[c / q] * b.rows + b.cols[c % q])
        .collect();
    Ok(LogicalMatrix { rows, cols })
}

/// Inverse of a permutation matrix.
pub fn transpose(a: &LogicalMatrix) -> Result<LogicalMatrix, StpError> {
    if !a.is_permutation() {
        return Err(StpError::NotPermutation {
            rows: a.rows,
            cols: a.ncols(),
        });
    }
    let mut cols = vec![0; a.rows];
    for (j, &i) in a.cols.iter().enumerate() {
        cols[i] = j;
    }
    Ok(LogicalMatrix { rows: a.rows, cols })
}

/// Swap matrix `W_[p,m] = [I_m ⊗ δ_p^1, …, I_m ⊗ δ_p^p]`, so that
/// `u ⋉ v = W_[p,m] ⋉ v ⋉ u` for `u ∈ Δ_m`, `v ∈ Δ_p`.
pub fn swap_matrix(p: usize, m: usize) -> Result<LogicalMatrix, StpError> {
    if p == 0 || m == 0 {
        return Err(StpError::EmptyDimension);
    }
    let size = p.checked_mul(m).ok_or(StpError::SizeCap {
        size: usize::MAX,
        cap: DEFAULT_SIZE_CAP,
    })?;
    check_cap(size, DEFAULT_SIZE_CAP)?;
    let cols = (0..size).map(|c| (c % m) * p + c / m).collect();
    Ok(LogicalMatrix { rows: size, cols })
}

/// Power-reducing matrix `M_{r,n}`: `η ⋉ η = M_{r,n} η` for `η ∈ Δ_n`.
pub fn power_reducing_matrix(n: usize) -> Result<LogicalMatrix, StpError> {
    if n == 0 {
        return Err(StpError::EmptyDimension);
    }
    let rows = n.checked_mul(n).ok_or(StpError::SizeCap {
        size: usize::MAX,
        cap: DEFAULT_SIZE_CAP,
    })?;
    check_cap(rows, DEFAULT_SIZE_CAP)?;
    Ok(LogicalMatrix {
        rows,
        cols: (0..n).map(|i| i * n + i).collect(),
    })
}

/// Dummy matrix `D = δ_2[1,2,1,2]`: `D ⋉ x ⋉ y = y`.
pub fn dummy_matrix() -> LogicalMatrix {
    LogicalMatrix {
        rows: 2,
        cols: vec![0, 1, 0, 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Dense reference implementation, independent of the index arithmetic.
    type Dense = Vec<Vec<u8>>;

    fn to_dense(m: &LogicalMatrix) -> Dense {
        let mut d = vec![vec![0u8; m.ncols()]; m.rows()];
        for (j, &i) in m.col_indices().iter().enumerate() {
            d[i][j] = 1;
        }
        d
    }

    fn dense_identity(n: usize) -> Dense {
        (0..n)
            .map(|i| (0..n).map(|j| u8::from(i == j)).collect())
            .collect()
    }

    fn dense_kron(a: &Dense, b: &Dense) -> Dense {
        let (m, n, p, q) = (a.len(), a[0].len(), b.len(), b[0].len());
        let mut out = vec![vec![0u8; n * q]; m * p];
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    for l in 0..q {
                        out[i * p + k][j * q + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn dense_mul(a: &Dense, b: &Dense) -> Dense {
        let (m, n, q) = (a.len(), a[0].len(), b[0].len());
        assert_eq!(n, b.len());
        let mut out = vec![vec![0u8; q]; m];
        for i in 0..m {
            for k in 0..n {
                if a[i][k] == 0 {
                    continue;
                }
                for j in 0..q {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn dense_stp(a: &Dense, b: &Dense) -> Dense {
        let n = a[0].len();
        let p = b.len();
        let alpha = n / gcd(n, p) * p;
        dense_mul(
            &dense_kron(a, &dense_identity(alpha / n)),
            &dense_kron(b, &dense_identity(alpha / p)),
        )
    }

    fn delta(rows: usize, idx: &[usize]) -> LogicalMatrix {
        LogicalMatrix::from_delta(rows, idx).unwrap()
    }

    fn basis(n: usize) -> impl Iterator<Item = LogicalMatrix> {
        (1..=n).map(move |i| DeltaVector::new(n, i).unwrap().as_matrix())
    }

    #[test]
    fn identity_product_is_identity() {
        let i2 = LogicalMatrix::identity(2);
        assert_eq!(stp(&i2, &i2).unwrap(), i2);
    }

    #[test]
    fn matching_dims_is_ordinary_product() {
        let a = delta(2, &[2, 1, 1, 2]);
        let b = delta(4, &[3, 1, 4, 4]);
        let got = stp(&a, &b).unwrap();
        assert_eq!(to_dense(&got), dense_mul(&to_dense(&a), &to_dense(&b)));
        assert_eq!(got, delta(2, &[1, 2, 2, 2]));
    }

    #[test]
    fn product_of_two_delta_vectors() {
        let x = DeltaVector::new(2, 1).unwrap().as_matrix();
        let y = DeltaVector::new(2, 2).unwrap().as_matrix();
        assert_eq!(stp(&x, &y).unwrap(), delta(4, &[2]));
    }

    #[test]
    fn swap_matrix_values() {
        assert_eq!(swap_matrix(1, 4).unwrap(), LogicalMatrix::identity(4));
        assert_eq!(swap_matrix(2, 2).unwrap(), delta(4, &[1, 3, 2, 4]));
        let w = swap_matrix(2, 2).unwrap();
        for u in basis(2) {
            for v in basis(2) {
                let lhs = stp(&u, &v).unwrap();
                let rhs = stp(&stp(&w, &v).unwrap(), &u).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn swap_matrix_matches_block_definition() {
        // W_[p,m] = [I_m ⊗ δ_p^1, …, I_m ⊗ δ_p^p]
        for p in 1..=4 {
            for m in 1..=4 {
                let mut cols = Vec::new();
                for k in 1..=p {
                    let block = kron(
                        &LogicalMatrix::identity(m),
                        &DeltaVector::new(p, k).unwrap().as_matrix(),
                    )
                    .unwrap();
                    cols.extend_from_slice(block.col_indices());
                }
                assert_eq!(swap_matrix(p, m).unwrap().col_indices(), &cols[..]);
            }
        }
    }

    #[test]
    fn power_reducing_values() {
        assert_eq!(power_reducing_matrix(2).unwrap(), delta(4, &[1, 4]));
        assert_eq!(
            power_reducing_matrix(1).unwrap(),
            LogicalMatrix::identity(1)
        );
        let m4 = power_reducing_matrix(4).unwrap();
        for eta in basis(4) {
            assert_eq!(stp(&eta, &eta).unwrap(), stp(&m4, &eta).unwrap());
        }
    }

    #[test]
    fn power_reducing_identity_up_to_eight() {
        for n in 1..=8 {
            let m = power_reducing_matrix(n).unwrap();
            for eta in basis(n) {
                assert_eq!(stp(&eta, &eta).unwrap(), stp(&m, &eta).unwrap(), "n={n}");
            }
        }
    }

    #[test]
    fn dummy_discards_first_factor() {
        let d = dummy_matrix();
        assert_eq!(d, delta(2, &[1, 2, 1, 2]));
        let t = DeltaVector::from_bool(true).as_matrix();
        let f = DeltaVector::from_bool(false).as_matrix();
        assert_eq!(stp(&d, &stp(&t, &f).unwrap()).unwrap(), f);
        assert_eq!(stp(&d, &stp(&f, &t).unwrap()).unwrap(), t);
    }

    #[test]
    fn kron_transpose_ones() {
        let i2 = LogicalMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), LogicalMatrix::identity(4));
        assert_eq!(
            kron(&i2, &LogicalMatrix::ones_row(2)).unwrap(),
            delta(2, &[1, 1, 2, 2])
        );
        let w = swap_matrix(2, 2).unwrap();
        let wt = transpose(&w).unwrap();
        assert_eq!(wt, w);
        assert_eq!(stp(&w, &wt).unwrap(), LogicalMatrix::identity(4));
    }

    #[test]
    fn transpose_rejects_non_permutation() {
        assert!(matches!(
            transpose(&dummy_matrix()),
            Err(StpError::NotPermutation { .. })
        ));
        assert!(transpose(&delta(2, &[1, 1])).is_err());
    }

    #[test]
    fn size_cap_is_enforced() {
        let big = LogicalMatrix::identity(1 << 10);
        let tall = LogicalMatrix::new(1 << 12, vec![0]).unwrap();
        let err = stp_capped(&big, &tall, 1 << 11).unwrap_err();
        assert!(matches!(err, StpError::SizeCap { .. }));
    }

    #[test]
    fn constructor_validation() {
        assert!(LogicalMatrix::new(2, vec![0, 2]).is_err());
        assert!(LogicalMatrix::from_delta(2, &[0]).is_err());
        assert!(LogicalMatrix::new(0, vec![]).is_err());
        assert!(DeltaVector::new(2, 3).is_err());
        assert_eq!(delta(2, &[1, 2, 2, 2]).to_string(), "d2[1,2,2,2]");
    }

    fn pow2_matrix(max_log: u32) -> impl Strategy<Value = LogicalMatrix> {
        (0..=max_log, 0..=max_log).prop_flat_map(|(r, c)| {
            let rows = 1usize << r;
            prop::collection::vec(0..rows, 1usize << c)
                .prop_map(move |cols| LogicalMatrix::new(rows, cols).unwrap())
        })
    }

    proptest! {
        #[test]
        fn stp_matches_dense_reference(a in pow2_matrix(3), b in pow2_matrix(3)) {
            let got = stp(&a, &b).unwrap();
            prop_assert_eq!(to_dense(&got), dense_stp(&to_dense(&a), &to_dense(&b)));
        }

        #[test]
        fn stp_is_associative(a in pow2_matrix(4), b in pow2_matrix(4), c in pow2_matrix(4)) {
            let left = stp(&stp(&a, &b).unwrap(), &c).unwrap();
            let right = stp(&a, &stp(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn swap_composed_with_transpose_is_identity(p in 1usize..=8, m in 1usize..=8) {
            let w = swap_matrix(p, m).unwrap();
            let wt = transpose(&w).unwrap();
            prop_assert_eq!(stp(&w, &wt).unwrap(), LogicalMatrix::identity(p * m));
        }

        #[test]
        fn kron_matches_dense_reference(a in pow2_matrix(2), b in pow2_matrix(2)) {
            let got = kron(&a, &b).unwrap();
            prop_assert_eq!(to_dense(&got), dense_kron(&to_dense(&a), &to_dense(&b)));
        }
    }

    #[test]
    fn pseudo_commutation_with_matrices() {
        // u ⋉ A = (I_m ⊗ A) ⋉ u, exhaustive over small A.
        for m in 1..=4 {
            for (r, c) in [
                (1usize, 1usize),
                (1, 2),
                (2, 1),
                (2, 2),
                (2, 4),
                (4, 2),
                (4, 4),
            ] {
                let total = r.pow(c as u32);
                for code in 0..total {
                    let cols: Vec<usize> = (0..c).map(|k| (code / r.pow(k as u32)) % r).collect();
                    let a = LogicalMatrix::new(r, cols).unwrap();
                    let lifted = kron(&LogicalMatrix::identity(m), &a).unwrap();
                    for u in basis(m) {
                        assert_eq!(
                            stp(&u, &a).unwrap(),
                            stp(&lifted, &u).unwrap(),
                            "m={m} A={a}"
                        );
                    }
                }
            }
        }
    }
}
