//! Dense row-major matrix kernel.
//!
//! Small-scale (at most [`MAX_DIM`] on a side) real matrices with the
//! operations the rest of the crate is built on: products, Kronecker
//! products, the four matrix norms, Gaussian inverse, rank, and the
//! characteristic polynomial. Values are immutable once constructed and
//! every constructor rejects non-finite entries.

use crate::error::{Error, Result};

/// Hard cap on each matrix dimension. Everything here is desk scale; the
/// cap keeps the O(n^3) routines trivially fast.
pub const MAX_DIM: usize = 64;

/// Leverrier-Faddeev loses accuracy quickly with size; refuse beyond this.
pub const CHARPOLY_MAX_DIM: usize = 8;

const TWO_NORM_REL_TOL: f64 = 1e-12;
const TWO_NORM_MAX_ITERS: usize = 10_000;

/// Default pivot tolerance for [`Matrix::inverse`].
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// Default threshold below which a row-reduced row counts as zero in
/// [`Matrix::rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Selector among the four supported matrix norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// Maximum absolute column sum (operator norm induced by the vector 1-norm).
    One,
    /// Largest singular value (operator norm induced by the vector 2-norm).
    Two,
    /// Maximum absolute row sum (operator norm induced by the vector sup-norm).
    Infinity,
    /// Square root of the sum of squared entries.
    Frobenius,
}

impl NormKind {
    pub const ALL: [NormKind; 4] = [
        NormKind::One,
        NormKind::Two,
        NormKind::Infinity,
        NormKind::Frobenius,
    ];
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            NormKind::One => "one",
            NormKind::Two => "two",
            NormKind::Infinity => "infinity",
            NormKind::Frobenius => "frobenius",
        };
        f.write_str(name)
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn new(n_rows: usize, n_cols: usize, entries: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 || n_rows > MAX_DIM || n_cols > MAX_DIM {
            return Err(Error::DimensionsOutOfRange {
                rows: n_rows,
                cols: n_cols,
            });
        }
        if entries.len() != n_rows * n_cols {
            return Err(Error::EntryCount {
                rows: n_rows,
                cols: n_cols,
                expected: n_rows * n_cols,
                got: entries.len(),
            });
        }
        for (idx, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / n_cols,
                    col: idx % n_cols,
                });
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    /// Builds a matrix from explicit rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::EntryCount {
                    rows: n_rows,
                    cols: n_cols,
                    expected: n_cols,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n_rows, n_cols, entries)
    }

    /// The n-by-n identity. Panics if `n` is outside the supported range;
    /// callers pass dimensions taken from already-validated matrices.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_DIM, "identity dimension out of range");
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            n_rows: n,
            n_cols: n,
            entries,
        }
    }

    /// All-zero matrix.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::new(n_rows, n_cols, vec![0.0; n_rows.saturating_mul(n_cols)])
    }

    /// Matrix with every entry equal to `value`.
    pub fn constant(n_rows: usize, n_cols: usize, value: f64) -> Result<Self> {
        Self::new(n_rows, n_cols, vec![value; n_rows.saturating_mul(n_cols)])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.n_rows && col < self.n_cols);
        self.entries[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        assert!(row < self.n_rows);
        &self.entries[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n_cols)
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                entries[j * self.n_rows + i] = self.entries[i * self.n_cols + j];
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            entries,
        }
    }

    fn conformable_product(&self, rhs: &Self) -> Result<()> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::DimensionMismatch {
                left_rows: self.n_rows,
                left_cols: self.n_cols,
                right_rows: rhs.n_rows,
                right_cols: rhs.n_cols,
            });
        }
        Ok(())
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if self.n_rows != rhs.n_rows || self.n_cols != rhs.n_cols {
            return Err(Error::DimensionMismatch {
                left_rows: self.n_rows,
                left_cols: self.n_cols,
                right_rows: rhs.n_rows,
                right_cols: rhs.n_cols,
            });
        }
        Ok(())
    }

    /// Standard matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.conformable_product(rhs)?;
        let mut entries = vec![0.0; self.n_rows * rhs.n_cols];
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.entries[i * self.n_cols + k];
                if a == 0.0 {
                    continue;
                }
                let lhs_row = &mut entries[i * rhs.n_cols..(i + 1) * rhs.n_cols];
                let rhs_row = &rhs.entries[k * rhs.n_cols..(k + 1) * rhs.n_cols];
                for (out, &b) in lhs_row.iter_mut().zip(rhs_row) {
                    *out += a * b;
                }
            }
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: rhs.n_cols,
            entries,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// Kronecker product: block (i, j) equals `self[i][j] * rhs`. Errors if
    /// the result would exceed the [`MAX_DIM`] cap.
    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        let n_rows = self.n_rows * rhs.n_rows;
        let n_cols = self.n_cols * rhs.n_cols;
        if n_rows > MAX_DIM || n_cols > MAX_DIM {
            return Err(Error::DimensionsOutOfRange {
                rows: n_rows,
                cols: n_cols,
            });
        }
        let mut entries = vec![0.0; n_rows * n_cols];
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                let a = self.entries[i * self.n_cols + j];
                for p in 0..rhs.n_rows {
                    for q in 0..rhs.n_cols {
                        entries[(i * rhs.n_rows + p) * n_cols + (j * rhs.n_cols + q)] =
                            a * rhs.entries[p * rhs.n_cols + q];
                    }
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.entries[i * self.n_cols + i])
            .sum()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }

    fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n_cols];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn fro_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest singular value via power iteration on `self^T self`.
    fn two_norm(&self) -> Result<f64> {
        let gram = self.transpose().matmul(self)?;
        let n = gram.n_rows;
        // Graded start vector; symmetric cancellations (common for
        // zero-column-sum differences) leave it with a dominant component.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) / (n as f64 + 1.0)).collect();
        normalize(&mut v);
        let mut estimate = f64::NAN;
        let mut restart = 0usize;
        for _ in 0..TWO_NORM_MAX_ITERS {
            let mut y = gram.apply_vec(&v);
            let mut len = l2(&y);
            if len == 0.0 {
                // Start vector sits in the null space; sweep basis vectors.
                // If every image vanishes the Gram matrix is zero.
                let mut found = false;
                while restart < n {
                    let mut e = vec![0.0; n];
                    e[restart] = 1.0;
                    restart += 1;
                    let img = gram.apply_vec(&e);
                    let il = l2(&img);
                    if il > 0.0 {
                        y = img;
                        len = il;
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(0.0);
                }
            }
            if (len - estimate).abs() <= TWO_NORM_REL_TOL * len {
                return Ok(len.sqrt());
            }
            estimate = len;
            for (vi, yi) in v.iter_mut().zip(&y) {
                *vi = yi / len;
            }
        }
        Err(Error::PowerIterationDiverged {
            iters: TWO_NORM_MAX_ITERS,
        })
    }

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// One of the four supported norms. Only [`NormKind::Two`] can fail
    /// (power-iteration non-convergence); it never returns a silently wrong
    /// value.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::One => Ok(self.one_norm()),
            NormKind::Two => self.two_norm(),
            NormKind::Infinity => Ok(self.inf_norm()),
            NormKind::Frobenius => Ok(self.fro_norm()),
        }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting. A pivot of
    /// magnitude below `tol` reports the offending elimination step.
    pub fn inverse(&self, tol: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.n_rows,
                cols: self.n_cols,
            });
        }
        let n = self.n_rows;
        let mut a: Vec<Vec<f64>> = self.rows().map(|r| r.to_vec()).collect();
        let mut inv: Vec<Vec<f64>> = Matrix::identity(n).rows().map(|r| r.to_vec()).collect();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            if a[pivot_row][col].abs() < tol {
                return Err(Error::Singular { pivot: col, tol });
            }
            a.swap(col, pivot_row);
            inv.swap(col, pivot_row);
            let pivot = a[col][col];
            for v in a[col].iter_mut() {
                *v /= pivot;
            }
            for v in inv[col].iter_mut() {
                *v /= pivot;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[row][col];
                if factor == 0.0 {
                    continue;
                }
                for k in 0..n {
                    a[row][k] -= factor * a[col][k];
                    inv[row][k] -= factor * inv[col][k];
                }
            }
        }
        Matrix::from_rows(&inv)
    }

    /// Number of nonzero rows after row reduction; "nonzero" means the row's
    /// largest absolute entry exceeds `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a: Vec<Vec<f64>> = self.rows().map(|r| r.to_vec()).collect();
        let mut next_row = 0usize;
        for col in 0..self.n_cols {
            if next_row == self.n_rows {
                break;
            }
            let pivot_row = (next_row..self.n_rows)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            if a[pivot_row][col].abs() <= tol {
                continue;
            }
            a.swap(next_row, pivot_row);
            for row in next_row + 1..self.n_rows {
                let factor = a[row][col] / a[next_row][col];
                if factor == 0.0 {
                    continue;
                }
                for k in col..self.n_cols {
                    a[row][k] -= factor * a[next_row][k];
                }
                a[row][col] = 0.0;
            }
            next_row += 1;
        }
        a.iter()
            .filter(|row| row.iter().any(|v| v.abs() > tol))
            .count()
    }

    /// Monic characteristic polynomial coefficients, highest degree first,
    /// by the Leverrier-Faddeev recursion.
    pub fn charpoly_coeffs(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.n_rows,
                cols: self.n_cols,
            });
        }
        let n = self.n_rows;
        if n > CHARPOLY_MAX_DIM {
            return Err(Error::CharpolyTooLarge { n });
        }
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(1.0);
        let mut m = self.clone();
        let mut c = -m.trace();
        coeffs.push(c);
        for k in 2..=n {
            let shifted = m.add(&Matrix::identity(n).scale(c))?;
            m = self.matmul(&shifted)?;
            c = -m.trace() / k as f64;
            coeffs.push(c);
        }
        Ok(coeffs)
    }

    /// Maximum over column pairs of the sup-distance between the columns;
    /// zero exactly when all columns are equal.
    pub fn column_spread(&self) -> f64 {
        let mut spread: f64 = 0.0;
        for j in 0..self.n_cols {
            for k in j + 1..self.n_cols {
                for i in 0..self.n_rows {
                    let d = (self.entries[i * self.n_cols + j]
                        - self.entries[i * self.n_cols + k])
                        .abs();
                    spread = spread.max(d);
                }
            }
        }
        spread
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let len = l2(v);
    if len > 0.0 {
        for x in v.iter_mut() {
            *x /= len;
        }
    }
}
