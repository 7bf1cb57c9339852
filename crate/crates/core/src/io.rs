//! JSON wire schema for matrices.
//!
//! The same schema serves matrix files on disk and the matrices embedded in
//! campaign reports. The `convention` field pins the orientation so a file
//! cannot silently be read with transposed semantics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// The only supported orientation: entry (i, j) is P(signal i | state j).
pub const COLUMN_STOCHASTIC_CONVENTION: &str = "column-stochastic";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
    pub convention: String,
}

impl MatrixJson {
    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            data: m.entries().to_vec(),
            convention: COLUMN_STOCHASTIC_CONVENTION.to_string(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.convention != COLUMN_STOCHASTIC_CONVENTION {
            return Err(Error::Convention {
                expected: COLUMN_STOCHASTIC_CONVENTION.to_string(),
                found: self.convention.clone(),
            });
        }
        Matrix::new(self.n_rows, self.n_cols, self.data.clone())
    }
}
