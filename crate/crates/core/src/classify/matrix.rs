use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::indices::AdminCategory;

/// Canonical column order of the stress table.
pub const INDICATORS: [&str; 4] = ["SGI", "SREI", "WI", "AII"];

/// Villages × {SGI, SREI, WI, AII}, with each village's administrative
/// label.
#[derive(Debug, Clone, PartialEq)]
pub struct StressMatrix {
    row_ids: Vec<String>,
    data: Vec<[f64; 4]>,
    admin_labels: Vec<AdminCategory>,
}

impl StressMatrix {
    pub fn new(
        row_ids: Vec<String>,
        data: Vec<[f64; 4]>,
        admin_labels: Vec<AdminCategory>,
    ) -> Result<Self> {
        let n = row_ids.len();
        if data.len() != n || admin_labels.len() != n {
            return Err(Error::invalid(format!(
                "stress matrix has {n} ids, {} rows and {} labels",
                data.len(),
                admin_labels.len()
            )));
        }
        if n < 2 {
            return Err(Error::invalid(format!(
                "stress matrix needs at least 2 villages, got {n}"
            )));
        }
        for (id, row) in row_ids.iter().zip(&data) {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "missing or non-finite {} for {id}",
                    INDICATORS[j]
                )));
            }
        }
        Ok(Self {
            row_ids,
            data,
            admin_labels,
        })
    }

    pub fn nrows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn admin_labels(&self) -> &[AdminCategory] {
        &self.admin_labels
    }

    pub fn rows(&self) -> &[[f64; 4]] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64; 4] {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.iter().map(|r| r[j]).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), 4, |i, j| self.data[i][j])
    }

    /// Same villages and labels with replaced values.
    pub fn with_data(&self, data: Vec<[f64; 4]>) -> Result<Self> {
        Self::new(self.row_ids.clone(), data, self.admin_labels.clone())
    }

    pub(crate) fn with_dmatrix(&self, m: &DMatrix<f64>) -> Result<Self> {
        let data = (0..m.nrows())
            .map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]])
            .collect();
        self.with_data(data)
    }
}
