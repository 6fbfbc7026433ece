//! Best linear unbiased prediction of the individual coefficient vectors.

use nalgebra::{DMatrix, DVector};

use crate::error::{DesignError, Result};
use crate::linalg::{spd_inverse, spd_inverse_equilibrated};

/// Predictions for all individuals together with the population estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult {
    /// BLUPs `beta_hat_i`, one per individual.
    pub individual: Vec<DVector<f64>>,
    /// Population mean estimate `beta_hat = (F^T F)^-1 F^T Y_bar`.
    pub population: DVector<f64>,
}

impl PredictionResult {
    /// Stacked vector `B_hat = (beta_hat_1^T, ..., beta_hat_n^T)^T`.
    pub fn stacked(&self) -> DVector<f64> {
        let p = self.population.len();
        let mut out = DVector::zeros(p * self.individual.len());
        for (i, b) in self.individual.iter().enumerate() {
            out.rows_mut(i * p, p).copy_from(b);
        }
        out
    }
}

/// Precomputed matrices for repeated prediction with a fixed `F` and `D`.
#[derive(Debug, Clone)]
pub struct BlupPredictor {
    ftf: DMatrix<f64>,
    d_inv: DVector<f64>,
    /// `(F^T F)^-1 F^T`.
    ols: DMatrix<f64>,
    /// `(F^T F + D^-1)^-1`.
    shrink: DMatrix<f64>,
}

impl BlupPredictor {
    pub fn new(design_matrix: &DMatrix<f64>, d: &[f64]) -> Result<Self> {
        let p = design_matrix.ncols();
        if d.len() != p {
            return Err(DesignError::DimensionMismatch {
                expected: p,
                got: d.len(),
            });
        }
        if let Some(v) = d.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(DesignError::InvalidArgument(format!(
                "D must be positive definite, got entry {v}"
            )));
        }
        let ftf = design_matrix.transpose() * design_matrix;
        let ftf_inv = spd_inverse(&ftf, "F^T F")?;
        let d_inv = DVector::from_iterator(p, d.iter().map(|v| v.recip()));
        let mut penalised = ftf.clone();
        for k in 0..p {
            penalised[(k, k)] += d_inv[k];
        }
        let shrink = spd_inverse_equilibrated(&penalised, "F^T F + D^-1")?;
        let ols = &ftf_inv * design_matrix.transpose();
        Ok(Self {
            ftf,
            d_inv,
            ols,
            shrink,
        })
    }

    pub fn p(&self) -> usize {
        self.ftf.nrows()
    }

    /// Number of observations per individual.
    pub fn m(&self) -> usize {
        self.ols.ncols()
    }

    /// Individual least squares estimate `(F^T F)^-1 F^T Y_i`.
    pub fn individual_estimate(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.ols * y
    }

    /// Combines an individual estimate with the population estimate.
    pub fn combine(&self, individual: &DVector<f64>, population: &DVector<f64>) -> DVector<f64> {
        let rhs = &self.ftf * individual + self.d_inv.component_mul(population);
        &self.shrink * rhs
    }

    pub fn predict(&self, observations: &[DVector<f64>]) -> Result<PredictionResult> {
        if observations.is_empty() {
            return Err(DesignError::InvalidArgument("no individuals".into()));
        }
        let m = self.m();
        if let Some(y) = observations.iter().find(|y| y.len() != m) {
            return Err(DesignError::DimensionMismatch {
                expected: m,
                got: y.len(),
            });
        }
        let individual_estimates: Vec<DVector<f64>> = observations
            .iter()
            .map(|y| self.individual_estimate(y))
            .collect();
        let mut y_bar = DVector::zeros(m);
        for y in observations {
            y_bar += y;
        }
        y_bar /= observations.len() as f64;
        let population = self.individual_estimate(&y_bar);
        let individual = individual_estimates
            .iter()
            .map(|b| self.combine(b, &population))
            .collect();
        Ok(PredictionResult {
            individual,
            population,
        })
    }
}

/// BLUPs `(F^T F + D^-1)^-1 (F^T F beta_hat_i;ind + D^-1 beta_hat)` for all individuals.
pub fn blup(
    design_matrix: &DMatrix<f64>,
    d: &[f64],
    observations: &[DVector<f64>],
) -> Result<PredictionResult> {
    BlupPredictor::new(design_matrix, d)?.predict(observations)
}
