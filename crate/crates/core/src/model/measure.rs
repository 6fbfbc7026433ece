use nalgebra::DMatrix;

use crate::error::{DesignError, Result};
use crate::model::basis::{BasisFamily, BasisSpec, Region};
use crate::model::design::information_matrix_unchecked;

const MASS_TOL: f64 = 1e-12;

/// Weighting measure `nu` of total mass one used inside the IMSE integral.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightMeasure {
    /// Uniform distribution on an interval.
    Uniform(Region),
    /// Finitely many points with nonnegative masses.
    Discrete { points: Vec<f64>, masses: Vec<f64> },
}

impl WeightMeasure {
    pub fn uniform(region: Region) -> Self {
        WeightMeasure::Uniform(region)
    }

    pub fn discrete(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(DesignError::InvalidMeasure(format!(
                "{} points but {} masses",
                points.len(),
                masses.len()
            )));
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(DesignError::InvalidMeasure(
                "masses must be nonnegative".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DesignError::InvalidMeasure(format!(
                "total mass {total} differs from 1"
            )));
        }
        Ok(WeightMeasure::Discrete { points, masses })
    }

    /// The matrix `V = int f f^T d nu`.
    ///
    /// Uniform measures use exact monomial moments
    /// `E[x^k] = (b^(k+1) - a^(k+1)) / ((k+1)(b-a))`.
    pub fn v_matrix(&self, basis: &BasisSpec) -> Result<DMatrix<f64>> {
        match self {
            WeightMeasure::Uniform(interval) => {
                let region = basis.region();
                if !(region.contains(interval.lo()) && region.contains(interval.hi())) {
                    return Err(DesignError::InvalidMeasure(format!(
                        "uniform interval [{}, {}] leaves the region [{}, {}]",
                        interval.lo(),
                        interval.hi(),
                        region.lo(),
                        region.hi()
                    )));
                }
                let BasisFamily::Monomial = basis.family();
                let p = basis.p();
                let moments: Vec<f64> = (0..2 * p - 1)
                    .map(|k| uniform_moment(interval.lo(), interval.hi(), k))
                    .collect();
                Ok(DMatrix::from_fn(p, p, |i, j| moments[i + j]))
            }
            WeightMeasure::Discrete { points, masses } => {
                for &x in points {
                    basis.region().check(x)?;
                }
                Ok(information_matrix_unchecked(basis, points, masses))
            }
        }
    }
}

/// `k`-th raw moment of the uniform distribution on `[a, b]`.
pub fn uniform_moment(a: f64, b: f64, k: usize) -> f64 {
    let e = k as i32 + 1;
    (b.powi(e) - a.powi(e)) / (e as f64 * (b - a))
}
