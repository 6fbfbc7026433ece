//! IMSE prediction criterion, its structural limits and the BLUP mean squared error matrix.
//!
//! All criterion values use the standardized scaling
//! `tr(M^-1 V) + (n-1) tr((M + Delta^-1)^-1 V)` with `Delta = m D`; the constant
//! factor `sigma^2 / m` is dropped. It never moves an argmin.

use nalgebra::{DMatrix, DVector};

use crate::error::{DesignError, Result};
use crate::linalg::{principal_block, spd_inverse, spd_inverse_equilibrated, trace_product};
use crate::model::{
    BasisSpec, Design, PopulationSetup, TaggedCovariance, VarianceTag, WeightMeasure,
};

const M_NAME: &str = "information matrix M(xi)";
const PENALISED_NAME: &str = "penalised matrix M_SS + Delta^-1";

/// Which constant factor the reported values carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// `sigma^2 / m` factored out.
    Standardized,
}

/// Criterion value and its split into the population and prediction parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionReport {
    pub value: f64,
    /// `tr(M^-1 V)`.
    pub population_term: f64,
    /// `(n-1)` times the penalised trace.
    pub prediction_term: f64,
    pub scaling: Scaling,
}

impl CriterionReport {
    fn new(population_term: f64, prediction_term: f64) -> Self {
        Self {
            value: population_term + prediction_term,
            population_term,
            prediction_term,
            scaling: Scaling::Standardized,
        }
    }
}

/// `Delta = m D`, entrywise on the tags.
pub fn adjusted_dispersion(cov: &TaggedCovariance, m: usize) -> TaggedCovariance {
    let entries = cov
        .entries()
        .iter()
        .map(|e| match e {
            VarianceTag::Finite(d) => VarianceTag::Finite(m as f64 * d),
            other => *other,
        })
        .collect();
    TaggedCovariance::new(entries).expect("scaling keeps finite entries positive")
}

/// The IMSE criterion for a fixed basis, weighting measure, covariance and population.
///
/// Precomputes `V` and the index set `S` of coefficients that are not tagged
/// `Zero`; evaluation on a design then costs two small Cholesky inversions.
#[derive(Debug, Clone)]
pub struct ImseCriterion {
    basis: BasisSpec,
    v: DMatrix<f64>,
    v_s: DMatrix<f64>,
    /// Coefficients tagged Finite or Infinite.
    random: Vec<usize>,
    /// `1 / (m d_k)` for Finite, 0 for Infinite, aligned with `random`.
    penalty: Vec<f64>,
    n: usize,
}

impl ImseCriterion {
    pub fn new(
        basis: &BasisSpec,
        measure: &WeightMeasure,
        cov: &TaggedCovariance,
        setup: PopulationSetup,
    ) -> Result<Self> {
        cov.check_dimension(basis.p())?;
        let v = measure.v_matrix(basis)?;
        let delta = adjusted_dispersion(cov, setup.m());
        let mut random = Vec::new();
        let mut penalty = Vec::new();
        for (k, tag) in delta.entries().iter().enumerate() {
            match tag {
                VarianceTag::Zero => {}
                VarianceTag::Finite(d) => {
                    random.push(k);
                    penalty.push(d.recip());
                }
                VarianceTag::Infinite => {
                    random.push(k);
                    penalty.push(0.0);
                }
            }
        }
        let v_s = principal_block(&v, &random);
        Ok(Self {
            basis: basis.clone(),
            v,
            v_s,
            random,
            penalty,
            n: setup.n(),
        })
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn penalised(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut a = principal_block(m, &self.random);
        for (i, d) in self.penalty.iter().enumerate() {
            a[(i, i)] += d;
        }
        a
    }

    /// Evaluates on an information matrix directly.
    pub fn report_for_matrix(&self, m: &DMatrix<f64>) -> Result<CriterionReport> {
        let m_inv = spd_inverse(m, M_NAME)?;
        let population = trace_product(&m_inv, &self.v);
        let prediction = if self.n <= 1 || self.random.is_empty() {
            0.0
        } else {
            let a_inv = spd_inverse_equilibrated(&self.penalised(m), PENALISED_NAME)?;
            (self.n - 1) as f64 * trace_product(&a_inv, &self.v_s)
        };
        Ok(CriterionReport::new(population, prediction))
    }

    pub fn report(&self, design: &Design) -> Result<CriterionReport> {
        self.report_for_matrix(&design.information_matrix(&self.basis)?)
    }

    pub fn value(&self, design: &Design) -> Result<f64> {
        self.report(design).map(|r| r.value)
    }

    /// Value and gradient with respect to the weights on a fixed support.
    ///
    /// `d/dw_j tr(A^-1 W) = -f_j^T A^-1 W A^-1 f_j` for `A` affine in the weights.
    pub fn value_and_gradient(&self, support: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = crate::model::design::information_matrix_unchecked(&self.basis, support, weights);
        let m_inv = spd_inverse(&m, M_NAME)?;
        let pop_sandwich = &m_inv * &self.v * &m_inv;
        let mut value = trace_product(&m_inv, &self.v);

        let pred = if self.n > 1 && !self.random.is_empty() {
            let a_inv = spd_inverse_equilibrated(&self.penalised(&m), PENALISED_NAME)?;
            let scale = (self.n - 1) as f64;
            value += scale * trace_product(&a_inv, &self.v_s);
            Some((scale, &a_inv * &self.v_s * &a_inv))
        } else {
            None
        };

        let grad = support
            .iter()
            .map(|&x| {
                let f = self.basis.evaluate_unchecked(x);
                let mut g = -quad_form(&pop_sandwich, &f);
                if let Some((scale, sandwich)) = &pred {
                    let fs = DVector::from_iterator(
                        self.random.len(),
                        self.random.iter().map(|&k| f[k]),
                    );
                    g -= scale * quad_form(sandwich, &fs);
                }
                g
            })
            .collect();
        Ok((value, grad))
    }
}

fn quad_form(a: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (x.transpose() * a * x)[(0, 0)]
}

/// IMSE criterion for known, strictly positive variances.
pub fn imse_pred(
    design: &Design,
    basis: &BasisSpec,
    measure: &WeightMeasure,
    cov: &TaggedCovariance,
    setup: PopulationSetup,
) -> Result<CriterionReport> {
    if !cov.all_finite() {
        return Err(DesignError::InvalidArgument(
            "imse_pred needs finite variances; use imse_limit for zero/inf tags".into(),
        ));
    }
    ImseCriterion::new(basis, measure, cov, setup)?.report(design)
}

/// IMSE criterion with some variances sent to zero or infinity.
///
/// Coefficients tagged `Zero` drop out of the prediction term; `Infinite`
/// ones lose their penalty: the prediction term becomes
/// `(n-1) tr((M_SS + diag(delta))^-1 V_SS)` on the non-zero set `S`.
pub fn imse_limit(
    design: &Design,
    basis: &BasisSpec,
    measure: &WeightMeasure,
    cov: &TaggedCovariance,
    setup: PopulationSetup,
) -> Result<CriterionReport> {
    ImseCriterion::new(basis, measure, cov, setup)?.report(design)
}

/// IMSE of the fixed effects model, `tr(M^-1 V)`.
pub fn fixed_effects_imse(
    design: &Design,
    basis: &BasisSpec,
    measure: &WeightMeasure,
) -> Result<f64> {
    let m = design.information_matrix(basis)?;
    let m_inv = spd_inverse(&m, M_NAME)?;
    Ok(trace_product(&m_inv, &measure.v_matrix(basis)?))
}

/// Mean squared error matrix of all stacked BLUPs, in units of `sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MseMatrix {
    matrix: DMatrix<f64>,
    n: usize,
    p: usize,
}

impl MseMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// The `p x p` block for individuals `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.matrix
            .view((i * self.p, j * self.p), (self.p, self.p))
            .into_owned()
    }
}

/// `(1/n) J (x) (F^T F)^-1 + (I - J/n) (x) (F^T F + D^-1)^-1`.
pub fn mse_matrix(design_matrix: &DMatrix<f64>, d: &[f64], n: usize) -> Result<MseMatrix> {
    let p = design_matrix.ncols();
    if d.len() != p {
        return Err(DesignError::DimensionMismatch {
            expected: p,
            got: d.len(),
        });
    }
    if n == 0 {
        return Err(DesignError::InvalidArgument("need n >= 1".into()));
    }
    if let Some(v) = d.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(DesignError::InvalidArgument(format!(
            "D must be positive definite, got entry {v}"
        )));
    }
    let ftf = design_matrix.transpose() * design_matrix;
    let pop = spd_inverse(&ftf, "F^T F")?;
    let mut shrunk = ftf.clone();
    for (k, v) in d.iter().enumerate() {
        shrunk[(k, k)] += v.recip();
    }
    let ind = spd_inverse_equilibrated(&shrunk, "F^T F + D^-1")?;

    let inv_n = 1.0 / n as f64;
    let off = (&pop - &ind) * inv_n;
    let diag = &ind + &off;
    let mut matrix = DMatrix::zeros(n * p, n * p);
    for i in 0..n {
        for j in 0..n {
            let block = if i == j { &diag } else { &off };
            matrix.view_mut((i * p, j * p), (p, p)).copy_from(block);
        }
    }
    Ok(MseMatrix { matrix, n, p })
}
