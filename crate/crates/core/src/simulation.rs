//! Monte Carlo check of the BLUP mean squared error matrix.
//!
//! Individual coefficients and errors are drawn Gaussian. Every
//! (replicate, individual) pair owns its own ChaCha stream, so a replicate is a
//! pure function of the seed and its index and the results do not depend on
//! the thread schedule.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::blup::BlupPredictor;
use crate::criteria::{mse_matrix, MseMatrix};
use crate::error::{DesignError, Result};
use crate::linalg::spd_inverse;

/// Minimum number of replicates for an MSE estimate.
pub const MIN_REPLICATES: usize = 1_000;

/// Leaf size of the pairwise accumulation tree.
const LEAF: usize = 64;

/// Everything needed to simulate the random coefficient model.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    design_matrix: DMatrix<f64>,
    d: Vec<f64>,
    beta: DVector<f64>,
    sigma2: f64,
    n: usize,
    replicates: usize,
    seed: u64,
}

impl SimulationPlan {
    pub fn new(
        design_matrix: DMatrix<f64>,
        d: Vec<f64>,
        beta: DVector<f64>,
        sigma2: f64,
        n: usize,
        replicates: usize,
        seed: u64,
    ) -> Result<Self> {
        let p = design_matrix.ncols();
        if d.len() != p || beta.len() != p {
            return Err(DesignError::DimensionMismatch {
                expected: p,
                got: if d.len() != p { d.len() } else { beta.len() },
            });
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(DesignError::InvalidArgument(format!(
                "sigma^2 must be positive, got {sigma2}"
            )));
        }
        if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(DesignError::InvalidArgument(
                "D must be positive definite".into(),
            ));
        }
        if n == 0 || replicates == 0 {
            return Err(DesignError::InvalidArgument(
                "need n >= 1 and at least one replicate".into(),
            ));
        }
        if n > u32::MAX as usize || replicates > u32::MAX as usize {
            return Err(DesignError::InvalidArgument(
                "n and replicates must fit in 32 bits".into(),
            ));
        }
        spd_inverse(&(design_matrix.transpose() * &design_matrix), "F^T F")?;
        Ok(Self {
            design_matrix,
            d,
            beta,
            sigma2,
            n,
            replicates,
            seed,
        })
    }

    pub fn design_matrix(&self) -> &DMatrix<f64> {
        &self.design_matrix
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.design_matrix.ncols()
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_replicates(mut self, replicates: usize) -> Result<Self> {
        if replicates == 0 || replicates > u32::MAX as usize {
            return Err(DesignError::InvalidArgument(
                "invalid replicate count".into(),
            ));
        }
        self.replicates = replicates;
        Ok(self)
    }

    fn stream(&self, replicate: usize, individual: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((replicate as u64) << 32) | individual as u64);
        rng
    }

    /// Draws replicate `index`: coefficients `beta_i ~ N(beta, sigma^2 D)` and
    /// observations `Y_i = F beta_i + eps_i` with `eps_i ~ N(0, sigma^2 I)`.
    pub fn replicate(&self, index: usize) -> Replicate {
        let sigma = self.sigma2.sqrt();
        let mut coefficients = Vec::with_capacity(self.n);
        let mut observations = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut rng = self.stream(index, i);
            let b = DVector::from_iterator(
                self.p(),
                self.beta.iter().zip(&self.d).map(|(mean, d)| {
                    let z: f64 = rng.sample(StandardNormal);
                    mean + sigma * d.sqrt() * z
                }),
            );
            let mut y = &self.design_matrix * &b;
            for v in y.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
            coefficients.push(b);
            observations.push(y);
        }
        Replicate {
            index,
            coefficients,
            observations,
        }
    }

    /// Theoretical MSE matrix for this plan, in units of `sigma^2`.
    pub fn theoretical_mse(&self) -> Result<MseMatrix> {
        mse_matrix(&self.design_matrix, &self.d, self.n)
    }
}

/// One simulated data set.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub index: usize,
    /// True individual coefficients `beta_i`.
    pub coefficients: Vec<DVector<f64>>,
    /// Observation vectors `Y_i`.
    pub observations: Vec<DVector<f64>>,
}

impl Replicate {
    pub fn stacked_coefficients(&self) -> DVector<f64> {
        let p = self.coefficients[0].len();
        let mut out = DVector::zeros(p * self.coefficients.len());
        for (i, b) in self.coefficients.iter().enumerate() {
            out.rows_mut(i * p, p).copy_from(b);
        }
        out
    }
}

/// Iterator over all replicates of a plan.
#[derive(Debug, Clone)]
pub struct Replicates<'a> {
    plan: &'a SimulationPlan,
    next: usize,
}

impl Iterator for Replicates<'_> {
    type Item = Replicate;

    fn next(&mut self) -> Option<Replicate> {
        if self.next >= self.plan.replicates {
            return None;
        }
        let r = self.plan.replicate(self.next);
        self.next += 1;
        Some(r)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.plan.replicates - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Replicates<'_> {}

/// Stream of replicates in index order.
pub fn simulate(plan: &SimulationPlan) -> Replicates<'_> {
    Replicates { plan, next: 0 }
}

/// Entrywise Monte Carlo estimate of the MSE matrix with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMse {
    /// Mean of `(B_hat - B)(B_hat - B)^T / sigma^2`.
    pub matrix: DMatrix<f64>,
    /// Standard error of every entry of `matrix`.
    pub std_error: DMatrix<f64>,
    pub replicates: usize,
}

#[derive(Clone)]
struct Moments {
    sum: DVector<f64>,
    sum_sq: DVector<f64>,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Self {
            sum: DVector::zeros(len),
            sum_sq: DVector::zeros(len),
        }
    }

    fn merge(mut self, other: Moments) -> Self {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }
}

fn accumulate(
    plan: &SimulationPlan,
    predictor: &BlupPredictor,
    lo: usize,
    hi: usize,
) -> Result<Moments> {
    let dim = plan.n * plan.p();
    if hi - lo <= LEAF {
        let mut acc = Moments::zeros(dim * dim);
        for r in lo..hi {
            let rep = plan.replicate(r);
            let pred = predictor.predict(&rep.observations)?;
            let err = (pred.stacked() - rep.stacked_coefficients()) / plan.sigma2.sqrt();
            for j in 0..dim {
                for i in 0..dim {
                    let v = err[i] * err[j];
                    acc.sum[j * dim + i] += v;
                    acc.sum_sq[j * dim + i] += v * v;
                }
            }
        }
        return Ok(acc);
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = rayon::join(
        || accumulate(plan, predictor, lo, mid),
        || accumulate(plan, predictor, mid, hi),
    );
    Ok(a?.merge(b?))
}

/// Averages `(B_hat - B)(B_hat - B)^T` over all replicates, in units of `sigma^2`.
///
/// Replicates are split into a fixed binary tree of index ranges which is
/// summed pairwise, possibly in parallel; the result is bit-identical for any
/// number of threads.
pub fn empirical_mse(plan: &SimulationPlan) -> Result<EmpiricalMse> {
    if plan.replicates < MIN_REPLICATES {
        return Err(DesignError::InvalidArgument(format!(
            "need at least {MIN_REPLICATES} replicates, got {}",
            plan.replicates
        )));
    }
    let predictor = BlupPredictor::new(&plan.design_matrix, &plan.d)?;
    let moments = accumulate(plan, &predictor, 0, plan.replicates)?;
    let dim = plan.n * plan.p();
    let r = plan.replicates as f64;
    let mean = moments.sum / r;
    let var = (moments.sum_sq / r - mean.component_mul(&mean)) * (r / (r - 1.0));
    let se = var.map(|v| (v.max(0.0) / r).sqrt());
    Ok(EmpiricalMse {
        matrix: DMatrix::from_column_slice(dim, dim, mean.as_slice()),
        std_error: DMatrix::from_column_slice(dim, dim, se.as_slice()),
        replicates: plan.replicates,
    })
}

/// Entrywise comparison of a Monte Carlo estimate with the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseComparison {
    /// Largest `|empirical - theoretical|` over all entries.
    pub max_abs_deviation: f64,
    /// Standard error of the entry attaining `max_abs_deviation`.
    pub std_error_at_max: f64,
    /// Largest deviation measured in standard errors.
    pub max_z: f64,
    pub pass: bool,
}

/// Passes iff every entry deviates by at most `k` standard errors.
pub fn compare_mse(
    empirical: &EmpiricalMse,
    theoretical: &MseMatrix,
    k: f64,
) -> Result<MseComparison> {
    let t = theoretical.matrix();
    if t.shape() != empirical.matrix.shape() {
        return Err(DesignError::DimensionMismatch {
            expected: t.nrows(),
            got: empirical.matrix.nrows(),
        });
    }
    let mut out = MseComparison {
        max_abs_deviation: 0.0,
        std_error_at_max: 0.0,
        max_z: 0.0,
        pass: true,
    };
    for ((e, th), se) in empirical
        .matrix
        .iter()
        .zip(t.iter())
        .zip(empirical.std_error.iter())
    {
        let dev = (e - th).abs();
        if dev > out.max_abs_deviation {
            out.max_abs_deviation = dev;
            out.std_error_at_max = *se;
        }
        let z = if *se > 0.0 {
            dev / se
        } else if dev <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        out.max_z = out.max_z.max(z);
    }
    out.pass = out.max_z <= k;
    Ok(out)
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| DesignError::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
