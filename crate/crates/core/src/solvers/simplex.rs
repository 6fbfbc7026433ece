//! Weight optimisation on a fixed finite support.
//!
//! Pairwise conditional gradient: every step moves mass from the active point
//! with the largest partial derivative to the point with the smallest one,
//! with an exact line search along that vertex direction.

use crate::criteria::ImseCriterion;
use crate::error::{DesignError, Result};
use crate::model::Design;

pub const DEFAULT_GAP_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100_000;
/// Weights below this are set to zero in the returned design.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// A convex criterion of the weights on a fixed support.
pub trait WeightCriterion {
    /// Value and partial derivatives with respect to each weight.
    fn value_and_gradient(&self, support: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl WeightCriterion for ImseCriterion {
    fn value_and_gradient(&self, support: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
        ImseCriterion::value_and_gradient(self, support, weights)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub design: Design,
    pub value: f64,
    /// Final duality gap `g.w - min_j g_j`.
    pub gap: f64,
    pub iterations: usize,
}

/// Minimises a convex criterion over the weight simplex on `support`.
///
/// Starts from uniform weights and stops once the duality gap is at most
/// `tol`. Fails after [`MAX_ITERATIONS`] steps.
pub fn optimize_weights_fixed_support<C: WeightCriterion + ?Sized>(
    criterion: &C,
    support: &[f64],
    tol: f64,
) -> Result<SimplexSolution> {
    if support.is_empty() {
        return Err(DesignError::InvalidDesign("empty support".into()));
    }
    if !(tol > 0.0) {
        return Err(DesignError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let k = support.len();
    let mut w = vec![1.0 / k as f64; k];
    let mut grad = criterion.value_and_gradient(support, &w)?.1;

    for iteration in 0..MAX_ITERATIONS {
        let gw: f64 = grad.iter().zip(&w).map(|(g, x)| g * x).sum();
        let toward = argmin(&grad, |_| true);
        let gap = gw - grad[toward];
        if gap <= tol {
            return finish(criterion, support, w, gap, iteration);
        }
        let away = argmax(&grad, |j| w[j] > 0.0);
        if away == toward {
            return finish(criterion, support, w, gap, iteration);
        }
        let step_max = w[away];
        let slope = |gamma: f64| -> f64 {
            let mut trial = w.clone();
            trial[toward] += gamma;
            trial[away] -= gamma;
            match criterion.value_and_gradient(support, &trial) {
                Ok((_, g)) => g[toward] - g[away],
                Err(_) => f64::INFINITY,
            }
        };
        let gamma = if slope(step_max) <= 0.0 {
            step_max
        } else {
            let (mut lo, mut hi) = (0.0, step_max);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        };
        if gamma <= 0.0 {
            return Err(DesignError::Solver(format!(
                "line search stalled at iteration {iteration} with gap {gap:.3e}"
            )));
        }
        w[toward] += gamma;
        w[away] = if gamma == step_max {
            0.0
        } else {
            w[away] - gamma
        };
        grad = criterion.value_and_gradient(support, &w)?.1;
    }
    Err(DesignError::Solver(format!(
        "no convergence to gap {tol:.1e} within {MAX_ITERATIONS} iterations"
    )))
}

fn finish<C: WeightCriterion + ?Sized>(
    criterion: &C,
    support: &[f64],
    mut w: Vec<f64>,
    gap: f64,
    iterations: usize,
) -> Result<SimplexSolution> {
    w.iter_mut()
        .filter(|x| **x < WEIGHT_FLOOR)
        .for_each(|x| *x = 0.0);
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let (value, _) = criterion.value_and_gradient(support, &w)?;
    Ok(SimplexSolution {
        design: Design::new(support.to_vec(), w)?,
        value,
        gap,
        iterations,
    })
}

fn argmin(values: &[f64], admissible: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for (j, v) in values.iter().enumerate() {
        if admissible(j) && (best == usize::MAX || *v < values[best]) {
            best = j;
        }
    }
    best
}

fn argmax(values: &[f64], admissible: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for (j, v) in values.iter().enumerate() {
        if admissible(j) && (best == usize::MAX || *v > values[best]) {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BasisSpec, PopulationSetup, TaggedCovariance, WeightMeasure};
    use crate::solvers::family::{closed_form_minimax_weight, MinimaxCase};

    fn case_criterion(case: MinimaxCase, n: usize) -> ImseCriterion {
        case.criterion(n).unwrap().criterion().clone()
    }

    #[test]
    fn straight_line_recovers_closed_form() {
        let crit = case_criterion(MinimaxCase::SL, 10);
        let sol = optimize_weights_fixed_support(&crit, &[0.0, 1.0], 1e-12).unwrap();
        let w = closed_form_minimax_weight(MinimaxCase::SL, 10).unwrap();
        assert!((sol.design.weights()[1] - w).abs() < 1e-6);
        assert!((sol.design.weights()[0] - 0.240253).abs() < 1e-6);
    }

    #[test]
    fn quadratic_case_one_three_points() {
        let crit = case_criterion(MinimaxCase::Q1, 4);
        let sol = optimize_weights_fixed_support(&crit, &[-1.0, 0.0, 1.0], 1e-12).unwrap();
        let expected = [0.296561, 0.406878, 0.296561];
        for (a, b) in sol.design.weights().iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn quadratic_case_one_extra_points_get_no_weight() {
        let crit = case_criterion(MinimaxCase::Q1, 4);
        let three = optimize_weights_fixed_support(&crit, &[-1.0, 0.0, 1.0], 1e-12).unwrap();
        let five =
            optimize_weights_fixed_support(&crit, &[-1.0, -0.5, 0.0, 0.5, 1.0], 1e-12).unwrap();
        assert!(five.value <= three.value + 1e-9);
        let extra = five.design.weights()[1] + five.design.weights()[3];
        assert!(extra <= 1e-6, "extra weight {extra}");
    }

    #[test]
    fn default_tolerance_reaches_gap() {
        let b = BasisSpec::quadratic();
        let nu = WeightMeasure::uniform(b.region());
        let cov = TaggedCovariance::from_variances(&[0.5, 1.0, 2.0]).unwrap();
        let crit = ImseCriterion::new(&b, &nu, &cov, PopulationSetup::new(5, 3).unwrap()).unwrap();
        let sol = optimize_weights_fixed_support(&crit, &[-1.0, -0.2, 0.3, 1.0], DEFAULT_GAP_TOL)
            .unwrap();
        assert!(sol.gap <= DEFAULT_GAP_TOL);
        let total: f64 = sol.design.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_few_support_points_is_singular() {
        let crit = case_criterion(MinimaxCase::Q1, 4);
        let err = optimize_weights_fixed_support(&crit, &[-1.0, 1.0], 1e-8).unwrap_err();
        assert!(matches!(err, DesignError::SingularCriterion { .. }));
    }
}
