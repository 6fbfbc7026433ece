use crate::error::{DesignError, Result};
use crate::solvers::family::DesignFamilyBound;

/// Default final bracket width.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Distance kept from the open ends of the admissible interval.
pub const EDGE: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
/// Points sampled by the unimodality post-check.
const CHECK_POINTS: usize = 64;

/// Golden-section minimisation of a unimodal function over an open interval.
///
/// Searches `[lo + EDGE, hi - EDGE]` down to width `tol` and returns the
/// midpoint of the final bracket. The result is then checked: its neighbours
/// at `+-10 tol` and an even sample of the bracket may not undercut it by
/// more than rounding.
pub fn minimize_weight_1d<F>(criterion: F, bounds: DesignFamilyBound, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(DesignError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (lo, hi) = (bounds.lo + EDGE, bounds.hi - EDGE);
    if !(lo < hi) {
        return Err(DesignError::InvalidArgument("empty search interval".into()));
    }
    let eval = |w: f64| {
        let v = criterion(w);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DesignError::Solver(format!(
                "criterion is not finite at w = {w}"
            )))
        }
    };

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    let w = 0.5 * (a + b);
    let fw = eval(w)?;

    let slack = 64.0 * f64::EPSILON * fw.abs().max(1.0);
    let undercut = |v: f64| v < fw - slack;
    for probe in [w - 10.0 * tol, w + 10.0 * tol] {
        if probe > lo && probe < hi && undercut(eval(probe)?) {
            return Err(DesignError::Solver(format!(
                "post-check failed: criterion at {probe} is below the value at {w}"
            )));
        }
    }
    for i in 0..=CHECK_POINTS {
        let probe = lo + (hi - lo) * i as f64 / CHECK_POINTS as f64;
        if undercut(eval(probe)?) {
            return Err(DesignError::Solver(format!(
                "criterion is not unimodal: value at {probe} undercuts the minimum found at {w}"
            )));
        }
    }
    Ok(w)
}

/// Locates a sign change of `derivative` in `[w - radius, w + radius]` by bisection.
///
/// Returns `w` unchanged when the bracket does not show a sign change from
/// negative to positive or the derivative is not finite at its ends.
pub fn refine_stationary_point<D>(
    derivative: D,
    w: f64,
    radius: f64,
    bounds: DesignFamilyBound,
) -> f64
where
    D: Fn(f64) -> f64,
{
    let mut a = (w - radius).max(bounds.lo + EDGE);
    let mut b = (w + radius).min(bounds.hi - EDGE);
    let (da, db) = (derivative(a), derivative(b));
    if !(da < 0.0 && db > 0.0) {
        return w;
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let dm = derivative(mid);
        if dm.is_nan() {
            return w;
        }
        if dm < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::family::MinimaxCase;

    const UNIT: DesignFamilyBound = DesignFamilyBound { lo: 0.0, hi: 1.0 };

    #[test]
    fn fixed_effects_line_is_symmetric() {
        let w = minimize_weight_1d(|w| 1.0 / (3.0 * w * (1.0 - w)), UNIT, DEFAULT_TOL).unwrap();
        assert!((w - 0.5).abs() < 1e-8);
    }

    #[test]
    fn straight_line_minimax_n4() {
        let crit = MinimaxCase::SL.criterion(4).unwrap();
        let w = minimize_weight_1d(|w| crit.value(w), UNIT, DEFAULT_TOL).unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-8, "{w}");
    }

    #[test]
    fn quadratic_case_two_n10() {
        let crit = MinimaxCase::Q2.criterion(10).unwrap();
        let bound = DesignFamilyBound { lo: 0.0, hi: 0.5 };
        let w = minimize_weight_1d(|w| crit.value(w), bound, DEFAULT_TOL).unwrap();
        let expected = (53.0 - 2.0 * 106f64.sqrt()) / 90.0;
        assert!((w - expected).abs() < 1e-8, "{w} vs {expected}");
        assert!((w - 0.360097).abs() < 5e-7);
    }

    #[test]
    fn non_finite_values_are_errors() {
        let err = minimize_weight_1d(|w| if w > 0.7 { f64::NAN } else { w }, UNIT, DEFAULT_TOL);
        assert!(matches!(err, Err(DesignError::Solver(_))));
    }

    #[test]
    fn bimodal_function_fails_post_check() {
        // narrow global dip at 0.8 that the bracket discards early on
        let f = |w: f64| (w - 0.2).powi(2) - (-((w - 0.8) / 0.02).powi(2)).exp();
        let err = minimize_weight_1d(f, UNIT, DEFAULT_TOL);
        assert!(err.is_err(), "{err:?}");
    }

    #[test]
    fn derivative_polish_reaches_rounding_level() {
        for case in MinimaxCase::ALL {
            for n in [2, 10, 500] {
                let w = case.criterion(n).unwrap().optimal_weight().unwrap();
                let exact = crate::solvers::closed_form_minimax_weight(case, n).unwrap();
                assert!((w - exact).abs() < 1e-12, "{case} n={n}: {w} vs {exact}");
            }
        }
    }

    #[test]
    fn polish_keeps_point_without_sign_change() {
        assert_eq!(refine_stationary_point(|_| 1.0, 0.3, 1e-6, UNIT), 0.3);
        assert_eq!(refine_stationary_point(|_| f64::NAN, 0.3, 1e-6, UNIT), 0.3);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(minimize_weight_1d(|w| w, UNIT, 0.0).is_err());
    }
}
