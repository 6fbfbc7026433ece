use rayon::prelude::*;

use crate::error::{DesignError, Result};
use crate::solvers::family::DesignFamilyBound;

/// Smallest admissible grid resolution.
pub const MIN_RESOLUTION: usize = 1_000;

/// Index of the smallest value; ties and non-finite values resolve to the left.
fn leftmost_argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Brute-force minimiser used as an independent check on the solvers.
///
/// Evaluates `resolution` equally spaced interior points of the open interval,
/// then rescans `+-` one spacing around the best point at a ten times finer
/// step. A refined point replaces the coarse one only if strictly better, so
/// a constant criterion returns the leftmost grid point.
pub fn grid_oracle<F>(criterion: F, bounds: DesignFamilyBound, resolution: usize) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if resolution < MIN_RESOLUTION {
        return Err(DesignError::InvalidArgument(format!(
            "grid resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let width = bounds.hi - bounds.lo;
    let h = width / (resolution + 1) as f64;
    let point = |i: usize| bounds.lo + width * (i + 1) as f64 / (resolution + 1) as f64;
    let values: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|i| criterion(point(i)))
        .collect();
    let best = leftmost_argmin(&values).ok_or_else(|| {
        DesignError::Solver("criterion is not finite anywhere on the grid".into())
    })?;
    let (mut w, mut fw) = (point(best), values[best]);

    let fine: Vec<f64> = (-10i32..=10)
        .map(|k| point(best) + k as f64 * h / 10.0)
        .filter(|x| bounds.contains(*x))
        .collect();
    let fine_values: Vec<f64> = fine.iter().map(|&x| criterion(x)).collect();
    if let Some(j) = leftmost_argmin(&fine_values) {
        if fine_values[j] < fw {
            w = fine[j];
            fw = fine_values[j];
        }
    }
    debug_assert!(fw.is_finite());
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::family::MinimaxCase;

    #[test]
    fn straight_line_n4() {
        let crit = MinimaxCase::SL.criterion(4).unwrap();
        let w = grid_oracle(
            |w| crit.value(w),
            MinimaxCase::SL.family().bound(),
            1_000_000,
        )
        .unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_case_four_n2() {
        let crit = MinimaxCase::Q4.criterion(2).unwrap();
        let w = grid_oracle(
            |w| crit.value(w),
            MinimaxCase::Q4.family().bound(),
            1_000_000,
        )
        .unwrap();
        assert!((w - 0.226649).abs() < 1e-6, "{w}");
    }

    #[test]
    fn constant_criterion_picks_leftmost_point() {
        let b = DesignFamilyBound { lo: 0.0, hi: 1.0 };
        let w = grid_oracle(|_| 1.0, b, 1_000).unwrap();
        assert_eq!(w, 1.0 / 1001.0);
    }

    #[test]
    fn resolution_floor() {
        let b = DesignFamilyBound { lo: 0.0, hi: 1.0 };
        assert!(grid_oracle(|w| w, b, 999).is_err());
        assert!(grid_oracle(|_| f64::NAN, b, 1_000).is_err());
    }
}
