use crate::error::Result;
use crate::model::{Design, PopulationSetup, TaggedCovariance};
use crate::solvers::family::{DesignFamily, FamilyCriterion};

/// Family weight minimising the IMSE criterion at known variances.
///
/// `Zero` tags are accepted alongside finite variances and evaluated as the
/// structural limit.
pub fn locally_optimal_weight(
    family: DesignFamily,
    cov: &TaggedCovariance,
    setup: PopulationSetup,
) -> Result<f64> {
    FamilyCriterion::new(family, cov, setup)?.optimal_weight()
}

/// Efficiency `IMSE(locally optimal) / IMSE(candidate)`; 1 means the candidate is locally optimal.
///
/// The locally optimal value is the family minimum; when the candidate itself
/// belongs to the family its value also bounds that minimum, so the ratio never
/// exceeds one for family candidates.
pub fn efficiency(
    candidate: &Design,
    family: DesignFamily,
    cov: &TaggedCovariance,
    setup: PopulationSetup,
) -> Result<f64> {
    let crit = FamilyCriterion::new(family, cov, setup)?;
    let w_local = crit.optimal_weight()?;
    let candidate_value = crit.criterion().value(candidate)?;
    let mut local_value = crit.report(w_local)?.value;
    if family.weight_of(candidate).is_some() {
        local_value = local_value.min(candidate_value);
    }
    Ok(local_value / candidate_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarianceTag;
    use crate::solvers::family::{closed_form_minimax_weight, MinimaxCase};

    fn setup(n: usize, m: usize) -> PopulationSetup {
        PopulationSetup::new(n, m).unwrap()
    }

    #[test]
    fn straight_line_large_slope_variance_tends_to_minimax() {
        let cov = TaggedCovariance::from_variances(&[1e-12, 1e12]).unwrap();
        let w = locally_optimal_weight(DesignFamily::StraightLine, &cov, setup(10, 1)).unwrap();
        assert!((w - 0.759747).abs() < 1e-5, "{w}");
    }

    #[test]
    fn straight_line_small_variances_tend_to_fixed_effects() {
        let cov = TaggedCovariance::from_variances(&[1e-12, 1e-12]).unwrap();
        for n in [2, 10, 100] {
            let w = locally_optimal_weight(DesignFamily::StraightLine, &cov, setup(n, 1)).unwrap();
            assert!((w - 0.5).abs() < 1e-5, "{w}");
        }
    }

    #[test]
    fn quadratic_local_optimum_is_bracketed() {
        let cov = TaggedCovariance::from_variances(&[1e-12, 1e-12, 1.0]).unwrap();
        let w = locally_optimal_weight(DesignFamily::Quadratic, &cov, setup(10, 1)).unwrap();
        let q1 = closed_form_minimax_weight(MinimaxCase::Q1, 10).unwrap();
        assert!(w > 0.25 && w < q1, "{w} not in (0.25, {q1})");
    }

    #[test]
    fn efficiency_of_local_optimum_is_one() {
        let cov = TaggedCovariance::new(vec![VarianceTag::Zero, VarianceTag::Finite(0.8)]).unwrap();
        let s = setup(10, 1);
        let w = locally_optimal_weight(DesignFamily::StraightLine, &cov, s).unwrap();
        let d = DesignFamily::StraightLine.design(w).unwrap();
        let eff = efficiency(&d, DesignFamily::StraightLine, &cov, s).unwrap();
        assert!((eff - 1.0).abs() < 1e-10);
        assert!(eff <= 1.0);
    }

    #[test]
    fn minimax_design_is_nearly_efficient_for_large_variance() {
        let cov = TaggedCovariance::from_variances(&[1e-12, 1e8]).unwrap();
        let w = closed_form_minimax_weight(MinimaxCase::SL, 10).unwrap();
        let d = DesignFamily::StraightLine.design(w).unwrap();
        let eff = efficiency(&d, DesignFamily::StraightLine, &cov, setup(10, 1)).unwrap();
        assert!((0.9999..=1.0).contains(&eff), "{eff}");
    }

    #[test]
    fn efficiency_increases_with_rescaled_variance() {
        let w = closed_form_minimax_weight(MinimaxCase::SL, 10).unwrap();
        let d = DesignFamily::StraightLine.design(w).unwrap();
        let mut last = 0.0;
        for k in 1..100 {
            let rho = k as f64 / 100.0;
            let cov = MinimaxCase::SL.tags_at(rho / (1.0 - rho)).unwrap();
            let eff = efficiency(&d, DesignFamily::StraightLine, &cov, setup(10, 1)).unwrap();
            assert!(eff > 0.0 && eff <= 1.0);
            assert!(eff >= last, "rho {rho}: {eff} < {last}");
            last = eff;
        }
    }
}
