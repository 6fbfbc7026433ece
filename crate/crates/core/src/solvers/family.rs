//! The one-parameter design families and the minimax case taxonomy.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::criteria::{CriterionReport, ImseCriterion};
use crate::error::{DesignError, Result};
use crate::model::design::information_matrix_unchecked;
use crate::model::{
    BasisSpec, Design, PopulationSetup, TaggedCovariance, VarianceTag, WeightMeasure,
};
use crate::solvers::golden::{minimize_weight_1d, refine_stationary_point, DEFAULT_TOL};

/// Half-width of the bracket searched by the derivative polish.
const POLISH_RADIUS: f64 = 1e-6;

/// Open interval of admissible family weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignFamilyBound {
    pub lo: f64,
    pub hi: f64,
}

impl DesignFamilyBound {
    pub fn contains(&self, w: f64) -> bool {
        w > self.lo && w < self.hi
    }
}

/// Symmetric designs on the endpoints (and centre) of the standard regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignFamily {
    /// Straight line on `[0, 1]`: weight `1 - w` at 0 and `w` at 1.
    StraightLine,
    /// Quadratic on `[-1, 1]`: weights `w, 1 - 2w, w` at `-1, 0, 1`.
    Quadratic,
}

impl DesignFamily {
    pub fn basis(&self) -> BasisSpec {
        match self {
            DesignFamily::StraightLine => BasisSpec::straight_line(),
            DesignFamily::Quadratic => BasisSpec::quadratic(),
        }
    }

    /// Uniform weighting of total mass one on the region.
    pub fn measure(&self) -> WeightMeasure {
        WeightMeasure::uniform(self.basis().region())
    }

    pub fn bound(&self) -> DesignFamilyBound {
        match self {
            DesignFamily::StraightLine => DesignFamilyBound { lo: 0.0, hi: 1.0 },
            DesignFamily::Quadratic => DesignFamilyBound { lo: 0.0, hi: 0.5 },
        }
    }

    pub fn support(&self) -> &'static [f64] {
        match self {
            DesignFamily::StraightLine => &[0.0, 1.0],
            DesignFamily::Quadratic => &[-1.0, 0.0, 1.0],
        }
    }

    pub fn weights(&self, w: f64) -> Vec<f64> {
        match self {
            DesignFamily::StraightLine => vec![1.0 - w, w],
            DesignFamily::Quadratic => vec![w, 1.0 - 2.0 * w, w],
        }
    }

    /// The design `xi_w`; `w` must lie in the closed hull of the bound.
    pub fn design(&self, w: f64) -> Result<Design> {
        let b = self.bound();
        if !(w >= b.lo && w <= b.hi) {
            return Err(DesignError::InvalidArgument(format!(
                "family weight {w} outside [{}, {}]",
                b.lo, b.hi
            )));
        }
        Design::new(self.support().to_vec(), self.weights(w))
    }

    /// Recovers `w` if `design` belongs to this family.
    pub fn weight_of(&self, design: &Design) -> Option<f64> {
        const TOL: f64 = 1e-12;
        let support = self.support();
        let mut full = vec![0.0; support.len()];
        for (x, wt) in design.iter() {
            let j = support.iter().position(|s| (s - x).abs() < TOL)?;
            full[j] = wt;
        }
        let w = *full.last()?;
        let expected = self.weights(w);
        expected
            .iter()
            .zip(&full)
            .all(|(a, b)| (a - b).abs() < TOL)
            .then_some(w)
    }
}

/// A criterion restricted to a design family, as a function of `w`.
#[derive(Debug, Clone)]
pub struct FamilyCriterion {
    family: DesignFamily,
    criterion: ImseCriterion,
}

impl FamilyCriterion {
    pub fn new(
        family: DesignFamily,
        cov: &TaggedCovariance,
        setup: PopulationSetup,
    ) -> Result<Self> {
        let criterion = ImseCriterion::new(&family.basis(), &family.measure(), cov, setup)?;
        Ok(Self { family, criterion })
    }

    pub fn family(&self) -> DesignFamily {
        self.family
    }

    pub fn criterion(&self) -> &ImseCriterion {
        &self.criterion
    }

    fn information(&self, w: f64) -> DMatrix<f64> {
        information_matrix_unchecked(
            self.criterion.basis(),
            self.family.support(),
            &self.family.weights(w),
        )
    }

    pub fn report(&self, w: f64) -> Result<CriterionReport> {
        if !self.family.bound().contains(w) {
            return Err(DesignError::SingularCriterion {
                matrix: "information matrix M(xi)".into(),
                rcond: 0.0,
            });
        }
        self.criterion.report_for_matrix(&self.information(w))
    }

    /// Criterion value, `+inf` where the design is singular.
    pub fn value(&self, w: f64) -> f64 {
        self.report(w).map(|r| r.value).unwrap_or(f64::INFINITY)
    }

    /// Analytic derivative of the criterion in `w`; NaN where the design is singular.
    pub fn derivative(&self, w: f64) -> f64 {
        if !self.family.bound().contains(w) {
            return f64::NAN;
        }
        let slope: Vec<f64> = self
            .family
            .weights(1.0)
            .iter()
            .zip(self.family.weights(0.0))
            .map(|(a, b)| a - b)
            .collect();
        match self
            .criterion
            .value_and_gradient(self.family.support(), &self.family.weights(w))
        {
            Ok((_, g)) => g.iter().zip(&slope).map(|(g, s)| g * s).sum(),
            Err(_) => f64::NAN,
        }
    }

    /// Minimising weight: golden section, then a sign bisection on the derivative.
    pub fn optimal_weight(&self) -> Result<f64> {
        let w = minimize_weight_1d(|w| self.value(w), self.family.bound(), DEFAULT_TOL)?;
        Ok(refine_stationary_point(
            |w| self.derivative(w),
            w,
            POLISH_RADIUS,
            self.family.bound(),
        ))
    }
}

/// Straight line or quadratic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    StraightLine,
    Quadratic,
}

impl ModelKind {
    pub fn family(&self) -> DesignFamily {
        match self {
            ModelKind::StraightLine => DesignFamily::StraightLine,
            ModelKind::Quadratic => DesignFamily::Quadratic,
        }
    }
}

/// Which variances are sent to zero and which to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinimaxCase {
    /// Straight line, intercept variance to zero, slope variance to infinity.
    SL,
    /// Quadratic, `d1, d2 -> 0`, `d3 -> inf`.
    Q1,
    /// Quadratic, `d1, d3 -> 0`, `d2 -> inf`.
    Q2,
    /// Quadratic, `d3 -> 0`, `d1, d2 -> inf`.
    Q3,
    /// Quadratic, `d2 -> 0`, `d1, d3 -> inf`.
    Q4,
    /// Quadratic, `d1 -> 0`, `d2, d3 -> inf`.
    Q5,
}

impl MinimaxCase {
    pub const ALL: [MinimaxCase; 6] = [
        MinimaxCase::SL,
        MinimaxCase::Q1,
        MinimaxCase::Q2,
        MinimaxCase::Q3,
        MinimaxCase::Q4,
        MinimaxCase::Q5,
    ];

    pub fn model(&self) -> ModelKind {
        match self {
            MinimaxCase::SL => ModelKind::StraightLine,
            _ => ModelKind::Quadratic,
        }
    }

    pub fn family(&self) -> DesignFamily {
        self.model().family()
    }

    pub fn tags(&self) -> TaggedCovariance {
        use VarianceTag::{Infinite as I, Zero as Z};
        let entries = match self {
            MinimaxCase::SL => vec![Z, I],
            MinimaxCase::Q1 => vec![Z, Z, I],
            MinimaxCase::Q2 => vec![Z, I, Z],
            MinimaxCase::Q3 => vec![I, I, Z],
            MinimaxCase::Q4 => vec![I, Z, I],
            MinimaxCase::Q5 => vec![Z, I, I],
        };
        TaggedCovariance::new(entries).expect("non-empty")
    }

    /// The case's tags with every infinite variance replaced by the finite value `d`.
    pub fn tags_at(&self, d: f64) -> Result<TaggedCovariance> {
        let tag = VarianceTag::finite(d)?;
        TaggedCovariance::new(
            self.tags()
                .entries()
                .iter()
                .map(|e| if *e == VarianceTag::Infinite { tag } else { *e })
                .collect(),
        )
    }

    /// The minimax criterion on the case's family for `n` individuals.
    pub fn criterion(&self, n: usize) -> Result<FamilyCriterion> {
        FamilyCriterion::new(self.family(), &self.tags(), PopulationSetup::new(n, 1)?)
    }

    pub fn description(&self) -> &'static str {
        match self {
            MinimaxCase::SL => "straight line, d1 -> 0, d2 -> inf",
            MinimaxCase::Q1 => "quadratic, d1, d2 -> 0, d3 -> inf",
            MinimaxCase::Q2 => "quadratic, d1, d3 -> 0, d2 -> inf",
            MinimaxCase::Q3 => "quadratic, d3 -> 0, d1, d2 -> inf",
            MinimaxCase::Q4 => "quadratic, d2 -> 0, d1, d3 -> inf",
            MinimaxCase::Q5 => "quadratic, d1 -> 0, d2, d3 -> inf",
        }
    }
}

impl fmt::Display for MinimaxCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for MinimaxCase {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        MinimaxCase::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                DesignError::InvalidArgument(format!("unknown case `{s}`; expected SL or Q1..Q5"))
            })
    }
}

/// Minimax-optimal family weight in closed form; needs `n >= 2`.
pub fn closed_form_minimax_weight(case: MinimaxCase, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(DesignError::InvalidArgument(format!(
            "closed-form minimax weights need n >= 2 individuals, got {n}"
        )));
    }
    let n = n as f64;
    let w = match case {
        MinimaxCase::SL => (n - n.sqrt()) / (n - 1.0),
        MinimaxCase::Q1 => (3.0 * n + 5.0 - 2.0 * (6.0 * n + 10.0).sqrt()) / (6.0 * (n - 1.0)),
        MinimaxCase::Q2 | MinimaxCase::Q3 => {
            (5.0 * n + 3.0 - 2.0 * (10.0 * n + 6.0).sqrt()) / (10.0 * (n - 1.0))
        }
        MinimaxCase::Q4 => {
            (-3.0 * n - 5.0 + 2.0 * (6.0 * n * n + 10.0 * n).sqrt()) / (10.0 * (n - 1.0))
        }
        MinimaxCase::Q5 => (n - n.sqrt()) / (2.0 * (n - 1.0)),
    };
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let sl = closed_form_minimax_weight(MinimaxCase::SL, 10).unwrap();
        assert!((sl - 0.759747).abs() < 5e-7);
        assert!(
            (closed_form_minimax_weight(MinimaxCase::Q5, 4).unwrap() - 1.0 / 3.0).abs() < 1e-15
        );
        let q1 = closed_form_minimax_weight(MinimaxCase::Q1, 4).unwrap();
        assert!((q1 - (17.0 - 2.0 * 34f64.sqrt()) / 18.0).abs() < 1e-15);
        assert!((q1 - 0.296561).abs() < 5e-7);
        let q4 = closed_form_minimax_weight(MinimaxCase::Q4, 10).unwrap();
        assert!((q4 - (-35.0 + 2.0 * 700f64.sqrt()) / 90.0).abs() < 1e-15);
        assert!((q4 - 0.199056).abs() < 5e-7);
        assert_eq!(
            closed_form_minimax_weight(MinimaxCase::Q2, 50).unwrap(),
            closed_form_minimax_weight(MinimaxCase::Q3, 50).unwrap()
        );
    }

    #[test]
    fn closed_form_needs_two_individuals() {
        assert!(closed_form_minimax_weight(MinimaxCase::SL, 1).is_err());
        assert!(closed_form_minimax_weight(MinimaxCase::Q4, 0).is_err());
    }

    #[test]
    fn closed_forms_are_stationary_points() {
        for case in MinimaxCase::ALL {
            for n in [2usize, 7, 40] {
                let w = closed_form_minimax_weight(case, n).unwrap();
                let crit = case.criterion(n).unwrap();
                let h = 1e-6;
                let slope = (crit.value(w + h) - crit.value(w - h)) / (2.0 * h);
                assert!(slope.abs() < 1e-5, "{case} n={n}: slope {slope}");
                assert!(crit.value(w) < crit.value(w - 1e-4));
                assert!(crit.value(w) < crit.value(w + 1e-4));
            }
        }
    }

    #[test]
    fn case_tags_and_parsing() {
        assert_eq!(MinimaxCase::Q4.tags().to_string(), "inf,zero,inf");
        assert_eq!("q3".parse::<MinimaxCase>().unwrap(), MinimaxCase::Q3);
        assert!("Q6".parse::<MinimaxCase>().is_err());
        assert_eq!(
            MinimaxCase::Q3.tags_at(2.0).unwrap().to_string(),
            "2,2,zero"
        );
    }

    #[test]
    fn family_membership() {
        let fam = DesignFamily::Quadratic;
        let d = fam.design(0.3).unwrap();
        assert!((fam.weight_of(&d).unwrap() - 0.3).abs() < 1e-15);
        let off = Design::new(vec![-1.0, 0.0, 1.0], vec![0.2, 0.4, 0.4]).unwrap();
        assert!(fam.weight_of(&off).is_none());
        assert!(fam.design(0.6).is_err());
        // zero weight at the centre is still a family member
        let edge = fam.design(0.5).unwrap();
        assert_eq!(fam.weight_of(&edge), Some(0.5));
    }

    #[test]
    fn family_criterion_is_infinite_outside_bound() {
        let c = MinimaxCase::SL.criterion(4).unwrap();
        assert_eq!(c.value(0.0), f64::INFINITY);
        assert_eq!(c.value(1.0), f64::INFINITY);
        assert!((c.value(2.0 / 3.0) - 3.0).abs() < 1e-12);
    }
}
