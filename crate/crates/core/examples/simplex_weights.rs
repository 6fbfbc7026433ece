// Weight optimisation on an arbitrary finite support.

use std::error::Error;

use rcr_design::criteria::ImseCriterion;
use rcr_design::model::{BasisSpec, PopulationSetup, TaggedCovariance, WeightMeasure};
use rcr_design::solvers::simplex::DEFAULT_GAP_TOL;
use rcr_design::solvers::{optimize_weights_fixed_support, MinimaxCase};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let support = [-1.0, -0.5, 0.0, 0.5, 1.0];

    let q1 = MinimaxCase::Q1.criterion(4)?;
    let sol = optimize_weights_fixed_support(q1.criterion(), &support, 1e-12)?;
    println!(
        "Q1, n = 4: {} (value {:.9}, {} steps)",
        sol.design, sol.value, sol.iterations
    );

    let basis = BasisSpec::quadratic();
    let nu = WeightMeasure::uniform(basis.region());
    let cov = TaggedCovariance::from_variances(&[0.5, 1.0, 2.0])?;
    let crit = ImseCriterion::new(&basis, &nu, &cov, PopulationSetup::new(20, 3)?)?;
    let sol = optimize_weights_fixed_support(&crit, &support, DEFAULT_GAP_TOL)?;
    println!(
        "d = (0.5, 1, 2), n = 20, m = 3: {} (gap {:.2e})",
        sol.design, sol.gap
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
