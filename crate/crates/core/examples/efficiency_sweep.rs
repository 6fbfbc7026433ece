// How well the minimax design does when the variances are actually finite.

use std::error::Error;

use rcr_design::model::PopulationSetup;
use rcr_design::solvers::{
    closed_form_minimax_weight, efficiency, locally_optimal_weight, MinimaxCase,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let case = MinimaxCase::SL;
    let family = case.family();
    for n in [10, 50, 500] {
        let setup = PopulationSetup::new(n, 1)?;
        let minimax = family.design(closed_form_minimax_weight(case, n)?)?;
        println!("n = {n}, minimax design {minimax}");
        for rho in [0.05, 0.25, 0.5, 0.75, 0.95, 0.99] {
            let cov = case.tags_at(rho / (1.0 - rho))?;
            let local = locally_optimal_weight(family, &cov, setup)?;
            let eff = efficiency(&minimax, family, &cov, setup)?;
            println!("  rho {rho:.2}: local weight {local:.6}, efficiency {eff:.6}");
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
