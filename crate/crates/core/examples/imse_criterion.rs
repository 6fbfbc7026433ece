// The IMSE criterion at known variances and in its zero/infinity limits.

use std::error::Error;

use rcr_design::criteria::{fixed_effects_imse, imse_limit, imse_pred};
use rcr_design::model::{BasisSpec, Design, PopulationSetup, TaggedCovariance, WeightMeasure};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let basis = BasisSpec::straight_line();
    let nu = WeightMeasure::uniform(basis.region());
    let design: Design = "0:0.5,1:0.5".parse()?;
    let setup = PopulationSetup::new(4, 1)?;

    let fixed = fixed_effects_imse(&design, &basis, &nu)?;
    println!("fixed effects IMSE: {fixed:.6}");

    for d in [0.1, 1.0, 10.0, 1000.0] {
        let cov = TaggedCovariance::from_variances(&[1e-6, d])?;
        let r = imse_pred(&design, &basis, &nu, &cov, setup)?;
        println!(
            "d = ({:e}, {d:>6}): value {:.6} = {:.6} + {:.6}",
            1e-6, r.value, r.population_term, r.prediction_term
        );
    }

    let tags: TaggedCovariance = "zero,inf".parse()?;
    let limit = imse_limit(&design, &basis, &nu, &tags, setup)?;
    println!("limit {tags}: {:.6}", limit.value);

    let proxy = imse_pred(&design, &basis, &nu, &tags.with_proxies(1e-10, 1e10), setup)?;
    println!("proxies 1e-10 / 1e10: {:.6}", proxy.value);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
