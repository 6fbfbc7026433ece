// Regression functions, information matrices and weighting moments.

use std::error::Error;

use rcr_design::model::{BasisSpec, Design, Region, WeightMeasure};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let line = BasisSpec::straight_line();
    println!("f(0.25) = {:?}", line.evaluate(0.25)?.as_slice());

    let design: Design = "0:0.25,1:0.75".parse()?;
    println!("M(xi) for {design}:{}", design.information_matrix(&line)?);

    let uniform = WeightMeasure::uniform(line.region());
    println!("V, uniform on [0, 1]:{}", uniform.v_matrix(&line)?);

    let cubic = BasisSpec::polynomial(4, Region::new(-2.0, 2.0)?)?;
    let two_points = WeightMeasure::discrete(vec![-1.0, 1.5], vec![0.5, 0.5])?;
    println!(
        "V, cubic, two-point measure:{}",
        two_points.v_matrix(&cubic)?
    );

    match line.evaluate(1.5) {
        Err(e) => println!("outside the region: {e}"),
        Ok(_) => unreachable!("1.5 is outside [0, 1]"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
