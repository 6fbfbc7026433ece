// Predicting individual coefficients and checking their MSE by simulation.

use std::error::Error;

use nalgebra::{DMatrix, DVector};
use rcr_design::blup::blup;
use rcr_design::simulation::{compare_mse, empirical_mse, simulate, SimulationPlan};

fn show(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // two observations per individual, at x = 0 and x = 1
    let f = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
    let plan = SimulationPlan::new(
        f.clone(),
        vec![1.0, 1.0],
        DVector::from_vec(vec![2.0, -1.0]),
        1.0,
        3,
        5_000,
        42,
    )?;

    let first = simulate(&plan).next().expect("at least one replicate");
    let pred = blup(&f, &[1.0, 1.0], &first.observations)?;
    println!("population estimate {}", show(&pred.population));
    for (i, (b, truth)) in pred.individual.iter().zip(&first.coefficients).enumerate() {
        println!("individual {i}: predicted {} true {}", show(b), show(truth));
    }

    let emp = empirical_mse(&plan)?;
    let theo = plan.theoretical_mse()?;
    let cmp = compare_mse(&emp, &theo, 4.0)?;
    println!("theoretical MSE block (0, 0):{}", theo.block(0, 0));
    println!(
        "max deviation {:.5} ({:.2} standard errors): {}",
        cmp.max_abs_deviation,
        cmp.max_z,
        if cmp.pass { "pass" } else { "fail" }
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
