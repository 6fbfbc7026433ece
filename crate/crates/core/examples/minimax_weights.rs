// Minimax weights of all six cases: closed form, golden section and grid search.

use std::error::Error;

use rcr_design::solvers::{closed_form_minimax_weight, grid_oracle, MinimaxCase};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("case   n   closed       numeric      grid");
    for case in MinimaxCase::ALL {
        for n in [2, 10, 100] {
            let closed = closed_form_minimax_weight(case, n)?;
            let crit = case.criterion(n)?;
            let numeric = crit.optimal_weight()?;
            let grid = grid_oracle(|w| crit.value(w), case.family().bound(), 10_000)?;
            println!("{case:<4} {n:>4}   {closed:.9}  {numeric:.9}  {grid:.9}");
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
