use nalgebra::{DMatrix, DVector};

use rcr_design::simulation::{compare_mse, empirical_mse, simulate, with_threads, SimulationPlan};

fn line_plan(n: usize, replicates: usize, seed: u64) -> SimulationPlan {
    let f = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
    SimulationPlan::new(
        f,
        vec![1.0, 1.0],
        DVector::zeros(2),
        1.0,
        n,
        replicates,
        seed,
    )
    .unwrap()
}

#[test]
fn single_individual_matches_least_squares_dispersion() {
    let plan = line_plan(1, 100_000, 42);
    let emp = empirical_mse(&plan).unwrap();
    let theo = plan.theoretical_mse().unwrap();
    // (F^T F)^-1 for rows (1, 0), (1, 1)
    let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
    assert!((theo.matrix() - &expected).amax() < 1e-12);
    let cmp = compare_mse(&emp, &theo, 4.0).unwrap();
    assert!(cmp.pass, "{cmp:?}");
}

#[test]
fn three_individuals_match_closed_form() {
    let plan = line_plan(3, 100_000, 42);
    let cmp = compare_mse(
        &empirical_mse(&plan).unwrap(),
        &plan.theoretical_mse().unwrap(),
        4.0,
    )
    .unwrap();
    assert!(cmp.pass, "{cmp:?}");
}

#[test]
fn standard_errors_shrink_like_inverse_root_of_replicates() {
    let small = empirical_mse(&line_plan(2, 5_000, 3)).unwrap();
    let large = empirical_mse(&line_plan(2, 80_000, 3)).unwrap();
    let ratio = small.std_error.sum() / large.std_error.sum();
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn seeds_change_the_draws_but_not_the_verdict() {
    let a = empirical_mse(&line_plan(2, 20_000, 1)).unwrap();
    let b = empirical_mse(&line_plan(2, 20_000, 2)).unwrap();
    assert_ne!(a.matrix, b.matrix);
    let theo = line_plan(2, 20_000, 1).theoretical_mse().unwrap();
    assert!(compare_mse(&a, &theo, 4.0).unwrap().pass);
    assert!(compare_mse(&b, &theo, 4.0).unwrap().pass);
}

#[test]
fn estimates_are_identical_across_thread_counts() {
    let plan = line_plan(3, 10_000, 9);
    let one = with_threads(1, || empirical_mse(&plan).unwrap()).unwrap();
    let four = with_threads(4, || empirical_mse(&plan).unwrap()).unwrap();
    assert_eq!(one, four);
}

#[test]
fn replicate_stream_is_reproducible() {
    let plan = line_plan(2, 1_000, 5);
    let first: Vec<_> = simulate(&plan).take(3).collect();
    let again: Vec<_> = simulate(&plan).take(3).collect();
    assert_eq!(first, again);
    assert_eq!(plan.replicate(2), first[2]);
}
