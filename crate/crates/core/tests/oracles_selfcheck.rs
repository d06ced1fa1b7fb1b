//! Sanity checks on the reference implementations themselves.
mod common;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::DMatrix;

#[test]
fn expected_max_known_values() {
    assert_abs_diff_eq!(expected_max_iid(1), 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(expected_max_iid(2), 1.0 / std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    assert_abs_diff_eq!(expected_max_iid(500), 3.0366993459289264, epsilon = 1e-8);
}

#[test]
fn with_replacement_mixture() {
    assert_abs_diff_eq!(expected_max_with_replacement(500, 1), 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(expected_max_with_replacement(500, 25), 1.954752308616024, epsilon = 1e-8);
    assert!(expected_max_with_replacement(500, 25) < expected_max_iid(25));
}

#[test]
fn dense_condition_bivariate() {
    let joint = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
    let (mean, cov) = dense_condition(&joint, &[0], &[2.0], &[1]);
    assert_abs_diff_eq!(mean[0], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(cov[(0, 0)], 1.75, epsilon = 1e-14);
}

#[test]
fn brute_force_base_case() {
    let all = brute_force_feasible(&[1.0, 10.0, 100.0], 2500.0, 500);
    let front = brute_force_pareto(&all);
    let expected: Vec<Vec<usize>> = (1..=18).map(|k| vec![500, 200 - 10 * k, k]).collect();
    assert_eq!(front, expected);
}
