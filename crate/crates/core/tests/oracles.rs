//! Closed-form calculators against values computed independently at 40 digits.

use dnet_core::bounds::*;
use dnet_core::packing::{kl_budget, lower_bound_rate};
use dnet_core::spectral::projection_example;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

macro_rules! frozen {
    ($got:expr, $want:expr) => {{
        let (g, w): (f64, f64) = ($got, $want);
        assert!(rel(g, w) <= 1e-12, "{} = {g:e}, expected {w:e}", stringify!($got));
    }};
}

#[test]
fn log_six() {
    frozen!(count_bounds(2, 3).unwrap().exact, 1.7917594692280550008);
}

#[test]
fn log_cardinality() {
    frozen!(improved_log_cardinality(3, 4, 10.0, 5).unwrap().value, 27.073283983175088924);
}

#[test]
fn covering_entropy_large_d_bar() {
    frozen!(covering_entropy(3, 1.0, 0.3, 1e6, 100).unwrap(), 1298.2929094215963974);
}

#[test]
fn two_layer_pair() {
    let r = two_layer_entropy(1.0, 0.5, 10, 1.0).unwrap();
    frozen!(r.cover3, 688.89940923825684637);
    frozen!(r.cover4, 31.748021039363989495);
}

#[test]
fn risk_rate_values() {
    frozen!(risk_rates(3, 1.0, 1e4, 10.0, 5).unwrap().theorem3, 0.079324133102084284853);
    frozen!(risk_rates(3, 2.0, 1e4, 10.0, 5).unwrap().theorem3_d_bar_free, 0.18961515908382194201);
    frozen!(theorem2_rate(1.5, 1000.0, 20), 0.31331023431017429508);
    frozen!(risk_rates(3, 1.0, 1000.0, 10.0, 10).unwrap().barron, 0.23675240623884039773);
}

#[test]
fn rademacher_values() {
    frozen!(rademacher_bound(3, 1.0, 1000.0, 50.0, 5, 1.0).unwrap().final_rate, 1.9218974448162079227);
    frozen!(rademacher_bound(3, 1.0, 1000.0, 50.0, 5, 1.0).unwrap().integral, 30.38786677438492464);
}

#[test]
fn lower_bound_eps() {
    frozen!(lower_bound_rate(4.0, 1.0, 1.0, 1000, 1e4).unwrap().eps_sq, 0.035260760346551986396);
}

#[test]
fn kl_budget_example() {
    frozen!(kl_budget(100.0, 0.04, 1.0), 10.0);
}

#[test]
fn projection_finite_depth() {
    frozen!(projection_example(0.5, 1.0, 16, 1.0, &[1.0, 1.0]).unwrap().v_bar_exact, 2.2026262733382619851);
}

#[test]
fn power_laws_are_exact() {
    let r1 = theorem2_rate(1.3, 500.0, 7);
    let r64 = theorem2_rate(1.3, 64.0 * 500.0, 7);
    assert!(rel(r64 / r1, 0.25) <= 1e-12);
    let e1 = lower_bound_rate(2.0, 0.5, 1.0, 40, 300.0).unwrap().eps_sq;
    let e16 = lower_bound_rate(2.0, 0.5, 1.0, 40, 16.0 * 300.0).unwrap().eps_sq;
    assert!(rel(e16 / e1, 0.25) <= 1e-12);
}

#[test]
fn bound2_arithmetic() {
    // (L·v/√M)² with L = 3, v = 2, M = 100
    let m = paths_for_accuracy(3, 2.0, 0.6).unwrap();
    assert_eq!(m, 100);
}
