use dnet_core::bounds::{bartlett_comparison, bartlett_trajectory};
use dnet_core::linalg::Matrix;
use dnet_core::spectral::*;
use dnet_core::variation::{subnetwork_variations_with, LinkSelector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn projection_reaches_its_asymptote() {
    let mut prev_gap = f64::INFINITY;
    for l in [4, 8, 16, 32, 64, 128, 256, 512] {
        let r = projection_example(0.5, 0.5, l, 1.0, &[1.0, 1.0]).unwrap();
        assert!((r.v_bar_exact - r.v_bar_pipeline).abs() <= 1e-8 * r.v_bar_exact);
        let gap = (r.v_bar_exact - r.v_bar_asymptotic).abs();
        assert!(gap < prev_gap);
        // O(1/L)
        assert!(gap * l as f64 <= 1.0);
        prev_gap = gap;
    }
}

#[test]
fn projection_norm_identities() {
    for (t, s) in [(0.5, 1.0), (0.2, 0.7), (0.9, 2.0), (0.3, 0.3)] {
        let r = projection_example(t, s, 8, 1.0, &[1.0, 1.0]).unwrap();
        assert!(r.idempotence_defect <= 1e-10);
        assert!((r.q_spectral.powi(2) - r.q_spectral_sq_closed).abs() <= 1e-8);
        if (s * s - t * (1.0 - t)).abs() > 1e-9 {
            assert!(r.q_spectral_sq_closed > 1.0);
        }
        if (s - t).abs() > 1e-9 {
            assert!(r.q_row_sum > 1.0);
        }
    }
}

#[test]
fn projection_spectral_products_grow_linearly_in_log() {
    let q = projection_matrix(0.5, 1.0).unwrap();
    let log_q = q.spectral().ln();
    let ls: Vec<f64> = (4..=64).map(f64::from).collect();
    let logs: Vec<f64> = (4..=64)
        .map(|l| {
            let net = MatrixFamily::Projection { t: 0.5, s: 1.0 }.network(l, 1.0, &[1.0, 1.0]).unwrap();
            net.weights().iter().map(|w| w.spectral().ln()).sum()
        })
        .collect();
    let slope = fit_slope(&ls, &logs).unwrap();
    assert!(slope >= log_q * (1.0 - 1e-9) && log_q > 0.0);
}

#[test]
fn swap_matrix_limits() {
    let q = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let r = irreducible_cesaro(&q, 1.0, &[1.0, 1.0], 33).unwrap();
    assert!((r.v_bar_in_limit - 2.0).abs() < 1e-9);
    assert!((r.v_bar_out_limit - 2.0).abs() < 1e-9);
    assert!(r.scaled_error_max <= 2.0);
}

#[test]
fn symmetric_doubly_stochastic_u_equals_v() {
    let q = Matrix::from_rows(&[vec![0.5, 0.25, 0.25], vec![0.25, 0.5, 0.25], vec![0.25, 0.25, 0.5]]).unwrap();
    let r = irreducible_cesaro(&q, 1.0, &[1.0, 0.0, 0.0], 40).unwrap();
    for (a, b) in r.u.iter().zip(&r.v) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn perron_renormalization_and_pipeline() {
    // ρ = 3 before rescaling
    let q = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    let l = 12;
    let r = irreducible_cesaro(&q, 1.5, &[1.0, 0.5], l).unwrap();
    assert!((r.rho - 3.0).abs() < 1e-9);
    let net = MatrixFamily::Irreducible { q: q.to_rows() }.network(l, 1.5, &[1.0, 0.5]).unwrap();
    let s = subnetwork_variations_with(&net, LinkSelector::Argmax);
    assert!((s.v_bar_out() - r.v_bar_out).abs() <= 1e-8 * r.v_bar_out);
    assert!((s.v_bar_in() - r.v_bar_in).abs() <= 1e-8 * r.v_bar_in);
    let slope = r.rate_slope.expect("nonzero errors");
    assert!(slope <= -0.9, "{slope}");
}

#[test]
fn identity_reduced_is_width_free() {
    let mut reduced = Vec::new();
    for d in [2, 20, 200] {
        let mut w1 = vec![0.0; d];
        w1[0] = 0.75;
        w1[d - 1] = 0.5;
        let r = identity_family(1.0, &w1, 5).unwrap();
        assert!((r.reduced - r.reduced_pipeline).abs() <= 1e-10 * r.reduced);
        assert!((r.plain - r.plain_pipeline).abs() <= 1e-10 * r.plain);
        reduced.push(r.reduced);
    }
    assert!(reduced.iter().all(|x| (x - reduced[0]).abs() <= 1e-10 * reduced[0]));
}

#[test]
fn identity_plain_grows_like_root_width() {
    let at = |d: usize| identity_family(1.0, &vec![1.0 / d as f64; d], 50).unwrap().plain;
    let ratio = at(400) / at(100);
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}

#[test]
fn identity_depth_two_edge() {
    let r = identity_family(2.0, &[0.5, 1.5], 2).unwrap();
    assert!((r.plain - r.plain_pipeline).abs() <= 1e-12);
}

fn random_perturbations(rng: &mut ChaCha8Rng, count: usize, d: usize, scale: f64) -> Vec<Matrix<f64>> {
    (0..count)
        .map(|_| Matrix::from_vec(d, d, (0..d * d).map(|_| scale * rng.random::<f64>()).collect()).unwrap())
        .collect()
}

#[test]
fn near_identity_exact_below_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let q = random_perturbations(&mut rng, 4, 6, 0.05);
        let w1: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let r = near_identity_family(&q, 1.0, &w1).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.margin >= 0.0);
    }
}

#[test]
fn near_identity_uniform_norms_give_unit_s() {
    let l = 6;
    let d = 4;
    let per = 1.0 / l as f64 / (d * d) as f64;
    let q = vec![Matrix::filled(d, d, per); l - 1];
    let r = near_identity_family(&q, 1.0, &[0.25; 4]).unwrap();
    assert!(r.s <= 1.0);
    assert!(r.holds);
}

#[test]
fn harmonic_schedule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base: Vec<Matrix<f64>> = random_perturbations(&mut rng, 7, 4, 1.0)
        .into_iter()
        .map(|m| {
            let n = m.l1();
            m.scale(1.0 / n)
        })
        .collect();
    let r = near_identity_harmonic(&base, 1.0, &[0.5, 0.5, 0.25, 0.25]).unwrap();
    assert!(r.s.exp() <= r.l as f64);
    assert!(r.holds);
    assert!(r.bound <= r.harmonic_bound.unwrap() * (1.0 + 1e-12));
}

#[test]
fn bartlett_side_conditions() {
    let nets: Vec<_> = (3..=8)
        .map(|l| MatrixFamily::Projection { t: 0.5, s: 1.0 }.network(l, 1.0, &[1.0, 1.0]).unwrap())
        .collect();
    let traj = bartlett_trajectory(&nets, 1.0, 0.1).unwrap();
    for (net, r) in nets.iter().zip(&traj) {
        // against the true spectral norm; the row-vector ℓ¹ reading of W_1 exceeds its (2,1) norm
        for (l, g) in r.group.iter().enumerate() {
            let w0 = if l == 0 { net.w0() } else { 1.0 };
            assert!(*g >= w0 * net.weights()[l].spectral() * (1.0 - 1e-9));
        }
    }
    assert!(traj.windows(2).all(|w| w[1].ratio_bartlett2_cover1 > w[0].ratio_bartlett2_cover1));

    // identities: the spectral product is 1
    let id = MatrixFamily::ConstantQ { q: Matrix::<f64>::identity(2).to_rows() }
        .network(5, 1.0, &[1.0, 0.0])
        .unwrap();
    let r = bartlett_comparison(&id, 1.0, 0.5).unwrap();
    let prod: f64 = r.spectral.iter().map(|s| s * s).product();
    assert!((prod - 1.0).abs() < 1e-9);
}

#[test]
fn toeplitz_eigenvalues_track_symbol() {
    let rows = toeplitz_demo(&[2.0, 0.5, 0.25], 64);
    let lo = rows.iter().map(|r| r.symbol).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.symbol).fold(f64::NEG_INFINITY, f64::max);
    for r in &rows {
        assert!(r.eigenvalue >= lo - 1e-9 && r.eigenvalue <= hi + 1e-9);
    }
}
