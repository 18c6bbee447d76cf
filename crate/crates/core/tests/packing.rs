use dnet_core::packing::*;
use num_bigint::BigUint;

#[test]
fn lattice_forms_agree_with_enumeration() {
    for d in 1..=6u64 {
        for a in 0..=6u64 {
            let n = lattice_count(d, a);
            assert_eq!(n, lattice_count_alternate(d, a), "d={d} A={a}");
            let pts = enumerate_lattice(d as usize, a).unwrap();
            assert_eq!(BigUint::from(pts.len()), n);
            assert!(pts.iter().all(|p| p.iter().map(|x| x.unsigned_abs()).sum::<u64>() <= a));
        }
    }
}

#[test]
fn lattice_lower_bound_grid() {
    for d in 1..=8 {
        for a in 1..=8 {
            assert!(lattice_lower_bound(d, a) <= lattice_count(d, a));
        }
    }
}

#[test]
fn lattice_count_is_exact_beyond_u64() {
    let n = lattice_count(200, 200);
    assert!(n.bits() > 64);
    assert_eq!(n, lattice_count_alternate(200, 200));
}

#[test]
fn codes_pass_the_checker() {
    for (n, t, seed) in [(10, 1, 0), (20, 2, 1), (30, 3, 2), (40, 4, 3), (12, 6, 4), (50, 5, 9)] {
        let c = build_code(n, t, seed).unwrap();
        check_code(&c).unwrap_or_else(|e| panic!("N={n} T={t}: {e}"));
        assert_eq!(c, build_code(n, t, seed).unwrap());
    }
}

#[test]
fn weight_two_code_meets_target() {
    let c = build_code(20, 2, 7).unwrap();
    assert_eq!(c.target, "14");
    assert!(c.target_met);
    assert_eq!(c.codewords.len(), 14);
    assert!(c.min_distance.unwrap() >= 2);
}

#[test]
fn unit_packing() {
    let p = build_packing(2, 1, 1.0, 1, 0).unwrap();
    assert_eq!(p.lattice_count, "5");
    assert_eq!(p.nonzero_lattice_points, 4);
    assert_eq!(p.frequencies.len(), 2);
    assert!(p.max_variation_certificate <= p.variation_bound);
    for (i, j, d) in p.quadrature_sq_distances().unwrap() {
        assert!((d - 2.0).abs() < 1e-10);
        assert!((d - p.predicted_sq_distance(i, j)).abs() < 1e-10);
    }
    assert_eq!(p.predicted_sq_distance(0, 0), 0.0);
}

#[test]
fn larger_packing_certificates() {
    let p = build_packing(4, 2, 2.0, 2, 3).unwrap();
    assert!(!p.code.relaxed);
    check_code(&p.code).unwrap();
    let r = verify_orthonormality(&p.frequencies, quadrature_nodes(2)).unwrap();
    assert!(r.max_deviation <= 1e-8);
    assert!(r.collinear_pairs.is_empty());
    for (i, j, d) in p.quadrature_sq_distances().unwrap() {
        assert!((d - p.predicted_sq_distance(i, j)).abs() <= 1e-8);
        assert!(d >= p.separation * (1.0 - 1e-12));
    }
    assert!(p.max_variation_certificate <= p.variation_bound);
}

#[test]
fn orthonormality_examples() {
    let r = verify_orthonormality(&[vec![1, 0], vec![0, 1]], 5).unwrap();
    assert!(r.max_deviation < 1e-10);
    let g = gram_matrix(&[vec![1, 0], vec![-1, 0]], 5).unwrap();
    assert!((g[0][0] - 1.0).abs() < 1e-12);
    assert!((g[0][1] + 1.0).abs() < 1e-12);
}

#[test]
fn rate_feasibility_flag() {
    let ok = lower_bound_rate(1.0, 1.0, 1.0, 100_000, 10.0).unwrap();
    assert!(ok.feasible);
    let bad = lower_bound_rate(16.0, 1.0, 1.0, 3, 1e6).unwrap();
    assert!(!bad.feasible);
    assert!(bad.eps_sq > 0.0);
    assert!((bad.t - 1.0 / (5.0 * bad.eps_sq)).abs() < 1e-9 * bad.t);
    assert_eq!(bad.a, 4);
    assert!(bad.class_contained);
    assert!(!lower_bound_rate(2.0, 1.0, 1.0, 3, 1e6).unwrap().class_contained);
    assert!(bad.lower_exponent > bad.upper_exponent);
}
