use std::collections::HashSet;

use dnet_core::bounds::{d_bar, improved_log_cardinality};
use dnet_core::markov::*;
use dnet_core::variation::full_variation;
use dnet_core::{random_network, uniform_points, Mat, Network, Point};

fn two_five_net() -> Network {
    Network::new(
        2.0,
        vec![
            Mat::row_vector(&[1.0, 3.0]),
            Mat::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.25]]).unwrap(),
        ],
        false,
    )
    .unwrap()
}

#[test]
fn two_five_measure() {
    let m = MarkovMeasure::normalize(&two_five_net(), None).unwrap();
    assert!((m.initial[1] - 0.4).abs() < 1e-15);
    assert!((m.initial[2] - 0.6).abs() < 1e-15);
    let b = MarkovMeasure::normalize(&two_five_net(), Some(5.0)).unwrap();
    assert!((b.null_mass - 0.5).abs() < 1e-15);
    assert!(MarkovMeasure::normalize(&two_five_net(), Some(2.0)).is_err());
}

#[test]
fn pairwise_frequencies_converge() {
    let net = random_network::<f64>(&[4, 4, 2], 21, false).unwrap();
    let measure = MarkovMeasure::normalize(&net, None).unwrap();
    let m = 1_000_000;
    let counts = measure.sample_paths(m, 5);
    let marg = measure.node_marginals();
    for (layer, k) in counts.pairwise.iter().enumerate() {
        for (j, row) in k.iter().enumerate() {
            for (c, &kc) in row.iter().enumerate() {
                let a = marg[layer][j] * measure.transitions[layer].get(j, c);
                // 5σ per cell keeps the family of ~50 cells from tripping by chance
                let tol = 5.0 * (a * (1.0 - a) / m as f64).sqrt() + 1e-12;
                assert!((kc as f64 / m as f64 - a).abs() <= tol, "layer {layer} ({j},{c})");
            }
        }
    }
}

#[test]
fn single_path_is_reproduced() {
    let net = Network::new(
        1.5,
        vec![
            Mat::row_vector(&[0.0, 2.0]),
            Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.5]]).unwrap(),
        ],
        false,
    )
    .unwrap();
    let measure = MarkovMeasure::normalize(&net, None).unwrap();
    for m in [1, 7, 100] {
        let counts = measure.sample_paths(m, 3);
        assert_eq!(counts.pairwise[0][1][1], m);
        let el = reconstruct(&counts, &measure).unwrap();
        for x in uniform_points::<f64>(1, 20, 9) {
            assert!((el.net_tilde.evaluate(&x).unwrap() - net.evaluate(&x).unwrap()).abs() < 1e-14);
        }
        assert_eq!(empirical_error(&net, &el, &uniform_points(1, 20, 9)).unwrap(), 0.0);
    }
}

#[test]
fn exact_counts_are_a_fixed_point() {
    // the measure puts mass 1/4 on each of four paths
    let net = Network::new(
        1.0,
        vec![
            Mat::row_vector(&[1.0, 1.0]),
            Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap(),
        ],
        false,
    )
    .unwrap();
    let measure = MarkovMeasure::normalize(&net, None).unwrap();
    let counts = PathCounts::from_paths(&[2, 2], &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    let el = reconstruct(&counts, &measure).unwrap();
    for x in uniform_points::<f64>(1, 20, 2) {
        assert!((el.net_tilde.evaluate(&x).unwrap() - net.evaluate(&x).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn pruning_caps_widths() {
    let net = random_network::<f64>(&[100, 100, 4], 8, false).unwrap();
    let measure = MarkovMeasure::normalize(&net, None).unwrap();
    let el = reconstruct(&measure.sample_paths(3, 1), &measure).unwrap();
    assert!(el.active_dims[..2].iter().all(|&d| d <= 6));
}

#[test]
fn single_draw_error_is_range_bounded() {
    let net = random_network::<f64>(&[6, 4], 4, false).unwrap();
    let v = full_variation(&net);
    let measure = MarkovMeasure::normalize(&net, None).unwrap();
    let el = reconstruct(&measure.sample_paths(5, 77), &measure).unwrap();
    let e = empirical_error(&net, &el, &uniform_points(2, 64, 1)).unwrap();
    assert!(e.is_finite() && e <= 4.0 * v * v);
}

#[test]
fn exhaustive_cover_is_within_cardinality_bound() {
    let net = random_network::<f64>(&[4, 4], 13, false).unwrap();
    let measure = MarkovMeasure::normalize(&net, None).unwrap();
    let all = enumerate_count_vectors(&measure.layer_dims(), 3, 10_000).unwrap();
    assert_eq!(all.len(), 816);
    let probe: Vec<Point> = uniform_points(2, 8, 0);
    let mut distinct = HashSet::new();
    for c in &all {
        let el = reconstruct(c, &measure).unwrap();
        let key: Vec<u64> = probe.iter().map(|x| el.net_tilde.evaluate(x).unwrap().to_bits()).collect();
        distinct.insert(key);
    }
    let bound = improved_log_cardinality(2, 3, d_bar(&net.dims()), 2).unwrap().value.exp();
    assert!(distinct.len() as f64 <= bound);
    assert!(enumerate_count_vectors(&measure.layer_dims(), 3, 100).is_err());
}
