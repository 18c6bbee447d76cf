//! Penalized least squares over an enumerated cover.

use std::cmp::Ordering;
use std::f64::consts::E;

use dnet_core::bounds::d_bar;
use dnet_core::markov::{enumerate_count_vectors, reconstruct};
use dnet_core::variation::{rescale_canonical, subnetwork_variations, VariationMode};
use dnet_core::{Measure, Network, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, HarnessResult};
use crate::sweep::cover_hash;

#[derive(Debug, Clone)]
pub struct Candidate {
    pub index: usize,
    pub net: Network,
    /// Composite variation of the canonical form.
    pub v: f64,
    pub hash: String,
}

impl Candidate {
    pub fn new(index: usize, net: Network, hash: String) -> Self {
        let canon = rescale_canonical(&net, VariationMode::Plain).0;
        let v = subnetwork_variations(&canon).v_composite;
        Candidate { index, net, v, hash }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEntry {
    pub index: usize,
    pub hash: String,
    pub risk: f64,
    pub penalty: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: RiskEntry,
    pub psi: f64,
    pub n: usize,
    pub trace: Vec<RiskEntry>,
}

/// `((L−2)·ln d̄ + ln(8e·d_in))/n`.
pub fn psi_n(l: usize, d_bar: f64, d_in: usize, n: usize) -> f64 {
    ((l as f64 - 2.0) * d_bar.ln() + (8.0 * E * d_in as f64).ln()) / n as f64
}

/// Argmin of `risk + λ·v·√ψ`; ties go to the smaller penalty, then the lower hash.
pub fn run_penalized_selection(
    data: &[(Point, f64)],
    cover: &[Candidate],
    psi: f64,
    lambda: f64,
) -> HarnessResult<Selection> {
    if cover.is_empty() {
        return Err(HarnessError::config("<select>", "cover", "cover is empty"));
    }
    if data.is_empty() {
        return Err(HarnessError::config("<select>", "data", "no samples"));
    }
    let root = psi.sqrt();
    let trace = cover
        .iter()
        .map(|c| {
            let mut sq = 0.0;
            for (x, y) in data {
                let r = y - c.net.evaluate(x)?;
                sq += r * r;
            }
            let risk = sq / data.len() as f64;
            let penalty = lambda * c.v * root;
            Ok(RiskEntry {
                index: c.index,
                hash: c.hash.clone(),
                risk,
                penalty,
                score: risk + penalty,
            })
        })
        .collect::<HarnessResult<Vec<_>>>()?;
    let selected = trace
        .iter()
        .min_by(|a, b| {
            a.score
                .partial_cmp(&b.score)
                .unwrap_or(Ordering::Equal)
                .then(a.penalty.partial_cmp(&b.penalty).unwrap_or(Ordering::Equal))
                .then_with(|| a.hash.cmp(&b.hash))
        })
        .expect("nonempty")
        .clone();
    Ok(Selection {
        selected,
        psi,
        n: data.len(),
        trace,
    })
}

/// Every cover element at `m` paths for `net`, in enumeration order.
pub fn enumerate_cover(net: &Network, m: usize, guard: u128) -> HarnessResult<Vec<Candidate>> {
    let measure = Measure::normalize(net, None)?;
    enumerate_count_vectors(&measure.layer_dims(), m, guard)?
        .iter()
        .enumerate()
        .map(|(i, counts)| {
            let el = reconstruct(counts, &measure)?;
            Ok(Candidate::new(i, el.net_tilde, cover_hash(net, counts)))
        })
        .collect()
}

/// `y = g(x) + noise` at the given points.
pub fn synthetic_data(truth: &Network, points: &[Point], noise_sd: f64, seed: u64) -> HarnessResult<Vec<(Point, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd)
        .map_err(|e| HarnessError::config("<select>", "noise_sd", e.to_string()))?;
    points
        .iter()
        .map(|x| Ok((x.clone(), truth.evaluate(x)? + noise.sample(&mut rng))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectReport {
    pub cover_size: usize,
    pub truth_index: usize,
    pub truth_hash: String,
    pub noise_variance: f64,
    /// `|risk(selected) − σ²| ≤ 2σ²/√n`; informational only.
    pub within_noise_floor: bool,
    pub selection: Selection,
}

/// Selection experiment described by a config file.
pub fn run_select(cfg: &ExperimentConfig) -> HarnessResult<SelectReport> {
    if cfg.kind != ExperimentKind::Select {
        return Err(HarnessError::config("<config>", "kind", "expected a select experiment"));
    }
    let spec = cfg
        .select
        .as_ref()
        .ok_or_else(|| HarnessError::config("<config>", "select", "missing"))?;
    let net = cfg
        .networks()?
        .into_iter()
        .next()
        .ok_or_else(|| HarnessError::config("<config>", "network", "no network"))?;
    let cover = enumerate_cover(&net, spec.m, spec.cover_guard)?;
    let truth = cover.get(spec.truth_index).ok_or_else(|| {
        HarnessError::config("<config>", "select.truth_index", format!("cover has {} elements", cover.len()))
    })?;
    let pts: Vec<Point> = match &cfg.points {
        crate::config::PointsSource::Uniform { seed, .. } => dnet_core::uniform_points(net.d_in(), spec.n, *seed),
        _ => cfg.points(net.d_in())?,
    };
    let data = synthetic_data(&truth.net, &pts, spec.noise_sd, spec.data_seed)?;
    let psi = psi_n(net.depth(), d_bar(&net.dims()), net.d_in(), data.len());
    let selection = run_penalized_selection(&data, &cover, psi, 1.0)?;
    let s2 = spec.noise_sd * spec.noise_sd;
    Ok(SelectReport {
        cover_size: cover.len(),
        truth_index: spec.truth_index,
        truth_hash: truth.hash.clone(),
        noise_variance: s2,
        within_noise_floor: (selection.selected.risk - s2).abs() <= 2.0 * s2 / (data.len() as f64).sqrt(),
        selection,
    })
}
