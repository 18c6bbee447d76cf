//! Monte Carlo sweeps of the path-sampling approximation.

use std::time::Instant;

use dnet_core::markov::{empirical_error, reconstruct, refined_bound, SigmaMode};
use dnet_core::spectral::fit_slope;
use dnet_core::{Measure, Network, NetworkSpec, PathCounts, Point};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, HarnessResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Index of the network in the experiment.
    pub net: usize,
    pub seed: u64,
    pub m: usize,
    pub empirical_error: f64,
    pub bound2: Option<f64>,
    pub bound3: Option<f64>,
    pub refined: f64,
    /// First 16 hex digits of SHA-256 over the network and the seed-free counts.
    pub cover_hash: String,
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub net: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub refined: f64,
    pub bound2: Option<f64>,
    pub bound3: Option<f64>,
    /// `mean ≤ refined·(1 + 3/√trials)`.
    pub certificate: bool,
    pub min_le_mean: bool,
    /// `None` when the bound is not defined.
    pub mean_le_bound2: Option<bool>,
    pub mean_le_bound3: Option<bool>,
    pub refined_le_bound2: Option<bool>,
}

impl CellSummary {
    pub fn all_pass(&self) -> bool {
        self.certificate
            && self.min_le_mean
            && self.mean_le_bound2 != Some(false)
            && self.mean_le_bound3 != Some(false)
            && self.refined_le_bound2 != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub net: usize,
    /// Slope of `ln(mean error)` against `ln M`; absent if some mean is zero.
    pub slope_mean: Option<f64>,
    pub slope_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub m_grid: Vec<usize>,
    pub seeds: usize,
    pub cells: Vec<CellSummary>,
    pub decay: Vec<DecaySummary>,
    pub all_pass: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

fn hex16(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Stable identifier of the cover element built from `counts` on `net`.
pub fn cover_hash(net: &Network, counts: &PathCounts) -> String {
    let mut h = Sha256::new();
    h.update(NetworkSpec::from_network(net).to_json().as_bytes());
    h.update(b"\n");
    h.update(serde_json::to_string(&counts.cover_key()).expect("counts serialize").as_bytes());
    hex16(&h.finalize())
}

type TrialOutcome = (usize, u64, f64, String, Option<f64>);

fn trial(net: &Network, measure: &Measure, points: &[Point], m: usize, seed: u64, timing: bool) -> HarnessResult<TrialOutcome> {
    let start = timing.then(Instant::now);
    let counts = measure.sample_paths(m, seed);
    let el = reconstruct(&counts, measure)?;
    let err = empirical_error(net, &el, points)?;
    let wall = start.map(|s| s.elapsed().as_secs_f64() * 1e3);
    Ok((m, seed, err, cover_hash(net, &counts), wall))
}

/// Recomputes the error of a recorded trial from scratch.
pub fn replay_trial(net: &Network, points: &[Point], record: &TrialRecord) -> HarnessResult<(f64, String)> {
    let measure = Measure::normalize(net, None)?;
    let counts = measure.sample_paths(record.m, record.seed);
    let el = reconstruct(&counts, &measure)?;
    Ok((empirical_error(net, &el, points)?, cover_hash(net, &counts)))
}

/// Runs every `(net, M, seed)` trial; records come back ordered by net, then M, then seed.
pub fn run_sweep(
    nets: &[Network],
    points: &[Point],
    m_grid: &[usize],
    seeds: &[u64],
    sigma_mode: SigmaMode,
    timing: bool,
) -> HarnessResult<SweepResult> {
    if nets.is_empty() || m_grid.is_empty() || seeds.is_empty() {
        return Err(HarnessError::config("<sweep>", "grid", "networks, M grid and seeds must be nonempty"));
    }
    let measures: Vec<Measure> = nets
        .iter()
        .map(|n| Measure::normalize(n, None))
        .collect::<Result<_, _>>()?;
    let mut bounds = Vec::new();
    for net in nets {
        let row = m_grid
            .par_iter()
            .map(|&m| refined_bound(net, m, sigma_mode, points, None))
            .collect::<Result<Vec<_>, _>>()?;
        bounds.push(row);
    }

    let tasks: Vec<(usize, usize, u64)> = (0..nets.len())
        .flat_map(|n| (0..m_grid.len()).flat_map(move |mi| seeds.iter().map(move |&s| (n, mi, s))))
        .collect();
    let raw = tasks
        .par_iter()
        .map(|&(n, mi, s)| trial(&nets[n], &measures[n], points, m_grid[mi], s, timing).map(|t| (n, mi, t)))
        .collect::<HarnessResult<Vec<_>>>()?;

    let records: Vec<TrialRecord> = raw
        .into_iter()
        .map(|(n, mi, (m, seed, err, hash, wall))| {
            let b = &bounds[n][mi];
            TrialRecord {
                net: n,
                seed,
                m,
                empirical_error: err,
                bound2: b.bound2,
                bound3: b.bound3,
                refined: b.refined,
                cover_hash: hash,
                wall_time_ms: wall,
            }
        })
        .collect();
    let summary = summarize(&records)?;
    Ok(SweepResult { records, summary })
}

/// Rebuilds the summary from the records alone.
pub fn summarize(records: &[TrialRecord]) -> HarnessResult<SweepSummary> {
    if records.is_empty() {
        return Err(HarnessError::Output("no records to summarize".into()));
    }
    let mut keys: Vec<(usize, usize)> = records.iter().map(|r| (r.net, r.m)).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut m_grid: Vec<usize> = keys.iter().map(|k| k.1).collect();
    m_grid.sort_unstable();
    m_grid.dedup();

    let mut cells = Vec::with_capacity(keys.len());
    for &(net, m) in &keys {
        let cell: Vec<&TrialRecord> = records.iter().filter(|r| r.net == net && r.m == m).collect();
        let n = cell.len();
        let errs = cell.iter().map(|r| r.empirical_error);
        let mean = errs.clone().sum::<f64>() / n as f64;
        let min = errs.clone().fold(f64::INFINITY, f64::min);
        let max = errs.fold(f64::NEG_INFINITY, f64::max);
        let first = cell[0];
        let slack = 1.0 + 3.0 / (n as f64).sqrt();
        cells.push(CellSummary {
            net,
            m,
            trials: n,
            mean_error: mean,
            min_error: min,
            max_error: max,
            refined: first.refined,
            bound2: first.bound2,
            bound3: first.bound3,
            certificate: mean <= first.refined * slack,
            min_le_mean: min <= mean,
            mean_le_bound2: first.bound2.map(|b| mean <= b),
            mean_le_bound3: first.bound3.map(|b| mean <= b),
            refined_le_bound2: first.bound2.map(|b| first.refined <= b),
        });
    }

    let mut nets: Vec<usize> = keys.iter().map(|k| k.0).collect();
    nets.dedup();
    let decay = nets
        .iter()
        .map(|&net| {
            let rows: Vec<&CellSummary> = cells.iter().filter(|c| c.net == net).collect();
            let slope = |pick: fn(&CellSummary) -> f64| -> Option<f64> {
                if rows.len() < 2 || rows.iter().any(|c| pick(c) <= 0.0) {
                    return None;
                }
                let xs: Vec<f64> = rows.iter().map(|c| (c.m as f64).ln()).collect();
                let ys: Vec<f64> = rows.iter().map(|c| pick(c).ln()).collect();
                fit_slope(&xs, &ys)
            };
            DecaySummary {
                net,
                slope_mean: slope(|c| c.mean_error),
                slope_min: slope(|c| c.min_error),
            }
        })
        .collect();

    let seeds = cells.iter().map(|c| c.trials).max().unwrap_or(0);
    let all_pass = cells.iter().all(CellSummary::all_pass);
    Ok(SweepSummary {
        m_grid,
        seeds,
        cells,
        decay,
        all_pass,
    })
}

/// Sweep described by a config file.
pub fn run_theorem1_sweep(cfg: &ExperimentConfig) -> HarnessResult<(SweepResult, Vec<Network>, Vec<Point>)> {
    if cfg.kind != ExperimentKind::Theorem1 {
        return Err(HarnessError::config("<config>", "kind", "expected a theorem1 experiment"));
    }
    let nets = cfg.networks()?;
    let d_in = nets[0].d_in();
    if nets.iter().any(|n| n.d_in() != d_in) {
        return Err(HarnessError::config("<config>", "network", "networks disagree on input dimension"));
    }
    let points = cfg.points(d_in)?;
    let result = run_sweep(&nets, &points, &cfg.m_grid, &cfg.seeds.values(), cfg.sigma_mode, cfg.timing)?;
    Ok((result, nets, points))
}
