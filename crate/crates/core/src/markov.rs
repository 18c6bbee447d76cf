//! Normalized path measures, path sampling and sparse reconstruction.
//!
//! Dividing the composite path weights by `V` turns a network into a Markov
//! chain over paths `(j_1, …, j_L)`:
//!
//! ```text
//! a_{j1}      = w0·w_{j1}·V^in_{j1} / V
//! a_{k | j}   = w_{jk}·V^in_k / V^in_j
//! ```
//!
//! and `f(W, x) = V·f(a, x)` with `f(a, x) = Σ_{j1} a_{j1} z_{j1}(x)`, where `z`
//! are the unit outputs of the normalized network (`|z| ≤ 1`). With a budget
//! `V' > V` the scale is `V'` and the missing mass `1 − V/V'` sits on a null
//! path whose output is zero.
//!
//! Sampling draws `M` paths ancestrally with [`rand_chacha::ChaCha8Rng`]
//! seeded by `seed_from_u64(seed)`: one uniform `f64` per layer, inverted
//! against the cumulative row by binary search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{ramp_in_place, sign_double, InputPoint, RampNetwork};
use crate::scalar::Scalar;
use crate::variation::{in_variations, subnetwork_variations, subnetwork_variations_with, LinkSelector};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure<T> {
    /// `initial[0]` is the null mass, `initial[1 + j]` is `a_{j1 = j}`.
    pub initial: Vec<T>,
    /// `transitions[i]` is `a_{j_{i+2} | j_{i+1}}`, of shape `d_{i+1} × d_{i+2}`.
    pub transitions: Vec<Matrix<T>>,
    pub scale_v: T,
    pub null_mass: T,
    pub output_clamp: bool,
}

impl<T: Scalar> MarkovMeasure<T> {
    /// Builds the measure of `net`, optionally at a variation budget `budget_v ≥ V`.
    pub fn normalize(net: &RampNetwork<T>, budget_v: Option<T>) -> Result<Self> {
        let v_in = in_variations(net);
        let w1 = net.layer(1).row(0);
        let unnormalized: Vec<T> = w1.iter().zip(&v_in[1]).map(|(&w, &vi)| net.w0() * w * vi).collect();
        let v: T = unnormalized.iter().copied().sum();
        if !(v > T::zero()) {
            return Err(Error::DegenerateMeasure("network has zero variation".into()));
        }
        let scale = match budget_v {
            None => v,
            Some(b) => {
                if !b.is_finite() || b < v * (T::one() - T::of(1e-12)) {
                    return Err(Error::Validation(format!("budget {b} is below the variation {v}")));
                }
                b.max(v)
            }
        };
        let null_mass = T::one() - v / scale;
        let mut initial = Vec::with_capacity(unnormalized.len() + 1);
        initial.push(null_mass);
        initial.extend(unnormalized.iter().map(|&u| u / scale));

        let transitions = (1..net.depth())
            .map(|layer| {
                let w = &net.weights()[layer];
                let mut t = Matrix::zeros(w.rows(), w.cols());
                for j in 0..w.rows() {
                    let denom = v_in[layer][j];
                    if denom > T::zero() {
                        for k in 0..w.cols() {
                            t.set(j, k, w.get(j, k) * v_in[layer + 1][k] / denom);
                        }
                    }
                }
                t
            })
            .collect();
        Ok(MarkovMeasure {
            initial,
            transitions,
            scale_v: scale,
            null_mass,
            output_clamp: net.output_clamp(),
        })
    }

    pub fn depth(&self) -> usize {
        self.transitions.len() + 1
    }

    /// `d_1, …, d_L`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.initial.len() - 1];
        dims.extend(self.transitions.iter().map(Matrix::cols));
        dims
    }

    pub fn d_in(&self) -> usize {
        self.layer_dims().last().copied().unwrap_or(0) / 2
    }

    /// Non-null node marginals `a_{j_ℓ}` for `ℓ = 1..=L`.
    pub fn node_marginals(&self) -> Vec<Vec<T>> {
        let mut out = vec![self.initial[1..].to_vec()];
        for t in &self.transitions {
            let next = t.vec_mul(out.last().expect("nonempty"));
            out.push(next);
        }
        out
    }

    /// Unit outputs `z_{j_ℓ}(a, x)` for `ℓ = 1..=L`; layer `L` is `x̃`.
    pub fn subnetwork_outputs(&self, x: &InputPoint<T>) -> Result<Vec<Vec<T>>> {
        let l = self.depth();
        let mut out = vec![Vec::new(); l];
        out[l - 1] = sign_double(x, self.d_in())?;
        for idx in (0..l - 1).rev() {
            let mut z = self.transitions[idx].mul_vec(&out[idx + 1]);
            ramp_in_place(&mut z);
            out[idx] = z;
        }
        Ok(out)
    }

    /// `f(a, x) = Σ a_{j1} z_{j1}`, unscaled and unclamped.
    pub fn evaluate_normalized(&self, x: &InputPoint<T>) -> Result<T> {
        let z = self.subnetwork_outputs(x)?;
        Ok(self.initial[1..].iter().zip(&z[0]).map(|(&a, &b)| a * b).sum())
    }

    fn cdfs(&self) -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
        fn cdf<T: Scalar>(row: &[T]) -> Vec<f64> {
            let mut acc = 0.0;
            row.iter()
                .map(|&p| {
                    acc += p.to_f64_lossy();
                    acc
                })
                .collect()
        }
        let initial = cdf(&self.initial);
        let rows = self
            .transitions
            .iter()
            .map(|t| (0..t.rows()).map(|j| cdf(t.row(j))).collect())
            .collect();
        (initial, rows)
    }

    /// Draws `m` paths and keeps only their node and pairwise counts.
    pub fn sample_paths(&self, m: usize, seed: u64) -> PathCounts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (init_cdf, trans_cdf) = self.cdfs();
        let mut counts = PathCounts::empty(&self.layer_dims(), m, seed);
        let mut path = Vec::with_capacity(self.depth());
        for _ in 0..m {
            let first = draw(&init_cdf, &mut rng);
            if first == 0 {
                counts.null += 1;
                continue;
            }
            path.clear();
            path.push(first - 1);
            for cdf in &trans_cdf {
                let j = *path.last().expect("nonempty");
                path.push(draw(&cdf[j], &mut rng));
            }
            counts.add_path(&path);
        }
        counts
    }
}

/// Index `i` with `cdf[i-1] ≤ u·total < cdf[i]`, skipping zero-mass entries.
fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cdf.last().expect("nonempty distribution");
    let u = rng.random::<f64>() * total;
    let idx = cdf.partition_point(|&c| c <= u);
    if idx < cdf.len() {
        return idx;
    }
    // u·total rounded up to the total: take the last entry with mass.
    let mut i = cdf.len() - 1;
    while i > 0 && cdf[i - 1] == cdf[i] {
        i -= 1;
    }
    i
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PathCounts {
    pub m: usize,
    pub seed: u64,
    /// Paths that landed on the null index.
    pub null: usize,
    /// `node[ℓ-1][j] = K_{j_ℓ}` for `ℓ = 1..=L`.
    pub node: Vec<Vec<usize>>,
    /// `pairwise[ℓ-1]` holds `K_{j_ℓ, j_{ℓ+1}}` for `ℓ = 1..L`.
    pub pairwise: Vec<Vec<Vec<usize>>>,
}

impl PathCounts {
    pub fn empty(layer_dims: &[usize], m: usize, seed: u64) -> Self {
        PathCounts {
            m,
            seed,
            null: 0,
            node: layer_dims.iter().map(|&d| vec![0; d]).collect(),
            pairwise: layer_dims
                .windows(2)
                .map(|w| vec![vec![0; w[1]]; w[0]])
                .collect(),
        }
    }

    /// Counts of an explicit list of non-null paths `(j_1, …, j_L)`.
    pub fn from_paths(layer_dims: &[usize], paths: &[Vec<usize>]) -> Self {
        let mut c = PathCounts::empty(layer_dims, paths.len(), 0);
        for p in paths {
            c.add_path(p);
        }
        c
    }

    fn add_path(&mut self, path: &[usize]) {
        for (layer, &j) in path.iter().enumerate() {
            self.node[layer][j] += 1;
        }
        for (layer, w) in path.windows(2).enumerate() {
            self.pairwise[layer][w[0]][w[1]] += 1;
        }
    }

    /// Checks the bookkeeping identities between node, pairwise and total counts.
    pub fn is_consistent(&self) -> bool {
        let totals_ok = self.node.iter().all(|n| self.null + n.iter().sum::<usize>() == self.m);
        let rows_ok = self.pairwise.iter().enumerate().all(|(layer, k)| {
            k.iter().enumerate().all(|(j, row)| row.iter().sum::<usize>() == self.node[layer][j])
                && (0..self.node[layer + 1].len())
                    .all(|c| k.iter().map(|row| row[c]).sum::<usize>() == self.node[layer + 1][c])
        });
        totals_ok && rows_ok
    }

    /// The counts with the seed zeroed, identifying the cover element.
    pub fn cover_key(&self) -> PathCounts {
        PathCounts { seed: 0, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoverElement<T> {
    pub tilde_a: MarkovMeasure<T>,
    pub net_tilde: RampNetwork<T>,
    /// `d_1^new, …, d_L^new`.
    pub active_dims: Vec<usize>,
}

/// Rebuilds `ã` from counts and the pruned network `W̃` with `f(W̃, x) = V·f(ã, x)`.
pub fn reconstruct<T: Scalar>(counts: &PathCounts, measure: &MarkovMeasure<T>) -> Result<SparseCoverElement<T>> {
    reconstruct_with(counts, measure, true)
}

pub fn reconstruct_with<T: Scalar>(
    counts: &PathCounts,
    measure: &MarkovMeasure<T>,
    prune: bool,
) -> Result<SparseCoverElement<T>> {
    let dims = measure.layer_dims();
    if counts.node.len() != dims.len() || counts.node.iter().zip(&dims).any(|(n, &d)| n.len() != d) {
        return Err(Error::Shape("counts do not match the measure's layers".into()));
    }
    if counts.m == 0 {
        return Err(Error::Validation("cannot reconstruct from zero paths".into()));
    }
    let m = T::of_usize(counts.m);
    let mut initial = Vec::with_capacity(dims[0] + 1);
    initial.push(T::of_usize(counts.null) / m);
    initial.extend(counts.node[0].iter().map(|&k| T::of_usize(k) / m));
    let transitions: Vec<Matrix<T>> = counts
        .pairwise
        .iter()
        .enumerate()
        .map(|(layer, k)| {
            let mut t = Matrix::zeros(k.len(), dims[layer + 1]);
            for (j, row) in k.iter().enumerate() {
                let kj = counts.node[layer][j];
                if kj > 0 {
                    for (c, &kjc) in row.iter().enumerate() {
                        t.set(j, c, T::of_usize(kjc) / T::of_usize(kj));
                    }
                }
            }
            t
        })
        .collect();
    let tilde_a = MarkovMeasure {
        null_mass: initial[0],
        initial,
        transitions,
        scale_v: measure.scale_v,
        output_clamp: measure.output_clamp,
    };

    // Index maps for layers 1..L-1; the input layer keeps every unit.
    let l = dims.len();
    let maps: Vec<Vec<Option<usize>>> = (0..l)
        .map(|layer| {
            if !prune || layer == l - 1 {
                (0..dims[layer]).map(Some).collect()
            } else {
                prune_map(&counts.node[layer])
            }
        })
        .collect();
    let new_dims: Vec<usize> = (0..l)
        .map(|layer| {
            if !prune || layer == l - 1 {
                dims[layer]
            } else {
                pruned_width(&counts.node[layer])
            }
        })
        .collect();

    let mut weights = Vec::with_capacity(l);
    let mut w1 = Matrix::zeros(1, new_dims[0]);
    for (j, &p) in tilde_a.initial[1..].iter().enumerate() {
        if let Some(nj) = maps[0][j] {
            w1.set(0, nj, p);
        }
    }
    weights.push(w1);
    for (layer, t) in tilde_a.transitions.iter().enumerate() {
        let mut w = Matrix::zeros(new_dims[layer], new_dims[layer + 1]);
        for j in 0..t.rows() {
            let Some(nj) = maps[layer][j] else { continue };
            for k in 0..t.cols() {
                let p = t.get(j, k);
                if p > T::zero() {
                    let nk = maps[layer + 1][k].expect("reached nodes are kept");
                    w.set(nj, nk, p);
                }
            }
        }
        weights.push(w);
    }
    let net_tilde = RampNetwork::new(measure.scale_v, weights, measure.output_clamp)?;
    Ok(SparseCoverElement {
        tilde_a,
        net_tilde,
        active_dims: new_dims,
    })
}

/// Width after pruning: each half holds `max(#active positive, #active negative, 1)` slots.
fn pruned_width(counts: &[usize]) -> usize {
    let half = counts.len() / 2;
    let pos = counts[..half].iter().filter(|&&k| k > 0).count();
    let neg = counts[half..].iter().filter(|&&k| k > 0).count();
    2 * pos.max(neg).max(1)
}

fn prune_map(counts: &[usize]) -> Vec<Option<usize>> {
    let half = counts.len() / 2;
    let h = pruned_width(counts) / 2;
    let mut next_pos = 0;
    let mut next_neg = h;
    counts
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            (k > 0).then(|| {
                let slot = if j < half { &mut next_pos } else { &mut next_neg };
                *slot += 1;
                *slot - 1
            })
        })
        .collect()
}

/// Mean of `(f(W, x) − f(W̃, x))²` over `points`.
pub fn empirical_error<T: Scalar>(
    net: &RampNetwork<T>,
    element: &SparseCoverElement<T>,
    points: &[InputPoint<T>],
) -> Result<T> {
    if points.is_empty() {
        return Err(Error::Validation("no evaluation points".into()));
    }
    let mut total = T::zero();
    for x in points {
        let d = net.evaluate(x)? - element.net_tilde.evaluate(x)?;
        total += d * d;
    }
    Ok(total / T::of_usize(points.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// `σ ≡ 1`.
    One,
    /// Average over the points of the conditional variance of the child outputs.
    Estimate,
    /// `σ² = 4·(1 − max_k a_{k|j})`.
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedBound<T> {
    pub mode: SigmaMode,
    pub m: usize,
    /// `scale²/M·(σ_0 + Σ_{ℓ≥1} Σ_j σ_j √a_j)²`.
    pub refined: T,
    /// `σ_{j_ℓ}` for `ℓ = 0..L`; layer 0 has the single output node.
    pub sigma: Vec<Vec<T>>,
    /// `(L·v/√M)²`; absent when covering at a budget above `V`.
    pub bound2: Option<T>,
    /// `(2L·v^red/√M)²`; absent when covering at a budget above `V`.
    pub bound3: Option<T>,
    /// `√((M−1)/M)`, the available improvement of the cross terms (not applied).
    pub cross_term_factor: T,
}

fn variance<T: Scalar>(probs: &[T], z: &[T], extra_null: T) -> T {
    // extra_null: probability of an outcome with z = 0 not listed in `probs`.
    let mean: T = probs.iter().zip(z).map(|(&p, &v)| p * v).sum();
    let second: T = probs.iter().zip(z).map(|(&p, &v)| p * v * v).sum();
    let total: T = probs.iter().copied().sum::<T>() + extra_null;
    if total <= T::zero() {
        return T::zero();
    }
    (second / total - (mean / total) * (mean / total)).max(T::zero())
}

/// Per-node `σ_{j_ℓ}` for `ℓ = 0..L`.
pub fn sigma_values<T: Scalar>(
    measure: &MarkovMeasure<T>,
    mode: SigmaMode,
    points: &[InputPoint<T>],
) -> Result<Vec<Vec<T>>> {
    let l = measure.depth();
    let rows = |layer: usize| -> usize {
        if layer == 0 {
            1
        } else {
            measure.transitions[layer - 1].rows()
        }
    };
    match mode {
        SigmaMode::One => Ok((0..l).map(|layer| vec![T::one(); rows(layer)]).collect()),
        SigmaMode::Reduced => {
            let four = T::of(4.0);
            let reduced = |row: &[T]| -> T {
                let total: T = row.iter().copied().sum();
                if total <= T::zero() {
                    return T::zero();
                }
                let max = row.iter().copied().fold(T::zero(), T::max);
                (four * (T::one() - max / total)).max(T::zero()).sqrt()
            };
            let mut out = vec![vec![reduced(&measure.initial)]];
            for t in &measure.transitions {
                out.push((0..t.rows()).map(|j| reduced(t.row(j))).collect());
            }
            Ok(out)
        }
        SigmaMode::Estimate => {
            if points.is_empty() {
                return Err(Error::Validation("sigma estimation needs points".into()));
            }
            let mut acc: Vec<Vec<T>> = (0..l).map(|layer| vec![T::zero(); rows(layer)]).collect();
            for x in points {
                let z = measure.subnetwork_outputs(x)?;
                acc[0][0] += variance(&measure.initial[1..], &z[0], measure.initial[0]);
                for (idx, t) in measure.transitions.iter().enumerate() {
                    for j in 0..t.rows() {
                        acc[idx + 1][j] += variance(t.row(j), &z[idx + 1], T::zero());
                    }
                }
            }
            let n = T::of_usize(points.len());
            Ok(acc
                .into_iter()
                .map(|layer| layer.into_iter().map(|s| (s / n).sqrt()).collect())
                .collect())
        }
    }
}

/// The refined accuracy bound for sampling `m` paths from `net`'s measure.
pub fn refined_bound<T: Scalar>(
    net: &RampNetwork<T>,
    m: usize,
    mode: SigmaMode,
    points: &[InputPoint<T>],
    budget_v: Option<T>,
) -> Result<RefinedBound<T>> {
    if m == 0 {
        return Err(Error::Validation("M must be positive".into()));
    }
    let measure = MarkovMeasure::normalize(net, budget_v)?;
    let sigma = sigma_values(&measure, mode, points)?;
    let marginals = measure.node_marginals();
    let mut inner = sigma[0][0];
    for layer in 1..measure.depth() {
        inner += sigma[layer]
            .iter()
            .zip(&marginals[layer - 1])
            .map(|(&s, &a)| s * a.sqrt())
            .sum::<T>();
    }
    let mt = T::of_usize(m);
    let scale = measure.scale_v;
    let refined = scale * scale / mt * inner * inner;

    let at_budget = measure.null_mass > T::zero();
    let (bound2, bound3) = if at_budget {
        (None, None)
    } else {
        let lt = T::of_usize(net.depth());
        let plain = subnetwork_variations(net);
        let red = subnetwork_variations_with(net, LinkSelector::Argmax);
        let b2 = lt * plain.v_composite / mt.sqrt();
        let b3 = T::of(2.0) * lt * red.v_composite_red / mt.sqrt();
        (Some(b2 * b2), Some(b3 * b3))
    };
    Ok(RefinedBound {
        mode,
        m,
        refined,
        sigma,
        bound2,
        bound3,
        cross_term_factor: ((mt - T::one()) / mt).sqrt(),
    })
}

/// Every multiset of `m` non-null paths over the given layer widths, as counts.
/// Errors when the number of multisets `C(D + m − 1, m)` exceeds `guard`.
pub fn enumerate_count_vectors(layer_dims: &[usize], m: usize, guard: u128) -> Result<Vec<PathCounts>> {
    let d: u128 = layer_dims.iter().map(|&x| x as u128).product();
    let mut total: u128 = 1;
    for i in 0..m as u128 {
        total = total
            .checked_mul(d + i)
            .map(|t| t / (i + 1))
            .ok_or_else(|| Error::ResourceLimit("cover size overflows".into()))?;
        if total > guard {
            return Err(Error::ResourceLimit(format!(
                "more than {guard} count vectors to enumerate"
            )));
        }
    }
    let d = d as usize;
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut path = vec![0; layer_dims.len()];
        for (slot, &w) in path.iter_mut().zip(layer_dims).rev() {
            *slot = idx % w;
            idx /= w;
        }
        path
    };
    let mut out = Vec::with_capacity(total as usize);
    // Nondecreasing sequences of path indices enumerate multisets.
    let mut choice = vec![0usize; m];
    loop {
        let paths: Vec<Vec<usize>> = choice.iter().map(|&i| decode(i)).collect();
        out.push(PathCounts::from_paths(layer_dims, &paths));
        let Some(pos) = (0..m).rev().find(|&p| choice[p] + 1 < d) else {
            break;
        };
        let next = choice[pos] + 1;
        for c in &mut choice[pos..] {
            *c = next;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variation::full_variation;

    fn net25() -> RampNetwork<f64> {
        RampNetwork::new(
            2.0,
            vec![
                Matrix::row_vector(&[1.0, 3.0]),
                Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.25]]).unwrap(),
            ],
            false,
        )
        .unwrap()
    }

    fn single_path() -> RampNetwork<f64> {
        RampNetwork::new(
            1.5,
            vec![
                Matrix::row_vector(&[2.0, 0.0]),
                Matrix::from_rows(&[vec![0.0, 1.0, 0.0, 0.0], vec![0.0; 4]]).unwrap(),
                Matrix::from_rows(&[vec![0.0; 2], vec![0.0, 0.5], vec![0.0; 2], vec![0.0; 2]]).unwrap(),
            ],
            false,
        )
        .unwrap()
    }

    fn pt(v: f64) -> InputPoint<f64> {
        InputPoint::new(vec![v]).unwrap()
    }

    #[test]
    fn normalize_example() {
        let m = MarkovMeasure::normalize(&net25(), None).unwrap();
        assert!((m.initial[1] - 0.4).abs() < 1e-15);
        assert!((m.initial[2] - 0.6).abs() < 1e-15);
        assert_eq!(m.null_mass, 0.0);
        assert!((m.scale_v - 2.5).abs() < 1e-15);
    }

    #[test]
    fn budget_puts_mass_on_null() {
        let m = MarkovMeasure::normalize(&net25(), Some(5.0)).unwrap();
        assert!((m.null_mass - 0.5).abs() < 1e-15);
        assert!((m.initial.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            MarkovMeasure::normalize(&net25(), Some(1.0)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn zero_network_is_degenerate() {
        let z = RampNetwork::new(1.0, vec![Matrix::<f64>::zeros(1, 2)], false).unwrap();
        assert!(matches!(
            MarkovMeasure::normalize(&z, None),
            Err(Error::DegenerateMeasure(_))
        ));
    }

    #[test]
    fn single_path_measure_is_deterministic() {
        let m = MarkovMeasure::normalize(&single_path(), None).unwrap();
        assert_eq!(m.initial, vec![0.0, 1.0, 0.0]);
        let counts = m.sample_paths(37, 9);
        assert_eq!(counts.pairwise[0][0][1], 37);
        assert_eq!(counts.pairwise[1][1][1], 37);
        assert!(counts.is_consistent());
        let el = reconstruct(&counts, &m).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.4, 1.0] {
            let a = single_path().evaluate(&pt(x)).unwrap();
            let b = el.net_tilde.evaluate(&pt(x)).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn normalized_evaluation_scales_back() {
        let net = net25();
        let m = MarkovMeasure::normalize(&net, None).unwrap();
        for x in [-0.7, 0.2, 0.9] {
            let f = net.evaluate(&pt(x)).unwrap();
            let g = m.scale_v * m.evaluate_normalized(&pt(x)).unwrap();
            assert!((f - g).abs() < 1e-14);
        }
    }

    #[test]
    fn pruning_respects_two_m() {
        let mut counts = vec![0usize; 100];
        counts[3] = 1;
        counts[10] = 1;
        counts[77] = 1;
        assert_eq!(pruned_width(&counts), 4);
        let map = prune_map(&counts);
        assert_eq!(map[3], Some(0));
        assert_eq!(map[10], Some(1));
        assert_eq!(map[77], Some(2));
        assert!(pruned_width(&[0, 0, 0, 0]) == 2);
    }

    #[test]
    fn draw_skips_zero_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cdf = [0.0, 0.5, 0.5, 1.0];
        for _ in 0..1000 {
            let i = draw(&cdf, &mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn bound2_arithmetic() {
        // L = 3, v = 2, M = 100
        let b: f64 = (3.0 * 2.0 / 100f64.sqrt()).powi(2);
        assert!((b - 0.36).abs() < 1e-15);
    }

    #[test]
    fn sigma_one_matches_geometric_sums() {
        let net = net25();
        let rb = refined_bound(&net, 10, SigmaMode::One, &[], None).unwrap();
        let s = subnetwork_variations(&net);
        let geo: f64 = s.geo_sum_layer.iter().sum();
        let expect = s.v / 10.0 * geo * geo;
        assert!((rb.refined - expect).abs() < 1e-12 * expect);
        assert!(rb.refined >= 4.0 * full_variation(&net).powi(2) / 10.0 - 1e-12);
    }

    #[test]
    fn enumeration_counts_multisets() {
        // D = 4 paths, M = 2 → C(5, 2) = 10
        let all = enumerate_count_vectors(&[2, 2], 2, 1000).unwrap();
        assert_eq!(all.len(), 10);
        assert!(all.iter().all(PathCounts::is_consistent));
        assert!(enumerate_count_vectors(&[2, 2], 2, 5).is_err());
    }
}
