//! Path-mass bookkeeping for ramp networks.
//!
//! Layers of nodes are indexed `ℓ = 0..L`, layer 0 being the single output
//! node. For a node `j` of layer `ℓ`:
//!
//! * `V^out_j` is entry `j` of `w0·W_1⋯W_ℓ` (mass flowing from the output down to `j`);
//! * `V^in_j` is entry `j` of `W_{ℓ+1}⋯W_L·1` (mass flowing from `j` down to the inputs).
//!
//! so that `V = Σ_j V^out_j·V^in_j` at every layer.
//!
//! Rescaling node `j` by `c > 0` multiplies its input links (row `j` of
//! `W_{ℓ+1}`) by `c` and divides its output links (column `j` of `W_ℓ`, or `w0`
//! for `ℓ = 0`) by `c`. Only that node's `V^out`/`V^in` pair changes, so
//! scalings at different nodes commute and the products `w_{jk}·V^in_k`
//! entering a reduced input variation are untouched by the scaling of `k`.

use serde::Serialize;

use crate::error::Result;
use crate::network::RampNetwork;
use crate::scalar::Scalar;

/// Which link into a node is removed when forming the reduced input variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LinkSelector {
    /// The link carrying the largest `w_{jk}·V^in_k`; ties go to the lowest `k`.
    #[default]
    Argmax,
    /// The diagonal link `k = j` for `ℓ ≥ 1`, nothing at the output node.
    /// This is the hollow-matrix choice for identity-like weights.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMode {
    Plain,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationSummary<T> {
    #[serde(rename = "V")]
    pub v: T,
    pub v_out_node: Vec<Vec<T>>,
    pub v_in_node: Vec<Vec<T>>,
    pub v_in_red_node: Vec<Vec<T>>,
    pub v_out_layer: Vec<T>,
    pub v_in_layer: Vec<T>,
    pub v_in_red_layer: Vec<T>,
    pub v_bar: T,
    pub v_bar_red: T,
    pub v_composite: T,
    pub v_composite_red: T,
    pub geo_sum_layer: Vec<T>,
    pub selector: LinkSelector,
}

impl<T: Scalar> VariationSummary<T> {
    pub fn depth(&self) -> usize {
        self.v_out_layer.len()
    }

    /// `(1/L)·Σ_ℓ V^out_ℓ`.
    pub fn v_bar_out(&self) -> T {
        mean(&self.v_out_layer)
    }

    /// `(1/L)·Σ_ℓ V^in_ℓ`.
    pub fn v_bar_in(&self) -> T {
        mean(&self.v_in_layer)
    }

    pub fn v_bar_in_red(&self) -> T {
        mean(&self.v_in_red_layer)
    }

    /// `√(V̄^out·V̄^in)`, the average variation reached by the best global rescaling.
    pub fn v_bar_global(&self, mode: VariationMode) -> T {
        let vin = match mode {
            VariationMode::Plain => self.v_bar_in(),
            VariationMode::Reduced => self.v_bar_in_red(),
        };
        (self.v_bar_out() * vin).sqrt()
    }

    /// `(1/L)·Σ_ℓ geo_sum_layer[ℓ]`: the average variation of the canonical form.
    pub fn v_bar_geometric(&self) -> T {
        mean(&self.geo_sum_layer)
    }
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Entrywise ℓ¹ norm of `w0·W_1⋯W_L`, by row-vector products.
pub fn full_variation<T: Scalar>(net: &RampNetwork<T>) -> T {
    let mut row = vec![net.w0()];
    for w in net.weights() {
        row = w.vec_mul(&row);
    }
    row.into_iter().sum()
}

/// `V^out` vectors for layers `0..=L`.
pub fn out_variations<T: Scalar>(net: &RampNetwork<T>) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(net.depth() + 1);
    let mut row = vec![net.w0()];
    for w in net.weights() {
        let next = w.vec_mul(&row);
        out.push(row);
        row = next;
    }
    out.push(row);
    out
}

/// `V^in` vectors for layers `0..=L`; layer `L` is all ones.
pub fn in_variations<T: Scalar>(net: &RampNetwork<T>) -> Vec<Vec<T>> {
    let l = net.depth();
    let mut out = vec![Vec::new(); l + 1];
    out[l] = vec![T::one(); net.weights()[l - 1].cols()];
    for idx in (0..l).rev() {
        out[idx] = net.weights()[idx].mul_vec(&out[idx + 1]);
    }
    out
}

/// Index of the link removed from node `j` of layer `layer` (`0..L`), given the
/// link terms `w_{jk}·V^in_k`.
fn removed_link<T: Scalar>(terms: &[T], layer: usize, j: usize, selector: LinkSelector) -> Option<usize> {
    match selector {
        LinkSelector::Argmax => {
            let mut best: Option<(usize, T)> = None;
            for (k, &t) in terms.iter().enumerate() {
                if best.is_none_or(|(_, b)| t > b) {
                    best = Some((k, t));
                }
            }
            best.map(|(k, _)| k)
        }
        LinkSelector::Diagonal => (layer > 0 && j < terms.len()).then_some(j),
    }
}

/// `V^{in,red}` for layers `0..L`, given `V^in` for layers `0..=L`.
fn reduced_from<T: Scalar>(net: &RampNetwork<T>, v_in: &[Vec<T>], selector: LinkSelector) -> Vec<Vec<T>> {
    let l = net.depth();
    (0..l)
        .map(|layer| {
            let w = &net.weights()[layer];
            (0..w.rows())
                .map(|j| {
                    let terms: Vec<T> = w
                        .row(j)
                        .iter()
                        .zip(&v_in[layer + 1])
                        .map(|(&a, &b)| a * b)
                        .collect();
                    let skip = removed_link(&terms, layer, j, selector);
                    terms
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| Some(k) != skip)
                        .map(|(_, &t)| t)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Reduced input variations `V^{in,red}_{j_ℓ}` for `ℓ = 0..L`.
pub fn reduced_input_variations<T: Scalar>(net: &RampNetwork<T>, selector: LinkSelector) -> Vec<Vec<T>> {
    let v_in = in_variations(net);
    reduced_from(net, &v_in, selector)
}

pub fn subnetwork_variations<T: Scalar>(net: &RampNetwork<T>) -> VariationSummary<T> {
    subnetwork_variations_with(net, LinkSelector::Argmax)
}

pub fn subnetwork_variations_with<T: Scalar>(net: &RampNetwork<T>, selector: LinkSelector) -> VariationSummary<T> {
    let l = net.depth();
    let mut v_out = out_variations(net);
    let mut v_in = in_variations(net);
    let v_in_red = reduced_from(net, &v_in, selector);
    v_out.truncate(l);
    v_in.truncate(l);
    let v = v_out[0][0] * v_in[0][0];

    let sum = |xs: &Vec<T>| xs.iter().copied().sum::<T>();
    let v_out_layer: Vec<T> = v_out.iter().map(sum).collect();
    let v_in_layer: Vec<T> = v_in.iter().map(sum).collect();
    let v_in_red_layer: Vec<T> = v_in_red.iter().map(sum).collect();
    let geo_sum_layer = v_out
        .iter()
        .zip(&v_in)
        .map(|(o, i)| o.iter().zip(i).map(|(&a, &b)| (a * b).sqrt()).sum())
        .collect();

    let two = T::of(2.0);
    let layer_avg = |ins: &[T]| {
        v_out_layer
            .iter()
            .zip(ins)
            .map(|(&a, &b)| (a + b) / two)
            .sum::<T>()
            / T::of_usize(l)
    };
    let v_bar = layer_avg(&v_in_layer);
    let v_bar_red = layer_avg(&v_in_red_layer);
    let root_v = v.sqrt();
    VariationSummary {
        v,
        v_out_node: v_out,
        v_in_node: v_in,
        v_in_red_node: v_in_red,
        v_out_layer,
        v_in_layer,
        v_in_red_layer,
        v_bar,
        v_bar_red,
        v_composite: v_bar * root_v,
        v_composite_red: v_bar_red * root_v,
        geo_sum_layer,
        selector,
    }
}

/// `(V̄, v)` with `v = V̄·√V`; reduced mode uses `V^{in,red}` in place of `V^in`.
pub fn average_variation<T: Scalar>(summary: &VariationSummary<T>, mode: VariationMode) -> (T, T) {
    match mode {
        VariationMode::Plain => (summary.v_bar, summary.v_composite),
        VariationMode::Reduced => (summary.v_bar_red, summary.v_composite_red),
    }
}

/// Diagnostics of a rescaling pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaleReport {
    /// `(layer, node)` pairs whose scaling was skipped for a zero numerator or denominator.
    pub skipped: Vec<(usize, usize)>,
    /// Largest `|V^out − V^in|/(V^out + V^in)` over the balanced nodes after rescaling
    /// (reduced input variation in reduced mode; layer or global sums for the coarser forms).
    pub residual: f64,
}

fn apply_scalings<T: Scalar>(net: RampNetwork<T>, layer: usize, c: &[T]) -> RampNetwork<T> {
    let (mut w0, mut weights, clamp) = net.into_parts();
    for (j, &cj) in c.iter().enumerate() {
        if cj == T::one() {
            continue;
        }
        for x in weights[layer].row_mut(j) {
            *x *= cj;
        }
        if layer == 0 {
            w0 /= cj;
        } else {
            let m = &mut weights[layer - 1];
            for i in 0..m.rows() {
                let x = m.get(i, j);
                m.set(i, j, x / cj);
            }
        }
    }
    RampNetwork::from_parts_unchecked(w0, weights, clamp)
}

fn ratio<T: Scalar>(num: T, den: T) -> Option<T> {
    (num > T::zero() && den > T::zero()).then(|| (num / den).sqrt())
}

fn imbalance<T: Scalar>(a: T, b: T) -> f64 {
    let s = a + b;
    if s > T::zero() {
        ((a - b).abs() / s).to_f64_lossy()
    } else {
        0.0
    }
}

/// Node-wise balancing `c_j = √(V^out_j/V^in_j)`, outer layer first.
pub fn rescale_canonical<T: Scalar>(net: &RampNetwork<T>, mode: VariationMode) -> (RampNetwork<T>, RescaleReport) {
    rescale_canonical_with(net, mode, LinkSelector::Argmax)
}

pub fn rescale_canonical_with<T: Scalar>(
    net: &RampNetwork<T>,
    mode: VariationMode,
    selector: LinkSelector,
) -> (RampNetwork<T>, RescaleReport) {
    let mut cur = net.clone();
    let mut skipped = Vec::new();
    for layer in 0..net.depth() {
        let s = subnetwork_variations_with(&cur, selector);
        let ins = match mode {
            VariationMode::Plain => &s.v_in_node[layer],
            VariationMode::Reduced => &s.v_in_red_node[layer],
        };
        let c: Vec<T> = s.v_out_node[layer]
            .iter()
            .zip(ins)
            .enumerate()
            .map(|(j, (&o, &i))| {
                ratio(o, i).unwrap_or_else(|| {
                    skipped.push((layer, j));
                    T::one()
                })
            })
            .collect();
        cur = apply_scalings(cur, layer, &c);
    }
    let s = subnetwork_variations_with(&cur, selector);
    let mut residual = 0.0f64;
    for layer in 0..net.depth() {
        let ins = match mode {
            VariationMode::Plain => &s.v_in_node[layer],
            VariationMode::Reduced => &s.v_in_red_node[layer],
        };
        for (j, (&o, &i)) in s.v_out_node[layer].iter().zip(ins).enumerate() {
            if !skipped.contains(&(layer, j)) {
                residual = residual.max(imbalance(o, i));
            }
        }
    }
    (cur, RescaleReport { skipped, residual })
}

/// One scaling per layer, `c_ℓ = √(V^out_ℓ/V^in_ℓ)`.
pub fn rescale_per_layer<T: Scalar>(net: &RampNetwork<T>) -> (RampNetwork<T>, RescaleReport) {
    let s = subnetwork_variations(net);
    let mut cur = net.clone();
    let mut skipped = Vec::new();
    for layer in 0..net.depth() {
        let c = ratio(s.v_out_layer[layer], s.v_in_layer[layer]).unwrap_or_else(|| {
            skipped.push((layer, 0));
            T::one()
        });
        let cs = vec![c; s.v_out_node[layer].len()];
        cur = apply_scalings(cur, layer, &cs);
    }
    let after = subnetwork_variations(&cur);
    let residual = (0..net.depth())
        .filter(|&l| !skipped.contains(&(l, 0)))
        .map(|l| imbalance(after.v_out_layer[l], after.v_in_layer[l]))
        .fold(0.0, f64::max);
    (cur, RescaleReport { skipped, residual })
}

/// A single scaling `c = √(V̄^out/V̄^in)` at every node.
pub fn rescale_global<T: Scalar>(net: &RampNetwork<T>) -> (RampNetwork<T>, RescaleReport) {
    let s = subnetwork_variations(net);
    let Some(c) = ratio(s.v_bar_out(), s.v_bar_in()) else {
        return (
            net.clone(),
            RescaleReport {
                skipped: vec![(0, 0)],
                residual: 0.0,
            },
        );
    };
    let mut cur = net.clone();
    for layer in 0..net.depth() {
        let cs = vec![c; s.v_out_node[layer].len()];
        cur = apply_scalings(cur, layer, &cs);
    }
    let after = subnetwork_variations(&cur);
    let residual = imbalance(after.v_bar_out(), after.v_bar_in());
    (cur, RescaleReport { skipped: Vec::new(), residual })
}

/// Applies arbitrary positive node scalings, `scales[ℓ][j]` for `ℓ = 0..L`.
pub fn rescale_nodes<T: Scalar>(net: &RampNetwork<T>, scales: &[Vec<T>]) -> Result<RampNetwork<T>> {
    let dims = net.dims();
    if scales.len() != net.depth() || scales.iter().enumerate().any(|(l, c)| c.len() != dims[l]) {
        return Err(crate::Error::Shape("one scale per node of layers 0..L is required".into()));
    }
    if let Some(bad) = scales.iter().flatten().find(|&&c| !(c > T::zero()) || !c.is_finite()) {
        return Err(crate::Error::Validation(format!("node scale {bad} must be positive")));
    }
    let mut cur = net.clone();
    for (layer, c) in scales.iter().enumerate() {
        cur = apply_scalings(cur, layer, c);
    }
    Ok(cur)
}

/// `w0·W_1⋯W_L` as a row vector of composite input weights.
pub fn composite_row<T: Scalar>(net: &RampNetwork<T>) -> Vec<T> {
    out_variations(net).pop().unwrap_or_default()
}
