//! Deep ramp networks with nonnegative weights and sign-doubled activations.
//!
//! A network of depth `L` is stored as an output weight `w0` and matrices
//! `W_1 … W_L`, where `W_ℓ` is `d_{ℓ-1} × d_ℓ`, `d_0 = 1` and `d_L = 2·d_in`.
//! Negative contributions are expressed by routing through the second half of
//! each layer, whose units output `-max(z, 0)`:
//!
//! ```text
//! f(W, x) = w0 · W_1 φ(W_2 φ(⋯ W_{L-1} φ(W_L x̃)))      x̃ = (x, -x)
//! ```
//!
//! With `output_clamp` the whole output passes through `sgn(z)·min(|z|, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Default cap on the number of paths `d_1·d_2⋯d_L` that
/// [`RampNetwork::evaluate_unravelled`] is willing to enumerate.
pub const DEFAULT_PATH_GUARD: u128 = 1_000_000;

/// A point of the input cube `[-1, 1]^{d_in}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPoint<T>(Vec<T>);

impl<T: Scalar> InputPoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if let Some(c) = coords.iter().find(|c| !(c.abs() <= T::one())) {
            return Err(Error::Validation(format!(
                "input coordinate {c} outside [-1, 1]"
            )));
        }
        Ok(InputPoint(coords))
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `(x_1, …, x_d, -x_1, …, -x_d)`.
pub fn sign_double<T: Scalar>(x: &InputPoint<T>, d_in: usize) -> Result<Vec<T>> {
    if x.dim() != d_in {
        return Err(Error::Shape(format!(
            "input has {} coordinates, expected {d_in}",
            x.dim()
        )));
    }
    let c = x.coords();
    Ok(c.iter().copied().chain(c.iter().map(|&v| -v)).collect())
}

/// Positive part on the first half of `z`, minus the positive part on the second half.
pub fn ramp_vector<T: Scalar>(z: &[T]) -> Result<Vec<T>> {
    if z.len() % 2 != 0 {
        return Err(Error::Shape(format!(
            "ramp needs an even-length vector, got {}",
            z.len()
        )));
    }
    let mut out = z.to_vec();
    ramp_in_place(&mut out);
    Ok(out)
}

pub(crate) fn ramp_in_place<T: Scalar>(z: &mut [T]) {
    let half = z.len() / 2;
    for (i, v) in z.iter_mut().enumerate() {
        let pos = v.max(T::zero());
        *v = if i < half { pos } else { -pos };
    }
}

/// `sgn(z)·min(|z|, 1)`.
pub fn clamp_output<T: Scalar>(z: T) -> T {
    z.max(-T::one()).min(T::one())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RampNetwork<T> {
    w0: T,
    weights: Vec<Matrix<T>>,
    output_clamp: bool,
}

impl<T: Scalar> RampNetwork<T> {
    /// Validates shapes, evenness of the hidden and input layers, and strict
    /// nonnegativity of every weight.
    pub fn new(w0: T, weights: Vec<Matrix<T>>, output_clamp: bool) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Validation("network needs at least one layer".into()));
        }
        if !(w0 >= T::zero()) || !w0.is_finite() {
            return Err(Error::Validation(format!("w0 = {w0} must be a finite nonnegative number")));
        }
        if weights[0].rows() != 1 {
            return Err(Error::Validation(format!(
                "W_1 must be a row vector, got {} rows",
                weights[0].rows()
            )));
        }
        for (idx, w) in weights.iter().enumerate() {
            let layer = idx + 1;
            if w.cols() == 0 {
                return Err(Error::Validation(format!("W_{layer} has no columns")));
            }
            if idx > 0 && w.rows() != weights[idx - 1].cols() {
                return Err(Error::Validation(format!(
                    "W_{layer} has {} rows but layer {} has {} units",
                    w.rows(),
                    idx,
                    weights[idx - 1].cols()
                )));
            }
            if w.cols() % 2 != 0 {
                return Err(Error::Validation(format!(
                    "layer {layer} has odd width {}",
                    w.cols()
                )));
            }
            if let Some(bad) = w.as_slice().iter().find(|&&x| !(x >= T::zero()) || !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "W_{layer} has entry {bad}; weights must be finite and nonnegative"
                )));
            }
        }
        Ok(RampNetwork {
            w0,
            weights,
            output_clamp,
        })
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    /// `d_0, d_1, …, d_L` with `d_0 = 1`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.weights.iter().map(Matrix::cols))
            .collect()
    }

    pub fn d_in(&self) -> usize {
        self.weights.last().map_or(0, |w| w.cols() / 2)
    }

    pub fn w0(&self) -> T {
        self.w0
    }

    /// `W_ℓ` for `ℓ = 1..=L`.
    pub fn layer(&self, l: usize) -> &Matrix<T> {
        &self.weights[l - 1]
    }

    pub fn weights(&self) -> &[Matrix<T>] {
        &self.weights
    }

    pub fn output_clamp(&self) -> bool {
        self.output_clamp
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.output_clamp = clamp;
        self
    }

    /// Number of root-to-input paths `d_1·d_2⋯d_L`, saturating.
    pub fn path_count(&self) -> u128 {
        self.weights
            .iter()
            .fold(1u128, |acc, w| acc.saturating_mul(w.cols() as u128))
    }

    pub(crate) fn into_parts(self) -> (T, Vec<Matrix<T>>, bool) {
        (self.w0, self.weights, self.output_clamp)
    }

    pub(crate) fn from_parts_unchecked(w0: T, weights: Vec<Matrix<T>>, output_clamp: bool) -> Self {
        RampNetwork {
            w0,
            weights,
            output_clamp,
        }
    }

    fn finish(&self, inner: T) -> T {
        let out = self.w0 * inner;
        if self.output_clamp {
            clamp_output(out)
        } else {
            out
        }
    }

    /// Layered evaluation, innermost layer first.
    pub fn evaluate(&self, x: &InputPoint<T>) -> Result<T> {
        let mut z = sign_double(x, self.d_in())?;
        for w in self.weights[1..].iter().rev() {
            z = w.mul_vec(&z);
            ramp_in_place(&mut z);
        }
        let inner = self.weights[0].mul_vec(&z)[0];
        Ok(self.finish(inner))
    }

    /// Evaluates the tree obtained by unravelling every root-to-input path and
    /// pushing the composite path weight down to the input, as the brute-force
    /// counterpart of [`evaluate`](Self::evaluate).
    pub fn evaluate_unravelled(&self, x: &InputPoint<T>, path_guard: u128) -> Result<T> {
        let paths = self.path_count();
        if paths > path_guard {
            return Err(Error::ResourceLimit(format!(
                "{paths} paths exceed the enumeration guard {path_guard}"
            )));
        }
        let xt = sign_double(x, self.d_in())?;
        let d1 = self.weights[0].cols();
        let mut total = T::zero();
        for j1 in 0..d1 {
            let prefix = self.w0 * self.weights[0].get(0, j1);
            total += self.subtree(1, j1, prefix, &xt);
        }
        // The composite weights already carry w0.
        Ok(if self.output_clamp {
            clamp_output(total)
        } else {
            total
        })
    }

    /// Value of the unravelled node reached by a path ending at unit `j` of
    /// layer `layer`, with composite weight `prefix` accumulated so far.
    fn subtree(&self, layer: usize, j: usize, prefix: T, xt: &[T]) -> T {
        let l = self.depth();
        if layer == l {
            return prefix * xt[j];
        }
        let w = &self.weights[layer];
        let mut sum = T::zero();
        for k in 0..w.cols() {
            sum += self.subtree(layer + 1, k, prefix * w.get(j, k), xt);
        }
        let pos = sum.max(T::zero());
        if j < w.rows() / 2 {
            pos
        } else {
            -pos
        }
    }

    /// Network whose weights are `self`'s with every entry multiplied by `c`
    /// on all layers; used for scaling tests.
    pub fn scaled(&self, c: T) -> Result<Self> {
        RampNetwork::new(
            self.w0 * c,
            self.weights.iter().map(|w| w.scale(c)).collect(),
            self.output_clamp,
        )
    }
}

/// Network with widths `[1, widths…]` (the last one is `2·d_in`) and
/// `w0` and every weight drawn iid uniform on `[0, 1]` from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn random_network<T: Scalar>(widths: &[usize], seed: u64, output_clamp: bool) -> Result<RampNetwork<T>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w0 = T::of(rng.random::<f64>());
    let mut weights = Vec::with_capacity(widths.len());
    let mut rows = 1;
    for &cols in widths {
        let data = (0..rows * cols).map(|_| T::of(rng.random::<f64>())).collect();
        weights.push(Matrix::from_vec(rows, cols, data)?);
        rows = cols;
    }
    RampNetwork::new(w0, weights, output_clamp)
}

/// `n` points iid uniform on `[-1, 1]^{d_in}`.
pub fn uniform_points<T: Scalar>(d_in: usize, n: usize, seed: u64) -> Vec<InputPoint<T>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| InputPoint((0..d_in).map(|_| T::of(rng.random_range(-1.0..=1.0))).collect()))
        .collect()
}

/// On-disk representation of a network.
///
/// ```json
/// { "depth": 2, "dims": [1, 2, 2], "w0": 1.0,
///   "weights": [[[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]],
///   "clamp": false }
/// ```
///
/// `weights[ℓ-1]` lists the rows of `W_ℓ`; `dims` must equal `[1, cols(W_1), …, cols(W_L)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub depth: usize,
    pub dims: Vec<usize>,
    pub w0: f64,
    pub weights: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub clamp: bool,
}

impl NetworkSpec {
    pub fn to_network<T: Scalar>(&self) -> Result<RampNetwork<T>> {
        if self.weights.len() != self.depth {
            return Err(Error::Format(format!(
                "depth {} but {} weight matrices",
                self.depth,
                self.weights.len()
            )));
        }
        if self.dims.len() != self.depth + 1 {
            return Err(Error::Format(format!(
                "depth {} needs {} dims, got {}",
                self.depth,
                self.depth + 1,
                self.dims.len()
            )));
        }
        let mut mats = Vec::with_capacity(self.depth);
        for (idx, rows) in self.weights.iter().enumerate() {
            let converted: Vec<Vec<T>> = rows
                .iter()
                .map(|r| r.iter().map(|&v| T::of(v)).collect())
                .collect();
            let m = Matrix::from_rows(&converted)
                .map_err(|e| Error::Format(format!("W_{}: {e}", idx + 1)))?;
            if m.rows() != self.dims[idx] || m.cols() != self.dims[idx + 1] {
                return Err(Error::Format(format!(
                    "W_{} is {}x{} but dims say {}x{}",
                    idx + 1,
                    m.rows(),
                    m.cols(),
                    self.dims[idx],
                    self.dims[idx + 1]
                )));
            }
            mats.push(m);
        }
        RampNetwork::new(T::of(self.w0), mats, self.clamp)
    }

    pub fn from_network<T: Scalar>(net: &RampNetwork<T>) -> Self {
        NetworkSpec {
            depth: net.depth(),
            dims: net.dims(),
            w0: net.w0().to_f64_lossy(),
            weights: net
                .weights()
                .iter()
                .map(|m| {
                    m.to_rows()
                        .into_iter()
                        .map(|r| r.into_iter().map(Scalar::to_f64_lossy).collect())
                        .collect()
                })
                .collect(),
            clamp: net.output_clamp(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network spec serializes")
    }
}
