//! Average variation of structured weight families: constant projections,
//! irreducible Cesàro limits, identity and near-identity stacks, Toeplitz.
//!
//! Every family is a network `w0`, a row vector `W_1`, then square matrices
//! `W_2, …, W_L`. The last width is the sign-doubled input, so `d` must be even.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{power_iteration, Matrix};
use crate::network::RampNetwork;
use crate::variation::{subnetwork_variations_with, LinkSelector, VariationMode};

/// Entries below this are structural zeros in the irreducibility check.
pub const STRUCTURAL_ZERO: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixFamily {
    Projection { t: f64, s: f64 },
    /// Rescaled by its Perron root on use.
    Irreducible { q: Vec<Vec<f64>> },
    /// `W_ℓ = I + Q_ℓ`, one perturbation per layer `2..=L`.
    NearIdentity { perturbations: Vec<Vec<Vec<f64>>> },
    /// `W_ℓ = I + Q̃_ℓ/ℓ`.
    IdentityPlusHarmonic { base: Vec<Vec<Vec<f64>>> },
    ConstantQ { q: Vec<Vec<f64>> },
    /// Symmetric Toeplitz `Q[j][k] = c_{|j−k|}` of size `size`.
    Toeplitz { coeffs: Vec<f64>, size: usize },
}

impl MatrixFamily {
    /// The matrices `W_2, …, W_L` for depth `l`.
    pub fn layers(&self, l: usize) -> Result<Vec<Matrix<f64>>> {
        if l < 2 {
            return Err(Error::Domain("families need depth L ≥ 2".into()));
        }
        let repeat = |q: Matrix<f64>| vec![q; l - 1];
        let fixed_len = |n: usize| {
            if n == l - 1 {
                Ok(())
            } else {
                Err(Error::Shape(format!("{n} perturbations for depth {l}")))
            }
        };
        match self {
            MatrixFamily::Projection { t, s } => Ok(repeat(projection_matrix(*t, *s)?)),
            MatrixFamily::Irreducible { q } => {
                let q = Matrix::from_rows(q)?;
                check_irreducible(&q)?;
                let rho = perron_root(&q);
                Ok(repeat(q.scale(1.0 / rho)))
            }
            MatrixFamily::ConstantQ { q } => Ok(repeat(Matrix::from_rows(q)?)),
            MatrixFamily::NearIdentity { perturbations } => {
                fixed_len(perturbations.len())?;
                perturbations.iter().map(|q| plus_identity(&Matrix::from_rows(q)?, 1.0)).collect()
            }
            MatrixFamily::IdentityPlusHarmonic { base } => {
                fixed_len(base.len())?;
                base.iter()
                    .enumerate()
                    .map(|(i, q)| plus_identity(&Matrix::from_rows(q)?, 1.0 / (i + 2) as f64))
                    .collect()
            }
            MatrixFamily::Toeplitz { coeffs, size } => Ok(repeat(toeplitz(coeffs, *size))),
        }
    }

    pub fn network(&self, l: usize, w0: f64, w1: &[f64]) -> Result<RampNetwork<f64>> {
        let mut weights = vec![Matrix::row_vector(w1)];
        weights.extend(self.layers(l)?);
        RampNetwork::new(w0, weights, false)
    }
}

fn plus_identity(q: &Matrix<f64>, c: f64) -> Result<Matrix<f64>> {
    if q.rows() != q.cols() {
        return Err(Error::Shape(format!("perturbation is {}×{}", q.rows(), q.cols())));
    }
    Matrix::identity(q.rows()).add(&q.scale(c))
}

pub fn projection_matrix(t: f64, s: f64) -> Result<Matrix<f64>> {
    if !(0.0..=1.0).contains(&t) || !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("projection needs t ∈ [0,1], s > 0; got t={t}, s={s}")));
    }
    Matrix::from_rows(&[vec![t, t * (1.0 - t) / s], vec![s, 1.0 - t]])
}

pub fn toeplitz(coeffs: &[f64], size: usize) -> Matrix<f64> {
    let mut m = Matrix::zeros(size, size);
    for j in 0..size {
        for k in 0..size {
            m.set(j, k, coeffs.get(j.abs_diff(k)).copied().unwrap_or(0.0));
        }
    }
    m
}

fn pipeline(net: &RampNetwork<f64>, selector: LinkSelector, mode: VariationMode) -> f64 {
    subnetwork_variations_with(net, selector).v_bar_global(mode)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub l: usize,
    pub v_bar_out: f64,
    pub v_bar_in: f64,
    pub v_bar_exact: f64,
    /// `√(W0·‖W_1Q‖₁·‖Q‖₁)`.
    pub v_bar_asymptotic: f64,
    /// `√(V̄^out·V̄^in)` from the variation module on the built network.
    pub v_bar_pipeline: f64,
    pub q_spectral: f64,
    /// `((t−1)² + s²)(1 + (t/s)²)`.
    pub q_spectral_sq_closed: f64,
    pub q_row_sum: f64,
    pub idempotence_defect: f64,
}

pub fn projection_example(t: f64, s: f64, l: usize, w0: f64, w1: &[f64]) -> Result<ProjectionReport> {
    let q = projection_matrix(t, s)?;
    if w1.len() != 2 {
        return Err(Error::Shape("projection family needs W_1 of length 2".into()));
    }
    let net = MatrixFamily::Projection { t, s }.network(l, w0, w1)?;
    let lf = l as f64;
    let w1_row = Matrix::row_vector(w1);
    let w1_l1 = w1_row.l1();
    let w1q = w1_row.matmul(&q)?.l1();
    let q_l1 = q.l1();
    let v_bar_out = w0 / lf + w0 * w1_l1 / lf + (lf - 2.0) / lf * w0 * w1q;
    let v_bar_in = w1q / lf + (lf - 1.0) / lf * q_l1;
    Ok(ProjectionReport {
        l,
        v_bar_out,
        v_bar_in,
        v_bar_exact: (v_bar_out * v_bar_in).sqrt(),
        v_bar_asymptotic: (w0 * w1q * q_l1).sqrt(),
        v_bar_pipeline: pipeline(&net, LinkSelector::Argmax, VariationMode::Plain),
        q_spectral: q.spectral(),
        q_spectral_sq_closed: ((t - 1.0).powi(2) + s * s) * (1.0 + (t / s).powi(2)),
        q_row_sum: q.norm_1_inf(),
        idempotence_defect: q.matmul(&q)?.add(&q.scale(-1.0))?.l1(),
    })
}

/// Strong connectivity of the positivity pattern.
pub fn is_irreducible(q: &Matrix<f64>) -> bool {
    let n = q.rows();
    if n != q.cols() || n == 0 {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(j) = stack.pop() {
            for k in 0..n {
                let w = if forward { q.get(j, k) } else { q.get(k, j) };
                if w >= STRUCTURAL_ZERO && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.into_iter().all(|b| b)
    };
    reach(true) && reach(false)
}

fn check_irreducible(q: &Matrix<f64>) -> Result<()> {
    if !q.is_nonnegative() {
        return Err(Error::Domain("Q must be nonnegative".into()));
    }
    if !is_irreducible(q) {
        return Err(Error::Structure("Q is reducible".into()));
    }
    Ok(())
}

pub fn perron_root(q: &Matrix<f64>) -> f64 {
    power_iteration(q).0
}

fn l1_normalized(mut x: Vec<f64>) -> Vec<f64> {
    let s: f64 = x.iter().map(|v| v.abs()).sum();
    x.iter_mut().for_each(|v| *v = v.abs() / s);
    x
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroReport {
    pub l: usize,
    /// Perron root of the supplied matrix; `Q/ρ` is analysed.
    pub rho: f64,
    /// Right and left Perron vectors, ℓ¹-normalized.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub v_bar_out: f64,
    pub v_bar_in: f64,
    pub v_bar_out_limit: f64,
    pub v_bar_in_limit: f64,
    /// `√(W0⟨u,W_1⟩‖u‖₁)·‖v‖₁/⟨u,v⟩`.
    pub v_bar_limit: f64,
    /// `(L, ‖(1/L)Σ_{ℓ=1}^{L} Q^ℓ − uvᵀ/⟨u,v⟩‖₁)` on the fitting grid.
    pub errors: Vec<(usize, f64)>,
    /// Least-squares slope of log error against log L; `None` when fewer than two errors are nonzero.
    pub rate_slope: Option<f64>,
    /// `max L·error` on the grid.
    pub scaled_error_max: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn irreducible_cesaro(q: &Matrix<f64>, w0: f64, w1: &[f64], l: usize) -> Result<CesaroReport> {
    check_irreducible(q)?;
    if l < 2 {
        return Err(Error::Domain("depth must be at least 2".into()));
    }
    if w1.len() != q.rows() {
        return Err(Error::Shape("W_1 length must match Q".into()));
    }
    let rho = perron_root(q);
    let q = q.scale(1.0 / rho);
    let u = l1_normalized(power_iteration(&q).1);
    let v = l1_normalized(power_iteration(&q.transpose()).1);
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    let w1u: f64 = w1.iter().zip(&u).map(|(a, b)| a * b).sum();
    let limit = Matrix::from_vec(
        u.len(),
        v.len(),
        u.iter().flat_map(|&a| v.iter().map(move |&b| a * b / uv)).collect(),
    )?;

    let lf = l as f64;
    let w1_row = Matrix::row_vector(w1);
    // row_k = W_1 Q^k, pow_k = Q^k
    let mut row = w1_row.clone();
    let mut pow = Matrix::identity(q.rows());
    let mut out_sum = 0.0;
    let mut in_sum = 0.0;
    for _ in 0..l - 1 {
        out_sum += row.l1();
        row = row.matmul(&q)?;
        pow = pow.matmul(&q)?;
        in_sum += pow.l1();
    }
    // row is now W_1 Q^{L−1}
    let v_bar_out = w0 / lf + w0 * out_sum / lf;
    let v_bar_in = row.l1() / lf + in_sum / lf;

    let grid: Vec<usize> = (3..=9).map(|k| (1usize << k) + 1).collect();
    let max_l = *grid.last().expect("grid");
    let mut errors = Vec::new();
    let mut acc = Matrix::zeros(q.rows(), q.cols());
    let mut p = Matrix::identity(q.rows());
    for n in 1..=max_l {
        p = p.matmul(&q)?;
        acc = acc.add(&p)?;
        if grid.contains(&n) {
            errors.push((n, acc.scale(1.0 / n as f64).add(&limit.scale(-1.0))?.l1()));
        }
    }
    let nonzero: Vec<&(usize, f64)> = errors.iter().filter(|(_, e)| *e > 1e-13).collect();
    let xs: Vec<f64> = nonzero.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = nonzero.iter().map(|(_, e)| e.ln()).collect();
    let scaled_error_max = errors.iter().map(|&(n, e)| n as f64 * e).fold(0.0, f64::max);

    // u and v are ℓ¹-normalized
    let (u_l1, v_l1) = (1.0, 1.0);
    Ok(CesaroReport {
        l,
        rho,
        v_bar_out,
        v_bar_in,
        v_bar_out_limit: w0 * w1u * v_l1 / uv,
        v_bar_in_limit: u_l1 * v_l1 / uv,
        v_bar_limit: (w0 * w1u * u_l1).sqrt() * v_l1 / uv,
        u,
        v,
        errors,
        rate_slope: fit_slope(&xs, &ys),
        scaled_error_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    /// Identity size `d`; the network input dimension is `d/2`.
    pub d: usize,
    pub l: usize,
    pub plain: f64,
    pub reduced: f64,
    pub plain_pipeline: f64,
    pub reduced_pipeline: f64,
}

/// All of `W_2..W_L` equal to `I_d`, `d = w1.len()`.
pub fn identity_family(w0: f64, w1: &[f64], l: usize) -> Result<IdentityReport> {
    let d = w1.len();
    let zero = vec![vec![0.0; d]; d];
    let fam = MatrixFamily::NearIdentity {
        perturbations: vec![zero; l.saturating_sub(1)],
    };
    let net = fam.network(l, w0, w1)?;
    let lf = l as f64;
    let w1_l1: f64 = w1.iter().sum();
    let out = w0 / lf + (lf - 1.0) / lf * w0 * w1_l1;
    Ok(IdentityReport {
        d,
        l,
        plain: (out * (w1_l1 / lf + (lf - 1.0) / lf * d as f64)).sqrt(),
        reduced: (out * w1_l1 / lf).sqrt(),
        plain_pipeline: pipeline(&net, LinkSelector::Diagonal, VariationMode::Plain),
        reduced_pipeline: pipeline(&net, LinkSelector::Diagonal, VariationMode::Reduced),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearIdentityReport {
    pub l: usize,
    /// `Σ_ℓ ‖Q_ℓ‖₁`.
    pub s: f64,
    /// Reduced `√(V̄^out·V̄^{in,red})` with hollow links, from the variation module.
    pub exact_reduced: f64,
    pub bound: f64,
    pub holds: bool,
    pub margin: f64,
    /// The bound with `e^S` replaced by `L`, for harmonic schedules.
    pub harmonic_bound: Option<f64>,
}

fn avvarbound(w0: f64, w1_l1: f64, l: usize, growth: f64) -> f64 {
    let lf = l as f64;
    (w0 / lf + (lf - 1.0) / lf * w0 * w1_l1 * growth).sqrt() * (w1_l1 / lf * growth + (lf - 1.0) / lf * growth).sqrt()
}

fn near_identity_report(fam: &MatrixFamily, l: usize, w0: f64, w1: &[f64], harmonic: bool) -> Result<NearIdentityReport> {
    let layers = fam.layers(l)?;
    let d = w1.len();
    let s: f64 = layers
        .iter()
        .map(|w| w.add(&Matrix::identity(d).scale(-1.0)).map(|q| q.l1()))
        .sum::<Result<f64>>()?;
    let net = fam.network(l, w0, w1)?;
    let exact_reduced = pipeline(&net, LinkSelector::Diagonal, VariationMode::Reduced);
    let w1_l1: f64 = w1.iter().sum();
    let bound = avvarbound(w0, w1_l1, l, s.exp());
    let slack = 1e-12 * (1.0 + bound);
    Ok(NearIdentityReport {
        l,
        s,
        exact_reduced,
        bound,
        holds: exact_reduced <= bound + slack,
        margin: bound - exact_reduced,
        harmonic_bound: harmonic.then(|| avvarbound(w0, w1_l1, l, l as f64)),
    })
}

/// `W_ℓ = I + Q_ℓ` for `ℓ = 2..=L`, with `L = q_list.len() + 1`.
pub fn near_identity_family(q_list: &[Matrix<f64>], w0: f64, w1: &[f64]) -> Result<NearIdentityReport> {
    if q_list.iter().any(|q| !q.is_nonnegative()) {
        return Err(Error::Domain("perturbations must be nonnegative".into()));
    }
    let fam = MatrixFamily::NearIdentity {
        perturbations: q_list.iter().map(Matrix::to_rows).collect(),
    };
    near_identity_report(&fam, q_list.len() + 1, w0, w1, false)
}

/// `W_ℓ = I + Q̃_ℓ/ℓ` with `‖Q̃_ℓ‖₁ ≤ 1`.
pub fn near_identity_harmonic(base: &[Matrix<f64>], w0: f64, w1: &[f64]) -> Result<NearIdentityReport> {
    if base.iter().any(|q| !q.is_nonnegative() || q.l1() > 1.0 + 1e-12) {
        return Err(Error::Domain("harmonic base matrices need nonnegative entries and ‖Q̃‖₁ ≤ 1".into()));
    }
    let fam = MatrixFamily::IdentityPlusHarmonic {
        base: base.iter().map(Matrix::to_rows).collect(),
    };
    near_identity_report(&fam, base.len() + 1, w0, w1, true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToeplitzRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub symbol: f64,
}

/// Sorted eigenvalues of the symmetric Toeplitz matrix beside sorted samples
/// of its symbol `c_0 + 2Σ_m c_m cos(mω)` at `ω = 2πk/n`.
pub fn toeplitz_demo(coeffs: &[f64], n: usize) -> Vec<ToeplitzRow> {
    let t = toeplitz(coeffs, n);
    let dm = DMatrix::from_row_slice(n, n, t.as_slice());
    let mut eig: Vec<f64> = SymmetricEigen::new(dm).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let mut sym: Vec<f64> = (0..n)
        .map(|k| {
            let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            coeffs.first().copied().unwrap_or(0.0)
                + 2.0 * coeffs.iter().enumerate().skip(1).map(|(m, c)| c * (m as f64 * w).cos()).sum::<f64>()
        })
        .collect();
    sym.sort_by(f64::total_cmp);
    eig.into_iter()
        .zip(sym)
        .enumerate()
        .map(|(index, (eigenvalue, symbol))| ToeplitzRow {
            index,
            eigenvalue,
            symbol,
        })
        .collect()
}
