//! Norm inequalities for products of nonnegative matrices.
//!
//! For a row vector `a` of length `d_0` and matrices `A_k` of shape
//! `d_{k-1} × d_k`, with `P = A_1⋯A_m`:
//!
//! | id | inequality |
//! |----|------------|
//! | 1 | `‖aP‖₁ ≤ ‖a‖₁‖P‖_{1,∞}` |
//! | 2 | `‖a‖₁‖P‖_{1,∞} ≤ ‖a‖₁ Π‖A_k‖_{1,∞}` |
//! | 3 | `‖P‖₁ ≤ √d_m Π‖A_k‖_σ` |
//! | 4 | `‖P‖₁ ≤ Π‖A_k‖₁` |
//! | 5 | `‖P‖₁ ≤ d_0√d_m Π‖A_k‖_σ` |
//!
//! Inequality 3 only holds in general with `‖P‖_{1,∞}` on the left (or when
//! `d_0 = 1`); [`ChainReport::row_sum_form`] records that version.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{chain_product, Matrix};
use crate::scalar::Scalar;

/// Relative slack allowed on each comparison, covering power-iteration error.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Comparison {
    fn new(lhs: f64, rhs: f64) -> Self {
        Comparison {
            lhs,
            rhs,
            holds: lhs <= rhs + INEQUALITY_TOL * (1.0 + rhs.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub dims: Vec<usize>,
    /// The five inequalities in table order.
    pub inequalities: [Comparison; 5],
    /// `‖P‖_{1,∞} ≤ √d_m Π‖A_k‖_σ`.
    pub row_sum_form: Comparison,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.inequalities.iter().all(|c| c.holds)
    }

    /// 1-based ids of the inequalities that fail.
    pub fn violations(&self) -> Vec<usize> {
        self.inequalities
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.holds)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

pub fn check_chain<T: Scalar>(a: &[T], chain: &[Matrix<T>]) -> Result<ChainReport> {
    let product = chain_product(chain)?.ok_or_else(|| Error::Shape("empty matrix chain".into()))?;
    if a.len() != product.rows() {
        return Err(Error::Shape(format!(
            "vector of length {} against a chain with {} rows",
            a.len(),
            product.rows()
        )));
    }
    let f = Scalar::to_f64_lossy;
    let d0 = product.rows() as f64;
    let dm = product.cols() as f64;
    let a_l1: f64 = a.iter().map(|x| f(x.abs())).sum();
    let ap_l1: f64 = product.vec_mul(a).iter().map(|x| f(x.abs())).sum();
    let p_l1 = f(product.l1());
    let p_1inf = f(product.norm_1_inf());
    let prod_1inf: f64 = chain.iter().map(|m| f(m.norm_1_inf())).product();
    let prod_l1: f64 = chain.iter().map(|m| f(m.l1())).product();
    let prod_sigma: f64 = chain.iter().map(|m| f(m.spectral())).product();

    let mut dims = vec![chain[0].rows()];
    dims.extend(chain.iter().map(Matrix::cols));
    Ok(ChainReport {
        dims,
        inequalities: [
            Comparison::new(ap_l1, a_l1 * p_1inf),
            Comparison::new(a_l1 * p_1inf, a_l1 * prod_1inf),
            Comparison::new(p_l1, dm.sqrt() * prod_sigma),
            Comparison::new(p_l1, prod_l1),
            Comparison::new(p_l1, d0 * dm.sqrt() * prod_sigma),
        ],
        row_sum_form: Comparison::new(p_1inf, dm.sqrt() * prod_sigma),
    })
}
