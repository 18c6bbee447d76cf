//! Closed-form cardinality, entropy, risk and Rademacher bound calculators.
//!
//! Logarithms are natural unless stated otherwise. Universal constants that
//! the formulas leave unspecified are set to 1 and reported through
//! [`Constants`].

use std::f64::consts::E;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::RampNetwork;
use crate::variation::{rescale_canonical, subnetwork_variations, VariationMode};

/// Relative slack used when comparing members of the counting chain.
pub const CHAIN_TOL: f64 = 1e-12;

/// Metadata for formulas carrying an unspecified multiplicative constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Value substituted for the constant `C`.
    pub c: f64,
    /// `false`: the reported number is a rate with `C` left symbolic.
    pub constant_free: bool,
}

impl Constants {
    pub const UNIT: Constants = Constants {
        c: 1.0,
        constant_free: false,
    };
}

/// One named value inside a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedBound {
    pub name: String,
    pub formula_id: String,
    pub value: f64,
}

/// Flat, serializable view of any calculator's output.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: BTreeMap<String, f64>,
    pub values: Vec<NamedBound>,
    pub constants: Option<Constants>,
}

impl BoundReport {
    pub fn input(mut self, name: &str, value: f64) -> Self {
        self.inputs.insert(name.to_string(), value);
        self
    }

    pub fn push(&mut self, name: &str, formula_id: &str, value: f64) {
        self.values.push(NamedBound {
            name: name.to_string(),
            formula_id: formula_id.to_string(),
            value,
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|b| b.name == name).map(|b| b.value)
    }

    pub fn all_nonnegative(&self) -> bool {
        self.values.iter().all(|b| b.value >= 0.0)
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} = {x} must be positive and finite")))
    }
}

/// `ln C(n, k)` as a sum of `min(k, n−k)` logarithms.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    h(p) + h(1.0 - p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountBounds {
    pub m: u64,
    pub d: u64,
    /// `ln C(M+D−1, M)`.
    pub exact: f64,
    /// `D·ln(M+1)`.
    pub d_log_m: f64,
    /// `M·ln D`.
    pub m_log_d: f64,
    /// `(M+D−1)·H₂(M/(M+D−1))` converted to nats.
    pub entropic: f64,
    /// `M·ln(e(1 + (D−1)/M))`.
    pub feller: f64,
    /// `M·ln(2eD/M)`, only defined for `D ≥ M − 1`.
    pub feller_simple: Option<f64>,
    /// `exact ≤ entropic ≤ feller ≤ feller_simple`, and `exact` below both crude bounds.
    pub chain_holds: bool,
}

fn le(a: f64, b: f64) -> bool {
    a <= b + CHAIN_TOL * (1.0 + b.abs())
}

impl CountBounds {
    pub fn report(&self) -> BoundReport {
        let mut r = BoundReport::default().input("M", self.m as f64).input("D", self.d as f64);
        r.push("exact", "stars-and-bars", self.exact);
        r.push("d_log_m", "crude-D", self.d_log_m);
        r.push("m_log_d", "crude-M", self.m_log_d);
        r.push("entropic", "entropic", self.entropic);
        r.push("feller", "feller", self.feller);
        if let Some(f) = self.feller_simple {
            r.push("feller_simple", "feller-simple", f);
        }
        r
    }
}

pub fn count_bounds(m: u64, d: u64) -> Result<CountBounds> {
    if m == 0 || d == 0 {
        return Err(domain("M and D must be at least 1"));
    }
    let (mf, df) = (m as f64, d as f64);
    let n = m + d - 1;
    let exact = ln_binomial(n, m);
    let entropic = n as f64 * binary_entropy(mf / n as f64) * std::f64::consts::LN_2;
    let feller = mf * (E * (1.0 + (df - 1.0) / mf)).ln();
    let feller_simple = (d + 1 >= m).then(|| mf * (2.0 * E * df / mf).ln());
    let d_log_m = df * (mf + 1.0).ln();
    let m_log_d = mf * df.ln();
    let chain_holds = le(exact, entropic)
        && le(entropic, feller)
        && feller_simple.is_none_or(|f| le(feller, f))
        && le(exact, d_log_m)
        && le(exact, m_log_d);
    Ok(CountBounds {
        m,
        d,
        exact,
        d_log_m,
        m_log_d,
        entropic,
        feller,
        feller_simple,
        chain_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogCardinality {
    /// `(L−2)·M·ln(min(d̄, 2M)) + M·ln(8e·d_in)`.
    pub value: f64,
    /// `(L−2)·M·ln(2M) + M·ln(8e·d_in)`.
    pub d_bar_free: f64,
}

pub fn improved_log_cardinality(l: usize, m: u64, d_bar: f64, d_in: usize) -> Result<LogCardinality> {
    if l < 2 {
        return Err(domain("depth must be at least 2"));
    }
    positive("d_bar", d_bar)?;
    if m == 0 || d_in == 0 {
        return Err(domain("M and d_in must be at least 1"));
    }
    let mf = m as f64;
    let tail = mf * (8.0 * E * d_in as f64).ln();
    let lead = (l - 2) as f64 * mf;
    Ok(LogCardinality {
        value: lead * d_bar.min(2.0 * mf).ln() + tail,
        d_bar_free: lead * (2.0 * mf).ln() + tail,
    })
}

/// Geometric mean of `d_2, …, d_{L−1}` taken from `dims = [d_0, d_1, …, d_L]`; 1 when empty.
pub fn d_bar(dims: &[usize]) -> f64 {
    let l = dims.len().saturating_sub(1);
    if l < 3 {
        return 1.0;
    }
    let inner = &dims[2..l];
    (inner.iter().map(|&d| (d as f64).ln()).sum::<f64>() / inner.len() as f64).exp()
}

/// `⌈L²v²/ε²⌉`, the number of paths reaching accuracy `ε` in the `(Lv/√M)²` bound.
pub fn paths_for_accuracy(l: usize, v: f64, eps: f64) -> Result<u64> {
    positive("eps", eps)?;
    let m = ((l as f64 * v / eps).powi(2)).ceil();
    Ok(m.max(1.0) as u64)
}

/// `(L²v²/ε²)·[(L−2)·ln(min(d̄, 2L²v²/ε²)) + ln(8e·d_in)]`.
pub fn covering_entropy(l: usize, v: f64, eps: f64, d_bar: f64, d_in: usize) -> Result<f64> {
    positive("eps", eps)?;
    positive("d_bar", d_bar)?;
    if l < 2 || d_in == 0 {
        return Err(domain("need L ≥ 2 and d_in ≥ 1"));
    }
    let k = (l as f64 * v / eps).powi(2);
    Ok(k * ((l - 2) as f64 * d_bar.min(2.0 * k).ln() + (8.0 * E * d_in as f64).ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoLayerEntropy {
    /// `8v⁴/ε⁴·ln(8e·d_in)`.
    pub cover3: f64,
    /// `C·d_in·(v/ε)^{2−4/(d_in+2)}`.
    pub cover4: f64,
    pub constants: Constants,
    /// Smallest `d_in ≤ 10⁶` at which `cover3 < cover4`, at the same `v`, `ε`, `C`.
    pub crossover_d_in: Option<usize>,
}

pub fn cover3(v: f64, eps: f64, d_in: usize) -> f64 {
    8.0 * (v / eps).powi(4) * (8.0 * E * d_in as f64).ln()
}

pub fn cover4(c: f64, v: f64, eps: f64, d_in: usize) -> f64 {
    let d = d_in as f64;
    c * d * (v / eps).powf(2.0 - 4.0 / (d + 2.0))
}

pub fn two_layer_entropy(v: f64, eps: f64, d_in: usize, c: f64) -> Result<TwoLayerEntropy> {
    positive("eps", eps)?;
    positive("v", v)?;
    positive("C", c)?;
    if d_in == 0 {
        return Err(domain("d_in must be at least 1"));
    }
    let crossover_d_in = (1..=1_000_000).find(|&d| cover3(v, eps, d) < cover4(c, v, eps, d));
    Ok(TwoLayerEntropy {
        cover3: cover3(v, eps, d_in),
        cover4: cover4(c, v, eps, d_in),
        constants: Constants { c, constant_free: false },
        crossover_d_in,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRates {
    /// `(v⁴·ln(8e·d_in)/n)^{1/3}`.
    pub theorem2: f64,
    /// `L·v·√(((L−2)·ln d̄ + ln(8e·d_in))/n)`.
    pub theorem3: f64,
    /// `L·v·√(((L−2)·ln(v√n) + ln(8e·d_in))/n)`.
    pub theorem3_d_bar_free: f64,
    /// `v·√(d_in·ln(e·n/d_in)/n)`.
    pub barron: f64,
    pub constants: Constants,
}

impl RiskRates {
    pub fn report(&self, l: usize, v: f64, n: f64, d_bar: f64, d_in: usize) -> BoundReport {
        let mut r = BoundReport {
            constants: Some(self.constants),
            ..Default::default()
        }
        .input("L", l as f64)
        .input("v", v)
        .input("n", n)
        .input("d_bar", d_bar)
        .input("d_in", d_in as f64);
        r.push("theorem2", "theorem2", self.theorem2);
        r.push("theorem3", "theorem3", self.theorem3);
        r.push("theorem3_d_bar_free", "theorem3-dbar-free", self.theorem3_d_bar_free);
        r.push("barron", "barronrate", self.barron);
        r
    }
}

pub fn theorem2_rate(v: f64, n: f64, d_in: usize) -> f64 {
    (v.powi(4) * (8.0 * E * d_in as f64).ln() / n).cbrt()
}

pub fn risk_rates(l: usize, v: f64, n: f64, d_bar: f64, d_in: usize) -> Result<RiskRates> {
    if !(n >= 1.0) {
        return Err(domain("n must be at least 1"));
    }
    positive("d_bar", d_bar)?;
    if l < 2 || d_in == 0 {
        return Err(domain("need L ≥ 2 and d_in ≥ 1"));
    }
    let (lf, lm2, din) = (l as f64, (l - 2) as f64, d_in as f64);
    let tail = (8.0 * E * din).ln();
    Ok(RiskRates {
        theorem2: theorem2_rate(v, n, d_in),
        theorem3: lf * v * ((lm2 * d_bar.ln() + tail) / n).sqrt(),
        theorem3_d_bar_free: lf * v * ((lm2 * (v * n.sqrt()).ln() + tail) / n).sqrt(),
        barron: v * (din * (E * n / din).ln() / n).sqrt(),
        constants: Constants::UNIT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RademacherBound {
    pub alpha: f64,
    /// `ln(B/α)·√(L²v²[(L−2)·ln(min(d̄, 2L²v²/α²)) + ln(8e·d_in)])`.
    pub integral: f64,
    /// `4α + 12·integral/√n`.
    pub dudley: f64,
    /// `L·v·ln(n)·√(((L−2)·ln(min(d̄, 2L²v²n)) + ln(8e·d_in))/n)`.
    pub final_rate: f64,
    pub constants: Constants,
}

pub fn rademacher_bound(l: usize, v: f64, n: f64, d_bar: f64, d_in: usize, b: f64) -> Result<RademacherBound> {
    if !(n >= 2.0) {
        return Err(domain("n must be at least 2"));
    }
    positive("d_bar", d_bar)?;
    positive("B", b)?;
    if l < 2 || d_in == 0 {
        return Err(domain("need L ≥ 2 and d_in ≥ 1"));
    }
    let alpha = 1.0 / n.sqrt();
    Ok(rademacher_at(l, v, n, d_bar, d_in, b, alpha))
}

/// Smallest `n` in `[2, n_max]` from which `final_rate(2n) < final_rate(n)` holds throughout.
pub fn rademacher_decrease_threshold(l: usize, v: f64, d_bar: f64, d_in: usize, n_max: f64) -> Option<f64> {
    let rate = |n: f64| rademacher_at(l, v, n, d_bar, d_in, 1.0, 1.0 / n.sqrt()).final_rate;
    let mut grid = Vec::new();
    let mut n = 2.0;
    while n <= n_max {
        grid.push(n);
        n *= 2.0;
    }
    let mut threshold = None;
    for &n in grid.iter().rev() {
        if rate(2.0 * n) < rate(n) {
            threshold = Some(n);
        } else {
            break;
        }
    }
    threshold
}

/// The Dudley terms at an explicit `α`.
pub fn rademacher_at(l: usize, v: f64, n: f64, d_bar: f64, d_in: usize, b: f64, alpha: f64) -> RademacherBound {
    let (lf, lm2) = (l as f64, (l - 2) as f64);
    let tail = (8.0 * E * d_in as f64).ln();
    let lv2 = (lf * v).powi(2);
    let integral = (b / alpha).ln() * (lv2 * (lm2 * d_bar.min(2.0 * lv2 / (alpha * alpha)).ln() + tail)).sqrt();
    let final_rate = lf * v * n.ln() * ((lm2 * d_bar.min(2.0 * lv2 * n).ln() + tail) / n).sqrt();
    RademacherBound {
        alpha,
        integral,
        dudley: 4.0 * alpha + 12.0 * integral / n.sqrt(),
        final_rate,
        constants: Constants::UNIT,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BartlettComparison {
    pub depth: usize,
    /// `‖W_ℓ‖_σ`, with `‖W_1‖_σ` read as `w0·‖W_1‖₁`.
    pub spectral: Vec<f64>,
    /// `‖W_ℓ‖_{2,1}`, with `w0` absorbed into `W_1`.
    pub group: Vec<f64>,
    pub bartlett: f64,
    pub bartlett2: f64,
    /// Covering entropy bound at the canonical composite variation.
    pub cover1: f64,
    pub v_canonical: f64,
    pub ratio_bartlett2_cover1: f64,
}

pub fn bartlett_comparison(net: &RampNetwork<f64>, x_norm: f64, eps: f64) -> Result<BartlettComparison> {
    positive("eps", eps)?;
    let l = net.depth();
    if l < 2 {
        return Err(domain("depth must be at least 2"));
    }
    let w0 = net.w0();
    let mut spectral = Vec::with_capacity(l);
    let mut group = Vec::with_capacity(l);
    spectral.push(w0 * net.layer(1).l1());
    group.push(w0 * net.layer(1).group_2_1());
    for w in &net.weights()[1..] {
        spectral.push(w.spectral());
        group.push(w.group_2_1());
    }
    let dims = net.dims();
    let max_d = *dims[1..].iter().max().expect("depth ≥ 1") as f64;
    let prod_sigma2: f64 = spectral.iter().map(|s| s * s).product();
    let lead = x_norm * x_norm * max_d.ln() / (eps * eps) * prod_sigma2;
    let ratio_sum: f64 = group
        .iter()
        .zip(&spectral)
        .map(|(g, s)| if *s > 0.0 { (g / s).powf(2.0 / 3.0) } else { 0.0 })
        .sum();
    let bartlett = lead * ratio_sum.powi(3);
    let bartlett2 = (l as f64).powi(3) * lead;

    let (canon, _) = rescale_canonical(net, VariationMode::Plain);
    let v_canonical = subnetwork_variations(&canon).v_composite;
    let cover1 = covering_entropy(l, v_canonical, eps, d_bar(&dims), net.d_in())?;
    Ok(BartlettComparison {
        depth: l,
        spectral,
        group,
        bartlett,
        bartlett2,
        cover1,
        v_canonical,
        ratio_bartlett2_cover1: bartlett2 / cover1,
    })
}

/// [`bartlett_comparison`] over a sequence of networks, typically of increasing depth.
pub fn bartlett_trajectory(nets: &[RampNetwork<f64>], x_norm: f64, eps: f64) -> Result<Vec<BartlettComparison>> {
    nets.iter().map(|n| bartlett_comparison(n, x_norm, eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert!((ln_binomial(4, 2) - 6f64.ln()).abs() < 1e-15);
        assert_eq!(ln_binomial(5, 0), 0.0);
        assert!((ln_binomial(52, 5) - 2_598_960f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn count_bounds_examples() {
        let c = count_bounds(2, 3).unwrap();
        assert!((c.exact - 1.791_759_469_228_055).abs() < 1e-12);
        assert!(c.chain_holds);
        for d in [1, 7, 1000] {
            let c = count_bounds(1, d).unwrap();
            assert!((c.exact - (d as f64).ln()).abs() < 1e-12);
        }
        assert!(count_bounds(10, 3).unwrap().feller_simple.is_none());
    }

    #[test]
    fn logcard_collapses_at_depth_two() {
        let c = improved_log_cardinality(2, 5, 100.0, 3).unwrap();
        assert!((c.value - 5.0 * (24.0 * E).ln()).abs() < 1e-12);
        assert!(improved_log_cardinality(1, 5, 100.0, 3).is_err());
    }

    #[test]
    fn d_bar_examples() {
        assert_eq!(d_bar(&[1, 4, 2]), 1.0);
        assert!((d_bar(&[1, 100, 4, 16, 8]) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cover3_is_quartic_in_eps() {
        let r = cover3(1.3, 0.25, 7) / cover3(1.3, 0.5, 7);
        assert!((r - 16.0).abs() < 1e-12);
    }

    #[test]
    fn dudley_integral_vanishes_at_alpha_equal_b() {
        let r = rademacher_at(3, 1.0, 100.0, 10.0, 4, 0.5, 0.5);
        assert_eq!(r.integral, 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(covering_entropy(3, 1.0, 0.0, 10.0, 5).is_err());
        assert!(rademacher_bound(3, 1.0, 1.0, 10.0, 5, 1.0).is_err());
        assert!(count_bounds(0, 3).is_err());
    }
}
