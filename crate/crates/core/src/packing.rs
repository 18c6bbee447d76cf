//! Lower-bound construction: ℓ¹ lattice balls, constant-weight codes,
//! sinusoidal ridge packings and the minimax rate calculator.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Enumeration guard for lattice points and code candidates.
pub const ENUMERATION_LIMIT: usize = 200_000;

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `Σ_{k=0}^{min(d,A)} 2^k·C(d,k)·C(A,k)`.
pub fn lattice_count(d_in: u64, a: u64) -> BigUint {
    (0..=d_in.min(a))
        .map(|k| (BigUint::one() << k as usize) * binomial(d_in, k) * binomial(a, k))
        .sum()
}

/// `Σ_{k=0}^{A} C(A,k)·C(d+A−k, A)`.
pub fn lattice_count_alternate(d_in: u64, a: u64) -> BigUint {
    (0..=a).map(|k| binomial(a, k) * binomial(d_in + a - k, a)).sum()
}

/// `C(d+A, A)`.
pub fn lattice_lower_bound(d_in: u64, a: u64) -> BigUint {
    binomial(d_in + a, a)
}

/// All `θ ∈ Z^d` with `‖θ‖₁ ≤ A`, in lexicographic order.
pub fn enumerate_lattice(d_in: usize, a: u64) -> Result<Vec<Vec<i64>>> {
    let count = lattice_count(d_in as u64, a);
    if count > BigUint::from(ENUMERATION_LIMIT) {
        return Err(Error::ResourceLimit(format!(
            "ℓ¹ ball d={d_in}, A={a} has {count} points, above {ENUMERATION_LIMIT}"
        )));
    }
    fn rec(prefix: &mut Vec<i64>, left: i64, d: usize, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for v in -left..=left {
            prefix.push(v);
            rec(prefix, left - v.abs(), d, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(d_in), a as i64, d_in, &mut out);
    Ok(out)
}

/// Nonzero lattice points, keeping the member of each `±θ` pair whose first nonzero entry is positive.
pub fn packing_frequencies(d_in: usize, a: u64) -> Result<Vec<Vec<i64>>> {
    Ok(enumerate_lattice(d_in, a)?
        .into_iter()
        .filter(|t| t.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstantWeightCode {
    pub n_len: usize,
    pub t: usize,
    /// Sorted support of each codeword.
    pub codewords: Vec<Vec<usize>>,
    pub required_distance: usize,
    /// Minimum pairwise Hamming distance; `None` for fewer than two codewords.
    pub min_distance: Option<usize>,
    /// `⌈√C(N, T)⌉` as a decimal string.
    pub target: String,
    pub target_met: bool,
    /// Outside `N ≥ 10, T ≤ N/10`.
    pub relaxed: bool,
    pub seed: u64,
}

impl ConstantWeightCode {
    pub fn dense(&self, index: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.n_len];
        for &k in &self.codewords[index] {
            v[k] = 1;
        }
        v
    }
}

fn ceil_sqrt(x: &BigUint) -> BigUint {
    let s = x.sqrt();
    if &(&s * &s) < x {
        s + 1u32
    } else {
        s
    }
}

fn support_distance(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..t).collect();
    if t > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(i) = (0..t).rev().find(|&i| idx[i] != i + n - t) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..t {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Seeded greedy constant-weight code with minimum distance `⌈T/5⌉`.
pub fn build_code(n_len: usize, t: usize, seed: u64) -> Result<ConstantWeightCode> {
    if n_len == 0 || t == 0 || t > n_len {
        return Err(Error::Domain(format!("need 1 ≤ T ≤ N, got N={n_len}, T={t}")));
    }
    let total = binomial(n_len as u64, t as u64);
    let target = ceil_sqrt(&total);
    let target_usize = target.to_usize().unwrap_or(usize::MAX);
    let required = t.div_ceil(5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let candidates: Box<dyn Iterator<Item = Vec<usize>>> = if total <= BigUint::from(ENUMERATION_LIMIT) {
        let mut all = combinations(n_len, t);
        all.shuffle(&mut rng);
        Box::new(all.into_iter())
    } else {
        Box::new((0..ENUMERATION_LIMIT).map(move |_| {
            let mut s = rand::seq::index::sample(&mut rng, n_len, t).into_vec();
            s.sort_unstable();
            s
        }))
    };

    let mut codewords: Vec<Vec<usize>> = Vec::new();
    for c in candidates {
        if codewords.len() >= target_usize {
            break;
        }
        if codewords.iter().all(|w| support_distance(w, &c) >= required) {
            codewords.push(c);
        }
    }
    let min_distance = min_pairwise(&codewords);
    Ok(ConstantWeightCode {
        n_len,
        t,
        target_met: codewords.len() >= target_usize,
        codewords,
        required_distance: required,
        min_distance,
        target: target.to_string(),
        relaxed: n_len < 10 || 10 * t > n_len,
        seed,
    })
}

fn min_pairwise(words: &[Vec<usize>]) -> Option<usize> {
    let mut best = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = support_distance(&words[i], &words[j]);
            best = Some(best.map_or(d, |b: usize| b.min(d)));
        }
    }
    best
}

/// Checks a code from its dense words alone: weight, range, and pairwise distance.
pub fn check_code(code: &ConstantWeightCode) -> std::result::Result<(), String> {
    if let Some(i) = code.codewords.iter().position(|w| w.iter().any(|&k| k >= code.n_len)) {
        return Err(format!("codeword {i} indexes past length {}", code.n_len));
    }
    let words: Vec<Vec<u8>> = (0..code.codewords.len()).map(|i| code.dense(i)).collect();
    for (i, w) in words.iter().enumerate() {
        let weight = w.iter().filter(|&&b| b == 1).count();
        if weight != code.t {
            return Err(format!("codeword {i} has weight {weight}, expected {}", code.t));
        }
    }
    // T/5 without rounding, as stated for the lemma
    let need = code.t as f64 / 5.0;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = words[i].iter().zip(&words[j]).filter(|(a, b)| a != b).count();
            if (d as f64) < need || d == 0 {
                return Err(format!("codewords {i} and {j} at distance {d}"));
            }
        }
    }
    Ok(())
}

/// Nodes per axis for the periodic trapezoid rule, exact for the products involved.
pub fn quadrature_nodes(max_freq: u64) -> usize {
    4 * max_freq as usize + 1
}

/// Values of `sin(2π⟨θ, x⟩)` on the tensor grid of `n` periodic trapezoid nodes per axis.
fn sine_on_grid(theta: &[i64], n: usize) -> Vec<f64> {
    let d = theta.len();
    let total = n.pow(d as u32);
    let nodes: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..total)
        .map(|mut flat| {
            let mut phase = 0.0;
            for &th in theta {
                phase += th as f64 * nodes[flat % n];
                flat /= n;
            }
            (two_pi * phase).sin()
        })
        .collect()
}

fn grid_guard(d: usize, n: usize) -> Result<()> {
    let total = (n as f64).powi(d as i32);
    if total > 4.0e6 {
        return Err(Error::ResourceLimit(format!("quadrature grid of {total} nodes")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthonormalityReport {
    pub nodes_per_axis: usize,
    /// Max `|G − I|` over pairs that are not `±` of each other.
    pub max_deviation: f64,
    /// Max `|G − closed form|` over all pairs, including collinear ones.
    pub closed_form_deviation: f64,
    /// Index pairs with `θ′ = −θ`.
    pub collinear_pairs: Vec<(usize, usize)>,
}

/// Gram matrix `2·E_P[sin(2π⟨θ,x⟩)·sin(2π⟨θ′,x⟩)]` under the uniform law on `[−1,1]^d`.
pub fn gram_matrix(frequencies: &[Vec<i64>], nodes_per_axis: usize) -> Result<Vec<Vec<f64>>> {
    let d = frequencies.first().map_or(0, Vec::len);
    if frequencies.iter().any(|t| t.len() != d) {
        return Err(Error::Shape("frequencies of mixed dimension".into()));
    }
    grid_guard(d, nodes_per_axis)?;
    let grids: Vec<Vec<f64>> = frequencies.iter().map(|t| sine_on_grid(t, nodes_per_axis)).collect();
    let total = nodes_per_axis.pow(d as u32) as f64;
    Ok(grids
        .iter()
        .map(|a| {
            grids
                .iter()
                .map(|b| 2.0 * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / total)
                .collect()
        })
        .collect())
}

fn closed_form_inner(a: &[i64], b: &[i64]) -> f64 {
    let same = a == b;
    let opposite = a.iter().zip(b).all(|(x, y)| *x == -*y);
    match (same, opposite) {
        (true, true) => 0.0, // θ = 0
        (true, false) => 1.0,
        (false, true) => -1.0,
        (false, false) => 0.0,
    }
}

pub fn verify_orthonormality(frequencies: &[Vec<i64>], nodes_per_axis: usize) -> Result<OrthonormalityReport> {
    let gram = gram_matrix(frequencies, nodes_per_axis)?;
    let mut max_deviation: f64 = 0.0;
    let mut closed_form_deviation: f64 = 0.0;
    let mut collinear_pairs = Vec::new();
    for (i, a) in frequencies.iter().enumerate() {
        for (j, b) in frequencies.iter().enumerate() {
            let cf = closed_form_inner(a, b);
            closed_form_deviation = closed_form_deviation.max((gram[i][j] - cf).abs());
            let opposite = a != b && a.iter().zip(b).all(|(x, y)| *x == -*y);
            if opposite {
                if i < j {
                    collinear_pairs.push((i, j));
                }
                continue;
            }
            let ideal = if i == j { 1.0 } else { 0.0 };
            max_deviation = max_deviation.max((gram[i][j] - ideal).abs());
        }
    }
    Ok(OrthonormalityReport {
        nodes_per_axis,
        max_deviation,
        closed_form_deviation,
        collinear_pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingSet {
    pub d_in: usize,
    pub a: u64,
    pub b: f64,
    pub t: usize,
    /// Full lattice count `#Λ`, the `N` used in rate formulas.
    pub lattice_count: String,
    pub nonzero_lattice_points: usize,
    /// One representative per `±θ` pair.
    pub frequencies: Vec<Vec<i64>>,
    pub code: ConstantWeightCode,
    /// `B²/(5T)`.
    pub separation: f64,
    /// Smallest `B²‖a−a′‖²/T²` over codeword pairs.
    pub min_sq_distance: Option<f64>,
    /// Largest `(B/T)Σ|a_k|‖θ_k‖₁²` over codewords.
    pub max_variation_certificate: f64,
    /// `B·A²`.
    pub variation_bound: f64,
}

impl PackingSet {
    /// `f_a(x) = (B/T)·Σ_k a_k sin(2π⟨θ_k, x⟩)` for codeword `index`.
    pub fn evaluate(&self, index: usize, x: &[f64]) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.code.codewords[index]
            .iter()
            .map(|&k| {
                let th = &self.frequencies[k];
                (two_pi * th.iter().zip(x).map(|(t, xi)| *t as f64 * xi).sum::<f64>()).sin()
            })
            .sum::<f64>()
            * self.b
            / self.t as f64
    }

    pub fn predicted_sq_distance(&self, i: usize, j: usize) -> f64 {
        let h = support_distance(&self.code.codewords[i], &self.code.codewords[j]) as f64;
        (self.b / self.t as f64).powi(2) * h
    }

    /// `2·E_P[(f_a − f_a′)²]` by quadrature, for every pair `i < j`.
    pub fn quadrature_sq_distances(&self) -> Result<Vec<(usize, usize, f64)>> {
        let max_freq = self.frequencies.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let n = quadrature_nodes(max_freq);
        grid_guard(self.d_in, n)?;
        let grids: Vec<Vec<f64>> = self.frequencies.iter().map(|t| sine_on_grid(t, n)).collect();
        let total = n.pow(self.d_in as u32);
        let scale = self.b / self.t as f64;
        let fvals: Vec<Vec<f64>> = self
            .code
            .codewords
            .iter()
            .map(|w| (0..total).map(|p| scale * w.iter().map(|&k| grids[k][p]).sum::<f64>()).collect())
            .collect();
        let mut out = Vec::new();
        for i in 0..fvals.len() {
            for j in i + 1..fvals.len() {
                let s: f64 = fvals[i].iter().zip(&fvals[j]).map(|(a, b)| (a - b).powi(2)).sum();
                out.push((i, j, 2.0 * s / total as f64));
            }
        }
        Ok(out)
    }
}

pub fn build_packing(d_in: usize, a: u64, b: f64, t: usize, seed: u64) -> Result<PackingSet> {
    if d_in == 0 || a == 0 || !(b > 0.0) {
        return Err(Error::Domain("need d_in ≥ 1, A ≥ 1, B > 0".into()));
    }
    let lattice = enumerate_lattice(d_in, a)?;
    let nonzero = lattice.len() - 1;
    let frequencies = packing_frequencies(d_in, a)?;
    let code = build_code(frequencies.len(), t, seed)?;
    let scale = b / t as f64;
    let max_variation_certificate = code
        .codewords
        .iter()
        .map(|w| {
            w.iter()
                .map(|&k| scale * (frequencies[k].iter().map(|x| x.abs()).sum::<i64>() as f64).powi(2))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let min_sq_distance = code.min_distance.map(|h| scale * scale * h as f64);
    Ok(PackingSet {
        d_in,
        a,
        b,
        t,
        lattice_count: lattice_count(d_in as u64, a).to_string(),
        nonzero_lattice_points: nonzero,
        frequencies,
        code,
        separation: b * b / (5.0 * t as f64),
        min_sq_distance,
        max_variation_certificate,
        variation_bound: b * (a * a) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundRate {
    /// `⌈√(v/B)⌉`.
    pub a: u64,
    pub eps_sq: f64,
    /// `d_in > c·A(n/σ²)^{1/A}B^{2/A}[ln(d_in/A + 1)]^{−1/A} − A` with `c = 1`.
    pub feasible: bool,
    pub feasibility_rhs: f64,
    /// `B²/(5ε²)`.
    pub t: f64,
    /// `5nε²/(2σ²)`.
    pub kl_budget: f64,
    /// `B·A² ≤ v`; false whenever the ceiling moves `A` above `√(v/B)`.
    pub class_contained: bool,
    /// Exponent of `1/n` in `ε_n²`; the upper rate from the cube-root theorem is `1/3`.
    pub lower_exponent: f64,
    pub upper_exponent: f64,
}

pub fn kl_budget(n: f64, eps_sq: f64, sigma2: f64) -> f64 {
    5.0 * n * eps_sq / (2.0 * sigma2)
}

pub fn lower_bound_rate(v: f64, b: f64, sigma2: f64, d_in: usize, n: f64) -> Result<LowerBoundRate> {
    for (name, x) in [("v", v), ("B", b), ("sigma2", sigma2), ("n", n)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("{name} = {x} must be positive")));
        }
    }
    let din = d_in as f64;
    let a = (v / b).sqrt().ceil().max(1.0);
    let eps_sq = (sigma2 * b.powf(1.5) * v.sqrt() * ((b / v).sqrt() * din + 1.0).ln() / n).sqrt();
    let rhs = a * (n / sigma2).powf(1.0 / a) * b.powf(2.0 / a) * (din / a + 1.0).ln().powf(-1.0 / a) - a;
    Ok(LowerBoundRate {
        a: a as u64,
        eps_sq,
        feasible: din > rhs,
        feasibility_rhs: rhs,
        t: b * b / (5.0 * eps_sq),
        kl_budget: kl_budget(n, eps_sq, sigma2),
        class_contained: b * a * a <= v * (1.0 + 1e-12),
        lower_exponent: 0.5,
        upper_exponent: 1.0 / 3.0,
    })
}
