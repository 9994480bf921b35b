//! The generator matrix, the quantities derived from it, and the
//! word/signature coordinate system for vertices of the order-t graph.
//!
//! A symmetric matrix `P` in `[0,1]^{k x k}` generates a random graph on
//! `n = k^t` vertices in which the pair `{u, v}` is an edge independently
//! with probability equal to the `(u, v)` entry of the t-fold Kronecker
//! power of `P`. Every vertex is identified with a word of length `t` over
//! the alphabet `{1, ..., k}`, and the edge probability factors over digit
//! pairs, which is what every algorithm here exploits.

use ndarray::Array2;
use num::rational::BigRational;
use num::{BigInt, ToPrimitive, Zero};
use serde::Deserialize;
use std::path::Path;

use crate::error::{Result, SkgError};

/// Symmetric probability matrix `P` together with optional exact-rational
/// entries used for knife-edge classification tests.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    k: usize,
    entries: Array2<f64>,
    rational: Option<Vec<BigRational>>,
}

#[derive(Deserialize)]
struct MatrixFile {
    k: usize,
    entries: Vec<Vec<f64>>,
    #[serde(default)]
    rational: Option<Vec<Vec<String>>>,
}

fn ulp(x: f64) -> f64 {
    if x == 0.0 {
        return f64::MIN_POSITIVE;
    }
    let next = f64::from_bits(x.abs().to_bits() + 1);
    next - x.abs()
}

fn parse_rational(s: &str, row: usize, col: usize) -> Result<BigRational> {
    let mk_err = |reason: String| SkgError::InvalidEntry { row, col, reason };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| mk_err(format!("bad rational numerator {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| mk_err(format!("bad rational denominator {s:?}")))?;
    if den.is_zero() {
        return Err(mk_err("rational has zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

impl GeneratorMatrix {
    /// Validate and wrap a dense entry list. Errors name the offending
    /// entry with 1-based row/column.
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(entries, None)
    }

    /// As [`GeneratorMatrix::new`], with exact-rational entries mirroring
    /// the floats. Each rational must equal its float to within one ulp.
    pub fn with_rational(entries: Vec<Vec<f64>>, rational: Vec<Vec<BigRational>>) -> Result<Self> {
        Self::build(entries, Some(rational))
    }

    fn build(entries: Vec<Vec<f64>>, rational: Option<Vec<Vec<BigRational>>>) -> Result<Self> {
        let k = entries.len();
        if k == 0 {
            return Err(SkgError::InvalidMatrix("matrix is empty".into()));
        }
        let mut flat = Array2::zeros((k, k));
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(SkgError::InvalidMatrix(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    k
                )));
            }
            for (j, &e) in row.iter().enumerate() {
                if !e.is_finite() || !(0.0..=1.0).contains(&e) {
                    return Err(SkgError::InvalidEntry {
                        row: i + 1,
                        col: j + 1,
                        reason: format!("entry {e} outside [0,1]"),
                    });
                }
                flat[[i, j]] = e;
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if flat[[i, j]] != flat[[j, i]] {
                    return Err(SkgError::InvalidEntry {
                        row: i + 1,
                        col: j + 1,
                        reason: format!(
                            "asymmetric: entry {} != transposed entry {}",
                            flat[[i, j]],
                            flat[[j, i]]
                        ),
                    });
                }
            }
        }
        let rational = match rational {
            None => None,
            Some(rows) => {
                if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                    return Err(SkgError::InvalidMatrix(
                        "rational entries must be a k x k array".into(),
                    ));
                }
                let mut flat_r = Vec::with_capacity(k * k);
                for (i, row) in rows.into_iter().enumerate() {
                    for (j, r) in row.into_iter().enumerate() {
                        let f = flat[[i, j]];
                        let rf = r.to_f64().unwrap_or(f64::NAN);
                        if !rf.is_finite() || (rf - f).abs() > ulp(f) {
                            return Err(SkgError::InvalidEntry {
                                row: i + 1,
                                col: j + 1,
                                reason: format!("rational {r} does not match float entry {f}"),
                            });
                        }
                        flat_r.push(r);
                    }
                }
                Some(flat_r)
            }
        };
        Ok(GeneratorMatrix { k, entries: flat, rational })
    }

    /// Parse the JSON matrix format:
    /// `{"k": 2, "entries": [[...],[...]], "rational": [["9/10", ...], ...]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(s)?;
        if file.entries.len() != file.k {
            return Err(SkgError::InvalidMatrix(format!(
                "declared k={} but entries has {} rows",
                file.k,
                file.entries.len()
            )));
        }
        let rational = match file.rational {
            None => None,
            Some(rows) => {
                let mut parsed = Vec::with_capacity(rows.len());
                for (i, row) in rows.into_iter().enumerate() {
                    let mut prow = Vec::with_capacity(row.len());
                    for (j, s) in row.into_iter().enumerate() {
                        prow.push(parse_rational(&s, i + 1, j + 1)?);
                    }
                    parsed.push(prow);
                }
                Some(parsed)
            }
        };
        match rational {
            None => Self::new(file.entries),
            Some(r) => Self::with_rational(file.entries, r),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn rational_entry(&self, i: usize, j: usize) -> Option<&BigRational> {
        self.rational.as_ref().map(|r| &r[i * self.k + j])
    }

    pub fn has_rational(&self) -> bool {
        self.rational.is_some()
    }

    /// Exact column sums, available only when rational entries were given.
    pub fn rational_column_sums(&self) -> Option<Vec<BigRational>> {
        let r = self.rational.as_ref()?;
        Some(
            (0..self.k)
                .map(|j| (0..self.k).map(|i| r[i * self.k + j].clone()).sum())
                .collect(),
        )
    }
}

/// Everything derived from `P` that the rest of the crate consumes.
///
/// `m`, `m1`, `l` and `pi` are only defined when every column sum is
/// positive; a zero column sum means an isolated vertex in the underlying
/// weighted graph and those fields are `None`.
#[derive(Debug, Clone)]
pub struct DerivedQuantities {
    /// Column sums in original index order.
    pub c: Vec<f64>,
    /// The same values sorted nondecreasing.
    pub c_sorted: Vec<f64>,
    /// Total weight `vol(W) = sum of c`.
    pub vol_w: f64,
    /// `L_i = ln(c_i)`.
    pub l: Option<Vec<f64>>,
    /// Row-stochastic walk matrix `M = C^{-1} P`.
    pub m: Option<Array2<f64>>,
    /// Symmetrized walk matrix `M1 = C^{-1/2} P C^{-1/2}`.
    pub m1: Option<Array2<f64>>,
    /// Stationary distribution `pi_i = c_i / vol(W)`.
    pub pi: Option<Vec<f64>>,
    /// Support adjacency: `P_ij > 0`.
    pub support_adj: Array2<bool>,
    /// Backbone adjacency: `P_ij == 1`.
    pub backbone_adj: Array2<bool>,
    /// Exact column sums when the matrix carries rational entries.
    pub c_rational: Option<Vec<BigRational>>,
}

impl DerivedQuantities {
    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn c_min(&self) -> f64 {
        self.c_sorted[0]
    }

    pub fn c_max(&self) -> f64 {
        *self.c_sorted.last().unwrap()
    }

    pub fn prod_c(&self) -> f64 {
        self.c.iter().product()
    }

    /// `sum_i c_i ln(c_i)`; requires all column sums positive.
    pub fn sum_c_ln_c(&self) -> Option<f64> {
        let l = self.l.as_ref()?;
        Some(self.c.iter().zip(l).map(|(c, l)| c * l).sum())
    }
}

/// Derive column sums, walk matrices, stationary distribution and
/// support/backbone adjacency from a validated generator matrix.
pub fn derive(p: &GeneratorMatrix) -> DerivedQuantities {
    let k = p.k();
    let c: Vec<f64> = (0..k).map(|j| (0..k).map(|i| p.entry(i, j)).sum()).collect();
    let mut c_sorted = c.clone();
    c_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let vol_w: f64 = c.iter().sum();

    let all_positive = c.iter().all(|&ci| ci > 0.0);
    let (l, m, m1, pi) = if all_positive {
        let l: Vec<f64> = c.iter().map(|&ci| ci.ln()).collect();
        let mut m = Array2::zeros((k, k));
        let mut m1 = Array2::zeros((k, k));
        for i in 0..k {
            for j in 0..k {
                m[[i, j]] = p.entry(i, j) / c[i];
                m1[[i, j]] = p.entry(i, j) / (c[i] * c[j]).sqrt();
            }
        }
        let pi: Vec<f64> = c.iter().map(|&ci| ci / vol_w).collect();
        (Some(l), Some(m), Some(m1), Some(pi))
    } else {
        (None, None, None, None)
    };

    let mut support_adj = Array2::from_elem((k, k), false);
    let mut backbone_adj = Array2::from_elem((k, k), false);
    for i in 0..k {
        for j in 0..k {
            let (sup, bone) = match p.rational_entry(i, j) {
                Some(r) => (!r.is_zero(), *r == BigRational::from_integer(1.into())),
                None => (p.entry(i, j) > 0.0, p.entry(i, j) == 1.0),
            };
            support_adj[[i, j]] = sup;
            backbone_adj[[i, j]] = bone;
        }
    }

    DerivedQuantities {
        c,
        c_sorted,
        vol_w,
        l,
        m,
        m1,
        pi,
        support_adj,
        backbone_adj,
        c_rational: p.rational_column_sums(),
    }
}

/// Connectivity/bipartiteness of the support graph of `P`, plus the minimum
/// degree of the backbone graph. Vertex labels are 1-based, matching the
/// word alphabet `{1, ..., k}`.
#[derive(Debug, Clone)]
pub struct SupportReport {
    pub connected: bool,
    pub bipartite: bool,
    /// Connected components of the support graph as sorted vertex lists.
    pub components: Vec<Vec<usize>>,
    /// Minimum over vertices of the backbone degree; a loop `P_ii = 1`
    /// contributes to the degree of its vertex.
    pub backbone_min_degree: usize,
    /// The two sides of the bipartition when the support graph is
    /// connected and bipartite.
    pub bipartition: Option<(Vec<usize>, Vec<usize>)>,
}

pub fn check_support(p: &GeneratorMatrix) -> SupportReport {
    let d = derive(p);
    support_report(&d)
}

pub fn support_report(d: &DerivedQuantities) -> SupportReport {
    let k = d.k();
    let adj = &d.support_adj;

    // BFS component labeling with 2-coloring. A loop is an odd closed walk,
    // so any P_ii > 0 kills bipartiteness.
    let mut color = vec![-1i8; k];
    let mut comp = vec![usize::MAX; k];
    let mut bipartite = true;
    let mut ncomp = 0;
    for start in 0..k {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        comp[start] = ncomp;
        color[start] = 0;
        while let Some(v) = queue.pop_front() {
            for u in 0..k {
                if !adj[[v, u]] {
                    continue;
                }
                if u == v {
                    bipartite = false;
                    continue;
                }
                if comp[u] == usize::MAX {
                    comp[u] = ncomp;
                    color[u] = 1 - color[v];
                    queue.push_back(u);
                } else if color[u] == color[v] {
                    bipartite = false;
                }
            }
        }
        ncomp += 1;
    }

    let mut components = vec![Vec::new(); ncomp];
    for v in 0..k {
        components[comp[v]].push(v + 1);
    }
    let connected = ncomp == 1;

    let bipartition = if connected && bipartite {
        let a: Vec<usize> = (0..k).filter(|&v| color[v] == 0).map(|v| v + 1).collect();
        let b: Vec<usize> = (0..k).filter(|&v| color[v] == 1).map(|v| v + 1).collect();
        Some((a, b))
    } else {
        None
    };

    let backbone_min_degree = (0..k)
        .map(|i| (0..k).filter(|&j| d.backbone_adj[[i, j]]).count())
        .min()
        .unwrap_or(0);

    SupportReport {
        connected,
        bipartite,
        components,
        backbone_min_degree,
        bipartition,
    }
}

/// Number of vertices `k^t`, guarded against u64 overflow.
pub fn vertex_count(k: usize, t: u32) -> Result<u64> {
    let mut n: u64 = 1;
    for _ in 0..t {
        n = n
            .checked_mul(k as u64)
            .ok_or(SkgError::Overflow("vertex count k^t"))?;
    }
    Ok(n)
}

/// A vertex of the order-t graph as a word over `{1, ..., k}`.
///
/// The integer id is the big-endian base-k encoding with digit 1 mapping
/// to 0; this layout is exactly the index order the Kronecker product
/// induces, so `edge_probability(u, v)` equals the `(id(u), id(v))` entry
/// of the dense power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexWord {
    k: usize,
    digits: Vec<u8>,
}

impl VertexWord {
    pub fn from_digits(k: usize, digits: Vec<u8>) -> Result<Self> {
        if k == 0 || k > 255 {
            return Err(SkgError::Domain(format!("alphabet size {k} out of range")));
        }
        for (pos, &d) in digits.iter().enumerate() {
            if d == 0 || d as usize > k {
                return Err(SkgError::Domain(format!(
                    "digit {d} at position {pos} outside 1..={k}"
                )));
            }
        }
        vertex_count(k, digits.len() as u32)?;
        Ok(VertexWord { k, digits })
    }

    pub fn from_id(k: usize, t: u32, id: u64) -> Result<Self> {
        let n = vertex_count(k, t)?;
        if id >= n {
            return Err(SkgError::Domain(format!("vertex id {id} >= n = {n}")));
        }
        let mut digits = vec![1u8; t as usize];
        let mut rem = id;
        for pos in (0..t as usize).rev() {
            digits[pos] = (rem % k as u64) as u8 + 1;
            rem /= k as u64;
        }
        Ok(VertexWord { k, digits })
    }

    pub fn id(&self) -> u64 {
        let mut id: u64 = 0;
        for &d in &self.digits {
            id = id * self.k as u64 + (d as u64 - 1);
        }
        id
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }
}

/// Per-symbol proportions of a word; a point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    sigma: Vec<f64>,
}

impl Signature {
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(SkgError::Domain("signature must have k >= 1 entries".into()));
        }
        if sigma.iter().any(|&s| !(s >= 0.0)) {
            return Err(SkgError::Domain("signature entries must be >= 0".into()));
        }
        let total: f64 = sigma.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SkgError::Domain(format!(
                "signature entries sum to {total}, expected 1"
            )));
        }
        Ok(Signature { sigma })
    }

    /// The stationary signature `pi`.
    pub fn stationary(d: &DerivedQuantities) -> Result<Self> {
        let pi = d
            .pi
            .as_ref()
            .ok_or_else(|| SkgError::Domain("stationary signature needs all c_i > 0".into()))?;
        Ok(Signature { sigma: pi.clone() })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// One step of the walk: the row vector `sigma M`.
    pub fn step(&self, m: &Array2<f64>) -> Signature {
        let k = self.sigma.len();
        let mut out = vec![0.0; k];
        for (i, &si) in self.sigma.iter().enumerate() {
            if si == 0.0 {
                continue;
            }
            for j in 0..k {
                out[j] += si * m[[i, j]];
            }
        }
        Signature { sigma: out }
    }
}

/// The signature of a word: `sigma_i = (count of symbol i) / t`.
pub fn signature(w: &VertexWord) -> Result<Signature> {
    let t = w.t();
    if t == 0 {
        return Err(SkgError::Domain("signature of the empty word is undefined".into()));
    }
    let mut counts = vec![0u64; w.k()];
    for &d in w.digits() {
        counts[d as usize - 1] += 1;
    }
    Ok(Signature {
        sigma: counts.iter().map(|&c| c as f64 / t as f64).collect(),
    })
}

/// Expected degree of a vertex with the given signature in the order-t
/// graph: `exp(t <sigma, L>) = prod_i c_i^{sigma_i t}`.
///
/// When some `c_i = 0` and `sigma_i > 0` the expected degree is exactly 0;
/// that is reported as an explicit error rather than `exp(-inf)`.
pub fn expected_degree(sigma: &Signature, t: u32, d: &DerivedQuantities) -> Result<f64> {
    if sigma.k() != d.k() {
        return Err(SkgError::LengthMismatch(sigma.k(), d.k()));
    }
    let mut dot = 0.0;
    for (i, &s) in sigma.as_slice().iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        if d.c[i] == 0.0 {
            return Err(SkgError::Domain(format!(
                "expected degree is exactly 0: symbol {} has zero column sum",
                i + 1
            )));
        }
        dot += s * d.c[i].ln();
    }
    Ok((t as f64 * dot).exp())
}

/// `p_uv = prod_i P_{u_i v_i}`, the `(u, v)` entry of the Kronecker power.
pub fn edge_probability(u: &VertexWord, v: &VertexWord, p: &GeneratorMatrix) -> Result<f64> {
    if u.t() != v.t() {
        return Err(SkgError::LengthMismatch(u.t(), v.t()));
    }
    if u.k() != p.k() || v.k() != p.k() {
        return Err(SkgError::Domain(format!(
            "word alphabet ({}, {}) does not match matrix k={}",
            u.k(),
            v.k(),
            p.k()
        )));
    }
    let mut prob = 1.0;
    for (a, b) in u.digits().iter().zip(v.digits()) {
        prob *= p.entry(*a as usize - 1, *b as usize - 1);
        if prob == 0.0 {
            return Ok(0.0);
        }
    }
    Ok(prob)
}
