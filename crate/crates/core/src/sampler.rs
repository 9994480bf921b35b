//! Exact sampling of the order-t graph.
//!
//! Two samplers with identical output distribution:
//!
//! - `sample_naive` draws one Bernoulli per vertex pair; quadratic in the
//!   vertex count and used as the correctness oracle.
//! - `sample` groups the `k^{2t}` ordered cells of the Kronecker power into
//!   equiprobability classes (one class per multiset of digit-pair symbols)
//!   and walks each class with geometric skips, so its cost is proportional
//!   to the number of classes plus the number of realized edges.
//!
//! Cells with probability exactly 1 are enumerated directly; a cell is kept
//! only when its row id is strictly below its column id, which gives every
//! unordered pair exactly one Bernoulli draw.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::comb::{multinomial, Compositions};
use crate::error::{Result, SkgError};
use crate::genmatrix::{vertex_count, GeneratorMatrix, VertexWord};
use crate::rng::{substream, DOMAIN_GROUP, DOMAIN_NAIVE};

/// Most equiprobability groups `sample` will enumerate.
pub const MAX_GROUPS: u128 = 100_000_000;
/// Vertex-count guard for the naive sampler.
pub const NAIVE_MAX_N: u64 = 1 << 13;
/// Above this probability a group falls back to per-cell draws; the
/// geometric skip would divide by a vanishing `ln(1-q)`.
const SKIP_Q_CUTOFF: f64 = 0.99;
/// Groups per parallel batch.
const PAR_BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerId {
    Naive,
    Grasshop,
}

/// One equiprobability class of ordered cells of the Kronecker power.
#[derive(Debug, Clone)]
pub struct CellGroup {
    /// Multiset of cell symbols: `counts[(a-1)*k + (b-1)]` is how many
    /// positions carry the digit pair `(a, b)`. Sums to `t`.
    pub counts: Vec<u32>,
    /// `sum counts * ln P`; every cell in the group has probability
    /// `exp(log_q)`. Zero exactly when all touched entries equal 1.
    pub log_q: f64,
    /// Number of cells in the group, `t! / prod counts!`.
    pub size: u128,
    /// Lexicographic index of the composition among all `C(t+k^2-1, k^2-1)`
    /// compositions, zero-probability ones included; keys the RNG stream.
    pub index: u64,
}

/// A sampled order-t graph: a duplicate-free, sorted list of undirected
/// edges `u < v` with generation metadata.
#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub k: usize,
    pub t: u32,
    pub n: u64,
    pub edges: Vec<(u64, u64)>,
    pub seed: u64,
    pub sampler_id: SamplerId,
}

/// Multinomial group size `t! / prod m_ij!` in checked 128-bit arithmetic.
pub fn group_size(counts: &[u32]) -> Result<u128> {
    multinomial(counts)
}

/// Enumerates the equiprobability groups of `P^{(tensor t)}` in
/// lexicographic composition order, skipping zero-probability groups.
pub struct GroupEnumerator {
    log_p: Vec<f64>,
    comps: Compositions,
    next_index: u64,
    include_zero: bool,
}

impl Iterator for GroupEnumerator {
    type Item = Result<CellGroup>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let counts = self.comps.next()?;
            let index = self.next_index;
            self.next_index += 1;
            let mut log_q = 0.0;
            for (c, &m) in counts.iter().enumerate() {
                if m > 0 {
                    log_q += m as f64 * self.log_p[c];
                }
            }
            if log_q == f64::NEG_INFINITY && !self.include_zero {
                continue;
            }
            let size = match multinomial(&counts) {
                Ok(s) => s,
                Err(e) => return Some(Err(e)),
            };
            return Some(Ok(CellGroup { counts, log_q, size, index }));
        }
    }
}

fn group_enumerator(p: &GeneratorMatrix, t: u32, include_zero: bool) -> Result<GroupEnumerator> {
    let k = p.k();
    let total = Compositions::count(t, k * k)?;
    if total > MAX_GROUPS {
        return Err(SkgError::Guard {
            what: "equiprobability groups",
            value: total,
            limit: MAX_GROUPS,
        });
    }
    let mut log_p = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            log_p.push(p.entry(a, b).ln());
        }
    }
    Ok(GroupEnumerator {
        log_p,
        comps: Compositions::new(t, k * k),
        next_index: 0,
        include_zero,
    })
}

/// All groups with positive probability. Groups containing a zero entry of
/// `P` are skipped; their lexicographic indices are still consumed so RNG
/// streams do not depend on the sparsity pattern.
pub fn enumerate_groups(p: &GeneratorMatrix, t: u32) -> Result<GroupEnumerator> {
    group_enumerator(p, t, false)
}

/// Every group, zero-probability ones included; the sizes sum to `k^{2t}`.
pub fn enumerate_groups_including_zero(p: &GeneratorMatrix, t: u32) -> Result<GroupEnumerator> {
    group_enumerator(p, t, true)
}

/// The `r`-th arrangement (in lexicographic order over cell symbols
/// `(1,1) < (1,2) < ... < (k,k)`) of the multiset `counts`, decoded into
/// the row and column words of the cell.
pub fn unrank_cell(counts: &[u32], k: usize, r: u128) -> Result<(VertexWord, VertexWord)> {
    let t: u32 = counts.iter().sum();
    let size = multinomial(counts)?;
    if r >= size {
        return Err(SkgError::RankOutOfRange { rank: r, size });
    }
    let mut scratch = counts.to_vec();
    let mut u_digits = Vec::with_capacity(t as usize);
    let mut v_digits = Vec::with_capacity(t as usize);
    unrank_into(&mut scratch, size, r, |sym| {
        u_digits.push((sym / k) as u8 + 1);
        v_digits.push((sym % k) as u8 + 1);
    })?;
    Ok((
        VertexWord::from_digits(k, u_digits)?,
        VertexWord::from_digits(k, v_digits)?,
    ))
}

/// Core unranking loop: calls `place(symbol)` once per position, leftmost
/// first. `scratch` is consumed; `size` must be `multinomial(scratch)`.
///
/// Ranks small enough for 64-bit arithmetic take a fast path; 128-bit
/// division is a library call and dominates the skip sampler otherwise.
fn unrank_into(
    scratch: &mut [u32],
    size: u128,
    r: u128,
    mut place: impl FnMut(usize),
) -> Result<()> {
    let total: u64 = scratch.iter().map(|&x| x as u64).sum();
    if size <= (u64::MAX / (total + 1)) as u128 {
        unrank_into_u64(scratch, size as u64, r as u64, total, &mut place);
        return Ok(());
    }
    let mut size = size;
    let mut r = r;
    let mut total = total as u128;
    while total > 0 {
        let mut placed = false;
        for sym in 0..scratch.len() {
            let m = scratch[sym] as u128;
            if m == 0 {
                continue;
            }
            // arrangements beginning with `sym`: size * m / total, exact
            let sub = size
                .checked_mul(m)
                .ok_or(SkgError::Overflow("unranking"))?
                / total;
            if r < sub {
                place(sym);
                scratch[sym] -= 1;
                size = sub;
                total -= 1;
                placed = true;
                break;
            }
            r -= sub;
        }
        debug_assert!(placed, "rank exhausted symbols");
        if !placed {
            return Err(SkgError::Domain("unranking invariant violated".into()));
        }
    }
    Ok(())
}

fn unrank_into_u64(
    scratch: &mut [u32],
    mut size: u64,
    mut r: u64,
    mut total: u64,
    place: &mut impl FnMut(usize),
) {
    'position: while total > 0 {
        for sym in 0..scratch.len() {
            let m = scratch[sym] as u64;
            if m == 0 {
                continue;
            }
            if m == total {
                // only one symbol type left; flush the tail
                for _ in 0..total {
                    place(sym);
                }
                return;
            }
            let sub = size * m / total;
            if r < sub {
                place(sym);
                scratch[sym] -= 1;
                size = sub;
                total -= 1;
                continue 'position;
            }
            r -= sub;
        }
        unreachable!("rank exhausted symbols");
    }
}

/// Lexicographic rank of an arrangement of cell symbols; inverse of
/// [`unrank_cell`].
pub fn rank_cell(u: &VertexWord, v: &VertexWord, k: usize) -> Result<u128> {
    if u.t() != v.t() {
        return Err(SkgError::LengthMismatch(u.t(), v.t()));
    }
    let symbols: Vec<usize> = u
        .digits()
        .iter()
        .zip(v.digits())
        .map(|(&a, &b)| (a as usize - 1) * k + (b as usize - 1))
        .collect();
    let mut scratch = vec![0u32; k * k];
    for &s in &symbols {
        scratch[s] += 1;
    }
    let mut size = multinomial(&scratch)?;
    let mut total = symbols.len() as u128;
    let mut rank: u128 = 0;
    for &sym in &symbols {
        for lower in 0..sym {
            let m = scratch[lower] as u128;
            if m > 0 {
                rank += size
                    .checked_mul(m)
                    .ok_or(SkgError::Overflow("ranking"))?
                    / total;
            }
        }
        let m = scratch[sym] as u128;
        size = size.checked_mul(m).ok_or(SkgError::Overflow("ranking"))? / total;
        scratch[sym] -= 1;
        total -= 1;
    }
    Ok(rank)
}

/// Unranks straight to vertex ids, reusing a scratch buffer. Hot path of
/// the skip sampler.
fn unrank_ids(counts: &[u32], scratch: &mut Vec<u32>, k: u64, size: u128, r: u128) -> (u64, u64) {
    scratch.clear();
    scratch.extend_from_slice(counts);
    let mut u_id: u64 = 0;
    let mut v_id: u64 = 0;
    unrank_into(scratch, size, r, |sym| {
        u_id = u_id * k + (sym as u64 / k);
        v_id = v_id * k + (sym as u64 % k);
    })
    .expect("rank checked by caller");
    (u_id, v_id)
}

/// Draw the cells of one group independently with probability
/// `q = exp(log_q)` each, returning the kept `u < v` edges.
///
/// `q = 1` emits every cell; `q > 0.99` falls back to one draw per cell;
/// otherwise the position is advanced by geometric skips
/// `1 + floor(ln(U) / ln(1-q))`, which makes each cell an independent
/// Bernoulli(q) at cost proportional to the number of hits.
pub fn sample_group(g: &CellGroup, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(u64, u64)>> {
    if g.log_q == f64::NEG_INFINITY {
        return Err(SkgError::Domain("cannot sample a zero-probability group".into()));
    }
    let mut edges = Vec::new();
    sample_group_into(g, k as u64, rng, &mut Vec::new(), &mut |u, v| edges.push((u, v)));
    Ok(edges)
}

fn sample_group_into(
    g: &CellGroup,
    k: u64,
    rng: &mut ChaCha8Rng,
    scratch: &mut Vec<u32>,
    emit: &mut impl FnMut(u64, u64),
) {
    let q = g.log_q.exp();
    let n = g.size;
    let mut keep = |pos: u128, emit: &mut dyn FnMut(u64, u64)| {
        let (u, v) = unrank_ids(&g.counts, scratch, k, n, pos);
        if u < v {
            emit(u, v);
        }
    };
    if q >= 1.0 {
        let mut pos: u128 = 0;
        while pos < n {
            keep(pos, emit);
            pos += 1;
        }
    } else if q > SKIP_Q_CUTOFF {
        let mut pos: u128 = 0;
        while pos < n {
            let u: f64 = rng.sample(rand::distr::OpenClosed01);
            if u <= q {
                keep(pos, emit);
            }
            pos += 1;
        }
    } else if q > 0.0 {
        let ln_1mq = (-q).ln_1p();
        let mut pos: u128 = 0;
        loop {
            let u: f64 = rng.sample(rand::distr::OpenClosed01);
            let skip = (u.ln() / ln_1mq).floor();
            pos = pos.saturating_add(skip as u128);
            if pos >= n {
                break;
            }
            keep(pos, emit);
            pos += 1;
        }
    }
}

/// Digit-pair alphabet of the cells with probability exactly 1.
fn backbone_symbols(p: &GeneratorMatrix) -> Vec<(u64, u64)> {
    let k = p.k();
    let mut syms = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if p.entry(a, b) == 1.0 {
                syms.push((a as u64, b as u64));
            }
        }
    }
    syms
}

/// Enumerate every cell whose digit pairs all carry probability 1, by
/// running a t-digit odometer over the backbone symbols. Equivalent to
/// visiting all q = 1 groups, but with O(1) amortized work per cell.
fn emit_backbone_cells(
    syms: &[(u64, u64)],
    k: u64,
    t: u32,
    emit: &mut impl FnMut(u64, u64),
) {
    if syms.is_empty() || t == 0 {
        return;
    }
    let t = t as usize;
    // pow[p] = k^(t-1-p)
    let mut pow = vec![1u64; t];
    for p in (0..t - 1).rev() {
        pow[p] = pow[p + 1] * k;
    }
    let mut digit = vec![0usize; t];
    let mut u_id: u64 = syms[0].0 * pow.iter().sum::<u64>();
    let mut v_id: u64 = syms[0].1 * pow.iter().sum::<u64>();
    loop {
        if u_id < v_id {
            emit(u_id, v_id);
        }
        // odometer increment from the rightmost position; id deltas can be
        // negative, so update modulo 2^64 (true ids always fit)
        let mut p = t;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            let old = syms[digit[p]];
            let advance = digit[p] + 1 < syms.len();
            digit[p] = if advance { digit[p] + 1 } else { 0 };
            let new = syms[digit[p]];
            u_id = u_id.wrapping_add(new.0.wrapping_sub(old.0).wrapping_mul(pow[p]));
            v_id = v_id.wrapping_add(new.1.wrapping_sub(old.1).wrapping_mul(pow[p]));
            if advance {
                break;
            }
        }
    }
}

/// Stream every sampled edge of `G ~ P^{(tensor t)}` for the given seed to
/// `emit`, in unspecified order, without materializing the edge list.
/// The edge set is a pure function of `(P, t, seed)`.
pub fn for_each_sampled_edge(
    p: &GeneratorMatrix,
    t: u32,
    seed: u64,
    mut emit: impl FnMut(u64, u64),
) -> Result<u64> {
    vertex_count(p.k(), t)?;
    let mut count: u64 = 0;
    {
        let mut counted = |u: u64, v: u64| {
            count += 1;
            emit(u, v);
        };
        emit_backbone_cells(&backbone_symbols(p), p.k() as u64, t, &mut counted);
        let mut scratch = Vec::new();
        for group in enumerate_groups(p, t)? {
            let group = group?;
            if group.log_q == 0.0 {
                continue; // covered by the backbone pass
            }
            let mut rng = substream(seed, DOMAIN_GROUP, group.index);
            sample_group_into(&group, p.k() as u64, &mut rng, &mut scratch, &mut counted);
        }
    }
    Ok(count)
}

/// Exact sample of the order-t graph via equiprobability groups and
/// geometric skips. Deterministic in `(P, t, seed)`; `workers` only sets
/// the parallelism and never changes the output.
pub fn sample(p: &GeneratorMatrix, t: u32, seed: u64, workers: usize) -> Result<SampledGraph> {
    let n = vertex_count(p.k(), t)?;
    let k = p.k();
    let mut edges: Vec<(u64, u64)> = Vec::new();

    emit_backbone_cells(&backbone_symbols(p), k as u64, t, &mut |u, v| edges.push((u, v)));

    if workers <= 1 {
        let mut scratch = Vec::new();
        for group in enumerate_groups(p, t)? {
            let group = group?;
            if group.log_q == 0.0 {
                continue;
            }
            let mut rng = substream(seed, DOMAIN_GROUP, group.index);
            sample_group_into(&group, k as u64, &mut rng, &mut scratch, &mut |u, v| {
                edges.push((u, v))
            });
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SkgError::Domain(format!("thread pool: {e}")))?;
        let mut iter = enumerate_groups(p, t)?;
        loop {
            let mut batch = Vec::with_capacity(PAR_BATCH);
            for group in iter.by_ref().take(PAR_BATCH) {
                let group = group?;
                if group.log_q != 0.0 {
                    batch.push(group);
                }
            }
            if batch.is_empty() {
                break;
            }
            let results: Vec<Vec<(u64, u64)>> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|group| {
                        let mut rng = substream(seed, DOMAIN_GROUP, group.index);
                        let mut out = Vec::new();
                        let mut scratch = Vec::new();
                        sample_group_into(group, k as u64, &mut rng, &mut scratch, &mut |u, v| {
                            out.push((u, v))
                        });
                        out
                    })
                    .collect()
            });
            for r in results {
                edges.extend(r);
            }
        }
    }

    edges.sort_unstable();
    debug_assert!(edges.windows(2).all(|w| w[0] < w[1]), "duplicate cells emitted");
    Ok(SampledGraph { k, t, n, edges, seed, sampler_id: SamplerId::Grasshop })
}

/// Quadratic oracle: one seeded Bernoulli draw per unordered vertex pair.
pub fn sample_naive(p: &GeneratorMatrix, t: u32, seed: u64) -> Result<SampledGraph> {
    let n = vertex_count(p.k(), t)?;
    if n > NAIVE_MAX_N {
        return Err(SkgError::Guard {
            what: "naive sampler vertex count",
            value: n as u128,
            limit: NAIVE_MAX_N as u128,
        });
    }
    let k = p.k();
    let words: Vec<Vec<u8>> = (0..n)
        .map(|id| VertexWord::from_id(k, t, id).unwrap().digits().to_vec())
        .collect();
    let mut rng = substream(seed, DOMAIN_NAIVE, 0);
    let mut edges = Vec::new();
    for u in 0..n as usize {
        for v in (u + 1)..n as usize {
            let mut prob = 1.0;
            for (a, b) in words[u].iter().zip(&words[v]) {
                prob *= p.entry(*a as usize - 1, *b as usize - 1);
            }
            let draw: f64 = rng.sample(rand::distr::OpenClosed01);
            if draw <= prob {
                edges.push((u as u64, v as u64));
            }
        }
    }
    Ok(SampledGraph { k, t, n, edges, seed, sampler_id: SamplerId::Naive })
}

/// Expected number of edges, `(S^t - d^t) / 2` with `S` the sum of all
/// entries of `P` and `d` its diagonal sum.
pub fn expected_edge_count(p: &GeneratorMatrix, t: u32) -> f64 {
    let k = p.k();
    let mut s = 0.0;
    let mut diag = 0.0;
    for i in 0..k {
        diag += p.entry(i, i);
        for j in 0..k {
            s += p.entry(i, j);
        }
    }
    (s.powi(t as i32) - diag.powi(t as i32)) / 2.0
}

/// Variance of the edge count: `sum over pairs of p(1-p)`, in closed form
/// through the squared-entry sums.
pub fn edge_count_variance(p: &GeneratorMatrix, t: u32) -> f64 {
    let k = p.k();
    let mut s2 = 0.0;
    let mut diag2 = 0.0;
    for i in 0..k {
        diag2 += p.entry(i, i) * p.entry(i, i);
        for j in 0..k {
            s2 += p.entry(i, j) * p.entry(i, j);
        }
    }
    let sum_p = expected_edge_count(p, t);
    let sum_p2 = (s2.powi(t as i32) - diag2.powi(t as i32)) / 2.0;
    sum_p - sum_p2
}
