//! Dense symmetric eigenproblems on the k x k generator-level matrices and
//! the spectral bounds attached to them: mixing steps, relative pointwise
//! distance, the Cheeger interval, diameter and concentration bounds, and a
//! small dense oracle for sampled graphs.

use ndarray::Array2;

use crate::comb::{multinomial, Compositions};
use crate::error::{Result, SkgError};
use crate::genmatrix::DerivedQuantities;

/// Residual demanded of every eigenpair of the k x k walk matrix.
const EIG_RESIDUAL_TOL: f64 = 1e-10;

/// Largest graph the dense Laplacian oracle accepts.
pub const DENSE_ORACLE_MAX_N: usize = 4096;

/// Most distinct index-multisets `kron_power_spectrum` will enumerate.
const MAX_KRON_MULTISETS: u128 = 10_000_000;

/// Eigenvalues of the symmetrized walk matrix `M1`, equal to those of the
/// walk matrix `M` itself since the two are similar.
#[derive(Debug, Clone)]
pub struct WalkSpectrum {
    /// Eigenvalues, nonincreasing; `mu[0] = 1` when `W` is connected with
    /// all column sums positive.
    pub mu: Vec<f64>,
    /// Laplacian eigenvalues `1 - mu_i`, nondecreasing.
    pub lap: Vec<f64>,
    /// Two-sided spectral gap `min(1 - mu[1], 1 + mu[k-1])`; positive
    /// exactly when the walk mixes (connected, non-bipartite).
    pub gap: f64,
}

/// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues and
/// the orthogonal matrix of eigenvectors (columns), unsorted.
fn jacobi_eig(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut d = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);

    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| d[[i, j]] * d[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = d[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = d[[p, p]];
                let aqq = d[[q, q]];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    if i != p && i != q {
                        let dip = d[[i, p]];
                        let diq = d[[i, q]];
                        d[[i, p]] = c * dip - s * diq;
                        d[[p, i]] = d[[i, p]];
                        d[[i, q]] = s * dip + c * diq;
                        d[[q, i]] = d[[i, q]];
                    }
                }
                d[[p, p]] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                d[[q, q]] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                d[[p, q]] = 0.0;
                d[[q, p]] = 0.0;

                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    let vals = (0..n).map(|i| d[[i, i]]).collect();
    (vals, v)
}

/// Eigenvalues of the walk on `W` via the symmetric matrix `M1`, with every
/// eigenpair verified against `EIG_RESIDUAL_TOL`.
pub fn walk_spectrum(d: &DerivedQuantities) -> Result<WalkSpectrum> {
    let m1 = d
        .m1
        .as_ref()
        .ok_or_else(|| SkgError::Domain("walk spectrum needs all column sums positive".into()))?;
    let k = d.k();
    let (vals, vecs) = jacobi_eig(m1);

    let mut worst = 0.0f64;
    for (idx, &mu) in vals.iter().enumerate() {
        for i in 0..k {
            let mut mx = 0.0;
            for j in 0..k {
                mx += m1[[i, j]] * vecs[[j, idx]];
            }
            worst = worst.max((mx - mu * vecs[[i, idx]]).abs());
        }
    }
    if worst > EIG_RESIDUAL_TOL {
        return Err(SkgError::NoConvergence { residual: worst });
    }

    let mut mu = vals;
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lap = mu.iter().map(|&m| 1.0 - m).collect();
    let mut gap = if k == 1 {
        1.0
    } else {
        (1.0 - mu[1]).min(1.0 + mu[k - 1])
    };
    // disconnected/bipartite chains have gap exactly 0; snap rotation noise
    if gap.abs() <= 1e-12 {
        gap = 0.0;
    }
    Ok(WalkSpectrum { mu, lap, gap })
}

/// One distinct Laplacian eigenvalue of the t-fold Kronecker power with its
/// multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KronEig {
    /// `1 - mu_{a_1} mu_{a_2} ... mu_{a_t}`.
    pub lap: f64,
    pub multiplicity: u128,
}

/// Lazily enumerates the Laplacian spectrum of `I - M1^{(tensor t)}`: one
/// entry per multiset of eigenvalue indices, with multinomial multiplicity.
/// Total multiplicity over the whole enumeration is exactly `k^t`.
pub struct KronPowerSpectrum {
    mu: Vec<f64>,
    comps: Compositions,
}

impl Iterator for KronPowerSpectrum {
    type Item = KronEig;

    fn next(&mut self) -> Option<KronEig> {
        let m = self.comps.next()?;
        let mut product = 1.0;
        for (i, &cnt) in m.iter().enumerate() {
            if cnt > 0 {
                product *= self.mu[i].powi(cnt as i32);
            }
        }
        // cannot overflow: the constructor checked k^t * (t+1) fits u128
        let multiplicity = multinomial(&m).expect("multiplicity bounded by k^t");
        Some(KronEig { lap: 1.0 - product, multiplicity })
    }
}

pub fn kron_power_spectrum(s: &WalkSpectrum, t: u32) -> Result<KronPowerSpectrum> {
    if t == 0 {
        return Err(SkgError::Domain("kron power spectrum needs t >= 1".into()));
    }
    let k = s.mu.len();
    let multisets = Compositions::count(t, k)?;
    if multisets > MAX_KRON_MULTISETS {
        return Err(SkgError::Guard {
            what: "distinct index-multisets",
            value: multisets,
            limit: MAX_KRON_MULTISETS,
        });
    }
    // guarantee multiplicities (and their intermediates) stay in u128
    let mut total: u128 = 1;
    for _ in 0..t {
        total = total
            .checked_mul(k as u128)
            .ok_or(SkgError::Overflow("kron power multiplicity"))?;
    }
    total
        .checked_mul(t as u128 + 1)
        .ok_or(SkgError::Overflow("kron power multiplicity"))?;
    Ok(KronPowerSpectrum {
        mu: s.mu.clone(),
        comps: Compositions::new(t, k),
    })
}

/// Walk steps after which the relative pointwise distance provably drops
/// below `eps`: `ceil((1/gap) ln(2 vol(W) / (c_min eps)))`, at least 1.
pub fn mixing_steps(s: &WalkSpectrum, d: &DerivedQuantities, eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(SkgError::Domain(format!("eps must be positive, got {eps}")));
    }
    if s.gap <= 0.0 {
        return Err(SkgError::Domain(format!(
            "no mixing: spectral gap {} <= 0 (disconnected or bipartite W)",
            s.gap
        )));
    }
    let c_min = d.c_min();
    let steps = ((2.0 * d.vol_w / (c_min * eps)).ln() / s.gap).ceil();
    Ok((steps.max(1.0)) as u64)
}

/// The literal textbook bound with `lambda = max(|1 - mu_1|, |mu_{k-1} - 1|)`,
/// exposed for comparison. The conservative [`mixing_steps`] is what the
/// rest of the crate certifies and uses.
pub fn mixing_steps_literal(s: &WalkSpectrum, d: &DerivedQuantities, eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(SkgError::Domain(format!("eps must be positive, got {eps}")));
    }
    let k = s.mu.len();
    if k == 1 {
        return Ok(1);
    }
    let lambda = (1.0 - s.mu[1]).abs().max((s.mu[k - 1] - 1.0).abs());
    if lambda <= 0.0 {
        return Err(SkgError::Domain("literal lambda is zero".into()));
    }
    let c_min = d.c_min();
    let bound = (d.vol_w / (eps * c_min)).ln() / lambda;
    Ok((bound.floor() as i64 + 1).max(1) as u64)
}

pub(crate) fn mat_pow(m: &Array2<f64>, mut s: u64) -> Array2<f64> {
    let n = m.nrows();
    let mut result = Array2::eye(n);
    let mut base = m.clone();
    while s > 0 {
        if s & 1 == 1 {
            result = result.dot(&base);
        }
        s >>= 1;
        if s > 0 {
            base = base.dot(&base);
        }
    }
    result
}

/// Exact relative pointwise distance after `s` steps,
/// `Delta(s) = max_j max_i |(e_j M^s)_i - pi_i| / pi_i`.
///
/// The supremum over the whole simplex is attained at a basis vector since
/// each coordinate deviation is the absolute value of an affine map.
pub fn rpd_delta(d: &DerivedQuantities, s: u64) -> Result<f64> {
    let m = d
        .m
        .as_ref()
        .ok_or_else(|| SkgError::Domain("rpd needs all column sums positive".into()))?;
    let pi = d.pi.as_ref().unwrap();
    let ms = mat_pow(m, s);
    let k = d.k();
    let mut delta: f64 = 0.0;
    for j in 0..k {
        for i in 0..k {
            delta = delta.max((ms[[j, i]] - pi[i]).abs() / pi[i]);
        }
    }
    Ok(delta)
}

/// Cheeger interval `[lambda_1 / 2, sqrt(2 lambda_1)]` bracketing the
/// Cheeger constant.
pub fn cheeger_interval(lambda1: f64) -> Result<(f64, f64)> {
    if !(0.0..=2.0).contains(&lambda1) {
        return Err(SkgError::Domain(format!(
            "lambda_1 = {lambda1} outside [0, 2]"
        )));
    }
    Ok((lambda1 / 2.0, (2.0 * lambda1).sqrt()))
}

/// Diameter bound `ceil(ln(n-1) / ln(1/(1-lambda_1)))` for a connected
/// graph with smallest nontrivial Laplacian eigenvalue `lambda_1`.
pub fn diameter_bound(lambda1: f64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(SkgError::Domain(format!("diameter bound needs n >= 2, got {n}")));
    }
    if lambda1 >= 1.0 {
        return Ok(1);
    }
    if !(lambda1 > 0.0) {
        return Err(SkgError::Domain(format!(
            "diameter bound needs lambda_1 in (0, 1), got {lambda1}"
        )));
    }
    let bound = (((n - 1) as f64).ln() / (1.0 / (1.0 - lambda1)).ln()).ceil() as u64;
    Ok(bound.max(1))
}

#[derive(Debug, Clone, Copy)]
pub struct ConcentrationBound {
    /// `3 sqrt(3 ln(4n/eps) / delta_min)`.
    pub bound: f64,
    /// Whether the concentration hypothesis `delta_min >= 3 ln(4n/eps)` holds.
    pub hypothesis_holds: bool,
}

/// Spectral concentration bound for graphs with independent edges.
pub fn concentration_bound(delta_min: f64, n: u64, eps: f64) -> Result<ConcentrationBound> {
    if !(delta_min > 0.0) {
        return Err(SkgError::Domain(format!(
            "minimum expected degree must be positive, got {delta_min}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SkgError::Domain(format!("eps must be in (0,1), got {eps}")));
    }
    let ln_term = (4.0 * n as f64 / eps).ln();
    Ok(ConcentrationBound {
        bound: 3.0 * (3.0 * ln_term / delta_min).sqrt(),
        hypothesis_holds: delta_min >= 3.0 * ln_term,
    })
}

/// Normalized Laplacian spectrum of an explicit small graph.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    /// Eigenvalues of `I - D^{-1/2} A D^{-1/2}` over the non-isolated
    /// vertices, nondecreasing.
    pub eigenvalues: Vec<f64>,
    /// Vertices with zero degree, excluded from the spectrum.
    pub isolated: Vec<u64>,
}

/// Eigenvalues of a dense symmetric matrix via the same Jacobi rotations
/// used for the walk matrix. Cubic per sweep, which is why the oracle is
/// capped at `DENSE_ORACLE_MAX_N`.
fn sym_eigvals(a: &Array2<f64>) -> Result<Vec<f64>> {
    let (mut vals, _) = jacobi_eig(a);
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals)
}

fn dense_eigs_impl(n: usize, edges: &[(u64, u64, f64)]) -> Result<LaplacianSpectrum> {
    if n > DENSE_ORACLE_MAX_N {
        return Err(SkgError::Guard {
            what: "dense oracle vertex count",
            value: n as u128,
            limit: DENSE_ORACLE_MAX_N as u128,
        });
    }
    let mut adj = Array2::<f64>::zeros((n, n));
    for &(u, v, w) in edges {
        let (u, v) = (u as usize, v as usize);
        if u >= n || v >= n {
            return Err(SkgError::Domain(format!("edge ({u},{v}) outside 0..{n}")));
        }
        adj[[u, v]] += w;
        if u != v {
            adj[[v, u]] += w;
        }
    }
    let degree: Vec<f64> = (0..n).map(|i| (0..n).map(|j| adj[[i, j]]).sum()).collect();
    let kept: Vec<usize> = (0..n).filter(|&i| degree[i] > 0.0).collect();
    let isolated: Vec<u64> = (0..n).filter(|&i| degree[i] == 0.0).map(|i| i as u64).collect();

    let m = kept.len();
    let mut lap = Array2::<f64>::eye(m);
    for (a, &i) in kept.iter().enumerate() {
        for (b, &j) in kept.iter().enumerate() {
            if adj[[i, j]] != 0.0 {
                lap[[a, b]] -= adj[[i, j]] / (degree[i] * degree[j]).sqrt();
            }
        }
    }
    let eigenvalues = sym_eigvals(&lap)?;
    Ok(LaplacianSpectrum { eigenvalues, isolated })
}

/// Normalized Laplacian spectrum of an unweighted simple graph on `n`
/// vertices, `n <= 4096`. Oracle for [`kron_power_spectrum`] and for
/// sampled-graph diagnostics.
pub fn dense_graph_eigs(n: usize, edges: &[(u64, u64)]) -> Result<LaplacianSpectrum> {
    let weighted: Vec<(u64, u64, f64)> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    dense_eigs_impl(n, &weighted)
}

/// Weighted variant; loops are allowed and their weight counts once toward
/// the degree, so feeding the explicit entries of a Kronecker power
/// reproduces `I - M1^{(tensor t)}` exactly.
pub fn dense_graph_eigs_weighted(n: usize, edges: &[(u64, u64, f64)]) -> Result<LaplacianSpectrum> {
    dense_eigs_impl(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmatrix::{derive, GeneratorMatrix};
    use rand::prelude::*;

    fn matrix(entries: &[&[f64]]) -> GeneratorMatrix {
        GeneratorMatrix::new(entries.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn random_connected_nonbipartite(rng: &mut impl Rng, k: usize) -> GeneratorMatrix {
        loop {
            let mut rows = vec![vec![0.0; k]; k];
            for i in 0..k {
                for j in i..k {
                    let v: f64 = rng.random();
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let p = GeneratorMatrix::new(rows).unwrap();
            let s = crate::genmatrix::check_support(&p);
            let d = derive(&p);
            if s.connected && !s.bipartite && d.c_min() > 0.0 {
                return p;
            }
        }
    }

    #[test]
    fn walk_spectrum_rank_one() {
        let d = derive(&matrix(&[&[0.5, 0.5], &[0.5, 0.5]]));
        let s = walk_spectrum(&d).unwrap();
        assert!((s.mu[0] - 1.0).abs() < 1e-12);
        assert!(s.mu[1].abs() < 1e-12);
        assert!((s.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn walk_spectrum_bipartite_edge() {
        let d = derive(&matrix(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let s = walk_spectrum(&d).unwrap();
        assert!((s.mu[0] - 1.0).abs() < 1e-12);
        assert!((s.mu[1] + 1.0).abs() < 1e-12);
        assert!(s.gap.abs() < 1e-12);
    }

    #[test]
    fn walk_spectrum_against_quadratic_oracle() {
        // 2x2 characteristic polynomial solved independently
        let p = matrix(&[&[0.9, 0.6], &[0.6, 0.3]]);
        let d = derive(&p);
        let m1 = d.m1.as_ref().unwrap();
        let tr = m1[[0, 0]] + m1[[1, 1]];
        let det = m1[[0, 0]] * m1[[1, 1]] - m1[[0, 1]] * m1[[1, 0]];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let roots = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        let s = walk_spectrum(&d).unwrap();
        assert!((s.mu[0] - roots[0]).abs() < 1e-12);
        assert!((s.mu[1] - roots[1]).abs() < 1e-12);
        assert!((s.mu[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kron_spectrum_rank_one_products() {
        let d = derive(&matrix(&[&[0.5, 0.5], &[0.5, 0.5]]));
        let s = walk_spectrum(&d).unwrap();
        let eigs: Vec<KronEig> = kron_power_spectrum(&s, 3).unwrap().collect();
        // products of {1, 0}: eigenvalue 0 with multiplicity 1, eigenvalue 1
        // with total multiplicity 7
        let zero: u128 = eigs
            .iter()
            .filter(|e| e.lap.abs() < 1e-12)
            .map(|e| e.multiplicity)
            .sum();
        let one: u128 = eigs
            .iter()
            .filter(|e| (e.lap - 1.0).abs() < 1e-12)
            .map(|e| e.multiplicity)
            .sum();
        assert_eq!(zero, 1);
        assert_eq!(one, 7);
    }

    #[test]
    fn kron_spectrum_t1_is_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = random_connected_nonbipartite(&mut rng, 3);
        let s = walk_spectrum(&derive(&p)).unwrap();
        let eigs: Vec<KronEig> = kron_power_spectrum(&s, 1).unwrap().collect();
        let mut got: Vec<f64> = eigs.iter().map(|e| e.lap).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, l) in got.iter().zip({
            let mut l = s.lap.clone();
            l.sort_by(|a, b| a.partial_cmp(b).unwrap());
            l
        }) {
            assert!((g - l).abs() < 1e-12);
        }
        assert!(eigs.iter().all(|e| e.multiplicity == 1));
    }

    /// Expand a multiset spectrum into a sorted list of eigenvalues.
    fn expand(eigs: &[KronEig]) -> Vec<f64> {
        let mut out = Vec::new();
        for e in eigs {
            for _ in 0..e.multiplicity {
                out.push(e.lap);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    fn dense_power_spectrum(p: &GeneratorMatrix, t: u32) -> Vec<f64> {
        let dense = crate::genmatrix::tests::dense_kron_power(p, t);
        let n = dense.nrows();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                if dense[[i, j]] != 0.0 {
                    edges.push((i as u64, j as u64, dense[[i, j]]));
                }
            }
        }
        dense_graph_eigs_weighted(n, &edges).unwrap().eigenvalues
    }

    #[test]
    fn kron_spectrum_matches_dense_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k in 2..=4usize {
            for _ in 0..167 {
                let p = random_connected_nonbipartite(&mut rng, k);
                let d = derive(&p);
                let s = walk_spectrum(&d).unwrap();
                for t in 2..=3u32 {
                    let lazy: Vec<KronEig> = kron_power_spectrum(&s, t).unwrap().collect();
                    let total: u128 = lazy.iter().map(|e| e.multiplicity).sum();
                    assert_eq!(total, (k as u128).pow(t));
                    let expanded = expand(&lazy);
                    let dense = dense_power_spectrum(&p, t);
                    assert_eq!(expanded.len(), dense.len());
                    for (a, b) in expanded.iter().zip(&dense) {
                        assert!((a - b).abs() <= 1e-9, "k={k} t={t}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn kron_smallest_nonzero_has_multiplicity_t() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut tested = 0;
        while tested < 20 {
            let p = random_connected_nonbipartite(&mut rng, 3);
            let s = walk_spectrum(&derive(&p)).unwrap();
            // hypotheses: mu_1 dominates |mu_{k-1}| and eigenvalues distinct
            if s.mu[1] <= s.mu[2].abs() + 1e-6 || (s.mu[1] - s.mu[2]).abs() < 1e-6 {
                continue;
            }
            tested += 1;
            let t = 4;
            let eigs: Vec<KronEig> = kron_power_spectrum(&s, t).unwrap().collect();
            let target = 1.0 - s.mu[1];
            let mult: u128 = eigs
                .iter()
                .filter(|e| (e.lap - target).abs() < 1e-9)
                .map(|e| e.multiplicity)
                .sum();
            assert_eq!(mult, t as u128);
            let smaller: u128 = eigs
                .iter()
                .filter(|e| e.lap > 1e-9 && e.lap < target - 1e-9)
                .map(|e| e.multiplicity)
                .sum();
            assert_eq!(smaller, 0);
        }
    }

    #[test]
    fn walk_spectrum_disconnected_has_zero_gap() {
        // two blocks, all column sums positive
        let d = derive(&matrix(&[
            &[0.5, 0.0, 0.0],
            &[0.0, 0.5, 0.5],
            &[0.0, 0.5, 0.5],
        ]));
        let s = walk_spectrum(&d).unwrap();
        assert_eq!(s.gap, 0.0);
    }

    #[test]
    fn kron_spectrum_guard() {
        let uniform5 = GeneratorMatrix::new(vec![vec![0.5; 5]; 5]).unwrap();
        let d = derive(&uniform5);
        let s = walk_spectrum(&d).unwrap();
        // C(134, 4) > 1e7 index-multisets
        assert!(matches!(
            kron_power_spectrum(&s, 130),
            Err(SkgError::Guard { .. })
        ));
        assert!(kron_power_spectrum(&s, 0).is_err());
    }

    #[test]
    fn mixing_steps_uniform_example() {
        let d = derive(&matrix(&[&[0.5, 0.5], &[0.5, 0.5]]));
        let s = walk_spectrum(&d).unwrap();
        // gap 1, vol 2, c_min 1: ceil(ln 40) = 4
        assert_eq!(mixing_steps(&s, &d, 0.1).unwrap(), 4);
    }

    #[test]
    fn mixing_steps_rejects_bipartite() {
        let d = derive(&matrix(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let s = walk_spectrum(&d).unwrap();
        assert!(mixing_steps(&s, &d, 0.1).is_err());
    }

    #[test]
    fn mixing_steps_certified_by_rpd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let k = rng.random_range(2..=4);
            let p = random_connected_nonbipartite(&mut rng, k);
            let d = derive(&p);
            let s = walk_spectrum(&d).unwrap();
            for eps in [0.1, 0.01] {
                let steps = mixing_steps(&s, &d, eps).unwrap();
                let delta = rpd_delta(&d, steps).unwrap();
                assert!(delta < eps, "Delta({steps}) = {delta} >= {eps}");
            }
        }
    }

    #[test]
    fn rpd_examples() {
        let uniform = derive(&matrix(&[&[0.5, 0.5], &[0.5, 0.5]]));
        assert!(rpd_delta(&uniform, 1).unwrap() < 1e-15);

        // s = 0: max_j max_i |delta_ij - pi_i| / pi_i
        let d = derive(&matrix(&[&[0.9, 0.6], &[0.6, 0.3]]));
        let pi = d.pi.clone().unwrap();
        let mut expect: f64 = 0.0;
        for j in 0..2 {
            for i in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                expect = expect.max((e - pi[i]).abs() / pi[i]);
            }
        }
        assert!((rpd_delta(&d, 0).unwrap() - expect).abs() < 1e-12);

        let s = walk_spectrum(&d).unwrap();
        let steps = mixing_steps(&s, &d, 0.1).unwrap();
        assert!(rpd_delta(&d, steps).unwrap() < 0.1);
    }

    #[test]
    fn rpd_vanishes_in_the_limit_and_is_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let p = random_connected_nonbipartite(&mut rng, 3);
            let d = derive(&p);
            let s = walk_spectrum(&d).unwrap();
            let s_big = 10 * mixing_steps(&s, &d, 1e-6).unwrap();
            assert!(rpd_delta(&d, s_big).unwrap() < 1e-8);
            let mut prev = f64::INFINITY;
            for steps in 0..15 {
                let delta = rpd_delta(&d, steps).unwrap();
                assert!(delta >= 0.0);
                assert!(delta <= prev + 1e-12, "Delta not nonincreasing");
                prev = delta;
            }
        }
    }

    #[test]
    fn cheeger_examples() {
        let (lo, hi) = cheeger_interval(0.5).unwrap();
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert_eq!(cheeger_interval(0.0).unwrap(), (0.0, 0.0));
        let (lo, hi) = cheeger_interval(2.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!(cheeger_interval(2.5).is_err());
        assert!(cheeger_interval(-0.1).is_err());
    }

    #[test]
    fn diameter_bound_examples() {
        assert_eq!(diameter_bound(0.5, 1025).unwrap(), 10);
        assert_eq!(diameter_bound(0.3, 2).unwrap(), 1);
        assert_eq!(diameter_bound(0.19, 100).unwrap(), 22);
        assert_eq!(diameter_bound(1.2, 100).unwrap(), 1);
        assert!(diameter_bound(0.0, 100).is_err());
        assert!(diameter_bound(0.5, 1).is_err());
    }

    #[test]
    fn concentration_examples() {
        let n = 1u64 << 20;
        // boundary: delta = 3 ln(4n/eps) makes the bound exactly 3
        let delta = 3.0 * (4.0 * n as f64 / 0.01).ln();
        let c = concentration_bound(delta, n, 0.01).unwrap();
        assert!((c.bound - 3.0).abs() < 1e-12);
        assert!(c.hypothesis_holds);

        let c = concentration_bound(1.0, n, 0.01).unwrap();
        assert!(!c.hypothesis_holds);
        assert!(c.bound.is_finite());

        // direct evaluation of 3 sqrt(3 ln(4n/eps) / delta)
        let c = concentration_bound(1e4, n, 0.01).unwrap();
        let expect = 3.0 * (3.0 * (4.0 * n as f64 / 0.01).ln() / 1e4).sqrt();
        assert!((c.bound - expect).abs() < 1e-15);
        assert!((c.bound - 0.231531).abs() < 1e-6);
    }

    #[test]
    fn dense_eigs_triangle_and_edge() {
        let tri = dense_graph_eigs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let expect = [0.0, 1.5, 1.5];
        for (a, b) in tri.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
        let edge = dense_graph_eigs(3, &[(0, 1)]).unwrap();
        assert_eq!(edge.isolated, vec![2]);
        assert!((edge.eigenvalues[0]).abs() < 1e-10);
        assert!((edge.eigenvalues[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn dense_eigs_guard() {
        assert!(dense_graph_eigs(5000, &[]).is_err());
    }

    #[test]
    fn walk_spectrum_residuals_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let k = rng.random_range(2..=4);
            let p = random_connected_nonbipartite(&mut rng, k);
            let d = derive(&p);
            // walk_spectrum verifies residuals internally
            let s = walk_spectrum(&d).unwrap();
            assert!((s.mu[0] - 1.0).abs() <= 1e-10);
            for &mu in &s.mu {
                assert!((-1.0 - 1e-10..=1.0 + 1e-10).contains(&mu));
            }
        }
    }
}
