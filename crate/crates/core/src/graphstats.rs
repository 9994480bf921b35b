//! Measurements on sampled graphs: component statistics via union-find,
//! BFS eccentricities and diameters, and the degree/neighbor-signature
//! checks that correspond to the generator-level predictions.

use rand::Rng;
use serde::Serialize;

use crate::error::{Result, SkgError};
use crate::genmatrix::{signature, DerivedQuantities, GeneratorMatrix, Signature, VertexWord};
use crate::rng::{substream, DOMAIN_STATS};
use crate::sampler::SampledGraph;

/// Memory guard: vertex counts beyond this would need > 2 GiB of state.
pub const STATS_MAX_N: u64 = 1 << 28;
/// Size cap for the exact all-pairs diameter.
pub const EXACT_DIAMETER_MAX_N: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentStats {
    pub n: u64,
    /// Edge count.
    pub m: u64,
    /// Vertices of degree zero.
    pub isolated: u64,
    pub largest: u64,
    pub second_largest: u64,
    /// Number of components, singletons included.
    pub component_count: u64,
    pub largest_fraction: f64,
}

/// Union-find with path halving and union by size.
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: u64,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n as u64,
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.components -= 1;
        true
    }

    pub fn component_count(&self) -> u64 {
        self.components
    }

    /// Sizes of the two largest components.
    pub fn top_two(&mut self) -> (u64, u64) {
        let n = self.parent.len();
        let mut best = 0u64;
        let mut second = 0u64;
        for x in 0..n as u32 {
            if self.find(x) == x {
                let s = self.size[x as usize] as u64;
                if s > best {
                    second = best;
                    best = s;
                } else if s > second {
                    second = s;
                }
            }
        }
        (best, second)
    }
}

/// Streaming accumulator: feed edges one at a time, no edge storage.
pub struct ComponentAccumulator {
    uf: UnionFind,
    touched: Vec<bool>,
    m: u64,
    n: u64,
}

impl ComponentAccumulator {
    pub fn new(n: u64) -> Result<Self> {
        if n > STATS_MAX_N {
            return Err(SkgError::Guard {
                what: "component stats vertex count",
                value: n as u128,
                limit: STATS_MAX_N as u128,
            });
        }
        Ok(ComponentAccumulator {
            uf: UnionFind::new(n as usize),
            touched: vec![false; n as usize],
            m: 0,
            n,
        })
    }

    pub fn add_edge(&mut self, u: u64, v: u64) {
        self.m += 1;
        self.touched[u as usize] = true;
        self.touched[v as usize] = true;
        self.uf.union(u as u32, v as u32);
    }

    pub fn finish(mut self) -> ComponentStats {
        let isolated = self.touched.iter().filter(|&&t| !t).count() as u64;
        let (largest, second_largest) = self.uf.top_two();
        ComponentStats {
            n: self.n,
            m: self.m,
            isolated,
            largest,
            second_largest,
            component_count: self.uf.component_count(),
            largest_fraction: if self.n > 0 {
                largest as f64 / self.n as f64
            } else {
                0.0
            },
        }
    }
}

/// Exact connected-component statistics of a sampled graph.
pub fn component_stats(g: &SampledGraph) -> Result<ComponentStats> {
    component_stats_from_edges(g.n, g.edges.iter().copied())
}

pub fn component_stats_from_edges(
    n: u64,
    edges: impl IntoIterator<Item = (u64, u64)>,
) -> Result<ComponentStats> {
    let mut acc = ComponentAccumulator::new(n)?;
    for (u, v) in edges {
        acc.add_edge(u, v);
    }
    Ok(acc.finish())
}

/// Partitioned variant: local union-finds over edge chunks whose spanning
/// forests are merged at the end. Must agree with the sequential result
/// exactly.
pub fn component_stats_parallel(n: u64, edges: &[(u64, u64)], chunks: usize) -> Result<ComponentStats> {
    use rayon::prelude::*;
    if n > STATS_MAX_N {
        return Err(SkgError::Guard {
            what: "component stats vertex count",
            value: n as u128,
            limit: STATS_MAX_N as u128,
        });
    }
    let chunks = chunks.max(1);
    let chunk_len = edges.len().div_ceil(chunks).max(1);
    let forests: Vec<Vec<(u32, u32)>> = edges
        .par_chunks(chunk_len)
        .map(|chunk| {
            let mut uf = UnionFind::new(n as usize);
            let mut forest = Vec::new();
            for &(u, v) in chunk {
                if uf.union(u as u32, v as u32) {
                    forest.push((u as u32, v as u32));
                }
            }
            forest
        })
        .collect();

    let mut acc = ComponentAccumulator::new(n)?;
    for &(u, v) in edges {
        acc.touched[u as usize] = true;
        acc.touched[v as usize] = true;
    }
    acc.m = edges.len() as u64;
    for forest in forests {
        for (u, v) in forest {
            acc.uf.union(u, v);
        }
    }
    Ok(acc.finish())
}

/// Compressed adjacency for BFS work.
pub struct Adjacency {
    offsets: Vec<u64>,
    targets: Vec<u32>,
}

impl Adjacency {
    pub fn from_edges(n: u64, edges: &[(u64, u64)]) -> Result<Self> {
        if n > STATS_MAX_N {
            return Err(SkgError::Guard {
                what: "adjacency vertex count",
                value: n as u128,
                limit: STATS_MAX_N as u128,
            });
        }
        let n = n as usize;
        let mut offsets = vec![0u64; n + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; edges.len() * 2];
        for &(u, v) in edges {
            targets[cursor[u as usize] as usize] = v as u32;
            cursor[u as usize] += 1;
            targets[cursor[v as usize] as usize] = u as u32;
            cursor[v as usize] += 1;
        }
        Ok(Adjacency { offsets, targets })
    }

    /// Two-pass construction from an edge stream; avoids materializing the
    /// edge list for graphs with hundreds of millions of edges. `fill` is
    /// invoked twice and must produce the same edges both times.
    pub fn from_stream(
        n: u64,
        mut fill: impl FnMut(&mut dyn FnMut(u64, u64)) -> Result<()>,
    ) -> Result<Self> {
        if n > STATS_MAX_N {
            return Err(SkgError::Guard {
                what: "adjacency vertex count",
                value: n as u128,
                limit: STATS_MAX_N as u128,
            });
        }
        let n = n as usize;
        let mut offsets = vec![0u64; n + 1];
        fill(&mut |u, v| {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        })?;
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; offsets[n] as usize];
        fill(&mut |u, v| {
            targets[cursor[u as usize] as usize] = v as u32;
            cursor[u as usize] += 1;
            targets[cursor[v as usize] as usize] = u as u32;
            cursor[v as usize] += 1;
        })?;
        Ok(Adjacency { offsets, targets })
    }

    pub fn n(&self) -> u64 {
        (self.offsets.len() - 1) as u64
    }

    pub fn degree(&self, v: u64) -> u64 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn neighbors(&self, v: u64) -> &[u32] {
        &self.targets[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }
}

/// BFS from `v`; returns (farthest vertex, its distance). Distances are
/// within the component of `v` only.
fn bfs_farthest(adj: &Adjacency, v: u64, dist: &mut [u32], queue: &mut Vec<u32>) -> (u64, u32) {
    dist.fill(u32::MAX);
    queue.clear();
    dist[v as usize] = 0;
    queue.push(v as u32);
    let mut head = 0;
    let (mut far, mut far_d) = (v, 0);
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        let dx = dist[x as usize];
        if dx > far_d {
            far_d = dx;
            far = x as u64;
        }
        for &y in adj.neighbors(x as u64) {
            if dist[y as usize] == u32::MAX {
                dist[y as usize] = dx + 1;
                queue.push(y);
            }
        }
    }
    (far, far_d)
}

/// Eccentricity of `v` within its component.
pub fn eccentricity(adj: &Adjacency, v: u64) -> u32 {
    let n = adj.n() as usize;
    let mut dist = vec![u32::MAX; n];
    let mut queue = Vec::new();
    bfs_farthest(adj, v, &mut dist, &mut queue).1
}

/// Exact diameter (max eccentricity over all vertices; per-component for
/// disconnected graphs). Quadratic; capped at 4096 vertices.
pub fn diameter_exact(adj: &Adjacency) -> Result<u32> {
    let n = adj.n();
    if n > EXACT_DIAMETER_MAX_N {
        return Err(SkgError::Guard {
            what: "exact diameter vertex count",
            value: n as u128,
            limit: EXACT_DIAMETER_MAX_N as u128,
        });
    }
    let mut dist = vec![u32::MAX; n as usize];
    let mut queue = Vec::new();
    let mut best = 0;
    for v in 0..n {
        best = best.max(bfs_farthest(adj, v, &mut dist, &mut queue).1);
    }
    Ok(best)
}

/// Double-sweep lower bound on the diameter: from each of `sweeps` random
/// start vertices inside the largest component, BFS to the farthest vertex
/// and BFS again from there. The true diameter is at least the returned
/// value.
pub fn diameter_double_sweep(adj: &Adjacency, sweeps: u32, seed: u64) -> Result<u32> {
    let n = adj.n();
    if n == 0 {
        return Ok(0);
    }
    // locate the largest component
    let mut uf = UnionFind::new(n as usize);
    for v in 0..n {
        for &u in adj.neighbors(v) {
            uf.union(v as u32, u);
        }
    }
    let mut best_root = 0u32;
    let mut best_size = 0u64;
    for v in 0..n as u32 {
        if uf.find(v) == v && uf.size[v as usize] as u64 > best_size {
            best_size = uf.size[v as usize] as u64;
            best_root = v;
        }
    }
    let members: Vec<u64> = (0..n).filter(|&v| uf.find(v as u32) == best_root).collect();

    let mut rng = substream(seed, DOMAIN_STATS, 0);
    let mut dist = vec![u32::MAX; n as usize];
    let mut queue = Vec::new();
    let mut bound = 0;
    for _ in 0..sweeps {
        let start = members[rng.random_range(0..members.len())];
        let (far, d1) = bfs_farthest(adj, start, &mut dist, &mut queue);
        let (_, d2) = bfs_farthest(adj, far, &mut dist, &mut queue);
        bound = bound.max(d1.max(d2));
    }
    Ok(bound)
}

#[derive(Debug, Clone)]
pub struct NeighborSignatureStats {
    pub degree: u64,
    /// Componentwise mean of the neighbors' signatures.
    pub mean_sig: Signature,
    /// `max over neighbors of || sigma(u) - sigma(v) M ||_inf`.
    pub max_dev: f64,
}

/// Compare the neighbors of `v` against the walk prediction: a random
/// neighbor's signature has expectation `sigma(v) M`.
pub fn neighbor_signature_stats(
    g: &SampledGraph,
    d: &DerivedQuantities,
    adj: &Adjacency,
    v: u64,
) -> Result<NeighborSignatureStats> {
    let m = d
        .m
        .as_ref()
        .ok_or_else(|| SkgError::Domain("neighbor stats need all c_i > 0".into()))?;
    let neighbors = adj.neighbors(v);
    if neighbors.is_empty() {
        return Err(SkgError::Domain(format!("vertex {v} is isolated")));
    }
    let word = VertexWord::from_id(g.k, g.t, v)?;
    let predicted = signature(&word)?.step(m);
    let k = g.k;
    let mut mean = vec![0.0; k];
    let mut max_dev: f64 = 0.0;
    for &u in neighbors {
        let sig = signature(&VertexWord::from_id(g.k, g.t, u as u64)?)?;
        let mut dev: f64 = 0.0;
        for i in 0..k {
            mean[i] += sig.as_slice()[i];
            dev = dev.max((sig.as_slice()[i] - predicted.as_slice()[i]).abs());
        }
        max_dev = max_dev.max(dev);
    }
    for x in &mut mean {
        *x /= neighbors.len() as f64;
    }
    Ok(NeighborSignatureStats {
        degree: neighbors.len() as u64,
        mean_sig: Signature::new(mean)?,
        max_dev,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DegreeRow {
    pub id: u64,
    pub degree: u64,
    /// `exp(t <sigma, L>)`, the row sum of the expected adjacency matrix,
    /// which includes the diagonal cell.
    pub expected: f64,
    /// Expected degree minus the self-loop probability `prod P_{v_i v_i}`;
    /// the simple-graph quantity the sampled degree estimates.
    pub expected_adjusted: f64,
    pub ratio: f64,
}

/// Per-vertex comparison of sampled degree against the closed-form
/// expectation.
pub fn degree_vs_expected(
    g: &SampledGraph,
    p: &GeneratorMatrix,
    d: &DerivedQuantities,
    adj: &Adjacency,
    vertices: &[u64],
) -> Result<Vec<DegreeRow>> {
    if d.l.is_none() {
        return Err(SkgError::Domain("degree comparison needs all c_i > 0".into()));
    }
    let mut rows = Vec::with_capacity(vertices.len());
    for &v in vertices {
        let word = VertexWord::from_id(g.k, g.t, v)?;
        let sig = signature(&word)?;
        let expected = crate::genmatrix::expected_degree(&sig, g.t, d)?;
        let mut diag = 1.0;
        for &digit in word.digits() {
            diag *= p.entry(digit as usize - 1, digit as usize - 1);
        }
        let expected_adjusted = expected - diag;
        let degree = adj.degree(v);
        rows.push(DegreeRow {
            id: v,
            degree,
            expected,
            expected_adjusted,
            ratio: if expected_adjusted > 0.0 {
                degree as f64 / expected_adjusted
            } else {
                f64::NAN
            },
        });
    }
    Ok(rows)
}
