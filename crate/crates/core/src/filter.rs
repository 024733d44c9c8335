//! Locality sensitive filtering: which of the `k` repetitions a node survives.
//!
//! Repetition `i` is identified with its `log2 k`-bit binary representation.
//! Every dimension `u` owns pseudo-random rows `(a_{u,j}, b_{u,j})` derived
//! from the shared seed, and node `v` survives repetition `i` iff
//! `a·i + b = 0` for every row it selected from its neighbors. The survivor
//! indices of one node are the solution set of that affine system, which
//! Gaussian elimination enumerates in time proportional to its size.
//!
//! Rows are one bit each. A node with degree `d` uses `d_star ≈ d·log2(1/α)`
//! of them, so that it survives with probability `α^d`:
//!
//! * rows are ordered by `(slot, priority(u))`, where `priority` is a global
//!   per-dimension pseudo-random key, and the node takes the first `d_star`;
//! * when `α ≥ 1/2` this keeps the `d_star` neighbors of lowest priority,
//!   one row each, so two nodes sharing a neighbor drop or keep it together
//!   as far as their cut-offs allow;
//! * when `log2(1/α)` is an integer every neighbor contributes exactly that
//!   many rows;
//! * a fractional `d·log2(1/α)` is rounded up or down at random (keyed on the
//!   node) so that the expected row count is exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{eliminate, AffineSystem, MAX_COLS};
use crate::graph::BipartiteGraph;
use crate::prf::{self, tag};
use crate::threshold::Threshold;

/// Default right-hand side of `α^{(2-τ)d} · k = target`.
pub const DEFAULT_TARGET_COLLISIONS: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    alpha: f64,
    k: u64,
    tau: Threshold,
    beta: u32,
    seed: u64,
}

impl FilterParams {
    pub fn new(alpha: f64, k: u64, tau: Threshold, beta: u32, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1]")));
        }
        if !k.is_power_of_two() || k > 1u64 << MAX_COLS {
            return Err(Error::domain(format!("k = {k} must be a power of two no larger than 2^32")));
        }
        if beta == 0 {
            return Err(Error::domain("beta must be at least 1"));
        }
        Ok(FilterParams { alpha, k, tau, beta, seed })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `log2 k`, the number of unknowns in every node's system.
    pub fn cols(&self) -> u32 {
        self.k.trailing_zeros()
    }

    pub fn tau(&self) -> Threshold {
        self.tau
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        FilterParams::new(alpha, self.k, self.tau, self.beta, self.seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        FilterParams { seed, ..self.clone() }
    }
}

/// `α = (2/k)^{1/((2-τ)·d̄)}`.
pub fn solve_alpha(tau: f64, d_bar: f64, k: u64) -> Result<f64> {
    solve_alpha_with(tau, d_bar, k, DEFAULT_TARGET_COLLISIONS)
}

/// `α = (target/k)^{1/((2-τ)·d̄)}`: the survival rate at which a pair with
/// union `(2-τ)·d̄` co-survives `target` repetitions in expectation.
pub fn solve_alpha_with(tau: f64, d_bar: f64, k: u64, target: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) || !(d_bar > 0.0) || k < 2 || !(target > 0.0) {
        return Err(Error::domain(format!(
            "solve_alpha needs tau in (0,1], d > 0, k >= 2, target > 0 (got {tau}, {d_bar}, {k}, {target})"
        )));
    }
    // Work with logarithms so exact powers of two survive round-off.
    let log2_alpha = (target.log2() - (k as f64).log2()) / ((2.0 - tau) * d_bar);
    Ok(log2_alpha.exp2().min(1.0))
}

/// Per-iteration view of the shared randomness.
#[derive(Clone, Copy, Debug)]
pub struct RowSource {
    key: u64,
    cols: u32,
}

impl RowSource {
    pub fn new(master_seed: u64, iteration: u64, cols: u32) -> Self {
        RowSource { key: prf::subseed(master_seed, tag::ITERATION, iteration), cols }
    }

    /// Row `j` of dimension `u`: `cols` coefficient bits and the target bit.
    #[inline]
    pub fn row(&self, u: u32, j: u32) -> (u32, bool) {
        let h = prf::prf(self.key, tag::ROW, u as u64, j as u64);
        let mask = if self.cols >= 32 { u32::MAX } else { (1u32 << self.cols) - 1 };
        (h as u32 & mask, h >> 63 == 1)
    }

    /// Global subsampling priority of dimension `u` (lower is kept first).
    #[inline]
    pub fn priority(&self, u: u32) -> u64 {
        prf::prf(self.key, tag::PRIORITY, u as u64, 0)
    }

    #[inline]
    fn dither(&self, v: u32) -> f64 {
        prf::unit_f64(prf::prf(self.key, tag::DITHER, v as u64, 0))
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}

/// Row `j` of dimension `u` in iteration `iteration` of a run seeded with
/// `master_seed`, for a run with `k = 2^cols` repetitions.
pub fn derive_row(master_seed: u64, iteration: u64, u: u32, j: u32, cols: u32) -> (u32, bool) {
    RowSource::new(master_seed, iteration, cols).row(u, j)
}

fn row_target(d: usize, alpha: f64) -> f64 {
    let t = d as f64 * -alpha.log2();
    let r = t.round();
    if (t - r).abs() < 1e-9 {
        r
    } else {
        t
    }
}

fn dithered(target: f64, draw: f64) -> usize {
    let base = target.floor();
    base as usize + (draw < target - base) as usize
}

/// Number of rows node `v` of degree `d` uses: `d·log2(1/α)` rounded up or
/// down so that the expectation is exact.
pub fn effective_rows(d: usize, alpha: f64, master_seed: u64, iteration: u64, v: u32) -> usize {
    let src = RowSource::new(master_seed, iteration, 0);
    dithered(row_target(d, alpha), src.dither(v))
}

/// Reusable per-worker filter for one iteration.
pub struct NodeFilter {
    src: RowSource,
    alpha: f64,
    ranked: Vec<(u64, u32)>,
    scratch: AffineSystem,
}

impl NodeFilter {
    pub fn new(params: &FilterParams, iteration: u64) -> Result<Self> {
        if params.alpha >= 1.0 {
            return Err(Error::domain("alpha >= 1: no filtering possible"));
        }
        Ok(NodeFilter {
            src: RowSource::new(params.seed, iteration, params.cols()),
            alpha: params.alpha,
            ranked: Vec::new(),
            scratch: AffineSystem::empty(params.cols())?,
        })
    }

    pub fn rows_for(&self, d: usize, v: u32) -> usize {
        dithered(row_target(d, self.alpha), self.src.dither(v))
    }

    fn fill_system(&mut self, neighbors: &[u32], v: u32) -> Result<()> {
        let d = neighbors.len();
        if d == 0 {
            return Err(Error::domain(format!("node {v} has no neighbors")));
        }
        let rows = self.rows_for(d, v);
        let (full_slots, extra) = (rows / d, rows % d);
        let sys = &mut self.scratch;
        sys.clear();
        if extra > 0 {
            self.ranked.clear();
            self.ranked.extend(neighbors.iter().map(|&u| (self.src.priority(u), u)));
            self.ranked.select_nth_unstable(extra - 1);
            for &(_, u) in &self.ranked[..extra] {
                let (r, b) = self.src.row(u, full_slots as u32);
                sys.push(r, b)?;
            }
        }
        for slot in 0..full_slots as u32 {
            for &u in neighbors {
                let (r, b) = self.src.row(u, slot);
                sys.push(r, b)?;
            }
        }
        Ok(())
    }

    /// The affine system of a node with the given neighbor list.
    pub fn system(&mut self, neighbors: &[u32], v: u32) -> Result<AffineSystem> {
        self.fill_system(neighbors, v)?;
        Ok(self.scratch.clone())
    }

    /// Appends the sorted survivor indices of node `v` to `out`.
    pub fn survive_into(&mut self, neighbors: &[u32], v: u32, out: &mut Vec<u32>) -> Result<()> {
        self.fill_system(neighbors, v)?;
        eliminate(&self.scratch).for_each_solution(|i| out.push(i));
        Ok(())
    }
}

/// The affine system `A^v i + b^v = 0` of node `v` in the given iteration.
pub fn build_system(g: &BipartiteGraph, v: u32, params: &FilterParams, iteration: u64) -> Result<AffineSystem> {
    NodeFilter::new(params, iteration)?.system(g.neighbors(v), v)
}

/// `I_v`: the repetitions node `v` survives, ascending.
pub fn fast_filter(g: &BipartiteGraph, v: u32, params: &FilterParams, iteration: u64) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    NodeFilter::new(params, iteration)?.survive_into(g.neighbors(v), v, &mut out)?;
    Ok(out)
}

/// Survivor sets in both orientations: `I_v` per node and `S_i` per
/// repetition, stored as two CSR arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivalOutcome {
    k: u64,
    node_offsets: Vec<usize>,
    node_indices: Vec<u32>,
    bucket_offsets: Vec<usize>,
    bucket_members: Vec<u32>,
}

impl SurvivalOutcome {
    /// Builds both orientations from per-node index lists in CSR form.
    pub fn from_node_csr(k: u64, node_offsets: Vec<usize>, node_indices: Vec<u32>) -> Self {
        let mut bucket_offsets = vec![0usize; k as usize + 1];
        for &i in &node_indices {
            bucket_offsets[i as usize + 1] += 1;
        }
        for i in 0..k as usize {
            bucket_offsets[i + 1] += bucket_offsets[i];
        }
        let mut fill = bucket_offsets.clone();
        let mut bucket_members = vec![0u32; node_indices.len()];
        for v in 0..node_offsets.len() - 1 {
            for &i in &node_indices[node_offsets[v]..node_offsets[v + 1]] {
                bucket_members[fill[i as usize]] = v as u32;
                fill[i as usize] += 1;
            }
        }
        SurvivalOutcome { k, node_offsets, node_indices, bucket_offsets, bucket_members }
    }

    pub fn from_index_lists(k: u64, lists: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut flat = Vec::new();
        for l in lists {
            flat.extend_from_slice(l);
            offsets.push(flat.len());
        }
        Self::from_node_csr(k, offsets, flat)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.node_offsets.len() - 1
    }

    /// `I_v`.
    pub fn indices(&self, v: u32) -> &[u32] {
        &self.node_indices[self.node_offsets[v as usize]..self.node_offsets[v as usize + 1]]
    }

    /// `S_i`, ascending node ids.
    pub fn bucket(&self, i: u64) -> &[u32] {
        &self.bucket_members[self.bucket_offsets[i as usize]..self.bucket_offsets[i as usize + 1]]
    }

    pub fn bucket_size(&self, i: u64) -> usize {
        self.bucket_offsets[i as usize + 1] - self.bucket_offsets[i as usize]
    }

    pub fn buckets(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.k).map(move |i| self.bucket(i))
    }

    /// `Σ_i |S_i| = Σ_v |I_v|`.
    pub fn total_survivals(&self) -> usize {
        self.node_indices.len()
    }
}

/// Fast filter over a subset of nodes (others survive nowhere), in parallel.
pub fn fast_filter_nodes(
    g: &BipartiteGraph,
    nodes: &[u32],
    params: &FilterParams,
    iteration: u64,
) -> Result<SurvivalOutcome> {
    NodeFilter::new(params, iteration)?;
    const CHUNK: usize = 2048;
    // Per chunk: (node, survival count) and the concatenated indices.
    type Part = (Vec<(u32, usize)>, Vec<u32>);
    let parts: Vec<Part> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut filter = NodeFilter::new(params, iteration)?;
            let mut counts = Vec::with_capacity(chunk.len());
            let mut out = Vec::new();
            for &v in chunk {
                let before = out.len();
                filter.survive_into(g.neighbors(v), v, &mut out)?;
                counts.push((v, out.len() - before));
            }
            Ok((counts, out))
        })
        .collect::<Result<_>>()?;

    let mut per_node = vec![0usize; g.n()];
    let mut total = 0usize;
    for (counts, _) in &parts {
        for &(v, c) in counts {
            per_node[v as usize] = c;
            total += c;
        }
    }
    let mut offsets = Vec::with_capacity(g.n() + 1);
    offsets.push(0);
    for c in &per_node {
        offsets.push(offsets.last().unwrap() + c);
    }
    let mut flat = vec![0u32; total];
    for (counts, out) in parts {
        let mut pos = 0;
        for (v, c) in counts {
            let start = offsets[v as usize];
            flat[start..start + c].copy_from_slice(&out[pos..pos + c]);
            pos += c;
        }
    }
    Ok(SurvivalOutcome::from_node_csr(params.k, offsets, flat))
}

/// Fast filter over every node with nonzero degree.
pub fn fast_filter_all(g: &BipartiteGraph, params: &FilterParams, iteration: u64) -> Result<SurvivalOutcome> {
    let nodes: Vec<u32> = (0..g.n() as u32).filter(|&v| g.degree(v) > 0).collect();
    fast_filter_nodes(g, &nodes, params, iteration)
}

/// Reference filter: repetition `i` keeps each dimension independently with
/// probability `α` and retains the nodes whose whole neighborhood was kept.
/// Takes `O(k·M)` time.
pub fn naive_filter(g: &BipartiteGraph, params: &FilterParams, iteration: u64) -> SurvivalOutcome {
    let key = prf::subseed(params.seed, tag::NAIVE, iteration);
    let mut lists = vec![Vec::new(); g.n()];
    let mut kept = vec![false; g.m()];
    for i in 0..params.k {
        let rep_key = prf::prf(key, tag::NAIVE, i, 0);
        for (u, slot) in kept.iter_mut().enumerate() {
            *slot = prf::unit_f64(prf::prf(rep_key, tag::NAIVE, u as u64, 1)) < params.alpha;
        }
        for (v, list) in lists.iter_mut().enumerate() {
            let nb = g.neighbors(v as u32);
            if !nb.is_empty() && nb.iter().all(|&u| kept[u as usize]) {
                list.push(i as u32);
            }
        }
    }
    SurvivalOutcome::from_index_lists(params.k, &lists)
}
