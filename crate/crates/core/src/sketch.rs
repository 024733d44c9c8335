//! Single-row CountMin compression of neighborhoods.
//!
//! Every dimension is hashed to one of `s` buckets and a node's compressed
//! set `γ_v` is the set of occupied buckets. Inner products of compressed
//! sets approximate intersections; unions shrink, which raises the chance
//! that a pair survives a repetition together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{self, FilterParams, SurvivalOutcome};
use crate::graph::{intersection_size, BipartiteGraph, Labels};
use crate::prf::{self, tag};
use crate::threshold::Threshold;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchParams {
    s: u32,
    seed: u64,
}

impl SketchParams {
    pub fn new(s: u32, seed: u64) -> Result<Self> {
        if s == 0 {
            return Err(Error::domain("sketch needs at least one bucket"));
        }
        Ok(SketchParams { s, seed })
    }

    /// `s = ceil(d / (z·τ))`, the size used by the inner-product bound.
    pub fn from_slack(d: usize, z: f64, tau: Threshold, seed: u64) -> Result<Self> {
        if !(z > 0.0) {
            return Err(Error::domain(format!("z = {z} must be positive")));
        }
        Self::new(ceil_buckets(d as f64 / (z * tau.value()))?, seed)
    }

    /// `s = ceil(d / C)` for compression factor `C ≥ 1`.
    pub fn from_compression(d: usize, c: f64, seed: u64) -> Result<Self> {
        if !(c >= 1.0) {
            return Err(Error::domain(format!("C = {c} must be at least 1")));
        }
        Self::new(ceil_buckets(d as f64 / c)?, seed)
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket(&self, dimension: u32) -> u32 {
        prf::below(prf::prf(self.seed, tag::SKETCH, dimension as u64, 0), self.s as u64) as u32
    }

    /// Sorted occupied buckets of `neighbors`.
    pub fn compress(&self, neighbors: &[u32]) -> Vec<u32> {
        compress_with(neighbors, |u| self.bucket(u))
    }
}

/// How a join sizes its sketch from a degree range's largest degree `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SketchSize {
    /// `s = ceil(d / (z·τ))`.
    Slack { z: f64 },
    /// `s = ceil(d / C)`.
    Compression { c: f64 },
}

impl SketchSize {
    pub fn params(&self, d: usize, tau: Threshold, seed: u64) -> Result<SketchParams> {
        match *self {
            SketchSize::Slack { z } => SketchParams::from_slack(d, z, tau, seed),
            SketchSize::Compression { c } => SketchParams::from_compression(d, c, seed),
        }
    }
}

fn ceil_buckets(x: f64) -> Result<u32> {
    let s = x.ceil();
    if !(1.0..=u32::MAX as f64).contains(&s) {
        return Err(Error::domain(format!("sketch size {x} is out of range")));
    }
    Ok(s as u32)
}

/// Compression under an arbitrary placement of dimensions into buckets.
pub fn compress_with(neighbors: &[u32], placement: impl Fn(u32) -> u32) -> Vec<u32> {
    let mut out: Vec<u32> = neighbors.iter().map(|&u| placement(u)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `⟨γ_u, γ_v⟩` for compressed sets.
pub fn inner(a: &[u32], b: &[u32]) -> usize {
    intersection_size(a, b)
}

/// Expected number of occupied bins after throwing `t` balls into `d/C`
/// bins: `(d/C)·(1 − (1 − C/d)^t)`.
pub fn expected_union_after_hash(t: u64, d: f64, c: f64) -> Result<f64> {
    let bins = d / c;
    if !(bins >= 1.0) || !bins.is_finite() {
        return Err(Error::domain(format!("d/C = {bins} must be at least 1")));
    }
    Ok(bins * (1.0 - (1.0 - 1.0 / bins).powf(t as f64)))
}

/// The graph whose left side is the `s` buckets and whose node `v` has
/// neighborhood `γ_v`.
pub fn compress_graph(g: &BipartiteGraph, params: &SketchParams) -> BipartiteGraph {
    let mut offsets = Vec::with_capacity(g.n() + 1);
    let mut adj = Vec::with_capacity(g.edge_count());
    offsets.push(0);
    for v in 0..g.n() as u32 {
        adj.extend(params.compress(g.neighbors(v)));
        offsets.push(adj.len());
    }
    let s = params.s() as usize;
    BipartiteGraph::from_csr(s, offsets, adj, Labels::synthetic("b", s), g.right_labels().clone())
}

/// Fast-Filter run on the compressed neighborhoods.
pub fn recall_hash_filter(
    g: &BipartiteGraph,
    params: &FilterParams,
    sketch: &SketchParams,
    iteration: u64,
) -> Result<SurvivalOutcome> {
    filter::fast_filter_all(&compress_graph(g, sketch), params, iteration)
}

/// Approximate acceptance on compressed sets: `⟨γ_u, γ_v⟩` stands in for the
/// intersection, degrees stay exact. Unlike exact verification this can
/// both miss and invent pairs.
pub fn sketched_accepts(
    compressed: &BipartiteGraph,
    original: &BipartiteGraph,
    tau: Threshold,
    u: u32,
    v: u32,
) -> bool {
    let ip = inner(compressed.neighbors(u), compressed.neighbors(v)) as u64;
    ip > 0 && tau.accepts(ip, original.degree(u) as u64, original.degree(v) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let tau = Threshold::parse("0.1").unwrap();
        assert_eq!(SketchParams::from_slack(20, 4.0, tau, 0).unwrap().s(), 50);
        assert_eq!(SketchParams::from_compression(10, 3.0, 0).unwrap().s(), 4);
        assert!(SketchParams::from_compression(10, 0.5, 0).is_err());
        assert!(SketchParams::new(0, 0).is_err());
    }

    #[test]
    fn injective_placement_preserves_inner_products() {
        let a = [1u32, 4, 9, 12];
        let b = [4u32, 5, 12, 13];
        let (ga, gb) = (compress_with(&a, |u| u), compress_with(&b, |u| u));
        assert_eq!(inner(&ga, &gb), intersection_size(&a, &b));
    }

    #[test]
    fn one_bucket() {
        let p = SketchParams::new(1, 3).unwrap();
        assert_eq!(p.compress(&[3, 7, 100]), vec![0]);
        assert!(p.compress(&[]).is_empty());
    }

    #[test]
    fn balls_closed_form() {
        assert_eq!(expected_union_after_hash(0, 10.0, 2.0).unwrap(), 0.0);
        assert!((expected_union_after_hash(1, 10.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let v = expected_union_after_hash(10, 10.0, 2.0).unwrap();
        assert!((v - 4.463_129_088).abs() < 1e-9, "{v}");
        for t in 2..40 {
            assert!(expected_union_after_hash(t, 20.0, 1.0).unwrap() < t as f64);
        }
        assert!(expected_union_after_hash(3, 1.0, 2.0).is_err());
    }

    #[test]
    fn compressed_graph_shape() {
        let g = BipartiteGraph::from_adjacency(100, vec![vec![1, 2, 3, 50], vec![7, 99]]).unwrap();
        let p = SketchParams::new(5, 9).unwrap();
        let h = compress_graph(&g, &p);
        h.check_invariants().unwrap();
        assert_eq!((h.m(), h.n()), (5, 2));
        for v in 0..2 {
            assert!(h.degree(v) <= g.degree(v));
            assert_eq!(h.neighbors(v), p.compress(g.neighbors(v)).as_slice());
        }
    }
}
