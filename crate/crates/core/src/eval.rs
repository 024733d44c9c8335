//! Exact oracle, recall, the profile `Φ`, similarity histograms and the
//! analytic communication/work exponents.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{union_size, BipartiteGraph};
use crate::join::PairSet;
use crate::prf::{self, tag};
use crate::threshold::Threshold;

const SAMPLE_NODES: u64 = 1;
const SAMPLE_PHI: u64 = 2;
const SAMPLE_HISTOGRAM: u64 = 3;

/// `size` distinct nodes drawn uniformly, sorted.
pub fn sample_nodes(n: usize, size: usize, seed: u64) -> Result<Vec<u32>> {
    if size > n {
        return Err(Error::domain(format!("sample size {size} exceeds N = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(prf::subseed(seed, tag::SAMPLE, SAMPLE_NODES));
    let mut s: Vec<u32> = sample(&mut rng, n, size).into_iter().map(|v| v as u32).collect();
    s.sort_unstable();
    Ok(s)
}

/// Every pair with an endpoint in `sample` whose cosine reaches `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub tau: Threshold,
    pub sample: Vec<u32>,
    /// Sorted `(u, v)` with `u < v`.
    pub pairs: Vec<(u32, u32)>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: u32, b: u32) -> bool {
        self.pairs.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

/// Left-side adjacency (dimension to nodes).
fn transpose(g: &BipartiteGraph) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; g.m() + 1];
    for v in 0..g.n() as u32 {
        for &u in g.neighbors(v) {
            offsets[u as usize + 1] += 1;
        }
    }
    for i in 0..g.m() {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut nodes = vec![0u32; g.edge_count()];
    for v in 0..g.n() as u32 {
        for &u in g.neighbors(v) {
            nodes[fill[u as usize]] = v;
            fill[u as usize] += 1;
        }
    }
    (offsets, nodes)
}

/// Exact scan of `sample × V` through the inverted index.
pub fn ground_truth_for(g: &BipartiteGraph, tau: Threshold, sample: Vec<u32>) -> Result<GroundTruth> {
    if let Some(&v) = sample.iter().find(|&&v| v as usize >= g.n()) {
        return Err(Error::domain(format!("sample node {v} is not in the graph")));
    }
    let (offsets, by_dim) = transpose(g);
    let mut pairs: Vec<(u32, u32)> = sample
        .par_iter()
        .fold(
            || (Vec::new(), vec![0u32; g.n()], Vec::new()),
            |(mut out, mut counts, mut touched), &s| {
                for &u in g.neighbors(s) {
                    for &w in &by_dim[offsets[u as usize]..offsets[u as usize + 1]] {
                        if w != s {
                            if counts[w as usize] == 0 {
                                touched.push(w);
                            }
                            counts[w as usize] += 1;
                        }
                    }
                }
                let ds = g.degree(s) as u64;
                for &w in &touched {
                    let inter = std::mem::take(&mut counts[w as usize]) as u64;
                    if tau.accepts(inter, ds, g.degree(w) as u64) {
                        out.push((s.min(w), s.max(w)));
                    }
                }
                touched.clear();
                (out, counts, touched)
            },
        )
        .map(|(out, _, _)| out)
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });
    pairs.sort_unstable();
    pairs.dedup();
    let mut sample = sample;
    sample.sort_unstable();
    sample.dedup();
    Ok(GroundTruth { tau, sample, pairs })
}

pub fn ground_truth(g: &BipartiteGraph, tau: Threshold, sample_size: usize, seed: u64) -> Result<GroundTruth> {
    ground_truth_for(g, tau, sample_nodes(g.n(), sample_size, seed)?)
}

/// `|found ∩ truth| / |truth|`.
pub fn recall(found: &PairSet, truth: &GroundTruth) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::domain("recall undefined: the ground truth is empty"));
    }
    let hit = truth.pairs.iter().filter(|&&(a, b)| found.contains(a, b)).count();
    Ok(hit as f64 / truth.len() as f64)
}

/// Recall against a plain list of pairs (e.g. planted matchings).
pub fn recall_of_pairs(found: &PairSet, truth: &[(u32, u32)]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::domain("recall undefined: the ground truth is empty"));
    }
    let hit = truth.iter().filter(|&&(a, b)| found.contains(a, b)).count();
    Ok(hit as f64 / truth.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub value: f64,
    /// Zero for the exact computation.
    pub std_error: f64,
    pub exact: bool,
}

/// `Φ = Σ_v α^{|Γ(v)|} + Σ_{u≠v} α^{|Γ(u)∪Γ(v)|}`, the pair sum over ordered
/// pairs (twice the unordered sum).
pub fn profile_phi_exact(g: &BipartiteGraph, alpha: f64) -> f64 {
    let n = g.n() as u32;
    let singles: f64 = (0..n).map(|v| alpha.powi(g.degree(v) as i32)).sum();
    let pairs: f64 = (0..n)
        .into_par_iter()
        .map(|u| (u + 1..n).map(|v| alpha.powi(union_size(g.neighbors(u), g.neighbors(v)) as i32)).sum::<f64>())
        .sum();
    singles + 2.0 * pairs
}

/// Monte-Carlo estimate of `Φ` from `samples` uniformly drawn ordered pairs.
pub fn profile_phi_sampled(g: &BipartiteGraph, alpha: f64, samples: usize, seed: u64) -> Result<PhiEstimate> {
    let n = g.n();
    if n < 2 || samples < 2 {
        return Err(Error::domain("sampled profile needs N ≥ 2 and at least two samples"));
    }
    let singles: f64 = (0..n as u32).map(|v| alpha.powi(g.degree(v) as i32)).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(prf::subseed(seed, tag::SAMPLE, SAMPLE_PHI));
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let u = rng.gen_range(0..n as u32);
        let mut v = rng.gen_range(0..n as u32 - 1);
        if v >= u {
            v += 1;
        }
        let x = alpha.powi(union_size(g.neighbors(u), g.neighbors(v)) as i32);
        sum += x;
        sq += x * x;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sq - m * mean * mean) / (m - 1.0)).max(0.0);
    let ordered = n as f64 * (n as f64 - 1.0);
    Ok(PhiEstimate { value: singles + ordered * mean, std_error: ordered * (var / m).sqrt(), exact: false })
}

/// Exact up to `exact_limit` nodes, sampled above.
pub fn profile_phi(
    g: &BipartiteGraph,
    alpha: f64,
    exact_limit: usize,
    samples: usize,
    seed: u64,
) -> Result<PhiEstimate> {
    if g.n() <= exact_limit {
        Ok(PhiEstimate { value: profile_phi_exact(g, alpha), std_error: 0.0, exact: true })
    } else {
        profile_phi_sampled(g, alpha, samples, seed)
    }
}

/// Exponents of `N` at `p = N` for `k = N^c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub c: f64,
    pub comm: f64,
    pub work: f64,
}

/// Combined strategy for `c ≤ 1`, pure LSF for `c ≥ 1`; the two agree at 1.
pub fn comm_work_exponents(tau: f64, c: f64) -> Result<ExponentPoint> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain(format!("tau = {tau} must lie in (0, 1)")));
    }
    if !(0.0..=2.0).contains(&c) {
        return Err(Error::domain(format!("c = {c} must lie in [0, 2]")));
    }
    let work = 1.0 - c * tau / (2.0 - tau);
    let comm = if c <= 1.0 { 1.5 - c * tau / (2.0 * (2.0 - tau)) } else { 1.0 + c * (1.0 - tau) / (2.0 - tau) };
    Ok(ExponentPoint { c, comm, work })
}

/// Work exponent of the LSF curve (`c ≥ 1`) at communication exponent `comm`.
pub fn lsf_work_at_comm(tau: f64, comm: f64) -> f64 {
    1.0 - (comm - 1.0) * tau / (1.0 - tau)
}

/// Points on `[lo, hi]` in steps of `step` (both ends included).
pub fn exponent_curve(tau: f64, lo: f64, hi: f64, step: f64) -> Result<Vec<ExponentPoint>> {
    if !(step > 0.0) || hi < lo {
        return Err(Error::domain("curve needs step > 0 and lo ≤ hi"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| comm_work_exponents(tau, (lo + i as f64 * step).min(hi))).collect()
}

/// First combined point (`c ≤ 1` on the grid) whose work is strictly below
/// the LSF curve at the same communication, if any.
pub fn combined_dominance_violation(tau: f64, step: f64) -> Result<Option<ExponentPoint>> {
    for pt in exponent_curve(tau, 0.0, 1.0, step)? {
        if pt.work < lsf_work_at_comm(tau, pt.comm) - 1e-12 {
            return Ok(Some(pt));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Lower bin edges; bin `i` is `[edges[i], edges[i+1])`, the last bin
    /// closes at 1.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub sampled_pairs: u64,
}

impl Histogram {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "lo,hi,count")?;
        for (i, (&lo, &c)) in self.edges.iter().zip(&self.counts).enumerate() {
            let hi = self.edges.get(i + 1).copied().unwrap_or(1.0);
            writeln!(w, "{lo},{hi},{c}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cosine of `pairs` uniformly drawn unordered pairs of nonzero-degree
/// nodes, binned by `edges`, which must start at 0, increase strictly and
/// stay within `[0, 1]`.
pub fn similarity_histogram(g: &BipartiteGraph, edges: &[f64], pairs: usize, seed: u64) -> Result<Histogram> {
    if edges.first() != Some(&0.0) || edges.windows(2).any(|w| !(w[0] < w[1])) || edges.last().is_some_and(|&e| e > 1.0)
    {
        return Err(Error::domain("histogram edges must start at 0 and increase strictly within [0, 1]"));
    }
    let nodes: Vec<u32> = (0..g.n() as u32).filter(|&v| g.degree(v) > 0).collect();
    let mut counts = vec![0u64; edges.len()];
    if nodes.len() < 2 {
        return Ok(Histogram { edges: edges.to_vec(), counts, sampled_pairs: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(prf::subseed(seed, tag::SAMPLE, SAMPLE_HISTOGRAM));
    let n = nodes.len();
    for _ in 0..pairs {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let cos = g.cosine(nodes[i], nodes[j])?;
        let bin = edges.partition_point(|&e| e <= cos) - 1;
        counts[bin] += 1;
    }
    Ok(Histogram { edges: edges.to_vec(), counts, sampled_pairs: pairs as u64 })
}

/// `n` equal-width edges over `[0, 1)`.
pub fn uniform_edges(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// Pairs in `found` as a set of keys, for comparisons in tests and tools.
pub fn pair_keys(found: &PairSet) -> HashSet<(u32, u32)> {
    found.iter().map(|p| (p.u, p.v)).collect()
}
