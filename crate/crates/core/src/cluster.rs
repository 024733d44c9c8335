//! Simulated shared-nothing cluster. Buckets run on logical processors whose
//! received words and comparison work are tallied exactly; nothing is sent
//! over a network.
//!
//! A record is one node id plus its adjacency, `1 + |Γ(v)|` words. The work
//! of comparing a set of nodes is the number of pairs times the largest
//! degree among them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::SurvivalOutcome;
use crate::graph::BipartiteGraph;
use crate::join::{PairSet, Verifier};
use crate::prf::{self, tag};
use crate::threshold::Threshold;

pub const COST_REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Strategy {
    /// One bucket per repetition, buckets hashed to processors.
    Lsf,
    /// Exhaustive `√p × √p` grid over all nodes.
    HashJoin,
    /// `k ≈ p^c` repetitions, each bucket grid-joined on `p/k` processors.
    Combined { c: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    /// Verify candidate pairs and tally costs.
    #[default]
    Verify,
    /// Tally costs only; no pairs are produced.
    AccountOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub p: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub execution: Execution,
}

impl ClusterConfig {
    pub fn new(p: usize, seed: u64, strategy: Strategy) -> Self {
        ClusterConfig { p, seed, strategy, execution: Execution::Verify }
    }

    pub fn lsf(p: usize, seed: u64) -> Self {
        Self::new(p, seed, Strategy::Lsf)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::domain("p must be at least 1"));
        }
        match self.strategy {
            Strategy::Lsf => Ok(()),
            Strategy::HashJoin => exact_sqrt(self.p).map(|_| ()),
            Strategy::Combined { c } => combined_layout(self.p, c).map(|_| ()),
        }
    }
}

fn exact_sqrt(p: usize) -> Result<usize> {
    let q = (p as f64).sqrt().round() as usize;
    if q * q != p || p == 0 {
        return Err(Error::domain(format!("p = {p} is not a perfect square")));
    }
    Ok(q)
}

/// Repetitions and processors per bucket for the combined strategy:
/// `k = 2^round(c·log2 p)` and `p/k` must be a perfect square.
pub fn combined_layout(p: usize, c: f64) -> Result<(u64, usize)> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::domain(format!("c = {c} must lie in [0, 1]")));
    }
    if p == 0 {
        return Err(Error::domain("p must be at least 1"));
    }
    let k = 1u64 << (c * (p as f64).log2()).round() as u32;
    if !(p as u64).is_multiple_of(k) {
        return Err(Error::domain(format!("k = {k} does not divide p = {p}")));
    }
    let group = p / k as usize;
    exact_sqrt(group).map_err(|_| Error::domain(format!("p/k = {group} is not a perfect square")))?;
    Ok((k, group))
}

/// Words received and work done per processor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    load: Vec<u64>,
    work: Vec<u64>,
}

/// JSON form of a [`CostReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub version: u32,
    pub processors: usize,
    pub total_communication: u64,
    pub max_load: u64,
    pub mean_load: f64,
    pub total_work: u64,
    pub max_work: u64,
    pub load: Vec<u64>,
    pub work: Vec<u64>,
}

impl CostReport {
    pub fn new(p: usize) -> Self {
        CostReport { load: vec![0; p], work: vec![0; p] }
    }

    pub fn processors(&self) -> usize {
        self.load.len()
    }

    pub fn add(&mut self, processor: usize, words: u64, work: u64) {
        self.load[processor] += words;
        self.work[processor] += work;
    }

    pub fn merge(&mut self, other: &CostReport) {
        assert_eq!(self.processors(), other.processors(), "merging reports of different clusters");
        for (a, b) in self.load.iter_mut().zip(&other.load) {
            *a += b;
        }
        for (a, b) in self.work.iter_mut().zip(&other.work) {
            *a += b;
        }
    }

    pub fn load(&self) -> &[u64] {
        &self.load
    }

    pub fn work(&self) -> &[u64] {
        &self.work
    }

    pub fn total_communication(&self) -> u64 {
        self.load.iter().sum()
    }

    pub fn max_load(&self) -> u64 {
        self.load.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_load(&self) -> f64 {
        self.total_communication() as f64 / self.processors().max(1) as f64
    }

    pub fn total_work(&self) -> u64 {
        self.work.iter().sum()
    }

    pub fn max_work(&self) -> u64 {
        self.work.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_work(&self) -> f64 {
        self.total_work() as f64 / self.processors().max(1) as f64
    }

    pub fn summary(&self) -> CostSummary {
        CostSummary {
            version: COST_REPORT_VERSION,
            processors: self.processors(),
            total_communication: self.total_communication(),
            max_load: self.max_load(),
            mean_load: self.mean_load(),
            total_work: self.total_work(),
            max_work: self.max_work(),
            load: self.load.clone(),
            work: self.work.clone(),
        }
    }
}

/// A seeded map from buckets `[k]` to processors `[p]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    k: u64,
    p: usize,
    seed: u64,
}

impl Assignment {
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn processor(&self, bucket: u64) -> usize {
        prf::below(prf::prf(self.seed, tag::ASSIGN, bucket, 0), self.p as u64) as usize
    }

    pub fn to_vec(&self) -> Vec<usize> {
        (0..self.k).map(|i| self.processor(i)).collect()
    }
}

pub fn partition_buckets(k: u64, p: usize, seed: u64) -> Assignment {
    assert!(p >= 1, "p must be at least 1");
    Assignment { k, p, seed }
}

fn record_words(g: &BipartiteGraph, nodes: &[u32]) -> u64 {
    nodes.iter().map(|&v| 1 + g.degree(v) as u64).sum()
}

fn max_degree(g: &BipartiteGraph, nodes: &[u32]) -> u64 {
    nodes.iter().map(|&v| g.degree(v) as u64).max().unwrap_or(0)
}

fn pairs_within(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Tallies every bucket of `outcome` on its assigned processor.
pub fn account_costs(outcome: &SurvivalOutcome, assignment: &Assignment, g: &BipartiteGraph) -> CostReport {
    let mut report = CostReport::new(assignment.p());
    for i in 0..outcome.k() {
        let s = outcome.bucket(i);
        if s.is_empty() {
            continue;
        }
        let work = pairs_within(s.len()) * max_degree(g, s);
        report.add(assignment.processor(i), record_words(g, s), work);
    }
    report
}

/// What the grid join needs besides the nodes themselves.
#[derive(Clone, Copy)]
pub(crate) struct GridContext<'a> {
    pub g: &'a BipartiteGraph,
    pub tau: Threshold,
    pub execution: Execution,
    pub focus: Option<&'a [bool]>,
}

/// Triangular hash-join over `q × q` processors starting at `offset`.
///
/// Each node draws a group `h ∈ [q)` and is sent to cells `(h, j)` for
/// `j ≥ h` and `(i, h)` for `i < h`, exactly `q` copies. Cell `(i, j)`,
/// `i ≤ j`, lives on processor `offset + i·q + j` and compares `G_i × G_j`
/// (pairs within `G_i` when `i = j`), so every pair meets exactly once.
fn grid_join(
    ctx: GridContext<'_>,
    nodes: &[u32],
    q: usize,
    seed: u64,
    offset: usize,
    iteration: u32,
    cost: &mut CostReport,
) -> PairSet {
    let mut groups = vec![Vec::new(); q];
    for &v in nodes {
        groups[prf::below(prf::prf(seed, tag::GRID, v as u64, 0), q as u64) as usize].push(v);
    }
    let words: Vec<u64> = groups.iter().map(|gr| record_words(ctx.g, gr)).collect();
    let degs: Vec<u64> = groups.iter().map(|gr| max_degree(ctx.g, gr)).collect();
    let mut cells = Vec::with_capacity(q * (q + 1) / 2);
    for i in 0..q {
        for j in i..q {
            let proc = offset + i * q + j;
            if i == j {
                cost.add(proc, words[i], pairs_within(groups[i].len()) * degs[i]);
            } else {
                let pairs = groups[i].len() as u64 * groups[j].len() as u64;
                cost.add(proc, words[i] + words[j], pairs * degs[i].max(degs[j]));
            }
            if !groups[i].is_empty() && !groups[j].is_empty() {
                cells.push((i, j));
            }
        }
    }
    if ctx.execution == Execution::AccountOnly {
        return PairSet::new();
    }
    cells
        .par_iter()
        .fold(
            || (PairSet::new(), Verifier::new(ctx.g, ctx.tau, ctx.focus)),
            |(mut acc, mut ver), &(i, j)| {
                let prov = (iteration, (offset + i * q + j) as u32);
                if i == j {
                    ver.within(&groups[i], prov, &mut acc);
                } else {
                    ver.cross(&groups[i], &groups[j], prov, &mut acc);
                }
                (acc, ver)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(PairSet::new, |mut a, b| {
            a.merge(b);
            a
        })
}

/// Hash-join of `nodes` over the whole cluster, which must have a square `p`.
pub(crate) fn grid_join_nodes(
    ctx: GridContext<'_>,
    nodes: &[u32],
    cluster: &ClusterConfig,
    iteration: u32,
) -> Result<(PairSet, CostReport)> {
    let q = exact_sqrt(cluster.p)?;
    let mut cost = CostReport::new(cluster.p);
    let seed = prf::prf(cluster.seed, tag::GRID, iteration as u64, u64::MAX);
    let pairs = grid_join(ctx, nodes, q, seed, 0, iteration, &mut cost);
    Ok((pairs, cost))
}

/// Exhaustive hash-join baseline over every node of `g`.
pub fn hash_join(g: &BipartiteGraph, tau: Threshold, p: usize, seed: u64) -> Result<(PairSet, CostReport)> {
    let cluster = ClusterConfig::new(p, seed, Strategy::HashJoin);
    let nodes: Vec<u32> = (0..g.n() as u32).collect();
    let ctx = GridContext { g, tau, execution: Execution::Verify, focus: None };
    grid_join_nodes(ctx, &nodes, &cluster, 0)
}

/// Second stage of the combined strategy: bucket `j` of `outcome` is
/// grid-joined on processors `[j·group, (j+1)·group)`.
pub(crate) fn process_combined(
    ctx: GridContext<'_>,
    outcome: &SurvivalOutcome,
    group: usize,
    seed: u64,
    iteration: u32,
    cost: &mut CostReport,
) -> PairSet {
    let q = exact_sqrt(group).expect("combined layout checked by validate");
    let mut pairs = PairSet::new();
    for j in 0..outcome.k() {
        let s = outcome.bucket(j);
        if s.is_empty() {
            continue;
        }
        let bucket_seed = prf::prf(seed, tag::GRID, j, 0);
        pairs.merge(grid_join(ctx, s, q, bucket_seed, j as usize * group, iteration, cost));
    }
    pairs
}
