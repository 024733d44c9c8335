//! The join driver: `β` independent iterations of `k`-repetition filtering,
//! exact verification inside every survivor bucket, and deduplication.

use std::collections::hash_map::Entry;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::cluster::{self, ClusterConfig, CostReport, Execution, GridContext, Strategy};
use crate::error::{Error, Result};
use crate::filter::{self, FilterParams, SurvivalOutcome, DEFAULT_TARGET_COLLISIONS};
use crate::graph::{BipartiteGraph, DegreeBucket};
use crate::prf::{self, tag};
use crate::sketch::{self, SketchSize};
use crate::threshold::Threshold;

/// A verified pair with `u < v` and where it was first found.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub u: u32,
    pub v: u32,
    pub cosine: f64,
    pub iteration: u32,
    pub repetition: u32,
}

impl SimilarPair {
    pub fn new(a: u32, b: u32, cosine: f64, iteration: u32, repetition: u32) -> Self {
        SimilarPair { u: a.min(b), v: a.max(b), cosine, iteration, repetition }
    }

    fn provenance(&self) -> (u32, u32) {
        (self.iteration, self.repetition)
    }
}

/// Deduplicated pairs keyed on `(u, v)`, `u < v`. On collision the earliest
/// `(iteration, repetition)` is kept, so merge order does not matter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairSet {
    map: FxHashMap<(u32, u32), SimilarPair>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if the key was not present before.
    pub fn insert(&mut self, p: SimilarPair) -> bool {
        let p = SimilarPair::new(p.u, p.v, p.cosine, p.iteration, p.repetition);
        match self.map.entry((p.u, p.v)) {
            Entry::Occupied(mut e) => {
                if p.provenance() < e.get().provenance() {
                    e.insert(p);
                }
                false
            }
            Entry::Vacant(e) => {
                e.insert(p);
                true
            }
        }
    }

    pub fn merge(&mut self, other: PairSet) {
        if other.len() > self.len() {
            let mine = std::mem::replace(self, other);
            for p in mine.map.into_values() {
                self.insert(p);
            }
        } else {
            for p in other.map.into_values() {
                self.insert(p);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn contains(&self, a: u32, b: u32) -> bool {
        self.map.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn get(&self, a: u32, b: u32) -> Option<&SimilarPair> {
        self.map.get(&(a.min(b), a.max(b)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &SimilarPair> + '_ {
        self.map.values()
    }

    /// Pairs ordered by `(u, v)`.
    pub fn to_sorted_vec(&self) -> Vec<SimilarPair> {
        let mut v: Vec<SimilarPair> = self.map.values().copied().collect();
        v.sort_unstable_by_key(|p| (p.u, p.v));
        v
    }

    /// `u<TAB>v<TAB>cosine` with external ids, sorted by internal id.
    pub fn write_tsv(&self, g: &BipartiteGraph, mut w: impl Write) -> Result<()> {
        for p in self.to_sorted_vec() {
            writeln!(w, "{}\t{}\t{}", g.right_labels().name(p.u), g.right_labels().name(p.v), p.cosine)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a pairs TSV (`u v [cosine]`) against the graph's external ids.
    /// The cosine column, when present, is ignored and recomputed.
    pub fn read_tsv(g: &BipartiteGraph, r: impl BufRead) -> Result<PairSet> {
        let mut set = PairSet::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = t.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::Parse { line: lineno + 1, message: format!("expected 2 or 3 fields: {t:?}") });
            }
            let lookup = |name: &str| {
                g.right_labels().lookup(name).ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: format!("node {name:?} is not in the graph"),
                })
            };
            let (a, b) = (lookup(fields[0])?, lookup(fields[1])?);
            if a == b {
                return Err(Error::Parse { line: lineno + 1, message: "self pair".into() });
            }
            let cos = g.cosine(a, b).unwrap_or(0.0);
            set.insert(SimilarPair::new(a, b, cos, 0, 0));
        }
        Ok(set)
    }
}

/// Exact verifier for one worker: marks the neighbors of one node in a
/// bitmap over the dimensions and counts hits for each partner.
pub(crate) struct Verifier<'a> {
    g: &'a BipartiteGraph,
    tau: Threshold,
    marks: Vec<u64>,
    focus: Option<&'a [bool]>,
}

impl<'a> Verifier<'a> {
    pub(crate) fn new(g: &'a BipartiteGraph, tau: Threshold, focus: Option<&'a [bool]>) -> Self {
        Verifier { g, tau, marks: vec![0u64; g.m().div_ceil(64)], focus }
    }

    #[inline]
    fn in_focus(&self, v: u32) -> bool {
        self.focus.is_none_or(|f| f[v as usize])
    }

    #[inline]
    fn set_marks(&mut self, v: u32, on: bool) {
        for &x in self.g.neighbors(v) {
            let (w, b) = ((x >> 6) as usize, x & 63);
            if on {
                self.marks[w] |= 1 << b;
            } else {
                self.marks[w] &= !(1 << b);
            }
        }
    }

    #[inline]
    fn marked_count(&self, w: u32) -> u64 {
        self.g.neighbors(w).iter().map(|&x| (self.marks[(x >> 6) as usize] >> (x & 63)) & 1).sum()
    }

    #[inline]
    fn check(&self, a: u32, b: u32, prov: (u32, u32), out: &mut PairSet) {
        let inter = self.marked_count(b);
        let (da, db) = (self.g.degree(a) as u64, self.g.degree(b) as u64);
        if inter > 0 && self.tau.accepts(inter, da, db) {
            let cos = inter as f64 / ((da * db) as f64).sqrt();
            out.insert(SimilarPair::new(a, b, cos, prov.0, prov.1));
        }
    }

    /// All unordered pairs within `nodes` (restricted to focus pairs).
    pub(crate) fn within(&mut self, nodes: &[u32], prov: (u32, u32), out: &mut PairSet) {
        for (ia, &a) in nodes.iter().enumerate() {
            let a_focus = self.in_focus(a);
            if self.focus.is_some() && !a_focus {
                continue;
            }
            self.set_marks(a, true);
            for (ib, &b) in nodes.iter().enumerate() {
                if ib == ia {
                    continue;
                }
                // With a focus set, a pair of two focus nodes is handled from
                // its earlier member; without one, from the earlier member too.
                if ib < ia && self.in_focus(b) {
                    continue;
                }
                self.check(a, b, prov, out);
            }
            self.set_marks(a, false);
        }
    }

    /// All pairs in `left × right` (disjoint node sets).
    pub(crate) fn cross(&mut self, left: &[u32], right: &[u32], prov: (u32, u32), out: &mut PairSet) {
        for &a in left {
            if !self.in_focus(a) {
                continue;
            }
            self.set_marks(a, true);
            for &b in right {
                self.check(a, b, prov, out);
            }
            self.set_marks(a, false);
        }
        if self.focus.is_some() {
            for &b in right {
                if !self.in_focus(b) {
                    continue;
                }
                self.set_marks(b, true);
                for &a in left {
                    if !self.in_focus(a) {
                        self.check(b, a, prov, out);
                    }
                }
                self.set_marks(b, false);
            }
        }
    }
}

/// Every pair in `bucket` whose cosine reaches `tau`.
pub fn verify_bucket(g: &BipartiteGraph, bucket: &[u32], tau: Threshold) -> Vec<SimilarPair> {
    let mut out = PairSet::new();
    Verifier::new(g, tau, None).within(bucket, (0, 0), &mut out);
    out.to_sorted_vec()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaChoice {
    Fixed(f64),
    /// Solve `α^{(2-τ)d}·k = target` with `d` the bucket's maximum degree.
    Auto {
        target_collisions: f64,
    },
}

impl AlphaChoice {
    pub fn auto() -> Self {
        AlphaChoice::Auto { target_collisions: DEFAULT_TARGET_COLLISIONS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JoinConfig {
    pub tau: Threshold,
    pub alpha: AlphaChoice,
    pub k: u64,
    pub beta: u32,
    pub seed: u64,
    /// Run all nodes as one degree range instead of doubling ranges.
    pub single_bucket: bool,
    /// When set, only pairs with at least one endpoint in this set are
    /// verified and reported. Survivor sets and costs still cover the whole
    /// run, so recall measured on these nodes matches an unrestricted run.
    pub focus: Option<Vec<u32>>,
    /// Filter on CountMin-compressed neighborhoods sized from each degree
    /// range; verification stays exact on the original graph.
    pub sketch: Option<SketchSize>,
}

impl JoinConfig {
    pub fn new(tau: Threshold, alpha: AlphaChoice, k: u64, beta: u32, seed: u64) -> Result<Self> {
        if !k.is_power_of_two() || k > 1 << 32 {
            return Err(Error::domain(format!("k = {k} must be a power of two no larger than 2^32")));
        }
        if beta == 0 {
            return Err(Error::domain("beta must be at least 1"));
        }
        if let AlphaChoice::Fixed(a) = alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::domain(format!("alpha = {a} must lie in (0, 1)")));
            }
        }
        if let AlphaChoice::Auto { target_collisions } = alpha {
            if !(target_collisions > 0.0) {
                return Err(Error::domain("target_collisions must be positive"));
            }
        }
        Ok(JoinConfig { tau, alpha, k, beta, seed, single_bucket: false, focus: None, sketch: None })
    }

    pub fn with_focus(mut self, focus: Vec<u32>) -> Self {
        self.focus = Some(focus);
        self
    }

    pub fn with_single_bucket(mut self, on: bool) -> Self {
        self.single_bucket = on;
        self
    }

    pub fn with_sketch(mut self, sketch: SketchSize) -> Result<Self> {
        sketch.params(1, self.tau, 0)?;
        self.sketch = Some(sketch);
        Ok(self)
    }

    pub fn with_beta(mut self, beta: u32) -> Self {
        self.beta = beta;
        self
    }

    /// Filter parameters for a degree range whose largest degree is `max_degree`.
    pub fn params_for(&self, max_degree: usize, k: u64) -> Result<FilterParams> {
        let alpha = match self.alpha {
            AlphaChoice::Fixed(a) => a,
            AlphaChoice::Auto { target_collisions } => {
                filter::solve_alpha_with(self.tau.value(), max_degree as f64, k, target_collisions)?
            }
        };
        FilterParams::new(alpha, k, self.tau, self.beta, self.seed)
    }
}

/// One degree range of a run and the parameters used for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketPlan {
    pub lo: usize,
    pub hi: usize,
    pub max_degree: usize,
    pub nodes: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: u64,
    /// `Σ_i |S_i|` over all repetitions and degree ranges.
    pub survivors: u64,
    /// `Σ_i C(|S_i|, 2)`.
    pub candidate_pairs: u64,
    pub new_pairs: u64,
    pub total_pairs: u64,
}

#[derive(Clone, Debug)]
pub struct JoinRun {
    pub pairs: PairSet,
    pub cost: CostReport,
    pub iterations: Vec<IterationStats>,
    pub buckets: Vec<BucketPlan>,
    /// Repetitions per iteration actually used (differs from the config for
    /// the combined strategy).
    pub k: u64,
}

/// LSF-Join over every node of `g`, dispatching on the cluster strategy.
pub fn lsf_join(g: &BipartiteGraph, cfg: &JoinConfig, cluster: &ClusterConfig) -> Result<JoinRun> {
    run_on(g, None, cfg, cluster, 0)
}

fn focus_mask(g: &BipartiteGraph, focus: &Option<Vec<u32>>) -> Result<Option<Vec<bool>>> {
    let Some(f) = focus else { return Ok(None) };
    let mut mask = vec![false; g.n()];
    for &v in f {
        let slot =
            mask.get_mut(v as usize).ok_or_else(|| Error::domain(format!("focus node {v} is not in the graph")))?;
        *slot = true;
    }
    Ok(Some(mask))
}

fn plan_buckets(g: &BipartiteGraph, active: Option<&[u32]>, single: bool) -> Vec<DegreeBucket> {
    let buckets = if single { g.single_bucket().into_iter().collect() } else { g.degree_buckets() };
    let Some(active) = active else { return buckets };
    let mut keep = vec![false; g.n()];
    for &v in active {
        keep[v as usize] = true;
    }
    buckets
        .into_iter()
        .filter_map(|mut b| {
            b.nodes.retain(|&v| keep[v as usize]);
            if b.nodes.is_empty() {
                return None;
            }
            b.max_degree = b.nodes.iter().map(|&v| g.degree(v)).max().unwrap_or(0);
            Some(b)
        })
        .collect()
}

/// Runs the join restricted to `active` nodes (all when `None`), numbering
/// iterations from `first_iteration` so that separate calls stay independent.
pub(crate) fn run_on(
    g: &BipartiteGraph,
    active: Option<&[u32]>,
    cfg: &JoinConfig,
    cluster: &ClusterConfig,
    first_iteration: u64,
) -> Result<JoinRun> {
    cluster.validate()?;
    let focus = focus_mask(g, &cfg.focus)?;

    if let Strategy::HashJoin = cluster.strategy {
        let nodes: Vec<u32> = match active {
            Some(a) => a.to_vec(),
            None => (0..g.n() as u32).collect(),
        };
        let ctx = GridContext { g, tau: cfg.tau, execution: cluster.execution, focus: focus.as_deref() };
        let (pairs, cost) = cluster::grid_join_nodes(ctx, &nodes, cluster, first_iteration as u32)?;
        let stats = IterationStats {
            iteration: first_iteration,
            survivors: nodes.len() as u64,
            candidate_pairs: (nodes.len() as u64).saturating_mul(nodes.len().saturating_sub(1) as u64) / 2,
            new_pairs: pairs.len() as u64,
            total_pairs: pairs.len() as u64,
        };
        return Ok(JoinRun { pairs, cost, iterations: vec![stats], buckets: Vec::new(), k: 1 });
    }

    let (k, group) = match cluster.strategy {
        Strategy::Combined { c } => cluster::combined_layout(cluster.p, c)?,
        _ => (cfg.k, 1),
    };

    let buckets = plan_buckets(g, active, cfg.single_bucket);
    let mut plans = Vec::with_capacity(buckets.len());
    let mut params = Vec::with_capacity(buckets.len());
    for b in &buckets {
        let p = if k == 1 {
            // A single repetition keeps everyone: no filtering.
            FilterParams::new(1.0, 1, cfg.tau, cfg.beta, cfg.seed)?
        } else {
            cfg.params_for(b.max_degree, k)?
        };
        plans.push(BucketPlan { lo: b.lo, hi: b.hi, max_degree: b.max_degree, nodes: b.nodes.len(), alpha: p.alpha() });
        params.push(p);
    }

    let mut pairs = PairSet::new();
    let mut cost = CostReport::new(cluster.p);
    let mut iterations = Vec::with_capacity(cfg.beta as usize);
    for t in 0..cfg.beta as u64 {
        let iteration = first_iteration + t;
        let mut stats = IterationStats { iteration, ..Default::default() };
        let before = pairs.len();
        for (bi, (b, p)) in buckets.iter().zip(&params).enumerate() {
            let outcome = if k == 1 {
                let mut offsets = vec![0usize; g.n() + 1];
                let mut keep = vec![0usize; g.n()];
                for &v in &b.nodes {
                    keep[v as usize] = 1;
                }
                for v in 0..g.n() {
                    offsets[v + 1] = offsets[v] + keep[v];
                }
                SurvivalOutcome::from_node_csr(1, offsets, vec![0; b.nodes.len()])
            } else if let Some(size) = cfg.sketch {
                let seed = prf::prf(cfg.seed, tag::SKETCH, iteration, bi as u64);
                let compressed = sketch::compress_graph(g, &size.params(b.max_degree, cfg.tau, seed)?);
                filter::fast_filter_nodes(&compressed, &b.nodes, p, iteration)?
            } else {
                filter::fast_filter_nodes(g, &b.nodes, p, iteration)?
            };
            stats.survivors += outcome.total_survivals() as u64;
            stats.candidate_pairs +=
                outcome.buckets().map(|s| (s.len() as u64) * (s.len().saturating_sub(1) as u64) / 2).sum::<u64>();

            let assign_seed = prf::prf(cluster.seed, tag::ASSIGN, iteration, bi as u64);
            let found = match cluster.strategy {
                Strategy::Combined { .. } => {
                    let ctx = GridContext { g, tau: cfg.tau, execution: cluster.execution, focus: focus.as_deref() };
                    cluster::process_combined(ctx, &outcome, group, assign_seed, iteration as u32, &mut cost)
                }
                _ => {
                    let assignment = cluster::partition_buckets(k, cluster.p, assign_seed);
                    cost.merge(&cluster::account_costs(&outcome, &assignment, g));
                    match cluster.execution {
                        Execution::Verify => verify_outcome(g, &outcome, cfg.tau, iteration as u32, focus.as_deref()),
                        Execution::AccountOnly => PairSet::new(),
                    }
                }
            };
            pairs.merge(found);
        }
        stats.total_pairs = pairs.len() as u64;
        stats.new_pairs = (pairs.len() - before) as u64;
        iterations.push(stats);
    }

    Ok(JoinRun { pairs, cost, iterations, buckets: plans, k })
}

/// Verifies every bucket of one iteration, buckets in parallel.
pub(crate) fn verify_outcome(
    g: &BipartiteGraph,
    outcome: &SurvivalOutcome,
    tau: Threshold,
    iteration: u32,
    focus: Option<&[bool]>,
) -> PairSet {
    let k = outcome.k();
    let chunk = (k / 256).max(1);
    (0..k.div_ceil(chunk))
        .into_par_iter()
        .fold(PairSet::new, |mut acc, c| {
            let mut verifier = Verifier::new(g, tau, focus);
            for i in c * chunk..((c + 1) * chunk).min(k) {
                let s = outcome.bucket(i);
                if s.len() >= 2 {
                    verifier.within(s, (iteration, i as u32), &mut acc);
                }
            }
            acc
        })
        .reduce(PairSet::new, |mut a, b| {
            a.merge(b);
            a
        })
}

/// Iterations used by round `t` of the matching schedule (rounds count down
/// from `r` to 1): `max(2, ceil(scale · log^{(t)} N / ln 2))`, with natural
/// iterated logarithms.
pub fn matching_iterations(n: usize, t: u32, scale: f64) -> u32 {
    let mut x = n as f64;
    for _ in 0..t {
        if x <= 1.0 {
            x = 0.0;
            break;
        }
        x = x.ln();
    }
    let t = (scale * x / std::f64::consts::LN_2).ceil();
    if t.is_finite() && t > 2.0 {
        t as u32
    } else {
        2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: u32,
    pub iterations: u32,
    pub active_nodes: usize,
    pub found_pairs: usize,
    pub remaining_nodes: usize,
}

#[derive(Clone, Debug)]
pub struct MatchingRun {
    pub pairs: PairSet,
    pub cost: CostReport,
    pub rounds: Vec<RoundLog>,
}

/// Multi-round join for similarity graphs that are (near-)matchings: round
/// `t` runs `T_t` iterations on the remaining nodes, then both endpoints of
/// every found pair leave the active set.
pub fn matching_join(
    g: &BipartiteGraph,
    cfg: &JoinConfig,
    cluster: &ClusterConfig,
    rounds: u32,
    scale: f64,
) -> Result<MatchingRun> {
    if rounds < 1 {
        return Err(Error::domain("matching join needs at least one round"));
    }
    let mut active: Vec<u32> = (0..g.n() as u32).filter(|&v| g.degree(v) > 0).collect();
    let mut pairs = PairSet::new();
    let mut cost = CostReport::new(cluster.p);
    let mut log = Vec::with_capacity(rounds as usize);
    let mut next_iteration = 0u64;
    for (round, t) in (1..=rounds).rev().enumerate() {
        let iterations = matching_iterations(g.n(), t, scale);
        let active_nodes = active.len();
        let mut found = PairSet::new();
        if active.len() >= 2 {
            let round_cfg = cfg.clone().with_beta(iterations);
            let run = run_on(g, Some(&active), &round_cfg, cluster, next_iteration)?;
            cost.merge(&run.cost);
            found = run.pairs;
        }
        next_iteration += iterations as u64;
        let mut gone = vec![false; g.n()];
        for p in found.iter() {
            gone[p.u as usize] = true;
            gone[p.v as usize] = true;
        }
        active.retain(|&v| !gone[v as usize]);
        log.push(RoundLog {
            round: round as u32 + 1,
            iterations,
            active_nodes,
            found_pairs: found.len(),
            remaining_nodes: active.len(),
        });
        pairs.merge(found);
    }
    Ok(MatchingRun { pairs, cost, rounds: log })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(m: usize, lists: &[&[u32]]) -> BipartiteGraph {
        BipartiteGraph::from_adjacency(m, lists.iter().map(|l| l.to_vec()).collect()).unwrap()
    }

    fn tau(s: &str) -> Threshold {
        Threshold::parse(s).unwrap()
    }

    fn brute(g: &BipartiteGraph, nodes: &[u32], t: Threshold) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                let inter = crate::graph::intersection_size(g.neighbors(a), g.neighbors(b)) as u64;
                if t.accepts(inter, g.degree(a) as u64, g.degree(b) as u64) {
                    out.push((a.min(b), a.max(b)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn verify_bucket_examples() {
        let g = graph(10, &[&[1, 2, 3], &[1, 2, 3], &[7, 8, 9], &[1, 2, 4]]);
        let found = verify_bucket(&g, &[0, 1], tau("0.5"));
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].u, found[0].v, found[0].cosine), (0, 1, 1.0));
        assert!(verify_bucket(&g, &[2], tau("0.1")).is_empty());
        // Three nodes, only (0, 3) and (1, 3) at 2/3; threshold 0.7 keeps none
        // of those but keeps (0, 1).
        let found = verify_bucket(&g, &[0, 2, 3], tau("0.6"));
        let keys: Vec<_> = found.iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(keys, brute(&g, &[0, 2, 3], tau("0.6")));
        assert_eq!(keys, vec![(0, 3)]);
    }

    #[test]
    fn focused_verification_matches_restricted_full() {
        let lists: Vec<Vec<u32>> = (0..40u32).map(|v| vec![v % 5, 5 + v % 3, 8 + v % 7, 15 + v % 2]).collect();
        let g = BipartiteGraph::from_adjacency(20, lists).unwrap();
        let nodes: Vec<u32> = (0..40).collect();
        let t = tau("0.5");
        let full = verify_bucket(&g, &nodes, t);
        let focus_nodes = [3u32, 7, 8, 21];
        let mut mask = vec![false; 40];
        for &f in &focus_nodes {
            mask[f as usize] = true;
        }
        let mut focused = PairSet::new();
        Verifier::new(&g, t, Some(&mask)).within(&nodes, (0, 0), &mut focused);
        let expected: Vec<_> =
            full.iter().filter(|p| mask[p.u as usize] || mask[p.v as usize]).map(|p| (p.u, p.v)).collect();
        let got: Vec<_> = focused.to_sorted_vec().iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(got, expected);

        // Cross product, focused and not.
        let (l, r) = (&nodes[..17], &nodes[17..]);
        let mut all = PairSet::new();
        Verifier::new(&g, t, None).cross(l, r, (0, 0), &mut all);
        let mut part = PairSet::new();
        Verifier::new(&g, t, Some(&mask)).cross(l, r, (0, 0), &mut part);
        let expected: Vec<_> = all
            .to_sorted_vec()
            .iter()
            .filter(|p| mask[p.u as usize] || mask[p.v as usize])
            .map(|p| (p.u, p.v))
            .collect();
        let got: Vec<_> = part.to_sorted_vec().iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(got, expected);
        let brute_cross: usize =
            l.iter().map(|&a| r.iter().filter(|&&b| brute(&g, &[a, b], t).len() == 1).count()).sum();
        assert_eq!(all.len(), brute_cross);
    }

    #[test]
    fn pairset_keeps_earliest_provenance() {
        let mut s = PairSet::new();
        assert!(s.insert(SimilarPair::new(5, 2, 0.5, 3, 7)));
        assert!(!s.insert(SimilarPair::new(2, 5, 0.5, 1, 9)));
        assert!(!s.insert(SimilarPair::new(2, 5, 0.5, 4, 0)));
        assert_eq!(s.len(), 1);
        let p = s.get(5, 2).unwrap();
        assert_eq!((p.u, p.v, p.iteration, p.repetition), (2, 5, 1, 9));

        let mut other = PairSet::new();
        other.insert(SimilarPair::new(2, 5, 0.5, 0, 100));
        other.insert(SimilarPair::new(1, 2, 0.9, 0, 0));
        s.merge(other);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(2, 5).unwrap().provenance(), (0, 100));
    }

    #[test]
    fn pairs_tsv_round_trip() {
        let g = graph(10, &[&[1, 2, 3], &[1, 2, 3], &[1, 2, 4]]);
        let mut s = PairSet::new();
        s.insert(SimilarPair::new(0, 1, 1.0, 0, 0));
        s.insert(SimilarPair::new(0, 2, 2.0 / 3.0, 0, 0));
        let mut buf = Vec::new();
        s.write_tsv(&g, &mut buf).unwrap();
        let back = PairSet::read_tsv(&g, &buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back.contains(0, 2));
        assert!(PairSet::read_tsv(&g, "v0\tv9\n".as_bytes()).is_err());
    }

    #[test]
    fn matching_schedule() {
        assert_eq!(matching_iterations(1 << 16, 1, 1.0), 16);
        // ln ln 65536 = 2.406..., / ln 2 = 3.47.
        assert_eq!(matching_iterations(1 << 16, 2, 1.0), 4);
        assert_eq!(matching_iterations(1 << 16, 3, 1.0), 2);
        assert_eq!(matching_iterations(1, 1, 1.0), 2);
        assert_eq!(matching_iterations(0, 4, 1.0), 2);
    }

    #[test]
    fn config_validation() {
        let t = tau("0.5");
        assert!(JoinConfig::new(t, AlphaChoice::Fixed(0.5), 3, 1, 0).is_err());
        assert!(JoinConfig::new(t, AlphaChoice::Fixed(1.0), 4, 1, 0).is_err());
        assert!(JoinConfig::new(t, AlphaChoice::Fixed(0.5), 4, 0, 0).is_err());
        let cfg = JoinConfig::new(t, AlphaChoice::auto(), 1 << 16, 1, 0).unwrap();
        assert_eq!(cfg.params_for(10, 1 << 16).unwrap().alpha(), 0.5);
    }
}
