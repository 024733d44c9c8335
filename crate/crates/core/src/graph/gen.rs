//! Synthetic graph families.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BipartiteGraph, Labels};
use crate::error::{Error, Result};
use crate::prf::{self, tag};
use crate::threshold::Threshold;

const SKEWED_STREAM: u64 = 1;
const MATCHING_STREAM: u64 = 2;

/// Parameters of the hot/cold skewed family: every right node picks `d/2`
/// dimensions from a hot set of size `gamma * d` and `d/2` from a cold pool.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewedParams {
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    /// Size of the cold pool; defaults to `n * d / 20` (mean cold left
    /// degree 10), never less than `d / 2`.
    pub cold_pool: Option<usize>,
    pub seed: u64,
}

impl SkewedParams {
    pub fn new(n: usize, d: usize, gamma: f64, seed: u64) -> Self {
        SkewedParams { n, d, gamma, cold_pool: None, seed }
    }

    pub fn hot_size(&self) -> Result<usize> {
        let h = self.gamma * self.d as f64;
        if !(self.gamma > 0.0) || (h - h.round()).abs() > 1e-9 {
            return Err(Error::domain(format!("gamma * d = {h} must be a positive integer")));
        }
        Ok(h.round() as usize)
    }

    pub fn cold_size(&self) -> usize {
        self.cold_pool.unwrap_or((self.n * self.d / 20).max(self.d / 2))
    }
}

pub fn gen_skewed(p: &SkewedParams) -> Result<BipartiteGraph> {
    if p.d == 0 || !p.d.is_multiple_of(2) {
        return Err(Error::domain(format!("d = {} must be a positive even number", p.d)));
    }
    let half = p.d / 2;
    let hot = p.hot_size()?;
    if hot < half {
        return Err(Error::domain(format!("hot set {hot} is smaller than d/2 = {half}")));
    }
    let cold = p.cold_size();
    if cold < half {
        return Err(Error::domain(format!("cold pool {cold} is smaller than d/2 = {half}")));
    }
    let m = hot + cold;
    if m > u32::MAX as usize {
        return Err(Error::domain("too many dimensions"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(prf::subseed(p.seed, tag::GENERATOR, SKEWED_STREAM));
    let mut offsets = Vec::with_capacity(p.n + 1);
    let mut adj = Vec::with_capacity(p.n * p.d);
    offsets.push(0);
    let mut row = Vec::with_capacity(p.d);
    for _ in 0..p.n {
        row.clear();
        row.extend(sample(&mut rng, hot, half).into_iter().map(|u| u as u32));
        row.extend(sample(&mut rng, cold, half).into_iter().map(|u| (hot + u) as u32));
        row.sort_unstable();
        adj.extend_from_slice(&row);
        offsets.push(adj.len());
    }
    Ok(BipartiteGraph::from_csr(m, offsets, adj, Labels::synthetic("u", m), Labels::synthetic("v", p.n)))
}

/// Planted matching: `n/2` disjoint pairs, each sharing exactly
/// `ceil(tau * d)` dimensions; all other dimensions are private.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingParams {
    pub n: usize,
    pub d: usize,
    pub tau: Threshold,
    pub seed: u64,
}

pub fn gen_matching(p: &MatchingParams) -> Result<(BipartiteGraph, Vec<(u32, u32)>)> {
    if !p.n.is_multiple_of(2) {
        return Err(Error::domain(format!("n = {} must be even", p.n)));
    }
    if p.d == 0 {
        return Err(Error::domain("d must be positive"));
    }
    let shared = p.tau.ceil_mul(p.d as u64) as usize;
    if shared > p.d {
        return Err(Error::domain("ceil(tau * d) exceeds d"));
    }
    let private = p.d - shared;
    let pairs = p.n / 2;
    let per_pair = shared + 2 * private;
    let m = pairs * per_pair;
    if m > u32::MAX as usize || p.n > u32::MAX as usize {
        return Err(Error::domain("graph too large"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(prf::subseed(p.seed, tag::GENERATOR, MATCHING_STREAM));
    // Random relabelings so that neither pairs nor their pools sit at
    // adjacent ids.
    let mut dim_perm: Vec<u32> = (0..m as u32).collect();
    dim_perm.shuffle(&mut rng);
    let mut node_perm: Vec<u32> = (0..p.n as u32).collect();
    node_perm.shuffle(&mut rng);

    let mut lists = vec![Vec::new(); p.n];
    let mut planted = Vec::with_capacity(pairs);
    for q in 0..pairs {
        let base = q * per_pair;
        let pool = &dim_perm[base..base + per_pair];
        let (a, b) = (node_perm[2 * q], node_perm[2 * q + 1]);
        let mut la: Vec<u32> = pool[..shared].to_vec();
        let mut lb = la.clone();
        la.extend_from_slice(&pool[shared..shared + private]);
        lb.extend_from_slice(&pool[shared + private..]);
        la.sort_unstable();
        lb.sort_unstable();
        lists[a as usize] = la;
        lists[b as usize] = lb;
        planted.push((a.min(b), a.max(b)));
    }
    planted.sort_unstable();

    let mut offsets = Vec::with_capacity(p.n + 1);
    offsets.push(0);
    let mut adj = Vec::with_capacity(p.n * p.d);
    for l in &lists {
        adj.extend_from_slice(l);
        offsets.push(adj.len());
    }
    let g = BipartiteGraph::from_csr(m, offsets, adj, Labels::synthetic("u", m), Labels::synthetic("v", p.n));
    Ok((g, planted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skewed_structure() {
        let p = SkewedParams::new(2000, 20, 10.0, 3);
        let g = gen_skewed(&p).unwrap();
        assert_eq!(g.n(), 2000);
        assert_eq!(g.edge_count(), 2000 * 20);
        g.check_invariants().unwrap();
        for v in 0..g.n() as u32 {
            let nb = g.neighbors(v);
            assert_eq!(nb.len(), 20);
            assert_eq!(nb.iter().filter(|&&u| u < 200).count(), 10);
        }
        // Mean hot left degree is n * (d/2) / |H|.
        let deg = g.left_degrees();
        let hot_mean = deg[..200].iter().sum::<usize>() as f64 / 200.0;
        assert!((hot_mean - 100.0).abs() < 1e-9);
        assert_eq!(g.m(), 200 + 2000);
    }

    #[test]
    fn skewed_tiny_and_errors() {
        let g = gen_skewed(&SkewedParams::new(1, 2, 1.0, 0)).unwrap();
        assert_eq!(g.neighbors(0).len(), 2);
        assert!(g.neighbors(0)[0] < 2 && g.neighbors(0)[1] >= 2);

        assert!(gen_skewed(&SkewedParams::new(10, 3, 1.0, 0)).is_err());
        assert!(gen_skewed(&SkewedParams::new(10, 4, 0.3, 0)).is_err());
        assert!(gen_skewed(&SkewedParams::new(10, 4, 0.25, 0)).is_err());
        let mut p = SkewedParams::new(10, 4, 1.0, 0);
        p.cold_pool = Some(1);
        assert!(gen_skewed(&p).is_err());
    }

    #[test]
    fn skewed_is_deterministic() {
        let p = SkewedParams::new(300, 10, 2.0, 42);
        assert_eq!(gen_skewed(&p).unwrap(), gen_skewed(&p).unwrap());
        let q = SkewedParams { seed: 43, ..p.clone() };
        assert_ne!(gen_skewed(&p).unwrap(), gen_skewed(&q).unwrap());
    }

    #[test]
    fn matching_examples() {
        let p = MatchingParams { n: 4, d: 4, tau: Threshold::parse("0.5").unwrap(), seed: 1 };
        let (g, pairs) = gen_matching(&p).unwrap();
        assert_eq!(pairs.len(), 2);
        for &(a, b) in &pairs {
            assert_eq!(g.cosine(a, b).unwrap(), 0.5);
        }
        let (a, b) = pairs[0];
        let (c, _) = pairs[1];
        assert_eq!(g.cosine(a, c).unwrap(), 0.0);
        assert_eq!(g.cosine(b, c).unwrap(), 0.0);

        let one = MatchingParams { n: 6, d: 5, tau: Threshold::parse("1").unwrap(), seed: 1 };
        let (g, pairs) = gen_matching(&one).unwrap();
        for &(a, b) in &pairs {
            assert_eq!(g.neighbors(a), g.neighbors(b));
        }
        assert!(gen_matching(&MatchingParams { n: 3, ..one.clone() }).is_err());
    }

    #[test]
    fn matching_cosine_reaches_tau() {
        let tau = Threshold::parse("0.3").unwrap();
        let (g, pairs) = gen_matching(&MatchingParams { n: 200, d: 10, tau, seed: 9 }).unwrap();
        for &(a, b) in &pairs {
            let inter = super::super::intersection_size(g.neighbors(a), g.neighbors(b));
            assert_eq!(inter, 3);
            assert!(tau.accepts(inter as u64, 10, 10));
        }
    }
}
