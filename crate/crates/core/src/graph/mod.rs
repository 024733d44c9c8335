//! Bipartite graph `G = (U, V, E)`: dimensions `U` on the left, nodes `V` on
//! the right. Each right node stores its sorted neighbor list in one CSR
//! array, which is everything the join needs.

mod gen;
mod io;

use std::borrow::Cow;
use std::collections::HashMap;

use crate::error::{Error, Result};

pub use gen::{gen_matching, gen_skewed, MatchingParams, SkewedParams};
pub use io::{load_edge_list, read_binary, write_binary, write_edge_list, BINARY_MAGIC, BINARY_VERSION};

/// External ids for one side of the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Labels {
    /// Generated ids `"{prefix}{index}"`.
    Synthetic {
        prefix: String,
        len: usize,
    },
    Named {
        names: Vec<String>,
        index: HashMap<String, u32>,
    },
}

impl Labels {
    pub fn synthetic(prefix: &str, len: usize) -> Self {
        Labels::Synthetic { prefix: prefix.to_string(), len }
    }

    pub fn named(names: Vec<String>) -> Self {
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        Labels::Named { names, index }
    }

    pub fn len(&self) -> usize {
        match self {
            Labels::Synthetic { len, .. } => *len,
            Labels::Named { names, .. } => names.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self, id: u32) -> Cow<'_, str> {
        match self {
            Labels::Synthetic { prefix, .. } => Cow::Owned(format!("{prefix}{id}")),
            Labels::Named { names, .. } => Cow::Borrowed(&names[id as usize]),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<u32> {
        match self {
            Labels::Synthetic { prefix, len } => {
                let id: u32 = name.strip_prefix(prefix.as_str())?.parse().ok()?;
                // Reject non-canonical spellings such as "v01".
                ((id as usize) < *len && name.len() == prefix.len() + id.to_string().len()).then_some(id)
            }
            Labels::Named { index, .. } => index.get(name).copied(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    m: usize,
    offsets: Vec<usize>,
    adj: Vec<u32>,
    left: Labels,
    right: Labels,
}

impl BipartiteGraph {
    /// Builds a graph from per-node neighbor lists; lists are sorted and
    /// deduplicated, and every entry must be below `m`.
    pub fn from_adjacency(m: usize, lists: Vec<Vec<u32>>) -> Result<Self> {
        let n = lists.len();
        Self::from_adjacency_labeled(m, lists, Labels::synthetic("u", m), Labels::synthetic("v", n))
    }

    pub fn from_adjacency_labeled(m: usize, lists: Vec<Vec<u32>>, left: Labels, right: Labels) -> Result<Self> {
        if left.len() != m || right.len() != lists.len() {
            return Err(Error::domain("label count does not match graph dimensions"));
        }
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut adj = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for mut list in lists {
            list.sort_unstable();
            list.dedup();
            if let Some(&last) = list.last() {
                if last as usize >= m {
                    return Err(Error::domain(format!("dimension {last} out of range for M = {m}")));
                }
            }
            adj.extend_from_slice(&list);
            offsets.push(adj.len());
        }
        Ok(BipartiteGraph { m, offsets, adj, left, right })
    }

    /// Trusted constructor for code that already produces sorted, unique,
    /// in-range lists.
    pub(crate) fn from_csr(m: usize, offsets: Vec<usize>, adj: Vec<u32>, left: Labels, right: Labels) -> Self {
        let g = BipartiteGraph { m, offsets, adj, left, right };
        debug_assert!(g.check_invariants().is_ok());
        g
    }

    pub fn empty() -> Self {
        BipartiteGraph::from_csr(0, vec![0], Vec::new(), Labels::synthetic("u", 0), Labels::synthetic("v", 0))
    }

    /// Number of left dimensions `M`.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of right nodes `N`.
    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n() as u32).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.edge_count() as f64 / self.n() as f64
        }
    }

    /// Degree of every left dimension.
    pub fn left_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.m];
        for &u in &self.adj {
            deg[u as usize] += 1;
        }
        deg
    }

    pub fn left_labels(&self) -> &Labels {
        &self.left
    }

    pub fn right_labels(&self) -> &Labels {
        &self.right
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.left.len() != self.m || self.right.len() != self.n() {
            return Err(Error::Format("label count mismatch".into()));
        }
        if self.offsets.first() != Some(&0) || self.offsets.last() != Some(&self.adj.len()) {
            return Err(Error::Format("bad adjacency offsets".into()));
        }
        for v in 0..self.n() {
            if self.offsets[v] > self.offsets[v + 1] {
                return Err(Error::Format(format!("offsets decrease at node {v}")));
            }
            let list = self.neighbors(v as u32);
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format(format!("adjacency of node {v} is not strictly sorted")));
            }
            if list.last().is_some_and(|&u| u as usize >= self.m) {
                return Err(Error::Format(format!("node {v} has a dimension out of range")));
            }
        }
        Ok(())
    }

    /// Exact cosine similarity of two right nodes.
    pub fn cosine(&self, u: u32, v: u32) -> Result<f64> {
        let (a, b) = (self.neighbors(u), self.neighbors(v));
        if a.is_empty() || b.is_empty() {
            return Err(Error::domain("cosine of a zero-degree node is undefined"));
        }
        let inter = intersection_size(a, b);
        Ok(inter as f64 / ((a.len() * b.len()) as f64).sqrt())
    }

    /// Nodes grouped by doubling degree ranges `[2^j, 2^(j+1))`. Zero-degree
    /// nodes belong to no bucket.
    pub fn degree_buckets(&self) -> Vec<DegreeBucket> {
        let mut by_level: Vec<Vec<u32>> = Vec::new();
        for v in 0..self.n() as u32 {
            let d = self.degree(v);
            if d == 0 {
                continue;
            }
            let level = d.ilog2() as usize;
            if by_level.len() <= level {
                by_level.resize_with(level + 1, Vec::new);
            }
            by_level[level].push(v);
        }
        by_level
            .into_iter()
            .enumerate()
            .filter(|(_, nodes)| !nodes.is_empty())
            .map(|(j, nodes)| {
                let max_degree = nodes.iter().map(|&v| self.degree(v)).max().unwrap_or(0);
                DegreeBucket { lo: 1 << j, hi: 1 << (j + 1), max_degree, nodes }
            })
            .collect()
    }

    /// All nodes as a single bucket (for `--single-bucket` runs).
    pub fn single_bucket(&self) -> Option<DegreeBucket> {
        let nodes: Vec<u32> = (0..self.n() as u32).filter(|&v| self.degree(v) > 0).collect();
        if nodes.is_empty() {
            return None;
        }
        let (lo, max_degree) = nodes.iter().fold((usize::MAX, 0), |(lo, hi), &v| {
            let d = self.degree(v);
            (lo.min(d), hi.max(d))
        });
        Some(DegreeBucket { lo, hi: max_degree + 1, max_degree, nodes })
    }
}

/// Right nodes whose degree lies in `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeBucket {
    pub lo: usize,
    pub hi: usize,
    pub max_degree: usize,
    pub nodes: Vec<u32>,
}

/// Size of the intersection of two strictly sorted lists, by merging.
#[inline]
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        n += (x == y) as usize;
        i += (x <= y) as usize;
        j += (y <= x) as usize;
    }
    n
}

/// Size of the union of two strictly sorted lists.
#[inline]
pub fn union_size(a: &[u32], b: &[u32]) -> usize {
    a.len() + b.len() - intersection_size(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(m: usize, lists: &[&[u32]]) -> BipartiteGraph {
        BipartiteGraph::from_adjacency(m, lists.iter().map(|l| l.to_vec()).collect()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let g = graph(6, &[&[1, 2, 3], &[2, 3, 4], &[1, 2, 3], &[0, 5], &[]]);
        assert!((g.cosine(0, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.cosine(0, 2).unwrap(), 1.0);
        assert_eq!(g.cosine(0, 3).unwrap(), 0.0);
        assert_eq!(g.cosine(1, 0).unwrap(), g.cosine(0, 1).unwrap());
        assert!(matches!(g.cosine(0, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn adjacency_is_normalized() {
        let g = BipartiteGraph::from_adjacency(5, vec![vec![4, 1, 1, 3]]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 3, 4]);
        assert!(BipartiteGraph::from_adjacency(3, vec![vec![3]]).is_err());
        g.check_invariants().unwrap();
    }

    #[test]
    fn degree_bucket_examples() {
        let g = graph(8, &[&[0, 1, 2], &[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4, 5]]);
        let b = g.degree_buckets();
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].lo, b[0].hi, b[0].nodes.clone()), (2, 4, vec![0]));
        assert_eq!((b[1].lo, b[1].hi, b[1].nodes.clone()), (4, 8, vec![1, 2]));
        assert_eq!(b[1].max_degree, 6);

        let uniform = graph(4, &[&[0, 1], &[2, 3], &[1, 2]]);
        assert_eq!(uniform.degree_buckets().len(), 1);
        assert!(BipartiteGraph::empty().degree_buckets().is_empty());
    }

    #[test]
    fn degree_buckets_partition_nodes() {
        let lists: Vec<Vec<u32>> = (0..100u32).map(|v| (0..(v % 37 + 1)).collect()).collect();
        let g = BipartiteGraph::from_adjacency(40, lists).unwrap();
        let mut seen: Vec<u32> = Vec::new();
        for b in g.degree_buckets() {
            for &v in &b.nodes {
                assert!(b.lo <= g.degree(v) && g.degree(v) < b.hi);
            }
            seen.extend(&b.nodes);
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn merge_helpers() {
        assert_eq!(intersection_size(&[1, 3, 5, 7], &[2, 3, 4, 7, 9]), 2);
        assert_eq!(union_size(&[1, 3, 5, 7], &[2, 3, 4, 7, 9]), 7);
        assert_eq!(intersection_size(&[], &[1]), 0);
    }

    #[test]
    fn synthetic_labels_lookup() {
        let l = Labels::synthetic("v", 12);
        assert_eq!(l.name(3), "v3");
        assert_eq!(l.lookup("v11"), Some(11));
        assert_eq!(l.lookup("v12"), None);
        assert_eq!(l.lookup("v01"), None);
        assert_eq!(l.lookup("u1"), None);
    }
}
