//! Statistical properties of the survival procedure. All seeds are fixed,
//! so every check is deterministic; tolerances are in standard errors.

use lsf_join::filter::{self, derive_row, effective_rows, naive_filter, FilterParams};
use lsf_join::graph::BipartiteGraph;
use lsf_join::Threshold;

fn tau() -> Threshold {
    Threshold::parse("0.5").unwrap()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Upper 1% point of chi-square with `df` degrees of freedom
/// (Wilson-Hilferty).
fn chi2_critical_99(df: f64) -> f64 {
    let z = 2.326_348;
    let h = 2.0 / (9.0 * df);
    df * (1.0 - h + z * h.sqrt()).powi(3)
}

#[test]
fn derive_row_is_uniform() {
    let cols = 8u32;
    let mut counts = vec![0u64; 1 << (cols + 1)];
    let samples = 100_000u32;
    for s in 0..samples {
        let (row, b) = derive_row(7, 3, s / 4, s % 4, cols);
        counts[((row as usize) << 1) | b as usize] += 1;
    }
    let expected = samples as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let crit = chi2_critical_99((counts.len() - 1) as f64);
    assert!(stat < crit, "chi-square {stat} exceeds {crit}");
}

#[test]
fn iterations_give_unrelated_streams() {
    let cols = 10u32;
    let samples = 100_000u32;
    let collisions =
        (0..samples).filter(|&u| derive_row(11, 0, u, 0, cols) == derive_row(11, 1, u, 0, cols)).count() as f64;
    let p = 0.5f64.powi(cols as i32 + 1);
    let expected = samples as f64 * p;
    let sd = (samples as f64 * p * (1.0 - p)).sqrt();
    assert!((collisions - expected).abs() <= 4.0 * sd, "{collisions} collisions, expected {expected}");
}

#[test]
fn dithered_rows_have_the_right_mean() {
    // alpha = 2^-0.35, d = 10: target 3.5 rows.
    let alpha = 2f64.powf(-0.35);
    let rows: Vec<f64> = (0..20_000u32).map(|v| effective_rows(10, alpha, 5, 0, v) as f64).collect();
    assert!(rows.iter().all(|&r| r == 3.0 || r == 4.0));
    let (m, var) = mean_var(&rows);
    assert!((m - 3.5).abs() <= 4.0 * (var / rows.len() as f64).sqrt(), "mean {m}");
}

#[test]
fn repetitions_are_pairwise_independent() {
    let g = BipartiteGraph::from_adjacency(3, vec![vec![0, 1, 2]]).unwrap();
    let k = 64u64;
    let seeds = 20_000u64;
    let pairs = [(5u32, 40u32), (0, 63), (17, 18)];
    for (i, j) in pairs {
        let hits: Vec<f64> = (0..seeds)
            .map(|s| {
                let p = FilterParams::new(0.5, k, tau(), 1, s).unwrap();
                let iv = filter::fast_filter(&g, 0, &p, 0).unwrap();
                (iv.contains(&i) && iv.contains(&j)) as u8 as f64
            })
            .collect();
        let (m, var) = mean_var(&hits);
        let target = (0.125f64).powi(2);
        let se = (var / seeds as f64).sqrt();
        assert!((m - target).abs() <= 3.0 * se, "({i}, {j}): {m} vs {target}");
    }
}

#[test]
fn fast_and_naive_agree_in_distribution() {
    // 120 nodes of degree 2 or 3 over 40 dimensions.
    let lists: Vec<Vec<u32>> = (0..120u32)
        .map(|v| {
            let mut l = vec![v % 40, (v * 7 + 3) % 40];
            if v % 3 == 0 {
                l.push((v * 13 + 11) % 40);
            }
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    let g = BipartiteGraph::from_adjacency(40, lists).unwrap();
    let k = 64u64;
    let seeds = 400u64;
    let mut fast = Vec::new();
    let mut naive = Vec::new();
    for s in 0..seeds {
        let p = FilterParams::new(0.5, k, tau(), 1, s).unwrap();
        let f = filter::fast_filter_all(&g, &p, 0).unwrap();
        let n = naive_filter(&g, &p, 0);
        fast.extend(f.buckets().map(|b| b.len() as f64));
        naive.extend(n.buckets().map(|b| b.len() as f64));
    }
    let (mf, vf) = mean_var(&fast);
    let (mn, vn) = mean_var(&naive);
    // Buckets within a seed are correlated; use seeds as the sample count.
    let se = ((vf + vn) / seeds as f64).sqrt();
    assert!((mf - mn).abs() <= 4.0 * se, "means {mf} vs {mn}");
    assert!((vf / vn - 1.0).abs() < 0.25, "variances {vf} vs {vn}");
}

#[test]
fn naive_filter_examples() {
    let g = BipartiteGraph::from_adjacency(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
    let all = naive_filter(&g, &FilterParams::new(1.0, 8, tau(), 1, 0).unwrap(), 0);
    assert_eq!(all.total_survivals(), 16);
    let none = naive_filter(&g, &FilterParams::new(1e-12, 8, tau(), 1, 0).unwrap(), 0);
    assert_eq!(none.total_survivals(), 0);
    let hits: Vec<f64> = (0..2000u64)
        .map(|s| {
            let o = naive_filter(&g, &FilterParams::new(0.5, 16, tau(), 1, s).unwrap(), 0);
            o.indices(0).len() as f64 / 16.0
        })
        .collect();
    let (m, var) = mean_var(&hits);
    assert!((m - 0.25).abs() <= 3.0 * (var / 2000.0).sqrt(), "{m}");
}

#[test]
fn one_row_node_survives_half_the_time() {
    let g = BipartiteGraph::from_adjacency(1, vec![vec![0]]).unwrap();
    let sizes: Vec<f64> = (0..10_000u64)
        .map(|s| filter::fast_filter(&g, 0, &FilterParams::new(0.5, 2, tau(), 1, s).unwrap(), 0).unwrap().len() as f64)
        .collect();
    let (m, var) = mean_var(&sizes);
    assert!((m - 1.0).abs() <= 3.0 * (var / 10_000.0).sqrt(), "{m}");
}

#[test]
fn full_rank_systems_average_one_survival() {
    // d_star = log2 k = 8.
    let g = BipartiteGraph::from_adjacency(8, vec![(0..8).collect()]).unwrap();
    let sizes: Vec<f64> = (0..10_000u64)
        .map(|s| {
            filter::fast_filter(&g, 0, &FilterParams::new(0.5, 256, tau(), 1, s).unwrap(), 0).unwrap().len() as f64
        })
        .collect();
    let (m, var) = mean_var(&sizes);
    assert!((m - 1.0).abs() <= 3.0 * (var / 10_000.0).sqrt(), "{m}");
}

#[test]
fn survival_under_subsampling_is_close_to_the_pair_formula() {
    // alpha = 2^-1/2 keeps about half of each neighborhood. Shared neighbors
    // can fall on different sides of the two cut-offs, so the joint law is
    // only approximately alpha^|union|; report it within 15%.
    let mut lists = vec![(0..20).collect::<Vec<u32>>()];
    let mut other: Vec<u32> = (0..10).collect();
    other.extend(100..110);
    lists.push(other);
    let g = BipartiteGraph::from_adjacency(110, lists).unwrap();
    let alpha = 0.5f64.sqrt();
    let k = 1u64 << 16;
    let seeds = 3000u64;
    let joint: Vec<f64> = (0..seeds)
        .map(|s| {
            let p = FilterParams::new(alpha, k, tau(), 1, s).unwrap();
            let a = filter::fast_filter(&g, 0, &p, 0).unwrap();
            let b = filter::fast_filter(&g, 1, &p, 0).unwrap();
            lsf_join::graph::intersection_size(&a, &b) as f64 / k as f64
        })
        .collect();
    let (m, _) = mean_var(&joint);
    let target = alpha.powi(30);
    assert!((m / target - 1.0).abs() < 0.15, "{m} vs {target}");
}
