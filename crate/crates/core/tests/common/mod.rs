#![allow(dead_code)]

use bratteli_core::graph::GradedGraph;
use bratteli_core::scalar::{ratio, Rational};
use bratteli_core::transport::GroundMetric;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

/// Probability vector of length `n` with denominators dividing `denom`,
/// supported on at most `max_support` points.
pub fn random_probability(rng: &mut impl Rng, n: usize, max_support: usize, denom: i64) -> Vec<Rational> {
    let support = rng.gen_range(1..=max_support.min(n));
    let mut points: Vec<usize> = (0..n).collect();
    for i in 0..support {
        let j = rng.gen_range(i..n);
        points.swap(i, j);
    }
    let mut cuts: Vec<i64> = (0..support - 1).map(|_| rng.gen_range(0..=denom)).collect();
    cuts.push(0);
    cuts.push(denom);
    cuts.sort_unstable();
    let mut out = vec![Rational::zero(); n];
    for (k, &p) in points[..support].iter().enumerate() {
        out[p] = ratio(cuts[k + 1] - cuts[k], denom);
    }
    out
}

/// Random metric: positive rational weights closed under shortest paths.
pub fn random_metric(rng: &mut impl Rng, n: usize, denom: i64) -> GroundMetric<Rational> {
    let mut d = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = ratio(rng.gen_range(1..=3 * denom), denom);
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    GroundMetric::new(n, d.into_iter().flatten().collect()).expect("closure is a metric")
}

/// Random graded graph: widths in `1..=max_width`, multiplicities in 1..=3,
/// every vertex with at least one predecessor and one successor.
pub fn random_graph(rng: &mut impl Rng, depth: usize, max_width: usize) -> GradedGraph {
    let mut sizes = vec![1];
    for _ in 0..depth {
        sizes.push(rng.gen_range(1..=max_width));
    }
    let labels = sizes.iter().enumerate().map(|(n, &s)| (0..s).map(|v| format!("{n}.{v}")).collect()).collect();
    let mut edges = Vec::new();
    for n in 1..=depth {
        let mut level = std::collections::BTreeMap::new();
        for v in 0..sizes[n] {
            let u = rng.gen_range(0..sizes[n - 1]);
            level.insert((u, v), rng.gen_range(1..=3u64));
            for u in 0..sizes[n - 1] {
                if rng.gen_bool(0.3) {
                    level.insert((u, v), rng.gen_range(1..=3u64));
                }
            }
        }
        for u in 0..sizes[n - 1] {
            if !level.keys().any(|&(a, _)| a == u) {
                level.insert((u, rng.gen_range(0..sizes[n])), 1);
            }
        }
        edges.push(level.into_iter().map(|((u, v), m)| (u, v, m)).collect());
    }
    GradedGraph::from_edges(labels, edges).expect("well-formed")
}

/// Path counts by enumerating every path from the root, one at a time.
pub fn enumerate_paths(graph: &GradedGraph, level: usize, vertex: usize) -> BigUint {
    if level == 0 {
        return BigUint::one();
    }
    graph
        .predecessors(level, vertex)
        .iter()
        .map(|&(u, m)| enumerate_paths(graph, level - 1, u) * BigUint::from(m))
        .sum()
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

pub fn multinomial(parts: &[usize]) -> BigUint {
    parts.iter().fold(factorial(parts.iter().sum()), |acc, &p| acc / factorial(p))
}

/// Standard Young tableaux count by the hook-length formula.
pub fn hook_length(shape: &[usize]) -> BigUint {
    let n: usize = shape.iter().sum();
    let mut hooks = BigUint::one();
    for (i, &row) in shape.iter().enumerate() {
        for j in 0..row {
            let below = shape[i + 1..].iter().filter(|&&r| r > j).count();
            hooks *= BigUint::from(row - j + below);
        }
    }
    factorial(n) / hooks
}

/// Standard Young tableaux counted by removing corners recursively.
pub fn count_tableaux(shape: &[usize]) -> u64 {
    if shape.iter().sum::<usize>() <= 1 {
        return 1;
    }
    let mut total = 0;
    for i in 0..shape.len() {
        let corner = shape[i] > 0 && (i + 1 == shape.len() || shape[i + 1] < shape[i]);
        if corner {
            let mut smaller = shape.to_vec();
            smaller[i] -= 1;
            while smaller.last() == Some(&0) {
                smaller.pop();
            }
            total += count_tableaux(&smaller);
        }
    }
    total
}

pub fn parse_tuple(label: &str) -> Vec<usize> {
    label.trim_matches(|c| c == '(' || c == ')').split(',').map(|p| p.parse().unwrap()).collect()
}
