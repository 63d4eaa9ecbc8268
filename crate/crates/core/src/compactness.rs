//! Epsilon-nets, covering numbers and Cauchy diagnostics on the internal metric.
//!
//! Every verdict here is a finite-horizon diagnostic: the horizon is carried
//! in each report and nothing claims a limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GradedGraph;
use crate::metric::{InternalMetricSequence, LevelMetric, MetricError, Radius};
use crate::scalar::Scalar;

/// Largest level on which an exhaustive minimal cover is attempted.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompactnessError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("exhaustive cover limited to {EXHAUSTIVE_LIMIT} vertices, level has {0}")]
    TooLargeForExhaustive(usize),
    #[error("candidate {index} spans levels {start}..={end}, expected {expected_start}..={expected_end}")]
    MismatchedRanges { index: usize, start: usize, end: usize, expected_start: usize, expected_end: usize },
    #[error("candidate vertex {vertex} out of range at level {level}")]
    VertexOutOfRange { level: usize, vertex: usize },
    #[error("no candidate sequences given")]
    NoCandidates,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMethod {
    /// Repeatedly take the ball covering the most uncovered vertices.
    #[default]
    GreedySetCover,
    /// Farthest-point traversal from the lowest-indexed vertex.
    FarthestPoint,
    /// Smallest net by exhaustive search (small levels only).
    Exhaustive,
}

impl std::fmt::Display for CoverMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CoverMethod::GreedySetCover => "greedy-set-cover",
            CoverMethod::FarthestPoint => "farthest-point",
            CoverMethod::Exhaustive => "exhaustive",
        })
    }
}

/// A set of centers whose closed `epsilon`-balls cover a level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub net: Vec<usize>,
    pub method: CoverMethod,
}

impl Cover {
    pub fn size(&self) -> usize {
        self.net.len()
    }
}

/// Covering number of one level: exhaustive when `exact` is set and the
/// level has at most [`EXHAUSTIVE_LIMIT`] vertices, greedy otherwise.
pub fn covering_number(metric: &LevelMetric, epsilon: &Radius, exact: bool) -> Result<Cover, CompactnessError> {
    let method = if exact && metric.size() <= EXHAUSTIVE_LIMIT {
        CoverMethod::Exhaustive
    } else {
        CoverMethod::GreedySetCover
    };
    cover_with(metric, epsilon, method)
}

pub fn cover_with(metric: &LevelMetric, epsilon: &Radius, method: CoverMethod) -> Result<Cover, CompactnessError> {
    if !epsilon.is_positive() {
        return Err(CompactnessError::NonPositiveEpsilon(epsilon.text.clone()));
    }
    let net = match method {
        CoverMethod::GreedySetCover => greedy_set_cover(metric, epsilon),
        CoverMethod::FarthestPoint => farthest_point(metric, epsilon),
        CoverMethod::Exhaustive => exhaustive(metric, epsilon)?,
    };
    Ok(Cover { net, method })
}

/// Whether every vertex lies in some closed ball of the net.
pub fn is_cover(metric: &LevelMetric, epsilon: &Radius, net: &[usize]) -> bool {
    (0..metric.size()).all(|v| net.iter().any(|&c| metric.within(c, v, epsilon)))
}

fn greedy_set_cover(metric: &LevelMetric, epsilon: &Radius) -> Vec<usize> {
    let size = metric.size();
    let mut covered = vec![false; size];
    let mut remaining = size;
    let mut net = Vec::new();
    while remaining > 0 {
        let gains: Vec<usize> = (0..size)
            .into_par_iter()
            .map(|c| (0..size).filter(|&v| !covered[v] && metric.within(c, v, epsilon)).count())
            .collect();
        let best = gains.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).map(|(c, _)| c);
        let center = best.expect("nonempty level");
        for (v, flag) in covered.iter_mut().enumerate() {
            if !*flag && metric.within(center, v, epsilon) {
                *flag = true;
                remaining -= 1;
            }
        }
        net.push(center);
    }
    net.sort_unstable();
    net
}

fn farthest_point(metric: &LevelMetric, epsilon: &Radius) -> Vec<usize> {
    let size = metric.size();
    if size == 0 {
        return Vec::new();
    }
    let mut net = vec![0];
    let mut nearest: Vec<f64> = (0..size).map(|v| metric.get_f64(0, v)).collect();
    loop {
        let uncovered = (0..size).filter(|&v| !net.iter().any(|&c| metric.within(c, v, epsilon)));
        let Some(next) = uncovered.fold(None, |best: Option<usize>, v| match best {
            Some(b) if nearest[b] >= nearest[v] => Some(b),
            _ => Some(v),
        }) else {
            break;
        };
        net.push(next);
        for (v, d) in nearest.iter_mut().enumerate() {
            *d = d.min(metric.get_f64(next, v));
        }
    }
    net.sort_unstable();
    net
}

/// Lexicographically first net of minimal size, via bitmask balls.
fn exhaustive(metric: &LevelMetric, epsilon: &Radius) -> Result<Vec<usize>, CompactnessError> {
    let size = metric.size();
    if size > EXHAUSTIVE_LIMIT {
        return Err(CompactnessError::TooLargeForExhaustive(size));
    }
    if size == 0 {
        return Ok(Vec::new());
    }
    let balls: Vec<u32> = (0..size)
        .map(|c| (0..size).filter(|&v| metric.within(c, v, epsilon)).fold(0u32, |m, v| m | (1 << v)))
        .collect();
    let full: u32 = if size == 32 { u32::MAX } else { (1u32 << size) - 1 };
    for k in 1..=size {
        let mut chosen = Vec::with_capacity(k);
        if search(&balls, full, k, 0, 0, &mut chosen) {
            return Ok(chosen);
        }
    }
    unreachable!("the full vertex set is always a cover")
}

fn search(balls: &[u32], full: u32, k: usize, from: usize, acc: u32, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == k {
        return acc == full;
    }
    for c in from..balls.len() {
        if balls.len() - c < k - chosen.len() {
            break;
        }
        chosen.push(c);
        if search(balls, full, k, c + 1, acc | balls[c], chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverEntry {
    pub epsilon: String,
    pub level: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub net: Vec<usize>,
    pub method: CoverMethod,
    /// Set when a net found for a smaller epsilon was smaller and was reused.
    pub carried_from: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonSummary {
    pub epsilon: String,
    pub max_n: usize,
    pub first_level_at_max: usize,
    /// Largest value over the last third of the levels.
    pub tail_max: usize,
    /// No level in the last third sets a new maximum. A heuristic, not a proof.
    pub bounded_within_horizon: bool,
    pub strictly_increasing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringReport {
    pub first_level: usize,
    pub horizon: usize,
    pub method: CoverMethod,
    pub entries: Vec<CoverEntry>,
    pub summaries: Vec<EpsilonSummary>,
    pub note: String,
}

impl CoveringReport {
    pub fn series(&self, epsilon: &str) -> Vec<(usize, usize)> {
        self.entries.iter().filter(|e| e.epsilon == epsilon).map(|e| (e.level, e.n)).collect()
    }

    /// Columns `epsilon,level,N,method`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,level,N,method\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.epsilon, e.level, e.n, e.method));
        }
        out
    }

    /// One row per level, one `N` column per epsilon.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("level");
        for s in &self.summaries {
            out.push_str(&format!(",N(eps={})", s.epsilon));
        }
        out.push('\n');
        for level in self.first_level..=self.horizon {
            out.push_str(&level.to_string());
            for s in &self.summaries {
                let n = self.entries.iter().find(|e| e.level == level && e.epsilon == s.epsilon).map(|e| e.n);
                out.push_str(&format!(",{}", n.map_or(String::new(), |n| n.to_string())));
            }
            out.push('\n');
        }
        out
    }
}

/// Covering numbers for every level of `seq` in `levels` (default: all) and
/// every epsilon. Nets are computed per level from the smallest epsilon up;
/// a net for a smaller radius also covers at a larger one, so it is reused
/// when smaller, which keeps `N` nonincreasing in epsilon.
pub fn compactness_profile(
    seq: &InternalMetricSequence,
    epsilons: &[Radius],
    levels: Option<&[usize]>,
    method: CoverMethod,
) -> Result<CoveringReport, CompactnessError> {
    if let Some(bad) = epsilons.iter().find(|e| !e.is_positive()) {
        return Err(CompactnessError::NonPositiveEpsilon(bad.text.clone()));
    }
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&a, &b| epsilons[a].exact.cmp(&epsilons[b].exact));
    let levels: Vec<usize> = match levels {
        Some(l) => l.to_vec(),
        None => (seq.start()..=seq.end()).collect(),
    };
    let per_level: Vec<Vec<CoverEntry>> = levels
        .par_iter()
        .map(|&n| -> Result<Vec<CoverEntry>, CompactnessError> {
            let metric = seq.level(n)?;
            let level_method = if method == CoverMethod::Exhaustive && metric.size() > EXHAUSTIVE_LIMIT {
                CoverMethod::GreedySetCover
            } else {
                method
            };
            let mut best: Option<(Cover, String)> = None;
            let mut out = vec![None; epsilons.len()];
            for &i in &order {
                let eps = &epsilons[i];
                let cover = cover_with(metric, eps, level_method)?;
                let (cover, carried_from) = match &best {
                    Some((prev, from)) if prev.size() < cover.size() => (prev.clone(), Some(from.clone())),
                    _ => {
                        best = Some((cover.clone(), eps.text.clone()));
                        (cover, None)
                    }
                };
                out[i] = Some(CoverEntry {
                    epsilon: eps.text.clone(),
                    level: n,
                    n: cover.size(),
                    net: cover.net,
                    method: cover.method,
                    carried_from,
                });
            }
            Ok(out.into_iter().map(|e| e.expect("filled")).collect())
        })
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::new();
    for i in 0..epsilons.len() {
        for level in &per_level {
            entries.push(level[i].clone());
        }
    }
    let summaries = epsilons
        .iter()
        .enumerate()
        .map(|(i, eps)| summarize(&eps.text, &per_level.iter().map(|l| (l[i].level, l[i].n)).collect::<Vec<_>>()))
        .collect();
    Ok(CoveringReport {
        first_level: levels.first().copied().unwrap_or(seq.start()),
        horizon: levels.last().copied().unwrap_or(seq.end()),
        method,
        entries,
        summaries,
        note: "finite-horizon diagnostic; boundedness is not certified beyond the horizon".into(),
    })
}

fn summarize(epsilon: &str, series: &[(usize, usize)]) -> EpsilonSummary {
    let max_n = series.iter().map(|s| s.1).max().unwrap_or(0);
    let first_at_max = series.iter().position(|s| s.1 == max_n).unwrap_or(0);
    let tail_start = series.len() - series.len() / 3;
    let tail_max = series[tail_start..].iter().map(|s| s.1).max().unwrap_or(0);
    EpsilonSummary {
        epsilon: epsilon.to_string(),
        max_n,
        first_level_at_max: series.get(first_at_max).map_or(0, |s| s.0),
        bounded_within_horizon: tail_start < series.len() && first_at_max < tail_start,
        tail_max,
        strictly_increasing: series.windows(2).all(|w| w[1].1 > w[0].1),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthReport {
    pub max_width: usize,
    /// `(level, width, largest pairwise distance)`.
    pub levels: Vec<(usize, usize, f64)>,
    pub initial_diameter: f64,
    pub final_ratio: f64,
    /// Final diameter is within 5% of the initial diameter and the second
    /// half of the series mostly decreases.
    pub decaying: bool,
}

/// Level widths and the largest internal distance per level.
pub fn bounded_width_check(graph: &GradedGraph, seq: &InternalMetricSequence) -> WidthReport {
    let levels: Vec<(usize, usize, f64)> =
        seq.levels.iter().map(|l| (l.level, graph.level_size(l.level), l.diameter().to_f64())).collect();
    let diameters: Vec<f64> = levels.iter().map(|l| l.2).collect();
    let initial = diameters[0];
    let last = *diameters.last().expect("nonempty sequence");
    let final_ratio = if initial > 0.0 { last / initial } else { 0.0 };
    WidthReport {
        max_width: levels.iter().map(|l| l.1).max().unwrap_or(0),
        decaying: final_ratio <= 0.05 && mostly_nonincreasing(&diameters[diameters.len() / 2..]),
        levels,
        initial_diameter: initial,
        final_ratio,
    }
}

pub(crate) fn mostly_nonincreasing(values: &[f64]) -> bool {
    let steps = values.len().saturating_sub(1);
    let down = values.windows(2).filter(|w| w[1] <= w[0] + 1e-12).count();
    2 * down >= steps
}

/// One vertex per level over a contiguous range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSequence {
    pub start: usize,
    pub vertices: Vec<usize>,
}

impl VertexSequence {
    pub fn new(start: usize, vertices: Vec<usize>) -> Self {
        Self { start, vertices }
    }

    pub fn end(&self) -> usize {
        self.start + self.vertices.len() - 1
    }

    pub fn at(&self, level: usize) -> usize {
        self.vertices[level - self.start]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyReport {
    /// `(M, sup over M <= m < m' <= horizon of d(gamma_m, gamma_m'))`.
    pub modulus: Vec<(usize, f64)>,
    pub is_cauchy: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterReport {
    pub delta: f64,
    pub horizon: usize,
    pub candidates: Vec<CauchyReport>,
    /// Symmetric matrix of tail distances between candidates.
    pub tail_distances: Vec<Vec<f64>>,
    /// Candidate indices per cluster, ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
}

/// Cauchy moduli of the candidates and their single-linkage clusters at
/// threshold `delta`.
///
/// Cross-level distances use the projection rule, `rho_m(gamma_m,
/// p_{m',m} gamma_m')`, evaluated in `f64`. A candidate counts as Cauchy when
/// its modulus at the middle of the range is at most `delta`. The tail
/// distance between two candidates is the largest same-level distance over
/// the second half of the range; candidates closer than `delta` are linked.
pub fn cauchy_classes(
    seq: &InternalMetricSequence,
    candidates: &[VertexSequence],
    delta: f64,
) -> Result<ClusterReport, CompactnessError> {
    let first = candidates.first().ok_or(CompactnessError::NoCandidates)?;
    let (start, end) = (first.start, first.end());
    for (index, c) in candidates.iter().enumerate() {
        if c.start != start || c.end() != end || start < seq.start() || end > seq.end() {
            return Err(CompactnessError::MismatchedRanges {
                index,
                start: c.start,
                end: c.end(),
                expected_start: start.max(seq.start()),
                expected_end: end.min(seq.end()),
            });
        }
        for level in start..=end {
            if c.at(level) >= seq.kernel.level_size(level) {
                return Err(CompactnessError::VertexOutOfRange { level, vertex: c.at(level) });
            }
        }
    }
    let rows = float_rows(seq, start, end);
    let reports: Vec<CauchyReport> = candidates.par_iter().map(|c| cauchy_modulus(seq, &rows, c, delta)).collect();
    let tail_from = start + (end - start + 1) / 2;
    let k = candidates.len();
    let mut tail = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = (tail_from..=end)
                .map(|l| seq.levels[l - seq.start()].get_f64(candidates[i].at(l), candidates[j].at(l)))
                .fold(0.0, f64::max);
            tail[i][j] = d;
            tail[j][i] = d;
        }
    }
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut x = x;
        while parent[x] != root {
            let next = parent[x];
            parent[x] = root;
            x = next;
        }
        root
    }
    for i in 0..k {
        for j in i + 1..k {
            if tail[i][j] < delta {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for i in 0..k {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(i);
    }
    Ok(ClusterReport { delta, horizon: end, candidates: reports, tail_distances: tail, clusters })
}

type FloatRows = Vec<Vec<Vec<(usize, f64)>>>;

fn float_rows(seq: &InternalMetricSequence, start: usize, end: usize) -> FloatRows {
    (0..=end)
        .map(|l| {
            if l <= start {
                return Vec::new();
            }
            (0..seq.kernel.level_size(l))
                .map(|v| seq.kernel.row(l, v).iter().map(|(u, x)| (*u, x.to_f64())).collect())
                .collect()
        })
        .collect()
}

fn cauchy_modulus(seq: &InternalMetricSequence, rows: &FloatRows, c: &VertexSequence, delta: f64) -> CauchyReport {
    let (start, end) = (c.start, c.end());
    // best[m] = max over m' > m of d(gamma_m, p_{m',m} gamma_m').
    let mut pair_max = vec![vec![0.0f64; end + 1]; end + 1];
    for top in start + 1..=end {
        let mut dist = vec![0.0; seq.kernel.level_size(top)];
        dist[c.at(top)] = 1.0;
        for m in (start..top).rev() {
            let mut below = vec![0.0; seq.kernel.level_size(m)];
            for (v, w) in dist.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                for (u, l) in &rows[m + 1][v] {
                    below[*u] += w * l;
                }
            }
            dist = below;
            let metric = &seq.levels[m - seq.start()];
            let e = c.at(m);
            pair_max[m][top] = dist.iter().enumerate().map(|(j, w)| w * metric.get_f64(e, j)).sum();
        }
    }
    let mut modulus = vec![0.0; end + 1];
    for big_m in (start..=end).rev() {
        let row = (big_m + 1..=end).map(|t| pair_max[big_m][t]).fold(0.0, f64::max);
        modulus[big_m] = if big_m == end { row } else { row.max(modulus[big_m + 1]) };
    }
    let mid = start + (end - start) / 2;
    CauchyReport {
        is_cauchy: modulus[mid] <= delta,
        modulus: (start..=end).map(|m| (m, modulus[m])).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{chain, pascal};
    use crate::graph::dims;
    use crate::kernel::cotransitions;
    use crate::metric::{iterate_metric, Distances, IterationConfig};
    use crate::scalar::{ratio, Arithmetic};
    use crate::transport::GroundMetric;

    fn line(points: usize, scale: i64) -> LevelMetric {
        let m = GroundMetric::from_fn(points, |i, j| ratio((j - i) as i64, scale));
        LevelMetric { level: 1, distances: Distances::Exact(m) }
    }

    fn seq_for(graph: &GradedGraph, start: usize, config: IterationConfig) -> InternalMetricSequence {
        let depth = graph.depth();
        let k = cotransitions(graph, &dims(graph, depth).unwrap(), None).unwrap();
        let size = graph.level_size(start);
        iterate_metric(graph, &k, Distances::discrete(size, config.mode), start, depth, config).unwrap()
    }

    #[test]
    fn eighths_quarter_radius_needs_two() {
        let m = line(9, 8);
        let eps = Radius::parse("0.25").unwrap();
        let c = covering_number(&m, &eps, true).unwrap();
        assert_eq!((c.size(), c.method), (2, CoverMethod::Exhaustive));
        assert!(is_cover(&m, &eps, &c.net));
        for method in [CoverMethod::GreedySetCover, CoverMethod::FarthestPoint] {
            let g = cover_with(&m, &eps, method).unwrap();
            assert!(is_cover(&m, &eps, &g.net));
            assert!(g.size() >= 2);
        }
    }

    #[test]
    fn trivial_covers() {
        let one = line(1, 1);
        assert_eq!(covering_number(&one, &Radius::new(0.01), true).unwrap().size(), 1);
        let m = line(9, 8);
        assert_eq!(covering_number(&m, &Radius::new(1.0), false).unwrap().size(), 1);
        assert!(matches!(
            covering_number(&m, &Radius::new(0.0), false),
            Err(CompactnessError::NonPositiveEpsilon(_))
        ));
    }

    #[test]
    fn farthest_point_on_a_fine_line() {
        let m = line(201, 200);
        let eps = Radius::new(0.1);
        assert_eq!(cover_with(&m, &eps, CoverMethod::FarthestPoint).unwrap().size(), 9);
        assert_eq!(cover_with(&m, &eps, CoverMethod::GreedySetCover).unwrap().size(), 5);
    }

    #[test]
    fn chain_profile_is_all_ones() {
        let g = chain(6).unwrap();
        let seq = seq_for(&g, 1, IterationConfig::default());
        let report = compactness_profile(&seq, &[Radius::new(0.1)], None, CoverMethod::default()).unwrap();
        assert!(report.entries.iter().all(|e| e.n == 1));
        assert!(report.summaries[0].bounded_within_horizon);
        let width = bounded_width_check(&g, &seq);
        assert!(width.levels.iter().all(|l| l.2 == 0.0));
        assert_eq!(width.max_width, 1);
    }

    #[test]
    fn profile_is_monotone_in_epsilon() {
        let g = pascal(2, 16).unwrap();
        let seq = seq_for(&g, 1, IterationConfig::default());
        let eps: Vec<Radius> = ["0.3", "0.05", "0.1", "0.2"].iter().map(|e| Radius::parse(e).unwrap()).collect();
        let report = compactness_profile(&seq, &eps, None, CoverMethod::FarthestPoint).unwrap();
        for level in 1..=16 {
            let n = |e: &str| report.entries.iter().find(|x| x.level == level && x.epsilon == e).unwrap().n;
            assert!(n("0.05") >= n("0.1") && n("0.1") >= n("0.2") && n("0.2") >= n("0.3"));
        }
        assert!(report.to_csv().starts_with("epsilon,level,N,method\n0.3,1,"));
    }

    #[test]
    fn pascal_sequences_cluster_by_slope() {
        let g = pascal(2, 60).unwrap();
        let seq = seq_for(&g, 1, IterationConfig::float());
        let slope = |p: f64| VertexSequence::new(1, (1..=60).map(|n| (p * n as f64).round() as usize).collect());
        let alternating =
            VertexSequence::new(1, (1..=60).map(|n| if n % 2 == 0 { n / 4 } else { (3 * n + 2) / 4 }).collect());
        let report = cauchy_classes(&seq, &[slope(0.3), slope(0.7), slope(0.31), alternating], 0.1).unwrap();
        assert!(report.candidates[0].is_cauchy && report.candidates[1].is_cauchy);
        assert!(!report.candidates[3].is_cauchy);
        for c in &report.candidates {
            assert!(c.modulus.windows(2).all(|w| w[1].1 <= w[0].1));
        }
        assert_eq!(report.clusters, vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn constant_chain_sequence_has_zero_modulus() {
        let g = chain(8).unwrap();
        let seq = seq_for(&g, 1, IterationConfig { mode: Arithmetic::Exact, bit_cutoff: 4096 });
        let report = cauchy_classes(&seq, &[VertexSequence::new(1, vec![0; 8])], 0.1).unwrap();
        assert!(report.candidates[0].modulus.iter().all(|m| m.1 == 0.0));
        let bad = cauchy_classes(&seq, &[VertexSequence::new(1, vec![0; 8]), VertexSequence::new(2, vec![0; 7])], 0.1);
        assert!(matches!(bad, Err(CompactnessError::MismatchedRanges { index: 1, .. })));
    }
}
