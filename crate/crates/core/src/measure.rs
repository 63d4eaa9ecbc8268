//! Central measures as coherent level distributions, and diagnostics for
//! extremality, concentration and standardness.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compactness::{mostly_nonincreasing, VertexSequence};
use crate::graph::GradedGraph;
use crate::kernel::{project, CotransitionKernel, KernelError, LevelDistribution};
use crate::metric::{distance_to_vertices, Distances, InternalMetricSequence, LevelMetric, MetricError, Radius};
use crate::scalar::{fraction_string, parse_fraction, Rational, Scalar, Value};
use crate::transport::{kantorovich, TransportError};

/// `fwd[k][u]` lists `(v, Prob(next = v | current = u))` from level
/// `start + k` to level `start + k + 1`.
pub type ForwardKernel = Vec<Vec<Vec<(usize, Rational)>>>;

/// Pair count up to which the pairwise martingale expectation is summed exactly.
pub const EXACT_PAIR_LIMIT: usize = 250_000;

/// Tolerance used by the finite-horizon trend verdicts.
pub const TREND_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error(
        "centrality fails on edge {from} -> {to} (levels {level} -> {}): mu_n(u) fwd(v|u) = {lhs}, mu_(n+1)(v) lambda(u|v) = {rhs}",
        level + 1
    )]
    Centrality { level: usize, from: usize, to: usize, lhs: String, rhs: String },
    #[error("forward row at level {level}, vertex {vertex}: {reason}")]
    ForwardRow { level: usize, vertex: usize, reason: String },
    #[error("measure is incoherent at level {level}: {detail}")]
    Incoherent { level: usize, detail: String },
    #[error("measure ranges differ: {0}")]
    MismatchedRanges(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("level pair ({n}, {m}) is outside the measure and metric ranges or has n >= m")]
    InvalidPair { n: usize, m: usize },
    #[error("vertex label {label:?} at level {level} is not a composition")]
    NotComposition { level: usize, label: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// A central measure given by its level marginals `mu_start, ..., mu_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralMeasure {
    start: usize,
    levels: Vec<LevelDistribution>,
    forward: Option<ForwardKernel>,
}

impl CentralMeasure {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &LevelDistribution {
        &self.levels[n - self.start]
    }

    pub fn levels(&self) -> &[LevelDistribution] {
        &self.levels
    }

    pub fn forward(&self) -> Option<&ForwardKernel> {
        self.forward.as_ref()
    }
}

/// Builds a measure by propagating `delta_root` through `fwd` and checks the
/// centrality identity `mu_n(u) fwd(v|u) = mu_{n+1}(v) lambda(u|v)` on every edge.
pub fn from_forward_kernel(
    graph: &GradedGraph,
    kernel: &CotransitionKernel,
    fwd: ForwardKernel,
) -> Result<CentralMeasure, MeasureError> {
    let depth = fwd.len();
    if depth > graph.depth() || depth > kernel.depth() {
        return Err(MeasureError::MismatchedRanges(format!(
            "forward kernel has {depth} steps, graph depth is {}",
            graph.depth()
        )));
    }
    let mut levels = vec![LevelDistribution::delta(0, graph.level_size(0), 0)];
    for (n, step) in fwd.iter().enumerate() {
        if step.len() != graph.level_size(n) {
            return Err(MeasureError::ForwardRow {
                level: n,
                vertex: step.len(),
                reason: format!("expected {} rows", graph.level_size(n)),
            });
        }
        let successors = graph.successors(n);
        for (u, row) in step.iter().enumerate() {
            let mut sum = Rational::zero();
            for (v, p) in row {
                if p.is_negative() {
                    return Err(MeasureError::ForwardRow { level: n, vertex: u, reason: "negative entry".into() });
                }
                if !successors[u].iter().any(|(s, _)| s == v) {
                    return Err(MeasureError::ForwardRow {
                        level: n,
                        vertex: u,
                        reason: format!("target {v} is not adjacent"),
                    });
                }
                sum += p;
            }
            if !sum.is_one() {
                return Err(MeasureError::ForwardRow {
                    level: n,
                    vertex: u,
                    reason: format!("row sums to {}", fraction_string(&sum)),
                });
            }
        }
        let current = levels.last().expect("seeded").probs();
        let mut next = vec![Rational::zero(); graph.level_size(n + 1)];
        for (u, row) in step.iter().enumerate() {
            for (v, p) in row {
                next[*v] += &current[u] * p;
            }
        }
        for (u, v, _) in graph.edges(n + 1) {
            let p = step[u].iter().find(|(t, _)| *t == v).map_or_else(Rational::zero, |(_, p)| p.clone());
            let lambda = kernel
                .row(n + 1, v)
                .iter()
                .find(|(s, _)| *s == u)
                .map_or_else(Rational::zero, |(_, l)| l.clone());
            let lhs = &current[u] * p;
            let rhs = &next[v] * lambda;
            if lhs != rhs {
                return Err(MeasureError::Centrality {
                    level: n,
                    from: u,
                    to: v,
                    lhs: fraction_string(&lhs),
                    rhs: fraction_string(&rhs),
                });
            }
        }
        levels.push(LevelDistribution::from_parts_unchecked(n + 1, next));
    }
    Ok(CentralMeasure { start: 0, levels, forward: Some(fwd) })
}

/// Adopts explicit marginals after checking `p(mu_n) = mu_{n-1}` exactly.
pub fn from_levels(
    kernel: &CotransitionKernel,
    start: usize,
    levels: Vec<Vec<Rational>>,
) -> Result<CentralMeasure, MeasureError> {
    if levels.is_empty() || start + levels.len() - 1 > kernel.depth() {
        return Err(MeasureError::MismatchedRanges(format!(
            "{} levels from {start} exceed depth {}",
            levels.len(),
            kernel.depth()
        )));
    }
    let mut out = Vec::with_capacity(levels.len());
    for (k, probs) in levels.into_iter().enumerate() {
        let n = start + k;
        if probs.len() != kernel.level_size(n) {
            return Err(MeasureError::Incoherent {
                level: n,
                detail: format!("{} entries for {} vertices", probs.len(), kernel.level_size(n)),
            });
        }
        let dist = LevelDistribution::new(n, probs)
            .map_err(|e| MeasureError::Incoherent { level: n, detail: e.to_string() })?;
        if k > 0 {
            let projected = project(&dist, kernel)?;
            if projected.probs() != out.last().map(LevelDistribution::probs).expect("previous level") {
                return Err(MeasureError::Incoherent {
                    level: n,
                    detail: format!("projection of level {n} differs from level {}", n - 1),
                });
            }
        }
        out.push(dist);
    }
    Ok(CentralMeasure { start, levels: out, forward: None })
}

fn parse_composition(label: &str) -> Option<Vec<usize>> {
    let inner = label.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|p| p.trim().parse().ok()).collect()
}

/// Forward kernel of the i.i.d. measure on a Pascal graph: coordinate `k`
/// is incremented with probability `probs[k]`. Vertex labels must be
/// compositions such as `(2,1)`.
pub fn multinomial_forward(graph: &GradedGraph, probs: &[Rational], depth: usize) -> Result<ForwardKernel, MeasureError> {
    let total: Rational = probs.iter().sum();
    if probs.iter().any(Signed::is_negative) || !total.is_one() {
        return Err(MeasureError::Weights("coordinate probabilities must be nonnegative and sum to 1".into()));
    }
    let parse_level = |n: usize| -> Result<Vec<Vec<usize>>, MeasureError> {
        graph
            .labels(n)
            .iter()
            .map(|l| {
                parse_composition(l)
                    .filter(|c| c.len() == probs.len())
                    .ok_or_else(|| MeasureError::NotComposition { level: n, label: l.clone() })
            })
            .collect()
    };
    let mut fwd = Vec::with_capacity(depth);
    let mut current = if depth > 0 { parse_level(1)? } else { Vec::new() };
    // The root has no composition label; it is the zero composition.
    let root_row = current
        .iter()
        .enumerate()
        .filter_map(|(v, c)| c.iter().position(|&x| x == 1).filter(|_| c.iter().sum::<usize>() == 1).map(|k| (v, k)))
        .filter(|(_, k)| !probs[*k].is_zero())
        .map(|(v, k)| (v, probs[k].clone()))
        .collect();
    if depth > 0 {
        fwd.push(vec![root_row]);
    }
    for n in 1..depth {
        let next = parse_level(n + 1)?;
        let index: HashMap<&Vec<usize>, usize> = next.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let step = current
            .iter()
            .map(|c| {
                (0..probs.len())
                    .filter(|&k| !probs[k].is_zero())
                    .map(|k| {
                        let mut up = c.clone();
                        up[k] += 1;
                        index
                            .get(&up)
                            .map(|&v| (v, probs[k].clone()))
                            .ok_or_else(|| MeasureError::NotComposition { level: n + 1, label: format!("{up:?}") })
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(|mut row| {
                        row.sort_by_key(|e| e.0);
                        row
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        fwd.push(step);
        current = next;
    }
    Ok(fwd)
}

/// Bernoulli(`p`) on the two-dimensional Pascal graph: the first
/// coordinate is incremented with probability `p`.
pub fn bernoulli(graph: &GradedGraph, kernel: &CotransitionKernel, p: &Rational, depth: usize) -> Result<CentralMeasure, MeasureError> {
    let fwd = multinomial_forward(graph, &[p.clone(), Rational::one() - p], depth)?;
    from_forward_kernel(graph, kernel, fwd)
}

/// Pointwise convex combination of level marginals.
pub fn mixture(measures: &[CentralMeasure], weights: &[Rational]) -> Result<CentralMeasure, MeasureError> {
    let first = measures.first().ok_or_else(|| MeasureError::Weights("no measures".into()))?;
    if measures.len() != weights.len() {
        return Err(MeasureError::Weights(format!("{} measures, {} weights", measures.len(), weights.len())));
    }
    let total: Rational = weights.iter().sum();
    if weights.iter().any(Signed::is_negative) || !total.is_one() {
        return Err(MeasureError::Weights("weights must be nonnegative and sum to 1".into()));
    }
    if let Some(m) = measures.iter().find(|m| m.start != first.start || m.end() != first.end()) {
        return Err(MeasureError::MismatchedRanges(format!(
            "{}..={} against {}..={}",
            m.start,
            m.end(),
            first.start,
            first.end()
        )));
    }
    if measures.iter().zip(1..).any(|(m, _)| m.levels.iter().zip(&first.levels).any(|(a, b)| a.len() != b.len())) {
        return Err(MeasureError::MismatchedRanges("level sizes differ".into()));
    }
    let levels = (0..first.levels.len())
        .map(|k| {
            let n = first.start + k;
            let mut probs = vec![Rational::zero(); first.levels[k].len()];
            for (m, w) in measures.iter().zip(weights) {
                for (acc, p) in probs.iter_mut().zip(m.levels[k].probs()) {
                    *acc += w * p;
                }
            }
            LevelDistribution::from_parts_unchecked(n, probs)
        })
        .collect();
    let forward = if measures.len() == 1 { first.forward.clone() } else { None };
    Ok(CentralMeasure { start: first.start, levels, forward })
}

/// Finite-horizon "tends to `limit`": the final value is within `tol` of
/// the limit and, over the second half of the series, most steps do not
/// move away from it.
pub fn trend_towards(values: &[f64], limit: f64, tol: f64) -> bool {
    let Some(last) = values.last() else { return false };
    let gaps: Vec<f64> = values[values.len() / 2..].iter().map(|v| (v - limit).abs()).collect();
    (last - limit).abs() <= tol && mostly_nonincreasing(&gaps)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalityRow {
    pub n: usize,
    pub m: usize,
    pub epsilon: String,
    /// `mu_m`-mass of vertices whose projection to level `n` is within
    /// epsilon of `mu_n` in total variation.
    pub tv_mass: f64,
    pub tv_mass_exact: String,
    /// Same, in the Kantorovich metric built on the level-`n` internal metric.
    pub internal_mass: f64,
    pub internal_mass_exact: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub rows: Vec<ExtremalityRow>,
    /// Total-variation masses trend to 1 for every tested `(n, epsilon)`.
    pub consistent_with_extremality: bool,
    /// The same verdict computed from the internal-metric masses.
    pub internal_consistent: bool,
    pub tolerance: f64,
    pub verdict: String,
}

impl ExtremalityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,epsilon,tv_mass,internal_mass,tv_mass_exact,internal_mass_exact\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                r.m,
                r.epsilon,
                r.tv_mass,
                r.internal_mass,
                r.tv_mass_exact,
                r.internal_mass_exact.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

fn check_pair(measure: &CentralMeasure, seq: &InternalMetricSequence, n: usize, m: usize) -> Result<(), MeasureError> {
    let ok = n < m && n >= measure.start && m <= measure.end() && n >= seq.start() && n <= seq.end() && m <= seq.kernel.depth();
    ok.then_some(()).ok_or(MeasureError::InvalidPair { n, m })
}

/// `p_{k,n}(delta_v)` for every vertex `v` of level `top`, as dense vectors
/// on level `n`, built upward one level at a time.
fn projection_table(kernel: &CotransitionKernel, n: usize, top: usize) -> Vec<Vec<Rational>> {
    let size = kernel.level_size(n);
    let mut table: Vec<Vec<Rational>> = (0..size)
        .map(|v| {
            let mut e = vec![Rational::zero(); size];
            e[v] = Rational::one();
            e
        })
        .collect();
    for k in n + 1..=top {
        table = (0..kernel.level_size(k))
            .into_par_iter()
            .map(|w| {
                let mut acc = vec![Rational::zero(); size];
                for (u, l) in kernel.row(k, w) {
                    for (a, x) in acc.iter_mut().zip(&table[*u]) {
                        if !x.is_zero() {
                            *a += l * x;
                        }
                    }
                }
                acc
            })
            .collect();
    }
    table
}

fn internal_distance(metric: &LevelMetric, a: &[Rational], b: &[Rational]) -> Result<Value, MeasureError> {
    Ok(match &metric.distances {
        Distances::Exact(rho) => Value::Exact(kantorovich(a, b, rho)?.0),
        Distances::Float(rho) => {
            let fa: Vec<f64> = a.iter().map(Scalar::to_f64).collect();
            let fb: Vec<f64> = b.iter().map(Scalar::to_f64).collect();
            Value::Float(kantorovich(&fa, &fb, rho)?.0)
        }
    })
}

fn within(value: &Value, radius: &Radius) -> bool {
    match value {
        Value::Exact(r) => r <= &radius.exact,
        Value::Float(x) => *x <= radius.float + 1e-9,
    }
}

/// For each `(n, m)`: the `mu_m`-mass of level-`m` vertices whose projection
/// to level `n` lies within epsilon of `mu_n`, in total variation and in the
/// internal Kantorovich metric.
pub fn extremality_check(
    measure: &CentralMeasure,
    seq: &InternalMetricSequence,
    epsilons: &[Radius],
    pairs: &[(usize, usize)],
) -> Result<ExtremalityReport, MeasureError> {
    for &(n, m) in pairs {
        check_pair(measure, seq, n, m)?;
    }
    let per_pair: Vec<Vec<ExtremalityRow>> = pairs
        .par_iter()
        .map(|&(n, m)| -> Result<Vec<ExtremalityRow>, MeasureError> {
            let table = projection_table(&seq.kernel, n, m);
            let target = measure.level(n).probs();
            let metric = seq.level(n)?;
            let weights = measure.level(m).probs();
            let distances: Vec<Option<(Rational, Value)>> = table
                .par_iter()
                .zip(weights)
                .map(|(q, w)| -> Result<_, MeasureError> {
                    if w.is_zero() {
                        return Ok(None);
                    }
                    let tv: Rational = q.iter().zip(target).map(|(a, b)| (a - b).abs()).sum::<Rational>()
                        / Rational::from_integer(2.into());
                    Ok(Some((tv, internal_distance(metric, q, target)?)))
                })
                .collect::<Result<_, _>>()?;
            Ok(epsilons
                .iter()
                .map(|eps| {
                    let mut tv_mass = Rational::zero();
                    let mut internal_exact = Rational::zero();
                    let mut internal_float = 0.0;
                    for (d, w) in distances.iter().zip(weights) {
                        let Some((tv, internal)) = d else { continue };
                        if tv <= &eps.exact {
                            tv_mass += w;
                        }
                        if within(internal, eps) {
                            internal_exact += w;
                            internal_float += w.to_f64();
                        }
                    }
                    let exact_internal = metric.mode() == crate::scalar::Arithmetic::Exact;
                    ExtremalityRow {
                        n,
                        m,
                        epsilon: eps.text.clone(),
                        tv_mass: tv_mass.to_f64(),
                        tv_mass_exact: fraction_string(&tv_mass),
                        internal_mass: if exact_internal { internal_exact.to_f64() } else { internal_float },
                        internal_mass_exact: exact_internal.then(|| fraction_string(&internal_exact)),
                    }
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<ExtremalityRow> = per_pair.into_iter().flatten().collect();
    let verdict_for = |pick: fn(&ExtremalityRow) -> f64| {
        let mut groups: Vec<(usize, &str)> = rows.iter().map(|r| (r.n, r.epsilon.as_str())).collect();
        groups.sort();
        groups.dedup();
        !groups.is_empty()
            && groups.iter().all(|&(n, eps)| {
                let mut series: Vec<(usize, f64)> =
                    rows.iter().filter(|r| r.n == n && r.epsilon == eps).map(|r| (r.m, pick(r))).collect();
                series.sort_by_key(|s| s.0);
                trend_towards(&series.iter().map(|s| s.1).collect::<Vec<_>>(), 1.0, TREND_TOLERANCE)
            })
    };
    let consistent = verdict_for(|r| r.tv_mass);
    let internal_consistent = verdict_for(|r| r.internal_mass);
    Ok(ExtremalityReport {
        rows,
        consistent_with_extremality: consistent,
        internal_consistent,
        tolerance: TREND_TOLERANCE,
        verdict: if consistent { "consistent with extremality" } else { "not consistent with extremality" }.into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardnessRow {
    pub level: usize,
    pub distance: f64,
    pub distance_exact: Option<String>,
    pub argmin: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardnessProfile {
    pub rows: Vec<StandardnessRow>,
    /// Candidate regular sequence: the closest vertex per level.
    pub argmins: VertexSequence,
    pub tends_to_zero: bool,
}

impl StandardnessProfile {
    pub fn value_at(&self, level: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.level == level).map(|r| r.distance)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,distance,argmin,distance_exact\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.level,
                r.distance,
                r.argmin,
                r.distance_exact.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

fn common_range(measure: &CentralMeasure, seq: &InternalMetricSequence) -> Result<(usize, usize), MeasureError> {
    let (lo, hi) = (measure.start.max(seq.start()), measure.end().min(seq.end()));
    if lo > hi {
        return Err(MeasureError::MismatchedRanges(format!(
            "measure {}..={} and metric {}..={} do not overlap",
            measure.start,
            measure.end(),
            seq.start(),
            seq.end()
        )));
    }
    Ok((lo, hi))
}

/// `rho_n(mu_n, vertices)` per level over the common range, and the argmin
/// vertices.
pub fn standardness_distance_profile(
    measure: &CentralMeasure,
    seq: &InternalMetricSequence,
) -> Result<StandardnessProfile, MeasureError> {
    let (lo, hi) = common_range(measure, seq)?;
    let rows: Vec<StandardnessRow> = (lo..=hi)
        .into_par_iter()
        .map(|n| -> Result<StandardnessRow, MeasureError> {
            let (value, argmin) = distance_to_vertices(measure.level(n), seq.level(n)?)?;
            Ok(StandardnessRow {
                level: n,
                distance: value.to_f64(),
                distance_exact: value.exact().map(fraction_string),
                argmin,
            })
        })
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    Ok(StandardnessProfile {
        argmins: VertexSequence::new(lo, rows.iter().map(|r| r.argmin).collect()),
        tends_to_zero: trend_towards(&values, 0.0, TREND_TOLERANCE),
        rows,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub level: usize,
    pub epsilon: String,
    pub center: usize,
    pub mass: f64,
    pub mass_exact: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationProfile {
    pub rows: Vec<ConcentrationRow>,
    /// Per epsilon: whether the ball mass trends to 1.
    pub trends: Vec<(String, bool)>,
    pub concentrates: bool,
}

impl ConcentrationProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,epsilon,center,mass,mass_exact\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.level, r.epsilon, r.center, r.mass, r.mass_exact));
        }
        out
    }
}

/// `mu_n` of the closed internal-metric ball of radius epsilon around
/// `centers_n`.
pub fn concentration_profile(
    measure: &CentralMeasure,
    seq: &InternalMetricSequence,
    epsilons: &[Radius],
    centers: &VertexSequence,
) -> Result<ConcentrationProfile, MeasureError> {
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for eps in epsilons {
        let mut series = Vec::new();
        for n in centers.start..=centers.end() {
            if n < measure.start || n > measure.end() {
                return Err(MeasureError::MismatchedRanges(format!("level {n} outside the measure")));
            }
            let metric = seq.level(n)?;
            let center = centers.at(n);
            let mass: Rational = measure
                .level(n)
                .support()
                .into_iter()
                .filter(|(v, _)| metric.within(center, *v, eps))
                .map(|(_, w)| w)
                .sum();
            series.push(mass.to_f64());
            rows.push(ConcentrationRow {
                level: n,
                epsilon: eps.text.clone(),
                center,
                mass: mass.to_f64(),
                mass_exact: fraction_string(&mass),
            });
        }
        trends.push((eps.text.clone(), trend_towards(&series, 1.0, TREND_TOLERANCE)));
    }
    Ok(ConcentrationProfile { concentrates: trends.iter().all(|t| t.1), rows, trends })
}

/// What the conditional law `lambda(. | gamma_{n+1})` is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MartingaleVariant {
    /// Another conditional law, for an independent `gamma'_{n+1}`.
    #[default]
    Pairwise,
    /// The unconditional marginal `mu_n`.
    ToMarginal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleRow {
    pub level: usize,
    pub value: f64,
    pub sampled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleProfile {
    pub variant: MartingaleVariant,
    pub seed: u64,
    pub sample_size: usize,
    pub rows: Vec<MartingaleRow>,
    pub tends_to_zero: bool,
}

impl MartingaleProfile {
    pub fn value_at(&self, level: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.level == level).map(|r| r.value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,value,sampled\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.level, r.value, r.sampled));
        }
        out
    }
}

/// Expected Kantorovich distance (under `rho_n`) between the conditional law
/// on level `n` given a `mu_{n+1}`-random vertex and its comparand.
///
/// For the pairwise variant the distance between the conditional laws of
/// `gamma` and `gamma'` is `rho_{n+1}(gamma, gamma')` by construction, so the
/// expectation is read off the next level's metric; it is summed exactly
/// when the support has at most [`EXACT_PAIR_LIMIT`] pairs and sampled with
/// a seeded generator otherwise. The marginal variant solves one transport
/// problem per support vertex in `f64`.
pub fn martingale_profile(
    measure: &CentralMeasure,
    seq: &InternalMetricSequence,
    variant: MartingaleVariant,
    sample_size: usize,
    seed: u64,
) -> Result<MartingaleProfile, MeasureError> {
    martingale_profile_with_limit(measure, seq, variant, sample_size, seed, EXACT_PAIR_LIMIT)
}

/// [`martingale_profile`] with an explicit bound on exactly summed pairs.
pub fn martingale_profile_with_limit(
    measure: &CentralMeasure,
    seq: &InternalMetricSequence,
    variant: MartingaleVariant,
    sample_size: usize,
    seed: u64,
    exact_pair_limit: usize,
) -> Result<MartingaleProfile, MeasureError> {
    let (lo, hi) = common_range(measure, seq)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for n in lo..hi {
        let upper = measure.level(n + 1).support();
        let row = match variant {
            MartingaleVariant::Pairwise => {
                let metric = seq.level(n + 1)?;
                if upper.len() * upper.len() <= exact_pair_limit {
                    let weights: Vec<(usize, f64)> = upper.iter().map(|(v, w)| (*v, w.to_f64())).collect();
                    let mut total = 0.0;
                    for (a, wa) in &weights {
                        for (b, wb) in &weights {
                            total += wa * wb * metric.get_f64(*a, *b);
                        }
                    }
                    MartingaleRow { level: n, value: total, sampled: false }
                } else {
                    let index = WeightedIndex::new(upper.iter().map(|(_, w)| w.to_f64()))
                        .map_err(|e| MeasureError::Weights(e.to_string()))?;
                    let total: f64 = (0..sample_size)
                        .map(|_| {
                            let (a, b) = (upper[index.sample(&mut rng)].0, upper[index.sample(&mut rng)].0);
                            metric.get_f64(a, b)
                        })
                        .sum();
                    MartingaleRow { level: n, value: total / sample_size.max(1) as f64, sampled: true }
                }
            }
            MartingaleVariant::ToMarginal => {
                let rho = seq.level(n)?.distances.to_float();
                let marginal = measure.level(n).to_f64();
                let costs: Vec<f64> = upper
                    .par_iter()
                    .map(|(v, w)| -> Result<f64, MeasureError> {
                        let mut cond = vec![0.0; marginal.len()];
                        for (u, l) in seq.kernel.row(n + 1, *v) {
                            cond[*u] = l.to_f64();
                        }
                        Ok(w.to_f64() * kantorovich(&cond, &marginal, &rho)?.0)
                    })
                    .collect::<Result<_, _>>()?;
                MartingaleRow { level: n, value: costs.iter().sum(), sampled: false }
            }
        };
        rows.push(row);
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    Ok(MartingaleProfile { variant, seed, sample_size, tends_to_zero: trend_towards(&values, 0.0, TREND_TOLERANCE), rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardRecord {
    pub from: usize,
    pub to: usize,
    pub prob: String,
}

/// JSON layout of a measure: marginals as fraction strings from
/// `start_level` (default 0), and/or a forward kernel from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward_kernel: Option<Vec<Vec<ForwardRecord>>>,
}

impl MeasureFile {
    pub fn from_measure(measure: &CentralMeasure) -> Self {
        Self {
            levels: measure.levels.iter().map(|l| l.probs().iter().map(fraction_string).collect()).collect(),
            start_level: Some(measure.start),
            forward_kernel: measure.forward.as_ref().map(|fwd| {
                fwd.iter()
                    .map(|step| {
                        step.iter()
                            .enumerate()
                            .flat_map(|(u, row)| {
                                row.iter().map(move |(v, p)| ForwardRecord { from: u, to: *v, prob: fraction_string(p) })
                            })
                            .collect()
                    })
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        serde_json::from_str(text).map_err(|e| MeasureError::Parse(e.to_string()))
    }

    /// Builds and checks the measure. When both parts are present the
    /// listed marginals must equal the ones the kernel generates.
    pub fn into_measure(self, graph: &GradedGraph, kernel: &CotransitionKernel) -> Result<CentralMeasure, MeasureError> {
        let parse = |s: &String| parse_fraction(s).ok_or_else(|| MeasureError::Parse(format!("bad fraction {s:?}")));
        let levels: Vec<Vec<Rational>> =
            self.levels.iter().map(|l| l.iter().map(parse).collect()).collect::<Result<_, _>>()?;
        let start = self.start_level.unwrap_or(0);
        match self.forward_kernel {
            Some(records) => {
                let fwd = records
                    .iter()
                    .enumerate()
                    .map(|(n, step)| -> Result<_, MeasureError> {
                        let mut rows = vec![Vec::new(); graph.level_size(n)];
                        for r in step {
                            let slot = rows.get_mut(r.from).ok_or(MeasureError::ForwardRow {
                                level: n,
                                vertex: r.from,
                                reason: "source out of range".into(),
                            })?;
                            slot.push((r.to, parse(&r.prob)?));
                        }
                        for row in &mut rows {
                            row.sort_by_key(|e: &(usize, Rational)| e.0);
                        }
                        Ok(rows)
                    })
                    .collect::<Result<ForwardKernel, _>>()?;
                let measure = from_forward_kernel(graph, kernel, fwd)?;
                for (k, probs) in levels.iter().enumerate() {
                    let n = start + k;
                    if n > measure.end() || measure.level(n).probs() != probs.as_slice() {
                        return Err(MeasureError::Incoherent {
                            level: n,
                            detail: "listed marginal differs from the forward kernel".into(),
                        });
                    }
                }
                Ok(measure)
            }
            None => from_levels(kernel, start, levels),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{chain, pascal};
    use crate::graph::dims;
    use crate::kernel::cotransitions;
    use crate::metric::{iterate_metric, IterationConfig};
    use crate::scalar::{ratio, Arithmetic};

    fn setup(depth: usize) -> (GradedGraph, CotransitionKernel) {
        let g = pascal(2, depth).unwrap();
        let k = cotransitions(&g, &dims(&g, depth).unwrap(), None).unwrap();
        (g, k)
    }

    fn binomial(n: usize, p: &Rational) -> Vec<Rational> {
        let q = Rational::one() - p;
        (0..=n)
            .map(|i| {
                let c = (0..i).fold(Rational::one(), |acc, j| acc * ratio((n - j) as i64, (j + 1) as i64));
                c * num_traits::pow(p.clone(), i) * num_traits::pow(q.clone(), n - i)
            })
            .collect()
    }

    #[test]
    fn bernoulli_marginals_are_binomial() {
        let (g, k) = setup(8);
        let p = ratio(1, 3);
        let mu = bernoulli(&g, &k, &p, 8).unwrap();
        for n in 0..=8 {
            assert_eq!(mu.level(n).probs(), binomial(n, &p).as_slice());
        }
        assert!(from_levels(&k, 2, (2..=8).map(|n| binomial(n, &p)).collect()).is_ok());
    }

    #[test]
    fn level_dependent_kernel_is_rejected() {
        let (g, k) = setup(4);
        let fwd: ForwardKernel = (0..4)
            .map(|n| {
                let p = if n % 2 == 0 { ratio(3, 4) } else { ratio(1, 4) };
                let q = Rational::one() - &p;
                (0..=n).map(|i| vec![(i, q.clone()), (i + 1, p.clone())]).collect()
            })
            .collect();
        assert!(matches!(from_forward_kernel(&g, &k, fwd), Err(MeasureError::Centrality { .. })));
    }

    #[test]
    fn incoherent_levels_are_rejected() {
        let (_, k) = setup(3);
        let levels = vec![binomial(1, &ratio(1, 2)), binomial(2, &ratio(1, 3))];
        assert!(matches!(from_levels(&k, 1, levels), Err(MeasureError::Incoherent { level: 2, .. })));
    }

    #[test]
    fn mixture_identities() {
        let (g, k) = setup(5);
        let a = bernoulli(&g, &k, &ratio(1, 4), 5).unwrap();
        let b = bernoulli(&g, &k, &ratio(3, 4), 5).unwrap();
        let first = mixture(&[a.clone(), b.clone()], &[ratio(1, 1), ratio(0, 1)]).unwrap();
        assert_eq!(first.levels(), a.levels());
        let half = mixture(&[a.clone(), b.clone()], &[ratio(1, 2), ratio(1, 2)]).unwrap();
        for n in 1..=5 {
            assert_eq!(&project(half.level(n), &k).unwrap(), half.level(n - 1));
        }
        assert!(mixture(&[a], &[ratio(1, 2)]).is_err());
    }

    #[test]
    fn chain_measure_is_perfect() {
        let g = chain(6).unwrap();
        let k = cotransitions(&g, &dims(&g, 6).unwrap(), None).unwrap();
        let fwd: ForwardKernel = (0..6).map(|_| vec![vec![(0, Rational::one())]]).collect();
        let mu = from_forward_kernel(&g, &k, fwd).unwrap();
        let seq = iterate_metric(&g, &k, Distances::discrete(1, Arithmetic::Exact), 1, 6, IterationConfig::default())
            .unwrap();
        let eps = [Radius::new(0.1)];
        let ext = extremality_check(&mu, &seq, &eps, &[(1, 3), (2, 6)]).unwrap();
        assert!(ext.rows.iter().all(|r| r.tv_mass == 1.0 && r.internal_mass == 1.0));
        let std = standardness_distance_profile(&mu, &seq).unwrap();
        assert!(std.rows.iter().all(|r| r.distance == 0.0));
        let conc = concentration_profile(&mu, &seq, &eps, &std.argmins).unwrap();
        assert!(conc.concentrates);
        let mart = martingale_profile(&mu, &seq, MartingaleVariant::Pairwise, 100, 7).unwrap();
        assert!(mart.rows.iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn measure_file_round_trip() {
        let (g, k) = setup(4);
        let mu = bernoulli(&g, &k, &ratio(2, 5), 4).unwrap();
        let file = MeasureFile::from_measure(&mu);
        let back = MeasureFile::from_json(&file.to_json()).unwrap().into_measure(&g, &k).unwrap();
        assert_eq!(back, mu);
        let levels_only = MeasureFile { forward_kernel: None, ..file.clone() };
        assert_eq!(levels_only.into_measure(&g, &k).unwrap().levels(), mu.levels());
        let mut broken = file;
        broken.levels[2][0] = "1/2".into();
        assert!(matches!(broken.into_measure(&g, &k), Err(MeasureError::Incoherent { level: 2, .. })));
    }

    #[test]
    fn trend_helper() {
        assert!(trend_towards(&[0.5, 0.8, 0.9, 0.97], 1.0, 0.05));
        assert!(!trend_towards(&[0.5, 0.8, 0.9, 0.94], 1.0, 0.05));
        assert!(trend_towards(&[0.3, 0.1, 0.02], 0.0, 0.05));
        assert!(!trend_towards(&[], 0.0, 0.05));
    }
}
