//! The internal metric: Kantorovich extension iterated level by level.
//!
//! Given a metric on the vertices of level `k`, the distance between two
//! vertices of level `n + 1` is the Kantorovich distance, under the level-`n`
//! metric, between their cotransition rows (the projections of their point
//! masses). Exact iteration switches to `f64` once denominators grow past a
//! configurable bit bound; the switch is recorded in the provenance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GradedGraph;
use crate::kernel::{CotransitionKernel, LevelDistribution};
use crate::scalar::{denominator_bits, fraction_string, parse_fraction, rational_from_f64, Arithmetic, Rational, Scalar, Value};
use crate::transport::{transport_sparse, GroundMetric, MetricViolation, TransportError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("level {level} outside the iterated range {start}..={end}")]
    LevelOutOfRange { level: usize, start: usize, end: usize },
    #[error("initial metric has {got} points, level {level} has {expected} vertices")]
    InitialSize { level: usize, expected: usize, got: usize },
    #[error("invalid initial metric: {0}")]
    InvalidInitial(MetricViolation),
    #[error("degenerate initial metric: {0}")]
    Degenerate(MetricViolation),
    #[error("cross-level distance needs n < m, got n = {n}, m = {m}")]
    LevelOrder { n: usize, m: usize },
    #[error("vertex {vertex} out of range at level {level}")]
    VertexOutOfRange { level: usize, vertex: usize },
    #[error("distribution on level {got} does not match metric level {expected}")]
    LevelMismatch { expected: usize, got: usize },
    #[error("initial metrics live on different levels or modes")]
    IncompatibleInitials,
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Distances on one level, in either arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum Distances {
    Exact(GroundMetric<Rational>),
    Float(GroundMetric<f64>),
}

impl Distances {
    pub fn size(&self) -> usize {
        match self {
            Distances::Exact(m) => m.size(),
            Distances::Float(m) => m.size(),
        }
    }

    pub fn mode(&self) -> Arithmetic {
        match self {
            Distances::Exact(_) => Arithmetic::Exact,
            Distances::Float(_) => Arithmetic::Float,
        }
    }

    pub fn discrete(size: usize, mode: Arithmetic) -> Self {
        match mode {
            Arithmetic::Exact => Distances::Exact(GroundMetric::discrete(size)),
            Arithmetic::Float => Distances::Float(GroundMetric::discrete(size)),
        }
    }

    pub fn to_float(&self) -> GroundMetric<f64> {
        match self {
            Distances::Exact(m) => m.map(Scalar::to_f64),
            Distances::Float(m) => m.clone(),
        }
    }

    fn violations(&self, stop_early: bool) -> Vec<MetricViolation> {
        match self {
            Distances::Exact(m) => m.violations(stop_early),
            Distances::Float(m) => m.violations(stop_early),
        }
    }

    fn degeneracy(&self) -> Option<MetricViolation> {
        match self {
            Distances::Exact(m) => m.degeneracy(),
            Distances::Float(m) => m.degeneracy(),
        }
    }
}

/// One iterate `rho_n` of the internal metric.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMetric {
    pub level: usize,
    pub distances: Distances,
}

impl LevelMetric {
    pub fn size(&self) -> usize {
        self.distances.size()
    }

    pub fn mode(&self) -> Arithmetic {
        self.distances.mode()
    }

    pub fn exact(&self) -> Option<&GroundMetric<Rational>> {
        match &self.distances {
            Distances::Exact(m) => Some(m),
            Distances::Float(_) => None,
        }
    }

    pub fn get(&self, u: usize, v: usize) -> Value {
        match &self.distances {
            Distances::Exact(m) => Value::Exact(m.get(u, v).clone()),
            Distances::Float(m) => Value::Float(*m.get(u, v)),
        }
    }

    pub fn get_f64(&self, u: usize, v: usize) -> f64 {
        match &self.distances {
            Distances::Exact(m) => m.get(u, v).to_f64(),
            Distances::Float(m) => *m.get(u, v),
        }
    }

    pub fn diameter(&self) -> Value {
        match &self.distances {
            Distances::Exact(m) => Value::Exact(m.diameter()),
            Distances::Float(m) => Value::Float(m.diameter()),
        }
    }

    /// All metric-axiom violations, checking every triple.
    pub fn violations(&self) -> Vec<MetricViolation> {
        self.distances.violations(false)
    }

    /// Whether `d(u, v) <= radius`; float levels allow the 1e-9 tolerance.
    pub fn within(&self, u: usize, v: usize, radius: &Radius) -> bool {
        match &self.distances {
            Distances::Exact(m) => m.get(u, v) <= &radius.exact,
            Distances::Float(m) => *m.get(u, v) <= radius.float + 1e-9,
        }
    }

    /// CSV rows `level,u,v,distance` for `u <= v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,u,v,distance\n");
        for u in 0..self.size() {
            for v in u..self.size() {
                out.push_str(&format!("{},{u},{v},{}\n", self.level, self.get(u, v)));
            }
        }
        out
    }

    /// Dense matrix as JSON; exact entries are fraction strings.
    pub fn to_dense_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.size())
            .map(|u| {
                (0..self.size())
                    .map(|v| match self.get(u, v) {
                        Value::Exact(r) => serde_json::Value::String(fraction_string(&r)),
                        Value::Float(x) => serde_json::json!(x),
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "level": self.level, "mode": self.mode(), "size": self.size(), "matrix": rows })
    }
}

/// A ball radius usable against both arithmetics.
///
/// Decimal input is read exactly, so `0.1` compares as `1/10` against
/// exact distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Radius {
    pub exact: Rational,
    pub float: f64,
    pub text: String,
}

impl Radius {
    pub fn new(value: f64) -> Self {
        let text = format!("{value}");
        let exact = parse_fraction(&text).or_else(|| rational_from_f64(value)).unwrap_or_default();
        Self { exact, float: value, text }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let exact = parse_fraction(text)?;
        Some(Self { float: exact.to_f64(), exact, text: text.trim().to_string() })
    }

    pub fn is_positive(&self) -> bool {
        self.exact.is_pos()
    }
}

/// How the sequence was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub initial: String,
    pub initial_level: usize,
    pub requested_mode: Arithmetic,
    pub bit_cutoff: u64,
    /// First level computed in floating point, if any.
    pub float_from_level: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub mode: Arithmetic,
    /// Denominator size (bits) past which exact iteration falls back to floats.
    pub bit_cutoff: u64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self { mode: Arithmetic::Exact, bit_cutoff: 4096 }
    }
}

impl IterationConfig {
    pub fn float() -> Self {
        Self { mode: Arithmetic::Float, ..Self::default() }
    }
}

/// The iterated metrics `rho_k, ..., rho_N` and the kernel that produced them.
#[derive(Debug, Clone)]
pub struct InternalMetricSequence {
    pub levels: Vec<LevelMetric>,
    pub kernel: CotransitionKernel,
    pub provenance: Provenance,
}

impl InternalMetricSequence {
    pub fn start(&self) -> usize {
        self.levels[0].level
    }

    pub fn end(&self) -> usize {
        self.levels.last().expect("nonempty sequence").level
    }

    pub fn level(&self, n: usize) -> Result<&LevelMetric, MetricError> {
        if n < self.start() || n > self.end() {
            return Err(MetricError::LevelOutOfRange { level: n, start: self.start(), end: self.end() });
        }
        Ok(&self.levels[n - self.start()])
    }
}

/// First level with at least two vertices, or 1 when every level is a singleton.
///
/// Starting there keeps the initial metric from being trivially zero (the
/// Young graph has a single vertex at level 1).
pub fn default_initial_level(graph: &GradedGraph) -> usize {
    (1..=graph.depth()).find(|&n| graph.level_size(n) >= 2).unwrap_or(1.min(graph.depth()))
}

pub(crate) trait ReadMetric: Scalar {
    fn read(level: &LevelMetric, u: usize, v: usize) -> Self;
    fn lambda(r: &Rational) -> Self;
}

impl ReadMetric for Rational {
    fn read(level: &LevelMetric, u: usize, v: usize) -> Self {
        level.exact().expect("exact level").get(u, v).clone()
    }

    fn lambda(r: &Rational) -> Self {
        r.clone()
    }
}

impl ReadMetric for f64 {
    fn read(level: &LevelMetric, u: usize, v: usize) -> Self {
        level.get_f64(u, v)
    }

    fn lambda(r: &Rational) -> Self {
        r.to_f64()
    }
}

fn step<S: Scalar>(
    kernel: &CotransitionKernel,
    upper: usize,
    rho: &GroundMetric<S>,
    lambda: impl Fn(&Rational) -> S + Sync,
) -> Result<GroundMetric<S>, TransportError> {
    let size = kernel.level_size(upper);
    let rows: Vec<Vec<(usize, S)>> = (0..size)
        .map(|v| kernel.row(upper, v).iter().map(|(u, l)| (*u, lambda(l))).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|u| (u + 1..size).map(move |v| (u, v))).collect();
    let values: Vec<S> = pairs
        .par_iter()
        .map(|&(u, v)| {
            if rows[u] == rows[v] {
                return Ok(S::zero());
            }
            transport_sparse(&rows[u], &rows[v], |i, j| rho.get(i, j).clone()).map(|p| p.cost)
        })
        .collect::<Result<_, _>>()?;
    let mut d = vec![S::zero(); size * size];
    for ((u, v), x) in pairs.into_iter().zip(values) {
        d[u * size + v] = x.clone();
        d[v * size + u] = x;
    }
    GroundMetric::from_raw(size, d)
}

fn max_denominator_bits(m: &GroundMetric<Rational>) -> u64 {
    m.values().iter().map(denominator_bits).max().unwrap_or(0)
}

/// Iterates the Kantorovich extension from `initial` (a metric on level
/// `start`) up to level `up_to`.
pub fn iterate_metric(
    graph: &GradedGraph,
    kernel: &CotransitionKernel,
    initial: Distances,
    start: usize,
    up_to: usize,
    config: IterationConfig,
) -> Result<InternalMetricSequence, MetricError> {
    let depth = graph.depth().min(kernel.depth());
    if start > up_to || up_to > depth {
        return Err(MetricError::LevelOutOfRange { level: up_to, start, end: depth });
    }
    if initial.size() != graph.level_size(start) {
        return Err(MetricError::InitialSize {
            level: start,
            expected: graph.level_size(start),
            got: initial.size(),
        });
    }
    if let Some(v) = initial.violations(true).into_iter().next() {
        return Err(MetricError::InvalidInitial(v));
    }
    let describe = match &initial {
        Distances::Exact(m) if *m == GroundMetric::discrete(m.size()) => "discrete".to_string(),
        Distances::Float(m) if *m == GroundMetric::discrete(m.size()) => "discrete".to_string(),
        _ => "user".to_string(),
    };
    let mut provenance = Provenance {
        initial: describe,
        initial_level: start,
        requested_mode: config.mode,
        bit_cutoff: config.bit_cutoff,
        float_from_level: None,
    };
    let first = match (config.mode, initial) {
        (Arithmetic::Float, Distances::Exact(m)) => {
            provenance.float_from_level = Some(start);
            Distances::Float(m.map(Scalar::to_f64))
        }
        (Arithmetic::Float, d @ Distances::Float(_)) => {
            provenance.float_from_level = Some(start);
            d
        }
        (Arithmetic::Exact, d) => {
            if d.mode() == Arithmetic::Float {
                provenance.float_from_level = Some(start);
            }
            d
        }
    };
    let mut levels = vec![LevelMetric { level: start, distances: first }];
    for n in start..up_to {
        let current = &levels.last().expect("seeded").distances;
        let next = match current {
            Distances::Exact(rho) if max_denominator_bits(rho) <= config.bit_cutoff => {
                Distances::Exact(step(kernel, n + 1, rho, Rational::clone)?)
            }
            Distances::Exact(rho) => {
                provenance.float_from_level.get_or_insert(n + 1);
                let rho = rho.map(Scalar::to_f64);
                Distances::Float(step(kernel, n + 1, &rho, Scalar::to_f64)?)
            }
            Distances::Float(rho) => Distances::Float(step(kernel, n + 1, rho, Scalar::to_f64)?),
        };
        levels.push(LevelMetric { level: n + 1, distances: next });
    }
    Ok(InternalMetricSequence { levels, kernel: kernel.clone(), provenance })
}

/// Which distance to use between vertices of different levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CrossLevel {
    /// Minimum over chains `e = e_n, ..., e_m = f` of the summed one-step
    /// distances, each step being `rho_i(e_i, projection of e_{i+1})`.
    #[default]
    Chain,
    /// `rho_n(e, p_{m,n}(f))`: distance from `e` to the projection of `f`.
    /// Agrees with `Chain` for `m = n + 1` and never exceeds it.
    Projection,
}

/// Distance between vertex `e` at level `n` and vertex `f` at level `m > n`.
pub fn cross_level_distance(
    seq: &InternalMetricSequence,
    (n, e): (usize, usize),
    (m, f): (usize, usize),
    rule: CrossLevel,
) -> Result<Value, MetricError> {
    if n >= m {
        return Err(MetricError::LevelOrder { n, m });
    }
    seq.level(n)?;
    seq.level(m)?;
    for &(level, vertex) in &[(n, e), (m, f)] {
        if vertex >= seq.kernel.level_size(level) {
            return Err(MetricError::VertexOutOfRange { level, vertex });
        }
    }
    let all_exact = (n..=m).all(|l| seq.levels[l - seq.start()].mode() == Arithmetic::Exact);
    Ok(match (rule, all_exact) {
        (CrossLevel::Chain, true) => Value::Exact(chain_distance::<Rational>(seq, n, e, m, f)),
        (CrossLevel::Chain, false) => Value::Float(chain_distance::<f64>(seq, n, e, m, f)),
        (CrossLevel::Projection, _) => {
            let target = seq.level(n)?;
            let proj = seq.kernel.project_delta(m, f, n);
            if target.mode() == Arithmetic::Exact {
                Value::Exact(delta_cost::<Rational>(target, e, &proj))
            } else {
                Value::Float(delta_cost::<f64>(target, e, &proj))
            }
        }
    })
}

fn delta_cost<S: ReadMetric>(level: &LevelMetric, e: usize, dist: &[(usize, Rational)]) -> S {
    dist.iter().fold(S::zero(), |acc, (j, w)| acc + S::lambda(w) * S::read(level, e, *j))
}

/// Dynamic program over chains, level by level.
fn chain_distance<S: ReadMetric>(seq: &InternalMetricSequence, n: usize, e: usize, m: usize, f: usize) -> S {
    let mut best: Vec<Option<S>> = vec![None; seq.kernel.level_size(n)];
    best[e] = Some(S::zero());
    for l in n..m {
        let level = &seq.levels[l - seq.start()];
        let size = seq.kernel.level_size(l + 1);
        let targets: Vec<usize> = if l + 1 == m { vec![f] } else { (0..size).collect() };
        let mut next: Vec<Option<S>> = vec![None; size];
        for w in targets {
            let row = seq.kernel.row(l + 1, w);
            let mut candidate: Option<S> = None;
            for (u, acc) in best.iter().enumerate() {
                let Some(acc) = acc else { continue };
                let step = row
                    .iter()
                    .fold(S::zero(), |s, (j, lam)| s + S::lambda(lam) * S::read(level, u, *j));
                let total = acc.clone() + step;
                if candidate.as_ref().map_or(true, |c| &total < c) {
                    candidate = Some(total);
                }
            }
            next[w] = candidate;
        }
        best = next;
    }
    best[f].clone().expect("chain reaches the target")
}

/// Closest vertex to `dist` in the level metric: `min_g sum_j dist_j rho(g, j)`,
/// ties broken by the smallest index.
pub fn distance_to_vertices(
    dist: &LevelDistribution,
    metric: &LevelMetric,
) -> Result<(Value, usize), MetricError> {
    if dist.level() != metric.level || dist.len() != metric.size() {
        return Err(MetricError::LevelMismatch { expected: metric.level, got: dist.level() });
    }
    let support = dist.support();
    Ok(match metric.mode() {
        Arithmetic::Exact => {
            let (v, g) = argmin_vertex::<Rational>(metric, &support);
            (Value::Exact(v), g)
        }
        Arithmetic::Float => {
            let (v, g) = argmin_vertex::<f64>(metric, &support);
            (Value::Float(v), g)
        }
    })
}

fn argmin_vertex<S: ReadMetric>(metric: &LevelMetric, support: &[(usize, Rational)]) -> (S, usize) {
    let mut best: Option<(S, usize)> = None;
    for g in 0..metric.size() {
        let cost = delta_cost::<S>(metric, g, support);
        if best.as_ref().map_or(true, |(b, _)| cost < *b) {
            best = Some((cost, g));
        }
    }
    best.expect("nonempty level")
}

/// Per-level extreme ratios between two iterated metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRow {
    pub level: usize,
    /// `max rho_A / rho_B` over pairs with both distances positive.
    pub max_ratio_ab: f64,
    pub max_ratio_ba: f64,
    /// Pairs at zero distance in exactly one of the two metrics.
    pub one_sided_zeros: usize,
    pub within_bounds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Smallest `r` with `rho_A <= r rho_B` on the initial level.
    pub r: String,
    pub r_prime: String,
    pub rows: Vec<RatioRow>,
    pub holds: bool,
}

/// Iterates two initial metrics on the same level and checks that the
/// initial dominance constants `r` (A by B) and `r'` (B by A) bound the
/// ratios on every later level.
pub fn compare_initial_metrics(
    graph: &GradedGraph,
    kernel: &CotransitionKernel,
    rho_a: Distances,
    rho_b: Distances,
    start: usize,
    up_to: usize,
    config: IterationConfig,
) -> Result<ComparisonReport, MetricError> {
    if rho_a.size() != rho_b.size() || rho_a.mode() != rho_b.mode() {
        return Err(MetricError::IncompatibleInitials);
    }
    for d in [&rho_a, &rho_b] {
        if let Some(v) = d.degeneracy() {
            return Err(MetricError::Degenerate(v));
        }
    }
    let seq_a = iterate_metric(graph, kernel, rho_a, start, up_to, config)?;
    let seq_b = iterate_metric(graph, kernel, rho_b, start, up_to, config)?;
    let (r, r_prime) = match (&seq_a.levels[0].distances, &seq_b.levels[0].distances) {
        (Distances::Exact(a), Distances::Exact(b)) => {
            let (r, rp) = (max_ratio(a, b), max_ratio(b, a));
            (Value::Exact(r), Value::Exact(rp))
        }
        _ => {
            let (a, b) = (seq_a.levels[0].distances.to_float(), seq_b.levels[0].distances.to_float());
            (Value::Float(max_ratio(&a, &b)), Value::Float(max_ratio(&b, &a)))
        }
    };
    let mut rows = Vec::new();
    let mut holds = true;
    for (la, lb) in seq_a.levels.iter().zip(&seq_b.levels) {
        let row = match (&la.distances, &lb.distances, &r, &r_prime) {
            (Distances::Exact(a), Distances::Exact(b), Value::Exact(r), Value::Exact(rp)) => {
                ratio_row(la.level, a, b, r, rp)
            }
            _ => {
                let (a, b) = (la.distances.to_float(), lb.distances.to_float());
                let (r, rp) = (r.to_f64() * (1.0 + 1e-9), r_prime.to_f64() * (1.0 + 1e-9));
                ratio_row(la.level, &a, &b, &r, &rp)
            }
        };
        holds &= row.within_bounds;
        rows.push(row);
    }
    Ok(ComparisonReport { r: r.to_string(), r_prime: r_prime.to_string(), rows, holds })
}

fn max_ratio<S: Scalar>(a: &GroundMetric<S>, b: &GroundMetric<S>) -> S {
    let mut best = S::zero();
    for u in 0..a.size() {
        for v in u + 1..a.size() {
            if b.get(u, v).is_pos() {
                let q = a.get(u, v).clone() / b.get(u, v).clone();
                if q > best {
                    best = q;
                }
            }
        }
    }
    best
}

fn ratio_row<S: Scalar>(level: usize, a: &GroundMetric<S>, b: &GroundMetric<S>, r: &S, rp: &S) -> RatioRow {
    let mut one_sided_zeros = 0;
    let mut within = true;
    for u in 0..a.size() {
        for v in u + 1..a.size() {
            let (x, y) = (a.get(u, v), b.get(u, v));
            if x.is_pos() != y.is_pos() {
                one_sided_zeros += 1;
            }
            if x > &(r.clone() * y.clone()) || y > &(rp.clone() * x.clone()) {
                within = false;
            }
        }
    }
    RatioRow {
        level,
        max_ratio_ab: max_ratio(a, b).to_f64(),
        max_ratio_ba: max_ratio(b, a).to_f64(),
        one_sided_zeros,
        within_bounds: within && one_sided_zeros == 0,
    }
}
