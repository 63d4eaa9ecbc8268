//! Cotransition cocycles and the simplex projections they induce.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{DimTable, GradedGraph};
use crate::scalar::{fraction_string, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("cotransition row at level {level}, vertex {vertex} has wrong support")]
    WrongSupport { level: usize, vertex: usize },
    #[error("cotransition row at level {level}, vertex {vertex} sums to {sum}, not 1")]
    RowSum { level: usize, vertex: usize, sum: String },
    #[error("cotransition override has wrong shape at level {level}")]
    Shape { level: usize },
    #[error("distribution lives on level {got}, expected level {expected}")]
    LevelMismatch { expected: usize, got: usize },
    #[error("cannot project below level 0")]
    BelowRoot,
    #[error("distribution at level {level} is not a probability vector: {reason}")]
    NotProbability { level: usize, reason: String },
    #[error("dim table covers levels up to {dims}, graph depth is {graph}")]
    DimsMismatch { dims: usize, graph: usize },
}

/// Backward transition probabilities `Prob(x_{n-1} = u | x_n = v)`.
///
/// `rows[n][v]` holds `(u, lambda(u | v))` sorted by `u`, for `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CotransitionKernel {
    rows: Vec<Vec<Vec<(usize, Rational)>>>,
    sizes: Vec<usize>,
}

impl CotransitionKernel {
    pub fn row(&self, level: usize, vertex: usize) -> &[(usize, Rational)] {
        &self.rows[level][vertex]
    }

    pub fn depth(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.sizes[level]
    }

    /// Pushes a sparse distribution on `level` down to `level - 1`.
    pub fn project_sparse(&self, level: usize, dist: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
        let mut acc = vec![Rational::zero(); self.sizes[level - 1]];
        let mut touched = vec![false; self.sizes[level - 1]];
        for (v, w) in dist {
            for (u, l) in &self.rows[level][*v] {
                acc[*u] += w * l;
                touched[*u] = true;
            }
        }
        acc.into_iter()
            .enumerate()
            .filter(|(u, x)| touched[*u] && !x.is_zero())
            .collect()
    }

    /// `p_{from,to}(delta_vertex)` as a sparse vector on level `to`.
    pub fn project_delta(&self, from: usize, vertex: usize, to: usize) -> Vec<(usize, Rational)> {
        let mut dist = vec![(vertex, Rational::one())];
        for level in (to + 1..=from).rev() {
            dist = self.project_sparse(level, &dist);
        }
        dist
    }

    /// Rows as CSV with columns `level,vertex,predecessor,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,vertex,predecessor,value\n");
        for (n, level) in self.rows.iter().enumerate().skip(1) {
            for (v, row) in level.iter().enumerate() {
                for (u, l) in row {
                    out.push_str(&format!("{n},{v},{u},{}\n", fraction_string(l)));
                }
            }
        }
        out
    }
}

/// Builds the central cocycle `lambda(u | v) = m(u, v) dim(u) / dim(v)`, or
/// validates and adopts `override_rows` when supplied.
///
/// The override has the same layout as the kernel (`rows[n][v]`, with an
/// empty entry for level 0) and must match the adjacency support and sum to
/// one on every row.
pub fn cotransitions(
    graph: &GradedGraph,
    dims: &DimTable,
    override_rows: Option<Vec<Vec<Vec<(usize, Rational)>>>>,
) -> Result<CotransitionKernel, KernelError> {
    if dims.depth() != graph.depth() {
        return Err(KernelError::DimsMismatch { dims: dims.depth(), graph: graph.depth() });
    }
    let sizes = graph.level_sizes();
    if let Some(rows) = override_rows {
        if rows.len() != graph.depth() + 1 {
            return Err(KernelError::Shape { level: rows.len() });
        }
        for n in 1..=graph.depth() {
            if rows[n].len() != graph.level_size(n) {
                return Err(KernelError::Shape { level: n });
            }
            for (v, row) in rows[n].iter().enumerate() {
                let preds = graph.predecessors(n, v);
                let support_ok = row.len() == preds.len()
                    && row.iter().zip(preds).all(|((u, l), (p, _))| u == p && l > &Rational::zero());
                if !support_ok {
                    return Err(KernelError::WrongSupport { level: n, vertex: v });
                }
                let sum: Rational = row.iter().map(|(_, l)| l).sum();
                if !sum.is_one() {
                    return Err(KernelError::RowSum { level: n, vertex: v, sum: fraction_string(&sum) });
                }
            }
        }
        return Ok(CotransitionKernel { rows, sizes });
    }
    let mut rows = vec![Vec::new()];
    for n in 1..=graph.depth() {
        let level = (0..graph.level_size(n))
            .map(|v| {
                let total = BigInt::from(dims.get(n, v).clone());
                graph
                    .predecessors(n, v)
                    .iter()
                    .map(|&(u, m)| {
                        let weight = BigInt::from(dims.get(n - 1, u).clone()) * BigInt::from(m);
                        (u, Rational::new(weight, total.clone()))
                    })
                    .collect()
            })
            .collect();
        rows.push(level);
    }
    Ok(CotransitionKernel { rows, sizes })
}

/// An exact probability vector on the vertices of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelDistribution {
    level: usize,
    probs: Vec<Rational>,
}

impl LevelDistribution {
    /// Checks nonnegativity and that the entries sum to exactly one.
    pub fn new(level: usize, probs: Vec<Rational>) -> Result<Self, KernelError> {
        if probs.iter().any(|p| p < &Rational::zero()) {
            return Err(KernelError::NotProbability { level, reason: "negative entry".into() });
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(KernelError::NotProbability {
                level,
                reason: format!("entries sum to {}", fraction_string(&sum)),
            });
        }
        Ok(Self { level, probs })
    }

    pub fn delta(level: usize, size: usize, vertex: usize) -> Self {
        let mut probs = vec![Rational::zero(); size];
        probs[vertex] = Rational::one();
        Self { level, probs }
    }

    /// Distribution proportional to `dim` on a level.
    pub fn dim_proportional(dims: &DimTable, level: usize) -> Self {
        let total = BigInt::from(dims.total(level));
        let probs = dims
            .level(level)
            .iter()
            .map(|d| Rational::new(BigInt::from(d.clone()), total.clone()))
            .collect();
        Self { level, probs }
    }

    pub(crate) fn from_parts_unchecked(level: usize, probs: Vec<Rational>) -> Self {
        Self { level, probs }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> Vec<(usize, Rational)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (i, p.clone()))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(crate::scalar::ratio_to_f64).collect()
    }
}

/// `p_{n,n-1}`: `sum_v dist(v) lambda(. | v)` on level `n - 1`.
pub fn project(
    dist: &LevelDistribution,
    kernel: &CotransitionKernel,
) -> Result<LevelDistribution, KernelError> {
    let n = dist.level;
    if n == 0 {
        return Err(KernelError::BelowRoot);
    }
    if n > kernel.depth() || dist.len() != kernel.level_size(n) {
        return Err(KernelError::LevelMismatch { expected: kernel.depth().min(n), got: n });
    }
    let mut probs = vec![Rational::zero(); kernel.level_size(n - 1)];
    for (v, w) in dist.probs.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (u, l) in kernel.row(n, v) {
            probs[*u] += w * l;
        }
    }
    Ok(LevelDistribution { level: n - 1, probs })
}

/// Composition `p_{n,m}` of single-level projections down to `target`.
pub fn project_to(
    dist: &LevelDistribution,
    kernel: &CotransitionKernel,
    target: usize,
) -> Result<LevelDistribution, KernelError> {
    if target > dist.level {
        return Err(KernelError::LevelMismatch { expected: dist.level, got: target });
    }
    let mut current = dist.clone();
    while current.level > target {
        current = project(&current, kernel)?;
    }
    Ok(current)
}
