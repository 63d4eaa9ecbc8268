//! Generators for the standard example graphs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GradedGraph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),
    #[error("level {level} would have {size} vertices, above the bound {bound}")]
    LevelTooLarge { level: usize, size: u128, bound: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Default bound on the number of vertices of a generated level.
pub const DEFAULT_MAX_LEVEL_SIZE: usize = 20_000;

/// A named family with its parameters; serialized into graph metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Pascal { d: usize, depth: usize },
    Young { depth: usize },
    UnorderedPairs { seed: usize, depth: usize, include_equal: bool },
    Chain { depth: usize },
    Stationary { matrix: Vec<Vec<u64>>, depth: usize },
}

impl FamilySpec {
    pub fn build(&self) -> Result<GradedGraph, FamilyError> {
        match self {
            FamilySpec::Pascal { d, depth } => pascal(*d, *depth),
            FamilySpec::Young { depth } => young(*depth),
            FamilySpec::UnorderedPairs { seed, depth, include_equal } => {
                unordered_pairs(*seed, *depth, *include_equal, DEFAULT_MAX_LEVEL_SIZE)
            }
            FamilySpec::Chain { depth } => chain(*depth),
            FamilySpec::Stationary { matrix, depth } => stationary(matrix, *depth),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            FamilySpec::Pascal { depth, .. }
            | FamilySpec::Young { depth }
            | FamilySpec::UnorderedPairs { depth, .. }
            | FamilySpec::Chain { depth }
            | FamilySpec::Stationary { depth, .. } => *depth,
        }
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("family spec serializes")
    }
}

fn check_depth(depth: usize) -> Result<(), FamilyError> {
    if depth == 0 {
        return Err(FamilyError::InvalidParameter("depth must be at least 1".into()));
    }
    Ok(())
}

fn tuple_label(parts: &[usize]) -> String {
    let inner: Vec<String> = parts.iter().map(usize::to_string).collect();
    format!("({})", inner.join(","))
}

/// Compositions of `n` into `d` nonnegative parts, lexicographically ascending.
fn compositions(n: usize, d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, d - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `Z_+^d` graded by coordinate sum, with a unit edge for each coordinate
/// increment. For `d = 2` the level-`n` vertex `(k, n - k)` has index `k`.
pub fn pascal(d: usize, depth: usize) -> Result<GradedGraph, FamilyError> {
    if d < 2 {
        return Err(FamilyError::InvalidParameter(format!("pascal dimension must be >= 2, got {d}")));
    }
    check_depth(depth)?;
    let levels: Vec<Vec<Vec<usize>>> = (0..=depth).map(|n| compositions(n, d)).collect();
    let mut edges = Vec::with_capacity(depth);
    for n in 1..=depth {
        let index: std::collections::HashMap<&[usize], usize> =
            levels[n - 1].iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
        let mut block = Vec::new();
        for (v, comp) in levels[n].iter().enumerate() {
            for coord in 0..d {
                if comp[coord] > 0 {
                    let mut pred = comp.clone();
                    pred[coord] -= 1;
                    block.push((index[pred.as_slice()], v, 1));
                }
            }
        }
        edges.push(block);
    }
    let labels = levels.iter().map(|l| l.iter().map(|c| tuple_label(c)).collect()).collect();
    Ok(GradedGraph::from_edges(labels, edges)?
        .with_distinct_predecessors(true)
        .with_metadata(FamilySpec::Pascal { d, depth }.metadata()))
}

/// Partitions of `n` in decreasing lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            rec(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// The Young graph: partitions of `n`, a unit edge for each added box.
///
/// Level 2 has two vertices, `(2)` and `(1,1)`, with the same single
/// predecessor, so the graph is not flagged distinct-predecessors and the
/// internal metric is usually started at level 2.
pub fn young(depth: usize) -> Result<GradedGraph, FamilyError> {
    check_depth(depth)?;
    let levels: Vec<Vec<Vec<usize>>> = (0..=depth).map(partitions).collect();
    let mut edges = Vec::with_capacity(depth);
    for n in 1..=depth {
        let index: std::collections::HashMap<&[usize], usize> =
            levels[n - 1].iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let mut block = Vec::new();
        for (v, shape) in levels[n].iter().enumerate() {
            for row in 0..shape.len() {
                // Removing a box from `row` keeps a partition iff the next row is shorter.
                if row + 1 < shape.len() && shape[row + 1] == shape[row] {
                    continue;
                }
                let mut pred = shape.clone();
                pred[row] -= 1;
                if pred[row] == 0 {
                    pred.pop();
                }
                block.push((index[pred.as_slice()], v, 1));
            }
        }
        edges.push(block);
    }
    let labels = levels.iter().map(|l| l.iter().map(|p| tuple_label(p)).collect()).collect();
    Ok(GradedGraph::from_edges(labels, edges)?.with_metadata(FamilySpec::Young { depth }.metadata()))
}

/// The graph of unordered pairs.
///
/// Level 1 has `seed` vertices under the root; each later level consists of
/// the unordered pairs `{a, b}` of the previous level (`a < b`, plus `a = b`
/// when `include_equal`), joined to `a` and `b` by unit edges, or to `a` by
/// a double edge for `{a, a}`.
pub fn unordered_pairs(
    seed: usize,
    depth: usize,
    include_equal: bool,
    max_level_size: usize,
) -> Result<GradedGraph, FamilyError> {
    if seed < 2 {
        return Err(FamilyError::InvalidParameter(format!("seed size must be >= 2, got {seed}")));
    }
    check_depth(depth)?;
    let mut size = seed as u128;
    for level in 2..=depth {
        size = if include_equal { size * (size + 1) / 2 } else { size * (size - 1) / 2 };
        if size > max_level_size as u128 {
            return Err(FamilyError::LevelTooLarge { level, size, bound: max_level_size });
        }
    }
    let mut labels = vec![vec!["root".to_string()], (0..seed).map(|i| format!("x{i}")).collect()];
    let mut edges = vec![(0..seed).map(|v| (0, v, 1)).collect::<Vec<_>>()];
    for _ in 2..=depth {
        let below = labels.last().expect("seeded").len();
        let mut names = Vec::new();
        let mut block = Vec::new();
        for a in 0..below {
            let start = if include_equal { a } else { a + 1 };
            for b in start..below {
                let v = names.len();
                names.push(format!("{{{a},{b}}}"));
                if a == b {
                    block.push((a, v, 2));
                } else {
                    block.push((a, v, 1));
                    block.push((b, v, 1));
                }
            }
        }
        labels.push(names);
        edges.push(block);
    }
    Ok(GradedGraph::from_edges(labels, edges)?
        .with_distinct_predecessors(true)
        .with_metadata(FamilySpec::UnorderedPairs { seed, depth, include_equal }.metadata()))
}

/// One vertex per level, unit edges.
pub fn chain(depth: usize) -> Result<GradedGraph, FamilyError> {
    check_depth(depth)?;
    let labels = (0..=depth).map(|n| vec![n.to_string()]).collect();
    let edges = (0..depth).map(|_| vec![(0, 0, 1)]).collect();
    Ok(GradedGraph::from_edges(labels, edges)?
        .with_distinct_predecessors(true)
        .with_metadata(FamilySpec::Chain { depth }.metadata()))
}

/// Every level shares the vertex set of the square matrix `matrix`, which
/// is used as `M_n` for `n >= 2`; the root joins every level-1 vertex.
pub fn stationary(matrix: &[Vec<u64>], depth: usize) -> Result<GradedGraph, FamilyError> {
    check_depth(depth)?;
    let w = matrix.len();
    if w == 0 || matrix.iter().any(|row| row.len() != w) {
        return Err(FamilyError::InvalidParameter("kernel matrix must be square and nonempty".into()));
    }
    for i in 0..w {
        if matrix[i].iter().all(|&m| m == 0) {
            return Err(FamilyError::InvalidParameter(format!("kernel matrix row {i} is zero")));
        }
        if matrix.iter().all(|row| row[i] == 0) {
            return Err(FamilyError::InvalidParameter(format!("kernel matrix column {i} is zero")));
        }
    }
    let mut labels = vec![vec!["root".to_string()]];
    labels.extend((1..=depth).map(|_| (0..w).map(|i| format!("s{i}")).collect::<Vec<_>>()));
    let mut edges = vec![(0..w).map(|v| (0, v, 1)).collect::<Vec<_>>()];
    let block: Vec<(usize, usize, u64)> = (0..w)
        .flat_map(|u| (0..w).map(move |v| (u, v)))
        .filter(|&(u, v)| matrix[u][v] > 0)
        .map(|(u, v)| (u, v, matrix[u][v]))
        .collect();
    edges.extend((2..=depth).map(|_| block.clone()));
    Ok(GradedGraph::from_edges(labels, edges)?.with_metadata(
        FamilySpec::Stationary { matrix: matrix.to_vec(), depth }.metadata(),
    ))
}
