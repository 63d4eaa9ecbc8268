//! Graded graphs (Bratteli diagrams) truncated at a finite depth.
//!
//! Level 0 holds the single root. Between consecutive levels the graph keeps,
//! for every vertex, the sorted list of its predecessors with their integer
//! edge multiplicities, i.e. the nonzero entries of the corresponding column
//! of the adjacency matrix `M_n` (rows indexed by level `n - 1`, columns by
//! level `n`). Vertices are identified by `(level, index)`; labels are
//! decorative.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("level {level} out of range (graph depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("vertex {vertex} out of range at level {level} ({size} vertices)")]
    VertexOutOfRange { level: usize, vertex: usize, size: usize },
    #[error("duplicate edge ({from}, {to}) in block {level}")]
    DuplicateEdge { level: usize, from: usize, to: usize },
    #[error("graph has {levels} vertex levels but {blocks} edge blocks (expected {expected})")]
    ShapeMismatch { levels: usize, blocks: usize, expected: usize },
    #[error("kept levels must be nonempty, strictly increasing and start at 0")]
    BadKeptLevels,
    #[error("edge multiplicity overflow while composing levels {from}..{to}")]
    MultiplicityOverflow { from: usize, to: usize },
    #[error("malformed graph file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedGraph {
    labels: Vec<Vec<String>>,
    /// `preds[n][v]` lists `(u, m(u, v))` for level `n >= 1`; `preds[0]` is empty.
    preds: Vec<Vec<Vec<(usize, u64)>>>,
    /// Declares that no two vertices of one level share a predecessor column.
    distinct_predecessors: bool,
    metadata: Option<serde_json::Value>,
}

impl GradedGraph {
    /// Builds a graph from per-level labels and per-block edge lists.
    ///
    /// `edges[n - 1]` describes `M_n` as `(from, to, mult)` triples. Zero
    /// multiplicities are dropped; duplicates are rejected. Structural
    /// invariants (single root, no zero rows/columns) are left to
    /// [`validate`] so that invalid graphs can still be reported on.
    pub fn from_edges(
        labels: Vec<Vec<String>>,
        edges: Vec<Vec<(usize, usize, u64)>>,
    ) -> Result<Self, GraphError> {
        let depth = labels.len().saturating_sub(1);
        if labels.is_empty() || edges.len() != depth {
            return Err(GraphError::ShapeMismatch {
                levels: labels.len(),
                blocks: edges.len(),
                expected: depth,
            });
        }
        let mut preds = vec![Vec::new()];
        for (block, list) in edges.into_iter().enumerate() {
            let n = block + 1;
            let below = labels[n - 1].len();
            let here = labels[n].len();
            let mut cols: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); here];
            for (from, to, mult) in list {
                if from >= below {
                    return Err(GraphError::VertexOutOfRange { level: n - 1, vertex: from, size: below });
                }
                if to >= here {
                    return Err(GraphError::VertexOutOfRange { level: n, vertex: to, size: here });
                }
                if cols[to].insert(from, mult).is_some() {
                    return Err(GraphError::DuplicateEdge { level: n, from, to });
                }
            }
            preds.push(
                cols.into_iter()
                    .map(|c| c.into_iter().filter(|&(_, m)| m > 0).collect())
                    .collect(),
            );
        }
        Ok(Self { labels, preds, distinct_predecessors: false, metadata: None })
    }

    pub fn with_distinct_predecessors(mut self, flag: bool) -> Self {
        self.distinct_predecessors = flag;
        self
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn distinct_predecessors(&self) -> bool {
        self.distinct_predecessors
    }

    pub fn metadata(&self) -> Option<&serde_json::Value> {
        self.metadata.as_ref()
    }

    /// Index of the deepest level.
    pub fn depth(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.labels[level].len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn label(&self, level: usize, vertex: usize) -> &str {
        &self.labels[level][vertex]
    }

    pub fn labels(&self, level: usize) -> &[String] {
        &self.labels[level]
    }

    /// Predecessors of `vertex` at `level` (which must be `>= 1`) with multiplicities.
    pub fn predecessors(&self, level: usize, vertex: usize) -> &[(usize, u64)] {
        &self.preds[level][vertex]
    }

    pub fn check_level(&self, level: usize) -> Result<(), GraphError> {
        if level > self.depth() {
            Err(GraphError::LevelOutOfRange { level, depth: self.depth() })
        } else {
            Ok(())
        }
    }

    /// Successor lists `(v, m(u, v))` of every vertex at `level`, sorted by `v`.
    pub fn successors(&self, level: usize) -> Vec<Vec<(usize, u64)>> {
        let mut out = vec![Vec::new(); self.level_size(level)];
        if level < self.depth() {
            for (v, col) in self.preds[level + 1].iter().enumerate() {
                for &(u, m) in col {
                    out[u].push((v, m));
                }
            }
        }
        out
    }

    /// Edge list of block `M_level` as `(from, to, mult)`, ordered by `(to, from)`.
    pub fn edges(&self, level: usize) -> Vec<(usize, usize, u64)> {
        self.preds[level]
            .iter()
            .enumerate()
            .flat_map(|(v, col)| col.iter().map(move |&(u, m)| (u, v, m)))
            .collect()
    }

    /// Truncates the graph to levels `0..=depth`.
    pub fn truncate(&self, depth: usize) -> Result<Self, GraphError> {
        self.check_level(depth)?;
        Ok(Self {
            labels: self.labels[..=depth].to_vec(),
            preds: self.preds[..=depth].to_vec(),
            distinct_predecessors: self.distinct_predecessors,
            metadata: self.metadata.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RootCount { count: usize },
    EmptyLevel { level: usize },
    /// A level-`(level - 1)` vertex with no outgoing edge (zero row of `M_level`).
    ZeroRow { level: usize, vertex: usize },
    /// A level-`level` vertex with no incoming edge (zero column of `M_level`).
    ZeroColumn { level: usize, vertex: usize },
    /// Two level-`level` vertices with identical predecessor columns.
    IdenticalColumns { level: usize, first: usize, second: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Identical-column findings on graphs not flagged distinct-predecessors.
    pub warnings: Vec<Violation>,
    /// Which matrix orientation the duplicate check inspected.
    pub duplicate_check_orientation: String,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the structural invariants of a graded graph.
///
/// The duplicate-vertex check compares columns of `M_n` (the predecessor
/// multisets of level-`n` vertices) for `n >= 2`. Level 1 is exempt: all of
/// its vertices hang off the root, and the initial metric is imposed there
/// rather than induced. Duplicates are violations on graphs flagged
/// distinct-predecessors and warnings otherwise.
pub fn validate(graph: &GradedGraph) -> ValidationReport {
    let mut report = ValidationReport {
        duplicate_check_orientation: "columns of M_n (predecessor multisets of level-n vertices)".into(),
        ..Default::default()
    };
    if graph.labels[0].len() != 1 {
        report.violations.push(Violation::RootCount { count: graph.labels[0].len() });
    }
    for n in 1..=graph.depth() {
        if graph.level_size(n) == 0 {
            report.violations.push(Violation::EmptyLevel { level: n });
            continue;
        }
        let mut has_out = vec![false; graph.level_size(n - 1)];
        for (v, col) in graph.preds[n].iter().enumerate() {
            if col.is_empty() {
                report.violations.push(Violation::ZeroColumn { level: n, vertex: v });
            }
            for &(u, _) in col {
                has_out[u] = true;
            }
        }
        for (u, ok) in has_out.into_iter().enumerate() {
            if !ok {
                report.violations.push(Violation::ZeroRow { level: n, vertex: u });
            }
        }
        if n == 1 {
            continue;
        }
        let mut seen: HashMap<&[(usize, u64)], usize> = HashMap::new();
        for (v, col) in graph.preds[n].iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            if let Some(&first) = seen.get(col.as_slice()) {
                let finding = Violation::IdenticalColumns { level: n, first, second: v };
                if graph.distinct_predecessors {
                    report.violations.push(finding);
                } else {
                    report.warnings.push(finding);
                }
            } else {
                seen.insert(col.as_slice(), v);
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Path counting

/// Number of multiplicity-weighted root-to-vertex paths, per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimTable {
    dims: Vec<Vec<BigUint>>,
}

impl DimTable {
    pub fn get(&self, level: usize, vertex: usize) -> &BigUint {
        &self.dims[level][vertex]
    }

    pub fn level(&self, level: usize) -> &[BigUint] {
        &self.dims[level]
    }

    pub fn depth(&self) -> usize {
        self.dims.len() - 1
    }

    /// Sum of dims over a level, i.e. the number of paths of that length.
    pub fn total(&self, level: usize) -> BigUint {
        self.dims[level].iter().sum()
    }
}

/// Evaluates `dim(v) = sum_u m(u, v) dim(u)` bottom-up to `up_to` inclusive.
pub fn dims(graph: &GradedGraph, up_to: usize) -> Result<DimTable, GraphError> {
    graph.check_level(up_to)?;
    let mut dims: Vec<Vec<BigUint>> = vec![vec![BigUint::one(); graph.level_size(0)]];
    for n in 1..=up_to {
        let prev = &dims[n - 1];
        let level: Vec<BigUint> = graph.preds[n]
            .iter()
            .map(|col| {
                col.iter().fold(BigUint::zero(), |acc, &(u, m)| acc + &prev[u] * BigUint::from(m))
            })
            .collect();
        dims.push(level);
    }
    Ok(DimTable { dims })
}

// ---------------------------------------------------------------------------
// Rarefaction

/// Keeps only the listed levels, composing the skipped adjacency matrices.
///
/// The new multiplicity between kept levels `a < b` is the entry of
/// `M_{a+1} ... M_b`, so path counts to kept vertices are unchanged.
pub fn rarefy(graph: &GradedGraph, kept: &[usize]) -> Result<GradedGraph, GraphError> {
    if kept.first() != Some(&0) || kept.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GraphError::BadKeptLevels);
    }
    if let Some(&last) = kept.last() {
        graph.check_level(last)?;
    }
    let mut labels = vec![graph.labels[0].clone()];
    let mut preds = vec![Vec::new()];
    for w in kept.windows(2) {
        let (from, to) = (w[0], w[1]);
        // composed[v] maps a level-`from` vertex to the path multiplicity into v.
        let mut composed: Vec<BTreeMap<usize, u64>> = (0..graph.level_size(from))
            .map(|u| BTreeMap::from([(u, 1u64)]))
            .collect();
        for n in from + 1..=to {
            let mut next = Vec::with_capacity(graph.level_size(n));
            for col in &graph.preds[n] {
                let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
                for &(u, m) in col {
                    for (&origin, &count) in &composed[u] {
                        let add = count
                            .checked_mul(m)
                            .ok_or(GraphError::MultiplicityOverflow { from, to })?;
                        let slot = acc.entry(origin).or_insert(0);
                        *slot = slot
                            .checked_add(add)
                            .ok_or(GraphError::MultiplicityOverflow { from, to })?;
                    }
                }
                next.push(acc);
            }
            composed = next;
        }
        labels.push(graph.labels[to].clone());
        preds.push(composed.into_iter().map(|c| c.into_iter().collect()).collect());
    }
    Ok(GradedGraph {
        labels,
        preds,
        distinct_predecessors: false,
        metadata: Some(serde_json::json!({ "rarefied_from": graph.metadata, "kept_levels": kept })),
    })
}

// ---------------------------------------------------------------------------
// JSON file format

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub mult: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub levels: Vec<Vec<String>>,
    pub edges: Vec<Vec<EdgeRecord>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub distinct_predecessors: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl GraphFile {
    pub fn from_graph(graph: &GradedGraph) -> Self {
        let edges = (1..=graph.depth())
            .map(|n| {
                let mut list: Vec<EdgeRecord> = graph
                    .edges(n)
                    .into_iter()
                    .map(|(from, to, mult)| EdgeRecord { from, to, mult })
                    .collect();
                list.sort_by_key(|e| (e.from, e.to));
                list
            })
            .collect();
        Self {
            levels: graph.labels.clone(),
            edges,
            distinct_predecessors: graph.distinct_predecessors,
            metadata: graph.metadata.clone(),
        }
    }

    pub fn into_graph(self) -> Result<GradedGraph, GraphError> {
        let edges = self
            .edges
            .into_iter()
            .map(|block| block.into_iter().map(|e| (e.from, e.to, e.mult)).collect())
            .collect();
        let mut graph = GradedGraph::from_edges(self.levels, edges)?
            .with_distinct_predecessors(self.distinct_predecessors);
        graph.metadata = self.metadata;
        Ok(graph)
    }
}

impl GradedGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from_graph(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        file.into_graph()
    }
}
