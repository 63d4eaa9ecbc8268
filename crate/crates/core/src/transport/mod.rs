//! Finite Kantorovich transportation problem.
//!
//! [`kantorovich`] solves the primal problem with a transportation simplex
//! (network simplex on the complete bipartite graph, Bland's pivoting rule).
//! [`dual_lipschitz`] solves the dual over 1-Lipschitz potentials with a
//! separate dense tableau simplex, and [`brute_force_oracle`] searches the
//! vertices of the transportation polytope exhaustively. The three routes
//! share no solver code so they can be checked against one another.

mod dual;
mod oracle;
mod simplex;

pub use dual::dual_lipschitz;
pub use oracle::{brute_force_oracle, DEFAULT_ORACLE_SUPPORT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{fraction_string, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("dimension mismatch: expected {expected} points, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{which} is not a probability vector: {reason}")]
    NotProbability { which: &'static str, reason: String },
    #[error("point index {index} out of range ({size} points)")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("instance too large for enumeration: support {support} exceeds bound {bound}")]
    TooLarge { support: usize, bound: usize },
    #[error("invalid ground metric: {0}")]
    InvalidMetric(MetricViolation),
    #[error("signed measure must have zero total mass")]
    NonzeroTotal,
    #[error("simplex iteration limit reached")]
    NoConvergence,
}

/// A failed metric axiom, with the offending points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    Negative { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
    Degenerate { i: usize, j: usize },
    Shape { len: usize },
}

impl std::fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricViolation::Negative { i, j } => write!(f, "negative distance at ({i}, {j})"),
            MetricViolation::NonzeroDiagonal { i } => write!(f, "nonzero diagonal at {i}"),
            MetricViolation::Asymmetric { i, j } => write!(f, "asymmetric at ({i}, {j})"),
            MetricViolation::Triangle { i, j, k } => {
                write!(f, "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
            MetricViolation::Degenerate { i, j } => write!(f, "zero distance between {i} and {j}"),
            MetricViolation::Shape { len } => write!(f, "{len} entries do not form a square matrix"),
        }
    }
}

/// Dense symmetric distance matrix on a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMetric<S> {
    size: usize,
    d: Vec<S>,
}

impl<S: Scalar> GroundMetric<S> {
    /// Validates zero diagonal, symmetry, nonnegativity and the triangle inequality.
    pub fn new(size: usize, row_major: Vec<S>) -> Result<Self, TransportError> {
        let metric = Self::from_raw(size, row_major)?;
        if let Some(v) = metric.violations(true).into_iter().next() {
            return Err(TransportError::InvalidMetric(v));
        }
        Ok(metric)
    }

    pub(crate) fn from_raw(size: usize, row_major: Vec<S>) -> Result<Self, TransportError> {
        if row_major.len() != size * size {
            return Err(TransportError::InvalidMetric(MetricViolation::Shape { len: row_major.len() }));
        }
        Ok(Self { size, d: row_major })
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut d = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                d.push(if i == j { S::zero() } else { f(i.min(j), i.max(j)) });
            }
        }
        Self { size, d }
    }

    /// All off-diagonal distances equal to one.
    pub fn discrete(size: usize) -> Self {
        Self::from_fn(size, |_, _| S::one())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.d[i * self.size + j]
    }

    pub fn values(&self) -> &[S] {
        &self.d
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> GroundMetric<T> {
        GroundMetric { size: self.size, d: self.d.iter().map(f).collect() }
    }

    pub fn diameter(&self) -> S {
        self.d.iter().fold(S::zero(), |acc, x| if x > &acc { x.clone() } else { acc })
    }

    /// Smallest off-diagonal distance, if any.
    pub fn min_off_diagonal(&self) -> Option<S> {
        let mut best: Option<S> = None;
        for i in 0..self.size {
            for j in i + 1..self.size {
                let x = self.get(i, j);
                if best.as_ref().map_or(true, |b| x < b) {
                    best = Some(x.clone());
                }
            }
        }
        best
    }

    /// Every metric-axiom violation; with `stop_early` only the first.
    ///
    /// Checks all triples, so the cost is cubic in the number of points.
    pub fn violations(&self, stop_early: bool) -> Vec<MetricViolation> {
        let n = self.size;
        let mut out = Vec::new();
        macro_rules! push {
            ($v:expr) => {{
                out.push($v);
                if stop_early {
                    return out;
                }
            }};
        }
        for i in 0..n {
            if !self.get(i, i).is_negligible() {
                push!(MetricViolation::NonzeroDiagonal { i });
            }
            for j in 0..n {
                if self.get(i, j).is_neg() {
                    push!(MetricViolation::Negative { i, j });
                }
                if j > i && !(self.get(i, j).clone() - self.get(j, i).clone()).is_negligible() {
                    push!(MetricViolation::Asymmetric { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = self.get(i, j).clone() + self.get(j, k).clone();
                    if (self.get(i, k).clone() - via).is_pos() {
                        push!(MetricViolation::Triangle { i, j, k });
                    }
                }
            }
        }
        out
    }

    /// First pair of distinct points at zero distance.
    pub fn degeneracy(&self) -> Option<MetricViolation> {
        for i in 0..self.size {
            for j in i + 1..self.size {
                if !self.get(i, j).is_pos() {
                    return Some(MetricViolation::Degenerate { i, j });
                }
            }
        }
        None
    }
}

/// An optimal coupling, listed as `(i, j, mass)` for positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S> {
    pub entries: Vec<(usize, usize, S)>,
    pub cost: S,
}

impl<S: Scalar> TransportPlan<S> {
    pub fn row_marginal(&self, size: usize) -> Vec<S> {
        let mut out = vec![S::zero(); size];
        for (i, _, m) in &self.entries {
            out[*i] = out[*i].clone() + m.clone();
        }
        out
    }

    pub fn column_marginal(&self, size: usize) -> Vec<S> {
        let mut out = vec![S::zero(); size];
        for (_, j, m) in &self.entries {
            out[*j] = out[*j].clone() + m.clone();
        }
        out
    }
}

impl TransportPlan<Rational> {
    /// CSV triples `i,j,mass` with exact fraction strings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,mass\n");
        for (i, j, m) in &self.entries {
            out.push_str(&format!("{i},{j},{}\n", fraction_string(m)));
        }
        out
    }
}

pub(crate) fn check_probability<S: Scalar>(
    v: &[S],
    size: usize,
    which: &'static str,
) -> Result<(), TransportError> {
    if v.len() != size {
        return Err(TransportError::DimensionMismatch { expected: size, got: v.len() });
    }
    if v.iter().any(Scalar::is_neg) {
        return Err(TransportError::NotProbability { which, reason: "negative entry".into() });
    }
    let total = v.iter().cloned().fold(S::zero(), |a, b| a + b);
    let gap = (total.clone() - S::one()).abs_val();
    let ok = match S::MODE {
        crate::scalar::Arithmetic::Exact => gap.is_negligible(),
        crate::scalar::Arithmetic::Float => gap.to_f64() <= 1e-9,
    };
    if !ok {
        return Err(TransportError::NotProbability {
            which,
            reason: format!("total mass {:?}", total.to_f64()),
        });
    }
    Ok(())
}

pub(crate) fn support<S: Scalar>(v: &[S]) -> Vec<(usize, S)> {
    v.iter().enumerate().filter(|(_, x)| x.is_pos()).map(|(i, x)| (i, x.clone())).collect()
}

/// Optimal transport between two sparse measures given as `(point, mass)`.
///
/// Zero-mass points must already be removed. The cost closure is indexed by
/// the original point ids.
pub(crate) fn transport_sparse<S: Scalar>(
    src: &[(usize, S)],
    dst: &[(usize, S)],
    cost: impl Fn(usize, usize) -> S,
) -> Result<TransportPlan<S>, TransportError> {
    if src.len() == 1 || dst.len() == 1 {
        let mut entries = Vec::with_capacity(src.len() * dst.len());
        let mut total = S::zero();
        for (i, a) in src {
            for (j, b) in dst {
                let m = if src.len() == 1 { b.clone() } else { a.clone() };
                total = total + m.clone() * cost(*i, *j);
                entries.push((*i, *j, m));
            }
        }
        return Ok(TransportPlan { entries, cost: total });
    }
    let supply: Vec<S> = src.iter().map(|(_, a)| a.clone()).collect();
    let demand: Vec<S> = dst.iter().map(|(_, b)| b.clone()).collect();
    let mut c = Vec::with_capacity(src.len() * dst.len());
    for (i, _) in src {
        for (j, _) in dst {
            c.push(cost(*i, *j));
        }
    }
    let solved = simplex::solve(&supply, &demand, &c)?;
    let entries = solved
        .flows
        .into_iter()
        .map(|(a, b, m)| (src[a].0, dst[b].0, m))
        .collect();
    Ok(TransportPlan { entries, cost: solved.cost })
}

/// Kantorovich distance between `mu` and `nu` with ground metric `rho`, and
/// one optimal plan.
///
/// Inputs must be probability vectors over the points of `rho`; zero-mass
/// points are dropped before solving. The pivoting order is fixed, so the
/// returned plan is deterministic.
pub fn kantorovich<S: Scalar>(
    mu: &[S],
    nu: &[S],
    rho: &GroundMetric<S>,
) -> Result<(S, TransportPlan<S>), TransportError> {
    check_probability(mu, rho.size(), "mu")?;
    check_probability(nu, rho.size(), "nu")?;
    let plan = transport_sparse(&support(mu), &support(nu), |i, j| rho.get(i, j).clone())?;
    Ok((plan.cost.clone(), plan))
}

/// `sum_j mu_j rho(vertex, j)`: the only coupling with a point mass.
pub fn kantorovich_to_delta<S: Scalar>(
    mu: &[S],
    vertex: usize,
    rho: &GroundMetric<S>,
) -> Result<S, TransportError> {
    check_probability(mu, rho.size(), "mu")?;
    if vertex >= rho.size() {
        return Err(TransportError::IndexOutOfRange { index: vertex, size: rho.size() });
    }
    Ok(mu
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_pos())
        .fold(S::zero(), |acc, (j, m)| acc + m.clone() * rho.get(vertex, j).clone()))
}

/// Kantorovich-Rubinshtein norm of a zero-total signed vector: the total
/// positive mass times the distance between the normalized positive and
/// negative parts.
pub fn kr_norm<S: Scalar>(diff: &[S], rho: &GroundMetric<S>) -> Result<S, TransportError> {
    if diff.len() != rho.size() {
        return Err(TransportError::DimensionMismatch { expected: rho.size(), got: diff.len() });
    }
    let total = diff.iter().cloned().fold(S::zero(), |a, b| a + b);
    if !total.is_negligible() {
        return Err(TransportError::NonzeroTotal);
    }
    let mass = diff.iter().filter(|x| x.is_pos()).cloned().fold(S::zero(), |a, b| a + b);
    if !mass.is_pos() {
        return Ok(S::zero());
    }
    let pos: Vec<(usize, S)> = diff
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_pos())
        .map(|(i, x)| (i, x.clone() / mass.clone()))
        .collect();
    let neg: Vec<(usize, S)> = diff
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_neg())
        .map(|(i, x)| (i, -(x.clone()) / mass.clone()))
        .collect();
    let plan = transport_sparse(&pos, &neg, |i, j| rho.get(i, j).clone())?;
    Ok(mass * plan.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn q(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(p, d)| ratio(p, d)).collect()
    }

    #[test]
    fn deltas_recover_ground_distance() {
        let rho = GroundMetric::new(3, q(&[(0, 1), (2, 1), (3, 1), (2, 1), (0, 1), (1, 1), (3, 1), (1, 1), (0, 1)])).unwrap();
        let a = q(&[(1, 1), (0, 1), (0, 1)]);
        let c = q(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(kantorovich(&a, &c, &rho).unwrap().0, ratio(3, 1));
        assert_eq!(kantorovich(&a, &a, &rho).unwrap().0, ratio(0, 1));
    }

    #[test]
    fn discrete_metric_half_shift() {
        let rho = GroundMetric::<Rational>::discrete(3);
        let mu = q(&[(1, 2), (1, 2), (0, 1)]);
        let nu = q(&[(0, 1), (1, 2), (1, 2)]);
        let (d, plan) = kantorovich(&mu, &nu, &rho).unwrap();
        assert_eq!(d, ratio(1, 2));
        assert_eq!(plan.row_marginal(3), mu);
        assert_eq!(plan.column_marginal(3), nu);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho = GroundMetric::<Rational>::discrete(2);
        let bad = q(&[(1, 2), (1, 3)]);
        let ok = q(&[(1, 2), (1, 2)]);
        assert!(matches!(kantorovich(&bad, &ok, &rho), Err(TransportError::NotProbability { .. })));
        assert!(matches!(
            kantorovich(&q(&[(1, 1)]), &ok, &rho),
            Err(TransportError::DimensionMismatch { .. })
        ));
        assert!(matches!(kantorovich_to_delta(&ok, 5, &rho), Err(TransportError::IndexOutOfRange { .. })));
    }

    #[test]
    fn metric_validation_finds_triangle_failure() {
        let bad = GroundMetric::new(3, q(&[(0, 1), (1, 1), (5, 1), (1, 1), (0, 1), (1, 1), (5, 1), (1, 1), (0, 1)]));
        assert!(matches!(bad, Err(TransportError::InvalidMetric(MetricViolation::Triangle { .. }))));
        let asym = GroundMetric::new(2, q(&[(0, 1), (1, 1), (2, 1), (0, 1)]));
        assert!(matches!(asym, Err(TransportError::InvalidMetric(MetricViolation::Asymmetric { .. }))));
    }

    #[test]
    fn delta_target_closed_form() {
        let rho = GroundMetric::<Rational>::discrete(2);
        let mu = q(&[(1, 2), (1, 2)]);
        assert_eq!(kantorovich_to_delta(&mu, 0, &rho).unwrap(), ratio(1, 2));
        assert_eq!(kantorovich_to_delta(&q(&[(0, 1), (1, 1)]), 1, &rho).unwrap(), ratio(0, 1));
    }

    #[test]
    fn norm_of_root_difference_is_ground_distance() {
        let rho = GroundMetric::from_fn(3, |i, j| ratio((j - i) as i64, 3));
        let diff = q(&[(1, 1), (0, 1), (-1, 1)]);
        assert_eq!(kr_norm(&diff, &rho).unwrap(), ratio(2, 3));
        let scaled = q(&[(2, 1), (0, 1), (-2, 1)]);
        assert_eq!(kr_norm(&scaled, &rho).unwrap(), ratio(4, 3));
        assert_eq!(kr_norm(&q(&[(1, 1), (0, 1), (0, 1)]), &rho), Err(TransportError::NonzeroTotal));
    }

    #[test]
    fn float_mode_matches_exact() {
        let rho_q = GroundMetric::from_fn(4, |i, j| ratio((j - i) as i64, 4));
        let rho_f = rho_q.map(|x| x.to_f64());
        let mu = q(&[(1, 8), (3, 8), (1, 4), (1, 4)]);
        let nu = q(&[(1, 2), (0, 1), (1, 6), (1, 3)]);
        let exact = kantorovich(&mu, &nu, &rho_q).unwrap().0;
        let mu_f: Vec<f64> = mu.iter().map(Scalar::to_f64).collect();
        let nu_f: Vec<f64> = nu.iter().map(Scalar::to_f64).collect();
        let approx = kantorovich(&mu_f, &nu_f, &rho_f).unwrap().0;
        assert!((approx - exact.to_f64()).abs() < 1e-9);
    }
}
