//! Transportation simplex on the complete bipartite graph.
//!
//! The basis is a spanning tree of `m + n - 1` cells, started from the
//! northwest-corner rule. Entering cells are taken in row-major order among
//! negative reduced costs and leaving cells by smallest row-major index among
//! ratio-test ties (Bland), which rules out cycling on degenerate instances.

use super::TransportError;
use crate::scalar::Scalar;

pub(crate) struct Solved<S> {
    pub cost: S,
    pub flows: Vec<(usize, usize, S)>,
}

pub(crate) fn solve<S: Scalar>(supply: &[S], demand: &[S], cost: &[S]) -> Result<Solved<S>, TransportError> {
    let m = supply.len();
    let n = demand.len();
    debug_assert_eq!(cost.len(), m * n);
    let mut flow = vec![S::zero(); m * n];
    let mut basic = vec![false; m * n];

    // Northwest corner.
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let mut q = S::min_of(a[i].clone(), b[j].clone());
        if q.is_neg() {
            q = S::zero();
        }
        a[i] = a[i].clone() - q.clone();
        b[j] = b[j].clone() - q.clone();
        flow[i * n + j] = q;
        basic[i * n + j] = true;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || !a[i].is_pos() {
            i += 1;
        } else {
            j += 1;
        }
    }

    let max_pivots = 10_000 + 100 * m * n;
    let mut u = vec![S::zero(); m];
    let mut v = vec![S::zero(); n];
    for _ in 0..max_pivots {
        potentials(&basic, cost, m, n, &mut u, &mut v);
        let entering = (0..m * n).find(|&cell| {
            !basic[cell] && (cost[cell].clone() - u[cell / n].clone() - v[cell % n].clone()).is_neg()
        });
        let Some(entering) = entering else {
            let mut total = S::zero();
            let mut flows = Vec::new();
            for cell in 0..m * n {
                if basic[cell] && flow[cell].is_pos() {
                    total = total + flow[cell].clone() * cost[cell].clone();
                    flows.push((cell / n, cell % n, flow[cell].clone()));
                }
            }
            return Ok(Solved { cost: total, flows });
        };
        let path = tree_path(&basic, m, n, entering / n, entering % n);
        // path[k] alternates -, +, -, ... starting from the cell in the entering row.
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = minus
            .iter()
            .map(|&c| flow[c].clone())
            .reduce(S::min_of)
            .expect("cycle has at least one decreasing cell");
        let leaving = *minus
            .iter()
            .filter(|&&c| (flow[c].clone() - theta.clone()).is_negligible())
            .min()
            .expect("ratio test attains its minimum");
        for (k, &c) in path.iter().enumerate() {
            flow[c] = if k % 2 == 0 {
                flow[c].clone() - theta.clone()
            } else {
                flow[c].clone() + theta.clone()
            };
        }
        flow[entering] = theta;
        flow[leaving] = S::zero();
        basic[leaving] = false;
        basic[entering] = true;
    }
    Err(TransportError::NoConvergence)
}

/// Dual potentials with `u[0] = 0` and `u_i + v_j = c_ij` on basic cells.
fn potentials<S: Scalar>(basic: &[bool], cost: &[S], m: usize, n: usize, u: &mut [S], v: &mut [S]) {
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    row_done[0] = true;
    u[0] = S::zero();
    // Nodes: rows 0..m, columns m..m+n.
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        if node < m {
            let i = node;
            for j in 0..n {
                if basic[i * n + j] && !col_done[j] {
                    v[j] = cost[i * n + j].clone() - u[i].clone();
                    col_done[j] = true;
                    stack.push(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i * n + j] && !row_done[i] {
                    u[i] = cost[i * n + j].clone() - v[j].clone();
                    row_done[i] = true;
                    stack.push(i);
                }
            }
        }
    }
}

/// Basic cells on the tree path from row `start_row` to column `end_col`,
/// ordered from the row end.
fn tree_path(basic: &[bool], m: usize, n: usize, start_row: usize, end_col: usize) -> Vec<usize> {
    let total = m + n;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
    let mut seen = vec![false; total];
    seen[start_row] = true;
    let mut queue = std::collections::VecDeque::from([start_row]);
    let target = m + end_col;
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        if node < m {
            for j in 0..n {
                let cell = node * n + j;
                if basic[cell] && !seen[m + j] {
                    seen[m + j] = true;
                    parent[m + j] = Some((node, cell));
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                let cell = i * n + j;
                if basic[cell] && !seen[i] {
                    seen[i] = true;
                    parent[i] = Some((node, cell));
                    queue.push_back(i);
                }
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = target;
    while node != start_row {
        let (prev, cell) = parent[node].expect("basis is a spanning tree");
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn degenerate_square_instance() {
        // Equal marginals force degenerate northwest-corner bases.
        let s = vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)];
        let cost: Vec<Rational> = (0..9).map(|c| ratio(if c / 3 == c % 3 { 5 } else { (c as i64) % 4 }, 1)).collect();
        let out = solve(&s, &s, &cost).unwrap();
        let mut rows = vec![ratio(0, 1); 3];
        let mut cols = vec![ratio(0, 1); 3];
        for (i, j, f) in &out.flows {
            rows[*i] += f;
            cols[*j] += f;
        }
        assert_eq!(rows, s);
        assert_eq!(cols, s);
    }

    #[test]
    fn prefers_cheaper_crossing() {
        let s = vec![1.0, 1.0];
        let cost = vec![3.0, 1.0, 1.0, 3.0];
        let out = solve(&s, &s, &cost).unwrap();
        assert!((out.cost - 2.0).abs() < 1e-12);
    }
}
