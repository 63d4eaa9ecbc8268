//! Kantorovich-Rubinshtein dual: maximize `sum_x f(x) (mu - nu)(x)` over
//! potentials with `f(x) - f(y) <= rho(x, y)`.
//!
//! Solved with a dense tableau simplex (Bland's rule). The potential is
//! pinned to zero at the first support point; the remaining coordinates are
//! split into positive and negative parts. The origin is feasible because
//! distances are nonnegative, so no phase one is needed.

use super::{check_probability, GroundMetric, TransportError};
use crate::scalar::Scalar;

/// Dual optimum and an optimal 1-Lipschitz potential on all points of `rho`.
///
/// The LP runs on the union of the supports; the potential is extended to
/// the other points by `f(x) = min_s f(s) + rho(x, s)`, which keeps it
/// 1-Lipschitz without changing the objective.
pub fn dual_lipschitz<S: Scalar>(
    mu: &[S],
    nu: &[S],
    rho: &GroundMetric<S>,
) -> Result<(S, Vec<S>), TransportError> {
    check_probability(mu, rho.size(), "mu")?;
    check_probability(nu, rho.size(), "nu")?;
    let points: Vec<usize> = (0..rho.size()).filter(|&x| mu[x].is_pos() || nu[x].is_pos()).collect();
    let k = points.len();
    let weight: Vec<S> = points.iter().map(|&x| mu[x].clone() - nu[x].clone()).collect();

    let mut on_support = vec![S::zero(); k];
    let mut value = S::zero();
    if k > 1 {
        let free = k - 1;
        let structural = 2 * free;
        let pairs: Vec<(usize, usize)> =
            (0..k).flat_map(|s| (0..k).filter(move |&t| t != s).map(move |t| (s, t))).collect();
        let rows = pairs.len();
        let cols = structural + rows + 1;
        let rhs = cols - 1;
        let mut tab = vec![vec![S::zero(); cols]; rows + 1];
        // Column of coordinate t (t >= 1): positive part 2(t-1), negative part 2(t-1)+1.
        let put = |row: &mut Vec<S>, t: usize, coeff: S| {
            if t > 0 {
                row[2 * (t - 1)] = row[2 * (t - 1)].clone() + coeff.clone();
                row[2 * (t - 1) + 1] = row[2 * (t - 1) + 1].clone() - coeff;
            }
        };
        for (r, &(s, t)) in pairs.iter().enumerate() {
            put(&mut tab[r], s, S::one());
            put(&mut tab[r], t, -S::one());
            tab[r][structural + r] = S::one();
            tab[r][rhs] = rho.get(points[s], points[t]).clone();
        }
        // Objective row holds -c; the tableau is optimal when no entry is negative.
        for (t, w) in weight.iter().enumerate() {
            let obj = &mut tab[rows];
            put(obj, t, -w.clone());
        }
        let mut basis: Vec<usize> = (structural..structural + rows).collect();

        let max_pivots = 50_000 + 50 * rows * cols;
        let mut pivots = 0;
        loop {
            let Some(enter) = (0..rhs).find(|&c| tab[rows][c].is_neg()) else { break };
            let mut leave: Option<(usize, S)> = None;
            for r in 0..rows {
                if tab[r][enter].is_pos() {
                    let ratio = tab[r][rhs].clone() / tab[r][enter].clone();
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            let diff = ratio.clone() - best.clone();
                            diff.is_neg() || (diff.is_negligible() && basis[r] < basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            // Unbounded directions would need an infinite objective, impossible here.
            let (pr, _) = leave.ok_or(TransportError::NoConvergence)?;
            pivot(&mut tab, pr, enter);
            basis[pr] = enter;
            pivots += 1;
            if pivots > max_pivots {
                return Err(TransportError::NoConvergence);
            }
        }
        value = tab[rows][rhs].clone();
        let mut primal = vec![S::zero(); structural];
        for (r, &b) in basis.iter().enumerate() {
            if b < structural {
                primal[b] = tab[r][rhs].clone();
            }
        }
        for t in 1..k {
            on_support[t] = primal[2 * (t - 1)].clone() - primal[2 * (t - 1) + 1].clone();
        }
    }

    let potential = (0..rho.size())
        .map(|x| match points.iter().position(|&p| p == x) {
            Some(s) => on_support[s].clone(),
            None if k == 0 => S::zero(),
            None => points
                .iter()
                .enumerate()
                .map(|(s, &p)| on_support[s].clone() + rho.get(x, p).clone())
                .reduce(S::min_of)
                .expect("nonempty support"),
        })
        .collect();
    Ok((value, potential))
}

fn pivot<S: Scalar>(tab: &mut [Vec<S>], pr: usize, pc: usize) {
    let p = tab[pr][pc].clone();
    for x in tab[pr].iter_mut() {
        *x = x.clone() / p.clone();
    }
    let pivot_row = tab[pr].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r == pr {
            continue;
        }
        let factor = row[pc].clone();
        if factor.is_negligible() {
            continue;
        }
        for (x, y) in row.iter_mut().zip(&pivot_row) {
            if !y.is_negligible() {
                *x = x.clone() - factor.clone() * y.clone();
            }
        }
    }
}
