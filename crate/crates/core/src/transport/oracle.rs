//! Exhaustive oracle for small transportation problems.
//!
//! Every vertex of the transportation polytope has a tree (or forest)
//! support, and a tree always has a leaf cell whose mass is the full
//! remaining margin of its row or column, i.e. `min(a_i, b_j)`. Repeatedly
//! choosing a cell, assigning `min(a_i, b_j)` and retiring the exhausted
//! line therefore reaches every vertex. The search below tries every cell at
//! every step, memoized on the residual margins.

use std::collections::HashMap;

use num_traits::Zero;

use super::{check_probability, GroundMetric, TransportError};
use crate::scalar::Rational;

/// Largest support size (per side) the oracle accepts by default.
pub const DEFAULT_ORACLE_SUPPORT: usize = 5;

/// Minimum transport cost over all basic feasible plans, in exact arithmetic.
pub fn brute_force_oracle(
    mu: &[Rational],
    nu: &[Rational],
    rho: &GroundMetric<Rational>,
    max_support: usize,
) -> Result<Rational, TransportError> {
    check_probability(mu, rho.size(), "mu")?;
    check_probability(nu, rho.size(), "nu")?;
    let src: Vec<usize> = (0..mu.len()).filter(|&i| !mu[i].is_zero()).collect();
    let dst: Vec<usize> = (0..nu.len()).filter(|&j| !nu[j].is_zero()).collect();
    let support = src.len().max(dst.len());
    if support > max_support {
        return Err(TransportError::TooLarge { support, bound: max_support });
    }
    let cost: Vec<Vec<Rational>> =
        src.iter().map(|&i| dst.iter().map(|&j| rho.get(i, j).clone()).collect()).collect();
    let a: Vec<Rational> = src.iter().map(|&i| mu[i].clone()).collect();
    let b: Vec<Rational> = dst.iter().map(|&j| nu[j].clone()).collect();
    let mut memo = HashMap::new();
    Ok(search(a, b, &cost, &mut memo))
}

type State = (Vec<Rational>, Vec<Rational>);

fn search(
    a: Vec<Rational>,
    b: Vec<Rational>,
    cost: &[Vec<Rational>],
    memo: &mut HashMap<State, Rational>,
) -> Rational {
    if a.iter().all(Zero::is_zero) {
        return Rational::zero();
    }
    let key = (a, b);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let (a, b) = (&key.0, &key.1);
    let mut best: Option<Rational> = None;
    for i in (0..a.len()).filter(|&i| !a[i].is_zero()) {
        for j in (0..b.len()).filter(|&j| !b[j].is_zero()) {
            let q = a[i].clone().min(b[j].clone());
            let mut na = a.clone();
            let mut nb = b.clone();
            na[i] -= &q;
            nb[j] -= &q;
            let total = &q * &cost[i][j] + search(na, nb, cost, memo);
            if best.as_ref().map_or(true, |x| &total < x) {
                best = Some(total);
            }
        }
    }
    let best = best.expect("nonzero supply implies nonzero demand");
    memo.insert(key, best.clone());
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn two_by_two_takes_cheaper_structure() {
        let rho = GroundMetric::from_fn(4, |i, j| ratio((j - i) as i64, 1));
        // mu on {0, 3}, nu on {1, 2}: direct plan 0->1, 3->2 costs 1/2 + 1/2.
        let mu = vec![ratio(1, 2), ratio(0, 1), ratio(0, 1), ratio(1, 2)];
        let nu = vec![ratio(0, 1), ratio(1, 2), ratio(1, 2), ratio(0, 1)];
        assert_eq!(brute_force_oracle(&mu, &nu, &rho, 5).unwrap(), ratio(1, 1));
    }

    #[test]
    fn discrete_three_point_value() {
        let rho = GroundMetric::<Rational>::discrete(3);
        let mu = vec![ratio(1, 2), ratio(1, 2), ratio(0, 1)];
        let nu = vec![ratio(0, 1), ratio(1, 2), ratio(1, 2)];
        assert_eq!(brute_force_oracle(&mu, &nu, &rho, 5).unwrap(), ratio(1, 2));
    }

    #[test]
    fn refuses_large_supports() {
        let rho = GroundMetric::<Rational>::discrete(6);
        let mu = vec![ratio(1, 6); 6];
        assert_eq!(
            brute_force_oracle(&mu, &mu, &rho, 5),
            Err(TransportError::TooLarge { support: 6, bound: 5 })
        );
    }
}
