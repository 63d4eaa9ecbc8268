mod common;

use bratteli_core::families::{chain, pascal, stationary, unordered_pairs, young, FamilyError, FamilySpec, DEFAULT_MAX_LEVEL_SIZE};
use bratteli_core::graph::{dims, rarefy, validate, GradedGraph};
use common::{count_tableaux, enumerate_paths, hook_length, multinomial, parse_tuple};
use num_bigint::BigUint;

#[test]
fn pascal_dims_are_multinomials() {
    for d in [2, 3] {
        let depth = if d == 2 { 12 } else { 8 };
        let g = pascal(d, depth).unwrap();
        let table = dims(&g, depth).unwrap();
        for n in 0..=depth {
            for v in 0..g.level_size(n) {
                let parts = if n == 0 { vec![0; d] } else { parse_tuple(g.label(n, v)) };
                assert_eq!(table.get(n, v), &multinomial(&parts), "level {n} vertex {v}");
            }
        }
    }
}

#[test]
fn young_dims_match_hook_lengths_and_tableau_counts() {
    let g = young(10).unwrap();
    let table = dims(&g, 10).unwrap();
    for n in 1..=10 {
        for v in 0..g.level_size(n) {
            let shape = parse_tuple(g.label(n, v));
            assert_eq!(table.get(n, v), &hook_length(&shape));
            if n <= 7 {
                assert_eq!(table.get(n, v), &BigUint::from(count_tableaux(&shape)));
            }
        }
    }
    let partition_counts = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
    assert_eq!(g.level_sizes(), partition_counts);
}

#[test]
fn dims_match_path_enumeration() {
    let g = stationary(&[vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 1]], 6).unwrap();
    let table = dims(&g, 6).unwrap();
    for n in 0..=6 {
        for v in 0..g.level_size(n) {
            assert_eq!(table.get(n, v), &enumerate_paths(&g, n, v));
        }
    }
}

#[test]
fn unordered_pair_recurrences() {
    let distinct = |k: u128| k * (k - 1) / 2;
    let with_equal = |k: u128| k * (k + 1) / 2;
    for (seed, include_equal, depth) in [(4, false, 4), (3, false, 6), (2, true, 4), (5, false, 3)] {
        let g = unordered_pairs(seed, depth, include_equal, DEFAULT_MAX_LEVEL_SIZE).unwrap();
        let mut expected = seed as u128;
        for n in 1..=depth {
            assert_eq!(g.level_size(n) as u128, expected);
            expected = if include_equal { with_equal(expected) } else { distinct(expected) };
        }
    }
    assert!(matches!(unordered_pairs(4, 5, false, 1000), Err(FamilyError::LevelTooLarge { level: 5, .. })));
}

#[test]
fn every_family_validates() {
    let graphs = [
        pascal(2, 10).unwrap(),
        pascal(3, 6).unwrap(),
        young(12).unwrap(),
        unordered_pairs(4, 4, false, DEFAULT_MAX_LEVEL_SIZE).unwrap(),
        unordered_pairs(3, 4, true, DEFAULT_MAX_LEVEL_SIZE).unwrap(),
        chain(7).unwrap(),
        stationary(&[vec![1, 1], vec![1, 1]], 6).unwrap(),
        stationary(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], 6).unwrap(),
    ];
    for g in &graphs {
        let report = validate(g);
        assert!(report.is_accepted(), "{:?}", report.violations);
    }
}

#[test]
fn specs_round_trip_through_json() {
    let spec = FamilySpec::UnorderedPairs { seed: 4, depth: 3, include_equal: false };
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"family\":\"unordered-pairs\""));
    let back: FamilySpec = serde_json::from_str(&text).unwrap();
    let g = back.build().unwrap();
    let reread = GradedGraph::from_json(&g.to_json()).unwrap();
    assert_eq!(reread.level_sizes(), g.level_sizes());
    assert_eq!(reread.edges(3), g.edges(3));
    assert_eq!(reread.metadata(), g.metadata());
}

#[test]
fn rarefied_pascal_keeps_dims() {
    let g = pascal(2, 20).unwrap();
    let kept: Vec<usize> = (0..=20).step_by(2).collect();
    let r = rarefy(&g, &kept).unwrap();
    let (full, thin) = (dims(&g, 20).unwrap(), dims(&r, 10).unwrap());
    for (k, &n) in kept.iter().enumerate() {
        assert_eq!(thin.level(k), full.level(n));
    }
    assert!(validate(&r).is_accepted());
}
