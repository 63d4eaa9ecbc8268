mod common;

use bratteli_core::families::{pascal, stationary, unordered_pairs, young, DEFAULT_MAX_LEVEL_SIZE};
use bratteli_core::graph::{dims, rarefy, GradedGraph};
use bratteli_core::kernel::{cotransitions, project, CotransitionKernel, LevelDistribution};
use bratteli_core::metric::{
    compare_initial_metrics, cross_level_distance, default_initial_level, iterate_metric, CrossLevel, Distances,
    InternalMetricSequence, IterationConfig,
};
use bratteli_core::scalar::{ratio, Arithmetic, Rational, Value};
use bratteli_core::transport::{kantorovich, GroundMetric};
use common::{random_graph, random_metric, random_probability};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(graph: &GradedGraph) -> CotransitionKernel {
    cotransitions(graph, &dims(graph, graph.depth()).unwrap(), None).unwrap()
}

fn discrete_seq(graph: &GradedGraph, start: usize, up_to: usize) -> InternalMetricSequence {
    let k = build(graph);
    let size = graph.level_size(start);
    iterate_metric(graph, &k, Distances::discrete(size, Arithmetic::Exact), start, up_to, IterationConfig::default())
        .unwrap()
}

fn exact(seq: &InternalMetricSequence, n: usize) -> &GroundMetric<Rational> {
    seq.level(n).unwrap().exact().expect("exact level")
}

#[test]
fn pascal_closed_form() {
    let g = pascal(2, 12).unwrap();
    let seq = discrete_seq(&g, 1, 12);
    for n in 1..=12 {
        let m = exact(&seq, n);
        for i in 0..=n {
            for j in 0..=n {
                assert_eq!(m.get(i, j), &ratio((i as i64 - j as i64).abs(), n as i64), "level {n} ({i},{j})");
            }
        }
    }
    assert_eq!(seq.provenance.float_from_level, None);
}

#[test]
fn iterated_levels_satisfy_metric_axioms() {
    let cases: Vec<(GradedGraph, usize)> = vec![
        (pascal(2, 12).unwrap(), 12),
        (young(10).unwrap(), 10),
        (unordered_pairs(4, 3, false, DEFAULT_MAX_LEVEL_SIZE).unwrap(), 3),
    ];
    for (g, depth) in cases {
        let start = default_initial_level(&g);
        let seq = discrete_seq(&g, start, depth);
        for level in &seq.levels {
            assert_eq!(level.mode(), Arithmetic::Exact);
            assert!(level.violations().is_empty(), "level {}: {:?}", level.level, level.violations());
        }
    }
}

#[test]
fn young_starts_at_level_two() {
    let g = young(5).unwrap();
    assert_eq!(default_initial_level(&g), 2);
    let seq = discrete_seq(&g, 2, 5);
    assert!(seq.level(5).unwrap().diameter().to_f64() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    /// Projecting two measures one level down never increases their distance.
    #[test]
    fn projection_is_contracting(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.gen_range(2..=8);
        let g = random_graph(&mut rng, depth, 6);
        let k = build(&g);
        let start = 1;
        let seq = iterate_metric(&g, &k, Distances::discrete(g.level_size(1), Arithmetic::Exact), start, depth,
            IterationConfig::default()).unwrap();
        let n = rng.gen_range(start + 1..=depth);
        let size = g.level_size(n);
        let mu = LevelDistribution::new(n, random_probability(&mut rng, size, size, 12)).unwrap();
        let nu = LevelDistribution::new(n, random_probability(&mut rng, size, size, 12)).unwrap();
        let upper = kantorovich(mu.probs(), nu.probs(), exact(&seq, n)).unwrap().0;
        let (pm, pn) = (project(&mu, &k).unwrap(), project(&nu, &k).unwrap());
        let lower = kantorovich(pm.probs(), pn.probs(), exact(&seq, n - 1)).unwrap().0;
        prop_assert!(lower <= upper);
    }

    /// `rho <= r rho'` implies the same for the Kantorovich extensions.
    #[test]
    fn dominance_passes_to_extensions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(2..=6);
        let a = random_metric(&mut rng, size, 8);
        let b = random_metric(&mut rng, size, 8);
        let mut r = ratio(0, 1);
        for i in 0..size {
            for j in i + 1..size {
                let q = a.get(i, j) / b.get(i, j);
                if q > r { r = q; }
            }
        }
        let mu = random_probability(&mut rng, size, 5, 16);
        let nu = random_probability(&mut rng, size, 5, 16);
        let ka = kantorovich(&mu, &nu, &a).unwrap().0;
        let kb = kantorovich(&mu, &nu, &b).unwrap().0;
        prop_assert!(ka <= &r * &kb);
    }

    /// Every level of a random graph's iteration is a pseudometric.
    #[test]
    fn random_graph_levels_are_pseudometrics(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.gen_range(1..=6);
        let g = random_graph(&mut rng, depth, 5);
        let seq = discrete_seq(&g, 1, depth);
        for level in &seq.levels {
            prop_assert!(level.violations().is_empty());
        }
    }
}

#[test]
fn dominance_survives_iteration_on_pascal() {
    let g = pascal(2, 8).unwrap();
    let k = build(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let a = Distances::Exact(random_metric(&mut rng, 3, 8));
        let b = Distances::Exact(random_metric(&mut rng, 3, 8));
        let report = compare_initial_metrics(&g, &k, a, b, 2, 8, IterationConfig::default()).unwrap();
        assert!(report.holds, "{report:?}");
        assert_eq!(report.rows.len(), 7);
    }
}

#[test]
fn rarefied_metric_is_dominated() {
    let g = pascal(2, 20).unwrap();
    let kept: Vec<usize> = (0..=20).step_by(2).collect();
    let r = rarefy(&g, &kept).unwrap();
    let original = discrete_seq(&g, 1, 20);
    let rk = build(&r);
    let initial = Distances::Exact(exact(&original, 2).clone());
    let thin = iterate_metric(&r, &rk, initial, 1, 10, IterationConfig::default()).unwrap();
    for k in 1..=10 {
        let (a, b) = (exact(&thin, k), exact(&original, 2 * k));
        for i in 0..a.size() {
            for j in 0..a.size() {
                assert!(a.get(i, j) <= b.get(i, j));
            }
        }
    }
}

#[test]
fn float_iteration_matches_exact() {
    let g = stationary(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], 10).unwrap();
    let k = build(&g);
    let ex = iterate_metric(&g, &k, Distances::discrete(3, Arithmetic::Exact), 1, 10, IterationConfig::default()).unwrap();
    let fl = iterate_metric(&g, &k, Distances::discrete(3, Arithmetic::Float), 1, 10, IterationConfig::float()).unwrap();
    for (a, b) in ex.levels.iter().zip(&fl.levels) {
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.get_f64(i, j) - b.get_f64(i, j)).abs() < 1e-12);
            }
        }
    }
    assert_eq!(fl.provenance.float_from_level, Some(1));
}

#[test]
fn projection_rule_never_exceeds_chain() {
    let g = pascal(2, 10).unwrap();
    let seq = discrete_seq(&g, 1, 10);
    for (n, e) in [(2usize, 1usize), (3, 0), (4, 2)] {
        for m in n + 1..=10 {
            for f in 0..=m {
                let chain = cross_level_distance(&seq, (n, e), (m, f), CrossLevel::Chain).unwrap();
                let proj = cross_level_distance(&seq, (n, e), (m, f), CrossLevel::Projection).unwrap();
                let (Value::Exact(c), Value::Exact(p)) = (&chain, &proj) else { panic!("exact levels") };
                assert!(p <= c);
                if m == n + 1 {
                    assert_eq!(p, c);
                }
            }
        }
    }
}
