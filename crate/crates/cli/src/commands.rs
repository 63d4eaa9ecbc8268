use std::fs;
use std::path::Path;

use bratteli_core::compactness::{bounded_width_check, compactness_profile, CoverMethod};
use bratteli_core::families::{self, FamilySpec};
use bratteli_core::graph::{dims, rarefy, validate, GradedGraph};
use bratteli_core::kernel::{cotransitions, CotransitionKernel};
use bratteli_core::measure::{
    bernoulli, concentration_profile, extremality_check, martingale_profile, mixture, standardness_distance_profile,
    CentralMeasure, MartingaleVariant, MeasureFile,
};
use bratteli_core::metric::{
    default_initial_level, iterate_metric, Distances, InternalMetricSequence, IterationConfig, Radius,
};
use bratteli_core::scalar::{parse_fraction, ratio_to_f64, Arithmetic, Rational};
use bratteli_core::transport::GroundMetric;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;

/// Header shared by every JSON report. No timestamps, so reruns compare equal.
fn header(command: &str, config: &impl Serialize) -> Value {
    json!({
        "tool": "bratteli",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    })
}

fn write(out: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), contents)?;
    Ok(())
}

fn write_json(out: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write(out, name, &text)
}

fn default_depth(family: FamilyName) -> usize {
    match family {
        FamilyName::Pascal | FamilyName::Chain => 12,
        FamilyName::Young => 10,
        FamilyName::UnorderedPairs => 3,
        FamilyName::Stationary => 20,
    }
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<u64>>, CliError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| CliError::config(format!("bad matrix entry {x:?}"))))
                .collect()
        })
        .collect()
}

/// Builds or loads the graph and rejects it when validation fails.
pub fn load_graph(args: &GraphArgs) -> Result<GradedGraph, CliError> {
    let graph = match (&args.graph, args.family) {
        (Some(path), _) => {
            let graph = GradedGraph::from_json(&fs::read_to_string(path)?)?;
            match args.depth {
                Some(depth) if depth < graph.depth() => graph.truncate(depth)?,
                Some(depth) if depth > graph.depth() => {
                    return Err(CliError::config(format!("graph file has depth {}, asked for {depth}", graph.depth())))
                }
                _ => graph,
            }
        }
        (None, Some(family)) => {
            let depth = args.depth.unwrap_or_else(|| default_depth(family));
            match family {
                FamilyName::UnorderedPairs => {
                    families::unordered_pairs(args.seed_size, depth, args.include_equal, args.max_level_size)?
                }
                FamilyName::Stationary => {
                    let text = args.matrix.as_deref().ok_or_else(|| CliError::config("stationary needs --matrix"))?;
                    FamilySpec::Stationary { matrix: parse_matrix(text)?, depth }.build()?
                }
                FamilyName::Pascal => FamilySpec::Pascal { d: args.d, depth }.build()?,
                FamilyName::Young => FamilySpec::Young { depth }.build()?,
                FamilyName::Chain => FamilySpec::Chain { depth }.build()?,
            }
        }
        (None, None) => return Err(CliError::config("either --family or --graph is required")),
    };
    let report = validate(&graph);
    if !report.is_accepted() {
        return Err(CliError::validation(&report));
    }
    for w in &report.warnings {
        eprintln!("{}", json!({ "warning": w }));
    }
    Ok(graph)
}

fn kernel_of(graph: &GradedGraph) -> Result<CotransitionKernel, CliError> {
    let table = dims(graph, graph.depth())?;
    Ok(cotransitions(graph, &table, None)?)
}

fn read_initial(path: &Path, mode: Arithmetic) -> Result<Distances, CliError> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::config(format!("initial metric: {e}")))?;
    let rows = value
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::config("initial metric needs a \"matrix\" array"))?;
    let size = rows.len();
    let mut entries = Vec::with_capacity(size * size);
    for row in rows {
        let row = row.as_array().filter(|r| r.len() == size).ok_or_else(|| CliError::config("initial metric is not square"))?;
        for x in row {
            let text = match x {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(CliError::config(format!("bad metric entry {x}"))),
            };
            entries.push(parse_fraction(&text).ok_or_else(|| CliError::config(format!("bad metric entry {text:?}")))?);
        }
    }
    let exact = GroundMetric::new(size, entries)?;
    Ok(match mode {
        Arithmetic::Exact => Distances::Exact(exact),
        Arithmetic::Float => Distances::Float(exact.map(ratio_to_f64)),
    })
}

fn iteration(graph: &GradedGraph, args: &MetricArgs) -> Result<InternalMetricSequence, CliError> {
    let kernel = kernel_of(graph)?;
    let mode = match args.mode() {
        ModeChoice::Exact => Arithmetic::Exact,
        ModeChoice::Float => Arithmetic::Float,
    };
    let start = args.initial_level.unwrap_or_else(|| default_initial_level(graph));
    if start > graph.depth() {
        return Err(CliError::config(format!("initial level {start} exceeds depth {}", graph.depth())));
    }
    let initial = match &args.initial_metric {
        Some(path) => read_initial(path, mode)?,
        None => Distances::discrete(graph.level_size(start), mode),
    };
    let config = IterationConfig { mode, bit_cutoff: args.bit_cutoff };
    Ok(iterate_metric(graph, &kernel, initial, start, graph.depth(), config)?)
}

fn radii(texts: &[String]) -> Result<Vec<Radius>, CliError> {
    texts
        .iter()
        .map(|t| {
            Radius::parse(t)
                .filter(Radius::is_positive)
                .ok_or_else(|| CliError::config(format!("epsilon must be a positive number, got {t:?}")))
        })
        .collect()
}

fn fraction(text: &str) -> Result<Rational, CliError> {
    parse_fraction(text).ok_or_else(|| CliError::config(format!("bad number {text:?}")))
}

fn sequence_summary(seq: &InternalMetricSequence) -> Value {
    json!({
        "mode": seq.levels.last().map(|l| l.mode()),
        "horizon": seq.end(),
        "first_level": seq.start(),
        "provenance": seq.provenance,
    })
}

pub fn family(cmd: &FamilyCmd, out: &Path) -> Result<(), CliError> {
    let graph = load_graph(&cmd.graph)?;
    write(out, "graph.json", &(graph.to_json() + "\n"))
}

pub fn metric(cmd: &MetricCmd, out: &Path) -> Result<(), CliError> {
    let graph = load_graph(&cmd.graph)?;
    let seq = iteration(&graph, &cmd.metric)?;
    for level in &seq.levels {
        write(out, &format!("metric_level_{}.csv", level.level), &level.to_csv())?;
    }
    let levels: Vec<Value> = seq
        .levels
        .iter()
        .map(|l| {
            let mut dense = l.to_dense_json();
            dense["diameter"] = json!(l.diameter().to_f64());
            dense["axiom_violations"] = json!(l.violations().len());
            dense
        })
        .collect();
    let mut report = header("metric", cmd);
    report["sequence"] = sequence_summary(&seq);
    report["levels"] = json!(levels);
    write_json(out, "metric.json", &report)
}

pub fn compactness(cmd: &CompactnessCmd, out: &Path) -> Result<(), CliError> {
    let eps = radii(&cmd.eps)?;
    let graph = load_graph(&cmd.graph)?;
    let seq = iteration(&graph, &cmd.metric)?;
    let method = match cmd.method {
        MethodChoice::Greedy => CoverMethod::GreedySetCover,
        MethodChoice::FarthestPoint => CoverMethod::FarthestPoint,
        MethodChoice::Exhaustive => CoverMethod::Exhaustive,
    };
    let report = compactness_profile(&seq, &eps, None, method)?;
    let width = bounded_width_check(&graph, &seq);
    write(out, "covering.csv", &report.to_csv())?;
    write(out, "covering_plot.csv", &report.plot_csv())?;
    let mut json = header("compactness", cmd);
    json["sequence"] = sequence_summary(&seq);
    json["covering"] = serde_json::to_value(&report).expect("report serializes");
    json["width"] = serde_json::to_value(&width).expect("report serializes");
    write_json(out, "covering.json", &json)
}

fn build_measure(cmd: &MeasureCmd, graph: &GradedGraph, kernel: &CotransitionKernel) -> Result<CentralMeasure, CliError> {
    if let Some(path) = &cmd.measure {
        let file = MeasureFile::from_json(&fs::read_to_string(path)?)?;
        return Ok(file.into_measure(graph, kernel)?);
    }
    let ps: Vec<Rational> = cmd.bernoulli.iter().map(|p| fraction(p)).collect::<Result<_, _>>()?;
    let parts: Vec<CentralMeasure> =
        ps.iter().map(|p| bernoulli(graph, kernel, p, graph.depth())).collect::<Result<_, _>>()?;
    if parts.len() == 1 && cmd.weights.is_empty() {
        return Ok(parts.into_iter().next().expect("one part"));
    }
    let weights: Vec<Rational> = if cmd.weights.is_empty() {
        vec![Rational::new(1.into(), (parts.len() as u64).into()); parts.len()]
    } else {
        cmd.weights.iter().map(|w| fraction(w)).collect::<Result<_, _>>()?
    };
    Ok(mixture(&parts, &weights)?)
}

fn parse_pairs(cmd: &MeasureCmd, first: usize, depth: usize) -> Result<Vec<(usize, usize)>, CliError> {
    if cmd.pairs.is_empty() {
        let mut pairs: Vec<(usize, usize)> =
            [depth / 4, depth / 2, depth].into_iter().filter(|&m| m > first).map(|m| (first, m)).collect();
        pairs.dedup();
        return Ok(pairs);
    }
    cmd.pairs
        .iter()
        .map(|p| {
            let (n, m) = p.split_once(':').ok_or_else(|| CliError::config(format!("pair {p:?} is not n:m")))?;
            let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| CliError::config(format!("bad pair {p:?}")));
            Ok((parse(n)?, parse(m)?))
        })
        .collect()
}

pub fn measure(cmd: &MeasureCmd, out: &Path) -> Result<(), CliError> {
    let eps = radii(&cmd.eps)?;
    let graph = load_graph(&cmd.graph)?;
    let seq = iteration(&graph, &cmd.metric)?;
    let measure = build_measure(cmd, &graph, &seq.kernel)?;
    let pairs = parse_pairs(cmd, seq.start().max(measure.start()), seq.end().min(measure.end()))?;

    let extremality = extremality_check(&measure, &seq, &eps, &pairs)?;
    let standardness = standardness_distance_profile(&measure, &seq)?;
    let concentration = concentration_profile(&measure, &seq, &eps, &standardness.argmins)?;
    let variant = match cmd.martingale {
        VariantChoice::Pairwise => MartingaleVariant::Pairwise,
        VariantChoice::ToMarginal => MartingaleVariant::ToMarginal,
    };
    let martingale = martingale_profile(&measure, &seq, variant, cmd.sample_size, cmd.seed)?;

    write(out, "extremality.csv", &extremality.to_csv())?;
    write(out, "standardness.csv", &standardness.to_csv())?;
    write(out, "concentration.csv", &concentration.to_csv())?;
    write(out, "martingale.csv", &martingale.to_csv())?;

    let standard = standardness.tends_to_zero && concentration.concentrates;
    let mut report = header("measure", cmd);
    report["sequence"] = sequence_summary(&seq);
    report["measure_levels"] = json!([measure.start(), measure.end()]);
    report["pairs"] = json!(pairs);
    report["verdict"] = json!(format!(
        "{}; standardness evidence: {}",
        extremality.verdict,
        if standard { "yes" } else { "no" }
    ));
    report["extremality"] = json!({
        "consistent_with_extremality": extremality.consistent_with_extremality,
        "internal_consistent": extremality.internal_consistent,
        "tolerance": extremality.tolerance,
    });
    report["standardness"] = json!({
        "tends_to_zero": standardness.tends_to_zero,
        "final_distance": standardness.rows.last().map(|r| r.distance),
        "argmins": standardness.argmins,
    });
    report["concentration"] = json!({ "trends": concentration.trends, "concentrates": concentration.concentrates });
    report["martingale"] = json!({
        "variant": martingale.variant,
        "seed": martingale.seed,
        "sample_size": martingale.sample_size,
        "sampled_levels": martingale.rows.iter().filter(|r| r.sampled).count(),
        "tends_to_zero": martingale.tends_to_zero,
    });
    report["disclaimer"] = json!(
        "All verdicts are finite-horizon trend checks up to the stated horizon; they are evidence, not proofs."
    );
    write_json(out, "verdict.json", &report)
}

pub fn rarefy_cmd(cmd: &RarefyCmd, out: &Path) -> Result<(), CliError> {
    let graph = load_graph(&cmd.graph)?;
    let kept: Vec<usize> = match cmd.every {
        Some(0) => return Err(CliError::config("--every must be positive")),
        Some(k) => (0..=graph.depth()).step_by(k).collect(),
        None => cmd.keep.clone(),
    };
    if kept.iter().any(|&k| k > graph.depth()) {
        return Err(CliError::config(format!("kept level beyond depth {}", graph.depth())));
    }
    let rarefied = rarefy(&graph, &kept)?;
    write(out, "graph.json", &(rarefied.to_json() + "\n"))?;
    let mut report = header("rarefy", cmd);
    report["kept"] = json!(kept);
    report["level_sizes"] = json!(rarefied.level_sizes());
    write_json(out, "rarefy.json", &report)
}
