use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use gecgraph::alpha::{
    alpha_estimate, alpha_from_sentences_exact, AlphaOptions, AlphaReport, Neighborhood, DEFAULT_ENUMERATION_BUDGET,
    DEFAULT_EPS_TARGET,
};
use gecgraph::gec::{gec_score, PatternMix, ScoreOptions};
use gecgraph::recovery::{
    find_orienting_loop, recover_b, LoopMode, LoopOptions, RecoveredB, Recovery, RecoveryOptions,
};
use gecgraph::rng::substream;
use gecgraph::{Circle, GeoGraph};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{echo, ConfigFile};
use crate::{emit, envelope, load_graph, required, with, CliError, CliResult};

// ---------------------------------------------------------------- alpha

#[derive(Args, Debug, Serialize)]
pub struct AlphaArgs {
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Witness-set sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Snap radius δ (default: smallest meeting --eps-target).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps_target: Option<f64>,
    /// Witness sets per size.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_neighborhood)]
    neighborhood: Option<Neighborhood>,
    /// Also compute the exact α from φ_{m,n} for n up to this bound.
    #[arg(long, value_name = "N")]
    sentences: Option<usize>,
    #[arg(long)]
    budget: Option<f64>,
    /// Per-size estimates as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_neighborhood(s: &str) -> Result<Neighborhood, String> {
    serde_json::from_value(Value::String(s.replace('-', "_")))
        .map_err(|_| format!("expected edges, recovered_ball or coordinate_ball, got `{s}`"))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaConfig {
    graph: Option<PathBuf>,
    sizes: Vec<usize>,
    delta: Option<f64>,
    eps_target: f64,
    repeats: usize,
    seed: u64,
    neighborhood: Neighborhood,
    sentences: Option<usize>,
    budget: f64,
    csv: Option<PathBuf>,
    output: Option<PathBuf>,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            graph: None,
            sizes: vec![200, 500],
            delta: None,
            eps_target: DEFAULT_EPS_TARGET,
            repeats: 1,
            seed: 1,
            neighborhood: Neighborhood::Edges,
            sentences: None,
            budget: DEFAULT_ENUMERATION_BUDGET,
            csv: None,
            output: None,
        }
    }
}

#[derive(Serialize)]
struct SizeRow {
    size: usize,
    /// Smallest upper bound over the witness sets of this size.
    upper: f64,
    /// Running estimate over this and all earlier sizes.
    estimate: f64,
}

fn size_rows(sizes: &[usize], report: &AlphaReport) -> Vec<SizeRow> {
    let mut running = f64::INFINITY;
    let mut rows = Vec::new();
    for &size in sizes {
        let upper = report
            .uppers
            .iter()
            .filter(|u| u.size == size)
            .map(|u| u.upper)
            .fold(f64::INFINITY, f64::min);
        if upper.is_finite() {
            running = running.min(upper);
            rows.push(SizeRow { size, upper, estimate: running });
        }
    }
    rows
}

pub fn alpha(file: &ConfigFile, args: AlphaArgs) -> CliResult {
    let cfg: AlphaConfig = file.resolve("alpha", &args)?;
    let path = required(&cfg.graph, "graph")?;
    if cfg.sizes.is_empty() {
        return Err(CliError::Usage("sizes must not be empty".into()));
    }
    let (g, graph_config) = load_graph(&path)?;
    let report = if g.has_coordinates() {
        let opts = AlphaOptions {
            sizes: cfg.sizes.clone(),
            delta: cfg.delta,
            eps_target: cfg.eps_target,
            repeats: cfg.repeats,
            seed: cfg.seed,
            neighborhood: cfg.neighborhood,
        };
        Some(alpha_estimate(&g, &opts)?)
    } else if cfg.sentences.is_none() {
        return Err(CliError::Run(
            "graph has no coordinates; witness sets need them (use --sentences for the adjacency-only α)".into(),
        ));
    } else {
        None
    };
    let sentences = match cfg.sentences {
        Some(max_n) => {
            let (m, n) = alpha_from_sentences_exact(&g, max_n, cfg.budget)?;
            json!({ "max_n": max_n, "m": m, "n": n, "alpha": m as f64 / n as f64 })
        }
        None => Value::Null,
    };
    if let (Some(path), Some(r)) = (&cfg.csv, &report) {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Run(e.to_string()))?;
        for row in size_rows(&cfg.sizes, r) {
            w.serialize(row).map_err(|e| CliError::Run(e.to_string()))?;
        }
        w.flush()?;
    }
    let out = with(
        envelope("alpha", echo(&cfg)),
        json!({
            "graph_config": graph_config,
            "n": g.n(),
            "report": report,
            "target": report.as_ref().and_then(|r| r.theoretical),
            "sentences": sentences,
        }),
    );
    emit(cfg.output.as_deref(), &serde_json::to_string(&out)?)
}

// ---------------------------------------------------------------- recover

#[derive(Args, Debug, Serialize)]
pub struct RecoverArgs {
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// ground_truth (needs coordinates) or adjacency_search.
    #[arg(long = "loop", value_parser = parse_loop_mode)]
    #[serde(rename = "loop")]
    loop_mode: Option<LoopMode>,
    /// First loop vertex.
    #[arg(long)]
    start: Option<usize>,
    /// Tolerated fraction of partition defects for the loop.
    #[arg(long)]
    loop_slack: Option<f64>,
    #[arg(long)]
    branching: Option<usize>,
    /// Exceptions tolerated by the loop intervals.
    #[arg(long)]
    loop_interval_slack: Option<usize>,
    /// Literal quantifiers (no exception slack, single F-base witness).
    #[arg(long)]
    literal: bool,
    /// Random triples checked for the circular order.
    #[arg(long)]
    triples: Option<usize>,
    /// Vertices translated by +1.
    #[arg(long)]
    translates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_loop_mode(s: &str) -> Result<LoopMode, String> {
    serde_json::from_value(Value::String(s.replace('-', "_")))
        .map_err(|_| format!("expected ground_truth or adjacency_search, got `{s}`"))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverConfig {
    graph: Option<PathBuf>,
    #[serde(rename = "loop")]
    loop_mode: LoopMode,
    start: usize,
    loop_slack: f64,
    branching: usize,
    loop_interval_slack: usize,
    literal: bool,
    triples: usize,
    translates: usize,
    seed: u64,
    output: Option<PathBuf>,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        let l = LoopOptions::default();
        RecoverConfig {
            graph: None,
            loop_mode: LoopMode::AdjacencySearch,
            start: l.start,
            loop_slack: l.slack,
            branching: l.branching,
            loop_interval_slack: 2,
            literal: false,
            triples: 2000,
            translates: 200,
            seed: 1,
            output: None,
        }
    }
}

/// Recovered B against the coordinate relation d < 1, over unordered pairs.
fn b_agreement(b: &RecoveredB, truth: &RecoveredB) -> Value {
    let n = b.n();
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for u in 0..n {
        for v in u + 1..n {
            match (b.holds(u, v), truth.holds(u, v)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    let total = (tp + fp + fn_ + tn).max(1);
    json!({
        "true_positive": tp, "false_positive": fp,
        "false_negative": fn_, "true_negative": tn,
        "agreement": (tp + tn) as f64 / total as f64,
    })
}

fn quantiles(mut xs: Vec<f64>) -> Value {
    if xs.is_empty() {
        return Value::Null;
    }
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[((xs.len() - 1) as f64 * p).round() as usize];
    json!({ "p50": q(0.5), "p90": q(0.9), "p99": q(0.99), "max": q(1.0) })
}

pub fn recover(file: &ConfigFile, args: RecoverArgs) -> CliResult {
    let cfg: RecoverConfig = file.resolve("recover", &args)?;
    let (g, graph_config) = load_graph(&required(&cfg.graph, "graph")?)?;
    if g.n() < 3 {
        return Err(CliError::Run("recovery needs at least 3 vertices".into()));
    }
    let b = recover_b(&g);
    let circle: Option<(Circle, Vec<f64>)> = g.geometry().ok().and_then(|(space, pts)| {
        space.as_circle().map(|c| (*c, pts.iter().map(|p| p.0[0]).collect()))
    });
    let b_stats = json!({
        "pairs": (0..b.n()).map(|v| b.row(v).count()).sum::<usize>() / 2,
        "edges": g.edge_count(),
        "edges_in_b": g.edges().iter().filter(|&&(u, v)| b.holds(u, v)).count(),
        "vs_coordinates": match RecoveredB::from_coordinates(&g) {
            Ok(truth) => b_agreement(&b, &truth),
            Err(_) => Value::Null,
        },
    });
    let lopts = LoopOptions {
        start: cfg.start,
        slack: cfg.loop_slack,
        branching: cfg.branching,
        interval_slack: cfg.loop_interval_slack,
    };
    let mut lp = find_orienting_loop(&g, Some(&b), cfg.loop_mode, &lopts)?;
    let mut reoriented = false;
    if circle.is_some() && !lp.agrees_with(&g)? {
        lp = lp.reversed();
        reoriented = true;
    }
    let ropts = if cfg.literal { RecoveryOptions::literal() } else { RecoveryOptions::sampled() };
    let rec = Recovery::with_options(&b, lp.clone(), &ropts)?;

    let n = g.n();
    let mut rng = substream(cfg.seed, 0x7265);
    let triples: Vec<(usize, usize, usize)> = std::iter::repeat_with(|| {
        (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))
    })
    .filter(|&(x, y, z)| x != y && y != z && x != z)
    .take(cfg.triples)
    .collect();
    let orders: Vec<bool> = triples
        .par_iter()
        .map(|&(x, y, z)| rec.recover_order(x, y, z))
        .collect::<Result<_, _>>()?;
    let order = match &circle {
        Some((_, xs)) => {
            let agree = triples
                .iter()
                .zip(&orders)
                .filter(|(&(x, y, z), &o)| o == Circle::order_residues(xs[x], xs[y], xs[z]))
                .count();
            json!({ "triples": triples.len(), "agreement": agree as f64 / triples.len().max(1) as f64 })
        }
        None => json!({ "triples": triples.len(), "true": orders.iter().filter(|&&o| o).count() }),
    };

    let sources: Vec<usize> = (0..cfg.translates).map(|_| rng.random_range(0..n)).collect();
    let translated: Vec<Option<(usize, bool)>> = sources
        .par_iter()
        .map(|&x| rec.recover_translate(x, 1).map(|t| t.map(|t| (t.vertex, t.approximate))))
        .collect::<Result<_, _>>()?;
    let found = translated.iter().flatten().count();
    let approximate = translated.iter().flatten().filter(|t| t.1).count();
    let errors = match &circle {
        Some((c, xs)) => quantiles(
            sources
                .iter()
                .zip(&translated)
                .filter_map(|(&x, t)| t.map(|(y, _)| c.residue_distance(xs[y], xs[x] + 1.0)))
                .collect(),
        ),
        None => Value::Null,
    };

    let out = with(
        envelope("recover", echo(&cfg)),
        json!({
            "graph_config": graph_config,
            "n": n,
            "b": b_stats,
            "loop": { "found": true, "n_l": lp.n_l(), "reoriented": reoriented, "loop": lp },
            "positions": rec.position_report(),
            "order": order,
            "translate": {
                "shift": 1, "attempted": sources.len(), "found": found,
                "approximate": approximate, "error_quantiles": errors,
            },
        }),
    );
    emit(cfg.output.as_deref(), &serde_json::to_string(&out)?)
}

// ---------------------------------------------------------------- gec

#[derive(Args, Debug, Serialize)]
pub struct GecArgs {
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Largest |A ∪ B| per probe.
    #[arg(long)]
    max_pattern: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// mixed, adjacent_only or non_adjacent_only.
    #[arg(long, value_parser = parse_mix)]
    mix: Option<PatternMix>,
    #[arg(long)]
    max_redraws: Option<usize>,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_mix(s: &str) -> Result<PatternMix, String> {
    serde_json::from_value(Value::String(s.replace('-', "_")))
        .map_err(|_| format!("expected mixed, adjacent_only or non_adjacent_only, got `{s}`"))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GecConfig {
    graph: Option<PathBuf>,
    trials: usize,
    max_pattern: usize,
    epsilon: f64,
    seed: u64,
    mix: PatternMix,
    max_redraws: usize,
    output: Option<PathBuf>,
}

impl Default for GecConfig {
    fn default() -> Self {
        let s = ScoreOptions::new(200, 3, 0.1, 1);
        GecConfig {
            graph: None,
            trials: s.trials,
            max_pattern: s.max_pattern,
            epsilon: s.epsilon,
            seed: s.seed,
            mix: s.mix,
            max_redraws: s.max_redraws,
            output: None,
        }
    }
}

pub fn gec_probe(file: &ConfigFile, args: GecArgs) -> CliResult {
    let cfg: GecConfig = file.resolve("gec-probe", &args)?;
    let (g, graph_config): (GeoGraph, _) = load_graph(&required(&cfg.graph, "graph")?)?;
    let opts = ScoreOptions {
        trials: cfg.trials,
        max_pattern: cfg.max_pattern,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        mix: cfg.mix,
        max_redraws: cfg.max_redraws,
    };
    let score = gec_score(&g, &opts)?;
    let mut lines = vec![with(
        envelope("gec-probe", echo(&cfg)),
        json!({ "kind": "header", "graph_config": graph_config, "n": g.n() }),
    )];
    for r in &score.records {
        lines.push(json!({ "kind": "trial", "trial": r.trial, "probe": r.probe, "witness": r.witness }));
    }
    lines.push(json!({
        "kind": "summary", "score": score.score, "successes": score.successes,
        "formed": score.formed, "trials": cfg.trials,
    }));
    write_lines(cfg.output.as_deref(), &lines)
}

/// JSON lines to a file or stdout.
pub fn write_lines(path: Option<&std::path::Path>, lines: &[Value]) -> CliResult {
    let mut buf = Vec::new();
    for l in lines {
        serde_json::to_writer(&mut buf, l)?;
        buf.push(b'\n');
    }
    match path {
        Some(p) => std::fs::write(p, buf).map_err(|e| CliError::Run(format!("cannot write {}: {e}", p.display()))),
        None => Ok(std::io::stdout().lock().write_all(&buf)?),
    }
}
