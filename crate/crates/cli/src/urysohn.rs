use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use gecgraph::urysohn::{
    back_and_forth, cn_violation, edge_violation, extend_map, rado_extend, random_graph_pair, random_instance, CnMap,
    ExtensionMode, Instance, MetricGraph,
};
use gecgraph::RationalMetricSpace;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{echo, ConfigFile};
use crate::{emit, envelope, read_text, with, CliError, CliResult};

#[derive(Subcommand, Debug)]
pub enum UrysohnCommand {
    /// Extend a C_n-preserving map to one more point of X.
    Extend(ExtendArgs),
    /// Alternate forth and back extensions between two spaces.
    Bnf(BnfArgs),
    /// Extend a map that also preserves adjacency between two graphs.
    Rado(RadoArgs),
}

pub fn run(file: &ConfigFile, cmd: UrysohnCommand) -> CliResult {
    match cmd {
        UrysohnCommand::Extend(a) => extend(file, a),
        UrysohnCommand::Bnf(a) => bnf(file, a),
        UrysohnCommand::Rado(a) => rado(file, a),
    }
}

/// Flags shared by all three steps.
#[derive(Args, Debug, Serialize)]
pub struct ModeArgs {
    /// Realize new points by Katětov extension (default).
    #[arg(long, conflicts_with = "snap")]
    #[serde(skip)]
    exact: bool,
    /// Reuse an existing target point within ε/2.
    #[arg(long)]
    #[serde(skip)]
    snap: bool,
    #[arg(skip)]
    mode: Option<ExtensionMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Size bound for random instances when no input files are given.
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

impl ModeArgs {
    fn settle(&mut self) {
        if self.exact {
            self.mode = Some(ExtensionMode::Exact);
        } else if self.snap {
            self.mode = Some(ExtensionMode::Snap);
        }
    }
}

fn parse_map(s: &str) -> CliResult<CnMap> {
    let mut pairs = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (a, b) = item
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("map entry `{item}` is not a:b")))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("map entry `{item}`: {e}")));
        pairs.push((parse(a)?, parse(b)?));
    }
    CnMap::from_pairs(pairs).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_space(path: &Path) -> CliResult<RationalMetricSpace> {
    RationalMetricSpace::from_json(&read_text(path)?).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

fn load_metric_graph(path: &Path) -> CliResult<MetricGraph> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

fn first_unmapped(len: usize, map: &CnMap) -> CliResult<usize> {
    (0..len)
        .find(|&v| map.image(v).is_none())
        .ok_or_else(|| CliError::Run("every point of the source is already mapped".into()))
}

// ---------------------------------------------------------------- extend

#[derive(Args, Debug, Serialize)]
pub struct ExtendArgs {
    /// Source space X (JSON, distances as "p/q").
    #[arg(long, value_name = "FILE", requires = "y")]
    x: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "x")]
    y: Option<PathBuf>,
    /// Partial map as "x:y,x:y".
    #[arg(long)]
    map: Option<String>,
    /// Point of X to extend to (default: first unmapped).
    #[arg(long)]
    x0: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    common: ModeArgs,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtendConfig {
    x: Option<PathBuf>,
    y: Option<PathBuf>,
    map: Option<String>,
    x0: Option<usize>,
    mode: ExtensionMode,
    seed: u64,
    max_size: usize,
    output: Option<PathBuf>,
}

impl Default for ExtendConfig {
    fn default() -> Self {
        ExtendConfig {
            x: None,
            y: None,
            map: None,
            x0: None,
            mode: ExtensionMode::Exact,
            seed: 1,
            max_size: 10,
            output: None,
        }
    }
}

/// X, Y and the map from files, or a random instance.
fn instance(x: &Option<PathBuf>, y: &Option<PathBuf>, map: &Option<String>, max_size: usize, seed: u64) -> CliResult<Instance> {
    let mut inst = match (x, y) {
        (Some(x), Some(y)) => Instance {
            x: load_space(x)?,
            y: load_space(y)?,
            map: CnMap::new(),
        },
        (None, None) => random_instance(max_size, seed)?,
        _ => return Err(CliError::Usage("give both spaces or neither".into())),
    };
    if let Some(m) = map {
        inst.map = parse_map(m)?;
    }
    Ok(inst)
}

fn extend(file: &ConfigFile, mut args: ExtendArgs) -> CliResult {
    args.common.settle();
    let cfg: ExtendConfig = file.resolve("urysohn.extend", &args)?;
    let inst = instance(&cfg.x, &cfg.y, &cfg.map, cfg.max_size, cfg.seed)?;
    let x0 = match cfg.x0 {
        Some(v) => v,
        None => first_unmapped(inst.x.len(), &inst.map)?,
    };
    let e = extend_map(&inst.x, &inst.y, &inst.map, x0, cfg.mode)?;
    let out = with(
        envelope("urysohn extend", echo(&cfg)),
        json!({
            "instance": inst,
            "x0": x0,
            "plan": e.plan.to_json_value(),
            "image": e.image,
            "map": e.map,
            "target": e.target,
            "checks": {
                "target_valid": e.target.is_valid(),
                "cn_violation": cn_violation(&inst.x, &e.target, &e.map),
            },
        }),
    );
    emit(cfg.output.as_deref(), &serde_json::to_string(&out)?)
}

// ---------------------------------------------------------------- bnf

#[derive(Args, Debug, Serialize)]
pub struct BnfArgs {
    #[arg(long, value_name = "FILE", requires = "u2")]
    u1: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "u1")]
    u2: Option<PathBuf>,
    /// Extension steps, alternating forth and back.
    #[arg(long)]
    rounds: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    common: ModeArgs,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnfConfig {
    u1: Option<PathBuf>,
    u2: Option<PathBuf>,
    rounds: usize,
    mode: ExtensionMode,
    seed: u64,
    max_size: usize,
    output: Option<PathBuf>,
}

impl Default for BnfConfig {
    fn default() -> Self {
        BnfConfig {
            u1: None,
            u2: None,
            rounds: 10,
            mode: ExtensionMode::Exact,
            seed: 1,
            max_size: 8,
            output: None,
        }
    }
}

fn bnf(file: &ConfigFile, mut args: BnfArgs) -> CliResult {
    args.common.settle();
    let cfg: BnfConfig = file.resolve("urysohn.bnf", &args)?;
    let inst = instance(&cfg.u1, &cfg.u2, &None, cfg.max_size, cfg.seed)?;
    let r = back_and_forth(&inst.x, &inst.y, cfg.rounds, cfg.mode, cfg.seed)?;
    let out = with(
        envelope("urysohn bnf", echo(&cfg)),
        json!({
            "u1": inst.x,
            "u2": inst.y,
            "result": r,
            "checks": {
                "left_valid": r.left.is_valid(),
                "right_valid": r.right.is_valid(),
                "cn_violation": cn_violation(&r.left, &r.right, &r.map),
            },
        }),
    );
    emit(cfg.output.as_deref(), &serde_json::to_string(&out)?)
}

// ---------------------------------------------------------------- rado

#[derive(Args, Debug, Serialize)]
pub struct RadoArgs {
    /// Source graph (MetricGraph JSON).
    #[arg(long, value_name = "FILE", requires = "g2")]
    g1: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "g1")]
    g2: Option<PathBuf>,
    /// Partial map as "x:y,x:y".
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    x0: Option<usize>,
    /// Edge probability for random graphs and for fresh target edges.
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    common: ModeArgs,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadoConfig {
    g1: Option<PathBuf>,
    g2: Option<PathBuf>,
    map: Option<String>,
    x0: Option<usize>,
    p: f64,
    mode: ExtensionMode,
    seed: u64,
    max_size: usize,
    output: Option<PathBuf>,
}

impl Default for RadoConfig {
    fn default() -> Self {
        RadoConfig {
            g1: None,
            g2: None,
            map: None,
            x0: None,
            p: 0.5,
            mode: ExtensionMode::Exact,
            seed: 1,
            max_size: 10,
            output: None,
        }
    }
}

fn rado(file: &ConfigFile, mut args: RadoArgs) -> CliResult {
    args.common.settle();
    let cfg: RadoConfig = file.resolve("urysohn.rado", &args)?;
    let (g1, g2, mut map) = match (&cfg.g1, &cfg.g2) {
        (Some(a), Some(b)) => (load_metric_graph(a)?, load_metric_graph(b)?, CnMap::new()),
        (None, None) => {
            let inst = random_instance(cfg.max_size, cfg.seed)?;
            let (g1, g2) = random_graph_pair(&inst, cfg.p, cfg.seed)?;
            (g1, g2, inst.map)
        }
        _ => return Err(CliError::Usage("give both graphs or neither".into())),
    };
    if let Some(m) = &cfg.map {
        map = parse_map(m)?;
    }
    let x0 = match cfg.x0 {
        Some(v) => v,
        None => first_unmapped(g1.len(), &map)?,
    };
    let r = rado_extend(&g1, &g2, &map, x0, cfg.mode, cfg.p, cfg.seed)?;
    let checks = json!({
        "edge_violation": edge_violation(&g1, &r.target, &r.map),
        "cn_violation": cn_violation(&g1.space, &r.target.space, &r.map),
        "unit_threshold": r.target.unit_threshold_holds(),
    });
    let out = with(
        envelope("urysohn rado", echo(&cfg)),
        json!({ "g1": g1, "g2": g2, "input_map": map, "x0": x0, "result": r, "checks": checks }),
    );
    emit(cfg.output.as_deref(), &serde_json::to_string::<Value>(&out)?)
}
