use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gecgraph::sampling::DEFAULT_MAX_REJECTIONS;
use gecgraph::{sample_iid, GeoGraph, SampleConfig, SampleSet, SpaceDescriptor};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{echo, ConfigFile};
use crate::{emit, read_text, CliError, CliResult};

/// Default integer margin for CLI runs. The library default of 1e-3 runs
/// out of rejections for samples of a few thousand points.
pub const CLI_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    #[default]
    Circle,
    Sphere,
    Torus,
    Box,
}

#[derive(Args, Debug, Serialize)]
pub struct SpaceArgs {
    #[arg(long, value_enum)]
    space: Option<SpaceKind>,
    /// Circle circumference.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    length: Option<f64>,
    /// Sphere radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Side lengths: two for a torus, any number for a box.
    #[arg(long, value_delimiter = ',')]
    sides: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Integer margin η for integer-distance-free sampling.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    max_rejections: Option<usize>,
}

fn descriptor(kind: SpaceKind, length: f64, radius: f64, sides: &[f64]) -> CliResult<SpaceDescriptor> {
    let d = match kind {
        SpaceKind::Circle => SpaceDescriptor::circle(length),
        SpaceKind::Sphere => SpaceDescriptor::sphere(radius),
        SpaceKind::Torus => match sides {
            [a, b] => SpaceDescriptor::flat_torus(*a, *b),
            _ => return Err(CliError::Usage("torus needs --sides a,b".into())),
        },
        SpaceKind::Box => {
            if sides.is_empty() {
                return Err(CliError::Usage("box needs --sides".into()));
            }
            SpaceDescriptor::boxed(sides.to_vec())
        }
    };
    d.map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    space: SpaceArgs,
    /// Edge probability.
    #[arg(long)]
    p: Option<f64>,
    /// Seed for the edge coins (default: --seed).
    #[arg(long)]
    edge_seed: Option<u64>,
    /// Build the graph over a saved sample instead of drawing one.
    #[arg(long, value_name = "FILE")]
    sample: Option<PathBuf>,
    /// Drop coordinates from the written graph.
    #[arg(long)]
    strip: bool,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    space: SpaceKind,
    #[serde(rename = "L")]
    length: f64,
    radius: f64,
    sides: Vec<f64>,
    n: usize,
    seed: u64,
    margin: f64,
    max_rejections: usize,
    p: f64,
    edge_seed: Option<u64>,
    sample: Option<PathBuf>,
    strip: bool,
    output: Option<PathBuf>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            space: SpaceKind::Circle,
            length: 5.0,
            radius: 1.0,
            sides: Vec::new(),
            n: 1000,
            seed: 1,
            margin: CLI_MARGIN,
            max_rejections: DEFAULT_MAX_REJECTIONS,
            p: 0.5,
            edge_seed: None,
            sample: None,
            strip: false,
            output: None,
        }
    }
}

pub fn gen(file: &ConfigFile, args: GenArgs) -> CliResult {
    let cfg: GenConfig = file.resolve("gen", &args)?;
    let sample = match &cfg.sample {
        Some(path) => SampleSet::from_json(&read_text(path)?)?,
        None => draw(cfg.space, cfg.length, cfg.radius, &cfg.sides, cfg.n, cfg.seed, cfg.margin, cfg.max_rejections)?,
    };
    let mut g = GeoGraph::generate(&sample, cfg.p, cfg.edge_seed.unwrap_or(cfg.seed))?;
    if cfg.strip {
        g = g.strip_coordinates();
    }
    emit(cfg.output.as_deref(), &g.to_json(Some(echo(&cfg)))?)
}

#[allow(clippy::too_many_arguments)]
fn draw(
    kind: SpaceKind,
    length: f64,
    radius: f64,
    sides: &[f64],
    n: usize,
    seed: u64,
    margin: f64,
    max_rejections: usize,
) -> CliResult<SampleSet> {
    let space = descriptor(kind, length, radius, sides)?;
    let mut sc = SampleConfig::new(n, seed).with_margin(margin);
    sc.max_rejections = max_rejections;
    sc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(sample_iid(&space, &sc)?)
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    space: SpaceArgs,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCliConfig {
    space: SpaceKind,
    #[serde(rename = "L")]
    length: f64,
    radius: f64,
    sides: Vec<f64>,
    n: usize,
    seed: u64,
    margin: f64,
    max_rejections: usize,
    output: Option<PathBuf>,
}

impl Default for SampleCliConfig {
    fn default() -> Self {
        let g = GenConfig::default();
        SampleCliConfig {
            space: g.space,
            length: g.length,
            radius: g.radius,
            sides: g.sides,
            n: g.n,
            seed: g.seed,
            margin: g.margin,
            max_rejections: g.max_rejections,
            output: None,
        }
    }
}

/// The sample file keeps its own header; the effective config rides along
/// under `cli_config`, which the sample reader ignores.
pub fn sample(file: &ConfigFile, args: SampleArgs) -> CliResult {
    let cfg: SampleCliConfig = file.resolve("sample", &args)?;
    let s = draw(cfg.space, cfg.length, cfg.radius, &cfg.sides, cfg.n, cfg.seed, cfg.margin, cfg.max_rejections)?;
    let mut v: Value = serde_json::from_str(&s.to_json()?)?;
    if let Value::Object(m) = &mut v {
        m.insert("cli_config".into(), echo(&cfg));
    }
    emit(cfg.output.as_deref(), &serde_json::to_string(&v)?)
}
