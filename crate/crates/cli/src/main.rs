//! `gecgraph` command-line driver.
//!
//! Exit status: 0 on success, 1 when a run fails, 2 on bad usage.

mod analysis;
mod config;
mod ef;
mod gen;
mod urysohn;
mod verify;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gecgraph::GeoGraph;
use serde_json::{json, Value};

use config::ConfigFile;

/// Version stamped into every JSON artifact the CLI writes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "gecgraph", version, about = "Geometric random graphs and their finite-scale model theory")]
struct Cli {
    /// TOML file with one [section] per subcommand; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a space and generate a unit-threshold random graph.
    Gen(gen::GenArgs),
    /// Draw an i.i.d. sample and write it on its own.
    Sample(gen::SampleArgs),
    /// Estimate α(G) from witness sets (and optionally from φ_{m,n}).
    Alpha(analysis::AlphaArgs),
    /// Recover B, an orienting loop, the circular order and translates.
    Recover(analysis::RecoverArgs),
    /// Score random g.e.c. probes; JSON lines, one per trial.
    GecProbe(analysis::GecArgs),
    /// Ehrenfeucht–Fraïssé games between two circle graphs.
    #[command(subcommand)]
    Ef(ef::EfCommand),
    /// Urysohn extension steps on rational metric spaces.
    #[command(subcommand)]
    Urysohn(urysohn::UrysohnCommand),
    /// Run the acceptance criteria.
    Verify(verify::VerifyArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<gecgraph::Error> for CliError {
    fn from(e: gecgraph::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Run(_) => 1,
            })
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let interactive = matches!(&cli.command, Command::Ef(c) if c.is_interactive());
    let threads = if interactive { Some(1) } else { cli.threads };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Run(e.to_string()))?;
    }
    let ok = ExitCode::SUCCESS;
    match cli.command {
        Command::Gen(a) => gen::gen(&file, a).map(|_| ok),
        Command::Sample(a) => gen::sample(&file, a).map(|_| ok),
        Command::Alpha(a) => analysis::alpha(&file, a).map(|_| ok),
        Command::Recover(a) => analysis::recover(&file, a).map(|_| ok),
        Command::GecProbe(a) => analysis::gec_probe(&file, a).map(|_| ok),
        Command::Ef(c) => ef::run(&file, c).map(|_| ok),
        Command::Urysohn(c) => urysohn::run(&file, c).map(|_| ok),
        Command::Verify(a) => verify::run(&file, a),
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Run(format!("cannot read {}: {e}", path.display())))
}

/// Graph file plus the config it was generated with.
pub fn load_graph(path: &Path) -> CliResult<(GeoGraph, Option<Value>)> {
    GeoGraph::from_json_with_config(&read_text(path)?)
        .map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

pub fn required<T: Clone>(value: &Option<T>, key: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("missing required `{key}` (flag or config key)")))
}

/// Writes `text` plus a newline to `path`, or to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .map_err(|e| CliError::Run(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

/// The common envelope: format version, command and effective config.
pub fn envelope(command: &str, config: Value) -> Value {
    json!({ "format_version": FORMAT_VERSION, "command": command, "config": config })
}

/// Adds `extra` fields to an envelope object.
pub fn with(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}
