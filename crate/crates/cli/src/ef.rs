use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use gecgraph::efgame::{interactive_play, play, CircleGraph, GameResult, SpoilerPolicy};
use gecgraph::rng::hash3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::write_lines;
use crate::config::{echo, ConfigFile};
use crate::{envelope, load_graph, required, with, CliError, CliResult};

#[derive(Subcommand, Debug)]
pub enum EfCommand {
    /// Play games and print full transcripts.
    Play(EfArgs),
    /// Play many games and print one outcome line per game.
    Batch(EfArgs),
}

impl EfCommand {
    pub fn is_interactive(&self) -> bool {
        matches!(self, EfCommand::Play(a) if a.interactive)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Spoiler {
    Random,
    Boundary,
}

#[derive(Args, Debug, Serialize)]
pub struct EfArgs {
    #[arg(long, value_name = "FILE")]
    graph1: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    graph2: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Level m the final map must reach; games start at m + rounds.
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, value_enum, conflicts_with = "interactive")]
    spoiler: Option<Spoiler>,
    #[arg(long, conflicts_with = "interactive")]
    games: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Play Spoiler yourself: lines "L <vertex>" or "R <vertex>", "quit".
    #[arg(long)]
    interactive: bool,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfConfig {
    graph1: Option<PathBuf>,
    graph2: Option<PathBuf>,
    rounds: usize,
    level: u32,
    spoiler: Spoiler,
    games: usize,
    seed: u64,
    interactive: bool,
    output: Option<PathBuf>,
}

impl Default for EfConfig {
    fn default() -> Self {
        EfConfig {
            graph1: None,
            graph2: None,
            rounds: 3,
            level: 1,
            spoiler: Spoiler::Random,
            games: 1,
            seed: 1,
            interactive: false,
            output: None,
        }
    }
}

pub fn run(file: &ConfigFile, cmd: EfCommand) -> CliResult {
    let (name, args, batch) = match cmd {
        EfCommand::Play(a) => ("ef play", a, false),
        EfCommand::Batch(a) => ("ef batch", a, true),
    };
    let cfg: EfConfig = file.resolve("ef", &args)?;
    if cfg.interactive && batch {
        return Err(CliError::Usage("batch games cannot be interactive".into()));
    }
    let (g1, c1) = load_graph(&required(&cfg.graph1, "graph1")?)?;
    let (g2, c2) = load_graph(&required(&cfg.graph2, "graph2")?)?;
    let (a, b) = (CircleGraph::new(&g1)?, CircleGraph::new(&g2)?);
    let header = with(
        envelope(name, echo(&cfg)),
        json!({ "kind": "header", "graph1_config": c1, "graph2_config": c2 }),
    );

    let results: Vec<(u64, GameResult)> = if cfg.interactive {
        eprintln!("vertices: G1 0..{}, G2 0..{}; enter `L v`, `R v` or `quit`", g1.n(), g2.n());
        let stdin = std::io::stdin();
        vec![(cfg.seed, interactive_play(&a, &b, cfg.rounds, cfg.level, stdin.lock(), std::io::stderr())?)]
    } else {
        let policy = match cfg.spoiler {
            Spoiler::Random => SpoilerPolicy::Random,
            Spoiler::Boundary => SpoilerPolicy::Boundary,
        };
        (0..cfg.games as u64)
            .into_par_iter()
            .map(|i| {
                let seed = hash3(cfg.seed, 0x4546, i);
                play(&a, &b, cfg.rounds, cfg.level, &policy, seed).map(|r| (seed, r))
            })
            .collect::<Result<_, _>>()?
    };

    let mut lines = vec![header];
    for (i, (seed, r)) in results.iter().enumerate() {
        lines.push(if batch {
            json!({
                "kind": "game", "game": i, "seed": seed, "won": r.won, "completed": r.completed,
                "final_level": r.final_level, "failed_round": r.failed_round, "failure": r.failure,
            })
        } else {
            json!({ "kind": "game", "game": i, "seed": seed, "result": r })
        });
    }
    let won = results.iter().filter(|(_, r)| r.won).count();
    lines.push(json!({
        "kind": "summary", "games": results.len(), "won": won,
        "win_rate": won as f64 / results.len().max(1) as f64,
    }));
    write_lines(cfg.output.as_deref(), &lines)
}
