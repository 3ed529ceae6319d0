use std::process::ExitCode;

use clap::Args;
use gecgraph_verify::criteria::{run as run_criterion, ALL};
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::{CliError, CliResult};

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// `all` or comma-separated criterion numbers.
    #[arg(long)]
    suite: Option<String>,
    /// One JSON object per criterion instead of PASS/FAIL lines.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    suite: String,
    json: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: "all".into(),
            json: false,
        }
    }
}

fn parse_suite(s: &str) -> CliResult<Vec<u32>> {
    if s.trim() == "all" {
        return Ok(ALL.to_vec());
    }
    s.split(',')
        .map(|t| match t.trim().parse::<u32>() {
            Ok(id) if ALL.contains(&id) => Ok(id),
            _ => Err(CliError::Usage(format!("unknown criterion `{}` (expected 1..=11 or all)", t.trim()))),
        })
        .collect()
}

/// Exit 1 when any selected criterion fails.
pub fn run(file: &ConfigFile, args: VerifyArgs) -> CliResult<ExitCode> {
    let cfg: VerifyConfig = file.resolve("verify", &args)?;
    let ids = parse_suite(&cfg.suite)?;
    let mut failed = 0;
    for id in ids {
        let r = run_criterion(id);
        if !r.passed {
            failed += 1;
        }
        if cfg.json {
            println!("{}", serde_json::to_string(&r)?);
        } else {
            println!("{}", r.line());
        }
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
