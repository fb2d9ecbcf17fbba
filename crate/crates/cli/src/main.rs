mod args;
mod commands;
mod config;
mod output;
mod poly;

use std::fmt;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use serde_json::{Map, Value};

use args::{Cli, Command};

/// A rejected configuration; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Outcome of a successful dispatch.
pub enum Status {
    Ok,
    ChecksFailed,
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("POLYERGO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("POLYERGO_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn apply_globals(cli: &mut Cli, cfg: &Map<String, Value>) -> Result<()> {
    if let Some(v) = cfg.get("seed") {
        cli.seed = v
            .as_u64()
            .ok_or_else(|| UsageError("config key \"seed\" must be a nonnegative integer".into()))?;
    }
    if let Some(v) = cfg.get("out") {
        cli.out = v
            .as_str()
            .ok_or_else(|| UsageError("config key \"out\" must be a string".into()))?
            .into();
    }
    Ok(())
}

fn run(mut cli: Cli) -> Result<Status> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => Map::new(),
    };
    apply_globals(&mut cli, &cfg)?;
    let (out, seed) = (cli.out.clone(), cli.seed);
    match cli.command {
        Command::Gamma(a) => commands::gamma(config::overlay(&a, &cfg)?, &out, seed),
        Command::Avg(a) => commands::avg(config::overlay(&a, &cfg)?, &out, seed),
        Command::Variation(a) => commands::variation(config::overlay(&a, &cfg)?, &out, seed),
        Command::Gauss(a) => commands::gauss(config::overlay(&a, &cfg)?, &out, seed),
        Command::Decay(a) => commands::decay(config::overlay(&a, &cfg)?, &out, seed),
        Command::Arcs(a) => commands::arcs(config::overlay(&a, &cfg)?, &out, seed),
        Command::Multiplier(a) => commands::multiplier(config::overlay(&a, &cfg)?, &out, seed),
        Command::Schedule(a) => commands::schedule(config::overlay(&a, &cfg)?, &out, seed),
        Command::Ergodic(a) => commands::ergodic(config::overlay(&a, &cfg)?, &out, seed),
        Command::Verify(a) => commands::verify(config::overlay(&a, &cfg)?, &out, seed),
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<polyergo::Error>(),
        Some(polyergo::Error::Domain(_) | polyergo::Error::Contract(_) | polyergo::Error::Size { .. } | polyergo::Error::Parse(_))
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed) => ExitCode::from(1),
        Err(e) if is_usage(&e) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
