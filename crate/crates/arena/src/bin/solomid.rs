//! Run a ranked series against an external bot.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use solomid_arena::gateway::Mode;
use solomid_arena::harness::{parse_opponents, render_report, run_series, ChatInjection, SeriesConfig};
use solomid_core::sim::replay::{read_replay, verify_replay};
use solomid_core::sim::Rules;

#[derive(Parser)]
#[command(version, about = "1v1 mid-lane bot arena: match runner and ranking")]
struct Args {
    /// Series config (TOML). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base URL of the bot service.
    #[arg(long)]
    bot_url: Option<String>,
    /// realtime or fast.
    #[arg(long)]
    mode: Option<Mode>,
    /// Seed of the first match; later matches count up from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Matches per opponent.
    #[arg(long)]
    matches: Option<u32>,
    /// Comma-separated hero:personality pairs, e.g. `sven:laner,drow_ranger:aggressive`.
    #[arg(long)]
    opponents: Option<String>,
    #[arg(long)]
    log_dir: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Team chat line sent by the bot's teammate at a tick: `"lina go"@300`. Repeatable.
    #[arg(long = "inject-chat")]
    inject_chat: Vec<ChatInjection>,
    #[arg(long)]
    max_ticks: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Check a replay file against the simulator and exit.
    #[arg(long, conflicts_with_all = ["bot_url", "config"])]
    verify_replay: Option<PathBuf>,
}

fn verify(path: &PathBuf) -> anyhow::Result<()> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let (header, ticks) = read_replay(file)?;
    let digest = verify_replay(&header, &ticks, Rules::shipped())?;
    println!("{}: {} ticks reproduced, final digest {digest}", path.display(), ticks.len());
    Ok(())
}

fn build_config(args: Args) -> anyhow::Result<SeriesConfig> {
    let mut config = match &args.config {
        Some(path) => SeriesConfig::load(path)?,
        None => SeriesConfig::default(),
    };
    if let Some(url) = args.bot_url {
        config.bot_url = Some(url);
    }
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    if let Some(seed) = args.seed {
        config.seed_base = seed;
    }
    if let Some(n) = args.matches {
        config.matches_per_opponent = n;
    }
    if let Some(list) = &args.opponents {
        let roster = Rules::shipped().balance.roster();
        config.opponents = parse_opponents(list, &roster).map_err(anyhow::Error::msg)?;
    }
    if args.log_dir.is_some() {
        config.log_dir = args.log_dir;
    }
    if args.report.is_some() {
        config.report = args.report;
    }
    config.chat.extend(args.inject_chat);
    if let Some(n) = args.max_ticks {
        config.max_ticks = n;
    }
    if let Some(n) = args.workers {
        config.workers = n;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    if let Some(path) = &args.verify_replay {
        return match verify(path) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        };
    }
    let result = build_config(args).and_then(|config| Ok(run_series(&config)?));
    match result {
        Ok(report) => {
            print!("{}", render_report(&report).text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
