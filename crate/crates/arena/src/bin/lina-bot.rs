//! Serve the reference Lina bot.

use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;

use solomid_arena::botkit::{serve, LinaBot, LinaConfig};

#[derive(Parser)]
#[command(version, about = "Reference Lina bot over HTTP")]
struct Args {
    /// Port to listen on.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Bot config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = match &args.config {
        Some(path) => LinaConfig::load(path)?,
        None => LinaConfig::default(),
    };
    let bot = LinaBot::new(config).context("cannot open transition log")?;
    let service = serve(bot, (args.bind.as_str(), args.port))
        .with_context(|| format!("cannot listen on {}:{}", args.bind, args.port))?;
    log::info!("lina bot listening on {}", service.base_url());
    loop {
        std::thread::park();
    }
}
