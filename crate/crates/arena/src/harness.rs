//! Ranked series of matches between one external bot and the built-in
//! opponents.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use solomid_core::builtin::PersonalityKind;
use solomid_core::data::Roster;
use solomid_core::protocol::{load_endpoint_config, ChatEvent, ConfigError, EndpointConfig, Team};
use solomid_core::sim::Rules;

use crate::gateway::{
    run_match, BotEndpoint, BotOutcome, MatchResult, MatchSettings, Mode, Opponent, ScheduledChat,
    TransportError, DEFAULT_FORFEIT_AFTER, DEFAULT_MAX_TICKS,
};

pub const DEFAULT_HEROES: [&str; 4] = [
    "npc_dota_hero_lina",
    "npc_dota_hero_sven",
    "npc_dota_hero_drow_ranger",
    "npc_dota_hero_omniknight",
];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid series config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid series config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Endpoint(#[from] ConfigError),
    #[error("bot is not reachable at {url}: {source}")]
    Unreachable {
        url: String,
        #[source]
        source: TransportError,
    },
    #[error("cannot write report: {0}")]
    Report(std::io::Error),
}

/// A chat line the harness injects in every match of a series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatInjection {
    pub text: String,
    pub tick: u64,
}

impl std::str::FromStr for ChatInjection {
    type Err = String;

    /// `text@tick`, with optional quotes around the text.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (text, tick) = s.rsplit_once('@').ok_or_else(|| format!("expected \"text\"@tick, got `{s}`"))?;
        let tick = tick.trim().parse().map_err(|_| format!("bad tick in `{s}`"))?;
        let text = text.trim();
        let text = text
            .strip_prefix('"')
            .and_then(|t| t.strip_suffix('"'))
            .unwrap_or(text);
        Ok(ChatInjection { text: text.to_string(), tick })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    pub bot_url: Option<String>,
    /// key=value endpoint file; used when `bot_url` is absent.
    pub endpoint_config: Option<PathBuf>,
    /// Name of the bot in the ranking; defaults to its base URL.
    pub bot_name: Option<String>,
    pub opponents: Vec<Opponent>,
    pub matches_per_opponent: u32,
    pub seed_base: u64,
    pub mode: Mode,
    pub bot_team: Team,
    pub max_ticks: u64,
    pub soft_timeout_ms: Option<u64>,
    pub forfeit_after: u32,
    /// Parallel matches in fast mode. Only useful with a bot that keeps
    /// separate state per connection.
    pub workers: usize,
    pub log_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub chat: Vec<ChatInjection>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        let opponents = DEFAULT_HEROES
            .iter()
            .flat_map(|hero| {
                [PersonalityKind::Laner, PersonalityKind::Aggressive]
                    .map(|personality| Opponent { hero: hero.to_string(), personality })
            })
            .collect();
        SeriesConfig {
            bot_url: None,
            endpoint_config: None,
            bot_name: None,
            opponents,
            matches_per_opponent: 3,
            seed_base: 0,
            mode: Mode::Fast,
            bot_team: Team::Radiant,
            max_ticks: DEFAULT_MAX_TICKS,
            soft_timeout_ms: Some(500),
            forfeit_after: DEFAULT_FORFEIT_AFTER,
            workers: 1,
            log_dir: None,
            report: None,
            chat: Vec::new(),
        }
    }
}

impl SeriesConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self, roster: &Roster) -> Result<(), HarnessError> {
        if self.opponents.is_empty() {
            return Err(HarnessError::Invalid("no opponents".into()));
        }
        if self.matches_per_opponent == 0 {
            return Err(HarnessError::Invalid("matches_per_opponent must be at least 1".into()));
        }
        if let Some(o) = self.opponents.iter().find(|o| !roster.contains(&o.hero)) {
            return Err(HarnessError::Invalid(format!("unknown hero `{}`", o.hero)));
        }
        if self.bot_url.is_none() && self.endpoint_config.is_none() {
            return Err(HarnessError::Invalid("need bot_url or endpoint_config".into()));
        }
        if self.max_ticks == 0 || self.forfeit_after == 0 {
            return Err(HarnessError::Invalid("max_ticks and forfeit_after must be positive".into()));
        }
        Ok(())
    }

    pub fn endpoints(&self) -> Result<EndpointConfig, HarnessError> {
        match (&self.bot_url, &self.endpoint_config) {
            (Some(url), _) => Ok(EndpointConfig::from_base_url(url)?),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
                Ok(load_endpoint_config(&text)?)
            }
            (None, None) => Err(HarnessError::Invalid("need bot_url or endpoint_config".into())),
        }
    }

    /// Every match of the series in order: opponent-major, seeds counting up
    /// from `seed_base`.
    pub fn schedule(&self) -> Vec<(usize, Opponent, u64)> {
        let reps = self.matches_per_opponent as usize;
        self.opponents
            .iter()
            .flat_map(|o| std::iter::repeat_n(o, reps))
            .enumerate()
            .map(|(i, o)| (i, o.clone(), self.seed_base.wrapping_add(i as u64)))
            .collect()
    }
}

/// Parse `hero:personality,...`. Heroes may be given without the
/// `npc_dota_hero_` prefix.
pub fn parse_opponents(list: &str, roster: &Roster) -> Result<Vec<Opponent>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (hero, personality) = item
                .split_once(':')
                .ok_or_else(|| format!("expected hero:personality, got `{item}`"))?;
            let hero = if hero.starts_with("npc_dota_hero_") {
                hero.to_string()
            } else {
                format!("npc_dota_hero_{hero}")
            };
            if !roster.contains(&hero) {
                return Err(format!("unknown hero `{hero}`"));
            }
            let personality = personality.parse::<PersonalityKind>().map_err(|e| e.to_string())?;
            Ok(Opponent { hero, personality })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BotRecord {
    pub name: String,
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
    pub forfeits: u32,
    pub protocol_errors: u32,
}

impl BotRecord {
    pub fn matches(&self) -> u32 {
        self.wins + self.losses + self.draws + self.forfeits
    }

    pub fn add(&mut self, result: &MatchResult) {
        match result.bot_outcome() {
            BotOutcome::Win => self.wins += 1,
            BotOutcome::Loss => self.losses += 1,
            BotOutcome::Draw => self.draws += 1,
            BotOutcome::Forfeit => self.forfeits += 1,
        }
        self.protocol_errors += result.protocol_error_count;
    }
}

/// Bots ordered by wins, then fewer protocol errors, then name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeriesRanking {
    pub entries: Vec<BotRecord>,
}

impl SeriesRanking {
    pub fn new(mut entries: Vec<BotRecord>) -> Self {
        entries.sort_by(|a, b| {
            b.wins
                .cmp(&a.wins)
                .then(a.protocol_errors.cmp(&b.protocol_errors))
                .then(a.name.cmp(&b.name))
                .then_with(|| a.cmp(b))
        });
        SeriesRanking { entries }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub ranking: SeriesRanking,
    pub matches: Vec<MatchResult>,
}

pub struct RenderedReport {
    pub text: String,
    pub json: String,
}

pub fn render_report(report: &SeriesReport) -> RenderedReport {
    let mut text = String::new();
    let _ = writeln!(text, "rank  bot                             matches  wins  losses  draws  forfeits  protocol_errors");
    for (i, r) in report.ranking.entries.iter().enumerate() {
        let _ = writeln!(
            text,
            "{:<5} {:<31} {:>7}  wins={:<3} losses={:<3} draws={:<3} forfeits={:<3} protocol_errors={}",
            i + 1,
            r.name,
            r.matches(),
            r.wins,
            r.losses,
            r.draws,
            r.forfeits,
            r.protocol_errors
        );
    }
    if !report.matches.is_empty() {
        let _ = writeln!(text);
        for (i, m) in report.matches.iter().enumerate() {
            let _ = writeln!(
                text,
                "match {:>3}  seed {:<6} vs {:<40} {:<8} {:<16} ticks {:>6}  errors {}",
                i,
                m.seed,
                m.opponent.to_string(),
                format!("{:?}", m.bot_outcome()).to_lowercase(),
                serde_json::to_value(m.reason).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                m.ticks,
                m.protocol_error_count
            );
        }
    }
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    RenderedReport { text, json }
}

/// Run a full series. The bot must answer /test before anything starts.
pub fn run_series(config: &SeriesConfig) -> Result<SeriesReport, HarnessError> {
    run_series_with_rules(config, Rules::shipped())
}

pub fn run_series_with_rules(config: &SeriesConfig, rules: Arc<Rules>) -> Result<SeriesReport, HarnessError> {
    config.validate(&rules.balance.roster())?;
    let endpoints = config.endpoints()?;
    let name = config.bot_name.clone().unwrap_or_else(|| endpoints.base_url().to_string());

    let mut probe = BotEndpoint::new(endpoints.clone());
    probe.call_test().map_err(|source| HarnessError::Unreachable {
        url: endpoints.base_url().to_string(),
        source,
    })?;

    if let Some(dir) = &config.log_dir {
        std::fs::create_dir_all(dir)
            .map_err(|source| HarnessError::Io { path: dir.display().to_string(), source })?;
    }

    let schedule = config.schedule();
    let chat_player = config.bot_team.hero_player() + 1;
    let settings_for = |index: usize, opponent: Opponent, seed: u64| {
        let mut s = MatchSettings::new(seed, opponent);
        s.mode = config.mode;
        s.bot_team = config.bot_team;
        s.rules = rules.clone();
        s.max_ticks = config.max_ticks;
        s.soft_timeout = config.soft_timeout_ms.map(Duration::from_millis);
        s.forfeit_after = config.forfeit_after;
        if let Some(dir) = &config.log_dir {
            s.log_path = Some(dir.join(format!("match-{index:03}.log.jsonl")));
            s.replay_path = Some(dir.join(format!("match-{index:03}.replay.jsonl")));
        }
        s.chat = config
            .chat
            .iter()
            .map(|c| ScheduledChat {
                tick: c.tick,
                event: ChatEvent { team_only: true, text: c.text.clone(), player: chat_player },
            })
            .collect();
        s
    };

    let workers = match config.mode {
        Mode::Realtime => 1,
        Mode::Fast => config.workers.clamp(1, schedule.len()),
    };
    let results: Mutex<Vec<Option<MatchResult>>> = Mutex::new(vec![None; schedule.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((index, opponent, seed)) = schedule.get(i).cloned() else { break };
                log::info!("match {index}: vs {opponent}, seed {seed}");
                let result = run_match(endpoints.clone(), settings_for(index, opponent, seed));
                log::info!(
                    "match {index}: {:?} ({:?}) after {} ticks",
                    result.bot_outcome(),
                    result.reason,
                    result.ticks
                );
                results.lock().unwrap_or_else(|e| e.into_inner())[index] = Some(result);
            });
        }
    });
    let matches: Vec<MatchResult> = results
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every scheduled match ran"))
        .collect();

    let mut record = BotRecord { name, ..Default::default() };
    for m in &matches {
        record.add(m);
    }
    let report = SeriesReport { ranking: SeriesRanking::new(vec![record]), matches };
    if let Some(path) = &config.report {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(HarnessError::Report)?;
        }
        std::fs::write(path, render_report(&report).json).map_err(HarnessError::Report)?;
    }
    Ok(report)
}
