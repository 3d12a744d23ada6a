//! Game-side proxy: runs the simulator, posts each tick's snapshot to the
//! bot's endpoints and applies the commands it sends back.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use solomid_core::builtin::{builtin_decide, BuiltinPersonality, BuiltinState};
use solomid_core::data::Roster;
use solomid_core::protocol::{
    decode_bot_command, decode_select_response, encode_bot_command, encode_chat_event,
    encode_entity_snapshot, BotCommand, ChatEvent, EndpointConfig, EndpointFn,
    HeroSelection, Team, CONTENT_TYPE,
};
use solomid_core::sim::replay::{ReplayHeader, ReplayTick, ReplayWriter, SubmittedOrder, REPLAY_FORMAT};
use solomid_core::sim::{init_world, MatchConfig, OutcomeReason, Rules, DT};

pub const DEFAULT_SOFT_TIMEOUT: Duration = Duration::from_millis(500);
/// Consecutive failed updates (about 5 s of game time) before a forfeit.
pub const DEFAULT_FORFEIT_AFTER: u32 = 150;
pub const DEFAULT_TRANSPORT_TIMEOUT: Duration = Duration::from_secs(30);
/// One hour of game time.
pub const DEFAULT_MAX_TICKS: u64 = 108_000;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("{0}")]
    Http(#[from] ureq::Error),
    #[error("bot answered with status {0}")]
    Status(u16),
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Select(#[from] solomid_core::protocol::SelectError),
}

#[derive(Debug, thiserror::Error)]
pub enum InjectError {
    #[error("match already finished")]
    MatchFinished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One tick per 1/30 s of wall time.
    Realtime,
    /// Ticks run back to back.
    #[default]
    Fast,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "realtime" => Ok(Mode::Realtime),
            "fast" => Ok(Mode::Fast),
            _ => Err(format!("unknown mode `{s}` (expected realtime or fast)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Realtime => "realtime",
            Mode::Fast => "fast",
        })
    }
}

/// Timing and outcome of one POST.
#[derive(Debug)]
pub struct Exchange {
    pub body: Vec<u8>,
    pub latency: Duration,
    /// Latency went past the soft timeout.
    pub late: bool,
}

/// What the gateway made of one update call.
#[derive(Debug, Clone)]
pub struct UpdateReply {
    pub command: BotCommand,
    pub sent_bytes: usize,
    pub latency: Duration,
    pub late: bool,
    pub transport_failed: bool,
    pub error: Option<String>,
}

/// HTTP client for one bot. Calls block until the bot replies.
pub struct BotEndpoint {
    config: EndpointConfig,
    agent: ureq::Agent,
    pub soft_timeout: Option<Duration>,
    pub consecutive_warnings: u32,
    pub warnings: u32,
}

impl BotEndpoint {
    pub fn new(config: EndpointConfig) -> Self {
        Self::with_timeouts(config, Some(DEFAULT_SOFT_TIMEOUT), Some(DEFAULT_TRANSPORT_TIMEOUT))
    }

    pub fn with_timeouts(
        config: EndpointConfig,
        soft_timeout: Option<Duration>,
        transport_timeout: Option<Duration>,
    ) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(transport_timeout)
            .no_delay(true)
            .build()
            .into();
        BotEndpoint { config, agent, soft_timeout, consecutive_warnings: 0, warnings: 0 }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    pub fn post(&mut self, function: EndpointFn, body: &str) -> Result<Exchange, TransportError> {
        let url = self.config.url(function).as_str();
        let start = Instant::now();
        let mut response = self
            .agent
            .post(url)
            .header("Content-Type", CONTENT_TYPE)
            .send(body)?;
        let status = response.status().as_u16();
        let reply = response.body_mut().read_to_vec()?;
        let latency = start.elapsed();
        let late = self.soft_timeout.is_some_and(|limit| latency > limit);
        if late {
            self.warnings += 1;
            self.consecutive_warnings += 1;
            log::warn!(
                "bot took {} ms to answer {} (soft timeout {} ms)",
                latency.as_millis(),
                function.name(),
                self.soft_timeout.unwrap_or_default().as_millis()
            );
        } else {
            self.consecutive_warnings = 0;
        }
        if status != 200 {
            return Err(TransportError::Status(status));
        }
        Ok(Exchange { body: reply, latency, late })
    }

    /// Liveness check.
    pub fn call_test(&mut self) -> Result<(), TransportError> {
        self.post(EndpointFn::Test, "{}").map(|_| ())
    }

    /// Ask the bot for its hero. The request body carries nothing about the
    /// opponent.
    pub fn call_select(&mut self, roster: &Roster) -> Result<HeroSelection, GatewayError> {
        let exchange = self.post(EndpointFn::Select, "{}")?;
        Ok(decode_select_response(&exchange.body, roster)?)
    }

    /// Send a snapshot and decode the reply. Never fails: anything unusable
    /// becomes NOOP with the reason in `error`.
    pub fn call_update(&mut self, snapshot_json: &str) -> UpdateReply {
        let sent_bytes = snapshot_json.len();
        match self.post(EndpointFn::Update, snapshot_json) {
            Ok(exchange) => match decode_bot_command(&exchange.body) {
                Ok(command) => UpdateReply {
                    command,
                    sent_bytes,
                    latency: exchange.latency,
                    late: exchange.late,
                    transport_failed: false,
                    error: None,
                },
                Err(e) => UpdateReply {
                    command: BotCommand::Noop,
                    sent_bytes,
                    latency: exchange.latency,
                    late: exchange.late,
                    transport_failed: false,
                    error: Some(format!("protocol: {e}")),
                },
            },
            Err(e) => UpdateReply {
                command: BotCommand::Noop,
                sent_bytes,
                latency: Duration::ZERO,
                late: false,
                transport_failed: true,
                error: Some(format!("transport: {e}")),
            },
        }
    }

    /// Deliver a chat message. The reply body is ignored.
    pub fn call_chat(&mut self, event: &ChatEvent) -> Result<(), TransportError> {
        self.post(EndpointFn::Chat, &encode_chat_event(event)).map(|_| ())
    }
}

/// Team-only messages reach only players on the sender's team.
pub fn chat_reaches(event: &ChatEvent, recipient: Team) -> bool {
    !event.team_only || Team::of_player(event.player) == Some(recipient)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opponent {
    pub hero: String,
    pub personality: solomid_core::builtin::PersonalityKind,
}

impl fmt::Display for Opponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.hero, self.personality)
    }
}

/// A chat message to inject when the match reaches `tick`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledChat {
    pub tick: u64,
    pub event: ChatEvent,
}

#[derive(Debug, Clone)]
pub struct MatchSettings {
    pub seed: u64,
    pub mode: Mode,
    pub bot_team: Team,
    pub opponent: Opponent,
    pub rules: Arc<Rules>,
    pub max_ticks: u64,
    pub soft_timeout: Option<Duration>,
    pub transport_timeout: Option<Duration>,
    pub forfeit_after: u32,
    pub log_path: Option<PathBuf>,
    pub replay_path: Option<PathBuf>,
    pub chat: Vec<ScheduledChat>,
}

impl MatchSettings {
    pub fn new(seed: u64, opponent: Opponent) -> Self {
        MatchSettings {
            seed,
            mode: Mode::Fast,
            bot_team: Team::Radiant,
            opponent,
            rules: Rules::shipped(),
            max_ticks: DEFAULT_MAX_TICKS,
            soft_timeout: Some(DEFAULT_SOFT_TIMEOUT),
            transport_timeout: Some(DEFAULT_TRANSPORT_TIMEOUT),
            forfeit_after: DEFAULT_FORFEIT_AFTER,
            log_path: None,
            replay_path: None,
            chat: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultReason {
    TowerDestroyed,
    Forfeit,
    /// Both towers fell on the same tick.
    Draw,
    /// The tick limit was reached.
    Timeout,
}

/// How the match went for the external bot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BotOutcome {
    Win,
    Loss,
    Draw,
    Forfeit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchResult {
    pub seed: u64,
    pub bot_team: Team,
    pub bot_hero: Option<String>,
    pub opponent: Opponent,
    pub winner: Option<Team>,
    pub reason: ResultReason,
    pub ticks: u64,
    pub protocol_error_count: u32,
    pub transport_failure_count: u32,
    pub warning_count: u32,
    pub rejected_count: u32,
    pub final_digest: String,
}

impl MatchResult {
    pub fn bot_outcome(&self) -> BotOutcome {
        match (self.reason, self.winner) {
            (ResultReason::Forfeit, _) => BotOutcome::Forfeit,
            (_, Some(team)) if team == self.bot_team => BotOutcome::Win,
            (_, Some(_)) => BotOutcome::Loss,
            (_, None) => BotOutcome::Draw,
        }
    }
}

/// Lets other threads feed chat into a running match.
#[derive(Debug, Clone)]
pub struct MatchHandle {
    tx: Sender<ChatEvent>,
    finished: Arc<AtomicBool>,
}

impl MatchHandle {
    /// Queue a chat message. It is delivered before the next update.
    pub fn inject_chat(&self, event: ChatEvent) -> Result<(), InjectError> {
        if self.finished.load(Ordering::SeqCst) {
            return Err(InjectError::MatchFinished);
        }
        self.tx.send(event).map_err(|_| InjectError::MatchFinished)
    }

    pub fn is_finished(&self) -> bool {
        self.finished.load(Ordering::SeqCst)
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TickLog<'a> {
    tick: u64,
    sent_bytes: usize,
    reply_latency_ms: f64,
    command: serde_json::Value,
    errors: &'a [String],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    chat: &'a [ChatEvent],
}

/// One match between an external bot and a built-in opponent.
pub struct MatchDriver {
    pub settings: MatchSettings,
    endpoint: BotEndpoint,
    chat_rx: Receiver<ChatEvent>,
    handle: MatchHandle,
}

impl MatchDriver {
    pub fn new(endpoint_config: EndpointConfig, settings: MatchSettings) -> Self {
        let endpoint = BotEndpoint::with_timeouts(
            endpoint_config,
            settings.soft_timeout,
            settings.transport_timeout,
        );
        let (tx, chat_rx) = mpsc::channel();
        let handle = MatchHandle { tx, finished: Arc::new(AtomicBool::new(false)) };
        MatchDriver { settings, endpoint, chat_rx, handle }
    }

    pub fn handle(&self) -> MatchHandle {
        self.handle.clone()
    }

    pub fn run(mut self) -> MatchResult {
        let result = self.run_inner();
        self.handle.finished.store(true, Ordering::SeqCst);
        result
    }

    fn forfeit(&self, bot_hero: Option<String>, ticks: u64, counters: &Counters, digest: String) -> MatchResult {
        self.result(bot_hero, Some(self.settings.bot_team.opponent()), ResultReason::Forfeit, ticks, counters, digest)
    }

    fn result(
        &self,
        bot_hero: Option<String>,
        winner: Option<Team>,
        reason: ResultReason,
        ticks: u64,
        counters: &Counters,
        final_digest: String,
    ) -> MatchResult {
        MatchResult {
            seed: self.settings.seed,
            bot_team: self.settings.bot_team,
            bot_hero,
            opponent: self.settings.opponent.clone(),
            winner,
            reason,
            ticks,
            protocol_error_count: counters.protocol_errors,
            transport_failure_count: counters.transport_failures,
            warning_count: self.endpoint.warnings,
            rejected_count: counters.rejected,
            final_digest,
        }
    }

    fn run_inner(&mut self) -> MatchResult {
        let s = self.settings.clone();
        let mut counters = Counters::default();
        let roster = s.rules.balance.roster();

        let selection = match self.endpoint.call_select(&roster) {
            Ok(selection) => selection,
            Err(e) => {
                log::error!("select failed: {e}");
                if matches!(e, GatewayError::Select(_)) {
                    counters.protocol_errors += 1;
                } else {
                    counters.transport_failures += 1;
                }
                return self.forfeit(None, 0, &counters, String::new());
            }
        };
        let mut heroes = [selection.hero.clone(), s.opponent.hero.clone()];
        if s.bot_team == Team::Dire {
            heroes.swap(0, 1);
        }
        let config = MatchConfig::with_rules(heroes[0].clone(), heroes[1].clone(), s.rules.clone());
        let mut world = match init_world(&config, s.seed) {
            Ok(world) => world,
            Err(e) => {
                log::error!("cannot start match: {e}");
                return self.forfeit(Some(selection.hero), 0, &counters, String::new());
            }
        };

        let mut log = s.log_path.as_deref().and_then(|p| open_writer(p, "match log"));
        let mut replay = s.replay_path.as_deref().and_then(|p| {
            let header = ReplayHeader {
                format: REPLAY_FORMAT,
                seed: s.seed,
                heroes: heroes.clone(),
                map: s.rules.map.name.clone(),
            };
            let out = open_writer(p, "replay")?;
            ReplayWriter::new(out, &header)
                .map_err(|e| log::error!("cannot write replay {}: {e}", p.display()))
                .ok()
        });

        let builtin_team = s.bot_team.opponent();
        let personality = BuiltinPersonality::new(s.opponent.personality, s.opponent.hero.clone());
        let mut builtin_state = BuiltinState::new(builtin_team, s.rules.clone());
        let mut builtin_rng = builtin_rng(s.seed);

        let mut scheduled = s.chat.clone();
        scheduled.sort_by_key(|c| c.tick);
        let mut scheduled = scheduled.into_iter().peekable();

        let mut consecutive_failures = 0u32;
        let start = Instant::now();
        let mut pacer = Pacer::new(start);

        loop {
            let tick = world.tick;
            if tick >= s.max_ticks {
                let digest = world.digest();
                finish_writers(log, replay);
                return self.result(Some(selection.hero), None, ResultReason::Timeout, tick, &counters, digest);
            }

            let mut errors = Vec::new();
            let mut delivered = Vec::new();
            let mut pending: Vec<ChatEvent> = Vec::new();
            while scheduled.peek().is_some_and(|c| c.tick <= tick) {
                pending.push(scheduled.next().expect("peeked").event);
            }
            pending.extend(self.chat_rx.try_iter());
            for event in pending {
                if !chat_reaches(&event, s.bot_team) {
                    log::debug!("tick {tick}: team chat from player {} not routed", event.player);
                    continue;
                }
                match self.endpoint.call_chat(&event) {
                    Ok(()) => delivered.push(event),
                    Err(e) => errors.push(format!("chat: {e}")),
                }
            }

            let snapshot = world.visible_snapshot(s.bot_team);
            let body = match encode_entity_snapshot(&snapshot) {
                Ok(body) => body,
                Err(e) => {
                    log::error!("tick {tick}: cannot encode snapshot: {e}");
                    let digest = world.digest();
                    finish_writers(log, replay);
                    return self.forfeit(Some(selection.hero), tick, &counters, digest);
                }
            };
            let reply = self.endpoint.call_update(&body);
            if reply.transport_failed {
                counters.transport_failures += 1;
                consecutive_failures += 1;
            } else {
                consecutive_failures = 0;
                if reply.error.is_some() {
                    counters.protocol_errors += 1;
                }
            }
            errors.extend(reply.error.iter().cloned());

            let mut orders = Vec::with_capacity(2);
            if let Err(e) = world.submit_order(s.bot_team, reply.command.clone()) {
                counters.rejected += 1;
                errors.push(format!("rejected: {e}"));
            }
            orders.push(SubmittedOrder { team: s.bot_team, command: reply.command.clone() });

            let builtin_view = world.visible_snapshot(builtin_team);
            let builtin_cmd = builtin_decide(&builtin_view, &personality, &mut builtin_state, &mut builtin_rng);
            if let Err(e) = world.submit_order(builtin_team, builtin_cmd.clone()) {
                log::debug!("tick {tick}: built-in order {builtin_cmd} rejected: {e}");
            }
            orders.push(SubmittedOrder { team: builtin_team, command: builtin_cmd });

            if let Err(e) = world.step() {
                log::error!("tick {tick}: {e}");
                break;
            }
            let digest = world.digest();

            if let Some(out) = log.as_mut() {
                let record = TickLog {
                    tick,
                    sent_bytes: reply.sent_bytes,
                    reply_latency_ms: reply.latency.as_secs_f64() * 1000.0,
                    command: serde_json::from_str(&encode_bot_command(&reply.command))
                        .unwrap_or_else(|_| json!(null)),
                    errors: &errors,
                    chat: &delivered,
                };
                if serde_json::to_writer(&mut *out, &record).is_err() || out.write_all(b"\n").is_err() {
                    log::error!("match log write failed; disabling it");
                    log = None;
                }
            }
            if let Some(writer) = replay.as_mut() {
                if let Err(e) = writer.record(&ReplayTick { tick, digest: digest.clone(), orders }) {
                    log::error!("replay write failed: {e}; disabling it");
                    replay = None;
                }
            }

            if let Some(outcome) = world.outcome.clone() {
                finish_writers(log, replay);
                let reason = match outcome.reason {
                    OutcomeReason::TowerDestroyed => ResultReason::TowerDestroyed,
                    OutcomeReason::Forfeit => ResultReason::Forfeit,
                    OutcomeReason::Draw => ResultReason::Draw,
                };
                return self.result(Some(selection.hero), outcome.winner, reason, world.tick, &counters, digest);
            }
            if consecutive_failures >= s.forfeit_after {
                log::error!("{consecutive_failures} consecutive failed updates; forfeiting");
                finish_writers(log, replay);
                return self.forfeit(Some(selection.hero), world.tick, &counters, digest);
            }
            if s.mode == Mode::Realtime {
                pacer.wait();
            }
        }
        let digest = world.digest();
        finish_writers(log, replay);
        self.forfeit(Some(selection.hero), world.tick, &counters, digest)
    }
}

/// Run one match to completion.
pub fn run_match(endpoint_config: EndpointConfig, settings: MatchSettings) -> MatchResult {
    MatchDriver::new(endpoint_config, settings).run()
}

/// The built-in opponent draws from its own stream of the match seed, so a
/// replay of recorded orders does not depend on it.
pub fn builtin_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

#[derive(Debug, Default)]
struct Counters {
    protocol_errors: u32,
    transport_failures: u32,
    rejected: u32,
}

/// Deadline-based tick pacing: tick k ends no earlier than start + k·dt.
struct Pacer {
    next: Instant,
    period: Duration,
}

impl Pacer {
    fn new(start: Instant) -> Self {
        let period = Duration::from_secs_f64(DT);
        Pacer { next: start + period, period }
    }

    fn wait(&mut self) {
        let now = Instant::now();
        if self.next > now {
            std::thread::sleep(self.next - now);
            self.next += self.period;
        } else if now - self.next > self.period * 3 {
            // too far behind to catch up without a burst
            self.next = now + self.period;
        } else {
            self.next += self.period;
        }
    }
}

fn open_writer(path: &Path, what: &str) -> Option<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            log::error!("cannot create {}: {e}", dir.display());
            return None;
        }
    }
    match File::create(path) {
        Ok(f) => Some(BufWriter::new(f)),
        Err(e) => {
            log::error!("cannot open {what} {}: {e}", path.display());
            None
        }
    }
}

fn finish_writers(log: Option<BufWriter<File>>, replay: Option<ReplayWriter<BufWriter<File>>>) {
    if let Some(mut log) = log {
        if let Err(e) = log.flush() {
            log::error!("match log flush failed: {e}");
        }
    }
    if let Some(replay) = replay {
        if let Err(e) = replay.finish() {
            log::error!("replay flush failed: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn team_chat_routing() {
        let all = ChatEvent { team_only: false, text: "gg".into(), player: 7 };
        assert!(chat_reaches(&all, Team::Radiant));
        let enemy = ChatEvent { team_only: true, text: "gg".into(), player: 7 };
        assert!(!chat_reaches(&enemy, Team::Radiant));
        assert!(chat_reaches(&enemy, Team::Dire));
        let nobody = ChatEvent { team_only: true, text: "gg".into(), player: -1 };
        assert!(!chat_reaches(&nobody, Team::Radiant));
    }

    #[test]
    fn mode_parse() {
        assert_eq!("realtime".parse::<Mode>().unwrap(), Mode::Realtime);
        assert_eq!(Mode::Fast.to_string(), "fast");
        assert!("slow".parse::<Mode>().is_err());
    }

    #[test]
    fn outcome_from_bot_side() {
        let mut r = MatchResult {
            seed: 0,
            bot_team: Team::Radiant,
            bot_hero: None,
            opponent: Opponent { hero: "x".into(), personality: "passive".parse().unwrap() },
            winner: Some(Team::Radiant),
            reason: ResultReason::TowerDestroyed,
            ticks: 1,
            protocol_error_count: 0,
            transport_failure_count: 0,
            warning_count: 0,
            rejected_count: 0,
            final_digest: String::new(),
        };
        assert_eq!(r.bot_outcome(), BotOutcome::Win);
        r.winner = Some(Team::Dire);
        assert_eq!(r.bot_outcome(), BotOutcome::Loss);
        r.reason = ResultReason::Forfeit;
        assert_eq!(r.bot_outcome(), BotOutcome::Forfeit);
        r.reason = ResultReason::Timeout;
        r.winner = None;
        assert_eq!(r.bot_outcome(), BotOutcome::Draw);
    }

    #[test]
    fn builtin_stream_differs_from_world_stream() {
        use rand::RngCore;
        let mut a = builtin_rng(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
