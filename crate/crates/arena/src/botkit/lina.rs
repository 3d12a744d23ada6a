//! The reference bot: a Lina that walks to mid, fights what comes into
//! range, casts now and then, retreats when hurt and takes chat orders.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use solomid_core::data::AbilityKind;
use solomid_core::geometry::Point;
use solomid_core::protocol::{
    BotCommand, ChatEvent, EntityKind, EntityRecord, EntitySnapshot, HeroSelection, Team, Vec3,
};
use solomid_core::sim::Rules;

use super::BotHandler;

pub const LINA: &str = "npc_dota_hero_lina";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Selecting,
    WalkMid,
    Fight,
    Retreat,
    Shopping,
    Dead,
}

impl Phase {
    pub const ALL: [Phase; 6] =
        [Phase::Selecting, Phase::WalkMid, Phase::Fight, Phase::Retreat, Phase::Shopping, Phase::Dead];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Selecting => "SELECTING",
            Phase::WalkMid => "WALK_MID",
            Phase::Fight => "FIGHT",
            Phase::Retreat => "RETREAT",
            Phase::Shopping => "SHOPPING",
            Phase::Dead => "DEAD",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LinaConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error("invalid bot config: {0}")]
    Invalid(&'static str),
}

/// Bot config file. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinaConfig {
    pub hero: String,
    /// Health fraction below which Lina heads home.
    pub retreat_threshold: f64,
    /// Health fraction at which she goes back to lane.
    pub resume_threshold: f64,
    pub cast_probability: f64,
    pub seed: u64,
    /// JSONL file receiving one record per phase transition.
    pub transition_log: Option<PathBuf>,
}

impl Default for LinaConfig {
    fn default() -> Self {
        LinaConfig {
            hero: LINA.to_string(),
            retreat_threshold: 0.35,
            resume_threshold: 0.9,
            cast_probability: 0.2,
            seed: 0,
            transition_log: None,
        }
    }
}

impl LinaConfig {
    pub fn from_toml(text: &str) -> Result<Self, LinaConfigError> {
        let config: LinaConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, LinaConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| LinaConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), LinaConfigError> {
        if !(self.retreat_threshold > 0.0 && self.retreat_threshold < 1.0) {
            return Err(LinaConfigError::Invalid("retreat_threshold must be in (0, 1)"));
        }
        if !(self.resume_threshold >= self.retreat_threshold && self.resume_threshold <= 1.0) {
            return Err(LinaConfigError::Invalid("resume_threshold must be in [retreat_threshold, 1]"));
        }
        if !(0.0..=1.0).contains(&self.cast_probability) {
            return Err(LinaConfigError::Invalid("cast_probability must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatOrder {
    Buy(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub tick: Option<u64>,
    pub from: Phase,
    pub to: Phase,
    pub cause: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinaState {
    pub phase: Phase,
    pub retreat_threshold: f64,
    pub pending_chat_order: Option<ChatOrder>,
    /// Set below the retreat threshold, cleared once healed or on "lina go".
    pub retreating: bool,
    pub team: Option<Team>,
}

pub struct LinaBot {
    pub config: LinaConfig,
    pub state: LinaState,
    rules: Arc<Rules>,
    rng: ChaCha8Rng,
    transitions: Vec<Transition>,
    log: Option<BufWriter<File>>,
    tick: Option<u64>,
}

impl LinaBot {
    pub fn new(config: LinaConfig) -> std::io::Result<Self> {
        Self::with_rules(config, Rules::shipped())
    }

    pub fn with_rules(config: LinaConfig, rules: Arc<Rules>) -> std::io::Result<Self> {
        let log = match &config.transition_log {
            Some(path) => Some(BufWriter::new(File::create(path)?)),
            None => None,
        };
        Ok(LinaBot {
            state: LinaState {
                phase: Phase::Selecting,
                retreat_threshold: config.retreat_threshold,
                pending_chat_order: None,
                retreating: false,
                team: None,
            },
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            rules,
            transitions: Vec::new(),
            log,
            tick: None,
        })
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    fn enter(&mut self, to: Phase, cause: &str, forced: bool) {
        if to == self.state.phase && !forced {
            return;
        }
        let t = Transition { tick: self.tick, from: self.state.phase, to, cause: cause.to_string() };
        log::debug!("{} -> {} ({})", t.from, t.to, t.cause);
        if let Some(out) = self.log.as_mut() {
            let ok = serde_json::to_writer(&mut *out, &t).is_ok()
                && out.write_all(b"\n").is_ok()
                && out.flush().is_ok();
            if !ok {
                log::error!("transition log write failed; disabling it");
                self.log = None;
            }
        }
        self.transitions.push(t);
        self.state.phase = to;
    }

    fn ground(&self, p: Point) -> Vec3 {
        Vec3::new(p.x, p.y, self.rules.map.ground_z)
    }

    /// Pick this tick's command.
    pub fn lina_update(&mut self, snapshot: &EntitySnapshot) -> BotCommand {
        self.tick = Some(snapshot.tick);
        let Some(me) = snapshot.own_hero().cloned() else {
            self.state.retreating = false;
            self.enter(Phase::Dead, "hero dead", false);
            return BotCommand::Noop;
        };
        let team = me.team;
        self.state.team = Some(team);
        let pos = me.position();

        let max_health = self
            .rules
            .balance
            .hero_max_health(&me.name, me.level)
            .unwrap_or(me.health)
            .max(me.health)
            .max(1);
        let fraction = f64::from(me.health) / f64::from(max_health);
        if fraction < self.state.retreat_threshold {
            self.state.retreating = true;
        } else if fraction >= self.config.resume_threshold {
            self.state.retreating = false;
        }
        if self.state.retreating {
            self.enter(Phase::Retreat, "low health", false);
            let base = snapshot
                .iter()
                .find(|e| e.kind == EntityKind::Building && e.team == team)
                .map(|e| e.position())
                .unwrap_or_else(|| self.rules.base(team));
            return BotCommand::Move { target: self.ground(base) };
        }

        if let Some(ChatOrder::Buy(item)) = self.state.pending_chat_order.take() {
            self.enter(Phase::Shopping, "chat order", false);
            return BotCommand::Buy { item };
        }

        let enemy = team.opponent();
        let in_range = |e: &EntityRecord| pos.distance(e.position()) <= me.attack_range;
        let target = snapshot
            .nearest(pos, |e| {
                e.team == enemy && matches!(e.kind, EntityKind::Hero | EntityKind::Creep) && in_range(e)
            })
            .map(|e| e.id);
        if let Some(target) = target {
            self.enter(Phase::Fight, "enemy in range", false);
            if self.rng.random_bool(self.config.cast_probability) {
                if let Some(cast) = self.pick_cast(snapshot, &me) {
                    return cast;
                }
            }
            return BotCommand::Attack { target };
        }
        let tower = snapshot
            .nearest(pos, |e| e.team == enemy && e.kind == EntityKind::Tower && in_range(e))
            .map(|e| e.id);
        if let Some(tower) = tower {
            self.enter(Phase::Fight, "tower in range", false);
            return BotCommand::Attack { target: tower };
        }

        self.enter(Phase::WalkMid, "lane clear", false);
        BotCommand::Move { target: self.ground(self.lane_target(snapshot, team, pos)) }
    }

    /// Next lane waypoint ahead of `pos`, held short of the enemy tower while
    /// no allied creep is there to tank it.
    fn lane_target(&self, snapshot: &EntitySnapshot, team: Team, pos: Point) -> Point {
        let lane = self.rules.map.lane_path(team);
        let start = lane[0];
        let end = lane[lane.len() - 1];
        let len = start.distance(end);
        let progress = |p: Point| ((p.x - start.x) * (end.x - start.x) + (p.y - start.y) * (end.y - start.y)) / len;
        let here = progress(pos);
        let waypoint = lane.iter().copied().find(|w| progress(*w) > here + 50.0).unwrap_or(end);

        let tower = self.rules.map.side(team.opponent()).tower;
        let tower_range = self.rules.balance.tower.attack_range;
        let hold_distance = tower_range + 100.0;
        let covered = snapshot.iter().any(|e| {
            e.kind == EntityKind::Creep && e.team == team && e.position().distance(tower) <= tower_range + 200.0
        });
        let hold = tower.step_toward(self.rules.base(team), hold_distance);
        if !covered && progress(waypoint) > progress(hold) {
            return hold;
        }
        waypoint
    }

    /// A ready, affordable damaging ability aimed at the enemy hero if it is
    /// in cast range, otherwise at the nearest enemy creep in cast range.
    fn pick_cast(&self, snapshot: &EntitySnapshot, me: &EntityRecord) -> Option<BotCommand> {
        let def = self.rules.balance.hero(&me.name)?;
        let pos = me.position();
        let enemy = me.team.opponent();
        for record in me.abilities.as_deref().unwrap_or(&[]) {
            let Some(ability) = def.ability(record.slot) else { continue };
            if record.level == 0
                || record.cooldown_remaining > 0.0
                || !ability.castable()
                || ability.kind == AbilityKind::Heal
                || me.mana < f64::from(ability.mana_at(record.level))
            {
                continue;
            }
            let reach = |e: &EntityRecord| pos.distance(e.position()) <= ability.range;
            let target = snapshot
                .nearest(pos, |e| e.team == enemy && e.kind == EntityKind::Hero && reach(e))
                .or_else(|| snapshot.nearest(pos, |e| e.team == enemy && e.kind == EntityKind::Creep && reach(e)));
            if let Some(target) = target {
                return Some(BotCommand::Cast { ability: record.slot, target: target.id });
            }
        }
        None
    }

    /// React to a chat line. Matching ignores case and extra spaces.
    pub fn lina_chat(&mut self, event: &ChatEvent) {
        let text = event.text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        match text.as_str() {
            "lina go" => {
                self.state.retreating = false;
                self.enter(Phase::WalkMid, "chat: lina go", true);
            }
            _ => {
                if let Some(item) = text.strip_prefix("lina buy ") {
                    let name = format!("item_{}", item.replace(' ', "_"));
                    if self.rules.balance.item(&name).is_some() {
                        self.state.pending_chat_order = Some(ChatOrder::Buy(name));
                    }
                }
            }
        }
    }
}

impl BotHandler for LinaBot {
    /// A select starts a new match, so per-match state is reset here.
    fn on_select(&mut self) -> HeroSelection {
        self.state.phase = Phase::Selecting;
        self.state.pending_chat_order = None;
        self.state.retreating = false;
        self.state.team = None;
        self.rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        self.tick = None;
        HeroSelection::new(self.config.hero.clone())
    }

    fn on_update(&mut self, snapshot: &EntitySnapshot) -> BotCommand {
        self.lina_update(snapshot)
    }

    fn on_chat(&mut self, event: &ChatEvent) {
        self.lina_chat(event);
    }
}
