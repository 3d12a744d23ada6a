//! Built-in scripted opponents.
//!
//! A built-in decides from the same fogged snapshot a remote bot would
//! receive. Randomness comes from the caller so that matches stay
//! reproducible from the match seed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::AbilityKind;
use crate::geometry::Point;
use crate::protocol::{BotCommand, EntityKind, EntityRecord, EntitySnapshot, Team, Vec3};
use crate::sim::Rules;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PersonalityKind {
    /// Never issues an order.
    Passive,
    /// Farms creeps behind its own wave and stays away from the enemy hero.
    Laner,
    /// Chases the enemy hero, pushes the lane and hits the tower.
    Aggressive,
}

impl PersonalityKind {
    pub fn name(self) -> &'static str {
        match self {
            PersonalityKind::Passive => "passive",
            PersonalityKind::Laner => "laner",
            PersonalityKind::Aggressive => "aggressive",
        }
    }
}

impl fmt::Display for PersonalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown personality `{0}` (expected passive, laner or aggressive)")]
pub struct UnknownPersonality(pub String);

impl FromStr for PersonalityKind {
    type Err = UnknownPersonality;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "passive" => Ok(PersonalityKind::Passive),
            "laner" => Ok(PersonalityKind::Laner),
            "aggressive" => Ok(PersonalityKind::Aggressive),
            _ => Err(UnknownPersonality(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinPersonality {
    pub kind: PersonalityKind,
    pub hero: String,
    /// Distance at which the enemy hero gets engaged.
    pub aggression_range: f64,
    /// Health fraction below which the hero walks home.
    pub retreat_threshold: f64,
    /// Health fraction at which a retreating hero returns to lane.
    pub resume_threshold: f64,
    /// Chance per decision to cast a ready ability on a valid target.
    pub cast_chance: f64,
}

impl BuiltinPersonality {
    pub fn new(kind: PersonalityKind, hero: impl Into<String>) -> Self {
        let (aggression_range, retreat_threshold, cast_chance) = match kind {
            PersonalityKind::Passive => (0.0, 0.0, 0.0),
            PersonalityKind::Laner => (0.0, 0.4, 0.1),
            PersonalityKind::Aggressive => (1200.0, 0.25, 0.3),
        };
        BuiltinPersonality {
            kind,
            hero: hero.into(),
            aggression_range,
            retreat_threshold,
            resume_threshold: 0.9,
            cast_chance,
        }
    }

    pub fn passive(hero: impl Into<String>) -> Self {
        Self::new(PersonalityKind::Passive, hero)
    }

    pub fn laner(hero: impl Into<String>) -> Self {
        Self::new(PersonalityKind::Laner, hero)
    }

    pub fn aggressive(hero: impl Into<String>) -> Self {
        Self::new(PersonalityKind::Aggressive, hero)
    }
}

/// Memory a built-in carries between ticks.
#[derive(Debug, Clone)]
pub struct BuiltinState {
    pub team: Team,
    pub retreating: bool,
    rules: Arc<Rules>,
    lane: Vec<Point>,
}

impl BuiltinState {
    pub fn new(team: Team, rules: Arc<Rules>) -> Self {
        let lane = rules.map.lane_path(team);
        BuiltinState { team, retreating: false, rules, lane }
    }

    /// Signed distance travelled along the lane toward the enemy base.
    fn progress(&self, p: Point) -> f64 {
        let start = self.lane[0];
        let end = self.lane[self.lane.len() - 1];
        let len = start.distance(end);
        ((p.x - start.x) * (end.x - start.x) + (p.y - start.y) * (end.y - start.y)) / len
    }

    fn ground(&self, p: Point) -> Vec3 {
        Vec3::new(p.x, p.y, self.rules.map.ground_z)
    }
}

/// Pick this tick's command for a built-in opponent.
pub fn builtin_decide<R: Rng + ?Sized>(
    snapshot: &EntitySnapshot,
    personality: &BuiltinPersonality,
    state: &mut BuiltinState,
    rng: &mut R,
) -> BotCommand {
    if personality.kind == PersonalityKind::Passive {
        return BotCommand::Noop;
    }
    let Some(me) = snapshot.own_hero() else {
        state.retreating = false;
        return BotCommand::Noop;
    };
    let pos = me.position();
    let max_health = state
        .rules
        .balance
        .hero_max_health(&me.name, me.level)
        .unwrap_or(me.health)
        .max(1);
    let fraction = f64::from(me.health) / f64::from(max_health);
    if fraction < personality.retreat_threshold {
        state.retreating = true;
    } else if fraction >= personality.resume_threshold {
        state.retreating = false;
    }
    if state.retreating {
        return BotCommand::Move { target: state.ground(state.rules.base(state.team)) };
    }

    let enemy = state.team.opponent();
    let enemy_hero = snapshot.nearest(pos, |e| e.kind == EntityKind::Hero && e.team == enemy);
    let enemy_creep = snapshot.nearest(pos, |e| e.kind == EntityKind::Creep && e.team == enemy);
    let enemy_tower = snapshot.nearest(pos, |e| e.kind == EntityKind::Tower && e.team == enemy);
    let in_range = |e: &EntityRecord, range: f64| pos.distance(e.position()) <= range;

    if let Some(hero) = enemy_hero {
        if let Some(cast) = try_cast(me, hero, state, personality, rng) {
            return cast;
        }
        if personality.kind == PersonalityKind::Aggressive
            && in_range(hero, personality.aggression_range)
        {
            return BotCommand::Attack { target: hero.id };
        }
    }
    if let Some(creep) = enemy_creep {
        if in_range(creep, me.attack_range) {
            return BotCommand::Attack { target: creep.id };
        }
    }
    if let Some(tower) = enemy_tower {
        let creeps_tanking = snapshot.iter().any(|e| {
            e.kind == EntityKind::Creep
                && e.team == state.team
                && e.position().distance(tower.position()) <= tower.attack_range
        });
        if in_range(tower, me.attack_range)
            && (personality.kind == PersonalityKind::Aggressive || creeps_tanking)
        {
            return BotCommand::Attack { target: tower.id };
        }
    }

    let target = match personality.kind {
        PersonalityKind::Aggressive => {
            let here = state.progress(pos);
            state
                .lane
                .iter()
                .copied()
                .find(|w| state.progress(*w) > here + 50.0)
                .unwrap_or(state.lane[state.lane.len() - 1])
        }
        _ => {
            // hold just behind the most advanced allied creep
            let front = snapshot
                .iter()
                .filter(|e| e.kind == EntityKind::Creep && e.team == state.team)
                .max_by(|a, b| {
                    state
                        .progress(a.position())
                        .total_cmp(&state.progress(b.position()))
                        .then(b.id.cmp(&a.id))
                })
                .map(|c| c.position());
            match front {
                Some(p) => {
                    let base = state.rules.base(state.team);
                    p.step_toward(base, 200.0)
                }
                None => state.rules.map.side(state.team).tower,
            }
        }
    };
    if pos.distance(target) < 1.0 {
        return BotCommand::Noop;
    }
    BotCommand::Move { target: state.ground(target) }
}

fn try_cast<R: Rng + ?Sized>(
    me: &EntityRecord,
    enemy: &EntityRecord,
    state: &BuiltinState,
    personality: &BuiltinPersonality,
    rng: &mut R,
) -> Option<BotCommand> {
    let def = state.rules.balance.hero(&me.name)?;
    let abilities = me.abilities.as_ref()?;
    for record in abilities {
        if record.level == 0 || record.cooldown_remaining > 0.0 {
            continue;
        }
        let Some(ability) = def.ability(record.slot) else { continue };
        if !ability.castable() || me.mana < f64::from(ability.mana_at(record.level)) {
            continue;
        }
        let target = match ability.kind {
            AbilityKind::Heal => {
                let max = state.rules.balance.hero_max_health(&me.name, me.level)?;
                if me.health * 10 >= max * 7 {
                    continue;
                }
                me
            }
            _ => enemy,
        };
        if me.position().distance(target.position()) > ability.range {
            continue;
        }
        if rng.random_bool(personality.cast_chance) {
            return Some(BotCommand::Cast { ability: record.slot, target: target.id });
        }
    }
    None
}
