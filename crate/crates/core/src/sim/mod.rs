//! Deterministic 1v1 mid-lane simulator.
//!
//! The world advances in fixed ticks of 1/30 s. Everything that affects
//! state is a function of the initial configuration, the seed, and the
//! orders submitted between ticks; wall-clock time never enters. Hit points,
//! gold, xp and timers are integers. Positions and mana are `f64`, touched
//! only by IEEE-exact operations (add, mul, div, sqrt), so digests agree
//! across platforms.

mod order;
pub mod replay;
mod step;
pub mod units;
mod vision;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use order::{OrderRejection, StickyOrder};
pub use units::{
    AbilityState, CourierRoute, CourierState, CreepKind, CreepState, FortState, HealOverTime,
    HeroState, ItemStack, Projectile, TowerState, UnitCore, UnitRef, Weapon,
};

use crate::data::{BalanceData, HeroDef, MapData};
use crate::geometry::{ConvexPolygon, Point};
use crate::protocol::{EntityId, Team};

pub const TICKS_PER_SECOND: u64 = 30;
/// Seconds per tick.
pub const DT: f64 = 1.0 / TICKS_PER_SECOND as f64;

pub(crate) fn seconds_to_ticks(seconds: f64) -> u32 {
    (seconds * TICKS_PER_SECOND as f64).round() as u32
}

/// Distance covered in one tick at `speed` units per second.
pub fn step_length(speed: f64) -> f64 {
    speed / TICKS_PER_SECOND as f64
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("unknown hero `{0}`")]
    UnknownHero(String),
    #[error("cannot step a finished match")]
    IllegalState,
}

/// Map and balance data for a match, plus derived geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Rules {
    pub map: MapData,
    pub balance: BalanceData,
    pub corridor: ConvexPolygon,
}

impl Rules {
    pub fn new(map: MapData, balance: BalanceData) -> Self {
        let corridor = ConvexPolygon::new(map.lane.corridor.clone());
        Rules { map, balance, corridor }
    }

    pub fn shipped() -> Arc<Self> {
        Arc::new(Rules::new(MapData::shipped(), BalanceData::shipped()))
    }

    pub(crate) fn hero_def(&self, id: &str) -> &HeroDef {
        self.balance.hero(id).expect("hero validated at init")
    }

    pub fn base(&self, team: Team) -> Point {
        self.map.side(team).base
    }
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    /// Hero ids indexed by [`Team::index`].
    pub heroes: [String; 2],
    pub rules: Arc<Rules>,
}

impl MatchConfig {
    pub fn new(radiant: impl Into<String>, dire: impl Into<String>) -> Self {
        Self::with_rules(radiant, dire, Rules::shipped())
    }

    pub fn with_rules(radiant: impl Into<String>, dire: impl Into<String>, rules: Arc<Rules>) -> Self {
        MatchConfig { heroes: [radiant.into(), dire.into()], rules }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeReason {
    TowerDestroyed,
    Forfeit,
    Draw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchOutcome {
    /// `None` for a draw.
    pub winner: Option<Team>,
    pub reason: OutcomeReason,
    pub end_tick: u64,
}

/// Complete authoritative match state.
#[derive(Debug, Clone, Serialize)]
pub struct WorldState {
    pub tick: u64,
    pub rng: ChaCha8Rng,
    pub heroes: [HeroState; 2],
    pub towers: [TowerState; 2],
    pub forts: [FortState; 2],
    pub couriers: [CourierState; 2],
    pub creeps: Vec<CreepState>,
    pub projectiles: Vec<Projectile>,
    pub next_id: u32,
    pub outcome: Option<MatchOutcome>,
    #[serde(skip)]
    pub rules: Arc<Rules>,
}

/// Respawn delay in seconds for a hero of `level`.
pub fn respawn_time(balance: &BalanceData, level: u32) -> f64 {
    f64::from(balance.respawn_seconds(level))
}

/// Fresh match at tick 0: heroes at their bases, towers at full health, no
/// creeps on the lane yet.
pub fn init_world(config: &MatchConfig, seed: u64) -> Result<WorldState, SimError> {
    let rules = Arc::clone(&config.rules);
    for hero in &config.heroes {
        if rules.balance.hero(hero).is_none() {
            return Err(SimError::UnknownHero(hero.clone()));
        }
    }
    let balance = &rules.balance;
    let mut next_id = 1u32;
    let mut alloc = || {
        let id = EntityId(next_id);
        next_id += 1;
        id
    };

    let forts = Team::BOTH.map(|team| FortState {
        unit: UnitCore {
            id: alloc(),
            team,
            name: format!("dota_{}_fort", team.tag()),
            level: 1,
            health: balance.fort.health,
            max_health: balance.fort.health,
            position: rules.base(team),
            vision: balance.fort.vision,
            stun_ticks: 0,
        },
    });
    let towers = Team::BOTH.map(|team| {
        let t = &balance.tower;
        TowerState {
            unit: UnitCore {
                id: alloc(),
                team,
                name: format!("dota_{}_tower1_mid", team.tag()),
                level: t.level,
                health: t.health,
                max_health: t.health,
                position: rules.map.side(team).tower,
                vision: t.vision,
                stun_ticks: 0,
            },
            weapon: Weapon::new(t.damage, t.attack_range, t.attack_interval, Some(t.projectile_speed)),
            target: None,
        }
    });
    let couriers = Team::BOTH.map(|team| {
        let c = &balance.courier;
        CourierState {
            unit: UnitCore {
                id: alloc(),
                team,
                name: "npc_dota_courier".into(),
                level: 1,
                health: c.health,
                max_health: c.health,
                position: rules.base(team),
                vision: c.vision,
                stun_ticks: 0,
            },
            move_speed: c.move_speed,
            queue: Vec::new(),
            carrying: Vec::new(),
            route: CourierRoute::Idle,
        }
    });
    let heroes = Team::BOTH.map(|team| {
        let def = rules.hero_def(&config.heroes[team.index()]);
        HeroState::new(alloc(), team, def, balance.economy.starting_gold, rules.base(team))
    });

    Ok(WorldState {
        tick: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
        heroes,
        towers,
        forts,
        couriers,
        creeps: Vec::new(),
        projectiles: Vec::new(),
        next_id,
        outcome: None,
        rules,
    })
}

impl WorldState {
    pub fn clock(&self) -> f64 {
        self.tick as f64 * DT
    }

    pub fn hero(&self, team: Team) -> &HeroState {
        &self.heroes[team.index()]
    }

    pub fn hero_mut(&mut self, team: Team) -> &mut HeroState {
        &mut self.heroes[team.index()]
    }

    pub fn tower(&self, team: Team) -> &TowerState {
        &self.towers[team.index()]
    }

    pub fn courier(&self, team: Team) -> &CourierState {
        &self.couriers[team.index()]
    }

    pub fn current_order(&self, team: Team) -> Option<&StickyOrder> {
        self.hero(team).order.as_ref()
    }

    pub(crate) fn alloc_id(&mut self) -> EntityId {
        let id = EntityId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Every unit and building, in a fixed order.
    pub fn units(&self) -> impl Iterator<Item = UnitRef<'_>> {
        self.forts
            .iter()
            .map(UnitRef::Fort)
            .chain(self.towers.iter().map(UnitRef::Tower))
            .chain(self.couriers.iter().map(UnitRef::Courier))
            .chain(self.heroes.iter().map(UnitRef::Hero))
            .chain(self.creeps.iter().map(UnitRef::Creep))
    }

    pub fn unit(&self, id: EntityId) -> Option<UnitRef<'_>> {
        self.units().find(|u| u.core().id == id)
    }

    pub(crate) fn unit_core_mut(&mut self, id: EntityId) -> Option<&mut UnitCore> {
        self.forts
            .iter_mut()
            .map(|f| &mut f.unit)
            .chain(self.towers.iter_mut().map(|t| &mut t.unit))
            .chain(self.couriers.iter_mut().map(|c| &mut c.unit))
            .chain(self.heroes.iter_mut().map(|h| &mut h.unit))
            .chain(self.creeps.iter_mut().map(|c| &mut c.unit))
            .find(|u| u.id == id)
    }

    pub(crate) fn hero_team_by_id(&self, id: EntityId) -> Option<Team> {
        self.heroes.iter().find(|h| h.unit.id == id).map(|h| h.unit.team)
    }

    /// Some(outcome) once a mid T1 has fallen; both on the same tick is a
    /// draw.
    pub fn check_terminal(&self) -> Option<MatchOutcome> {
        let fallen = |team: Team| !self.tower(team).unit.alive();
        let reason = OutcomeReason::TowerDestroyed;
        match (fallen(Team::Radiant), fallen(Team::Dire)) {
            (false, false) => None,
            (true, true) => Some(MatchOutcome { winner: None, reason: OutcomeReason::Draw, end_tick: self.tick }),
            (true, false) => Some(MatchOutcome { winner: Some(Team::Dire), reason, end_tick: self.tick }),
            (false, true) => Some(MatchOutcome { winner: Some(Team::Radiant), reason, end_tick: self.tick }),
        }
    }

    pub fn is_wave_boundary(&self, tick: u64) -> bool {
        let waves = &self.rules.balance.waves;
        let first = u64::from(waves.first_at_seconds) * TICKS_PER_SECOND;
        let interval = (u64::from(waves.interval_seconds) * TICKS_PER_SECOND).max(1);
        tick >= first && (tick - first).is_multiple_of(interval)
    }

    /// SHA-256 over the canonical JSON encoding of the whole state.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("world state serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lina_mirror() -> MatchConfig {
        MatchConfig::new("npc_dota_hero_lina", "npc_dota_hero_lina")
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_world(&lina_mirror(), 42).unwrap();
        let b = init_world(&lina_mirror(), 42).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = init_world(&lina_mirror(), 43).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn init_layout_follows_data_files() {
        let world = init_world(&lina_mirror(), 42).unwrap();
        let map = MapData::shipped();
        let balance = BalanceData::shipped();
        assert_eq!(world.tick, 0);
        assert!(world.creeps.is_empty());
        for team in Team::BOTH {
            let hero = world.hero(team);
            assert!(hero.alive());
            assert_eq!(hero.unit.position, map.side(team).base);
            let tower = world.tower(team);
            assert_eq!(tower.unit.health, balance.tower.health);
            assert_eq!(tower.weapon.range, balance.tower.attack_range);
            assert_eq!(world.courier(team).route, CourierRoute::Idle);
        }
        let dire_t1 = world.tower(Team::Dire);
        assert_eq!(dire_t1.unit.team, Team::Dire);
        assert_eq!(dire_t1.unit.health, 1300);
        assert_eq!(dire_t1.weapon.range, 700.0);
    }

    #[test]
    fn unknown_hero_is_rejected() {
        let cfg = MatchConfig::new("npc_dota_hero_lina", "npc_dota_hero_unknown");
        assert_eq!(
            init_world(&cfg, 1).unwrap_err(),
            SimError::UnknownHero("npc_dota_hero_unknown".into())
        );
    }

    #[test]
    fn respawn_time_formula() {
        let balance = BalanceData::shipped();
        assert_eq!(respawn_time(&balance, 1), 6.0);
        assert_eq!(respawn_time(&balance, 25), 54.0);
        for level in 1..25 {
            assert!(respawn_time(&balance, level + 1) > respawn_time(&balance, level));
        }
    }

    #[test]
    fn terminal_check() {
        let mut world = init_world(&lina_mirror(), 1).unwrap();
        assert_eq!(world.check_terminal(), None);
        world.towers[Team::Dire.index()].unit.health = 0;
        let outcome = world.check_terminal().unwrap();
        assert_eq!(outcome.winner, Some(Team::Radiant));
        assert_eq!(outcome.reason, OutcomeReason::TowerDestroyed);
        world.towers[Team::Radiant.index()].unit.health = 0;
        let outcome = world.check_terminal().unwrap();
        assert_eq!(outcome.winner, None);
        assert_eq!(outcome.reason, OutcomeReason::Draw);
    }

    #[test]
    fn wave_boundaries() {
        let world = init_world(&lina_mirror(), 1).unwrap();
        assert!(!world.is_wave_boundary(0));
        assert!(world.is_wave_boundary(900));
        assert!(!world.is_wave_boundary(930));
        assert!(world.is_wave_boundary(1800));
    }
}
