use serde::Serialize;

use super::order::StickyOrder;
use super::{seconds_to_ticks, TICKS_PER_SECOND};
use crate::data::{AbilityKind, BalanceData, CreepStats, HeroDef};
use crate::geometry::Point;
use crate::protocol::{EntityId, EntityKind, Team};

pub const INVENTORY_SLOTS: usize = 6;

/// State every unit and building shares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitCore {
    pub id: EntityId,
    pub team: Team,
    pub name: String,
    pub level: u32,
    pub health: u32,
    pub max_health: u32,
    pub position: Point,
    pub vision: f64,
    pub stun_ticks: u32,
}

impl UnitCore {
    pub fn alive(&self) -> bool {
        self.health > 0
    }

    pub fn stunned(&self) -> bool {
        self.stun_ticks > 0
    }

    /// Returns true when this hit killed the unit.
    pub fn take_damage(&mut self, amount: u32) -> bool {
        if !self.alive() {
            return false;
        }
        self.health = self.health.saturating_sub(amount);
        self.health == 0
    }

    pub fn heal(&mut self, amount: u32) {
        if self.alive() {
            self.health = (self.health + amount).min(self.max_health);
        }
    }
}

/// Auto-attack. Melee attackers have no projectile speed and hit instantly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weapon {
    pub damage: u32,
    pub range: f64,
    pub interval_ticks: u32,
    pub cooldown_ticks: u32,
    pub projectile_speed: Option<f64>,
}

impl Weapon {
    pub fn new(damage: u32, range: f64, interval: f64, projectile_speed: Option<f64>) -> Self {
        Weapon {
            damage,
            range,
            interval_ticks: seconds_to_ticks(interval).max(1),
            cooldown_ticks: 0,
            projectile_speed,
        }
    }

    pub fn ready(&self) -> bool {
        self.cooldown_ticks == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbilityState {
    pub slot: u32,
    pub name: String,
    pub kind: AbilityKind,
    pub level: u32,
    pub max_level: u32,
    pub cooldown_ticks: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemStack {
    pub name: String,
    pub charges: u32,
}

/// Heal spread evenly over a fixed number of ticks, in whole hit points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HealOverTime {
    pub total: u32,
    pub duration_ticks: u32,
    pub elapsed_ticks: u32,
}

impl HealOverTime {
    pub fn new(total: u32, seconds: u32) -> Self {
        HealOverTime {
            total,
            duration_ticks: (u64::from(seconds) * TICKS_PER_SECOND).max(1) as u32,
            elapsed_ticks: 0,
        }
    }

    /// Hit points restored on the next tick; the per-tick amounts sum to
    /// `total` exactly.
    pub fn advance(&mut self) -> u32 {
        let total = u64::from(self.total);
        let d = u64::from(self.duration_ticks);
        let e = u64::from(self.elapsed_ticks);
        let amount = total * (e + 1) / d - total * e / d;
        self.elapsed_ticks += 1;
        amount as u32
    }

    pub fn finished(&self) -> bool {
        self.elapsed_ticks >= self.duration_ticks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeroState {
    pub unit: UnitCore,
    pub mana: f64,
    pub max_mana: u32,
    pub mana_regen: f64,
    pub xp: u32,
    pub gold: u32,
    pub move_speed: f64,
    pub base_damage: u32,
    pub weapon: Weapon,
    pub abilities: Vec<AbilityState>,
    pub skill_cursor: usize,
    pub items: [Option<ItemStack>; INVENTORY_SLOTS],
    pub heals: Vec<HealOverTime>,
    /// Tick at which a dead hero comes back.
    pub respawn_at: Option<u64>,
    pub order: Option<StickyOrder>,
    pub kills: u32,
    pub deaths: u32,
}

impl HeroState {
    pub fn new(id: EntityId, team: Team, def: &HeroDef, gold: u32, position: Point) -> Self {
        let mut hero = HeroState {
            unit: UnitCore {
                id,
                team,
                name: def.id.clone(),
                level: 1,
                health: def.health,
                max_health: def.health,
                position,
                vision: def.vision,
                stun_ticks: 0,
            },
            mana: f64::from(def.mana),
            max_mana: def.mana,
            mana_regen: def.mana_regen,
            xp: 0,
            gold,
            move_speed: def.move_speed,
            base_damage: def.damage,
            weapon: Weapon::new(def.damage, def.attack_range, def.attack_interval, def.projectile_speed),
            abilities: def
                .abilities
                .iter()
                .map(|a| AbilityState {
                    slot: a.slot,
                    name: a.name.clone(),
                    kind: a.kind,
                    level: 0,
                    max_level: a.max_level(),
                    cooldown_ticks: 0,
                })
                .collect(),
            skill_cursor: 0,
            items: Default::default(),
            heals: Vec::new(),
            respawn_at: None,
            order: None,
            kills: 0,
            deaths: 0,
        };
        hero.learn_next_ability();
        hero.refresh_damage(def);
        hero
    }

    pub fn alive(&self) -> bool {
        self.unit.alive()
    }

    pub fn ability(&self, slot: u32) -> Option<&AbilityState> {
        self.abilities.iter().find(|a| a.slot == slot)
    }

    pub fn ability_mut(&mut self, slot: u32) -> Option<&mut AbilityState> {
        self.abilities.iter_mut().find(|a| a.slot == slot)
    }

    /// Spend one ability point on the next ability in round-robin order that
    /// is not maxed out.
    pub fn learn_next_ability(&mut self) {
        let n = self.abilities.len();
        for _ in 0..n {
            let i = self.skill_cursor % n;
            self.skill_cursor = (self.skill_cursor + 1) % n;
            let ability = &mut self.abilities[i];
            if ability.level < ability.max_level {
                ability.level += 1;
                return;
            }
        }
    }

    /// Recompute attack damage from level and passive bonuses.
    pub fn refresh_damage(&mut self, def: &HeroDef) {
        let passive: u32 = self
            .abilities
            .iter()
            .filter(|a| a.kind == AbilityKind::Passive)
            .filter_map(|a| def.ability(a.slot).map(|d| d.damage_at(a.level)))
            .sum();
        self.weapon.damage = self.base_damage + passive;
    }

    pub fn free_slot(&self) -> Option<usize> {
        self.items.iter().position(Option::is_none)
    }

    /// Apply cumulative xp, levelling up as thresholds are crossed.
    pub fn gain_xp(&mut self, xp: u32, def: &HeroDef, balance: &BalanceData) {
        self.xp = self.xp.saturating_add(xp);
        let target = balance.level_for_xp(self.xp);
        while self.unit.level < target {
            self.unit.level += 1;
            let up = &balance.level_up;
            self.unit.max_health += up.health;
            if self.alive() {
                self.unit.health += up.health;
            }
            self.max_mana += up.mana;
            self.mana += f64::from(up.mana);
            self.base_damage += up.damage;
            self.learn_next_ability();
        }
        self.refresh_damage(def);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TowerState {
    pub unit: UnitCore,
    pub weapon: Weapon,
    /// Current aggro target.
    pub target: Option<EntityId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CreepKind {
    Melee,
    Ranged,
}

impl CreepKind {
    pub fn tag(self) -> &'static str {
        match self {
            CreepKind::Melee => "melee",
            CreepKind::Ranged => "ranged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CreepState {
    pub unit: UnitCore,
    pub kind: CreepKind,
    pub weapon: Weapon,
    pub move_speed: f64,
    pub acquisition_range: f64,
    /// Index into the team's lane path of the waypoint being walked to.
    pub waypoint: usize,
    pub target: Option<EntityId>,
    pub gold_bounty: u32,
    pub xp_bounty: u32,
}

impl CreepState {
    pub fn new(
        id: EntityId,
        team: Team,
        kind: CreepKind,
        stats: &CreepStats,
        balance: &BalanceData,
        position: Point,
    ) -> Self {
        CreepState {
            unit: UnitCore {
                id,
                team,
                name: format!("npc_dota_creep_{}_{}", team.tag(), kind.tag()),
                level: 1,
                health: stats.health,
                max_health: stats.health,
                position,
                vision: stats.vision,
                stun_ticks: 0,
            },
            kind,
            weapon: Weapon::new(stats.damage, stats.attack_range, stats.attack_interval, stats.projectile_speed),
            move_speed: stats.move_speed,
            acquisition_range: stats.acquisition_range,
            waypoint: 1,
            target: None,
            gold_bounty: balance.economy.creep_gold,
            xp_bounty: balance.economy.creep_xp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CourierRoute {
    Idle,
    Delivering,
    Returning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourierState {
    pub unit: UnitCore,
    pub move_speed: f64,
    /// Purchases waiting at base for the next trip.
    pub queue: Vec<ItemStack>,
    pub carrying: Vec<ItemStack>,
    pub route: CourierRoute,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FortState {
    pub unit: UnitCore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projectile {
    pub source: EntityId,
    pub team: Team,
    pub target: EntityId,
    pub position: Point,
    pub speed: f64,
    pub damage: u32,
}

/// Borrowed view of any unit, for lookups by id.
#[derive(Debug, Clone, Copy)]
pub enum UnitRef<'a> {
    Hero(&'a HeroState),
    Tower(&'a TowerState),
    Creep(&'a CreepState),
    Courier(&'a CourierState),
    Fort(&'a FortState),
}

impl<'a> UnitRef<'a> {
    pub fn core(&self) -> &'a UnitCore {
        match self {
            UnitRef::Hero(h) => &h.unit,
            UnitRef::Tower(t) => &t.unit,
            UnitRef::Creep(c) => &c.unit,
            UnitRef::Courier(c) => &c.unit,
            UnitRef::Fort(f) => &f.unit,
        }
    }

    pub fn kind(&self) -> EntityKind {
        match self {
            UnitRef::Hero(_) => EntityKind::Hero,
            UnitRef::Tower(_) => EntityKind::Tower,
            UnitRef::Creep(_) => EntityKind::Creep,
            UnitRef::Courier(_) => EntityKind::Courier,
            UnitRef::Fort(_) => EntityKind::Building,
        }
    }

    /// Couriers and forts cannot be attacked.
    pub fn attackable(&self) -> bool {
        matches!(self, UnitRef::Hero(_) | UnitRef::Tower(_) | UnitRef::Creep(_)) && self.core().alive()
    }
}
