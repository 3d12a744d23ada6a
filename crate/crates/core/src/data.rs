//! Map and balance data files.
//!
//! Both files ship with the crate (see `data/`) and are embedded at compile
//! time; alternative versions can be loaded from disk with the `from_toml`
//! constructors. Every gameplay constant the simulator uses comes from here.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

pub const DEFAULT_MAP: &str = include_str!("../data/map.toml");
pub const DEFAULT_BALANCE: &str = include_str!("../data/balance.toml");

/// Supported data file version.
pub const DATA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid data file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported data version {0}")]
    Version(u32),
    #[error("invalid data: {0}")]
    Invalid(String),
}

fn read(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideLayout {
    pub base: Point,
    pub creep_spawn: Point,
    pub tower: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneLayout {
    pub corridor: Vec<Point>,
    pub path: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapData {
    pub version: u32,
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub ground_z: f64,
    pub radiant: SideLayout,
    pub dire: SideLayout,
    pub lane: LaneLayout,
}

impl MapData {
    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        let map: MapData = toml::from_str(text)?;
        if map.version != DATA_VERSION {
            return Err(DataError::Version(map.version));
        }
        if map.lane.corridor.len() < 3 {
            return Err(DataError::Invalid("corridor needs at least 3 vertices".into()));
        }
        if map.lane.path.len() < 2 {
            return Err(DataError::Invalid("lane path needs at least 2 waypoints".into()));
        }
        if map.min >= map.max {
            return Err(DataError::Invalid("empty map bounds".into()));
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Self::from_toml(&read(path)?)
    }

    pub fn shipped() -> Self {
        Self::from_toml(DEFAULT_MAP).expect("shipped map is valid")
    }

    /// Lane waypoints in marching order for a team's creeps, starting at the
    /// team's own end.
    pub fn lane_path(&self, team: crate::protocol::Team) -> Vec<Point> {
        let mut path = self.lane.path.clone();
        if team == crate::protocol::Team::Dire {
            path.reverse();
        }
        path
    }

    pub fn side(&self, team: crate::protocol::Team) -> &SideLayout {
        match team {
            crate::protocol::Team::Radiant => &self.radiant,
            crate::protocol::Team::Dire => &self.dire,
        }
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.min, self.max), p.y.clamp(self.min, self.max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Economy {
    pub starting_gold: u32,
    pub passive_gold_per_second: u32,
    pub creep_gold: u32,
    pub creep_xp: u32,
    pub hero_kill_gold: u32,
    pub hero_kill_xp_per_level: u32,
    pub xp_share_radius: f64,
    pub xp_curve: u32,
    pub max_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Respawn {
    pub base_seconds: u32,
    pub seconds_per_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelUp {
    pub health: u32,
    pub mana: u32,
    pub damage: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fountain {
    pub radius: f64,
    pub health_percent_per_second: u32,
    pub mana_percent_per_second: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waves {
    pub first_at_seconds: u32,
    pub interval_seconds: u32,
    pub melee: u32,
    pub ranged: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerStats {
    pub health: u32,
    pub damage: u32,
    pub attack_interval: f64,
    pub attack_range: f64,
    pub vision: f64,
    pub projectile_speed: f64,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FortStats {
    pub health: u32,
    pub vision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourierStats {
    pub health: u32,
    pub move_speed: f64,
    pub vision: f64,
    pub handoff_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreepStats {
    pub health: u32,
    pub damage: u32,
    pub attack_interval: f64,
    pub attack_range: f64,
    pub move_speed: f64,
    pub vision: f64,
    pub acquisition_range: f64,
    /// Absent for melee creeps, whose attacks land instantly.
    pub projectile_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreepTable {
    pub melee: CreepStats,
    pub ranged: CreepStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDef {
    pub name: String,
    pub price: u32,
    /// 0 for items without an active use.
    pub charges: u32,
    #[serde(default)]
    pub heal: u32,
    #[serde(default)]
    pub heal_seconds: u32,
}

impl ItemDef {
    pub fn usable(&self) -> bool {
        self.charges > 0 && self.heal > 0
    }

    pub fn sell_value(&self) -> u32 {
        self.price / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbilityKind {
    /// Single-target damage on an enemy unit.
    Nuke,
    /// Damage and stun every enemy unit around the target.
    Stun,
    /// Restore health on an allied hero.
    Heal,
    /// Bonus attack damage; cannot be cast.
    Passive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityDef {
    pub slot: u32,
    pub name: String,
    pub kind: AbilityKind,
    /// Per level: damage, heal amount, or passive bonus depending on kind.
    pub damage: Vec<u32>,
    #[serde(default)]
    pub mana: Vec<u32>,
    #[serde(default)]
    pub cooldown: Vec<f64>,
    #[serde(default)]
    pub range: f64,
    #[serde(default)]
    pub radius: f64,
    #[serde(default)]
    pub stun: f64,
}

impl AbilityDef {
    pub fn max_level(&self) -> u32 {
        self.damage.len() as u32
    }

    pub fn castable(&self) -> bool {
        self.kind != AbilityKind::Passive
    }

    fn at<T: Copy + Default>(values: &[T], level: u32) -> T {
        if level == 0 {
            return T::default();
        }
        values
            .get(level as usize - 1)
            .or(values.last())
            .copied()
            .unwrap_or_default()
    }

    pub fn damage_at(&self, level: u32) -> u32 {
        Self::at(&self.damage, level)
    }

    pub fn mana_at(&self, level: u32) -> u32 {
        Self::at(&self.mana, level)
    }

    pub fn cooldown_at(&self, level: u32) -> f64 {
        Self::at(&self.cooldown, level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeroDef {
    pub id: String,
    pub archetype: String,
    pub health: u32,
    pub mana: u32,
    pub mana_regen: f64,
    pub move_speed: f64,
    pub damage: u32,
    pub attack_interval: f64,
    pub attack_range: f64,
    /// Absent for melee heroes.
    pub projectile_speed: Option<f64>,
    pub vision: f64,
    pub abilities: Vec<AbilityDef>,
}

impl HeroDef {
    pub fn ability(&self, slot: u32) -> Option<&AbilityDef> {
        self.abilities.iter().find(|a| a.slot == slot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceData {
    pub version: u32,
    pub economy: Economy,
    pub respawn: Respawn,
    pub level_up: LevelUp,
    pub fountain: Fountain,
    pub waves: Waves,
    pub tower: TowerStats,
    pub fort: FortStats,
    pub courier: CourierStats,
    pub creeps: CreepTable,
    pub items: Vec<ItemDef>,
    pub heroes: Vec<HeroDef>,
}

impl BalanceData {
    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        let data: BalanceData = toml::from_str(text)?;
        if data.version != DATA_VERSION {
            return Err(DataError::Version(data.version));
        }
        if data.heroes.is_empty() {
            return Err(DataError::Invalid("roster is empty".into()));
        }
        if data.economy.max_level == 0 || data.economy.xp_curve == 0 {
            return Err(DataError::Invalid("level curve must be positive".into()));
        }
        for hero in &data.heroes {
            let mut slots: Vec<u32> = hero.abilities.iter().map(|a| a.slot).collect();
            slots.sort_unstable();
            slots.dedup();
            if slots.len() != hero.abilities.len() {
                return Err(DataError::Invalid(format!("{}: duplicate ability slot", hero.id)));
            }
            for ability in &hero.abilities {
                if ability.damage.is_empty() {
                    return Err(DataError::Invalid(format!("{}: no levels", ability.name)));
                }
                if ability.castable() && (ability.mana.is_empty() || ability.cooldown.is_empty()) {
                    return Err(DataError::Invalid(format!(
                        "{}: castable ability needs mana and cooldown",
                        ability.name
                    )));
                }
            }
        }
        Ok(data)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Self::from_toml(&read(path)?)
    }

    pub fn shipped() -> Self {
        Self::from_toml(DEFAULT_BALANCE).expect("shipped balance data is valid")
    }

    pub fn hero(&self, id: &str) -> Option<&HeroDef> {
        self.heroes.iter().find(|h| h.id == id)
    }

    pub fn item(&self, name: &str) -> Option<&ItemDef> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn roster(&self) -> Roster {
        Roster {
            heroes: self
                .heroes
                .iter()
                .map(|h| (h.id.clone(), h.archetype.clone()))
                .collect(),
        }
    }

    /// Seconds until a hero of `level` respawns. Strictly increasing in level.
    pub fn respawn_seconds(&self, level: u32) -> u32 {
        self.respawn.base_seconds + self.respawn.seconds_per_level * level
    }

    /// Maximum health of a hero at `level`; bots use it to turn the health
    /// on the wire into a fraction.
    pub fn hero_max_health(&self, hero: &str, level: u32) -> Option<u32> {
        let def = self.hero(hero)?;
        Some(def.health + self.level_up.health * level.saturating_sub(1))
    }

    pub fn hero_max_mana(&self, hero: &str, level: u32) -> Option<u32> {
        let def = self.hero(hero)?;
        Some(def.mana + self.level_up.mana * level.saturating_sub(1))
    }

    /// Hero level reached with `xp` cumulative experience.
    pub fn level_for_xp(&self, xp: u32) -> u32 {
        let curve = u64::from(self.economy.xp_curve);
        let mut level = 1;
        while level < self.economy.max_level {
            let next = u64::from(level);
            if u64::from(xp) < curve * next * next {
                break;
            }
            level += 1;
        }
        level
    }
}

/// Set of hero ids a bot may select.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roster {
    heroes: BTreeMap<String, String>,
}

impl Roster {
    pub fn contains(&self, hero: &str) -> bool {
        self.heroes.contains_key(hero)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.heroes.keys().map(String::as_str)
    }

    pub fn archetype(&self, hero: &str) -> Option<&str> {
        self.heroes.get(hero).map(String::as_str)
    }
}
