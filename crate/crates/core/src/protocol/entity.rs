use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{serialize_real, EntityId, Team, Vec3};
use crate::geometry::Point;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EncodeError {
    #[error("entity {id}: non-finite value in `{field}`")]
    NonFinite { id: EntityId, field: &'static str },
    #[error("snapshot clock is not finite")]
    Clock,
}

/// Entity class as reported in the `type` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Hero,
    Tower,
    Creep,
    Courier,
    Building,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AbilityRecord {
    pub slot: u32,
    pub name: String,
    pub level: u32,
    #[serde(serialize_with = "serialize_real")]
    pub cooldown_remaining: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub slot: u32,
    pub name: String,
    pub charges: u32,
}

/// One visible game object. The id is carried by the key of the enclosing
/// entities map, not inside the object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityRecord {
    #[serde(skip)]
    pub id: EntityId,
    #[serde(rename = "type")]
    pub kind: EntityKind,
    pub name: String,
    pub team: Team,
    pub level: u32,
    pub health: u32,
    #[serde(serialize_with = "serialize_real")]
    pub mana: f64,
    pub alive: bool,
    #[serde(serialize_with = "serialize_real")]
    pub attack_range: f64,
    pub origin: Vec3,
    pub blind: bool,
    pub disarmed: bool,
    pub dominated: bool,
    pub rooted: bool,
    pub deniable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abilities: Option<Vec<AbilityRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<ItemRecord>>,
}

impl EntityRecord {
    pub fn position(&self) -> Point {
        self.origin.ground()
    }

    fn check_finite(&self) -> Result<(), EncodeError> {
        let fail = |field| EncodeError::NonFinite { id: self.id, field };
        if !self.origin.is_finite() {
            return Err(fail("origin"));
        }
        if !self.mana.is_finite() {
            return Err(fail("mana"));
        }
        if !self.attack_range.is_finite() {
            return Err(fail("attackRange"));
        }
        if let Some(abilities) = &self.abilities {
            if abilities.iter().any(|a| !a.cooldown_remaining.is_finite()) {
                return Err(fail("abilities"));
            }
        }
        Ok(())
    }
}

/// The game state as perceived by one team, sent with every update.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EntitySnapshot {
    pub tick: u64,
    #[serde(serialize_with = "serialize_real")]
    pub clock: f64,
    #[serde(deserialize_with = "deserialize_entities")]
    pub entities: BTreeMap<EntityId, EntityRecord>,
}

fn deserialize_entities<'de, D>(d: D) -> Result<BTreeMap<EntityId, EntityRecord>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let mut map = BTreeMap::<EntityId, EntityRecord>::deserialize(d)?;
    for (id, record) in map.iter_mut() {
        record.id = *id;
    }
    Ok(map)
}

impl EntitySnapshot {
    pub fn insert(&mut self, record: EntityRecord) {
        self.entities.insert(record.id, record);
    }

    pub fn get(&self, id: EntityId) -> Option<&EntityRecord> {
        self.entities.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EntityRecord> {
        self.entities.values()
    }

    /// The observer's own hero. Gold is private, so only the observer's hero
    /// carries it.
    pub fn own_hero(&self) -> Option<&EntityRecord> {
        self.iter()
            .find(|e| e.kind == EntityKind::Hero && e.gold.is_some() && e.alive)
    }

    /// Nearest living entity matching `filter`, ties broken by lower id.
    pub fn nearest<F>(&self, from: Point, filter: F) -> Option<&EntityRecord>
    where
        F: Fn(&EntityRecord) -> bool,
    {
        self.iter()
            .filter(|e| e.alive && filter(e))
            .min_by(|a, b| {
                from.distance_sq(a.position())
                    .total_cmp(&from.distance_sq(b.position()))
                    .then(a.id.cmp(&b.id))
            })
    }
}

/// Encode an update payload: `{"tick": .., "clock": .., "entities": {"<id>": {..}}}`.
pub fn encode_entity_snapshot(snapshot: &EntitySnapshot) -> Result<String, EncodeError> {
    if !snapshot.clock.is_finite() {
        return Err(EncodeError::Clock);
    }
    for record in snapshot.entities.values() {
        record.check_finite()?;
    }
    Ok(serde_json::to_string(snapshot).expect("finite snapshot serializes"))
}

pub fn decode_entity_snapshot(text: &[u8]) -> Result<EntitySnapshot, serde_json::Error> {
    serde_json::from_slice(text)
}
