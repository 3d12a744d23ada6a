//! Wire-level data model shared by the game side and bot side.
//!
//! Every message is a JSON body carried by an HTTP POST. The game calls four
//! functions on the bot, each at its own URL:
//!
//! | function | request body        | response body         |
//! |----------|---------------------|-----------------------|
//! | select   | `{}`                | [`HeroSelection`]     |
//! | update   | [`EntitySnapshot`]  | [`BotCommand`]        |
//! | chat     | [`ChatEvent`]       | ignored               |
//! | test     | `{}`                | `{}`                  |

mod command;
mod endpoint;
mod entity;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use command::{
    decode_bot_command, decode_chat_event, decode_select_response, encode_bot_command,
    encode_chat_event, encode_select_response, BotCommand, ChatEvent, HeroSelection,
    ProtocolError, SelectError, COMMAND_NAMES,
};
pub use endpoint::{load_endpoint_config, ConfigError, EndpointConfig, EndpointFn};
pub use entity::{
    decode_entity_snapshot, encode_entity_snapshot, AbilityRecord, EncodeError, EntityKind,
    EntityRecord, EntitySnapshot, ItemRecord,
};

pub const CONTENT_TYPE: &str = "application/json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Team {
    Radiant = 2,
    Dire = 3,
}

impl Team {
    pub const BOTH: [Team; 2] = [Team::Radiant, Team::Dire];

    pub fn opponent(self) -> Team {
        match self {
            Team::Radiant => Team::Dire,
            Team::Dire => Team::Radiant,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Team::Radiant => 0,
            Team::Dire => 1,
        }
    }

    /// Team of an in-game player slot: 0-4 play Radiant, 5-9 play Dire.
    pub fn of_player(player: i32) -> Option<Team> {
        match player {
            0..=4 => Some(Team::Radiant),
            5..=9 => Some(Team::Dire),
            _ => None,
        }
    }

    /// Player slot of the hero on this team in a 1v1 match.
    pub fn hero_player(self) -> i32 {
        match self {
            Team::Radiant => 0,
            Team::Dire => 5,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Team::Radiant => "goodguys",
            Team::Dire => "badguys",
        }
    }
}

impl From<Team> for u8 {
    fn from(team: Team) -> u8 {
        team as u8
    }
}

impl TryFrom<u8> for Team {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            2 => Ok(Team::Radiant),
            3 => Ok(Team::Dire),
            other => Err(format!("invalid team {other}")),
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Team::Radiant => f.write_str("radiant"),
            Team::Dire => f.write_str("dire"),
        }
    }
}

/// World position; `z` is terrain height.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn ground(&self) -> crate::geometry::Point {
        crate::geometry::Point::new(self.x, self.y)
    }
}

impl Serialize for Vec3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [Real(self.x), Real(self.y), Real(self.z)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3 { x, y, z })
    }
}

/// Real number that serializes without a fractional part when it has none,
/// the way the game's scripting layer prints numbers (`700`, not `700.0`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Real(f64);

const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_real(&self.0, s)
    }
}

pub(crate) fn serialize_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < MAX_EXACT_INT {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn team_wire_values() {
        assert_eq!(serde_json::to_string(&Team::Dire).unwrap(), "3");
        assert_eq!(serde_json::from_str::<Team>("2").unwrap(), Team::Radiant);
        assert!(serde_json::from_str::<Team>("4").is_err());
        assert_eq!(Team::of_player(5), Some(Team::Dire));
        assert_eq!(Team::of_player(1), Some(Team::Radiant));
        assert_eq!(Team::of_player(-1), None);
    }

    #[test]
    fn integral_reals_print_as_integers() {
        let v = Vec3::new(-4736.0, 6016.0, 383.99987792969);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[-4736,6016,383.99987792969]");
    }
}
