use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use super::{serialize_real, EntityId, Vec3};
use crate::data::Roster;

/// Discriminators accepted on the update endpoint.
pub const COMMAND_NAMES: [&str; 7] = ["NOOP", "MOVE", "ATTACK", "CAST", "BUY", "SELL", "USE_ITEM"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("malformed message: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("malformed select reply: {0}")]
    Malformed(String),
    #[error("select reply has no hero")]
    MissingHero,
    #[error("unknown hero `{0}`")]
    UnknownHero(String),
    #[error("expected SELECT command, got `{0}`")]
    WrongCommand(String),
}

/// What a bot tells its hero to do. Decoded from the update reply.
#[derive(Debug, Clone, PartialEq)]
pub enum BotCommand {
    Noop,
    Move { target: Vec3 },
    Attack { target: EntityId },
    Cast { ability: u32, target: EntityId },
    Buy { item: String },
    Sell { slot: u32 },
    UseItem { slot: u32, target: Option<EntityId> },
}

impl BotCommand {
    pub fn name(&self) -> &'static str {
        match self {
            BotCommand::Noop => "NOOP",
            BotCommand::Move { .. } => "MOVE",
            BotCommand::Attack { .. } => "ATTACK",
            BotCommand::Cast { .. } => "CAST",
            BotCommand::Buy { .. } => "BUY",
            BotCommand::Sell { .. } => "SELL",
            BotCommand::UseItem { .. } => "USE_ITEM",
        }
    }

    pub fn is_noop(&self) -> bool {
        matches!(self, BotCommand::Noop)
    }
}

impl fmt::Display for BotCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode_bot_command(self))
    }
}

impl Serialize for BotCommand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_value(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BotCommand {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(d)?;
        from_value(value).map_err(serde::de::Error::custom)
    }
}

/// Coordinate that may arrive as a JSON number or a numeric string.
#[derive(Debug, Clone, Copy)]
struct Coord(f64);

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let v = match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Str(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| serde::de::Error::custom(format!("`{s}` is not a number")))?,
        };
        if !v.is_finite() {
            return Err(serde::de::Error::custom("coordinate is not finite"));
        }
        Ok(Coord(v))
    }
}

#[derive(Serialize)]
struct MoveWire {
    #[serde(serialize_with = "serialize_real")]
    x: f64,
    #[serde(serialize_with = "serialize_real")]
    y: f64,
    #[serde(serialize_with = "serialize_real")]
    z: f64,
    command: &'static str,
}

#[derive(Deserialize)]
struct MoveIn {
    x: Coord,
    y: Coord,
    #[serde(default)]
    z: Option<Coord>,
}

#[derive(Serialize, Deserialize)]
struct AttackWire {
    target: EntityId,
}

#[derive(Serialize, Deserialize)]
struct CastWire {
    ability: u32,
    target: EntityId,
}

#[derive(Serialize, Deserialize)]
struct BuyWire {
    item: String,
}

#[derive(Serialize, Deserialize)]
struct SellWire {
    slot: u32,
}

#[derive(Serialize, Deserialize)]
struct UseItemWire {
    slot: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<EntityId>,
}

#[derive(Serialize)]
struct Tagged<T> {
    #[serde(flatten)]
    body: T,
    command: &'static str,
}

fn tagged<T: Serialize>(body: T, command: &'static str) -> Value {
    serde_json::to_value(Tagged { body, command }).expect("command serializes")
}

fn to_value(cmd: &BotCommand) -> Value {
    let name = cmd.name();
    match cmd {
        BotCommand::Noop => serde_json::json!({ "command": name }),
        BotCommand::Move { target } => serde_json::to_value(MoveWire {
            x: target.x,
            y: target.y,
            z: target.z,
            command: name,
        })
        .expect("command serializes"),
        BotCommand::Attack { target } => tagged(AttackWire { target: *target }, name),
        BotCommand::Cast { ability, target } => {
            tagged(CastWire { ability: *ability, target: *target }, name)
        }
        BotCommand::Buy { item } => tagged(BuyWire { item: item.clone() }, name),
        BotCommand::Sell { slot } => tagged(SellWire { slot: *slot }, name),
        BotCommand::UseItem { slot, target } => {
            tagged(UseItemWire { slot: *slot, target: *target }, name)
        }
    }
}

fn payload<T: DeserializeOwned>(value: Value) -> Result<T, ProtocolError> {
    serde_json::from_value(value).map_err(|e| ProtocolError::Malformed(e.to_string()))
}

fn from_value(value: Value) -> Result<BotCommand, ProtocolError> {
    let Value::Object(map) = &value else {
        return Err(ProtocolError::Malformed("expected a JSON object".into()));
    };
    let name = match map.get("command") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ProtocolError::Malformed("`command` is not a string".into())),
        None => return Err(ProtocolError::Malformed("missing `command`".into())),
    };
    let cmd = match name.as_str() {
        "NOOP" => BotCommand::Noop,
        "MOVE" => {
            let m: MoveIn = payload(value)?;
            BotCommand::Move {
                target: Vec3::new(m.x.0, m.y.0, m.z.map_or(0.0, |z| z.0)),
            }
        }
        "ATTACK" => BotCommand::Attack { target: payload::<AttackWire>(value)?.target },
        "CAST" => {
            let c: CastWire = payload(value)?;
            BotCommand::Cast { ability: c.ability, target: c.target }
        }
        "BUY" => BotCommand::Buy { item: payload::<BuyWire>(value)?.item },
        "SELL" => BotCommand::Sell { slot: payload::<SellWire>(value)?.slot },
        "USE_ITEM" => {
            let u: UseItemWire = payload(value)?;
            BotCommand::UseItem { slot: u.slot, target: u.target }
        }
        _ => return Err(ProtocolError::UnknownCommand(name)),
    };
    Ok(cmd)
}

pub fn encode_bot_command(cmd: &BotCommand) -> String {
    to_value(cmd).to_string()
}

/// Decode the body of an update reply. Never panics, whatever the input.
pub fn decode_bot_command(body: &[u8]) -> Result<BotCommand, ProtocolError> {
    let value: Value =
        serde_json::from_slice(body).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    from_value(value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeroSelection {
    pub hero: String,
}

impl HeroSelection {
    pub fn new(hero: impl Into<String>) -> Self {
        HeroSelection { hero: hero.into() }
    }
}

#[derive(Serialize, Deserialize)]
struct SelectWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hero: Option<String>,
    command: String,
}

pub fn encode_select_response(selection: &HeroSelection) -> String {
    serde_json::to_string(&SelectWire {
        hero: Some(selection.hero.clone()),
        command: "SELECT".into(),
    })
    .expect("selection serializes")
}

pub fn decode_select_response(body: &[u8], roster: &Roster) -> Result<HeroSelection, SelectError> {
    let wire: SelectWire =
        serde_json::from_slice(body).map_err(|e| SelectError::Malformed(e.to_string()))?;
    if wire.command != "SELECT" {
        return Err(SelectError::WrongCommand(wire.command));
    }
    let hero = wire.hero.ok_or(SelectError::MissingHero)?;
    if !roster.contains(&hero) {
        return Err(SelectError::UnknownHero(hero));
    }
    Ok(HeroSelection { hero })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChatEvent {
    pub team_only: bool,
    pub text: String,
    pub player: i32,
}

pub fn encode_chat_event(event: &ChatEvent) -> String {
    serde_json::to_string(event).expect("chat event serializes")
}

pub fn decode_chat_event(body: &[u8]) -> Result<ChatEvent, ProtocolError> {
    serde_json::from_slice(body).map_err(|e| ProtocolError::Malformed(e.to_string()))
}
