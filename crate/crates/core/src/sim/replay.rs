//! Replay files: a header line followed by one JSON line per tick with the
//! orders submitted before that tick and the state digest after it.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{init_world, MatchConfig, Rules, SimError};
use crate::protocol::{BotCommand, Team};

pub const REPLAY_FORMAT: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("replay is empty")]
    Empty,
    #[error("unsupported replay format {0}")]
    Format(u32),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("tick {tick}: expected digest {expected}, got {actual}")]
    Diverged { tick: u64, expected: String, actual: String },
    #[error("tick {tick}: recorded out of sequence")]
    Sequence { tick: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayHeader {
    pub format: u32,
    pub seed: u64,
    pub heroes: [String; 2],
    pub map: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmittedOrder {
    pub team: Team,
    pub command: BotCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayTick {
    pub tick: u64,
    pub digest: String,
    pub orders: Vec<SubmittedOrder>,
}

pub struct ReplayWriter<W: Write> {
    out: W,
}

impl<W: Write> ReplayWriter<W> {
    pub fn new(mut out: W, header: &ReplayHeader) -> io::Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(ReplayWriter { out })
    }

    pub fn record(&mut self, tick: &ReplayTick) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, tick)?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn read_replay(input: impl BufRead) -> Result<(ReplayHeader, Vec<ReplayTick>), ReplayError> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(ReplayError::Empty)?;
    let header: ReplayHeader =
        serde_json::from_str(&first?).map_err(|source| ReplayError::Parse { line: 1, source })?;
    if header.format != REPLAY_FORMAT {
        return Err(ReplayError::Format(header.format));
    }
    let mut ticks = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tick = serde_json::from_str(&line)
            .map_err(|source| ReplayError::Parse { line: i + 1, source })?;
        ticks.push(tick);
    }
    Ok((header, ticks))
}

/// Re-run a recorded match and check every digest. Returns the final digest.
pub fn verify_replay(
    header: &ReplayHeader,
    ticks: &[ReplayTick],
    rules: Arc<Rules>,
) -> Result<String, ReplayError> {
    let config = MatchConfig::with_rules(header.heroes[0].clone(), header.heroes[1].clone(), rules);
    let mut world = init_world(&config, header.seed)?;
    let mut digest = world.digest();
    for recorded in ticks {
        if recorded.tick != world.tick {
            return Err(ReplayError::Sequence { tick: recorded.tick });
        }
        for order in &recorded.orders {
            // rejections replay identically
            let _ = world.submit_order(order.team, order.command.clone());
        }
        world.step()?;
        digest = world.digest();
        if digest != recorded.digest {
            return Err(ReplayError::Diverged {
                tick: recorded.tick,
                expected: recorded.digest.clone(),
                actual: digest,
            });
        }
    }
    Ok(digest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Vec3;

    fn record(seed: u64, n: u64) -> Vec<u8> {
        let rules = Rules::shipped();
        let heroes = ["npc_dota_hero_lina".to_string(), "npc_dota_hero_sven".to_string()];
        let config = MatchConfig::with_rules(heroes[0].clone(), heroes[1].clone(), rules);
        let mut world = init_world(&config, seed).unwrap();
        let header = ReplayHeader { format: REPLAY_FORMAT, seed, heroes, map: "test".into() };
        let mut writer = ReplayWriter::new(Vec::new(), &header).unwrap();
        for t in 0..n {
            let command = if t == 3 {
                BotCommand::Move { target: Vec3::new(0.0, 0.0, 0.0) }
            } else {
                BotCommand::Noop
            };
            let orders = vec![SubmittedOrder { team: Team::Radiant, command: command.clone() }];
            let _ = world.submit_order(Team::Radiant, command);
            let tick = world.tick;
            world.step().unwrap();
            writer.record(&ReplayTick { tick, digest: world.digest(), orders }).unwrap();
        }
        writer.finish().unwrap()
    }

    #[test]
    fn replay_reproduces_digests() {
        let bytes = record(5, 120);
        assert_eq!(bytes, record(5, 120));
        let (header, ticks) = read_replay(bytes.as_slice()).unwrap();
        assert_eq!(ticks.len(), 120);
        let last = verify_replay(&header, &ticks, Rules::shipped()).unwrap();
        assert_eq!(last, ticks.last().unwrap().digest);
    }

    #[test]
    fn tampered_replay_diverges() {
        let bytes = record(5, 20);
        let (header, mut ticks) = read_replay(bytes.as_slice()).unwrap();
        ticks[3].orders.clear();
        assert!(matches!(
            verify_replay(&header, &ticks, Rules::shipped()),
            Err(ReplayError::Diverged { tick: 3, .. })
        ));
    }
}
