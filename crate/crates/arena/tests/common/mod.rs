#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solomid_arena::botkit::{serve, BotHandler, ServiceHandle};
use solomid_arena::gateway::{MatchSettings, Opponent};
use solomid_core::builtin::PersonalityKind;
use solomid_core::protocol::{
    BotCommand, ChatEvent, EndpointConfig, EntitySnapshot, HeroSelection, Team, Vec3,
};

pub const LINA: &str = "npc_dota_hero_lina";
pub const SVEN: &str = "npc_dota_hero_sven";

pub fn opponent(hero: &str, personality: PersonalityKind) -> Opponent {
    Opponent { hero: hero.to_string(), personality }
}

pub fn settings(seed: u64, hero: &str, personality: PersonalityKind) -> MatchSettings {
    MatchSettings::new(seed, opponent(hero, personality))
}

pub fn start<H: BotHandler>(handler: H) -> (ServiceHandle<H>, EndpointConfig) {
    let service = serve(handler, "127.0.0.1:0").expect("bind loopback");
    let endpoints = EndpointConfig::from_base_url(&service.base_url()).unwrap();
    (service, endpoints)
}

/// Wraps a bot and keeps everything it was sent.
pub struct Recording<H> {
    pub inner: H,
    pub snapshots: Vec<EntitySnapshot>,
    pub update_times: Vec<Instant>,
    pub chats: Vec<ChatEvent>,
}

impl<H> Recording<H> {
    pub fn new(inner: H) -> Self {
        Recording { inner, snapshots: Vec::new(), update_times: Vec::new(), chats: Vec::new() }
    }
}

impl<H: BotHandler> BotHandler for Recording<H> {
    fn on_select(&mut self) -> HeroSelection {
        self.inner.on_select()
    }

    fn on_update(&mut self, snapshot: &EntitySnapshot) -> BotCommand {
        self.update_times.push(Instant::now());
        self.snapshots.push(snapshot.clone());
        self.inner.on_update(snapshot)
    }

    fn on_chat(&mut self, event: &ChatEvent) {
        self.chats.push(event.clone());
        self.inner.on_chat(event);
    }

    fn on_test(&mut self) {
        self.inner.on_test();
    }
}

/// Replies with a fixed list of commands, then NOOP.
pub struct Script {
    pub hero: String,
    pub commands: Vec<BotCommand>,
    pub next: usize,
}

impl Script {
    pub fn new(commands: Vec<BotCommand>) -> Self {
        Script { hero: LINA.to_string(), commands, next: 0 }
    }
}

impl BotHandler for Script {
    fn on_select(&mut self) -> HeroSelection {
        self.next = 0;
        HeroSelection::new(self.hero.clone())
    }

    fn on_update(&mut self, _snapshot: &EntitySnapshot) -> BotCommand {
        let cmd = self.commands.get(self.next).cloned().unwrap_or(BotCommand::Noop);
        self.next += 1;
        cmd
    }
}

/// Wanders around its own half from a seeded generator. Keeps matches going
/// without pushing.
pub struct Wanderer {
    rng: ChaCha8Rng,
    seed: u64,
}

impl Wanderer {
    pub fn new(seed: u64) -> Self {
        Wanderer { rng: ChaCha8Rng::seed_from_u64(seed), seed }
    }
}

impl BotHandler for Wanderer {
    fn on_select(&mut self) -> HeroSelection {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        HeroSelection::new(LINA)
    }

    fn on_update(&mut self, snapshot: &EntitySnapshot) -> BotCommand {
        if !snapshot.tick.is_multiple_of(45) {
            return BotCommand::Noop;
        }
        let x = self.rng.random_range(-7000.0..-2500.0);
        let y = self.rng.random_range(-7000.0..-2500.0);
        BotCommand::Move { target: Vec3::new(x, y, 128.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToBot,
    ToGateway,
}

pub type TapLog = Arc<Mutex<Vec<(Direction, Vec<u8>)>>>;

/// TCP proxy in front of a bot that records every byte in arrival order.
pub struct Tap {
    pub addr: std::net::SocketAddr,
    pub log: TapLog,
}

impl Tap {
    pub fn start(upstream: std::net::SocketAddr) -> Tap {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let log: TapLog = Arc::default();
        let shared = log.clone();
        thread::spawn(move || {
            for client in listener.incoming() {
                let Ok(client) = client else { break };
                let Ok(server) = TcpStream::connect(upstream) else { break };
                let _ = client.set_nodelay(true);
                let _ = server.set_nodelay(true);
                pipe(client.try_clone().unwrap(), server.try_clone().unwrap(), Direction::ToBot, shared.clone());
                pipe(server, client, Direction::ToGateway, shared.clone());
            }
        });
        Tap { addr, log }
    }

    pub fn url(&self) -> String {
        format!("http://{}/", self.addr)
    }
}

fn pipe(mut from: TcpStream, mut to: TcpStream, dir: Direction, log: TapLog) {
    thread::spawn(move || {
        let mut buf = [0u8; 8192];
        loop {
            match from.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    log.lock().unwrap().push((dir, buf[..n].to_vec()));
                    if to.write_all(&buf[..n]).is_err() {
                        break;
                    }
                }
            }
        }
        let _ = to.shutdown(Shutdown::Write);
    });
}

/// Brute-force fog check straight from the world's unit lists.
pub fn oracle_visible(world: &solomid_core::sim::WorldState, team: Team, at: solomid_core::geometry::Point) -> bool {
    let mut sources = Vec::new();
    for h in &world.heroes {
        sources.push(&h.unit);
    }
    for t in &world.towers {
        sources.push(&t.unit);
    }
    for f in &world.forts {
        sources.push(&f.unit);
    }
    for c in &world.couriers {
        sources.push(&c.unit);
    }
    for c in &world.creeps {
        sources.push(&c.unit);
    }
    sources.into_iter().any(|u| {
        u.team == team && u.health > 0 && {
            let dx = u.position.x - at.x;
            let dy = u.position.y - at.y;
            (dx * dx + dy * dy).sqrt() <= u.vision
        }
    })
}

pub fn wait_for(mut cond: impl FnMut() -> bool, limit: Duration) -> bool {
    let start = Instant::now();
    while start.elapsed() < limit {
        if cond() {
            return true;
        }
        thread::sleep(Duration::from_millis(5));
    }
    cond()
}

pub type Reply = dyn Fn(&str, &[u8]) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server answering with whatever `reply` returns for the
/// request path and body. For bots that misbehave on the wire.
pub struct RawBot {
    pub addr: std::net::SocketAddr,
}

impl RawBot {
    pub fn start<F>(reply: F) -> RawBot
    where
        F: Fn(&str, &[u8]) -> (u16, String) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let reply = Arc::new(reply);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let reply = reply.clone();
                thread::spawn(move || serve_raw(stream, &*reply));
            }
        });
        RawBot { addr }
    }

    pub fn url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    pub fn endpoints(&self) -> EndpointConfig {
        EndpointConfig::from_base_url(&self.url()).unwrap()
    }
}

fn serve_raw(mut stream: TcpStream, reply: &Reply) {
    let _ = stream.set_nodelay(true);
    let mut buf = Vec::new();
    let mut chunk = [0u8; 8192];
    loop {
        let head_end = loop {
            if let Some(i) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                break i + 4;
            }
            match stream.read(&mut chunk) {
                Ok(0) | Err(_) => return,
                Ok(n) => buf.extend_from_slice(&chunk[..n]),
            }
        };
        let head = String::from_utf8_lossy(&buf[..head_end]).to_string();
        let path = head.split_whitespace().nth(1).unwrap_or("/").to_string();
        let length = head
            .lines()
            .find_map(|l| {
                let (k, v) = l.split_once(':')?;
                k.eq_ignore_ascii_case("content-length").then(|| v.trim().parse::<usize>().ok())?
            })
            .unwrap_or(0);
        while buf.len() < head_end + length {
            match stream.read(&mut chunk) {
                Ok(0) | Err(_) => return,
                Ok(n) => buf.extend_from_slice(&chunk[..n]),
            }
        }
        let body: Vec<u8> = buf[head_end..head_end + length].to_vec();
        buf.drain(..head_end + length);
        let (status, text) = reply(&path, &body);
        let response = format!(
            "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{text}",
            text.len()
        );
        if stream.write_all(response.as_bytes()).is_err() {
            return;
        }
    }
}

pub fn endpoint_of(path: &str) -> &str {
    path.trim_end_matches('/').rsplit('/').next().unwrap_or("")
}
