mod common;

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use common::*;
use serde_json::Value;
use solomid_arena::botkit::NoopBot;
use solomid_arena::gateway::{
    run_match, BotOutcome, InjectError, MatchDriver, Mode, ResultReason, ScheduledChat,
};
use solomid_core::builtin::PersonalityKind;
use solomid_core::protocol::{BotCommand, ChatEvent, EndpointConfig, Team};

const SELECT_LINA: &str = r#"{"hero":"npc_dota_hero_lina","command":"SELECT"}"#;

fn short(seed: u64, ticks: u64) -> solomid_arena::gateway::MatchSettings {
    let mut s = settings(seed, SVEN, PersonalityKind::Passive);
    s.max_ticks = ticks;
    s
}

fn read_log(path: &std::path::Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn slow_replies_only_warn() {
    let bot = RawBot::start(|path, _| {
        thread::sleep(Duration::from_millis(40));
        match endpoint_of(path) {
            "select" => (200, SELECT_LINA.into()),
            _ => (200, r#"{"command":"NOOP"}"#.into()),
        }
    });
    let mut s = short(0, 4);
    s.soft_timeout = Some(Duration::from_millis(10));
    let r = run_match(bot.endpoints(), s);
    assert_eq!(r.reason, ResultReason::Timeout);
    assert_eq!(r.ticks, 4);
    assert_eq!(r.warning_count, 5, "select plus four updates");
    assert_eq!(r.protocol_error_count, 0);
    assert_eq!(r.transport_failure_count, 0);
}

#[test]
fn unreachable_bot_forfeits_at_select() {
    let addr = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let endpoints = EndpointConfig::from_base_url(&format!("http://{addr}/")).unwrap();
    let r = run_match(endpoints, short(0, 100));
    assert_eq!(r.reason, ResultReason::Forfeit);
    assert_eq!(r.winner, Some(Team::Dire));
    assert_eq!(r.bot_outcome(), BotOutcome::Forfeit);
    assert_eq!(r.ticks, 0);
    assert_eq!(r.bot_hero, None);
}

#[test]
fn unknown_hero_forfeits() {
    let bot = RawBot::start(|_, _| (200, r#"{"hero":"npc_dota_hero_pudge","command":"SELECT"}"#.into()));
    let r = run_match(bot.endpoints(), short(0, 100));
    assert_eq!(r.reason, ResultReason::Forfeit);
    assert_eq!(r.protocol_error_count, 1);
}

#[test]
fn malformed_reply_becomes_noop() {
    let dir = tempfile::tempdir().unwrap();
    let bot = RawBot::start(|path, _| match endpoint_of(path) {
        "select" => (200, SELECT_LINA.into()),
        _ => (200, "MOVE north please".into()),
    });
    let mut s = short(0, 5);
    s.log_path = Some(dir.path().join("m.jsonl"));
    let r = run_match(bot.endpoints(), s);
    assert_eq!(r.reason, ResultReason::Timeout);
    assert_eq!(r.protocol_error_count, 5);
    assert_eq!(r.transport_failure_count, 0);
    let log = read_log(&dir.path().join("m.jsonl"));
    assert_eq!(log.len(), 5);
    for (i, rec) in log.iter().enumerate() {
        assert_eq!(rec["tick"], i as u64);
        assert_eq!(rec["command"]["command"], "NOOP");
        assert!(rec["errors"][0].as_str().unwrap().starts_with("protocol"));
        assert!(rec["sentBytes"].as_u64().unwrap() > 0);
        assert!(rec["replyLatencyMs"].is_number());
    }
}

#[test]
fn illegal_orders_are_rejected_not_protocol_errors() {
    let bot = RawBot::start(|path, _| match endpoint_of(path) {
        "select" => (200, SELECT_LINA.into()),
        _ => (200, r#"{"target":987654,"command":"ATTACK"}"#.into()),
    });
    let r = run_match(bot.endpoints(), short(0, 6));
    assert_eq!(r.rejected_count, 6);
    assert_eq!(r.protocol_error_count, 0);
}

#[test]
fn failed_update_streak_forfeits() {
    let bot = RawBot::start(|path, _| match endpoint_of(path) {
        "select" => (200, SELECT_LINA.into()),
        _ => (500, "{}".into()),
    });
    let mut s = short(0, 1000);
    s.forfeit_after = 10;
    let r = run_match(bot.endpoints(), s);
    assert_eq!(r.reason, ResultReason::Forfeit);
    assert_eq!(r.bot_outcome(), BotOutcome::Forfeit);
    assert_eq!(r.ticks, 10);
    assert_eq!(r.transport_failure_count, 10);
}

#[test]
fn one_good_reply_resets_the_streak() {
    let count = std::sync::atomic::AtomicUsize::new(0);
    let bot = RawBot::start(move |path, _| match endpoint_of(path) {
        "select" => (200, SELECT_LINA.into()),
        _ => {
            let n = count.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            if n % 3 == 2 {
                (200, r#"{"command":"NOOP"}"#.into())
            } else {
                (503, "{}".into())
            }
        }
    });
    let mut s = short(0, 60);
    s.forfeit_after = 3;
    let r = run_match(bot.endpoints(), s);
    assert_eq!(r.reason, ResultReason::Timeout);
    assert_eq!(r.transport_failure_count, 40);
}

#[test]
fn chat_failures_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let bot = RawBot::start(|path, _| match endpoint_of(path) {
        "select" => (200, SELECT_LINA.into()),
        "chat" => (500, "boom".into()),
        _ => (200, r#"{"command":"NOOP"}"#.into()),
    });
    let mut s = short(0, 5);
    s.log_path = Some(dir.path().join("m.jsonl"));
    s.chat = vec![ScheduledChat {
        tick: 2,
        event: ChatEvent { team_only: false, text: "hi".into(), player: 6 },
    }];
    let r = run_match(bot.endpoints(), s);
    assert_eq!(r.reason, ResultReason::Timeout);
    assert_eq!(r.ticks, 5);
    assert_eq!(r.protocol_error_count, 0);
    let log = read_log(&dir.path().join("m.jsonl"));
    assert!(log[2]["errors"][0].as_str().unwrap().starts_with("chat"));
    assert!(log[2].get("chat").is_none_or(|c| c.as_array().unwrap().is_empty()));
}

#[test]
fn team_chat_reaches_only_its_team() {
    let (service, endpoints) = start(Recording::new(NoopBot { hero: LINA.into() }));
    let mut s = short(0, 3);
    let say = |team_only, player, text: &str| ScheduledChat {
        tick: 1,
        event: ChatEvent { team_only, text: text.into(), player },
    };
    s.chat = vec![say(true, 6, "dire team"), say(false, 7, "dire all"), say(true, 1, "radiant team")];
    run_match(endpoints, s);
    let texts: Vec<String> = service.handler().chats.iter().map(|c| c.text.clone()).collect();
    assert_eq!(texts, ["dire all", "radiant team"]);
}

#[test]
fn chat_arrives_before_the_same_tick_update() {
    let order = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
    let seen = order.clone();
    let bot = RawBot::start(move |path, body| {
        let name = endpoint_of(path).to_string();
        if name == "update" {
            let v: Value = serde_json::from_slice(body).unwrap();
            seen.lock().unwrap().push(format!("update {}", v["tick"]));
        } else if name == "chat" {
            seen.lock().unwrap().push("chat".into());
        }
        match name.as_str() {
            "select" => (200, SELECT_LINA.into()),
            "chat" => (200, "{}".into()),
            _ => (200, r#"{"command":"NOOP"}"#.into()),
        }
    });
    let mut s = short(0, 4);
    s.chat = vec![ScheduledChat { tick: 2, event: ChatEvent { team_only: true, text: "x".into(), player: 2 } }];
    run_match(bot.endpoints(), s);
    assert_eq!(*order.lock().unwrap(), ["update 0", "update 1", "chat", "update 2", "update 3"]);
}

#[test]
fn injected_chat_is_delivered_and_refused_after_the_end() {
    let (service, endpoints) = start(Recording::new(NoopBot { hero: LINA.into() }));
    let driver = MatchDriver::new(endpoints, short(0, 3));
    let handle = driver.handle();
    handle.inject_chat(ChatEvent { team_only: true, text: "early".into(), player: 0 }).unwrap();
    assert!(!handle.is_finished());
    driver.run();
    assert!(handle.is_finished());
    let late = handle.inject_chat(ChatEvent { team_only: true, text: "late".into(), player: 0 });
    assert!(matches!(late, Err(InjectError::MatchFinished)));
    let chats = &service.handler().chats;
    assert_eq!(chats.len(), 1);
    assert_eq!(chats[0].text, "early");
}

#[test]
fn idle_bot_loses_to_aggressive() {
    let (_service, endpoints) = start(NoopBot { hero: LINA.into() });
    let r = run_match(endpoints, settings(0, SVEN, PersonalityKind::Aggressive));
    assert_eq!(r.reason, ResultReason::TowerDestroyed);
    assert_eq!(r.bot_outcome(), BotOutcome::Loss);
    assert_eq!(r.winner, Some(Team::Dire));
    assert_eq!(r.protocol_error_count, 0);
}

#[test]
fn bot_can_play_dire() {
    let (service, endpoints) = start(Recording::new(NoopBot { hero: LINA.into() }));
    let mut s = short(3, 5);
    s.bot_team = Team::Dire;
    let r = run_match(endpoints, s);
    assert_eq!(r.bot_team, Team::Dire);
    let bot = service.handler();
    let me = bot.snapshots[0].own_hero().unwrap();
    assert_eq!(me.team, Team::Dire);
    assert_eq!(me.name, LINA);
}

#[test]
fn realtime_and_fast_agree() {
    let script: Vec<BotCommand> = (0..60)
        .map(|i| BotCommand::Move {
            target: solomid_core::protocol::Vec3::new(-6000.0 + 40.0 * i as f64, -6200.0, 128.0),
        })
        .collect();
    let mut digests = Vec::new();
    for mode in [Mode::Fast, Mode::Realtime] {
        let (_service, endpoints) = start(Script::new(script.clone()));
        let mut s = settings(11, SVEN, PersonalityKind::Aggressive);
        s.max_ticks = 60;
        s.mode = mode;
        digests.push(run_match(endpoints, s).final_digest);
    }
    assert_eq!(digests[0], digests[1]);
}
