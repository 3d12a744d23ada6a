use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solomid_core::builtin::{builtin_decide, BuiltinPersonality, BuiltinState, PersonalityKind};
use solomid_core::geometry::Point;
use solomid_core::protocol::{
    decode_entity_snapshot, encode_entity_snapshot, BotCommand, EntityId, Team, Vec3,
};
use solomid_core::sim::{init_world, MatchConfig, WorldState};

const HEROES: [&str; 4] =
    ["npc_dota_hero_lina", "npc_dota_hero_sven", "npc_dota_hero_drow_ranger", "npc_dota_hero_omniknight"];

fn visible_to(world: &WorldState, team: Team, at: Point) -> bool {
    let heroes = world.heroes.iter().map(|h| &h.unit);
    let towers = world.towers.iter().map(|t| &t.unit);
    let forts = world.forts.iter().map(|f| &f.unit);
    let couriers = world.couriers.iter().map(|c| &c.unit);
    let creeps = world.creeps.iter().map(|c| &c.unit);
    heroes
        .chain(towers)
        .chain(forts)
        .chain(couriers)
        .chain(creeps)
        .any(|u| u.team == team && u.health > 0 && u.position.distance(at) <= u.vision)
}

/// Random junk: legal or not, the world has to cope.
fn random_command(rng: &mut ChaCha8Rng) -> BotCommand {
    match rng.random_range(0..6) {
        0 => BotCommand::Noop,
        1 => BotCommand::Move {
            target: Vec3::new(rng.random_range(-9000.0..9000.0), rng.random_range(-9000.0..9000.0), 0.0),
        },
        2 => BotCommand::Attack { target: EntityId(rng.random_range(0..400)) },
        3 => BotCommand::Cast { ability: rng.random_range(0..6), target: EntityId(rng.random_range(0..400)) },
        4 => BotCommand::Buy { item: ["item_tango", "item_flask", "item_nope"][rng.random_range(0..3)].into() },
        _ => BotCommand::Sell { slot: rng.random_range(0..8) },
    }
}

struct Side {
    personality: BuiltinPersonality,
    state: BuiltinState,
}

fn run(seed: u64, radiant: &str, dire: &str, ticks: u64, chaos: f64, mut each: impl FnMut(&WorldState)) -> WorldState {
    let mut world = init_world(&MatchConfig::new(radiant, dire), seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut sides: Vec<Side> = [(Team::Radiant, radiant), (Team::Dire, dire)]
        .into_iter()
        .enumerate()
        .map(|(i, (team, hero))| Side {
            personality: BuiltinPersonality::new(
                [PersonalityKind::Aggressive, PersonalityKind::Laner][(seed as usize + i) % 2],
                hero,
            ),
            state: BuiltinState::new(team, world.rules.clone()),
        })
        .collect();
    for _ in 0..ticks {
        if world.outcome.is_some() {
            break;
        }
        for (side, team) in sides.iter_mut().zip([Team::Radiant, Team::Dire]) {
            let cmd = if rng.random_bool(chaos) {
                random_command(&mut rng)
            } else {
                builtin_decide(&world.visible_snapshot(team), &side.personality, &mut side.state, &mut rng)
            };
            let _ = world.submit_order(team, cmd);
        }
        world.step().unwrap();
        each(&world);
    }
    world
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn world_invariants_hold(seed in any::<u64>(), r in 0usize..4, d in 0usize..4, chaos in 0.0f64..0.5) {
        let mut failure = None;
        run(seed, HEROES[r], HEROES[d], 2500, chaos, |w| {
            if failure.is_some() {
                return;
            }
            for u in w.units() {
                let u = u.core();
                if u.health > u.max_health {
                    failure = Some(format!("tick {}: {} health {} > {}", w.tick, u.name, u.health, u.max_health));
                }
                if u.position.x < w.rules.map.min || u.position.x > w.rules.map.max
                    || u.position.y < w.rules.map.min || u.position.y > w.rules.map.max
                {
                    failure = Some(format!("tick {}: {} left the map", w.tick, u.name));
                }
            }
            for h in &w.heroes {
                if h.mana < 0.0 || h.mana > f64::from(h.max_mana) + 1e-9 {
                    failure = Some(format!("tick {}: mana {} of {}", w.tick, h.mana, h.max_mana));
                }
                if h.unit.alive() == h.respawn_at.is_some() {
                    failure = Some(format!("tick {}: {} alive={} respawn={:?}", w.tick, h.unit.name, h.unit.alive(), h.respawn_at));
                }
            }
            for team in [Team::Radiant, Team::Dire] {
                let snap = w.visible_snapshot(team);
                for e in snap.iter() {
                    if e.alive != (e.health > 0) {
                        failure = Some(format!("tick {}: entity {} alive={} health={}", w.tick, e.id, e.alive, e.health));
                    }
                    if e.team != team && !visible_to(w, team, e.position()) {
                        failure = Some(format!("tick {}: {} sees hidden {}", w.tick, team.tag(), e.id));
                    }
                    if e.team != team && e.gold.is_some() {
                        failure = Some(format!("tick {}: gold of {} leaked", w.tick, e.id));
                    }
                }
                let own = w.hero(team);
                if own.unit.alive() != snap.own_hero().is_some() {
                    failure = Some(format!("tick {}: own hero presence wrong", w.tick));
                }
            }
        });
        prop_assert!(failure.is_none(), "{}", failure.unwrap());
    }

    #[test]
    fn snapshots_survive_the_wire(seed in any::<u64>(), ticks in 0u64..1500) {
        let w = run(seed, HEROES[0], HEROES[1], ticks, 0.2, |_| {});
        for team in [Team::Radiant, Team::Dire] {
            let snap = w.visible_snapshot(team);
            let text = encode_entity_snapshot(&snap).unwrap();
            let back = decode_entity_snapshot(text.as_bytes()).unwrap();
            prop_assert_eq!(&back, &snap);
            prop_assert_eq!(encode_entity_snapshot(&back).unwrap(), text);
        }
    }

    #[test]
    fn same_seed_same_match(seed in any::<u64>(), chaos in 0.0f64..0.3) {
        let a = run(seed, HEROES[1], HEROES[2], 1200, chaos, |_| {});
        let b = run(seed, HEROES[1], HEROES[2], 1200, chaos, |_| {});
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_eq!(a.tick, b.tick);
    }
}

#[test]
fn seeds_change_the_match() {
    let a = run(1, HEROES[0], HEROES[1], 900, 0.1, |_| {});
    let b = run(2, HEROES[0], HEROES[1], 900, 0.1, |_| {});
    assert_ne!(a.digest(), b.digest());
}
