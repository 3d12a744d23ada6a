use super::units::{UnitCore, UnitRef};
use super::{WorldState, DT};
use crate::protocol::{
    AbilityRecord, EntityKind, EntityRecord, EntitySnapshot, ItemRecord, Team, Vec3,
};

impl WorldState {
    /// Own units are always visible; an enemy is visible while it stands
    /// within the vision radius of some living allied unit or building.
    pub fn is_visible_to(&self, team: Team, target: &UnitCore) -> bool {
        target.team == team
            || self.units().any(|u| {
                let ally = u.core();
                ally.team == team
                    && ally.alive()
                    && ally.position.distance(target.position) <= ally.vision
            })
    }

    /// What `team` perceives this tick: all of its living units plus the
    /// enemies it can see. Dead heroes are left out.
    pub fn visible_snapshot(&self, team: Team) -> EntitySnapshot {
        let mut snapshot = EntitySnapshot {
            tick: self.tick,
            clock: self.clock(),
            ..Default::default()
        };
        for unit in self.units() {
            let core = unit.core();
            if core.alive() && self.is_visible_to(team, core) {
                snapshot.insert(self.entity_record(unit, team));
            }
        }
        snapshot
    }

    fn entity_record(&self, unit: UnitRef<'_>, observer: Team) -> EntityRecord {
        let core = unit.core();
        let p = core.position;
        let mut record = EntityRecord {
            id: core.id,
            kind: unit.kind(),
            name: core.name.clone(),
            team: core.team,
            level: core.level,
            health: core.health,
            mana: 0.0,
            alive: core.alive(),
            attack_range: 0.0,
            origin: Vec3::new(p.x, p.y, self.rules.map.ground_z),
            blind: false,
            disarmed: false,
            dominated: false,
            rooted: core.stunned(),
            deniable: false,
            gold: None,
            abilities: None,
            items: None,
        };
        match unit {
            UnitRef::Hero(hero) => {
                record.mana = hero.mana;
                record.attack_range = hero.weapon.range;
                if core.team == observer {
                    record.gold = Some(hero.gold);
                }
                record.abilities = Some(
                    hero.abilities
                        .iter()
                        .map(|a| AbilityRecord {
                            slot: a.slot,
                            name: a.name.clone(),
                            level: a.level,
                            cooldown_remaining: f64::from(a.cooldown_ticks) * DT,
                        })
                        .collect(),
                );
                record.items = Some(
                    hero.items
                        .iter()
                        .enumerate()
                        .filter_map(|(slot, s)| {
                            s.as_ref().map(|s| ItemRecord {
                                slot: slot as u32,
                                name: s.name.clone(),
                                charges: s.charges,
                            })
                        })
                        .collect(),
                );
            }
            UnitRef::Tower(tower) => {
                record.attack_range = tower.weapon.range;
                record.deniable = core.health * 10 < core.max_health;
            }
            UnitRef::Creep(creep) => {
                record.attack_range = creep.weapon.range;
                record.deniable = core.health * 2 < core.max_health;
            }
            UnitRef::Courier(_) | UnitRef::Fort(_) => {}
        }
        debug_assert_eq!(record.kind == EntityKind::Hero, record.abilities.is_some());
        record
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::geometry::Point;
    use crate::protocol::EntityKind;

    fn world() -> WorldState {
        init_world(&MatchConfig::new("npc_dota_hero_lina", "npc_dota_hero_sven"), 7).unwrap()
    }

    #[test]
    fn bases_are_out_of_sight_at_start() {
        let w = world();
        let snap = w.visible_snapshot(Team::Radiant);
        assert!(snap.iter().all(|e| e.team == Team::Radiant));
        assert_eq!(snap.iter().count(), 4);
        let own = snap.own_hero().unwrap();
        assert_eq!(own.name, "npc_dota_hero_lina");
        assert_eq!(own.gold, Some(600));
    }

    #[test]
    fn dead_hero_still_sees_buildings() {
        let mut w = world();
        w.hero_mut(Team::Radiant).unit.health = 0;
        w.hero_mut(Team::Dire).unit.position = Point::new(0.0, 0.0);
        let snap = w.visible_snapshot(Team::Radiant);
        let kinds: Vec<_> = snap.iter().map(|e| e.kind).collect();
        assert!(kinds.contains(&EntityKind::Tower));
        assert!(kinds.contains(&EntityKind::Courier));
        assert!(kinds.contains(&EntityKind::Building));
        assert!(!kinds.contains(&EntityKind::Hero));
    }

    #[test]
    fn pushing_hero_sees_enemy_tower() {
        let mut w = world();
        let tower = w.tower(Team::Dire).unit.clone();
        let vision = w.hero(Team::Radiant).unit.vision;
        w.hero_mut(Team::Radiant).unit.position = Point::new(tower.position.x - vision + 1.0, tower.position.y);
        let snap = w.visible_snapshot(Team::Radiant);
        let seen = snap.get(tower.id).expect("tower visible");
        assert_eq!(seen.team, Team::Dire);
        assert_eq!(seen.attack_range, 700.0);
        w.hero_mut(Team::Radiant).unit.position = Point::new(tower.position.x - vision - 1.0, tower.position.y);
        // Radiant's own tower at (-1200,-1200) is too far to help.
        assert!(w.visible_snapshot(Team::Radiant).get(tower.id).is_none());
    }

    #[test]
    fn enemy_hero_has_no_gold() {
        let mut w = world();
        w.hero_mut(Team::Dire).unit.position = Point::new(-6000.0, -6000.0);
        let snap = w.visible_snapshot(Team::Radiant);
        let enemy = snap.get(w.hero(Team::Dire).unit.id).unwrap();
        assert_eq!(enemy.gold, None);
        assert!(enemy.abilities.is_some());
        assert_eq!(snap.own_hero().unwrap().team, Team::Radiant);
    }
}
