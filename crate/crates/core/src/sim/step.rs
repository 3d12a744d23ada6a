use super::units::{CourierRoute, CreepKind, CreepState, Projectile, UnitRef, Weapon};
use super::{seconds_to_ticks, step_length, OrderRejection, SimError, WorldState, TICKS_PER_SECOND};
use crate::data::AbilityKind;
use crate::geometry::Point;
use crate::protocol::{BotCommand, EntityId, EntityKind, Team};

/// Things that happened during one tick and are resolved at its end.
#[derive(Default)]
struct TickEvents {
    /// (victim, killer)
    deaths: Vec<(EntityId, EntityId)>,
    /// (attacking hero, victim hero)
    hero_aggression: Vec<(EntityId, EntityId)>,
}

enum HeroAction {
    Idle,
    Complete,
    Walk(Point),
    Fire { target: EntityId },
    Cast { slot: u32, target: EntityId },
}

impl WorldState {
    /// Advance exactly one tick.
    pub fn step(&mut self) -> Result<(), SimError> {
        if self.outcome.is_some() {
            return Err(SimError::IllegalState);
        }
        let mut events = TickEvents::default();
        self.tick_timers();
        for team in Team::BOTH {
            self.hero_act(team, &mut events);
        }
        self.towers_act(&mut events);
        self.creeps_act(&mut events);
        self.advance_projectiles(&mut events);
        self.couriers_act();
        self.resolve_deaths(&events);

        self.tick += 1;
        self.respawn_heroes();
        if self.tick.is_multiple_of(TICKS_PER_SECOND) {
            self.per_second();
        }
        if self.is_wave_boundary(self.tick) {
            self.spawn_creep_wave();
        }
        self.outcome = self.check_terminal();
        Ok(())
    }

    fn tick_timers(&mut self) {
        for hero in &mut self.heroes {
            hero.unit.stun_ticks = hero.unit.stun_ticks.saturating_sub(1);
            hero.weapon.cooldown_ticks = hero.weapon.cooldown_ticks.saturating_sub(1);
            for ability in &mut hero.abilities {
                ability.cooldown_ticks = ability.cooldown_ticks.saturating_sub(1);
            }
            if !hero.alive() {
                continue;
            }
            let max = f64::from(hero.max_mana);
            hero.mana = (hero.mana + step_length(hero.mana_regen)).min(max);
            let mut healed = 0;
            for hot in &mut hero.heals {
                healed += hot.advance();
            }
            hero.heals.retain(|h| !h.finished());
            hero.unit.heal(healed);
        }
        for tower in &mut self.towers {
            tower.weapon.cooldown_ticks = tower.weapon.cooldown_ticks.saturating_sub(1);
        }
        for creep in &mut self.creeps {
            creep.unit.stun_ticks = creep.unit.stun_ticks.saturating_sub(1);
            creep.weapon.cooldown_ticks = creep.weapon.cooldown_ticks.saturating_sub(1);
        }
    }

    fn damage(&mut self, target: EntityId, amount: u32, source: EntityId, events: &mut TickEvents) {
        if let Some(unit) = self.unit_core_mut(target) {
            if unit.take_damage(amount) {
                events.deaths.push((target, source));
            }
        }
    }

    /// Melee hits land now; ranged attacks launch a projectile.
    fn fire(
        &mut self,
        source: EntityId,
        team: Team,
        from: Point,
        weapon: &Weapon,
        target: EntityId,
        events: &mut TickEvents,
    ) {
        match weapon.projectile_speed {
            Some(speed) => self.projectiles.push(Projectile {
                source,
                team,
                target,
                position: from,
                speed,
                damage: weapon.damage,
            }),
            None => self.damage(target, weapon.damage, source, events),
        }
    }

    fn plan_hero(&self, team: Team) -> HeroAction {
        let hero = self.hero(team);
        if !hero.alive() || hero.unit.stunned() {
            return HeroAction::Idle;
        }
        let Some(order) = &hero.order else {
            return HeroAction::Idle;
        };
        let pos = hero.unit.position;
        let stride = step_length(hero.move_speed);
        // Walk toward `to` but stop once within `range` of it.
        let approach = |to: Point, range: f64| {
            let gap = pos.distance(to) - range;
            HeroAction::Walk(pos.step_toward(to, stride.min(gap.max(0.0))))
        };
        match &order.command {
            BotCommand::Move { target } => HeroAction::Walk(pos.step_toward(target.ground(), stride)),
            BotCommand::Attack { target } => {
                if self.validate_attack(team, *target).is_err() {
                    return HeroAction::Complete;
                }
                let to = self.unit(*target).expect("validated").core().position;
                if pos.distance(to) > hero.weapon.range {
                    approach(to, hero.weapon.range)
                } else if hero.weapon.ready() {
                    HeroAction::Fire { target: *target }
                } else {
                    HeroAction::Idle
                }
            }
            BotCommand::Cast { ability, target } => match self.validate_cast(team, *ability, *target) {
                Ok(()) => HeroAction::Cast { slot: *ability, target: *target },
                Err(OrderRejection::OutOfRange { range, .. }) => {
                    let to = self.unit(*target).expect("validated").core().position;
                    approach(to, range)
                }
                Err(_) => HeroAction::Complete,
            },
            _ => HeroAction::Complete,
        }
    }

    fn hero_act(&mut self, team: Team, events: &mut TickEvents) {
        match self.plan_hero(team) {
            HeroAction::Idle => {}
            HeroAction::Complete => self.hero_mut(team).order = None,
            HeroAction::Walk(to) => {
                let hero = self.hero_mut(team);
                hero.unit.position = to;
                let arrived = matches!(
                    &hero.order,
                    Some(o) if matches!(&o.command, BotCommand::Move { target } if target.ground() == to)
                );
                if arrived {
                    hero.order = None;
                }
            }
            HeroAction::Fire { target } => {
                let hero = self.hero_mut(team);
                hero.weapon.cooldown_ticks = hero.weapon.interval_ticks;
                let (id, pos, weapon) = (hero.unit.id, hero.unit.position, hero.weapon.clone());
                if self.hero_team_by_id(target).is_some() {
                    events.hero_aggression.push((id, target));
                }
                self.fire(id, team, pos, &weapon, target, events);
            }
            HeroAction::Cast { slot, target } => {
                self.cast(team, slot, target, events);
                self.hero_mut(team).order = None;
            }
        }
    }

    fn cast(&mut self, team: Team, slot: u32, target: EntityId, events: &mut TickEvents) {
        let rules = std::sync::Arc::clone(&self.rules);
        let hero = self.hero_mut(team);
        let def = rules.hero_def(&hero.unit.name).ability(slot).expect("validated cast");
        let level = hero.ability(slot).expect("validated cast").level;
        hero.mana -= f64::from(def.mana_at(level));
        hero.ability_mut(slot).expect("validated cast").cooldown_ticks =
            seconds_to_ticks(def.cooldown_at(level));
        let caster = hero.unit.id;
        let amount = def.damage_at(level);
        match def.kind {
            AbilityKind::Heal => {
                if let Some(unit) = self.unit_core_mut(target) {
                    unit.heal(amount);
                }
            }
            AbilityKind::Nuke => {
                if self.hero_team_by_id(target).is_some() {
                    events.hero_aggression.push((caster, target));
                }
                self.damage(target, amount, caster, events);
            }
            AbilityKind::Stun => {
                let center = self.unit(target).expect("validated cast").core().position;
                let stun = seconds_to_ticks(def.stun);
                let victims: Vec<(EntityId, bool)> = self
                    .units()
                    .filter(|u| matches!(u.kind(), EntityKind::Hero | EntityKind::Creep))
                    .map(|u| (u.core(), matches!(u, UnitRef::Hero(_))))
                    .filter(|(c, _)| c.team != team && c.alive())
                    .filter(|(c, _)| c.position.distance(center) <= def.radius)
                    .map(|(c, is_hero)| (c.id, is_hero))
                    .collect();
                for (id, is_hero) in victims {
                    if is_hero {
                        events.hero_aggression.push((caster, id));
                    }
                    self.damage(id, amount, caster, events);
                    if let Some(unit) = self.unit_core_mut(id) {
                        unit.stun_ticks = unit.stun_ticks.max(stun);
                    }
                }
            }
            AbilityKind::Passive => unreachable!("passives are rejected at validation"),
        }
    }

    /// Nearest living enemy of `team` within `range` of `from` among units of
    /// `kind`; ties go to the lower id.
    fn nearest_enemy(&self, team: Team, from: Point, range: f64, kind: EntityKind) -> Option<EntityId> {
        self.units()
            .filter(|u| u.kind() == kind && u.attackable() && u.core().team != team)
            .map(|u| (u.core().position.distance(from), u.core().id))
            .filter(|(d, _)| *d <= range)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }

    fn target_in_reach(&self, team: Team, from: Point, target: EntityId, reach: f64) -> bool {
        self.unit(target).is_some_and(|u| {
            u.attackable() && u.core().team != team && u.core().position.distance(from) <= reach
        })
    }

    fn towers_act(&mut self, events: &mut TickEvents) {
        for team in Team::BOTH {
            let tower = &self.towers[team.index()];
            if !tower.unit.alive() {
                continue;
            }
            let pos = tower.unit.position;
            let range = tower.weapon.range;
            // Attacking a hero under the tower draws its fire.
            let aggro = events.hero_aggression.iter().find_map(|&(attacker, victim)| {
                let defended = self.hero_team_by_id(victim) == Some(team);
                (defended && self.target_in_reach(team, pos, attacker, range)).then_some(attacker)
            });
            let target = aggro
                .or(tower.target.filter(|&t| self.target_in_reach(team, pos, t, range)))
                .or_else(|| self.nearest_enemy(team, pos, range, EntityKind::Creep))
                .or_else(|| self.nearest_enemy(team, pos, range, EntityKind::Hero));
            let tower = &mut self.towers[team.index()];
            tower.target = target;
            if let Some(target) = target {
                if tower.weapon.ready() {
                    tower.weapon.cooldown_ticks = tower.weapon.interval_ticks;
                    let (id, weapon) = (tower.unit.id, tower.weapon.clone());
                    self.fire(id, team, pos, &weapon, target, events);
                }
            }
        }
    }

    fn creeps_act(&mut self, events: &mut TickEvents) {
        for i in 0..self.creeps.len() {
            let creep = &self.creeps[i];
            if !creep.unit.alive() || creep.unit.stunned() {
                continue;
            }
            let team = creep.unit.team;
            let pos = creep.unit.position;
            let acquire = creep.acquisition_range;
            let reach = acquire + creep.weapon.range;
            let target = creep
                .target
                .filter(|&t| self.target_in_reach(team, pos, t, reach))
                .or_else(|| self.nearest_enemy(team, pos, acquire, EntityKind::Creep))
                .or_else(|| self.nearest_enemy(team, pos, acquire, EntityKind::Tower))
                .or_else(|| self.nearest_enemy(team, pos, acquire, EntityKind::Hero));
            let stride = step_length(creep.move_speed);
            let path = self.rules.map.lane_path(team);

            self.creeps[i].target = target;
            let next = match target {
                Some(target) => {
                    let to = self.unit(target).expect("acquired").core().position;
                    let gap = pos.distance(to) - self.creeps[i].weapon.range;
                    if gap <= 0.0 {
                        let creep = &mut self.creeps[i];
                        if creep.weapon.ready() {
                            creep.weapon.cooldown_ticks = creep.weapon.interval_ticks;
                            let (id, weapon) = (creep.unit.id, creep.weapon.clone());
                            self.fire(id, team, pos, &weapon, target, events);
                        }
                        continue;
                    }
                    pos.step_toward(to, stride.min(gap))
                }
                None => {
                    let creep = &mut self.creeps[i];
                    let mut wp = creep.waypoint.min(path.len() - 1);
                    while wp + 1 < path.len()
                        && (pos.distance(path[wp]) <= stride
                            || pos.distance(path[wp + 1]) < path[wp].distance(path[wp + 1]))
                    {
                        wp += 1;
                    }
                    creep.waypoint = wp;
                    pos.step_toward(path[wp], stride)
                }
            };
            self.creeps[i].unit.position = self.rules.corridor.closest_point(next);
        }
    }

    fn advance_projectiles(&mut self, events: &mut TickEvents) {
        let projectiles = std::mem::take(&mut self.projectiles);
        let mut in_flight = Vec::with_capacity(projectiles.len());
        for mut p in projectiles {
            let Some(to) = self
                .unit(p.target)
                .filter(|u| u.core().alive())
                .map(|u| u.core().position)
            else {
                continue;
            };
            let stride = step_length(p.speed);
            if p.position.distance(to) <= stride {
                self.damage(p.target, p.damage, p.source, events);
            } else {
                p.position = p.position.step_toward(to, stride);
                in_flight.push(p);
            }
        }
        self.projectiles = in_flight;
    }

    fn couriers_act(&mut self) {
        let handoff = self.rules.balance.courier.handoff_range;
        for team in Team::BOTH {
            let base = self.rules.base(team);
            let hero_alive = self.hero(team).alive();
            let hero_pos = self.hero(team).unit.position;
            let courier = &mut self.couriers[team.index()];
            let stride = step_length(courier.move_speed);
            match courier.route {
                CourierRoute::Idle => {
                    if hero_alive && !courier.queue.is_empty() {
                        courier.carrying = std::mem::take(&mut courier.queue);
                        courier.route = CourierRoute::Delivering;
                    }
                }
                CourierRoute::Delivering => {
                    if !hero_alive {
                        courier.route = CourierRoute::Returning;
                        continue;
                    }
                    courier.unit.position = courier.unit.position.step_toward(hero_pos, stride);
                    if courier.unit.position.distance(hero_pos) <= handoff {
                        let mut carrying = std::mem::take(&mut courier.carrying);
                        courier.route = CourierRoute::Returning;
                        let hero = &mut self.heroes[team.index()];
                        carrying.retain(|item| match hero.free_slot() {
                            Some(slot) => {
                                hero.items[slot] = Some(item.clone());
                                false
                            }
                            None => true,
                        });
                        self.couriers[team.index()].carrying = carrying;
                    }
                }
                CourierRoute::Returning => {
                    courier.unit.position = courier.unit.position.step_toward(base, stride);
                    if courier.unit.position == base {
                        let mut leftovers = std::mem::take(&mut courier.carrying);
                        leftovers.append(&mut courier.queue);
                        courier.queue = leftovers;
                        courier.route = CourierRoute::Idle;
                    }
                }
            }
        }
    }

    fn resolve_deaths(&mut self, events: &TickEvents) {
        let rules = std::sync::Arc::clone(&self.rules);
        let balance = &rules.balance;
        for &(victim, killer) in &events.deaths {
            let Some(unit) = self.unit(victim) else { continue };
            let (kind, team, position) = (unit.kind(), unit.core().team, unit.core().position);
            let enemy = team.opponent();
            match kind {
                EntityKind::Creep => {
                    let (gold, xp) = match unit {
                        UnitRef::Creep(c) => (c.gold_bounty, c.xp_bounty),
                        _ => unreachable!(),
                    };
                    let def = rules.hero_def(&self.hero(enemy).unit.name);
                    let hero = self.hero_mut(enemy);
                    if hero.unit.id == killer {
                        hero.gold += gold;
                    }
                    if hero.alive() && hero.unit.position.distance(position) <= balance.economy.xp_share_radius {
                        hero.gain_xp(xp, def, balance);
                    }
                }
                EntityKind::Hero => {
                    let tick_after = self.tick + 1;
                    let hero = self.hero_mut(team);
                    let respawn = u64::from(balance.respawn_seconds(hero.unit.level)) * TICKS_PER_SECOND;
                    let level = hero.unit.level;
                    hero.respawn_at = Some(tick_after + respawn);
                    hero.order = None;
                    hero.heals.clear();
                    hero.unit.stun_ticks = 0;
                    hero.deaths += 1;
                    let def = rules.hero_def(&self.hero(enemy).unit.name);
                    let winner = self.hero_mut(enemy);
                    if winner.unit.id == killer {
                        winner.kills += 1;
                    }
                    winner.gold += balance.economy.hero_kill_gold;
                    winner.gain_xp(balance.economy.hero_kill_xp_per_level * level, def, balance);
                }
                _ => {}
            }
        }
        self.creeps.retain(|c| c.unit.alive());
    }

    fn respawn_heroes(&mut self) {
        for team in Team::BOTH {
            let base = self.rules.base(team);
            let tick = self.tick;
            let hero = self.hero_mut(team);
            if hero.respawn_at.is_some_and(|at| at <= tick) {
                hero.respawn_at = None;
                hero.unit.health = hero.unit.max_health;
                hero.mana = f64::from(hero.max_mana);
                hero.unit.position = base;
                hero.weapon.cooldown_ticks = 0;
            }
        }
    }

    /// Passive income and fountain regeneration, once per game second.
    fn per_second(&mut self) {
        let rules = std::sync::Arc::clone(&self.rules);
        let economy = &rules.balance.economy;
        let fountain = &rules.balance.fountain;
        for team in Team::BOTH {
            let base = rules.base(team);
            let hero = self.hero_mut(team);
            hero.gold += economy.passive_gold_per_second;
            if hero.alive() && hero.unit.position.distance(base) <= fountain.radius {
                let hp = hero.unit.max_health * fountain.health_percent_per_second / 100;
                hero.unit.heal(hp);
                let mana = f64::from(hero.max_mana * fountain.mana_percent_per_second / 100);
                hero.mana = (hero.mana + mana).min(f64::from(hero.max_mana));
            }
        }
    }

    /// Spawn one wave per team at its mid-lane spawn point: melee creeps
    /// abreast, ranged creeps behind them.
    pub fn spawn_creep_wave(&mut self) {
        let rules = std::sync::Arc::clone(&self.rules);
        let waves = &rules.balance.waves;
        for team in Team::BOTH {
            let path = rules.map.lane_path(team);
            let spawn = rules.map.side(team).creep_spawn;
            let len = path[0].distance(path[1]);
            let (dx, dy) = ((path[1].x - path[0].x) / len, (path[1].y - path[0].y) / len);
            let mut place = |kind: CreepKind, along: f64, across: f64| {
                let p = Point::new(spawn.x + dx * along - dy * across, spawn.y + dy * along + dx * across);
                let p = rules.corridor.closest_point(p);
                let stats = match kind {
                    CreepKind::Melee => &rules.balance.creeps.melee,
                    CreepKind::Ranged => &rules.balance.creeps.ranged,
                };
                let id = self.alloc_id();
                self.creeps.push(CreepState::new(id, team, kind, stats, &rules.balance, p));
            };
            for k in 0..waves.melee {
                let across = (f64::from(k) - f64::from(waves.melee - 1) / 2.0) * 80.0;
                place(CreepKind::Melee, 0.0, across);
            }
            for k in 0..waves.ranged {
                let across = (f64::from(k) - f64::from(waves.ranged.saturating_sub(1)) / 2.0) * 80.0;
                place(CreepKind::Ranged, -150.0, across);
            }
        }
    }
}
