use serde::Serialize;

use super::units::{HealOverTime, ItemStack, UnitRef, INVENTORY_SLOTS};
use super::WorldState;
use crate::data::AbilityKind;
use crate::protocol::{BotCommand, EntityId, EntityKind, Team, Vec3};

/// The command a hero keeps executing until it completes, becomes invalid,
/// or is replaced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StickyOrder {
    pub command: BotCommand,
    pub issued_tick: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrderRejection {
    #[error("match is over")]
    MatchOver,
    #[error("hero is dead")]
    HeroDead,
    #[error("no entity {0}")]
    UnknownTarget(EntityId),
    #[error("entity {0} is not visible")]
    TargetNotVisible(EntityId),
    #[error("entity {0} is not a valid target")]
    InvalidTarget(EntityId),
    #[error("no ability in slot {0}")]
    UnknownAbility(u32),
    #[error("ability in slot {0} is passive")]
    PassiveAbility(u32),
    #[error("ability in slot {0} is not learned")]
    NotLearned(u32),
    #[error("ability in slot {slot} is on cooldown ({ticks} ticks)")]
    OnCooldown { slot: u32, ticks: u32 },
    #[error("not enough mana: need {need}, have {have:.1}")]
    NotEnoughMana { need: u32, have: f64 },
    #[error("target out of range: {distance:.1} > {range:.1}")]
    OutOfRange { distance: f64, range: f64 },
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("not enough gold: need {price}, have {gold}")]
    NotEnoughGold { price: u32, gold: u32 },
    #[error("inventory slot {0} is empty")]
    EmptySlot(u32),
    #[error("item in slot {0} has no use")]
    NotUsable(u32),
}

impl WorldState {
    /// Validate a decoded command for `team`'s hero and apply it.
    ///
    /// NOOP keeps the current order. MOVE, ATTACK and CAST replace it. BUY,
    /// SELL and USE_ITEM take effect immediately and leave the current order
    /// running. A rejected command changes nothing.
    pub fn submit_order(&mut self, team: Team, command: BotCommand) -> Result<(), OrderRejection> {
        if self.outcome.is_some() {
            return Err(OrderRejection::MatchOver);
        }
        if command.is_noop() {
            return Ok(());
        }
        if !self.hero(team).alive() {
            return Err(OrderRejection::HeroDead);
        }
        match &command {
            BotCommand::Noop => unreachable!(),
            BotCommand::Move { target } => {
                let p = self.rules.map.clamp(target.ground());
                let command = BotCommand::Move {
                    target: Vec3::new(p.x, p.y, self.rules.map.ground_z),
                };
                self.set_order(team, command);
            }
            BotCommand::Attack { target } => {
                self.validate_attack(team, *target)?;
                self.set_order(team, command);
            }
            BotCommand::Cast { ability, target } => {
                self.validate_cast(team, *ability, *target)?;
                self.set_order(team, command);
            }
            BotCommand::Buy { item } => self.buy(team, item)?,
            BotCommand::Sell { slot } => self.sell(team, *slot)?,
            BotCommand::UseItem { slot, .. } => self.use_item(team, *slot)?,
        }
        Ok(())
    }

    fn set_order(&mut self, team: Team, command: BotCommand) {
        let tick = self.tick;
        self.hero_mut(team).order = Some(StickyOrder { command, issued_tick: tick });
    }

    /// A living enemy hero, creep or tower that `team` can see.
    pub(crate) fn validate_attack(&self, team: Team, target: EntityId) -> Result<(), OrderRejection> {
        let unit = self.unit(target).ok_or(OrderRejection::UnknownTarget(target))?;
        if unit.core().team == team || !unit.attackable() {
            return Err(OrderRejection::InvalidTarget(target));
        }
        if !self.is_visible_to(team, unit.core()) {
            return Err(OrderRejection::TargetNotVisible(target));
        }
        Ok(())
    }

    pub(crate) fn validate_cast(
        &self,
        team: Team,
        slot: u32,
        target: EntityId,
    ) -> Result<(), OrderRejection> {
        let hero = self.hero(team);
        let ability = hero.ability(slot).ok_or(OrderRejection::UnknownAbility(slot))?;
        if ability.kind == AbilityKind::Passive {
            return Err(OrderRejection::PassiveAbility(slot));
        }
        if ability.level == 0 {
            return Err(OrderRejection::NotLearned(slot));
        }
        if ability.cooldown_ticks > 0 {
            return Err(OrderRejection::OnCooldown { slot, ticks: ability.cooldown_ticks });
        }
        let def = self.rules.hero_def(&hero.unit.name).ability(slot).expect("ability in roster");
        let need = def.mana_at(ability.level);
        if hero.mana < f64::from(need) {
            return Err(OrderRejection::NotEnoughMana { need, have: hero.mana });
        }
        let unit = self.unit(target).ok_or(OrderRejection::UnknownTarget(target))?;
        let core = unit.core();
        let valid = match ability.kind {
            AbilityKind::Heal => matches!(unit, UnitRef::Hero(_)) && core.team == team && core.alive(),
            _ => {
                matches!(unit.kind(), EntityKind::Hero | EntityKind::Creep)
                    && core.team != team
                    && core.alive()
            }
        };
        if !valid {
            return Err(OrderRejection::InvalidTarget(target));
        }
        if !self.is_visible_to(team, core) {
            return Err(OrderRejection::TargetNotVisible(target));
        }
        let distance = hero.unit.position.distance(core.position);
        if distance > def.range {
            return Err(OrderRejection::OutOfRange { distance, range: def.range });
        }
        Ok(())
    }

    fn buy(&mut self, team: Team, item: &str) -> Result<(), OrderRejection> {
        let def = self
            .rules
            .balance
            .item(item)
            .ok_or_else(|| OrderRejection::UnknownItem(item.to_string()))?
            .clone();
        let hero = self.hero_mut(team);
        if hero.gold < def.price {
            return Err(OrderRejection::NotEnoughGold { price: def.price, gold: hero.gold });
        }
        hero.gold -= def.price;
        self.couriers[team.index()].queue.push(ItemStack { name: def.name, charges: def.charges });
        Ok(())
    }

    fn sell(&mut self, team: Team, slot: u32) -> Result<(), OrderRejection> {
        let name = self
            .hero(team)
            .items
            .get(slot as usize)
            .and_then(|s| s.as_ref())
            .map(|s| s.name.clone())
            .ok_or(OrderRejection::EmptySlot(slot))?;
        let refund = self.rules.balance.item(&name).map_or(0, |d| d.sell_value());
        let hero = self.hero_mut(team);
        hero.items[slot as usize] = None;
        hero.gold += refund;
        Ok(())
    }

    /// Healing items always apply to the user; a target id is ignored.
    fn use_item(&mut self, team: Team, slot: u32) -> Result<(), OrderRejection> {
        if slot as usize >= INVENTORY_SLOTS {
            return Err(OrderRejection::EmptySlot(slot));
        }
        let name = self.hero(team).items[slot as usize]
            .as_ref()
            .map(|s| s.name.clone())
            .ok_or(OrderRejection::EmptySlot(slot))?;
        let def = self
            .rules
            .balance
            .item(&name)
            .filter(|d| d.usable())
            .ok_or(OrderRejection::NotUsable(slot))?
            .clone();
        let hero = self.hero_mut(team);
        let stack = hero.items[slot as usize].as_mut().expect("checked above");
        if stack.charges == 0 {
            return Err(OrderRejection::NotUsable(slot));
        }
        stack.charges -= 1;
        if stack.charges == 0 {
            hero.items[slot as usize] = None;
        }
        hero.heals.push(HealOverTime::new(def.heal, def.heal_seconds));
        Ok(())
    }
}
