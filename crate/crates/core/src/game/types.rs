use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Seat index, `0..n_players`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Seat(pub u8);

// Accepts integers and numeric strings: JSON map keys reach us as strings
// when buffered through internally tagged enums.
impl<'de> Deserialize<'de> for Seat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Seat;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a seat index")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Seat, E> {
                u8::try_from(v)
                    .map(Seat)
                    .map_err(|_| E::invalid_value(serde::de::Unexpected::Unsigned(v), &self))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Seat, E> {
                u8::try_from(v)
                    .map(Seat)
                    .map_err(|_| E::invalid_value(serde::de::Unexpected::Signed(v), &self))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Seat, E> {
                v.parse::<u8>()
                    .map(Seat)
                    .map_err(|_| E::invalid_value(serde::de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(V)
    }
}

impl Seat {
    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seat {}", self.0)
    }
}

impl From<u8> for Seat {
    fn from(v: u8) -> Self {
        Seat(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Camp {
    Wolf,
    Good,
}

impl fmt::Display for Camp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Camp::Wolf => "wolf",
            Camp::Good => "good",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Werewolf,
    Villager,
    Seer,
    Witch,
    Hunter,
    Guard,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::Werewolf,
        Role::Villager,
        Role::Seer,
        Role::Witch,
        Role::Hunter,
        Role::Guard,
    ];

    pub fn camp(self) -> Camp {
        match self {
            Role::Werewolf => Camp::Wolf,
            _ => Camp::Good,
        }
    }

    /// Seer, Witch, Hunter and Guard: the key roles.
    pub fn is_god(self) -> bool {
        matches!(self, Role::Seer | Role::Witch | Role::Hunter | Role::Guard)
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Werewolf => "werewolf",
            Role::Villager => "villager",
            Role::Seer => "seer",
            Role::Witch => "witch",
            Role::Hunter => "hunter",
            Role::Guard => "guard",
        }
    }

    pub fn from_name(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSeat {
    pub seat: Seat,
    pub role: Role,
    pub model_tag: String,
}

/// What happens when the guard protects the wolves' victim and the witch
/// also heals them the same night.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardSaveInteraction {
    #[default]
    Survive,
    Die,
}

pub const MIN_PLAYERS: usize = 8;
pub const MAX_PLAYERS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub n_players: usize,
    pub roster: Vec<Role>,
    #[serde(default)]
    pub sheriff_enabled: bool,
    #[serde(default)]
    pub guard_save_interaction: GuardSaveInteraction,
    #[serde(default)]
    pub witch_both_potions_same_night: bool,
    #[serde(default)]
    pub hunter_shoots_when_poisoned: bool,
    /// Wolves win at parity instead of strict majority.
    #[serde(default)]
    pub wolf_win_on_equal: bool,
    #[serde(default = "half")]
    pub alpha_guard: f64,
    #[serde(default = "half")]
    pub alpha_wolf: f64,
    #[serde(default = "half")]
    pub alpha_kre: f64,
    #[serde(default)]
    pub seed: u64,
    /// Model tag per assignment key: a role name, a camp (`wolf`/`good`) or
    /// `*`. Most specific key wins.
    #[serde(default)]
    pub model_assignment: BTreeMap<String, String>,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("n_players must be within {MIN_PLAYERS}..={MAX_PLAYERS}, got {0}")]
    PlayerCount(usize),
    #[error("roster has {roster} roles but n_players is {n_players}")]
    RosterSize { roster: usize, n_players: usize },
    #[error("roster needs at least one werewolf")]
    NoWerewolf,
    #[error("roster has {count} {role}s; at most one is supported")]
    DuplicateGod { role: Role, count: usize },
    #[error("{name} must lie in [0, 1], got {value}")]
    Alpha { name: &'static str, value: f64 },
    #[error("no standard roster for {0} players; list the roster explicitly")]
    NoStandardRoster(usize),
}

impl GameConfig {
    /// The two published boards: 8 players (2 wolves, 4 villagers, seer,
    /// guard) and 12 players (4 wolves, 4 villagers, seer, witch, hunter,
    /// guard).
    pub fn standard_roster(n_players: usize) -> Option<Vec<Role>> {
        use Role::*;
        match n_players {
            8 => Some(vec![
                Werewolf, Werewolf, Villager, Villager, Villager, Villager, Seer, Guard,
            ]),
            12 => Some(vec![
                Werewolf, Werewolf, Werewolf, Werewolf, Villager, Villager, Villager, Villager,
                Seer, Witch, Hunter, Guard,
            ]),
            _ => None,
        }
    }

    pub fn standard(n_players: usize, sheriff_enabled: bool, seed: u64) -> Result<Self, ConfigError> {
        let roster =
            Self::standard_roster(n_players).ok_or(ConfigError::NoStandardRoster(n_players))?;
        Ok(Self {
            n_players,
            roster,
            sheriff_enabled,
            guard_save_interaction: GuardSaveInteraction::Survive,
            witch_both_potions_same_night: false,
            hunter_shoots_when_poisoned: false,
            wolf_win_on_equal: false,
            alpha_guard: 0.5,
            alpha_wolf: 0.5,
            alpha_kre: 0.5,
            seed,
            model_assignment: BTreeMap::new(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(MIN_PLAYERS..=MAX_PLAYERS).contains(&self.n_players) {
            return Err(ConfigError::PlayerCount(self.n_players));
        }
        if self.roster.len() != self.n_players {
            return Err(ConfigError::RosterSize {
                roster: self.roster.len(),
                n_players: self.n_players,
            });
        }
        if !self.roster.contains(&Role::Werewolf) {
            return Err(ConfigError::NoWerewolf);
        }
        for role in [Role::Seer, Role::Witch, Role::Hunter, Role::Guard] {
            let count = self.roster.iter().filter(|r| **r == role).count();
            if count > 1 {
                return Err(ConfigError::DuplicateGod { role, count });
            }
        }
        for (name, value) in [
            ("alpha_guard", self.alpha_guard),
            ("alpha_wolf", self.alpha_wolf),
            ("alpha_kre", self.alpha_kre),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Alpha { name, value });
            }
        }
        Ok(())
    }

    /// Model tag for a seat holding `role`: role key, then camp key, then `*`.
    pub fn model_for(&self, role: Role) -> String {
        let camp = role.camp().to_string();
        [role.name(), camp.as_str(), "*"]
            .iter()
            .find_map(|k| self.model_assignment.get(*k))
            .cloned()
            .unwrap_or_else(|| "default".to_string())
    }
}
