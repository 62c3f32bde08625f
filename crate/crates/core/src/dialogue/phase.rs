use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the three question slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    First,
    Second,
    Third,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::First, Slot::Second, Slot::Third];

    pub fn number(self) -> u8 {
        match self {
            Slot::First => 1,
            Slot::Second => 2,
            Slot::Third => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Slot> {
        match n {
            1 => Some(Slot::First),
            2 => Some(Slot::Second),
            3 => Some(Slot::Third),
            _ => None,
        }
    }

    pub fn next(self) -> Option<Slot> {
        Slot::from_number(self.number() + 1)
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Slot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        Slot::from_number(n).ok_or_else(|| serde::de::Error::custom(format!("slot {n} not in 1..=3")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Greeting,
    /// Branch point reached before the estimate arrived; waiting silently.
    AwaitProfile,
    Assessment,
    /// `step` 0 is the slot's main prompt; higher steps are its follow-ups.
    Question { slot: Slot, step: u8 },
    Recommend { point: u8 },
    PostChat,
    Closing,
}

impl Phase {
    pub fn is_recommend(self) -> bool {
        matches!(self, Phase::Recommend { .. })
    }

    pub fn is_question(self) -> bool {
        matches!(self, Phase::Question { .. })
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Greeting => f.write_str("greeting"),
            Phase::AwaitProfile => f.write_str("await_profile"),
            Phase::Assessment => f.write_str("assessment"),
            Phase::Question { slot, step: 0 } => write!(f, "question-{}", slot.number()),
            Phase::Question { slot, step } => write!(f, "question-{}.{}", slot.number(), step),
            Phase::Recommend { point } => write!(f, "recommend-{point}"),
            Phase::PostChat => f.write_str("post_chat"),
            Phase::Closing => f.write_str("closing"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePhaseError(pub String);

impl fmt::Display for ParsePhaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown phase {:?}", self.0)
    }
}

impl std::error::Error for ParsePhaseError {}

impl FromStr for Phase {
    type Err = ParsePhaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePhaseError(s.to_string());
        Ok(match s {
            "greeting" => Phase::Greeting,
            "await_profile" => Phase::AwaitProfile,
            "assessment" => Phase::Assessment,
            "post_chat" => Phase::PostChat,
            "closing" => Phase::Closing,
            _ => {
                if let Some(rest) = s.strip_prefix("question-") {
                    let (slot, step) = match rest.split_once('.') {
                        Some((slot, step)) => (slot, step.parse::<u8>().map_err(|_| err())?),
                        None => (rest, 0),
                    };
                    let slot = slot
                        .parse::<u8>()
                        .ok()
                        .and_then(Slot::from_number)
                        .ok_or_else(err)?;
                    if step == 0 && rest.contains('.') {
                        return Err(err());
                    }
                    Phase::Question { slot, step }
                } else if let Some(rest) = s.strip_prefix("recommend-") {
                    match rest.parse::<u8>() {
                        Ok(point @ 1..=3) => Phase::Recommend { point },
                        _ => return Err(err()),
                    }
                } else {
                    return Err(err());
                }
            }
        })
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
