//! Expression, motion and prosody directives attached to system utterances.
//!
//! Directives are declarative: a renderer (the chat UI avatar, or a robot
//! control stack) decides how to act them out.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::Phase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectiveError {
    #[error("intensity {0} is outside [0, 1]")]
    Intensity(f64),
    #[error("malformed directive token {0:?}")]
    Malformed(String),
    #[error("{name} is not a {kind} directive")]
    KindMismatch {
        kind: DirectiveKind,
        name: DirectiveName,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveKind {
    Expression,
    Motion,
    Prosody,
}

impl DirectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectiveKind::Expression => "expression",
            DirectiveKind::Motion => "motion",
            DirectiveKind::Prosody => "prosody",
        }
    }
}

impl fmt::Display for DirectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DirectiveKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "expression" => Ok(DirectiveKind::Expression),
            "motion" => Ok(DirectiveKind::Motion),
            "prosody" => Ok(DirectiveKind::Prosody),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveName {
    Smile,
    Neutral,
    Nod,
    HeadTiltRight,
    VolumeUp,
}

impl DirectiveName {
    pub fn kind(self) -> DirectiveKind {
        match self {
            DirectiveName::Smile | DirectiveName::Neutral => DirectiveKind::Expression,
            DirectiveName::Nod | DirectiveName::HeadTiltRight => DirectiveKind::Motion,
            DirectiveName::VolumeUp => DirectiveKind::Prosody,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DirectiveName::Smile => "smile",
            DirectiveName::Neutral => "neutral",
            DirectiveName::Nod => "nod",
            DirectiveName::HeadTiltRight => "head_tilt_right",
            DirectiveName::VolumeUp => "volume_up",
        }
    }
}

impl fmt::Display for DirectiveName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DirectiveName {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        [
            DirectiveName::Smile,
            DirectiveName::Neutral,
            DirectiveName::Nod,
            DirectiveName::HeadTiltRight,
            DirectiveName::VolumeUp,
        ]
        .into_iter()
        .find(|n| n.as_str() == s)
        .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Directive {
    pub name: DirectiveName,
    pub intensity: f64,
    pub duration_ms: Option<u32>,
}

impl Directive {
    pub fn new(
        name: DirectiveName,
        intensity: f64,
        duration_ms: Option<u32>,
    ) -> Result<Self, DirectiveError> {
        if !(0.0..=1.0).contains(&intensity) {
            return Err(DirectiveError::Intensity(intensity));
        }
        Ok(Self {
            name,
            intensity,
            duration_ms,
        })
    }

    pub fn kind(&self) -> DirectiveKind {
        self.name.kind()
    }

    /// `kind:name:intensity[:duration]`
    pub fn token(&self) -> String {
        let mut token = format!("{}:{}:{}", self.kind(), self.name, self.intensity);
        if let Some(d) = self.duration_ms {
            token.push_str(&format!(":{d}"));
        }
        token
    }

    pub fn parse_token(token: &str) -> Result<Self, DirectiveError> {
        let malformed = || DirectiveError::Malformed(token.to_string());
        let parts: Vec<&str> = token.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(malformed());
        }
        let kind: DirectiveKind = parts[0].parse().map_err(|_| malformed())?;
        let name: DirectiveName = parts[1].parse().map_err(|_| malformed())?;
        if name.kind() != kind {
            return Err(DirectiveError::KindMismatch { kind, name });
        }
        let intensity: f64 = parts[2].parse().map_err(|_| malformed())?;
        let duration_ms = match parts.get(3) {
            Some(d) => Some(d.parse::<u32>().map_err(|_| malformed())?),
            None => None,
        };
        Directive::new(name, intensity, duration_ms)
    }
}

/// Semicolon-joined directive tokens.
pub fn format_directives(directives: &[Directive]) -> String {
    directives
        .iter()
        .map(Directive::token)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_directives(s: &str) -> Result<Vec<Directive>, DirectiveError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(Directive::parse_token).collect()
}

/// Calibration constants for the directives. The defaults are hand-tuned,
/// not measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultimodalConfig {
    pub smile_intensity: f64,
    /// Deliberately exaggerated so the user sees they were heard.
    pub nod_intensity: f64,
    pub nod_duration_ms: u32,
    pub head_tilt_intensity: f64,
    pub volume_up_intensity: f64,
}

impl Default for MultimodalConfig {
    fn default() -> Self {
        Self {
            smile_intensity: 0.6,
            nod_intensity: 0.9,
            nod_duration_ms: 800,
            head_tilt_intensity: 0.5,
            volume_up_intensity: 0.7,
        }
    }
}

/// Situational cues the dialogue engine passes along with an utterance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Cues {
    pub after_user_utterance: bool,
    pub explaining_photo: bool,
    pub recommendation_point: bool,
}

/// An utterance plus the directives that accompany it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemAction {
    pub utterance: String,
    pub directives: Vec<Directive>,
    pub phase: Phase,
    /// The utterance was produced without a real estimate behind it.
    #[serde(default)]
    pub generic: bool,
}

impl SystemAction {
    pub fn directive_string(&self) -> String {
        format_directives(&self.directives)
    }

    pub fn has(&self, name: DirectiveName) -> bool {
        self.directives.iter().any(|d| d.name == name)
    }

    pub fn count(&self, name: DirectiveName) -> usize {
        self.directives.iter().filter(|d| d.name == name).count()
    }
}

/// Attaches directives to an utterance.
///
/// The smile is always present. A nod follows any user utterance, the head
/// tilts right while a spot photo is being explained, and the voice is
/// raised only for recommendation points delivered in a Recommend phase.
pub fn annotate(config: &MultimodalConfig, utterance: &str, phase: Phase, cues: Cues) -> SystemAction {
    let mut directives = vec![Directive {
        name: DirectiveName::Smile,
        intensity: config.smile_intensity,
        duration_ms: None,
    }];
    if cues.after_user_utterance {
        directives.push(Directive {
            name: DirectiveName::Nod,
            intensity: config.nod_intensity,
            duration_ms: Some(config.nod_duration_ms),
        });
    }
    if cues.explaining_photo {
        directives.push(Directive {
            name: DirectiveName::HeadTiltRight,
            intensity: config.head_tilt_intensity,
            duration_ms: None,
        });
    }
    if cues.recommendation_point && phase.is_recommend() {
        directives.push(Directive {
            name: DirectiveName::VolumeUp,
            intensity: config.volume_up_intensity,
            duration_ms: None,
        });
    }
    SystemAction {
        utterance: utterance.to_string(),
        directives,
        phase,
        generic: false,
    }
}
