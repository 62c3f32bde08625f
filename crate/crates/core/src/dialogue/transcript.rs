//! Session transcript log, one event per line:
//! `turn_index|speaker|phase|text|directives`.
//!
//! `\`, `|` and newlines inside text are backslash-escaped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Phase;
use crate::multimodal::SystemAction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("line {line}: expected 5 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {message}")]
    Field { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    System,
    User,
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Speaker::System => "system",
            Speaker::User => "user",
        })
    }
}

impl FromStr for Speaker {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "system" => Ok(Speaker::System),
            "user" => Ok(Speaker::User),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub turn_index: u32,
    pub speaker: Speaker,
    pub phase: Phase,
    pub text: String,
    /// Semicolon-joined directive tokens; empty for user lines.
    pub directives: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `phase` is the phase the user was answering.
    pub fn record_user(&mut self, phase: Phase, text: &str) {
        self.push(Speaker::User, phase, text.to_string(), String::new());
    }

    pub fn record_system(&mut self, action: &SystemAction) {
        self.push(
            Speaker::System,
            action.phase,
            action.utterance.clone(),
            action.directive_string(),
        );
    }

    pub fn system_actions(&self) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(|e| e.speaker == Speaker::System)
    }

    fn push(&mut self, speaker: Speaker, phase: Phase, text: String, directives: String) {
        self.entries.push(TranscriptEntry {
            turn_index: self.entries.len() as u32,
            speaker,
            phase,
            text,
            directives,
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{}|{}|{}|{}|{}\n",
                e.turn_index,
                e.speaker,
                e.phase,
                escape(&e.text),
                e.directives
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let fields = split_fields(line);
            if fields.len() != 5 {
                return Err(TranscriptError::FieldCount {
                    line: line_no,
                    found: fields.len(),
                });
            }
            let bad = |message: String| TranscriptError::Field {
                line: line_no,
                message,
            };
            entries.push(TranscriptEntry {
                turn_index: fields[0]
                    .parse()
                    .map_err(|_| bad(format!("bad turn index {:?}", fields[0])))?,
                speaker: fields[1]
                    .parse()
                    .map_err(|_| bad(format!("bad speaker {:?}", fields[1])))?,
                phase: fields[2].parse().map_err(|e| bad(format!("{e}")))?,
                text: unescape(&fields[3]),
                directives: fields[4].clone(),
            });
        }
        Ok(Self { entries })
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

// Splits on unescaped '|', leaving escapes in place for `unescape`.
fn split_fields(line: &str) -> Vec<String> {
    let mut fields = vec![String::new()];
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let last = fields.last_mut().expect("non-empty");
                last.push('\\');
                if let Some(n) = chars.next() {
                    last.push(n);
                }
            }
            '|' => fields.push(String::new()),
            c => fields.last_mut().expect("non-empty").push(c),
        }
    }
    fields
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimodal::{annotate, Cues, MultimodalConfig};

    #[test]
    fn render_format() {
        let mut t = Transcript::new();
        let a = annotate(&MultimodalConfig::default(), "Hi | there", Phase::Greeting, Cues::default());
        t.record_system(&a);
        t.record_user(Phase::Greeting, "fine\nthanks");
        assert_eq!(
            t.render(),
            "0|system|greeting|Hi \\| there|expression:smile:0.6\n1|user|greeting|fine\\nthanks|\n"
        );
        assert_eq!(Transcript::parse(&t.render()).unwrap(), t);
    }

    #[test]
    fn parse_rejects_short_lines() {
        assert_eq!(
            Transcript::parse("0|system|greeting|hi\n"),
            Err(TranscriptError::FieldCount { line: 1, found: 4 })
        );
        assert!(Transcript::parse("0|robot|greeting|hi|\n").is_err());
    }
}
