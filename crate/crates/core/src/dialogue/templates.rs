//! Keyed utterance templates.
//!
//! One template per line, `key: text with {placeholders}`. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::HashMap;

use thiserror::Error;

use super::PromptKey;
use crate::personality::{Level, Trait};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("line {line}: expected `key: template`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key {key}")]
    DuplicateKey { line: usize, key: String },
    #[error("missing template {0}")]
    MissingKey(String),
    #[error("template {key}: no value for placeholder {{{placeholder}}}")]
    MissingValue { key: String, placeholder: String },
    #[error("template {key}: unclosed placeholder")]
    Unclosed { key: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateStore {
    templates: HashMap<String, String>,
}

impl TemplateStore {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut templates = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, template) = line
                .split_once(':')
                .ok_or(TemplateError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(TemplateError::Syntax { line: i + 1 });
            }
            if templates
                .insert(key.to_string(), template.trim().to_string())
                .is_some()
            {
                return Err(TemplateError::DuplicateKey {
                    line: i + 1,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { templates })
    }

    pub fn builtin() -> Self {
        let store = Self::parse(include_str!("../../assets/templates.txt"))
            .expect("bundled templates parse");
        store.validate().expect("bundled templates are complete");
        store
    }

    /// Checks that every key the engine uses is present.
    pub fn validate(&self) -> Result<(), TemplateError> {
        for key in required_keys() {
            if !self.templates.contains_key(&key) {
                return Err(TemplateError::MissingKey(key));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.templates.get(key).map(String::as_str)
    }

    pub fn render(&self, key: &str, vars: &[(&str, &str)]) -> Result<String, TemplateError> {
        let template = self
            .get(key)
            .ok_or_else(|| TemplateError::MissingKey(key.to_string()))?;
        let mut out = String::with_capacity(template.len());
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let close = after.find('}').ok_or_else(|| TemplateError::Unclosed {
                key: key.to_string(),
            })?;
            let name = &after[..close];
            let value = vars
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| TemplateError::MissingValue {
                    key: key.to_string(),
                    placeholder: name.to_string(),
                })?;
            out.push_str(value);
            rest = &after[close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

pub(crate) fn assessment_key(t: Trait, level: Level) -> String {
    format!("assessment.{}.{}", t.name(), level.as_str())
}

pub(crate) fn recommend_key(point: u8) -> String {
    format!("recommend.point{point}")
}

fn required_keys() -> Vec<String> {
    let mut keys: Vec<String> = [
        "greeting",
        "assessment.intro",
        "assessment.outro",
        "post_chat",
        "closing",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for t in Trait::ALL {
        for l in [Level::High, Level::Low] {
            keys.push(assessment_key(t, l));
        }
    }
    keys.extend(PromptKey::ALL.iter().map(|p| p.template_key()));
    keys.extend((1..=3).map(recommend_key));
    keys
}
