//! Keyword-table mapping from free-text answers to canonical tags.

use std::collections::BTreeSet;

use super::{AnswerRecord, QuestionSpec, Slot};
use crate::spots::Tag;

const KEYWORDS: &[(&str, Tag)] = &[
    ("indoor", Tag::Indoor),
    ("indoors", Tag::Indoor),
    ("inside", Tag::Indoor),
    ("outdoor", Tag::Outdoor),
    ("outdoors", Tag::Outdoor),
    ("outside", Tag::Outdoor),
    ("nature", Tag::Outdoor),
    ("history", Tag::History),
    ("historical", Tag::History),
    ("historic", Tag::History),
    ("castles", Tag::History),
    ("temples", Tag::History),
    ("art", Tag::Art),
    ("arts", Tag::Art),
    ("paintings", Tag::Art),
    ("galleries", Tag::Art),
    ("movie", Tag::Movie),
    ("movies", Tag::Movie),
    ("film", Tag::Movie),
    ("films", Tag::Movie),
    ("cinema", Tag::Movie),
    ("music", Tag::Music),
    ("concerts", Tag::Music),
    ("songs", Tag::Music),
    ("sweet", Tag::Sweet),
    ("sweets", Tag::Sweet),
    ("dessert", Tag::Sweet),
    ("desserts", Tag::Sweet),
    ("cake", Tag::Sweet),
    ("chocolate", Tag::Sweet),
    ("spicy", Tag::Spicy),
    ("hot", Tag::Spicy),
    ("curry", Tag::Spicy),
    ("chili", Tag::Spicy),
    ("sport", Tag::Sports),
    ("sports", Tag::Sports),
    ("yes", Tag::Sports),
    ("yeah", Tag::Sports),
    ("soccer", Tag::Sports),
    ("baseball", Tag::Sports),
    ("tennis", Tag::Sports),
    ("football", Tag::Sports),
    ("basketball", Tag::Sports),
    ("swimming", Tag::Sports),
    ("golf", Tag::Sports),
    ("running", Tag::Sports),
    ("train", Tag::Train),
    ("trains", Tag::Train),
    ("subway", Tag::Train),
    ("railway", Tag::Train),
    ("bus", Tag::Bus),
    ("buses", Tag::Bus),
    ("car", Tag::Car),
    ("drive", Tag::Car),
    ("driving", Tag::Car),
    ("taxi", Tag::Car),
    ("walk", Tag::Walking),
    ("walking", Tag::Walking),
    ("foot", Tag::Walking),
];

// "don't" tokenizes to "don" + "t", hence the stems.
const NEGATORS: &[&str] = &[
    "not", "no", "never", "don", "doesn", "didn", "isn", "aren", "hate", "dislike", "nor",
    "neither",
];

/// Tags mentioned in `raw`, restricted to `allowed`.
///
/// Negation ("not", "don't", ...) suppresses keywords for the rest of its
/// clause; clauses end at punctuation or "but".
pub fn extract_tags(raw: &str, allowed: &BTreeSet<Tag>) -> BTreeSet<Tag> {
    let mut tags = BTreeSet::new();
    for clause in raw.split([',', '.', ';', '!', '?', ':']) {
        let mut negated = false;
        for token in clause
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let token = token.to_lowercase();
            if token == "but" {
                negated = false;
                continue;
            }
            if NEGATORS.contains(&token.as_str()) {
                negated = true;
                continue;
            }
            if negated {
                continue;
            }
            if let Some((_, tag)) = KEYWORDS.iter().find(|(kw, _)| *kw == token) {
                if allowed.contains(tag) {
                    tags.insert(*tag);
                }
            }
        }
    }
    tags
}

/// Turns a reply to a slot's main prompt into an answer record. Never fails:
/// unmatched input yields an empty tag set.
pub fn canonicalize_answer(slot: Slot, raw_text: &str, spec: &QuestionSpec) -> AnswerRecord {
    AnswerRecord {
        slot,
        raw_text: raw_text.to_string(),
        canonical_tags: extract_tags(raw_text, &spec.expected_tags),
        followup_texts: Vec::new(),
    }
}
