use std::fmt;

use serde::{Deserialize, Serialize};

use super::EvaluationError;

/// Lowest and highest rating on the 7-point scale.
pub const SCALE_MIN: u8 = 1;
pub const SCALE_MAX: u8 = 7;

/// The nine impression questionnaire items, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpressionItem {
    SatisfactionWithChoice,
    SufficiencyOfInformation,
    NaturalnessOfDialogue,
    AppropriatenessOfDialogue,
    LikabilityOfDialogue,
    SatisfactionWithResponse,
    TrustInTheOtherParty,
    HelpfulnessOfInformation,
    IntentionToReuse,
}

impl ImpressionItem {
    pub const ALL: [ImpressionItem; 9] = [
        ImpressionItem::SatisfactionWithChoice,
        ImpressionItem::SufficiencyOfInformation,
        ImpressionItem::NaturalnessOfDialogue,
        ImpressionItem::AppropriatenessOfDialogue,
        ImpressionItem::LikabilityOfDialogue,
        ImpressionItem::SatisfactionWithResponse,
        ImpressionItem::TrustInTheOtherParty,
        ImpressionItem::HelpfulnessOfInformation,
        ImpressionItem::IntentionToReuse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImpressionItem::SatisfactionWithChoice => "satisfaction_with_choice",
            ImpressionItem::SufficiencyOfInformation => "sufficiency_of_information",
            ImpressionItem::NaturalnessOfDialogue => "naturalness_of_dialogue",
            ImpressionItem::AppropriatenessOfDialogue => "appropriateness_of_dialogue",
            ImpressionItem::LikabilityOfDialogue => "likability_of_dialogue",
            ImpressionItem::SatisfactionWithResponse => "satisfaction_with_response",
            ImpressionItem::TrustInTheOtherParty => "trust_in_the_other_party",
            ImpressionItem::HelpfulnessOfInformation => "helpfulness_of_information",
            ImpressionItem::IntentionToReuse => "intention_to_reuse",
        }
    }
}

impl fmt::Display for ImpressionItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One completed questionnaire: a 1..=7 rating per item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u8; 9]", into = "[u8; 9]")]
pub struct ImpressionResponse {
    items: [u8; 9],
}

impl ImpressionResponse {
    pub fn new(items: [u8; 9]) -> Result<Self, EvaluationError> {
        for (item, &value) in ImpressionItem::ALL.iter().zip(items.iter()) {
            if !(SCALE_MIN..=SCALE_MAX).contains(&value) {
                return Err(EvaluationError::ItemOutOfRange { item: *item, value });
            }
        }
        Ok(Self { items })
    }

    pub fn uniform(value: u8) -> Result<Self, EvaluationError> {
        Self::new([value; 9])
    }

    pub fn get(&self, item: ImpressionItem) -> u8 {
        self.items[item as usize]
    }

    pub fn items(&self) -> [u8; 9] {
        self.items
    }

    pub fn total(&self) -> u32 {
        self.items.iter().map(|&v| u32::from(v)).sum()
    }
}

impl TryFrom<[u8; 9]> for ImpressionResponse {
    type Error = EvaluationError;

    fn try_from(items: [u8; 9]) -> Result<Self, Self::Error> {
        Self::new(items)
    }
}

impl From<ImpressionResponse> for [u8; 9] {
    fn from(r: ImpressionResponse) -> Self {
        r.items
    }
}

pub(crate) fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Per-item means (2 decimals) and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpressionScores {
    pub item_means: [f64; 9],
    pub total: f64,
    pub responses: usize,
}

impl ImpressionScores {
    /// Builds scores from already-averaged item ratings, e.g. a published
    /// results table. Means must lie on the rating scale.
    pub fn from_item_means(item_means: [f64; 9], responses: usize) -> Result<Self, EvaluationError> {
        for (item, &mean) in ImpressionItem::ALL.iter().zip(item_means.iter()) {
            if !(f64::from(SCALE_MIN)..=f64::from(SCALE_MAX)).contains(&mean) {
                return Err(EvaluationError::MeanOutOfRange { item: *item, mean });
            }
        }
        let item_means = item_means.map(round2);
        Ok(Self {
            item_means,
            total: round2(item_means.iter().sum()),
            responses,
        })
    }

    pub fn mean(&self, item: ImpressionItem) -> f64 {
        self.item_means[item as usize]
    }
}

/// Averages questionnaire responses per item and sums the averages.
pub fn score_impressions(
    responses: &[ImpressionResponse],
) -> Result<ImpressionScores, EvaluationError> {
    let mut acc = MetricsAccumulator::default();
    for r in responses {
        acc.add_impression(r);
    }
    acc.impression_scores()
}

/// Change in visit intent for the recommended spot: `post - pre`.
pub fn recommendation_effect(pre: u8, post: u8) -> Result<i8, EvaluationError> {
    for value in [pre, post] {
        if !(SCALE_MIN..=SCALE_MAX).contains(&value) {
            return Err(EvaluationError::IntentOutOfRange(value));
        }
    }
    Ok(post as i8 - pre as i8)
}

/// Integer running sums. Merging is associative and commutative, so the
/// report does not depend on the order sessions finish in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricsAccumulator {
    item_sums: [u64; 9],
    responses: u64,
    effect_sum: i64,
    effects: u64,
    sessions: u64,
}

impl MetricsAccumulator {
    pub fn add_impression(&mut self, response: &ImpressionResponse) {
        for (sum, v) in self.item_sums.iter_mut().zip(response.items) {
            *sum += u64::from(v);
        }
        self.responses += 1;
    }

    pub fn add_effect(&mut self, effect: i8) {
        self.effect_sum += i64::from(effect);
        self.effects += 1;
    }

    pub fn add_session(&mut self) {
        self.sessions += 1;
    }

    pub fn merge(mut self, other: MetricsAccumulator) -> MetricsAccumulator {
        for (a, b) in self.item_sums.iter_mut().zip(other.item_sums) {
            *a += b;
        }
        self.responses += other.responses;
        self.effect_sum += other.effect_sum;
        self.effects += other.effects;
        self.sessions += other.sessions;
        self
    }

    pub fn impression_scores(&self) -> Result<ImpressionScores, EvaluationError> {
        if self.responses == 0 {
            return Err(EvaluationError::NoData);
        }
        let n = self.responses as f64;
        ImpressionScores::from_item_means(self.item_sums.map(|s| s as f64 / n), self.responses as usize)
    }

    pub fn mean_effect(&self) -> Option<f64> {
        (self.effects > 0).then(|| self.effect_sum as f64 / self.effects as f64)
    }

    pub fn report(&self) -> Result<MetricsReport, EvaluationError> {
        let scores = self.impression_scores()?;
        Ok(MetricsReport {
            item_means: scores.item_means,
            impression_total: scores.total,
            mean_effect: self.mean_effect(),
            sessions: self.sessions.max(self.responses) as usize,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub item_means: [f64; 9],
    pub impression_total: f64,
    /// Mean post-minus-pre visit intent; absent when no intents were given.
    pub mean_effect: Option<f64>,
    pub sessions: usize,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "satisfaction_with_choice,sufficiency_of_information,\
naturalness_of_dialogue,appropriateness_of_dialogue,likability_of_dialogue,\
satisfaction_with_response,trust_in_the_other_party,helpfulness_of_information,\
intention_to_reuse,impression_total,mean_effect,n";

    /// `name: value` lines: item means, total, mean effect, n.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (item, mean) in ImpressionItem::ALL.iter().zip(self.item_means) {
            out.push_str(&format!("{item}: {mean:.2}\n"));
        }
        out.push_str(&format!("impression_total: {:.2}\n", self.impression_total));
        match self.mean_effect {
            Some(e) => out.push_str(&format!("mean_effect: {e:.2}\n")),
            None => out.push_str("mean_effect: n/a\n"),
        }
        out.push_str(&format!("n: {}\n", self.sessions));
        out
    }

    /// Header row plus one data row.
    pub fn to_csv(&self) -> String {
        let mut fields: Vec<String> = self.item_means.iter().map(|m| format!("{m:.2}")).collect();
        fields.push(format!("{:.2}", self.impression_total));
        fields.push(self.mean_effect.map(|e| format!("{e:.2}")).unwrap_or_default());
        fields.push(self.sessions.to_string());
        format!("{}\n{}\n", Self::CSV_HEADER, fields.join(","))
    }
}
