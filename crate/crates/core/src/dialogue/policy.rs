//! Question policy keyed on spot category group and extraversion.
//!
//! | group | extraversion | slot 1          | slot 2                          | slot 3                                          |
//! |-------|--------------|-----------------|---------------------------------|-------------------------------------------------|
//! | A     | High         | indoor/outdoor  | likes sports? → sport name      | history/art → movie/music                       |
//! | A     | Low          | indoor/outdoor  | sweet/spicy → sweets name       | history/art → movie/music                       |
//! | B     | High         | indoor/outdoor  | likes sports? → sport name      | sweet/spicy → history/art                       |
//! | B     | Low          | indoor/outdoor  | means of transportation         | sweet/spicy → sweets name → history/art         |
//!
//! High-extraversion rows ask the livelier sports question; Low rows ask
//! something less demanding in the same slot.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Slot;
use crate::personality::Level;
use crate::spots::{CategoryGroup, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKey {
    IndoorOrOutdoor,
    LikesSports,
    ConfirmSportName,
    SweetOrSpicy,
    ConfirmSweetsName,
    MeansOfTransportation,
    HistoryOrArt,
    MovieOrMusic,
}

impl PromptKey {
    pub const ALL: [PromptKey; 8] = [
        PromptKey::IndoorOrOutdoor,
        PromptKey::LikesSports,
        PromptKey::ConfirmSportName,
        PromptKey::SweetOrSpicy,
        PromptKey::ConfirmSweetsName,
        PromptKey::MeansOfTransportation,
        PromptKey::HistoryOrArt,
        PromptKey::MovieOrMusic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptKey::IndoorOrOutdoor => "indoor_or_outdoor",
            PromptKey::LikesSports => "likes_sports",
            PromptKey::ConfirmSportName => "confirm_sport_name",
            PromptKey::SweetOrSpicy => "sweet_or_spicy",
            PromptKey::ConfirmSweetsName => "confirm_sweets_name",
            PromptKey::MeansOfTransportation => "means_of_transportation",
            PromptKey::HistoryOrArt => "history_or_art",
            PromptKey::MovieOrMusic => "movie_or_music",
        }
    }

    /// Key of the utterance template in the template store.
    pub fn template_key(self) -> String {
        format!("question.{}", self.as_str())
    }

    /// Tags an answer to this prompt can produce.
    pub fn expected_tags(self) -> BTreeSet<Tag> {
        match self {
            PromptKey::IndoorOrOutdoor => [Tag::Indoor, Tag::Outdoor].into(),
            PromptKey::LikesSports => [Tag::Sports].into(),
            PromptKey::SweetOrSpicy => [Tag::Sweet, Tag::Spicy].into(),
            PromptKey::MeansOfTransportation => {
                [Tag::Train, Tag::Bus, Tag::Car, Tag::Walking].into()
            }
            PromptKey::HistoryOrArt => [Tag::History, Tag::Art].into(),
            PromptKey::MovieOrMusic => [Tag::Movie, Tag::Music].into(),
            PromptKey::ConfirmSportName | PromptKey::ConfirmSweetsName => BTreeSet::new(),
        }
    }

    /// Name-confirmation prompts are only asked when the preceding answer
    /// produced this tag (no point asking for a favourite sport after "no").
    pub fn required_tag(self) -> Option<Tag> {
        match self {
            PromptKey::ConfirmSportName => Some(Tag::Sports),
            PromptKey::ConfirmSweetsName => Some(Tag::Sweet),
            _ => None,
        }
    }

    /// Free-text prompts whose reply is kept verbatim instead of tagged.
    pub fn is_confirmation(self) -> bool {
        self.required_tag().is_some()
    }
}

impl fmt::Display for PromptKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSpec {
    pub slot: Slot,
    pub prompt: PromptKey,
    pub expected_tags: BTreeSet<Tag>,
    /// Follow-up prompts asked within the same slot, in order.
    pub followups: Vec<PromptKey>,
}

impl QuestionSpec {
    fn new(slot: Slot, prompt: PromptKey, followups: &[PromptKey]) -> Self {
        Self {
            slot,
            prompt,
            expected_tags: prompt.expected_tags(),
            followups: followups.to_vec(),
        }
    }

    /// Prompt asked at `step` within this slot (0 = main prompt).
    pub fn prompt_at(&self, step: u8) -> Option<PromptKey> {
        match step {
            0 => Some(self.prompt),
            n => self.followups.get(n as usize - 1).copied(),
        }
    }
}

pub fn select_question(group: CategoryGroup, extraversion: Level, slot: Slot) -> QuestionSpec {
    use CategoryGroup::*;
    use Level::*;
    use PromptKey::*;

    let (prompt, followups): (PromptKey, &[PromptKey]) = match (group, extraversion, slot) {
        (_, _, Slot::First) => (IndoorOrOutdoor, &[]),

        (_, High, Slot::Second) => (LikesSports, &[ConfirmSportName]),
        (GroupA, Low, Slot::Second) => (SweetOrSpicy, &[ConfirmSweetsName]),
        (GroupB, Low, Slot::Second) => (MeansOfTransportation, &[]),

        (GroupA, _, Slot::Third) => (HistoryOrArt, &[MovieOrMusic]),
        (GroupB, High, Slot::Third) => (SweetOrSpicy, &[HistoryOrArt]),
        (GroupB, Low, Slot::Third) => (SweetOrSpicy, &[ConfirmSweetsName, HistoryOrArt]),
    };
    QuestionSpec::new(slot, prompt, followups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_a_high_second_slot_asks_sports() {
        let q = select_question(CategoryGroup::GroupA, Level::High, Slot::Second);
        assert_eq!(q.prompt, PromptKey::LikesSports);
        assert_eq!(q.followups, [PromptKey::ConfirmSportName]);
    }

    #[test]
    fn group_b_low_second_slot_asks_transport() {
        let q = select_question(CategoryGroup::GroupB, Level::Low, Slot::Second);
        assert_eq!(q.prompt, PromptKey::MeansOfTransportation);
        assert!(q.followups.is_empty());
    }

    #[test]
    fn first_slot_is_always_indoor_outdoor() {
        for g in CategoryGroup::ALL {
            for l in [Level::High, Level::Low] {
                let q = select_question(g, l, Slot::First);
                assert_eq!(q.prompt, PromptKey::IndoorOrOutdoor);
                assert!(q.followups.is_empty());
                assert_eq!(q.expected_tags, [Tag::Indoor, Tag::Outdoor].into());
            }
        }
    }

    #[test]
    fn prompt_at_steps() {
        let q = select_question(CategoryGroup::GroupB, Level::Low, Slot::Third);
        assert_eq!(q.prompt_at(0), Some(PromptKey::SweetOrSpicy));
        assert_eq!(q.prompt_at(1), Some(PromptKey::ConfirmSweetsName));
        assert_eq!(q.prompt_at(2), Some(PromptKey::HistoryOrArt));
        assert_eq!(q.prompt_at(3), None);
    }
}
