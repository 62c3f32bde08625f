//! Sightseeing-spot knowledge base.
//!
//! The catalog is a line-oriented text file, one record per spot:
//!
//! ```text
//! spot s1
//! name: Harbor View Tower
//! group: A
//! point1: ...
//! point2: ...
//! point3: ...
//! attrs: indoor, history, art
//! photo: photos/s1.jpg
//! ```
//!
//! Records are separated by blank lines; `#` starts a comment line.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of spots in a catalog.
pub const CATALOG_SIZE: usize = 6;
/// Appeal statements per spot.
pub const POINTS_PER_SPOT: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("expected {CATALOG_SIZE} spots, found {0}")]
    SpotCount(usize),
    #[error("spot {spot}: expected {POINTS_PER_SPOT} recommendation points, found {found}")]
    Points { spot: String, found: usize },
    #[error("duplicate spot id {0}")]
    DuplicateId(String),
    #[error("spot {spot}: missing field {field}")]
    MissingField { spot: String, field: &'static str },
    #[error("spot {spot}: attrs must not be empty")]
    EmptyAttributes { spot: String },
    #[error("spot {spot}: unknown category group {value:?}")]
    Group { spot: String, value: String },
    #[error("spot {spot}: unknown tag {tag:?}")]
    UnknownTag { spot: String, tag: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Canonical answer/attribute tags.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Indoor,
    Outdoor,
    History,
    Art,
    Movie,
    Music,
    Sweet,
    Spicy,
    Sports,
    Train,
    Bus,
    Car,
    Walking,
}

impl Tag {
    pub const ALL: [Tag; 13] = [
        Tag::Indoor,
        Tag::Outdoor,
        Tag::History,
        Tag::Art,
        Tag::Movie,
        Tag::Music,
        Tag::Sweet,
        Tag::Spicy,
        Tag::Sports,
        Tag::Train,
        Tag::Bus,
        Tag::Car,
        Tag::Walking,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Indoor => "indoor",
            Tag::Outdoor => "outdoor",
            Tag::History => "history",
            Tag::Art => "art",
            Tag::Movie => "movie",
            Tag::Music => "music",
            Tag::Sweet => "sweet",
            Tag::Spicy => "spicy",
            Tag::Sports => "sports",
            Tag::Train => "train",
            Tag::Bus => "bus",
            Tag::Car => "car",
            Tag::Walking => "walking",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL.into_iter().find(|t| t.as_str() == s).ok_or(())
    }
}

/// The two spot categories the question policy distinguishes.
///
/// `GroupA` covers museums, galleries, towers and observation facilities;
/// `GroupB` covers museums, science museums, resource centers and parks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CategoryGroup {
    GroupA,
    GroupB,
}

impl CategoryGroup {
    pub const ALL: [CategoryGroup; 2] = [CategoryGroup::GroupA, CategoryGroup::GroupB];

    pub fn code(self) -> &'static str {
        match self {
            CategoryGroup::GroupA => "A",
            CategoryGroup::GroupB => "B",
        }
    }
}

impl fmt::Display for CategoryGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpotId(String);

impl SpotId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SpotId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SightseeingSpot {
    pub id: SpotId,
    pub name: String,
    pub category_group: CategoryGroup,
    pub recommendation_points: [String; POINTS_PER_SPOT],
    pub attributes: BTreeSet<Tag>,
    pub photo_ref: String,
}

/// Validated, immutable set of six spots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpotCatalog {
    spots: Vec<SightseeingSpot>,
}

impl SpotCatalog {
    pub fn new(spots: Vec<SightseeingSpot>) -> Result<Self, CatalogError> {
        if spots.len() != CATALOG_SIZE {
            return Err(CatalogError::SpotCount(spots.len()));
        }
        let mut ids = HashSet::new();
        for spot in &spots {
            if !ids.insert(spot.id.clone()) {
                return Err(CatalogError::DuplicateId(spot.id.to_string()));
            }
            if spot.attributes.is_empty() {
                return Err(CatalogError::EmptyAttributes {
                    spot: spot.id.to_string(),
                });
            }
        }
        Ok(Self { spots })
    }

    /// The bundled six-spot fixture catalog.
    pub fn builtin() -> Self {
        load_catalog(include_str!("../assets/catalog.txt")).expect("bundled catalog is valid")
    }

    pub fn spots(&self) -> &[SightseeingSpot] {
        &self.spots
    }

    pub fn get(&self, id: &SpotId) -> Option<&SightseeingSpot> {
        self.spots.iter().find(|s| &s.id == id)
    }

    pub fn contains(&self, id: &SpotId) -> bool {
        self.get(id).is_some()
    }

    pub fn serialize(&self) -> String {
        let records: Vec<String> = self.spots.iter().map(serialize_spot).collect();
        records.join("\n")
    }
}

fn serialize_spot(spot: &SightseeingSpot) -> String {
    let attrs: Vec<&str> = spot.attributes.iter().map(|t| t.as_str()).collect();
    let mut out = format!(
        "spot {}\nname: {}\ngroup: {}\n",
        spot.id,
        spot.name,
        spot.category_group.code()
    );
    for (i, point) in spot.recommendation_points.iter().enumerate() {
        out.push_str(&format!("point{}: {}\n", i + 1, point));
    }
    out.push_str(&format!("attrs: {}\nphoto: {}\n", attrs.join(", "), spot.photo_ref));
    out
}

#[derive(Default)]
struct Draft {
    id: String,
    name: Option<String>,
    group: Option<String>,
    points: Vec<(usize, String)>,
    attrs: Option<String>,
    photo: Option<String>,
}

impl Draft {
    fn finish(self) -> Result<SightseeingSpot, CatalogError> {
        let spot = self.id;
        let missing = |field| CatalogError::MissingField {
            spot: spot.clone(),
            field,
        };
        let name = self.name.ok_or_else(|| missing("name"))?;
        let group_raw = self.group.ok_or_else(|| missing("group"))?;
        let attrs_raw = self.attrs.ok_or_else(|| missing("attrs"))?;
        let photo_ref = self.photo.ok_or_else(|| missing("photo"))?;

        let category_group = match group_raw.as_str() {
            "A" => CategoryGroup::GroupA,
            "B" => CategoryGroup::GroupB,
            _ => {
                return Err(CatalogError::Group {
                    spot,
                    value: group_raw,
                })
            }
        };

        let mut points = self.points;
        points.sort_by_key(|(n, _)| *n);
        let numbered_in_order = points.iter().enumerate().all(|(i, (n, _))| *n == i + 1);
        if points.len() != POINTS_PER_SPOT || !numbered_in_order {
            return Err(CatalogError::Points {
                spot,
                found: points.len(),
            });
        }
        let mut points = points.into_iter().map(|(_, p)| p);
        let recommendation_points = [
            points.next().unwrap_or_default(),
            points.next().unwrap_or_default(),
            points.next().unwrap_or_default(),
        ];

        let mut attributes = BTreeSet::new();
        for raw in attrs_raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let tag = raw.parse::<Tag>().map_err(|_| CatalogError::UnknownTag {
                spot: spot.clone(),
                tag: raw.to_string(),
            })?;
            attributes.insert(tag);
        }
        if attributes.is_empty() {
            return Err(CatalogError::EmptyAttributes { spot });
        }

        Ok(SightseeingSpot {
            id: SpotId::new(spot),
            name,
            category_group,
            recommendation_points,
            attributes,
            photo_ref,
        })
    }
}

/// Parses and validates a catalog document.
pub fn load_catalog(source: &str) -> Result<SpotCatalog, CatalogError> {
    let mut spots = Vec::new();
    let mut current: Option<Draft> = None;

    for (lineno, raw) in source.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end();
        if line.trim_start().starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if let Some(draft) = current.take() {
                spots.push(draft.finish()?);
            }
            continue;
        }
        if let Some(id) = line.strip_prefix("spot ") {
            if let Some(draft) = current.take() {
                spots.push(draft.finish()?);
            }
            let id = id.trim();
            if id.is_empty() || id.contains(char::is_whitespace) {
                return Err(CatalogError::Parse {
                    line: line_no,
                    message: format!("bad spot id {id:?}"),
                });
            }
            current = Some(Draft {
                id: id.to_string(),
                ..Draft::default()
            });
            continue;
        }
        let Some(draft) = current.as_mut() else {
            return Err(CatalogError::Parse {
                line: line_no,
                message: "field outside of a spot record".into(),
            });
        };
        let (key, value) = line.split_once(':').ok_or_else(|| CatalogError::Parse {
            line: line_no,
            message: format!("expected `key: value`, got {line:?}"),
        })?;
        let value = value.trim().to_string();
        let duplicate = |key: &str| CatalogError::Parse {
            line: line_no,
            message: format!("duplicate field {key}"),
        };
        match key.trim() {
            "name" if draft.name.is_none() => draft.name = Some(value),
            "group" if draft.group.is_none() => draft.group = Some(value),
            "attrs" if draft.attrs.is_none() => draft.attrs = Some(value),
            "photo" if draft.photo.is_none() => draft.photo = Some(value),
            k @ ("name" | "group" | "attrs" | "photo") => return Err(duplicate(k)),
            k => match k.strip_prefix("point").and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if draft.points.iter().any(|(m, _)| *m == n) => return Err(duplicate(k)),
                Some(n) => draft.points.push((n, value)),
                None => {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        message: format!("unknown field {k:?}"),
                    })
                }
            },
        }
    }
    if let Some(draft) = current.take() {
        spots.push(draft.finish()?);
    }
    SpotCatalog::new(spots)
}

/// Number of distinct answer tags that the spot carries as attributes.
pub fn match_score<'a, I>(spot: &SightseeingSpot, answer_tags: I) -> usize
where
    I: IntoIterator<Item = &'a Tag>,
{
    let tags: BTreeSet<&Tag> = answer_tags.into_iter().collect();
    tags.into_iter()
        .filter(|t| spot.attributes.contains(t))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spot_block(id: &str, points: usize) -> String {
        let mut s = format!("spot {id}\nname: Spot {id}\ngroup: A\n");
        for i in 1..=points {
            s.push_str(&format!("point{i}: point {i}\n"));
        }
        s.push_str("attrs: indoor, art\nphoto: p.jpg\n");
        s
    }

    fn doc(ids: &[&str]) -> String {
        ids.iter()
            .map(|id| spot_block(id, 3))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn builtin_catalog_loads() {
        let catalog = SpotCatalog::builtin();
        assert_eq!(catalog.spots().len(), 6);
    }

    #[test]
    fn five_spots_is_a_catalog_error() {
        let err = load_catalog(&doc(&["a", "b", "c", "d", "e"])).unwrap_err();
        assert_eq!(err, CatalogError::SpotCount(5));
        assert!(err.to_string().contains("expected 6"));
    }

    #[test]
    fn two_points_names_the_spot() {
        let mut text = doc(&["a", "b", "c", "d", "e"]);
        text.push('\n');
        text.push_str(&spot_block("short", 2));
        let err = load_catalog(&text).unwrap_err();
        assert_eq!(
            err,
            CatalogError::Points {
                spot: "short".into(),
                found: 2
            }
        );
        assert!(err.to_string().contains("short"));
    }

    #[test]
    fn four_points_rejected() {
        let mut text = doc(&["a", "b", "c", "d", "e"]);
        text.push('\n');
        text.push_str(&spot_block("long", 4));
        assert!(matches!(
            load_catalog(&text),
            Err(CatalogError::Points { found: 4, .. })
        ));
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = load_catalog(&doc(&["a", "b", "c", "d", "e", "a"])).unwrap_err();
        assert_eq!(err, CatalogError::DuplicateId("a".into()));
    }

    #[test]
    fn unknown_tag_and_group_rejected() {
        let text = doc(&["a", "b", "c", "d", "e", "f"]).replacen("attrs: indoor, art", "attrs: indoor, jazz", 1);
        assert!(matches!(load_catalog(&text), Err(CatalogError::UnknownTag { .. })));
        let text = doc(&["a", "b", "c", "d", "e", "f"]).replacen("group: A", "group: C", 1);
        assert!(matches!(load_catalog(&text), Err(CatalogError::Group { .. })));
    }

    #[test]
    fn empty_attrs_rejected() {
        let text = doc(&["a", "b", "c", "d", "e", "f"]).replacen("attrs: indoor, art", "attrs: ", 1);
        assert!(matches!(load_catalog(&text), Err(CatalogError::EmptyAttributes { .. })));
    }

    #[test]
    fn missing_field_and_stray_line() {
        let text = doc(&["a", "b", "c", "d", "e", "f"]).replacen("photo: p.jpg\n", "", 1);
        assert_eq!(
            load_catalog(&text),
            Err(CatalogError::MissingField {
                spot: "a".into(),
                field: "photo"
            })
        );
        assert!(matches!(
            load_catalog("name: orphan\n"),
            Err(CatalogError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn match_score_examples() {
        let catalog = load_catalog(&doc(&["a", "b", "c", "d", "e", "f"])).unwrap();
        let mut spot = catalog.spots()[0].clone();
        spot.attributes = [Tag::Indoor, Tag::History, Tag::Art].into();
        assert_eq!(match_score(&spot, &[Tag::Indoor, Tag::History, Tag::Sweet]), 2);
        assert_eq!(match_score(&spot, &[]), 0);
        let attrs: Vec<Tag> = spot.attributes.iter().copied().collect();
        assert_eq!(match_score(&spot, &attrs), 3);
        // repeated tags count once
        assert_eq!(match_score(&spot, &[Tag::Art, Tag::Art]), 1);
    }
}
