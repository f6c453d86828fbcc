//! Domain types shared by every other module: occasions, person attributes,
//! fashion items and the grouped knowledge set of a post.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest number of persons a knowledge set may carry. Ordinal words stay
/// single tokens up to "ninth".
pub const DEFAULT_MAX_PERSONS: usize = 9;

/// Maximum number of words in an appearance description.
pub const MAX_APPEARANCE_WORDS: usize = 3;

/// Words that carry grammar in generated captions and therefore may not
/// appear inside an appearance.
pub const RESERVED_WORDS: [&str; 6] = ["and", "wears", "a", "an", "the", "occasion"];

/// Fashion item types used when no vocabulary file is supplied.
pub const DEFAULT_ITEM_TYPES: [&str; 14] = [
    "upper",
    "pants",
    "dress",
    "skirt",
    "bag",
    "hat",
    "glasses",
    "earring",
    "suit",
    "nightwear",
    "underwear",
    "babyclothes",
    "swimsuits",
    "footwear",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind}: {value}")]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, { $($variant:ident => $token:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ParseEnumError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($token => Ok($name::$variant),)+
                    _ => Err(ParseEnumError { kind: $kind, value: s.to_string() }),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

token_enum!(
    /// Occasion category of a post.
    Occasion, "occasion", {
        School => "school",
        Graduation => "graduation",
        Sports => "sports",
        Wedding => "wedding",
        Daily => "daily",
        Vacation => "vacation",
    }
);

token_enum!(Gender, "gender", { Male => "male", Female => "female" });

token_enum!(Age, "age", { Kid => "kid", Youth => "youth", Mid => "mid", Old => "old" });

impl Occasion {
    /// Maps an annotation label to an occasion. Accepts the long-form
    /// "daily wear" label and any casing.
    pub fn from_label(label: &str) -> Result<Self, ParseEnumError> {
        let norm = label
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        match norm.as_str() {
            "daily wear" => Ok(Occasion::Daily),
            other => other.parse(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PersonAttr {
    pub gender: Gender,
    pub age: Age,
}

impl PersonAttr {
    pub fn new(gender: Gender, age: Age) -> Self {
        Self { gender, age }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FashionItem {
    #[serde(rename = "type")]
    pub item_type: String,
    pub appearance: String,
}

impl FashionItem {
    pub fn new(item_type: impl Into<String>, appearance: impl Into<String>) -> Self {
        Self {
            item_type: item_type.into(),
            appearance: appearance.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Person {
    pub gender: Gender,
    pub age: Age,
    pub items: Vec<FashionItem>,
}

impl Person {
    pub fn new(attr: PersonAttr, items: Vec<FashionItem>) -> Self {
        Self {
            gender: attr.gender,
            age: attr.age,
            items,
        }
    }

    pub fn attr(&self) -> PersonAttr {
        PersonAttr::new(self.gender, self.age)
    }
}

/// All fashion knowledge of one post, grouped by person. Person order is
/// significant: it determines the ordinal each person is rendered with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnowledgeSet {
    pub occasion: Occasion,
    pub persons: Vec<Person>,
}

/// One fashion knowledge tuple `(occasion, gender, age, type, appearance)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tuple {
    pub occ: Occasion,
    pub gender: Gender,
    pub age: Age,
    #[serde(rename = "type")]
    pub item_type: String,
    pub app: String,
}

/// Row of the flat tuple export: a tuple plus the post and person it
/// belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlatTuple {
    pub post_id: String,
    pub occ: Occasion,
    pub person_idx: usize,
    pub gender: Gender,
    pub age: Age,
    #[serde(rename = "type")]
    pub item_type: String,
    pub app: String,
}

impl FlatTuple {
    pub fn tuple(&self) -> Tuple {
        Tuple {
            occ: self.occ,
            gender: self.gender,
            age: self.age,
            item_type: self.item_type.clone(),
            app: self.app.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("no tuples to group")]
    Empty,
    #[error("tuples disagree on occasion ({0} vs {1})")]
    MixedOccasion(Occasion, Occasion),
    #[error("person {0} has conflicting attributes")]
    ConflictingAttributes(usize),
    #[error("person indices are not contiguous from 0 (saw {0})")]
    NonContiguous(usize),
}

impl KnowledgeSet {
    pub fn new(occasion: Occasion, persons: Vec<Person>) -> Self {
        Self { occasion, persons }
    }

    /// Total number of tuples.
    pub fn tuple_count(&self) -> usize {
        self.persons.iter().map(|p| p.items.len()).sum()
    }

    pub fn tuples(&self) -> Vec<Tuple> {
        self.persons
            .iter()
            .flat_map(|p| {
                p.items.iter().map(move |item| Tuple {
                    occ: self.occasion,
                    gender: p.gender,
                    age: p.age,
                    item_type: item.item_type.clone(),
                    app: item.appearance.clone(),
                })
            })
            .collect()
    }

    pub fn flatten(&self, post_id: &str) -> Vec<FlatTuple> {
        self.persons
            .iter()
            .enumerate()
            .flat_map(|(idx, p)| {
                p.items.iter().map(move |item| FlatTuple {
                    post_id: post_id.to_string(),
                    occ: self.occasion,
                    person_idx: idx,
                    gender: p.gender,
                    age: p.age,
                    item_type: item.item_type.clone(),
                    app: item.appearance.clone(),
                })
            })
            .collect()
    }

    /// Rebuilds a knowledge set from flat rows. Rows of one person must be
    /// listed in item order; person indices must run 0..n.
    pub fn group(rows: &[FlatTuple]) -> Result<Self, GroupError> {
        let first = rows.first().ok_or(GroupError::Empty)?;
        let mut persons: Vec<Person> = Vec::new();
        for row in rows {
            if row.occ != first.occ {
                return Err(GroupError::MixedOccasion(first.occ, row.occ));
            }
            let item = FashionItem::new(row.item_type.clone(), row.app.clone());
            match row.person_idx.cmp(&persons.len()) {
                std::cmp::Ordering::Less => {
                    let person = &mut persons[row.person_idx];
                    if person.gender != row.gender || person.age != row.age {
                        return Err(GroupError::ConflictingAttributes(row.person_idx));
                    }
                    person.items.push(item);
                }
                std::cmp::Ordering::Equal => {
                    persons.push(Person::new(
                        PersonAttr::new(row.gender, row.age),
                        vec![item],
                    ));
                }
                std::cmp::Ordering::Greater => {
                    return Err(GroupError::NonContiguous(row.person_idx))
                }
            }
        }
        Ok(Self::new(first.occ, persons))
    }
}

/// Closed vocabulary of fashion item types. Types may span several words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeVocab {
    types: Vec<String>,
}

impl Default for TypeVocab {
    fn default() -> Self {
        Self::new(DEFAULT_ITEM_TYPES.iter().map(|s| s.to_string()))
    }
}

impl TypeVocab {
    /// Normalizes each entry to lowercase single-spaced form and drops
    /// duplicates, keeping first occurrence order.
    pub fn new<I, S>(types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let types = types
            .into_iter()
            .map(|t| normalize_phrase(t.as_ref()))
            .filter(|t| !t.is_empty() && seen.insert(t.clone()))
            .collect();
        Self { types }
    }

    pub fn from_json(json: &str) -> serde_json::Result<Self> {
        let raw: Vec<String> = serde_json::from_str(json)?;
        Ok(Self::new(raw))
    }

    pub fn contains(&self, item_type: &str) -> bool {
        self.types.iter().any(|t| t == item_type)
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    /// Every single word occurring in any type.
    pub fn words(&self) -> HashSet<&str> {
        self.types.iter().flat_map(|t| t.split(' ')).collect()
    }

    /// Longest type that is a suffix of `tokens`, returned as the number of
    /// tokens it spans and the type string.
    pub fn longest_suffix(&self, tokens: &[&str]) -> Option<(usize, &str)> {
        self.types
            .iter()
            .filter_map(|t| {
                let parts: Vec<&str> = t.split(' ').collect();
                (parts.len() <= tokens.len() && tokens[tokens.len() - parts.len()..] == parts[..])
                    .then_some((parts.len(), t.as_str()))
            })
            .max_by_key(|(len, _)| *len)
    }
}

/// Lowercase and collapse runs of whitespace.
pub fn normalize_phrase(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Bounds and vocabulary a knowledge set is validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub vocab: TypeVocab,
    pub max_persons: usize,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            vocab: TypeVocab::default(),
            max_persons: DEFAULT_MAX_PERSONS,
        }
    }
}

impl Schema {
    pub fn with_vocab(vocab: TypeVocab) -> Self {
        Self {
            vocab,
            ..Self::default()
        }
    }
}

/// One broken invariant. `location` pinpoints the offending element,
/// e.g. `persons[1].items[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: String,
    pub field: &'static str,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

fn violation(location: String, field: &'static str, rule: impl Into<String>) -> Violation {
    Violation {
        location,
        field,
        rule: rule.into(),
    }
}

/// Checks every knowledge-set invariant. An empty result means the set is
/// valid.
pub fn validate(ks: &KnowledgeSet, schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();
    if ks.persons.is_empty() {
        out.push(violation("persons".into(), "persons", "empty"));
    }
    if ks.persons.len() > schema.max_persons {
        out.push(violation(
            "persons".into(),
            "persons",
            format!("more than {} persons", schema.max_persons),
        ));
    }
    let type_words = schema.vocab.words();
    for (pi, person) in ks.persons.iter().enumerate() {
        if person.items.is_empty() {
            out.push(violation(format!("persons[{pi}].items"), "items", "empty"));
        }
        let mut seen = HashSet::new();
        for (ii, item) in person.items.iter().enumerate() {
            let loc = format!("persons[{pi}].items[{ii}]");
            if !schema.vocab.contains(&item.item_type) {
                out.push(violation(
                    loc.clone(),
                    "type",
                    format!("not in vocabulary: {}", item.item_type),
                ));
            }
            check_appearance(&item.appearance, &type_words, &loc, &mut out);
            if !seen.insert((&item.item_type, &item.appearance)) {
                out.push(violation(loc, "items", "duplicate item"));
            }
        }
    }
    out
}

fn check_appearance(app: &str, type_words: &HashSet<&str>, loc: &str, out: &mut Vec<Violation>) {
    let loc = format!("{loc}.appearance");
    if app.trim().is_empty() {
        out.push(violation(loc, "appearance", "empty"));
        return;
    }
    if normalize_phrase(app) != app {
        out.push(violation(
            loc.clone(),
            "appearance",
            "not lowercase single-spaced",
        ));
    }
    let words: Vec<&str> = app.split_whitespace().collect();
    if words.len() > MAX_APPEARANCE_WORDS {
        out.push(violation(
            loc.clone(),
            "appearance",
            format!("more than {MAX_APPEARANCE_WORDS} words"),
        ));
    }
    if app.contains('.') {
        out.push(violation(loc.clone(), "appearance", "contains '.'"));
    }
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    if lower.iter().any(|w| RESERVED_WORDS.contains(&w.as_str())) {
        out.push(violation(loc.clone(), "appearance", "reserved word"));
    }
    if lower.iter().any(|w| type_words.contains(w.as_str())) {
        out.push(violation(loc, "appearance", "contains item type word"));
    }
}

/// Detected image region as produced by an upstream object detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRegionRecord {
    pub tag: String,
    pub bbox: [f32; 4],
    pub confidence: f32,
    pub feature: Vec<f32>,
}

/// One social media sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub raw_text: String,
    #[serde(default)]
    pub clean_text: String,
    #[serde(default)]
    pub image_ref: Option<String>,
    #[serde(default)]
    pub gold: Option<KnowledgeSet>,
}
