//! Caption codec: renders a [`KnowledgeSet`] as a natural-language caption
//! and parses generated captions back into knowledge sets.
//!
//! Construction strategies sit behind [`CaptionStrategy`] and are looked up
//! by name through a [`CaptionRegistry`]. The grammar accepted by recovery
//! is documented in `docs/caption_grammar.md`.

mod recover;
mod rules;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::KnowledgeSet;

pub use recover::{
    parse_person_sentence, recover_tuples, Diagnostic, PersonSentence, RecoveryResult,
};
pub use rules::{item_phrase, OursRule, Rule1, Rule2, Rule3};

/// Separator placed between task prefix, task text and post text.
pub const SEP_TOKEN: &str = "[SEP]";

const ORDINALS: [&str; 9] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("ordinal out of range: {0} (supported 1..=9)")]
    OrdinalOutOfRange(usize),
    #[error("knowledge set has no persons")]
    NoPersons,
    #[error("person {0} has no items")]
    NoItems(usize),
    #[error("unknown caption rule: {0}")]
    UnknownRule(String),
}

/// English ordinal for a 1-based person index.
pub fn ordinal_word(m: usize) -> Result<&'static str, CodecError> {
    m.checked_sub(1)
        .and_then(|i| ORDINALS.get(i))
        .copied()
        .ok_or(CodecError::OrdinalOutOfRange(m))
}

/// Inverse of [`ordinal_word`].
pub fn parse_ordinal(word: &str) -> Option<usize> {
    ORDINALS.iter().position(|o| *o == word).map(|i| i + 1)
}

/// A way of turning a knowledge set into a caption.
pub trait CaptionStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Renders `ks`. Callers must have checked the structural preconditions
    /// (see [`check_renderable`]).
    fn render(&self, ks: &KnowledgeSet) -> String;
}

/// Built-in construction rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CaptionRule {
    #[default]
    Ours,
    Rule1,
    Rule2,
    Rule3,
}

impl CaptionRule {
    pub const ALL: [CaptionRule; 4] = [
        CaptionRule::Ours,
        CaptionRule::Rule1,
        CaptionRule::Rule2,
        CaptionRule::Rule3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaptionRule::Ours => "ours",
            CaptionRule::Rule1 => "rule1",
            CaptionRule::Rule2 => "rule2",
            CaptionRule::Rule3 => "rule3",
        }
    }

    pub fn strategy(self) -> &'static dyn CaptionStrategy {
        match self {
            CaptionRule::Ours => &OursRule,
            CaptionRule::Rule1 => &Rule1,
            CaptionRule::Rule2 => &Rule2,
            CaptionRule::Rule3 => &Rule3,
        }
    }
}

impl fmt::Display for CaptionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaptionRule {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaptionRule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| CodecError::UnknownRule(s.to_string()))
    }
}

/// Name-keyed set of caption strategies.
pub struct CaptionRegistry {
    strategies: BTreeMap<String, Box<dyn CaptionStrategy>>,
}

impl Default for CaptionRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(OursRule));
        registry.register(Box::new(Rule1));
        registry.register(Box::new(Rule2));
        registry.register(Box::new(Rule3));
        registry
    }
}

impl CaptionRegistry {
    pub fn empty() -> Self {
        Self {
            strategies: BTreeMap::new(),
        }
    }

    /// Adds a strategy, replacing any previous one with the same name.
    pub fn register(&mut self, strategy: Box<dyn CaptionStrategy>) {
        self.strategies
            .insert(strategy.name().to_string(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CaptionStrategy, CodecError> {
        self.strategies
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| CodecError::UnknownRule(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.strategies.keys().map(String::as_str)
    }

    pub fn construct(&self, name: &str, ks: &KnowledgeSet) -> Result<String, CodecError> {
        let strategy = self.get(name)?;
        check_renderable(ks)?;
        Ok(strategy.render(ks))
    }
}

/// Structural preconditions every strategy relies on.
pub fn check_renderable(ks: &KnowledgeSet) -> Result<(), CodecError> {
    if ks.persons.is_empty() {
        return Err(CodecError::NoPersons);
    }
    ordinal_word(ks.persons.len())?;
    if let Some(i) = ks.persons.iter().position(|p| p.items.is_empty()) {
        return Err(CodecError::NoItems(i));
    }
    Ok(())
}

/// Renders `ks` with the given rule.
pub fn construct_caption(ks: &KnowledgeSet, rule: CaptionRule) -> Result<String, CodecError> {
    check_renderable(ks)?;
    Ok(rule.strategy().render(ks))
}

/// Builds the model input `"{prefix} [SEP] {task_text} [SEP] {post_text}"`.
/// Empty segments are kept, so the result always has exactly two separators
/// (plus any the caller's text already contains).
pub fn assemble_input_text(task_prefix: &str, task_text: &str, post_text: &str) -> String {
    debug_assert!(!task_prefix.is_empty(), "task prefix must be non-empty");
    format!("{task_prefix} {SEP_TOKEN} {task_text} {SEP_TOKEN} {post_text}")
}
