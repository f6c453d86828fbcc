use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// How many pieces of each kind were removed from a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleaningReport {
    pub emoji: usize,
    pub url: usize,
    pub mention: usize,
    pub html_entity: usize,
    pub punctuation: usize,
    pub excess_whitespace: usize,
}

impl CleaningReport {
    pub fn total(&self) -> usize {
        self.emoji
            + self.url
            + self.mention
            + self.html_entity
            + self.punctuation
            + self.excess_whitespace
    }

    pub fn add(&mut self, other: &CleaningReport) {
        self.emoji += other.emoji;
        self.url += other.url;
        self.mention += other.mention;
        self.html_entity += other.html_entity;
        self.punctuation += other.punctuation;
        self.excess_whitespace += other.excess_whitespace;
    }
}

fn html_entity_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"&(?:[A-Za-z][A-Za-z0-9]{1,31}|#[0-9]{1,7}|#[xX][0-9A-Fa-f]{1,6});").unwrap()
    })
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\B@\w+").unwrap())
}

/// Pictographs, emoticons, transport and supplemental symbols, dingbats,
/// regional indicators, skin-tone modifiers, variation selectors, ZWJ and
/// the keycap combiner.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2B00..=0x2BFF
        | 0xFE00..=0xFE0F
        | 0x200D
        | 0x20E3
        | 0xE0020..=0xE007F
    )
}

fn replace_counting(re: &Regex, text: &str, count: &mut usize) -> String {
    *count += re.find_iter(text).count();
    re.replace_all(text, " ").into_owned()
}

/// Normalizes a raw social-media post: drops HTML entities, URLs,
/// @mentions, emoji and punctuation (keeping apostrophes and hyphens
/// between two alphanumerics, and the words behind `#`), lowercases and
/// collapses whitespace. Idempotent.
pub fn clean_text(raw: &str) -> (String, CleaningReport) {
    let mut report = CleaningReport::default();
    let text = replace_counting(html_entity_re(), raw, &mut report.html_entity);
    let text = replace_counting(url_re(), &text, &mut report.url);
    let text = replace_counting(mention_re(), &text, &mut report.mention);

    let mut no_emoji = String::with_capacity(text.len());
    for c in text.chars() {
        if is_emoji(c) {
            report.emoji += 1;
            no_emoji.push(' ');
        } else {
            no_emoji.push(c);
        }
    }
    let lowered = no_emoji.to_lowercase();

    let chars: Vec<char> = lowered.chars().collect();
    let mut kept = String::with_capacity(lowered.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() || c.is_whitespace() {
            kept.push(c);
            continue;
        }
        let intra_word = matches!(c, '\'' | '-')
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if intra_word {
            kept.push(c);
        } else {
            report.punctuation += 1;
            kept.push(' ');
        }
    }

    let words: Vec<&str> = kept.split_whitespace().collect();
    let single_spaces = words.len().saturating_sub(1);
    // Whitespace inserted for removed pieces is not counted as excess.
    let original_ws = raw.chars().filter(|c| c.is_whitespace()).count();
    report.excess_whitespace = original_ws.saturating_sub(single_spaces);
    (words.join(" "), report)
}
