use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::parse_ordinal;
use crate::model::{
    validate, Age, FashionItem, Gender, KnowledgeSet, Occasion, Person, PersonAttr, Schema,
    TypeVocab,
};

/// A note produced while parsing. `sentence` is the 0-based sentence index
/// (or `None` for whole-caption notes). Fatal notes are the reason the
/// outcome is null.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub sentence: Option<usize>,
    pub reason: String,
    pub fatal: bool,
}

impl Diagnostic {
    fn fatal(sentence: Option<usize>, reason: impl Into<String>) -> Self {
        Self {
            sentence,
            reason: reason.into(),
            fatal: true,
        }
    }

    fn note(sentence: Option<usize>, reason: impl Into<String>) -> Self {
        Self {
            sentence,
            reason: reason.into(),
            fatal: false,
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sentence {
            Some(i) => write!(f, "sentence {i}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub outcome: Option<KnowledgeSet>,
    pub diagnostics: Vec<Diagnostic>,
}

impl RecoveryResult {
    pub fn is_null(&self) -> bool {
        self.outcome.is_none()
    }

    fn null(diagnostics: Vec<Diagnostic>) -> Self {
        Self {
            outcome: None,
            diagnostics,
        }
    }
}

/// A parsed person sentence: the ordinal it carried and the person.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonSentence {
    pub ordinal: usize,
    pub person: Person,
}

/// Splits on `.` followed by whitespace or end of input. The flag tells
/// whether the final sentence lacked its closing period.
fn split_sentences(text: &str) -> (Vec<&str>, bool) {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '.' && chars.peek().is_none_or(|(_, next)| next.is_whitespace()) {
            out.push(text[start..i].trim());
            start = i + 1;
        }
    }
    let rest = text[start..].trim();
    let unterminated = !rest.is_empty();
    if unterminated {
        out.push(rest);
    }
    (out, unterminated)
}

fn lower_tokens(sentence: &str) -> Vec<String> {
    sentence.split_whitespace().map(str::to_lowercase).collect()
}

fn parse_occasion_sentence(sentence: &str) -> Result<Occasion, String> {
    let tokens = lower_tokens(sentence);
    let words: Vec<&str> = tokens.iter().map(String::as_str).collect();
    match words.as_slice() {
        ["the", "occasion", "is", rest @ ..] if !rest.is_empty() => {
            let label = rest.join(" ");
            Occasion::from_label(&label).map_err(|_| format!("unknown occasion: {label}"))
        }
        _ => Err(format!("expected occasion sentence, got '{sentence}'")),
    }
}

fn parse_attributes(tokens: &[&str]) -> Result<PersonAttr, String> {
    let mut gender = None;
    let mut age = None;
    for tok in tokens {
        if let Ok(g) = tok.parse::<Gender>() {
            if gender.replace(g).is_some() {
                return Err("gender given twice".into());
            }
        } else if let Ok(a) = tok.parse::<Age>() {
            if age.replace(a).is_some() {
                return Err("age given twice".into());
            }
        } else {
            return Err(format!("unexpected attribute token: {tok}"));
        }
    }
    match (gender, age) {
        (Some(g), Some(a)) => Ok(PersonAttr::new(g, a)),
        (None, _) => Err("missing attribute: gender".into()),
        (_, None) => Err("missing attribute: age".into()),
    }
}

fn parse_item(tokens: &[&str], vocab: &TypeVocab) -> Result<FashionItem, String> {
    let rest = match tokens {
        ["a" | "an", rest @ ..] if !rest.is_empty() => rest,
        _ => {
            return Err(format!(
                "item must read 'a <appearance> <type>': '{}'",
                tokens.join(" ")
            ))
        }
    };
    let (type_len, item_type) = vocab
        .longest_suffix(rest)
        .ok_or_else(|| format!("no item type in '{}'", rest.join(" ")))?;
    let app = &rest[..rest.len() - type_len];
    if app.is_empty() {
        return Err(format!("item without appearance: {item_type}"));
    }
    Ok(FashionItem::new(item_type, app.join(" ")))
}

/// Parses one person sentence such as
/// `"The first youth female wears a black upper and a dark blue pants"`.
/// Gender and age may come in either order; an optional `person` may
/// precede `wears`. A trailing period is ignored.
pub fn parse_person_sentence(sentence: &str, vocab: &TypeVocab) -> Result<PersonSentence, String> {
    let sentence = sentence.trim().trim_end_matches('.');
    let tokens = lower_tokens(sentence);
    let words: Vec<&str> = tokens.iter().map(String::as_str).collect();
    let (ordinal_tok, rest) = match words.as_slice() {
        ["the", ordinal, rest @ ..] => (*ordinal, rest),
        _ => return Err(format!("expected person sentence, got '{sentence}'")),
    };
    let ordinal =
        parse_ordinal(ordinal_tok).ok_or_else(|| format!("unknown ordinal: {ordinal_tok}"))?;
    let wears = rest
        .iter()
        .position(|w| *w == "wears")
        .ok_or("missing 'wears'")?;
    let mut attr_tokens = &rest[..wears];
    if let [head @ .., "person"] = attr_tokens {
        attr_tokens = head;
    }
    let attr = parse_attributes(attr_tokens)?;
    let item_tokens = &rest[wears + 1..];
    if item_tokens.is_empty() {
        return Err("no items after 'wears'".into());
    }
    let items = item_tokens
        .split(|w| *w == "and")
        .map(|group| parse_item(group, vocab))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PersonSentence {
        ordinal,
        person: Person::new(attr, items),
    })
}

/// Recovers a knowledge set from a generated caption. Any format violation
/// yields a null outcome; the diagnostics say why.
pub fn recover_tuples(caption: &str, schema: &Schema) -> RecoveryResult {
    let mut diagnostics = Vec::new();
    let (sentences, unterminated) = split_sentences(caption);
    if sentences.is_empty() {
        return RecoveryResult::null(vec![Diagnostic::fatal(None, "empty caption")]);
    }
    if unterminated {
        diagnostics.push(Diagnostic::note(
            Some(sentences.len() - 1),
            "missing final period",
        ));
    }

    let occasion = match parse_occasion_sentence(sentences[0]) {
        Ok(o) => o,
        Err(reason) => {
            diagnostics.push(Diagnostic::fatal(Some(0), reason));
            return RecoveryResult::null(diagnostics);
        }
    };
    if sentences.len() == 1 {
        diagnostics.push(Diagnostic::fatal(None, "no person sentences"));
        return RecoveryResult::null(diagnostics);
    }

    let mut persons = Vec::with_capacity(sentences.len() - 1);
    for (idx, sentence) in sentences.iter().enumerate().skip(1) {
        if sentence.is_empty() {
            diagnostics.push(Diagnostic::fatal(Some(idx), "empty sentence"));
            return RecoveryResult::null(diagnostics);
        }
        let parsed = match parse_person_sentence(sentence, &schema.vocab) {
            Ok(p) => p,
            Err(reason) => {
                diagnostics.push(Diagnostic::fatal(Some(idx), reason));
                return RecoveryResult::null(diagnostics);
            }
        };
        if parsed.ordinal != idx {
            diagnostics.push(Diagnostic::note(
                Some(idx),
                format!("ordinal {} at person position {idx}", parsed.ordinal),
            ));
        }
        let mut person = parsed.person;
        let mut seen = HashSet::new();
        let before = person.items.len();
        person.items.retain(|item| seen.insert(item.clone()));
        if person.items.len() < before {
            diagnostics.push(Diagnostic::note(
                Some(idx),
                format!("{} duplicate item(s) removed", before - person.items.len()),
            ));
        }
        persons.push(person);
    }

    let ks = KnowledgeSet::new(occasion, persons);
    let violations = validate(&ks, schema);
    if !violations.is_empty() {
        diagnostics.extend(
            violations
                .into_iter()
                .map(|v| Diagnostic::fatal(None, format!("{} ({})", v, v.location))),
        );
        return RecoveryResult::null(diagnostics);
    }
    RecoveryResult {
        outcome: Some(ks),
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{construct_caption, CaptionRule};

    fn schema() -> Schema {
        Schema::default()
    }

    fn recover(c: &str) -> RecoveryResult {
        recover_tuples(c, &schema())
    }

    fn reasons(r: &RecoveryResult) -> Vec<String> {
        r.diagnostics.iter().map(|d| d.reason.clone()).collect()
    }

    #[test]
    fn fragment_with_age_first() {
        let r = recover(
            "The occasion is daily. The first youth female wears a black upper and a dark blue pants.",
        );
        let ks = r.outcome.unwrap();
        assert_eq!(ks.occasion, Occasion::Daily);
        assert_eq!(ks.persons.len(), 1);
        assert_eq!(
            ks.persons[0].attr(),
            PersonAttr::new(Gender::Female, Age::Youth)
        );
        assert_eq!(
            ks.persons[0].items,
            vec![
                FashionItem::new("upper", "black"),
                FashionItem::new("pants", "dark blue")
            ]
        );
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn unknown_occasion_is_null() {
        let r = recover("The occasion is mars. The first male kid wears a black upper.");
        assert!(r.is_null());
        assert_eq!(reasons(&r), vec!["unknown occasion: mars"]);
        assert_eq!(r.diagnostics[0].sentence, Some(0));
    }

    #[test]
    fn format_violations_are_null() {
        let cases = [
            ("", "empty caption"),
            ("The occasion is daily.", "no person sentences"),
            (
                "The first male kid wears a black upper.",
                "expected occasion sentence",
            ),
            (
                "The occasion is daily. The first male wears a black upper.",
                "missing attribute: age",
            ),
            (
                "The occasion is daily. The first male kid old wears a black upper.",
                "age given twice",
            ),
            (
                "The occasion is daily. The first male kid has a black upper.",
                "missing 'wears'",
            ),
            (
                "The occasion is daily. The tenth male kid wears a black upper.",
                "unknown ordinal: tenth",
            ),
            (
                "The occasion is daily. The first male kid wears.",
                "no items after 'wears'",
            ),
            (
                "The occasion is daily. The first male kid wears a black cape.",
                "no item type in 'black cape'",
            ),
            (
                "The occasion is daily. The first male kid wears a upper.",
                "item without appearance: upper",
            ),
            (
                "The occasion is daily. The first male kid wears black upper.",
                "item must read",
            ),
            (
                "The occasion is daily. The first male kid wears a black upper and.",
                "item must read",
            ),
            (
                "The occasion is daily. . The first male kid wears a black upper.",
                "empty sentence",
            ),
        ];
        for (caption, reason) in cases {
            let r = recover(caption);
            assert!(r.is_null(), "{caption}");
            assert!(
                reasons(&r).iter().any(|x| x.starts_with(reason)),
                "{caption}: {:?}",
                reasons(&r)
            );
        }
    }

    #[test]
    fn validation_failures_are_null() {
        let r =
            recover("The occasion is daily. The first male kid wears a very dark navy blue upper.");
        assert!(r.is_null());
        assert!(reasons(&r)[0].starts_with("appearance: more than 3 words"));
    }

    #[test]
    fn lenient_forms() {
        let r = recover("the occasion is daily. The first male kid person wears an orange upper");
        let ks = r.outcome.clone().unwrap();
        assert_eq!(ks.persons[0].items[0], FashionItem::new("upper", "orange"));
        assert_eq!(reasons(&r), vec!["missing final period"]);

        let r = recover("The occasion is daily wear. The second male kid wears a red hat.");
        assert_eq!(r.outcome.as_ref().unwrap().occasion, Occasion::Daily);
        assert_eq!(reasons(&r), vec!["ordinal 2 at person position 1"]);
    }

    #[test]
    fn duplicates_collapse_with_note() {
        let r = recover("The occasion is sports. The first female mid wears a red hat and a red hat and a grey bag.");
        let ks = r.outcome.clone().unwrap();
        assert_eq!(ks.persons[0].items.len(), 2);
        assert_eq!(reasons(&r), vec!["1 duplicate item(s) removed"]);
        assert!(!r.diagnostics[0].fatal);
    }

    #[test]
    fn multi_word_types_match_longest_suffix() {
        let schema = Schema::with_vocab(TypeVocab::new(["top", "tank top", "bag"]));
        let r = recover_tuples(
            "The occasion is vacation. The first female youth wears a striped tank top.",
            &schema,
        );
        assert_eq!(
            r.outcome.unwrap().persons[0].items[0],
            FashionItem::new("tank top", "striped")
        );
    }

    #[test]
    fn period_inside_token_does_not_split() {
        let (sentences, unterminated) = split_sentences("a 1.5 b. c");
        assert_eq!(sentences, vec!["a 1.5 b", "c"]);
        assert!(unterminated);
        let r = recover("The occasion is daily. The first male kid wears a 1.5 upper.");
        assert!(r.is_null());
    }

    #[test]
    fn person_sentence_parser() {
        let vocab = TypeVocab::default();
        let p =
            parse_person_sentence("The first youth female wears a black upper", &vocab).unwrap();
        assert_eq!(p.ordinal, 1);
        assert_eq!(p.person.attr(), PersonAttr::new(Gender::Female, Age::Youth));
        assert_eq!(p.person.items, vec![FashionItem::new("upper", "black")]);
    }

    #[test]
    fn round_trips_example() {
        let ks = crate::codec::tests::daily_example();
        let caption = construct_caption(&ks, CaptionRule::Ours).unwrap();
        let r = recover(&caption);
        assert_eq!(r.outcome, Some(ks));
        assert!(r.diagnostics.is_empty());
    }
}
