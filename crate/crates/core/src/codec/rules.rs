use super::{ordinal_word, CaptionStrategy};
use crate::model::{KnowledgeSet, Person};

fn ordinal(idx: usize) -> &'static str {
    ordinal_word(idx + 1).expect("person count checked before rendering")
}

/// `a {app} {type}` phrases joined with `and`.
pub fn item_phrase(person: &Person) -> String {
    person
        .items
        .iter()
        .map(|item| format!("a {} {}", item.appearance, item.item_type))
        .collect::<Vec<_>>()
        .join(" and ")
}

fn subject(idx: usize, person: &Person) -> String {
    format!("The {} {} {}", ordinal(idx), person.gender, person.age)
}

/// Occasion sentence first, then one sentence per person listing all of
/// that person's items.
pub struct OursRule;

impl CaptionStrategy for OursRule {
    fn name(&self) -> &'static str {
        "ours"
    }

    fn render(&self, ks: &KnowledgeSet) -> String {
        let mut sentences = vec![format!("The occasion is {}.", ks.occasion)];
        for (idx, person) in ks.persons.iter().enumerate() {
            sentences.push(format!(
                "{} wears {}.",
                subject(idx, person),
                item_phrase(person)
            ));
        }
        sentences.join(" ")
    }
}

/// One sentence per tuple, each closed by the occasion.
pub struct Rule1;

impl CaptionStrategy for Rule1 {
    fn name(&self) -> &'static str {
        "rule1"
    }

    fn render(&self, ks: &KnowledgeSet) -> String {
        let mut sentences = Vec::with_capacity(ks.tuple_count());
        for (idx, person) in ks.persons.iter().enumerate() {
            for item in &person.items {
                sentences.push(format!(
                    "{} wears a {} {} in {}.",
                    subject(idx, person),
                    item.appearance,
                    item.item_type,
                    ks.occasion
                ));
            }
        }
        sentences.join(" ")
    }
}

/// One sentence per person, each closed by the occasion.
pub struct Rule2;

impl CaptionStrategy for Rule2 {
    fn name(&self) -> &'static str {
        "rule2"
    }

    fn render(&self, ks: &KnowledgeSet) -> String {
        ks.persons
            .iter()
            .enumerate()
            .map(|(idx, person)| {
                format!(
                    "{} wears {} in {}.",
                    subject(idx, person),
                    item_phrase(person),
                    ks.occasion
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Occasion, then all person attributes, then the items of each person.
pub struct Rule3;

impl CaptionStrategy for Rule3 {
    fn name(&self) -> &'static str {
        "rule3"
    }

    fn render(&self, ks: &KnowledgeSet) -> String {
        let attrs = ks
            .persons
            .iter()
            .map(|p| format!("a {} {}", p.gender, p.age))
            .collect::<Vec<_>>()
            .join(" and ");
        let mut sentences = vec![
            format!("The occasion is {}.", ks.occasion),
            format!("The person is {attrs}."),
        ];
        for (idx, person) in ks.persons.iter().enumerate() {
            sentences.push(format!(
                "The {} person wears {}.",
                ordinal(idx),
                item_phrase(person)
            ));
        }
        sentences.join(" ")
    }
}
