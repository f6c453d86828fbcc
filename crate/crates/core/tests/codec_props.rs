mod common;

use proptest::collection::vec;
use proptest::prelude::*;

use fkcap_core::codec::{construct_caption, recover_tuples, CaptionRule};
use fkcap_core::ingest::clean_text;
use fkcap_core::ingest::synth::APPEARANCE_WORDS;
use fkcap_core::model::{
    validate, Age, FashionItem, Gender, KnowledgeSet, Occasion, Person, PersonAttr, Schema,
    DEFAULT_ITEM_TYPES,
};

fn arb_person(max_items: usize) -> impl Strategy<Value = Person> {
    (
        0..Gender::ALL.len(),
        0..Age::ALL.len(),
        vec(
            (
                0..DEFAULT_ITEM_TYPES.len(),
                vec(0..APPEARANCE_WORDS.len(), 1..=3),
            ),
            1..=max_items,
        ),
    )
        .prop_map(|(g, a, raw)| {
            let mut items: Vec<FashionItem> = Vec::new();
            for (t, words) in raw {
                let app: Vec<&str> = words.iter().map(|&w| APPEARANCE_WORDS[w]).collect();
                let item = FashionItem::new(DEFAULT_ITEM_TYPES[t], app.join(" "));
                if !items.contains(&item) {
                    items.push(item);
                }
            }
            Person::new(PersonAttr::new(Gender::ALL[g], Age::ALL[a]), items)
        })
}

fn arb_knowledge(max_persons: usize, max_items: usize) -> impl Strategy<Value = KnowledgeSet> {
    (
        0..Occasion::ALL.len(),
        vec(arb_person(max_items), 1..=max_persons),
    )
        .prop_map(|(o, persons)| KnowledgeSet::new(Occasion::ALL[o], persons))
}

/// Strings assembled from grammar terminals, so the parser gets past its
/// first checks more often than with arbitrary text.
fn grammar_soup() -> impl Strategy<Value = String> {
    let words = prop::sample::select(vec![
        "The",
        "the",
        "occasion",
        "is",
        "daily",
        "wedding",
        "mars",
        "first",
        "second",
        "tenth",
        "male",
        "female",
        "kid",
        "old",
        "youth",
        "person",
        "wears",
        "a",
        "an",
        "and",
        "black",
        "upper",
        "pants",
        "dress",
        ".",
        ". ",
        "",
        "  ",
        "white",
        "dark blue",
    ]);
    vec(words, 0..40).prop_map(|ws| ws.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn construct_then_recover_is_identity(ks in arb_knowledge(4, 4)) {
        let schema = Schema::default();
        prop_assert!(validate(&ks, &schema).is_empty());
        let caption = construct_caption(&ks, CaptionRule::Ours).unwrap();
        let back = recover_tuples(&caption, &schema);
        prop_assert!(back.diagnostics.is_empty(), "{:?}", back.diagnostics);
        prop_assert_eq!(back.outcome, Some(ks));
    }

    #[test]
    fn construction_is_deterministic(ks in arb_knowledge(3, 3)) {
        for rule in CaptionRule::ALL {
            prop_assert_eq!(construct_caption(&ks, rule).unwrap(), construct_caption(&ks.clone(), rule).unwrap());
        }
    }

    #[test]
    fn recovery_is_total_on_arbitrary_text(text in "\\PC{0,120}") {
        let r = recover_tuples(&text, &Schema::default());
        prop_assert_eq!(r.is_null(), r.diagnostics.iter().any(|d| d.fatal));
        if let Some(ks) = &r.outcome {
            prop_assert!(validate(ks, &Schema::default()).is_empty());
        }
    }

    #[test]
    fn recovery_is_total_on_grammar_soup(text in grammar_soup()) {
        let r = recover_tuples(&text, &Schema::default());
        prop_assert_eq!(r.is_null(), r.diagnostics.iter().any(|d| d.fatal));
        if let Some(ks) = &r.outcome {
            prop_assert!(validate(ks, &Schema::default()).is_empty());
        }
    }

    // With one item per person, per-tuple and per-person sentences coincide,
    // so at least one person must carry two items.
    #[test]
    fn rules_are_pairwise_distinct(
        ks in arb_knowledge(4, 4).prop_filter("two persons, one with two items", |k| {
            k.persons.len() >= 2 && k.persons.iter().any(|p| p.items.len() >= 2)
        })
    ) {
        let captions: Vec<String> = CaptionRule::ALL.iter().map(|&r| construct_caption(&ks, r).unwrap()).collect();
        for i in 0..captions.len() {
            for j in i + 1..captions.len() {
                prop_assert_ne!(&captions[i], &captions[j]);
            }
        }
    }

    #[test]
    fn only_the_default_rule_is_recoverable(ks in arb_knowledge(3, 3)) {
        for rule in [CaptionRule::Rule1, CaptionRule::Rule2, CaptionRule::Rule3] {
            let r = recover_tuples(&construct_caption(&ks, rule).unwrap(), &Schema::default());
            prop_assert!(r.is_null(), "{rule}: {:?}", r.outcome);
        }
    }

    #[test]
    fn cleaning_is_idempotent(raw in "\\PC{0,80}") {
        let (once, _) = clean_text(&raw);
        let (twice, report) = clean_text(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(report.total(), 0);
    }
}

#[test]
fn fixed_examples_round_trip() {
    let schema = Schema::default();
    let ks = common::daily_example();
    let caption = construct_caption(&ks, CaptionRule::Ours).unwrap();
    assert_eq!(recover_tuples(&caption, &schema).outcome, Some(ks));
}
