mod common;

use common::*;
use fkcap_core::codec::{construct_caption, CaptionRule};
use fkcap_core::metrics::{
    aspect_metrics, bleu_n, bucket_recall, corpus_prf, frequency_buckets, meteor, meteor_alignment,
    post_accuracy, Aspect, EvalItem, Matching,
};
use fkcap_core::model::Tuple;

const CORPORA: u64 = 50;
const POSTS: usize = 20;

fn matchings(items: &[EvalItem]) -> Vec<Matching> {
    items.iter().map(EvalItem::matching).collect()
}

#[test]
fn tuple_prf_and_post_accuracy_match_recount() {
    for s in 0..CORPORA {
        let (items, _) = random_eval_corpus(POSTS, s);
        let want = oracle_projected(&items, Tuple::clone);
        let ms = matchings(&items);
        let got = corpus_prf(&ms);
        assert_eq!(
            (got.tp, got.fp, got.fn_),
            (want.tp, want.fp, want.fn_),
            "corpus {s}"
        );
        assert_eq!(
            (got.precision, got.recall, got.f1),
            (want.precision, want.recall, want.f1),
            "corpus {s}"
        );
        assert_eq!(post_accuracy(&ms), want.accuracy, "corpus {s}");
    }
}

#[test]
fn aspect_metrics_match_recount() {
    for s in 0..CORPORA {
        let (items, occasions) = random_eval_corpus(POSTS, s);

        let occ = aspect_metrics(&items, Aspect::Occasion);
        let (acc, p, r) = oracle_occasion(&items, &occasions);
        assert_eq!(
            (occ.accuracy, occ.prf.precision, occ.prf.recall),
            (acc, p, r),
            "corpus {s}"
        );

        let cat = aspect_metrics(&items, Aspect::Category);
        let want = oracle_projected(&items, |t| (t.gender, t.age, t.item_type.clone()));
        assert_eq!(
            (cat.prf.tp, cat.prf.fp, cat.prf.fn_),
            (want.tp, want.fp, want.fn_),
            "corpus {s}"
        );
        assert_eq!(
            (cat.prf.f1, cat.accuracy),
            (want.f1, want.accuracy),
            "corpus {s}"
        );

        let app = aspect_metrics(&items, Aspect::Appearance);
        let want = oracle_projected(&items, |t| {
            (t.gender, t.age, t.item_type.clone(), t.app.clone())
        });
        assert_eq!(
            (app.prf.tp, app.prf.fp, app.prf.fn_),
            (want.tp, want.fp, want.fn_),
            "corpus {s}"
        );
        assert_eq!(
            (app.prf.f1, app.accuracy),
            (want.f1, want.accuracy),
            "corpus {s}"
        );
    }
}

#[test]
fn bucket_recall_matches_recount() {
    let train = random_train_tuples(2000, 99);
    let mut populated = [false; 3];
    for s in 0..CORPORA {
        let (items, _) = random_eval_corpus(POSTS, s);
        let test: Vec<Tuple> = items.iter().flat_map(|i| i.gold.tuples()).collect();
        let got = bucket_recall(&frequency_buckets(&train, &test), &items);
        let want = oracle_bucket_recall(&items, &train);
        for (i, b) in [got.common, got.rare, got.unseen].iter().enumerate() {
            assert_eq!((b.gold, b.matched), want[i], "corpus {s} bucket {i}");
            populated[i] |= b.gold > 0;
        }
    }
    assert_eq!(populated, [true; 3], "fixture should exercise every bucket");
}

#[test]
fn bleu_matches_second_implementation() {
    let mut nonzero = 0;
    for s in 0..CORPORA {
        let (items, _) = random_eval_corpus(POSTS, s);
        let refs: Vec<String> = items
            .iter()
            .map(|i| construct_caption(&i.gold, CaptionRule::Ours).unwrap())
            .collect();
        // Hypotheses: captions of the perturbed predictions, or a stub when null.
        let hyps: Vec<String> = items
            .iter()
            .map(|i| match &i.pred {
                Some(ts) => ts
                    .iter()
                    .map(|t| {
                        format!(
                            "The first {} {} wears a {} {}. ",
                            t.gender, t.age, t.app, t.item_type
                        )
                    })
                    .collect(),
                None => "The occasion is daily.".to_string(),
            })
            .collect();
        for n in [1, 2] {
            let got = bleu_n(&hyps, &refs, n).unwrap();
            let want = reference_bleu(&hyps, &refs, n);
            assert!(
                (got - want).abs() <= 1e-9,
                "corpus {s} BLEU-{n}: {got} vs {want}"
            );
            nonzero += usize::from(got > 0.0);
        }
        assert!((bleu_n(&refs, &refs, 2).unwrap() - 1.0).abs() <= 1e-12);
    }
    assert_eq!(nonzero, 2 * CORPORA as usize);
}

#[test]
fn meteor_matches_hand_alignments() {
    for (h, r, want) in meteor_hand_cases() {
        let got = meteor(h, r);
        assert!(
            (got - want).abs() <= 1e-9,
            "{h:?} vs {r:?}: {got} != {want}"
        );
    }
    let a = meteor_alignment("the dresses are black", "black dress");
    assert_eq!(a.pairs, [(1, 1), (3, 0)]);
    assert_eq!(a.chunks, 2);
}
