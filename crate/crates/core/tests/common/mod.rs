//! Independent oracles and fixture generators shared by the integration
//! suites. Nothing here calls the metric code under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fkcap_core::aux_tasks::{
    make_itm_instance, make_src_instance, make_vqa_with_kind, AuxTask, TaskSampler, VqaKind,
    MASK_TOKEN,
};
use fkcap_core::ingest::synth::random_knowledge;
use fkcap_core::ingest::synth_corpus;
use fkcap_core::metrics::EvalItem;
use fkcap_core::model::{
    Age, FashionItem, Gender, KnowledgeSet, Occasion, Person, PersonAttr, Post, Tuple, TypeVocab,
};
use fkcap_core::seed;

/// The three-tuple example used throughout: a daily post with a male kid
/// in a black upper and white pants, and a female old in a blue dress.
pub fn daily_example() -> KnowledgeSet {
    KnowledgeSet::new(
        Occasion::Daily,
        vec![
            Person::new(
                PersonAttr::new(Gender::Male, Age::Kid),
                vec![
                    FashionItem::new("upper", "black"),
                    FashionItem::new("pants", "white"),
                ],
            ),
            Person::new(
                PersonAttr::new(Gender::Female, Age::Old),
                vec![FashionItem::new("dress", "blue")],
            ),
        ],
    )
}

// ---------------------------------------------------------------- corpora

const SMALL_LEXICON: [&str; 4] = ["black", "white", "red", "striped"];

/// A small vocabulary and lexicon so predictions and gold collide often.
pub fn small_vocab() -> TypeVocab {
    TypeVocab::new(["upper", "pants", "dress", "bag"])
}

fn perturb(gold: &KnowledgeSet, rng: &mut ChaCha8Rng, vocab: &TypeVocab) -> KnowledgeSet {
    let mut ks = gold.clone();
    if rng.gen_bool(0.2) {
        ks.occasion = *Occasion::ALL.choose(rng).unwrap();
    }
    for person in &mut ks.persons {
        if rng.gen_bool(0.15) {
            person.age = *Age::ALL.choose(rng).unwrap();
        }
        for item in &mut person.items {
            if rng.gen_bool(0.25) {
                item.appearance = SMALL_LEXICON.choose(rng).unwrap().to_string();
            }
            if rng.gen_bool(0.1) {
                item.item_type = vocab.types().choose(rng).unwrap().clone();
            }
        }
        if person.items.len() > 1 && rng.gen_bool(0.2) {
            person.items.pop();
        }
    }
    if rng.gen_bool(0.2) {
        // A duplicate person makes the prediction a true multiset.
        let copy = ks.persons[0].clone();
        ks.persons.push(copy);
    }
    ks
}

/// `n` posts with random gold and a perturbed, sometimes null prediction.
/// Returns the items and, per item, the predicted occasion as the oracle
/// sees it (taken from the predicted knowledge set, not from tuples).
pub fn random_eval_corpus(n: usize, seed_value: u64) -> (Vec<EvalItem>, Vec<Option<Occasion>>) {
    let vocab = small_vocab();
    let mut rng = seed::rng(seed_value);
    let mut items = Vec::with_capacity(n);
    let mut occasions = Vec::with_capacity(n);
    for i in 0..n {
        let n_persons = rng.gen_range(1..=3);
        let gold = random_knowledge(&mut rng, &vocab, &SMALL_LEXICON, n_persons, |r| {
            r.gen_range(1..=3)
        });
        let pred = (!rng.gen_bool(0.15)).then(|| perturb(&gold, &mut rng, &vocab));
        occasions.push(pred.as_ref().map(|k| k.occasion));
        items.push(EvalItem {
            post_id: format!("p{i}"),
            gold,
            pred: pred.map(|k| k.tuples()),
            caption: None,
        });
    }
    (items, occasions)
}

/// Random training tuples drawn from the same small space, so all three
/// frequency buckets are populated.
pub fn random_train_tuples(n: usize, seed_value: u64) -> Vec<Tuple> {
    let vocab = small_vocab();
    let mut rng = seed::rng(seed_value);
    (0..n)
        .map(|_| {
            random_knowledge(&mut rng, &vocab, &SMALL_LEXICON[..2], 1, |_| 1)
                .tuples()
                .remove(0)
        })
        .collect()
}

// ---------------------------------------------------------------- oracles

fn counts<T: Ord + Clone>(xs: &[T]) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x.clone()).or_insert(0) += 1;
    }
    m
}

/// Multiset intersection size via counts: Σ_key min(#pred, #gold).
pub fn count_tp<T: Ord + Clone>(pred: &[T], gold: &[T]) -> usize {
    let (p, g) = (counts(pred), counts(gold));
    p.iter()
        .map(|(k, c)| (*c).min(g.get(k).copied().unwrap_or(0)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePrf {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

fn div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Micro P/R/F1 and exact-post accuracy on a projection of the tuples.
pub fn oracle_projected<K: Ord + Clone>(
    items: &[EvalItem],
    key: impl Fn(&Tuple) -> K,
) -> OraclePrf {
    let (mut tp, mut n_pred, mut n_gold, mut exact) = (0, 0, 0, 0);
    for item in items {
        let pred: Vec<K> = item
            .pred
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(&key)
            .collect();
        let gold: Vec<K> = item.gold.tuples().iter().map(&key).collect();
        let t = count_tp(&pred, &gold);
        tp += t;
        n_pred += pred.len();
        n_gold += gold.len();
        if counts(&pred) == counts(&gold) {
            exact += 1;
        }
    }
    let (precision, recall) = (div(tp, n_pred), div(tp, n_gold));
    OraclePrf {
        tp,
        fp: n_pred - tp,
        fn_: n_gold - tp,
        precision,
        recall,
        f1: f1(precision, recall),
        accuracy: div(exact, items.len()),
    }
}

/// Occasion accuracy and macro P/R over classes seen in gold or prediction,
/// from a confusion table.
pub fn oracle_occasion(items: &[EvalItem], predicted: &[Option<Occasion>]) -> (f64, f64, f64) {
    let mut confusion: HashMap<(Occasion, Option<Occasion>), usize> = HashMap::new();
    for (item, p) in items.iter().zip(predicted) {
        *confusion.entry((item.gold.occasion, *p)).or_insert(0) += 1;
    }
    let classes: BTreeSet<Occasion> = confusion
        .keys()
        .flat_map(|(g, p)| std::iter::once(*g).chain(*p))
        .collect();
    let correct: usize = confusion
        .iter()
        .filter(|((g, p), _)| Some(*g) == *p)
        .map(|(_, c)| c)
        .sum();
    let (mut ps, mut rs) = (0.0, 0.0);
    for c in &classes {
        let tp = confusion.get(&(*c, Some(*c))).copied().unwrap_or(0);
        let col: usize = confusion
            .iter()
            .filter(|((_, p), _)| *p == Some(*c))
            .map(|(_, n)| n)
            .sum();
        let row: usize = confusion
            .iter()
            .filter(|((g, _), _)| g == c)
            .map(|(_, n)| n)
            .sum();
        ps += div(tp, col);
        rs += div(tp, row);
    }
    let k = classes.len() as f64;
    (div(correct, items.len()), ps / k, rs / k)
}

/// Bucket recall per (common, rare, unseen): each distinct gold tuple key
/// contributes min(#pred, #gold) matches within its post.
pub fn oracle_bucket_recall(items: &[EvalItem], train: &[Tuple]) -> [(usize, usize); 3] {
    let train_counts = counts(train);
    let bucket = |t: &Tuple| match train_counts.get(t).copied().unwrap_or(0) {
        0 => 2,
        1..=5 => 1,
        _ => 0,
    };
    let mut out = [(0usize, 0usize); 3];
    for item in items {
        let gold = counts(&item.gold.tuples());
        let pred = counts(item.pred.as_deref().unwrap_or(&[]));
        for (t, g) in gold {
            let b = bucket(&t);
            out[b].0 += g;
            out[b].1 += g.min(pred.get(&t).copied().unwrap_or(0));
        }
    }
    out
}

/// Second BLEU: n-grams as joined strings, precision product and the
/// textbook brevity penalty.
pub fn reference_bleu(hyps: &[String], refs: &[String], n: usize) -> f64 {
    let tok = |s: &str| -> Vec<String> {
        let mut out = Vec::new();
        for word in s.split_whitespace() {
            let lower = word.to_lowercase();
            let mut cur = String::new();
            for ch in lower.chars() {
                if ch == '.' {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                    out.push(".".to_string());
                } else {
                    cur.push(ch);
                }
            }
            if !cur.is_empty() {
                out.push(cur);
            }
        }
        out
    };
    let grams = |t: &[String], k: usize| -> HashMap<String, usize> {
        let mut m = HashMap::new();
        if t.len() >= k {
            for i in 0..=t.len() - k {
                *m.entry(t[i..i + k].join(" ")).or_insert(0) += 1;
            }
        }
        m
    };
    let (mut c, mut r) = (0usize, 0usize);
    let mut num = vec![0usize; n];
    let mut den = vec![0usize; n];
    for (h, rf) in hyps.iter().zip(refs) {
        let (ht, rt) = (tok(h), tok(rf));
        c += ht.len();
        r += rt.len();
        for k in 1..=n {
            let rg = grams(&rt, k);
            for (g, cnt) in grams(&ht, k) {
                num[k - 1] += cnt.min(*rg.get(&g).unwrap_or(&0));
                den[k - 1] += cnt;
            }
        }
    }
    if c == 0 || num.contains(&0) {
        return 0.0;
    }
    let mut product = 1.0f64;
    for k in 0..n {
        product *= num[k] as f64 / den[k] as f64;
    }
    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    bp * product.powf(1.0 / n as f64)
}

/// METEOR cases worked out by hand: (hypothesis, reference, score).
///
/// 1. identity of four tokens: m=4, one chunk, Fmean 1, penalty 0.5/64.
/// 2. male vs female: 3 exact matches, 2 chunks, P=R=3/4,
///    penalty 0.5·(2/3)³ = 4/27 → 3/4 · 23/27.
/// 3. stem stage: "black" exact, "dresses"~"dress" by stem; m=2, P=1/2,
///    R=1, Fmean 10/11, 2 chunks of 2 matches → penalty 1/2.
/// 4. crossed repeats: four singleton chunks, Fmean 1, penalty 1/2.
/// 5. truncated reference: m=5 of 7 reference tokens, one chunk,
///    Fmean 25/34, penalty 1/250.
pub fn meteor_hand_cases() -> Vec<(&'static str, &'static str, f64)> {
    vec![
        ("the first male kid", "the first male kid", 127.0 / 128.0),
        ("the first male kid", "the first female kid", 23.0 / 36.0),
        ("the dresses are black", "black dress", 5.0 / 11.0),
        ("a red a blue", "a blue a red", 0.5),
        (
            "The occasion is daily.",
            "The occasion is daily. The first",
            249.0 / 340.0,
        ),
    ]
}

// ---------------------------------------------------------------- rates

pub fn synthetic_posts(n: usize, seed_value: u64) -> Vec<Post> {
    synth_corpus(n, seed_value, &TypeVocab::default())
}

/// Fraction of caption tokens masked, over at least `min_tokens` tokens.
pub fn src_mask_rate(min_tokens: usize, seed_value: u64) -> (f64, usize) {
    let posts = synthetic_posts(2000, seed_value);
    let (mut masked, mut total) = (0usize, 0usize);
    let mut i = 0u64;
    while total < min_tokens {
        let post = &posts[i as usize % posts.len()];
        let inst = make_src_instance(
            &post.id,
            post.gold.as_ref().unwrap(),
            seed::derive_indexed(seed_value, "src", i),
        )
        .unwrap();
        masked += inst
            .task_text
            .split_whitespace()
            .filter(|t| *t == MASK_TOKEN)
            .count();
        total += inst.task_text.split_whitespace().count();
        i += 1;
    }
    (masked as f64 / total as f64, total)
}

pub fn itm_negative_rate(draws: usize, seed_value: u64) -> f64 {
    let posts = synthetic_posts(500, seed_value);
    let negatives = (0..draws)
        .filter(|&i| {
            let post = &posts[i % posts.len()];
            let inst = make_itm_instance(
                post,
                &posts,
                seed::derive_indexed(seed_value, "itm", i as u64),
            )
            .unwrap();
            inst.target == "false"
        })
        .count();
    negatives as f64 / draws as f64
}

pub fn vqa_kind_freqs(draws: usize, seed_value: u64) -> [f64; 4] {
    let posts = synthetic_posts(500, seed_value);
    let mut counts = [0usize; 4];
    for i in 0..draws {
        let post = &posts[i % posts.len()];
        let (kind, _) = make_vqa_with_kind(
            &post.id,
            post.gold.as_ref().unwrap(),
            seed::derive_indexed(seed_value, "vqa", i as u64),
        )
        .unwrap();
        counts[VqaKind::ALL.iter().position(|k| *k == kind).unwrap()] += 1;
    }
    counts.map(|c| c as f64 / draws as f64)
}

pub fn sampler_freqs(draws: usize, seed_value: u64) -> [f64; 3] {
    let pools: Vec<(AuxTask, usize)> = AuxTask::AUXILIARY.iter().map(|&t| (t, 1000)).collect();
    let mut sampler = TaskSampler::new(&pools, seed_value).unwrap();
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        let batch = sampler.sample_task_batch(8).unwrap();
        counts[AuxTask::AUXILIARY
            .iter()
            .position(|t| *t == batch.task)
            .unwrap()] += 1;
    }
    counts.map(|c| c as f64 / draws as f64)
}
