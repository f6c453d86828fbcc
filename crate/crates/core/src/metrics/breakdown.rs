use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{ratio, EvalItem, TuplePRF};
use crate::model::Tuple;

/// Tuples seen at most this many times in training are rare; more often
/// is common.
pub const RARE_MAX_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountBucket {
    pub n_persons: usize,
    pub n_items: usize,
    pub n_posts: usize,
    #[serde(flatten)]
    pub prf: TuplePRF,
}

/// Micro PRF per `(gold person count, gold item count)` bucket. Buckets
/// without posts are absent.
pub fn breakdown_by_counts(items: &[EvalItem]) -> Vec<CountBucket> {
    let mut buckets: BTreeMap<(usize, usize), (usize, usize, usize, usize)> = BTreeMap::new();
    for item in items {
        let key = (item.gold.persons.len(), item.gold.tuple_count());
        let m = item.matching();
        let entry = buckets.entry(key).or_default();
        entry.0 += 1;
        entry.1 += m.tp;
        entry.2 += m.fp;
        entry.3 += m.fn_;
    }
    buckets
        .into_iter()
        .map(
            |((n_persons, n_items), (n_posts, tp, fp, fn_))| CountBucket {
                n_persons,
                n_items,
                n_posts,
                prf: TuplePRF::from_counts(tp, fp, fn_),
            },
        )
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyBucket {
    Common,
    Rare,
    Unseen,
}

impl FrequencyBucket {
    pub fn for_count(train_count: usize) -> Self {
        match train_count {
            0 => FrequencyBucket::Unseen,
            c if c <= RARE_MAX_COUNT => FrequencyBucket::Rare,
            _ => FrequencyBucket::Common,
        }
    }
}

/// Distinct test tuple keys partitioned by how often they occur in the
/// training tuples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyBuckets {
    pub common: BTreeSet<Tuple>,
    pub rare: BTreeSet<Tuple>,
    pub unseen: BTreeSet<Tuple>,
}

impl FrequencyBuckets {
    pub fn bucket_of(&self, tuple: &Tuple) -> Option<FrequencyBucket> {
        if self.common.contains(tuple) {
            Some(FrequencyBucket::Common)
        } else if self.rare.contains(tuple) {
            Some(FrequencyBucket::Rare)
        } else if self.unseen.contains(tuple) {
            Some(FrequencyBucket::Unseen)
        } else {
            None
        }
    }
}

pub fn frequency_buckets(train: &[Tuple], test: &[Tuple]) -> FrequencyBuckets {
    let mut counts: HashMap<&Tuple, usize> = HashMap::new();
    for t in train {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut out = FrequencyBuckets::default();
    for t in test {
        let set = match FrequencyBucket::for_count(counts.get(t).copied().unwrap_or(0)) {
            FrequencyBucket::Common => &mut out.common,
            FrequencyBucket::Rare => &mut out.rare,
            FrequencyBucket::Unseen => &mut out.unseen,
        };
        set.insert(t.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct BucketRecall {
    pub gold: usize,
    pub matched: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct BucketRecalls {
    pub common: BucketRecall,
    pub rare: BucketRecall,
    pub unseen: BucketRecall,
}

/// Recall of the gold tuples falling in each bucket. Gold tuples missing
/// from `buckets` are treated as unseen.
pub fn bucket_recall(buckets: &FrequencyBuckets, items: &[EvalItem]) -> BucketRecalls {
    let mut out = BucketRecalls::default();
    for item in items {
        let gold = item.gold.tuples();
        let m = item.matching();
        for (tuple, matched) in gold.iter().zip(&m.gold_matched) {
            let slot = match buckets.bucket_of(tuple).unwrap_or(FrequencyBucket::Unseen) {
                FrequencyBucket::Common => &mut out.common,
                FrequencyBucket::Rare => &mut out.rare,
                FrequencyBucket::Unseen => &mut out.unseen,
            };
            slot.gold += 1;
            slot.matched += usize::from(*matched);
        }
    }
    for slot in [&mut out.common, &mut out.rare, &mut out.unseen] {
        slot.recall = ratio(slot.matched, slot.gold);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::{daily_tuples, t};
    use crate::model::{Age, FashionItem, Gender, KnowledgeSet, Occasion, Person, PersonAttr};

    #[test]
    fn bucket_thresholds() {
        assert_eq!(FrequencyBucket::for_count(0), FrequencyBucket::Unseen);
        assert_eq!(FrequencyBucket::for_count(1), FrequencyBucket::Rare);
        assert_eq!(FrequencyBucket::for_count(5), FrequencyBucket::Rare);
        assert_eq!(FrequencyBucket::for_count(6), FrequencyBucket::Common);
    }

    #[test]
    fn buckets_partition_test_tuples() {
        let tuples = daily_tuples();
        let mut train = vec![tuples[0].clone(); 6];
        train.extend(vec![tuples[1].clone(); 5]);
        let b = frequency_buckets(&train, &tuples);
        assert!(b.common.contains(&tuples[0]));
        assert!(b.rare.contains(&tuples[1]));
        assert!(b.unseen.contains(&tuples[2]));
        assert!(b.common.is_disjoint(&b.rare) && b.rare.is_disjoint(&b.unseen));
    }

    fn one_person(n_items: usize) -> KnowledgeSet {
        let items = ["upper", "pants", "hat", "bag"][..n_items]
            .iter()
            .map(|ty| FashionItem::new(*ty, "red"))
            .collect();
        KnowledgeSet::new(
            Occasion::Daily,
            vec![Person::new(PersonAttr::new(Gender::Male, Age::Kid), items)],
        )
    }

    #[test]
    fn count_buckets() {
        let a = one_person(2);
        let b = one_person(3);
        let items = vec![
            EvalItem {
                post_id: "a".into(),
                pred: Some(a.tuples()),
                gold: a,
                caption: None,
            },
            EvalItem {
                post_id: "b".into(),
                pred: Some(vec![t(Gender::Male, Age::Kid, "upper", "red")]),
                gold: b,
                caption: None,
            },
        ];
        let got = breakdown_by_counts(&items);
        assert_eq!(got.len(), 2);
        assert_eq!(
            (got[0].n_persons, got[0].n_items, got[0].prf.f1),
            (1, 2, 1.0)
        );
        assert_eq!((got[1].n_items, got[1].prf.tp, got[1].prf.fn_), (3, 1, 2));
    }
}
