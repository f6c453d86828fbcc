//! Evaluation: tuple-level precision/recall/F1, post accuracy, per-aspect
//! scores, caption overlap metrics and the analysis breakdowns.

mod aspect;
mod bleu;
mod breakdown;
mod meteor;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{KnowledgeSet, Tuple};

pub use aspect::{aspect_metrics, Aspect, AspectScore};
pub use bleu::{bleu_n, caption_tokens};
pub use breakdown::{
    breakdown_by_counts, bucket_recall, frequency_buckets, BucketRecall, BucketRecalls,
    CountBucket, FrequencyBucket, FrequencyBuckets, RARE_MAX_COUNT,
};
pub use meteor::{meteor, meteor_alignment, Alignment};
pub use report::{evaluate, AspectReport, EvalReport, Overall};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("BLEU order must be 1 or 2 (got {0})")]
    UnsupportedOrder(usize),
}

/// Precision, recall and F1 together with the counts they came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TuplePRF {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub(crate) fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

impl TuplePRF {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self {
            precision,
            recall,
            f1: harmonic(precision, recall),
            tp,
            fp,
            fn_,
        }
    }
}

/// Outcome of matching one post's predictions against its gold tuples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// `(pred index, gold index)` for every matched pair.
    pub pairs: Vec<(usize, usize)>,
    /// Per gold element, whether it was matched.
    pub gold_matched: Vec<bool>,
}

impl Matching {
    pub fn is_exact(&self) -> bool {
        self.fp == 0 && self.fn_ == 0
    }
}

/// Greedy multiset matching: each gold element takes the first unused
/// identical prediction. A null prediction is an empty slice and yields
/// `(0, 0, |gold|)`.
pub fn match_multiset<T: PartialEq>(pred: &[T], gold: &[T]) -> Matching {
    let mut used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    let mut gold_matched = vec![false; gold.len()];
    for (gi, g) in gold.iter().enumerate() {
        if let Some(pi) = (0..pred.len()).find(|&pi| !used[pi] && pred[pi] == *g) {
            used[pi] = true;
            gold_matched[gi] = true;
            pairs.push((pi, gi));
        }
    }
    let tp = pairs.len();
    Matching {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
        pairs,
        gold_matched,
    }
}

/// Matches full five-element tuples.
pub fn match_tuples(pred: &[Tuple], gold: &[Tuple]) -> Matching {
    match_multiset(pred, gold)
}

/// Micro-averaged PRF over all posts.
pub fn corpus_prf(matchings: &[Matching]) -> TuplePRF {
    let (tp, fp, fn_) = matchings.iter().fold((0, 0, 0), |(tp, fp, fn_), m| {
        (tp + m.tp, fp + m.fp, fn_ + m.fn_)
    });
    TuplePRF::from_counts(tp, fp, fn_)
}

/// Fraction of posts whose predicted tuple multiset equals gold.
pub fn post_accuracy(matchings: &[Matching]) -> f64 {
    ratio(
        matchings.iter().filter(|m| m.is_exact()).count(),
        matchings.len(),
    )
}

/// One post under evaluation. `pred` is `None` when recovery failed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub post_id: String,
    pub gold: KnowledgeSet,
    pub pred: Option<Vec<Tuple>>,
    pub caption: Option<String>,
}

impl EvalItem {
    pub fn pred_tuples(&self) -> &[Tuple] {
        self.pred.as_deref().unwrap_or(&[])
    }

    pub fn matching(&self) -> Matching {
        match_tuples(self.pred_tuples(), &self.gold.tuples())
    }
}
