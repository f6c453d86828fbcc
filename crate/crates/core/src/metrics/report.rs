use serde::{Deserialize, Serialize};

use super::{
    aspect_metrics, bleu_n, breakdown_by_counts, bucket_recall, corpus_prf, frequency_buckets,
    meteor, post_accuracy, Aspect, AspectScore, BucketRecalls, CountBucket, EvalItem, Matching,
    MetricError, TuplePRF,
};
use crate::codec::{construct_caption, CaptionRule};
use crate::model::Tuple;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    #[serde(flatten)]
    pub prf: TuplePRF,
    pub post_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspectReport {
    pub occasion: AspectScore,
    pub category: AspectScore,
    pub appearance: AspectScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_posts: usize,
    pub n_null: usize,
    pub overall: Overall,
    pub per_aspect: AspectReport,
    pub bleu1: f64,
    pub bleu2: f64,
    pub meteor: f64,
    pub by_counts: Vec<CountBucket>,
    /// Present when training tuples were supplied.
    pub by_frequency: Option<BucketRecalls>,
}

/// Scores a corpus. Hypothesis captions missing from an item count as the
/// empty string; references are the gold knowledge rendered with the
/// default rule.
pub fn evaluate(items: &[EvalItem], train: Option<&[Tuple]>) -> Result<EvalReport, MetricError> {
    if items.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let matchings: Vec<Matching> = items.iter().map(EvalItem::matching).collect();

    let hyps: Vec<&str> = items
        .iter()
        .map(|i| i.caption.as_deref().unwrap_or(""))
        .collect();
    let refs: Vec<String> = items
        .iter()
        .map(|i| construct_caption(&i.gold, CaptionRule::Ours).unwrap_or_default())
        .collect();
    // Summed in sorted order so the mean does not depend on post order.
    let mut meteor_scores: Vec<f64> = hyps.iter().zip(&refs).map(|(h, r)| meteor(h, r)).collect();
    meteor_scores.sort_by(f64::total_cmp);
    let meteor_mean = meteor_scores.iter().sum::<f64>() / items.len() as f64;

    let by_frequency = train.map(|train| {
        let test: Vec<Tuple> = items.iter().flat_map(|i| i.gold.tuples()).collect();
        bucket_recall(&frequency_buckets(train, &test), items)
    });

    Ok(EvalReport {
        n_posts: items.len(),
        n_null: items.iter().filter(|i| i.pred.is_none()).count(),
        overall: Overall {
            prf: corpus_prf(&matchings),
            post_accuracy: post_accuracy(&matchings),
        },
        per_aspect: AspectReport {
            occasion: aspect_metrics(items, Aspect::Occasion),
            category: aspect_metrics(items, Aspect::Category),
            appearance: aspect_metrics(items, Aspect::Appearance),
        },
        bleu1: bleu_n(&hyps, &refs, 1)?,
        bleu2: bleu_n(&hyps, &refs, 2)?,
        meteor: meteor_mean,
        by_counts: breakdown_by_counts(items),
        by_frequency,
    })
}
