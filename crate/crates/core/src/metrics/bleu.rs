use std::collections::HashMap;

use super::MetricError;

/// Lowercase whitespace tokenization with every `.` as its own token.
pub fn caption_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .replace('.', " . ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn ngram_counts(tokens: &[String], k: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(k) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Corpus-level BLEU-n with uniform weights over orders `1..=n`, one
/// reference per hypothesis and brevity penalty `exp(min(0, 1 - r/c))`.
pub fn bleu_n<H: AsRef<str>, R: AsRef<str>>(
    hyps: &[H],
    refs: &[R],
    n: usize,
) -> Result<f64, MetricError> {
    if hyps.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if hyps.len() != refs.len() {
        return Err(MetricError::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    if !(1..=2).contains(&n) {
        return Err(MetricError::UnsupportedOrder(n));
    }

    let mut matched = vec![0usize; n];
    let mut total = vec![0usize; n];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in hyps.iter().zip(refs) {
        let h = caption_tokens(h.as_ref());
        let r = caption_tokens(r.as_ref());
        hyp_len += h.len();
        ref_len += r.len();
        for k in 1..=n {
            let ref_counts = ngram_counts(&r, k);
            for (gram, count) in ngram_counts(&h, k) {
                matched[k - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
            }
            total[k - 1] += h.len().saturating_sub(k - 1);
        }
    }

    if hyp_len == 0 || matched.contains(&0) {
        return Ok(0.0);
    }
    let log_precision: f64 = matched
        .iter()
        .zip(&total)
        .map(|(m, t)| (*m as f64 / *t as f64).ln())
        .sum::<f64>()
        / n as f64;
    let brevity = (1.0 - ref_len as f64 / hyp_len as f64).min(0.0);
    Ok((log_precision + brevity).exp())
}
