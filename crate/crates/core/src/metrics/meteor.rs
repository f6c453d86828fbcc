//! METEOR with exact and stem matching stages (no synonym stage).
//!
//! Within a stage, the k-th unmatched occurrence of a form in the
//! hypothesis is paired with the k-th unmatched occurrence of the same form
//! in the reference, which keeps same-form pairs from crossing.

use std::collections::HashMap;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::bleu::caption_tokens;

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// `(hyp index, ref index)` pairs sorted by hypothesis position.
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn align_stage(
    hyp: &[String],
    reference: &[String],
    hyp_used: &mut [bool],
    ref_used: &mut [bool],
    form: impl Fn(&str) -> String,
    pairs: &mut Vec<(usize, usize)>,
) {
    let mut ref_positions: HashMap<String, Vec<usize>> = HashMap::new();
    for (j, tok) in reference.iter().enumerate() {
        if !ref_used[j] {
            ref_positions.entry(form(tok)).or_default().push(j);
        }
    }
    let mut next: HashMap<String, usize> = HashMap::new();
    for (i, tok) in hyp.iter().enumerate() {
        if hyp_used[i] {
            continue;
        }
        let key = form(tok);
        let Some(positions) = ref_positions.get(&key) else {
            continue;
        };
        let cursor = next.entry(key).or_insert(0);
        if let Some(&j) = positions.get(*cursor) {
            *cursor += 1;
            hyp_used[i] = true;
            ref_used[j] = true;
            pairs.push((i, j));
        }
    }
}

/// Unigram alignment between a hypothesis and a reference caption.
pub fn meteor_alignment(hyp: &str, reference: &str) -> Alignment {
    let h = caption_tokens(hyp);
    let r = caption_tokens(reference);
    let mut hyp_used = vec![false; h.len()];
    let mut ref_used = vec![false; r.len()];
    let mut pairs = Vec::new();
    align_stage(
        &h,
        &r,
        &mut hyp_used,
        &mut ref_used,
        str::to_string,
        &mut pairs,
    );
    align_stage(
        &h,
        &r,
        &mut hyp_used,
        &mut ref_used,
        |t| stemmer().stem(t).into_owned(),
        &mut pairs,
    );
    pairs.sort_unstable();

    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in &pairs {
        if !matches!(prev, Some((pi, pj)) if i == pi + 1 && j == pj + 1) {
            chunks += 1;
        }
        prev = Some((i, j));
    }
    Alignment {
        pairs,
        chunks,
        hyp_len: h.len(),
        ref_len: r.len(),
    }
}

/// Sentence-level METEOR: `Fmean = 10PR / (R + 9P)`, fragmentation
/// penalty `0.5 (chunks / matches)^3`.
pub fn meteor(hyp: &str, reference: &str) -> f64 {
    let a = meteor_alignment(hyp, reference);
    let m = a.pairs.len();
    if m == 0 {
        return 0.0;
    }
    let precision = m as f64 / a.hyp_len as f64;
    let recall = m as f64 / a.ref_len as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (a.chunks as f64 / m as f64).powi(3);
    fmean * (1.0 - penalty)
}
