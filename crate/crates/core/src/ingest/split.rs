use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::seed;

pub const MIN_SPLIT_POSTS: usize = 10;

/// Train/validation/test proportions and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            ratios: (0.8, 0.1, 0.1),
            seed,
        }
    }

    /// `(train, val, test)` sizes for `n` items: the first two are floored,
    /// test takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // The epsilon keeps products like 0.1 * 100 from flooring to 9.
        let floor = |r: f64| ((r * n as f64) + 1e-9).floor() as usize;
        let train = floor(self.ratios.0).min(n);
        let val = floor(self.ratios.1).min(n - train);
        (train, val, n - train - val)
    }

    fn check(&self) -> Result<(), IngestError> {
        let (a, b, c) = self.ratios;
        if [a, b, c].iter().any(|r| !r.is_finite() || *r < 0.0) || ((a + b + c) - 1.0).abs() > 1e-9
        {
            return Err(IngestError::BadSplit(format!(
                "ratios {a}, {b}, {c} must be non-negative and sum to 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle followed by a contiguous cut into train/val/test.
pub fn split_dataset<T>(items: Vec<T>, spec: &SplitSpec) -> Result<Splits<T>, IngestError> {
    spec.check()?;
    if items.len() < MIN_SPLIT_POSTS {
        return Err(IngestError::BadSplit(format!(
            "need at least {MIN_SPLIT_POSTS} posts, got {}",
            items.len()
        )));
    }
    let (n_train, n_val, _) = spec.sizes(items.len());
    let mut items = items;
    items.shuffle(&mut seed::rng(seed::derive(spec.seed, "split")));
    let test = items.split_off(n_train + n_val);
    let val = items.split_off(n_train);
    Ok(Splits {
        train: items,
        val,
        test,
    })
}
