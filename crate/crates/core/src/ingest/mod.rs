//! Post ingestion: text cleaning, dataset and image-feature loading,
//! seeded splits and a synthetic corpus generator.

mod clean;
mod load;
mod split;
pub mod synth;

use thiserror::Error;

use crate::jsonl::JsonlError;

pub use clean::{clean_text, is_emoji, CleaningReport};
pub use load::{
    filter_regions, load_dataset, load_image_features, parse_dataset, parse_image_features,
    FeatureMap, ImageFeatureRecord, KEEP_TOP_REGIONS, MAX_REGIONS, MIN_REGION_CONFIDENCE,
};
pub use split::{split_dataset, SplitSpec, Splits, MIN_SPLIT_POSTS};
pub use synth::synth_corpus;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("line {line}: duplicate post id {id}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: post {id} has invalid gold: {violations}")]
    Invalid {
        line: usize,
        id: String,
        violations: String,
    },
    #[error("line {line}: post {id} references unknown image {image_ref}")]
    DanglingImageRef {
        line: usize,
        id: String,
        image_ref: String,
    },
    #[error("bad split: {0}")]
    BadSplit(String),
}
