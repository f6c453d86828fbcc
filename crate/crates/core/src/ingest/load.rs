use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{clean_text, IngestError};
use crate::jsonl::{self, JsonlError};
use crate::model::{validate, ImageRegionRecord, Occasion, Post, Schema};

/// Regions an image record may carry.
pub const MAX_REGIONS: usize = 36;
/// Regions kept per image after filtering.
pub const KEEP_TOP_REGIONS: usize = 20;
/// Regions at or below this confidence are dropped.
pub const MIN_REGION_CONFIDENCE: f32 = 0.5;

pub type FeatureMap = BTreeMap<String, Vec<ImageRegionRecord>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageFeatureRecord {
    pub image_id: String,
    pub regions: Vec<ImageRegionRecord>,
}

fn parse_error(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Jsonl(JsonlError::Parse {
        line,
        message: message.into(),
    })
}

/// Maps the long-form "daily wear" occasion label onto its canonical token.
fn normalize_occasion(value: &mut Value) {
    if let Some(occ) = value.pointer_mut("/gold/occasion") {
        if let Some(label) = occ.as_str() {
            if let Ok(o) = Occasion::from_label(label) {
                *occ = Value::String(o.as_str().to_string());
            }
        }
    }
}

/// Parses and validates post JSONL. Missing `clean_text` is computed from
/// `raw_text`; every `image_ref` must resolve in `features` when given.
pub fn parse_dataset(
    text: &str,
    schema: &Schema,
    features: Option<&FeatureMap>,
) -> Result<Vec<Post>, IngestError> {
    let mut seen = HashSet::new();
    let mut posts = Vec::new();
    for (line, mut value) in jsonl::parse_jsonl::<Value>(text)? {
        normalize_occasion(&mut value);
        let mut post: Post =
            serde_json::from_value(value).map_err(|e| parse_error(line, e.to_string()))?;
        if !seen.insert(post.id.clone()) {
            return Err(IngestError::DuplicateId { line, id: post.id });
        }
        if post.clean_text.is_empty() {
            post.clean_text = clean_text(&post.raw_text).0;
        }
        if let Some(gold) = &post.gold {
            let violations = validate(gold, schema);
            if !violations.is_empty() {
                return Err(IngestError::Invalid {
                    line,
                    id: post.id,
                    violations: violations
                        .iter()
                        .map(|v| format!("{}: {}", v.location, v.rule))
                        .collect::<Vec<_>>()
                        .join("; "),
                });
            }
        }
        if let (Some(features), Some(image_ref)) = (features, &post.image_ref) {
            if !features.contains_key(image_ref) {
                return Err(IngestError::DanglingImageRef {
                    line,
                    id: post.id,
                    image_ref: image_ref.clone(),
                });
            }
        }
        posts.push(post);
    }
    Ok(posts)
}

pub fn load_dataset(
    path: &Path,
    schema: &Schema,
    features: Option<&FeatureMap>,
) -> Result<Vec<Post>, IngestError> {
    parse_dataset(&jsonl::read_to_string(path)?, schema, features)
}

/// Keeps regions with confidence above the threshold, best first, at most
/// [`KEEP_TOP_REGIONS`]. Ties keep input order.
pub fn filter_regions(mut regions: Vec<ImageRegionRecord>) -> Vec<ImageRegionRecord> {
    regions.retain(|r| r.confidence > MIN_REGION_CONFIDENCE);
    regions.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    regions.truncate(KEEP_TOP_REGIONS);
    regions
}

fn check_region(region: &ImageRegionRecord) -> Result<(), String> {
    if !region.bbox.iter().all(|c| (0.0..=1.0).contains(c)) {
        return Err(format!("bbox {:?} outside [0, 1]", region.bbox));
    }
    if !(0.0..=1.0).contains(&region.confidence) {
        return Err(format!("confidence {} outside [0, 1]", region.confidence));
    }
    Ok(())
}

pub fn parse_image_features(text: &str) -> Result<FeatureMap, IngestError> {
    let mut out = FeatureMap::new();
    for (line, record) in jsonl::parse_jsonl::<ImageFeatureRecord>(text)? {
        if record.regions.len() > MAX_REGIONS {
            return Err(parse_error(
                line,
                format!(
                    "image {} has {} regions (max {MAX_REGIONS})",
                    record.image_id,
                    record.regions.len()
                ),
            ));
        }
        for (i, region) in record.regions.iter().enumerate() {
            check_region(region).map_err(|m| parse_error(line, format!("regions[{i}]: {m}")))?;
        }
        if out.contains_key(&record.image_id) {
            return Err(parse_error(
                line,
                format!("duplicate image_id {}", record.image_id),
            ));
        }
        out.insert(record.image_id, filter_regions(record.regions));
    }
    Ok(out)
}

pub fn load_image_features(path: &Path) -> Result<FeatureMap, IngestError> {
    parse_image_features(&jsonl::read_to_string(path)?)
}
