//! Run configuration: an optional TOML or JSON file, then flag overrides.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fkcap_core::aux_tasks::TaskWeights;
use fkcap_core::generator::{CorruptionRates, DEFAULT_TIMEOUT_MS};
use fkcap_core::model::{Schema, TypeVocab, DEFAULT_MAX_PERSONS};

use crate::Usage;

/// File-level settings. Every field is optional; absent fields keep their
/// defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Item type vocabulary, inline.
    pub vocab: Option<Vec<String>>,
    pub max_persons: Option<usize>,
    /// Auxiliary loss weights in src, itm, vqa order.
    pub weights: Option<[f64; 3]>,
    pub endpoint: Option<String>,
    pub timeout_ms: Option<u64>,
    pub parallel: Option<usize>,
    pub corruption: Option<CorruptionRates>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| Usage(format!("config {}: {e}", path.display())))?
        };
        Ok(parsed)
    }
}

/// Settings after merging file and flags; hashed into run manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub vocab: TypeVocab,
    pub max_persons: usize,
    pub weights: TaskWeights,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub parallel: usize,
    pub corruption: CorruptionRates,
}

impl Settings {
    pub fn resolve(
        file: ConfigFile,
        vocab_path: Option<&Path>,
        max_persons: Option<usize>,
    ) -> Result<Self> {
        let vocab = match vocab_path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading vocabulary {}", p.display()))?;
                TypeVocab::from_json(&text)
                    .map_err(|e| Usage(format!("vocabulary {}: {e}", p.display())))?
            }
            None => file.vocab.map(TypeVocab::new).unwrap_or_default(),
        };
        if vocab.types().is_empty() {
            return Err(Usage("type vocabulary is empty".into()).into());
        }
        let max_persons = max_persons
            .or(file.max_persons)
            .unwrap_or(DEFAULT_MAX_PERSONS);
        if max_persons == 0 {
            return Err(Usage("max_persons must be at least 1".into()).into());
        }
        let weights = match file.weights {
            Some(w) => TaskWeights::new(w).map_err(|e| Usage(format!("weights: {e}")))?,
            None => TaskWeights::default(),
        };
        Ok(Self {
            vocab,
            max_persons,
            weights,
            endpoint: file.endpoint,
            timeout_ms: file.timeout_ms.unwrap_or(DEFAULT_TIMEOUT_MS),
            parallel: file.parallel.unwrap_or(4),
            corruption: file.corruption.unwrap_or_default(),
        })
    }

    pub fn schema(&self) -> Schema {
        Schema {
            vocab: self.vocab.clone(),
            max_persons: self.max_persons,
        }
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("settings serialize");
        hex::encode(Sha256::digest(canonical))
    }
}
