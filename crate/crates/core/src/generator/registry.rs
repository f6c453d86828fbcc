use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use super::{
    CorruptBackend, CorruptionRates, EchoBackend, ExtractError, GenerationBackend, HttpBackend,
    DEFAULT_TIMEOUT_MS,
};
use crate::model::{KnowledgeSet, Post, TypeVocab};

/// Everything a factory may need. Backends take what they use.
#[derive(Debug, Clone)]
pub struct BackendSpec {
    pub gold: HashMap<String, KnowledgeSet>,
    pub rates: CorruptionRates,
    pub seed: u64,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub vocab: TypeVocab,
}

impl BackendSpec {
    /// Spec whose gold map holds every post that has gold knowledge.
    pub fn from_posts(posts: &[Post]) -> Self {
        Self {
            gold: posts
                .iter()
                .filter_map(|p| Some((p.id.clone(), p.gold.clone()?)))
                .collect(),
            rates: CorruptionRates::default(),
            seed: 0,
            endpoint: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            vocab: TypeVocab::default(),
        }
    }
}

pub type BackendFactory =
    Box<dyn Fn(&BackendSpec) -> Result<Box<dyn GenerationBackend>, ExtractError> + Send + Sync>;

/// Backends by name.
pub struct BackendRegistry {
    factories: BTreeMap<String, BackendFactory>,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(
            "echo",
            Box::new(|s| Ok(Box::new(EchoBackend::new(s.gold.clone())))),
        );
        r.register(
            "corrupt",
            Box::new(|s| {
                CorruptBackend::new(s.gold.clone(), s.rates, s.seed, &s.vocab)
                    .map(|b| Box::new(b) as Box<dyn GenerationBackend>)
                    .map_err(|what| ExtractError::Misconfigured {
                        backend: "corrupt".into(),
                        what,
                    })
            }),
        );
        r.register(
            "http",
            Box::new(|s| {
                let endpoint = s
                    .endpoint
                    .clone()
                    .ok_or_else(|| ExtractError::Misconfigured {
                        backend: "http".into(),
                        what: "an endpoint URL".into(),
                    })?;
                Ok(Box::new(HttpBackend::new(
                    endpoint,
                    Duration::from_millis(s.timeout_ms),
                )))
            }),
        );
        r
    }
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: BackendFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(
        &self,
        name: &str,
        spec: &BackendSpec,
    ) -> Result<Box<dyn GenerationBackend>, ExtractError> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| ExtractError::UnknownBackend(name.to_string()))?;
        factory(spec)
    }
}
