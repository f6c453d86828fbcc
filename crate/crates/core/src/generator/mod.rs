//! Caption generation behind a backend interface, and the extraction loop
//! that turns posts into recovered tuples.

mod backends;
mod http;
mod registry;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aux_tasks::AuxTask;
use crate::codec::{assemble_input_text, recover_tuples};
use crate::model::{FlatTuple, Post, Schema, Tuple};

pub use backends::{CorruptBackend, CorruptionRates, EchoBackend};
pub use http::{HttpBackend, HttpReply, HttpRequest, DEFAULT_TIMEOUT_MS};
pub use registry::{BackendFactory, BackendRegistry, BackendSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub task_prefix: String,
    pub task_text: String,
    pub post_text: String,
    #[serde(default)]
    pub image_id: Option<String>,
    /// Lets stub backends look up per-post fixtures; real models ignore it.
    #[serde(default)]
    pub post_id: Option<String>,
}

impl GenerationRequest {
    /// Caption request for a post, with an empty task text.
    pub fn caption(post: &Post) -> Self {
        Self {
            task_prefix: AuxTask::Caption.prefix().to_string(),
            task_text: String::new(),
            post_text: post.clean_text.clone(),
            image_id: post.image_ref.clone(),
            post_id: Some(post.id.clone()),
        }
    }

    pub fn input_text(&self) -> String {
        assemble_input_text(&self.task_prefix, &self.task_text, &self.post_text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    /// Longest assembled input, in characters.
    pub max_input_len: usize,
    pub supports_images: bool,
    /// The backend cannot take concurrent calls.
    pub serial: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend timed out")]
    Timeout,
    #[error("input of {len} chars exceeds backend limit {max}")]
    Oversize { len: usize, max: usize },
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("backend error: {0}")]
    Remote(String),
}

impl BackendError {
    /// Worth one more attempt.
    pub fn is_transient(&self) -> bool {
        matches!(self, Self::Transport(_) | Self::Timeout)
    }
}

pub trait GenerationBackend: Send + Sync {
    fn name(&self) -> &str;
    fn capabilities(&self) -> Capabilities;
    fn generate(&self, req: &GenerationRequest) -> Result<String, BackendError>;
}

/// Checks the request against the registered prefixes and the backend's
/// limits, then asks the backend for a caption.
pub fn generate(
    backend: &dyn GenerationBackend,
    req: &GenerationRequest,
) -> Result<String, BackendError> {
    if AuxTask::from_prefix(&req.task_prefix).is_none() {
        return Err(BackendError::Rejected(format!(
            "unknown task prefix '{}'",
            req.task_prefix
        )));
    }
    let caps = backend.capabilities();
    let len = req.input_text().chars().count();
    if len > caps.max_input_len {
        return Err(BackendError::Oversize {
            len,
            max: caps.max_input_len,
        });
    }
    backend.generate(req)
}

/// Per-post extraction result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub post_id: String,
    /// `None` when the backend produced nothing.
    pub caption: Option<String>,
    /// `None` is a null prediction.
    pub tuples: Option<Vec<FlatTuple>>,
    pub diagnostics: Vec<String>,
    pub latency_ms: u64,
}

impl Prediction {
    pub fn is_null(&self) -> bool {
        self.tuples.is_none()
    }

    pub fn pred_tuples(&self) -> Option<Vec<Tuple>> {
        self.tuples
            .as_ref()
            .map(|ts| ts.iter().map(FlatTuple::tuple).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("parallelism must be at least 1")]
    ZeroParallel,
    #[error("unknown backend '{0}'")]
    UnknownBackend(String),
    #[error("backend '{backend}' needs {what}")]
    Misconfigured { backend: String, what: String },
}

fn extract_one(post: &Post, backend: &dyn GenerationBackend, schema: &Schema) -> Prediction {
    let started = Instant::now();
    let req = GenerationRequest::caption(post);
    let mut diagnostics = Vec::new();
    let mut result = generate(backend, &req);
    if let Err(e) = &result {
        if e.is_transient() {
            diagnostics.push(format!("{e}; retrying"));
            result = generate(backend, &req);
        }
    }
    let (caption, tuples) = match result {
        Ok(caption) => {
            let recovered = recover_tuples(&caption, schema);
            diagnostics.extend(recovered.diagnostics.iter().map(ToString::to_string));
            let tuples = recovered.outcome.map(|ks| ks.flatten(&post.id));
            (Some(caption), tuples)
        }
        Err(e) => {
            diagnostics.push(e.to_string());
            (None, None)
        }
    };
    Prediction {
        post_id: post.id.clone(),
        caption,
        tuples,
        diagnostics,
        latency_ms: started.elapsed().as_millis() as u64,
    }
}

/// Runs caption generation and recovery over `posts` with at most
/// `parallel` backend calls in flight (one if the backend is serial).
/// Per-post failures become null predictions; output order follows input.
pub fn run_extraction(
    posts: &[Post],
    backend: &dyn GenerationBackend,
    schema: &Schema,
    parallel: usize,
) -> Result<Vec<Prediction>, ExtractError> {
    if parallel == 0 {
        return Err(ExtractError::ZeroParallel);
    }
    let workers = if backend.capabilities().serial {
        1
    } else {
        parallel.min(posts.len()).max(1)
    };
    if workers == 1 {
        return Ok(posts
            .iter()
            .map(|p| extract_one(p, backend, schema))
            .collect());
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Prediction>>> = posts.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(post) = posts.get(i) else { break };
                let pred = extract_one(post, backend, schema);
                *slots[i].lock().expect("slot lock") = Some(pred);
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|m| {
            m.into_inner()
                .expect("slot lock")
                .expect("every slot filled")
        })
        .collect())
}
