use std::error::Error as _;
use std::io;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, Capabilities, GenerationBackend, GenerationRequest};

pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;
const DEFAULT_MAX_INPUT_LEN: usize = 4096;

/// Wire request. `text` is the assembled `[SEP]` input; images travel by
/// id and the server resolves them against its own feature file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpRequest {
    pub task: String,
    pub text: String,
    pub image_id: Option<String>,
}

/// Wire response: exactly one of the fields is expected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HttpReply {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Client for a remote model server speaking JSON over HTTP.
pub struct HttpBackend {
    endpoint: String,
    agent: ureq::Agent,
    max_input_len: usize,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            max_input_len: DEFAULT_MAX_INPUT_LEN,
        }
    }

    pub fn with_max_input_len(mut self, max: usize) -> Self {
        self.max_input_len = max;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    let mut source = t.source();
    while let Some(e) = source {
        if let Some(io) = e.downcast_ref::<io::Error>() {
            return matches!(
                io.kind(),
                io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock
            );
        }
        source = e.source();
    }
    false
}

fn reply_to_result(reply: HttpReply) -> Result<String, BackendError> {
    match reply {
        HttpReply { error: Some(e), .. } => Err(BackendError::Remote(e)),
        HttpReply {
            caption: Some(c), ..
        } => Ok(c),
        _ => Err(BackendError::Remote(
            "reply has neither caption nor error".into(),
        )),
    }
}

impl GenerationBackend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_input_len: self.max_input_len,
            supports_images: true,
            serial: false,
        }
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, BackendError> {
        let body = HttpRequest {
            task: req.task_prefix.clone(),
            text: req.input_text(),
            image_id: req.image_id.clone(),
        };
        match self.agent.post(&self.endpoint).send_json(&body) {
            Ok(resp) => {
                let reply: HttpReply = resp
                    .into_json()
                    .map_err(|e| BackendError::Remote(format!("malformed reply: {e}")))?;
                reply_to_result(reply)
            }
            Err(ureq::Error::Status(code, resp)) => {
                let detail = resp
                    .into_json::<HttpReply>()
                    .ok()
                    .and_then(|r| r.error)
                    .unwrap_or_default();
                Err(BackendError::Remote(
                    format!("HTTP {code} {detail}").trim_end().to_string(),
                ))
            }
            Err(ureq::Error::Transport(t)) if is_timeout(&t) => Err(BackendError::Timeout),
            Err(ureq::Error::Transport(t)) => Err(BackendError::Transport(t.to_string())),
        }
    }
}
