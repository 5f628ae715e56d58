//! Optional external language model for explanation prose.
//!
//! Every failure (transport, timeout, malformed reply, missing fixture)
//! degrades to the template explanation with a diagnostic attached.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{verbalize_instance, ExplainError, Explanation, Provenance, Scenario};
use crate::generator::Theorem;

pub const PROMPT_VERSION: &str = "explain-v1";
pub const PROMPT_TEMPLATE: &str = include_str!("../../prompts/explain_v1.txt");

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("invalid response: {0}")]
    InvalidResponse(String),
    #[error("no recorded response for {scenario} D{index}")]
    NoFixture { scenario: String, index: usize },
    #[error("fixture: {0}")]
    Fixture(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub prompt_version: String,
    pub scenario: String,
    pub domain: String,
    pub instance: String,
    /// `D1 = (…)` lines in schema order.
    pub clauses: Vec<String>,
    pub removed_index: usize,
    pub trace_summary: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub narrative: String,
    #[serde(default)]
    pub remediation: Option<String>,
    #[serde(default)]
    pub score: Option<f64>,
}

pub trait ExternalModelClient: Send + Sync {
    fn name(&self) -> String;
    fn complete(&self, request: &ModelRequest) -> Result<ModelResponse, ModelError>;
}

pub fn build_request(theorem: &Theorem, scenario: &Scenario, instance: &str) -> ModelRequest {
    let f = &theorem.source;
    let n = f.n();
    let clauses: Vec<String> = (1..=n + 1).map(|i| format!("D{i} = {}", f.display_clause(i))).collect();
    let glosses: Vec<String> = (0..n)
        .map(|k| {
            let name = f.symbols().name(crate::logic::Var(k as u32));
            format!("  {name}: {}", scenario.gloss(k).unwrap_or("(no gloss)"))
        })
        .collect();
    let prompt = PROMPT_TEMPLATE
        .replace("{domain}", &scenario.domain_label)
        .replace("{scenario}", &scenario.name)
        .replace("{last}", &(n + 1).to_string())
        .replace("{clauses}", &clauses.iter().map(|c| format!("  {c}")).collect::<Vec<_>>().join("\n"))
        .replace("{glosses}", &glosses.join("\n"))
        .replace("{index}", &theorem.removed_index.to_string())
        .replace("{trace}", &format!("  {}", theorem.trace_summary()));
    ModelRequest {
        prompt_version: PROMPT_VERSION.to_string(),
        scenario: scenario.name.clone(),
        domain: scenario.domain_label.clone(),
        instance: instance.to_string(),
        clauses,
        removed_index: theorem.removed_index,
        trace_summary: theorem.trace_summary(),
        prompt,
    }
}

/// `D{index}` must appear as a whole token.
fn mentions_clause(text: &str, index: usize) -> bool {
    let needle = format!("D{index}");
    text.match_indices(&needle).any(|(at, _)| {
        let before = text[..at].chars().next_back();
        let after = text[at + needle.len()..].chars().next();
        !before.is_some_and(|c| c.is_alphanumeric()) && !after.is_some_and(|c| c.is_ascii_digit())
    })
}

fn validate(response: ModelResponse, index: usize) -> Result<ModelResponse, ModelError> {
    if response.narrative.trim().is_empty() {
        return Err(ModelError::InvalidResponse("empty narrative".into()));
    }
    if !mentions_clause(&response.narrative, index) {
        return Err(ModelError::InvalidResponse(format!("narrative does not reference D{index}")));
    }
    if let Some(s) = response.score {
        if !s.is_finite() {
            return Err(ModelError::InvalidResponse("non-finite score".into()));
        }
    }
    Ok(response)
}

/// Template explanation, with prose replaced by the client's reply when one
/// is given and the reply validates.
pub fn explain_via_model(
    theorem: &Theorem,
    scenario: &Scenario,
    instance: &str,
    client: Option<&dyn ExternalModelClient>,
) -> Result<Explanation, ExplainError> {
    let mut explanation = verbalize_instance(theorem, scenario, instance)?;
    let Some(client) = client else {
        return Ok(explanation);
    };
    let request = build_request(theorem, scenario, instance);
    match client.complete(&request).and_then(|r| validate(r, theorem.removed_index)) {
        Ok(reply) => {
            explanation.narrative = reply.narrative;
            if let Some(r) = reply.remediation.filter(|r| !r.trim().is_empty()) {
                explanation.remediation = r;
            }
            explanation.model_score = reply.score.map(|s| s.clamp(0.0, 1.0));
            explanation.provenance = Provenance::ExternalModel;
        }
        Err(e) => explanation
            .diagnostics
            .push(format!("external model {} failed ({e}); template explanation used", client.name())),
    }
    Ok(explanation)
}

#[derive(Debug, Deserialize)]
struct FixtureFile {
    entries: Vec<FixtureEntry>,
}

#[derive(Debug, Deserialize)]
struct FixtureEntry {
    scenario: String,
    #[serde(default)]
    instance: String,
    removed_index: usize,
    response: ModelResponse,
}

/// Replays recorded replies keyed by scenario, instance and clause index.
///
/// ```json
/// {"entries": [{"scenario": "medical", "removed_index": 4,
///               "response": {"narrative": "…D4…", "remediation": "…", "score": 0.9}}]}
/// ```
#[derive(Debug, Clone, Default)]
pub struct FixtureClient {
    responses: HashMap<(String, String, usize), ModelResponse>,
}

impl FixtureClient {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: FixtureFile = serde_json::from_str(text).map_err(|e| ModelError::Fixture(e.to_string()))?;
        let responses = file
            .entries
            .into_iter()
            .map(|e| ((e.scenario, e.instance, e.removed_index), e.response))
            .collect();
        Ok(FixtureClient { responses })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| ModelError::Fixture(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn insert(&mut self, scenario: &str, instance: &str, index: usize, response: ModelResponse) {
        self.responses.insert((scenario.to_string(), instance.to_string(), index), response);
    }
}

impl ExternalModelClient for FixtureClient {
    fn name(&self) -> String {
        "fixture".to_string()
    }

    fn complete(&self, request: &ModelRequest) -> Result<ModelResponse, ModelError> {
        self.responses
            .get(&(request.scenario.clone(), request.instance.clone(), request.removed_index))
            .cloned()
            .ok_or_else(|| ModelError::NoFixture { scenario: request.scenario.clone(), index: request.removed_index })
    }
}

/// POSTs the request as JSON and expects a [`ModelResponse`] body.
/// Requests are serialized so a shared client never overlaps calls.
pub struct HttpModelClient {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
    gate: Mutex<()>,
}

impl HttpModelClient {
    pub const ENDPOINT_VAR: &'static str = "FTSC_MODEL_ENDPOINT";
    pub const KEY_VAR: &'static str = "FTSC_MODEL_KEY";
    pub const TIMEOUT_VAR: &'static str = "FTSC_MODEL_TIMEOUT_SECS";

    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(true)
            .build()
            .into();
        HttpModelClient { endpoint: endpoint.into(), api_key, agent, gate: Mutex::new(()) }
    }

    /// Reads endpoint, key and timeout (default 30 s) from the environment.
    /// `None` when no endpoint is configured.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var(Self::ENDPOINT_VAR).ok().filter(|e| !e.is_empty())?;
        let key = std::env::var(Self::KEY_VAR).ok().filter(|k| !k.is_empty());
        let timeout = std::env::var(Self::TIMEOUT_VAR)
            .ok()
            .and_then(|t| t.parse().ok())
            .unwrap_or(30);
        Some(Self::new(endpoint, key, Duration::from_secs(timeout)))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl ExternalModelClient for HttpModelClient {
    fn name(&self) -> String {
        format!("http {}", self.endpoint)
    }

    fn complete(&self, request: &ModelRequest) -> Result<ModelResponse, ModelError> {
        let _guard = self.gate.lock().unwrap_or_else(|p| p.into_inner());
        let mut call = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call.send_json(request).map_err(|e| ModelError::Transport(e.to_string()))?;
        response
            .body_mut()
            .read_json::<ModelResponse>()
            .map_err(|e| ModelError::InvalidResponse(e.to_string()))
    }
}
