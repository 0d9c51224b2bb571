//! Client for a SageMathCell-compatible execution endpoint.
//!
//! One call is one `POST {server}/service` with a form-encoded body of
//! `code=...&accepted_tos=true`. The reply is a JSON object carrying at least
//! a boolean `success` and optionally `stdout`. No retries, no sessions.

pub mod mock;

use std::time::{Duration, Instant};

use serde_json::Value;
use thiserror::Error;

use crate::model::ExecutionResult;

pub const SERVICE_PATH: &str = "/service";
pub const FORM_CONTENT_TYPE: &str = "application/x-www-form-urlencoded";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("reply is not valid JSON: {0}")]
    Json(String),
    #[error("reply is not a JSON object")]
    NotAnObject,
    #[error("reply field `{0}` is missing")]
    MissingField(&'static str),
    #[error("reply field `{field}` must be {expected}")]
    WrongType {
        field: &'static str,
        expected: &'static str,
    },
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("timeout must be positive")]
    ZeroTimeout,
    #[error("request to {url} failed after {elapsed:?}: {message}")]
    Transport {
        url: String,
        elapsed: Duration,
        message: String,
    },
    #[error("{url} answered HTTP {status}")]
    Status { url: String, status: u16 },
    #[error("cannot decode reply from {url}: {source}")]
    Decode {
        url: String,
        #[source]
        source: DecodeError,
    },
}

/// Form body for one execution request.
pub fn encode_request_body(code: &[u8]) -> String {
    let mut body = String::from("code=");
    body.extend(url::form_urlencoded::byte_serialize(code));
    body.push_str("&accepted_tos=true");
    body
}

/// Sends `code` to `{server_url}/service` and decodes the reply.
pub fn execute_code(
    code: &[u8],
    server_url: &str,
    timeout: Duration,
) -> Result<ExecutionResult, ClientError> {
    if timeout.is_zero() {
        return Err(ClientError::ZeroTimeout);
    }
    let url = format!("{}{SERVICE_PATH}", server_url.trim_end_matches('/'));
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .max_redirects(0)
        .build()
        .into();

    let started = Instant::now();
    let transport = |e: ureq::Error| ClientError::Transport {
        url: url.clone(),
        elapsed: started.elapsed(),
        message: e.to_string(),
    };
    let mut response = agent
        .post(&url)
        .header("Content-Type", FORM_CONTENT_TYPE)
        .send(encode_request_body(code))
        .map_err(transport)?;

    let status = response.status().as_u16();
    if status != 200 {
        return Err(ClientError::Status { url, status });
    }
    let body = response.body_mut().read_to_vec().map_err(transport)?;
    parse_service_response(&body).map_err(|source| ClientError::Decode { url, source })
}

/// Decodes a service reply. Unknown fields are ignored; a `stdout` that is
/// absent, null or not a string reads as empty.
pub fn parse_service_response(body: &[u8]) -> Result<ExecutionResult, DecodeError> {
    let value: Value =
        serde_json::from_slice(body).map_err(|e| DecodeError::Json(e.to_string()))?;
    let object = value.as_object().ok_or(DecodeError::NotAnObject)?;
    let success = match object.get("success") {
        None => return Err(DecodeError::MissingField("success")),
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            return Err(DecodeError::WrongType {
                field: "success",
                expected: "a boolean",
            })
        }
    };
    let stdout = match object.get("stdout") {
        Some(Value::String(s)) => s.clone(),
        _ => String::new(),
    };
    Ok(ExecutionResult {
        success,
        stdout,
        raw_response: body.to_vec(),
    })
}
