//! Model files: a JSON envelope
//!
//! ```text
//! { "format": "credit-model", "version": 1, "kind": "<kind>", "payload": { ... } }
//! ```
//!
//! Floats are written with shortest round-trip formatting and parsed back
//! exactly, so a saved model predicts bit-identically after loading.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CreditError, Result};

pub const FORMAT: &str = "credit-model";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    kind: String,
    payload: T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: String,
}

pub fn to_json<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    let env = Envelope {
        format: FORMAT.to_string(),
        version: VERSION,
        kind: kind.to_string(),
        payload,
    };
    serde_json::to_string_pretty(&env).map_err(|e| CreditError::Format(e.to_string()))
}

/// Kind tag of an envelope, after checking format and version.
pub fn peek_kind(text: &str) -> Result<String> {
    let h: Header = serde_json::from_str(text).map_err(|e| CreditError::Format(e.to_string()))?;
    if h.format != FORMAT {
        return Err(CreditError::Format(format!("expected format {FORMAT:?}, found {:?}", h.format)));
    }
    if h.version != VERSION {
        return Err(CreditError::Format(format!("unsupported version {}", h.version)));
    }
    Ok(h.kind)
}

pub fn from_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T> {
    let found = peek_kind(text)?;
    if found != kind {
        return Err(CreditError::Format(format!("expected a {kind} model, found {found}")));
    }
    let env: Envelope<T> = serde_json::from_str(text).map_err(|e| CreditError::Format(e.to_string()))?;
    Ok(env.payload)
}

pub fn save<T: Serialize>(kind: &str, payload: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(kind, payload)?).map_err(|e| CreditError::io(path, e))
}

pub fn load<T: DeserializeOwned>(kind: &str, path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CreditError::io(path, e))?;
    from_json(kind, &text)
}
