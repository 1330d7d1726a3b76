//! Canonical text encoding of sketches.
//!
//! A sketch is written as a single line of JSON with keys in sorted order:
//!
//! ```text
//! {"epsilon":"0.01","n_total":3,"neg":[],"pos":[[0,1],[1,2]],"version":1,"zero_count":0}
//! ```
//!
//! Equal sketches encode to identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sketch::{ExponentialHistogram, SketchConfig, SketchError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed sketch file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported sketch version {0}")]
    UnsupportedVersion(u64),
    #[error("invalid sketch: {0}")]
    Invariant(String),
}

impl From<SketchError> for CodecError {
    fn from(e: SketchError) -> Self {
        CodecError::Invariant(e.to_string())
    }
}

// Field order is alphabetical so that serialization emits sorted keys.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    epsilon: String,
    n_total: u64,
    neg: Vec<(i64, u64)>,
    pos: Vec<(i64, u64)>,
    version: u64,
    zero_count: u64,
}

/// Encodes a sketch as one line of canonical JSON followed by a newline.
pub fn encode(sketch: &ExponentialHistogram) -> String {
    let wire = Wire {
        epsilon: sketch.config().epsilon_text().to_owned(),
        n_total: sketch.n_total(),
        neg: sketch
            .negative_bins()
            .iter()
            .map(|(&k, &c)| (k, c))
            .collect(),
        pos: sketch
            .positive_bins()
            .iter()
            .map(|(&k, &c)| (k, c))
            .collect(),
        version: FORMAT_VERSION,
        zero_count: sketch.zero_count(),
    };
    let mut out = serde_json::to_string(&wire).expect("plain data always serializes");
    out.push('\n');
    out
}

fn bins(side: &str, pairs: Vec<(i64, u64)>) -> Result<BTreeMap<i64, u64>, CodecError> {
    let mut map = BTreeMap::new();
    let mut prev: Option<i64> = None;
    for (k, c) in pairs {
        if prev.is_some_and(|p| p >= k) {
            return Err(CodecError::Invariant(format!(
                "{side} bin indices must be strictly ascending (index {k})"
            )));
        }
        if c == 0 {
            return Err(CodecError::Invariant(format!(
                "{side} bin {k} has a zero count"
            )));
        }
        map.insert(k, c);
        prev = Some(k);
    }
    Ok(map)
}

/// Decodes and validates a sketch.
pub fn decode(text: &str) -> Result<ExponentialHistogram, CodecError> {
    let wire: Wire = serde_json::from_str(text)?;
    if wire.version != FORMAT_VERSION {
        return Err(CodecError::UnsupportedVersion(wire.version));
    }
    let config = SketchConfig::from_decimal(&wire.epsilon)?;
    let pos = bins("pos", wire.pos)?;
    let neg = bins("neg", wire.neg)?;
    Ok(ExponentialHistogram::from_parts(
        config,
        pos,
        neg,
        wire.zero_count,
        wire.n_total,
    )?)
}
