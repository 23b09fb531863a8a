//! Stream validation: diagnostics are returned, never thrown.

use serde::{Deserialize, Serialize};

use super::stream::TokenStream;
use super::token::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Breaks the grammar; validation fails.
    Error,
    /// Suspicious but tolerated (e.g. unknown tokens).
    Warning,
}

/// One diagnostic, anchored to the body index of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub token_index: usize,
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn error(token_index: usize, message: impl Into<String>) -> Self {
        Violation {
            token_index,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(token_index: usize, message: impl Into<String>) -> Self {
        Violation {
            token_index,
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

/// Check a stream body for grammar violations:
///
/// * `nfx`/`bfx` tokens with no note or drums token earlier in the same
///   beat group (a beat group resets at `wait` and `new_measure`),
/// * `wait:0` tokens,
/// * notes before an embedded `start` token,
/// * unknown tokens (warnings only).
pub fn validate(stream: &TokenStream) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut beat_has_note = false;
    // Streams parsed from text never carry Start in the body, but manually
    // assembled ones might; notes before it are flagged.
    let embedded_start = stream.body.iter().position(|t| matches!(t, Token::Start));

    for (index, token) in stream.body.iter().enumerate() {
        match token {
            Token::Note { .. } | Token::Drums { .. } => {
                beat_has_note = true;
                if embedded_start.is_some_and(|s| index < s) {
                    violations.push(Violation::error(index, "note before start"));
                }
            }
            Token::Wait(0) => {
                violations.push(Violation::error(index, "zero wait"));
                beat_has_note = false;
            }
            Token::Wait(_) | Token::NewMeasure => beat_has_note = false,
            Token::NoteEffect { effect, .. } => {
                if !beat_has_note {
                    violations.push(Violation::error(
                        index,
                        format!("effect without note: nfx:{effect}"),
                    ));
                }
            }
            Token::BeatEffect { effect, .. } => {
                if !beat_has_note {
                    violations.push(Violation::error(
                        index,
                        format!("effect without note: bfx:{effect}"),
                    ));
                }
            }
            Token::Unknown(raw) => {
                violations.push(Violation::warning(index, format!("unknown token: {raw}")));
            }
            _ => {}
        }
    }
    violations
}

/// True when the stream has no error-severity violations.
pub fn is_valid(stream: &TokenStream) -> bool {
    validate(stream)
        .iter()
        .all(|v| v.severity != Severity::Error)
}
