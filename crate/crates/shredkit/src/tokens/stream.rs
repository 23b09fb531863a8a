//! Token streams: a parsed header plus the body between `start` and `end`.

use serde::{Deserialize, Serialize};

use super::token::{parse_token, Token};
use crate::error::ParseError;

pub const DEFAULT_TEMPO: u32 = 120;

/// Header fields gathered from the tokens preceding `start`. Absent fields
/// fall back to defaults but are remembered as absent so serialization can
/// reproduce the input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub artist: Option<String>,
    pub downtune: Option<i32>,
    pub tempo: Option<u32>,
}

impl Header {
    /// Downtune in semitones, defaulting to 0.
    pub fn downtune(&self) -> i32 {
        self.downtune.unwrap_or(0)
    }

    /// Tempo in bpm, defaulting to 120.
    pub fn tempo(&self) -> u32 {
        self.tempo.unwrap_or(DEFAULT_TEMPO)
    }
}

/// An ordered token sequence with its parsed header: the unit of a song or
/// of an extracted solo.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenStream {
    pub header: Header,
    pub body: Vec<Token>,
}

impl TokenStream {
    pub fn new(header: Header, body: Vec<Token>) -> Self {
        Self { header, body }
    }

    /// Number of measures: `new_measure` boundaries plus one. An empty body
    /// has zero measures.
    pub fn measure_count(&self) -> usize {
        if self.body.is_empty() {
            0
        } else {
            1 + self
                .body
                .iter()
                .filter(|t| matches!(t, Token::NewMeasure))
                .count()
        }
    }

    /// Serialized words: header, `start`, body, `end`.
    pub fn words(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.body.len() + 5);
        if let Some(artist) = &self.header.artist {
            out.push(format!("artist:{artist}"));
        }
        if let Some(downtune) = self.header.downtune {
            out.push(format!("downtune:{downtune}"));
        }
        if let Some(tempo) = self.header.tempo {
            out.push(format!("tempo:{tempo}"));
        }
        out.push("start".to_string());
        out.extend(self.body.iter().map(Token::to_string));
        out.push("end".to_string());
        out
    }
}

/// A non-fatal oddity noticed while parsing, with the index of the word
/// that triggered it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub word_index: usize,
    pub message: String,
}

/// A parsed stream together with the warnings produced along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub stream: TokenStream,
    pub warnings: Vec<ParseWarning>,
}

/// Parse whitespace-separated token text leniently: missing `start` demotes
/// to a warning and the body becomes every non-header token.
pub fn parse_stream(text: &str) -> Parsed {
    parse_inner(text)
}

/// Like [`parse_stream`] but a missing `start` token is an error.
pub fn parse_stream_strict(text: &str) -> Result<Parsed, ParseError> {
    let parsed = parse_inner(text);
    if parsed
        .warnings
        .iter()
        .any(|w| w.message == MISSING_START && !parsed.stream.body.is_empty())
    {
        return Err(ParseError::MissingStart);
    }
    Ok(parsed)
}

const MISSING_START: &str = "missing start token";

fn parse_inner(text: &str) -> Parsed {
    let mut header = Header::default();
    let mut body = Vec::new();
    let mut warnings = Vec::new();

    #[derive(PartialEq)]
    enum State {
        Preamble,
        Body,
        Done,
    }
    let mut state = State::Preamble;
    let mut saw_start = false;
    let mut warn = |index: usize, message: &str| {
        warnings.push(ParseWarning {
            word_index: index,
            message: message.to_string(),
        });
    };

    for (index, word) in text.split_whitespace().enumerate() {
        let token = parse_token(word);
        match state {
            State::Preamble => match token {
                Token::Artist(name) => {
                    if header.artist.replace(name).is_some() {
                        warn(index, "duplicate artist token; last one wins");
                    }
                }
                Token::Downtune(semitones) => {
                    if header.downtune.replace(semitones).is_some() {
                        warn(index, "duplicate downtune token; last one wins");
                    }
                }
                Token::Tempo(bpm) => {
                    if header.tempo.replace(bpm).is_some() {
                        warn(index, "duplicate tempo token; last one wins");
                    }
                }
                Token::Start => {
                    saw_start = true;
                    state = State::Body;
                }
                Token::End => {
                    warn(index, "end token before start");
                    state = State::Done;
                }
                other => {
                    warn(index, "token before start");
                    body.push(other);
                }
            },
            State::Body => match token {
                Token::Start => warn(index, "duplicate start token ignored"),
                Token::End => state = State::Done,
                other => body.push(other),
            },
            State::Done => {
                warn(index, "token after end ignored");
            }
        }
    }

    if !saw_start && (!body.is_empty() || header != Header::default()) {
        // Lenient mode keeps what we saw; strict parsing turns this into
        // an error.
        warnings.push(ParseWarning {
            word_index: 0,
            message: MISSING_START.to_string(),
        });
    }
    if saw_start && state == State::Body {
        warnings.push(ParseWarning {
            word_index: 0,
            message: "missing end token".to_string(),
        });
    }

    Parsed {
        stream: TokenStream { header, body },
        warnings,
    }
}

/// Serialize a stream to canonical single-space-separated token text.
pub fn serialize(stream: &TokenStream) -> String {
    stream.words().join(" ")
}

/// Collapse all whitespace runs to single spaces; the equality used by the
/// round-trip guarantee.
pub fn canonical_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
