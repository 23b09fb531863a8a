//! DadaGP-style token grammar: parsing, serialization, validation, and
//! decoding into timed note events.

mod stream;
mod timeline;
mod token;
mod validate;

pub use stream::{
    canonical_whitespace, parse_stream, parse_stream_strict, serialize, Header, ParseWarning,
    Parsed, TokenStream, DEFAULT_TEMPO,
};
pub use timeline::{decode_events, decode_guitar_events, pitch_of, Event, EventTimeline, Tuning};
pub use token::{parse_token, Token};
pub use validate::{is_valid, validate, Severity, Violation};
