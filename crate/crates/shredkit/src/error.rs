//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("stream has no start token")]
    MissingStart,
}

#[derive(Debug, Error, PartialEq)]
pub enum TimelineError {
    #[error("string s{0} is not present in the tuning table")]
    UnknownString(u8),
    #[error("string s{string_num} fret {fret} with downtune {downtune} maps to MIDI {midi}, outside 0..=127")]
    PitchOutOfRange {
        string_num: u8,
        fret: u8,
        downtune: i32,
        midi: i64,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("timeline has no events")]
    EmptyTimeline,
    #[error("timeline has no pitched events")]
    NoPitchedEvents,
    #[error("histogram has zero total count")]
    EmptyHistogram,
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("both distributions are empty")]
    BothEmpty,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no .tokens.txt files found under {0}")]
    EmptyCorpus(String),
    #[error("invalid artist name {0:?}: must be non-empty, without whitespace or ':'")]
    InvalidArtistName(String),
    #[error("measure range {start}..={end} is outside the stream's 1..={measures} measures")]
    MeasureOutOfRange {
        start: usize,
        end: usize,
        measures: usize,
    },
    #[error("stream has no new_measure tokens")]
    NoMeasureTokens,
    #[error("split ratios {0:?} do not sum to 1")]
    InvalidRatios([f64; 3]),
    #[error("artist {artist} has only {songs} songs; need at least 3 for a three-way split")]
    TooFewSongs { artist: String, songs: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest or annotation file {path}: {message}")]
    BadSidecar { path: String, message: String },
}

#[derive(Debug, Error)]
pub enum StyleLmError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("unknown artist {0:?}")]
    UnknownArtist(String),
    #[error("full prompt needs at least 2 measures, song has {0}")]
    TooShort(usize),
    #[error("empty prompt needs at least one note token in the song")]
    NoNotes,
    #[error("model serialization failed: {0}")]
    Serde(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("training corpus has a single artist label; need at least 2")]
    SingleClass,
    #[error("stream has no feature tokens after control-token filtering")]
    EmptyAfterFiltering,
    #[error("configuration {0} has no generated streams")]
    EmptyConfiguration(String),
}
