//! The token grammar: one variant per token kind, a total parser, and the
//! inverse serializer.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A single whitespace-free word of a tablature token stream.
///
/// Parsing is total: any word that matches no known spelling becomes
/// [`Token::Unknown`] and keeps the raw text byte-for-byte, so
/// `parse_token` followed by `to_string` is the identity on every input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    /// `artist:<name>` header token. The name may itself contain colons.
    Artist(String),
    /// `downtune:<semitones>` header token, semitones <= 0.
    Downtune(i32),
    /// `tempo:<bpm>` header token, bpm > 0.
    Tempo(u32),
    /// `start` marker: everything after it is body.
    Start,
    /// `end` marker: everything after it is ignored.
    End,
    /// `new_measure` boundary.
    NewMeasure,
    /// `<instrument>:note:s<string>:f<fret>` pitched note.
    Note {
        instrument: String,
        string_num: u8,
        fret: u8,
    },
    /// `drums:note:<type>` percussive note.
    Drums { note_type: String },
    /// `wait:<ticks>` clock advance. Zero is representable but flagged by
    /// validation.
    Wait(u64),
    /// `nfx:<name>[:<param>...]` note effect, attaching to the preceding note.
    NoteEffect { effect: String, params: Vec<String> },
    /// `bfx:<name>[:<param>...]` beat effect, attaching to the current beat.
    BeatEffect { effect: String, params: Vec<String> },
    /// Any word matching no pattern above; raw text preserved verbatim.
    Unknown(String),
}

impl Token {
    pub fn is_header(&self) -> bool {
        matches!(
            self,
            Token::Artist(_) | Token::Downtune(_) | Token::Tempo(_)
        )
    }

    pub fn is_note(&self) -> bool {
        matches!(self, Token::Note { .. })
    }

    pub fn is_effect(&self) -> bool {
        matches!(self, Token::NoteEffect { .. } | Token::BeatEffect { .. })
    }
}

/// Accept an integer only in its canonical decimal spelling, so that
/// serializing the parsed value reproduces the input exactly. Rejects
/// leading zeros, a bare `-`, `+` signs and `-0`.
fn parse_canonical_i64(text: &str) -> Option<i64> {
    let value: i64 = text.parse().ok()?;
    if value.to_string() == text {
        Some(value)
    } else {
        None
    }
}

fn parse_string_num(text: &str) -> Option<u8> {
    let digits = text.strip_prefix('s')?;
    let value = parse_canonical_i64(digits)?;
    if (1..=10).contains(&value) {
        Some(value as u8)
    } else {
        None
    }
}

fn parse_fret(text: &str) -> Option<u8> {
    let digits = text.strip_prefix('f')?;
    let value = parse_canonical_i64(digits)?;
    if (0..=30).contains(&value) {
        Some(value as u8)
    } else {
        None
    }
}

/// Parse one word into a token. Total: unmatched text becomes
/// [`Token::Unknown`] rather than an error.
///
/// Words are matched by their first colon-separated segment, so the
/// reserved prefixes (`artist`, `downtune`, `tempo`, `wait`, `drums`,
/// `nfx`, `bfx`) take precedence over the generic note pattern.
pub fn parse_token(text: &str) -> Token {
    let unknown = || Token::Unknown(text.to_string());

    match text {
        "start" => return Token::Start,
        "end" => return Token::End,
        "new_measure" => return Token::NewMeasure,
        _ => {}
    }

    let Some((head, rest)) = text.split_once(':') else {
        return unknown();
    };

    match head {
        "artist" => {
            if rest.is_empty() {
                unknown()
            } else {
                Token::Artist(rest.to_string())
            }
        }
        "downtune" => match parse_canonical_i64(rest) {
            Some(v) if v <= 0 && v >= i32::MIN as i64 => Token::Downtune(v as i32),
            _ => unknown(),
        },
        "tempo" => match parse_canonical_i64(rest) {
            Some(v) if v > 0 && v <= u32::MAX as i64 => Token::Tempo(v as u32),
            _ => unknown(),
        },
        "wait" => match parse_canonical_i64(rest) {
            Some(v) if v >= 0 => Token::Wait(v as u64),
            _ => unknown(),
        },
        "nfx" | "bfx" => {
            let mut segments = rest.split(':');
            let effect = segments.next().unwrap_or("");
            let params: Vec<String> = segments.map(str::to_string).collect();
            if effect.is_empty() || params.iter().any(String::is_empty) {
                return unknown();
            }
            let effect = effect.to_string();
            if head == "nfx" {
                Token::NoteEffect { effect, params }
            } else {
                Token::BeatEffect { effect, params }
            }
        }
        "drums" => {
            let segments: Vec<&str> = rest.split(':').collect();
            match segments.as_slice() {
                ["note", note_type] if !note_type.is_empty() => Token::Drums {
                    note_type: note_type.to_string(),
                },
                _ => unknown(),
            }
        }
        instrument => {
            if instrument.is_empty() {
                return unknown();
            }
            let segments: Vec<&str> = rest.split(':').collect();
            match segments.as_slice() {
                ["note", string_seg, fret_seg] => {
                    match (parse_string_num(string_seg), parse_fret(fret_seg)) {
                        (Some(string_num), Some(fret)) => Token::Note {
                            instrument: instrument.to_string(),
                            string_num,
                            fret,
                        },
                        _ => unknown(),
                    }
                }
                _ => unknown(),
            }
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Artist(name) => write!(f, "artist:{name}"),
            Token::Downtune(semitones) => write!(f, "downtune:{semitones}"),
            Token::Tempo(bpm) => write!(f, "tempo:{bpm}"),
            Token::Start => f.write_str("start"),
            Token::End => f.write_str("end"),
            Token::NewMeasure => f.write_str("new_measure"),
            Token::Note {
                instrument,
                string_num,
                fret,
            } => write!(f, "{instrument}:note:s{string_num}:f{fret}"),
            Token::Drums { note_type } => write!(f, "drums:note:{note_type}"),
            Token::Wait(ticks) => write!(f, "wait:{ticks}"),
            Token::NoteEffect { effect, params } => {
                write!(f, "nfx:{effect}")?;
                for param in params {
                    write!(f, ":{param}")?;
                }
                Ok(())
            }
            Token::BeatEffect { effect, params } => {
                write!(f, "bfx:{effect}")?;
                for param in params {
                    write!(f, ":{param}")?;
                }
                Ok(())
            }
            Token::Unknown(raw) => f.write_str(raw),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wait() {
        assert_eq!(parse_token("wait:480"), Token::Wait(480));
        assert_eq!(parse_token("wait:0"), Token::Wait(0));
        assert_eq!(
            parse_token("wait:-5"),
            Token::Unknown("wait:-5".to_string())
        );
    }

    #[test]
    fn parses_artist() {
        assert_eq!(
            parse_token("artist:jimi_hendrix"),
            Token::Artist("jimi_hendrix".to_string())
        );
    }

    #[test]
    fn parses_note() {
        assert_eq!(
            parse_token("distorted0:note:s3:f5"),
            Token::Note {
                instrument: "distorted0".to_string(),
                string_num: 3,
                fret: 5,
            }
        );
    }

    #[test]
    fn unmatched_text_becomes_unknown() {
        assert_eq!(parse_token("xyzzy"), Token::Unknown("xyzzy".to_string()));
    }

    #[test]
    fn note_bounds_enforced() {
        // string 0 and fret 31 are outside the grammar
        assert!(matches!(
            parse_token("clean0:note:s0:f5"),
            Token::Unknown(_)
        ));
        assert!(matches!(
            parse_token("clean0:note:s1:f31"),
            Token::Unknown(_)
        ));
        assert_eq!(
            parse_token("clean0:note:s10:f30"),
            Token::Note {
                instrument: "clean0".to_string(),
                string_num: 10,
                fret: 30,
            }
        );
    }

    #[test]
    fn positive_downtune_is_unknown() {
        assert!(matches!(parse_token("downtune:1"), Token::Unknown(_)));
        assert_eq!(parse_token("downtune:-1"), Token::Downtune(-1));
        assert_eq!(parse_token("downtune:0"), Token::Downtune(0));
    }

    #[test]
    fn non_canonical_numerals_are_unknown() {
        // leading zeros would break the round-trip invariant
        assert!(matches!(parse_token("wait:0240"), Token::Unknown(_)));
        assert!(matches!(parse_token("tempo:+120"), Token::Unknown(_)));
        assert!(matches!(parse_token("downtune:-0"), Token::Unknown(_)));
    }

    #[test]
    fn effects_keep_params() {
        assert_eq!(
            parse_token("nfx:bend:pos0:val4"),
            Token::NoteEffect {
                effect: "bend".to_string(),
                params: vec!["pos0".to_string(), "val4".to_string()],
            }
        );
        assert_eq!(
            parse_token("bfx:tapping"),
            Token::BeatEffect {
                effect: "tapping".to_string(),
                params: vec![],
            }
        );
        assert!(matches!(parse_token("nfx:"), Token::Unknown(_)));
        assert!(matches!(parse_token("nfx:bend::"), Token::Unknown(_)));
    }

    #[test]
    fn drums_take_precedence_over_note_pattern() {
        assert_eq!(
            parse_token("drums:note:36"),
            Token::Drums {
                note_type: "36".to_string()
            }
        );
        // a four-segment drums word matches neither pattern
        assert!(matches!(parse_token("drums:note:s3:f5"), Token::Unknown(_)));
    }

    #[test]
    fn display_inverts_parse_on_examples() {
        for word in [
            "artist:steve_vai",
            "downtune:-1",
            "tempo:120",
            "start",
            "end",
            "new_measure",
            "distorted0:note:s3:f5",
            "drums:note:42",
            "wait:960",
            "nfx:hammer",
            "nfx:bend:pos0:val4",
            "bfx:palm_mute",
            "xyzzy",
            "wait:01",
        ] {
            assert_eq!(parse_token(word).to_string(), word);
        }
    }
}
