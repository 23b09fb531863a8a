//! Synthetic tablature corpora for tests.
//!
//! Four fictional "artists" with strongly distinct signatures: which strings
//! and frets they favor, which wait values (note durations) they use, which
//! playing techniques they lean on, and their tempo range. The signatures
//! are disjoint enough that a conditioned generator and a classifier can be
//! validated end to end without any real data.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shredkit::corpus::{MeasureRange, SoloAnnotation};

/// Style knobs for one synthetic artist.
#[derive(Debug, Clone)]
pub struct ArtistSignature {
    pub name: &'static str,
    pub tempo: (u32, u32),
    pub strings: &'static [u8],
    pub frets: (u8, u8),
    pub waits: &'static [u64],
    /// Effect words sampled after a note.
    pub techniques: &'static [&'static str],
    /// Probability that a note carries a technique token.
    pub technique_rate: f64,
}

/// The four canonical synthetic artists. Durations, techniques, registers
/// and tempos are pairwise distinct.
pub fn canonical_artists() -> [ArtistSignature; 4] {
    [
        ArtistSignature {
            name: "bender",
            tempo: (88, 96),
            strings: &[1, 2],
            frets: (0, 5),
            waits: &[480, 960],
            techniques: &["nfx:bend:pos0:val4", "nfx:bend:pos6:val8"],
            technique_rate: 0.45,
        },
        ArtistSignature {
            name: "hammerer",
            tempo: (114, 122),
            strings: &[3, 4],
            frets: (5, 9),
            waits: &[240],
            techniques: &["nfx:hammer"],
            technique_rate: 0.55,
        },
        ArtistSignature {
            name: "slider",
            tempo: (104, 112),
            strings: &[5, 6],
            frets: (0, 4),
            waits: &[960, 1920],
            techniques: &["nfx:slide:shift", "nfx:vibrato", "bfx:palm_mute"],
            technique_rate: 0.40,
        },
        ArtistSignature {
            name: "tapper",
            tempo: (136, 144),
            strings: &[1, 2],
            frets: (12, 17),
            waits: &[160, 80],
            techniques: &["bfx:tapping"],
            technique_rate: 0.50,
        },
    ]
}

pub const MEASURES_PER_SONG: usize = 8;
pub const BEATS_PER_MEASURE: usize = 4;

/// Deterministic token text for one song of one artist. `multi` adds a bass
/// line and a drum hit per measure.
pub fn song_text(signature: &ArtistSignature, song_index: usize, multi: bool, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(1_000_003)
            .wrapping_add(hash_name(signature.name))
            .wrapping_add(song_index as u64),
    );
    let tempo = rng.gen_range(signature.tempo.0..=signature.tempo.1);
    let mut words: Vec<String> = vec![
        format!("artist:{}", signature.name),
        "downtune:0".to_string(),
        format!("tempo:{tempo}"),
        "start".to_string(),
    ];

    for measure in 0..MEASURES_PER_SONG {
        if measure > 0 {
            words.push("new_measure".to_string());
        }
        for beat in 0..BEATS_PER_MEASURE {
            if multi && beat == 0 {
                words.push(format!(
                    "bass0:note:s{}:f{}",
                    rng.gen_range(1..=4),
                    rng.gen_range(0..=5)
                ));
                words.push("drums:note:36".to_string());
            }
            let string = *signature.strings.choose(&mut rng).unwrap();
            let fret = rng.gen_range(signature.frets.0..=signature.frets.1);
            words.push(format!("distorted0:note:s{string}:f{fret}"));
            if rng.gen_bool(signature.technique_rate) {
                words.push(signature.techniques.choose(&mut rng).unwrap().to_string());
            }
            words.push(format!(
                "wait:{}",
                signature.waits.choose(&mut rng).unwrap()
            ));
        }
    }
    words.push("end".to_string());
    words.join(" ")
}

fn hash_name(name: &str) -> u64 {
    name.bytes().fold(0u64, |acc, byte| {
        acc.wrapping_mul(131).wrapping_add(byte as u64)
    })
}

/// Write a labeled fixture corpus under `dir` (one subdirectory per artist)
/// and return the number of files written.
pub fn write_corpus(
    dir: &Path,
    songs_per_artist: usize,
    multi: bool,
    seed: u64,
) -> std::io::Result<usize> {
    let mut written = 0;
    for signature in canonical_artists() {
        let artist_dir = dir.join(signature.name);
        std::fs::create_dir_all(&artist_dir)?;
        for song in 0..songs_per_artist {
            let path = artist_dir.join(format!("{}_{song:03}.tokens.txt", signature.name));
            std::fs::write(path, song_text(&signature, song, multi, seed))?;
            written += 1;
        }
    }
    Ok(written)
}

/// Write a multi-instrument corpus plus a sidecar annotation file marking
/// solo sections (three per song). Returns (files written, annotations).
pub fn write_annotated_corpus(
    corpus_dir: &Path,
    annotations_path: &Path,
    songs_per_artist: usize,
    seed: u64,
) -> std::io::Result<(usize, usize)> {
    let written = write_corpus(corpus_dir, songs_per_artist, true, seed)?;
    let mut annotations = Vec::new();
    for signature in canonical_artists() {
        for song in 0..songs_per_artist {
            let song_path = format!("{}/{}_{song:03}.tokens.txt", signature.name, signature.name);
            annotations.push(SoloAnnotation {
                song_path,
                target_instrument: "distorted0".to_string(),
                sections: vec![
                    MeasureRange {
                        start_measure: 2,
                        end_measure: 3,
                    },
                    MeasureRange {
                        start_measure: 5,
                        end_measure: 5,
                    },
                    MeasureRange {
                        start_measure: 7,
                        end_measure: 8,
                    },
                ],
            });
        }
    }
    let count = annotations.iter().map(|a| a.sections.len()).sum();
    std::fs::write(
        annotations_path,
        serde_json::to_string_pretty(&annotations).expect("annotations serialize"),
    )?;
    Ok((written, count))
}

/// A random whitespace-free word for parser totality fuzzing: a mix of
/// grammar-shaped tokens, near misses, and raw garbage.
pub fn random_word(rng: &mut impl Rng) -> String {
    let word = match rng.gen_range(0..12u32) {
        0 => format!("wait:{}", rng.gen_range(-10i64..100_000)),
        1 => format!("tempo:{}", rng.gen_range(-5i64..400)),
        2 => format!("downtune:{}", rng.gen_range(-15i64..5)),
        3 => format!(
            "distorted{}:note:s{}:f{}",
            rng.gen_range(0..3),
            rng.gen_range(-2i32..15),
            rng.gen_range(-2i32..40)
        ),
        4 => format!("drums:note:{}", rng.gen_range(0..80)),
        5 => {
            let effects = [
                "bend",
                "hammer",
                "slide",
                "vibrato",
                "tapping",
                "palm_mute",
                "",
            ];
            format!(
                "{}:{}",
                if rng.gen_bool(0.5) { "nfx" } else { "bfx" },
                effects.choose(rng).unwrap()
            )
        }
        6 => ["start", "end", "new_measure", "artist:x", "artist:"]
            .choose(rng)
            .unwrap()
            .to_string(),
        7 => format!("wait:{:04}", rng.gen_range(0..999)), // leading zeros
        8 => format!("{}:note:s1:f1", random_ascii(rng, 6)),
        9 => format!("nfx:bend:{}", random_ascii(rng, 4)),
        10 => {
            let length = rng.gen_range(1..20);
            random_ascii(rng, length)
        }
        _ => {
            // arbitrary unicode soup
            let length = rng.gen_range(1..8);
            (0..length)
                .map(|_| char::from_u32(rng.gen_range(0x21..0x2FF)).unwrap_or('x'))
                .collect()
        }
    };
    let cleaned: String = word.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        "x".to_string()
    } else {
        cleaned
    }
}

fn random_ascii(rng: &mut impl Rng, length: usize) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_:-";
    (0..length)
        .map(|_| *ALPHABET.choose(rng).unwrap() as char)
        .collect()
}

/// A random 12-bin pitch-class histogram with at least one nonzero bin.
pub fn random_histogram(rng: &mut impl Rng) -> [f64; 12] {
    loop {
        let mut counts = [0.0f64; 12];
        for count in counts.iter_mut() {
            if rng.gen_bool(0.6) {
                *count = rng.gen_range(1..50) as f64;
            }
        }
        if counts.iter().sum::<f64>() > 0.0 {
            return counts;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shredkit::tokens::{is_valid, parse_stream, serialize};

    #[test]
    fn songs_are_deterministic_and_valid() {
        let artists = canonical_artists();
        let first = song_text(&artists[0], 3, true, 42);
        let second = song_text(&artists[0], 3, true, 42);
        assert_eq!(first, second);
        assert_ne!(first, song_text(&artists[0], 4, true, 42));

        for signature in &artists {
            for song in 0..5 {
                let text = song_text(signature, song, song % 2 == 0, 7);
                let parsed = parse_stream(&text);
                assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
                assert!(is_valid(&parsed.stream));
                assert_eq!(serialize(&parsed.stream), text);
            }
        }
    }

    #[test]
    fn corpus_writes_expected_layout() {
        let dir = tempfile::tempdir().unwrap();
        let written = write_corpus(dir.path(), 3, false, 1).unwrap();
        assert_eq!(written, 12);
        assert!(dir.path().join("bender/bender_000.tokens.txt").is_file());
    }

    #[test]
    fn annotations_cover_every_song() {
        let dir = tempfile::tempdir().unwrap();
        let annotations_path = dir.path().join("solos.json");
        let (files, sections) =
            write_annotated_corpus(&dir.path().join("corpus"), &annotations_path, 3, 1).unwrap();
        assert_eq!(files, 12);
        assert_eq!(sections, 36);
        let loaded = shredkit::corpus::load_annotations(&annotations_path).unwrap();
        assert_eq!(loaded.len(), 12);
    }

    #[test]
    fn random_words_have_no_whitespace() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..2000 {
            let word = random_word(&mut rng);
            assert!(!word.is_empty());
            assert!(!word.contains(char::is_whitespace));
        }
    }
}
