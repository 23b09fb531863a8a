//! Corpus handling: ingesting labeled token files, injecting artist control
//! tokens, extracting annotated solo sections, and stratified splits.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::CorpusError;
use crate::tokens::{parse_stream, Token, TokenStream};

pub const TOKEN_FILE_SUFFIX: &str = ".tokens.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One ingested song: where it came from, its artist label, the parsed
/// stream, and any parse warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub artist: String,
    pub stream: TokenStream,
    pub warnings: Vec<String>,
}

/// An ordered, immutable collection of labeled songs. Entries are sorted by
/// path, so ingestion is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusIndex {
    pub entries: Vec<CorpusEntry>,
    /// Files that could not be loaded, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl CorpusIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorted unique artist labels.
    pub fn artists(&self) -> Vec<String> {
        let mut artists: Vec<String> = self.entries.iter().map(|e| e.artist.clone()).collect();
        artists.sort();
        artists.dedup();
        artists
    }

    /// Entries grouped by artist label, artists in sorted order.
    pub fn by_artist(&self) -> BTreeMap<&str, Vec<&CorpusEntry>> {
        let mut groups: BTreeMap<&str, Vec<&CorpusEntry>> = BTreeMap::new();
        for entry in &self.entries {
            groups.entry(entry.artist.as_str()).or_default().push(entry);
        }
        groups
    }

    fn from_entries(mut entries: Vec<CorpusEntry>) -> Self {
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        CorpusIndex {
            entries,
            skipped: Vec::new(),
        }
    }
}

/// Recursively load every `.tokens.txt` file under `root`. The artist label
/// is the first path component below the root; a `manifest.json` mapping of
/// relative path to label overrides it. Unreadable files are skipped and
/// recorded.
pub fn ingest(root: &Path) -> Result<CorpusIndex, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::Io {
            path: root.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }

    let manifest: BTreeMap<String, String> = {
        let manifest_path = root.join(MANIFEST_FILE);
        if manifest_path.is_file() {
            let text =
                std::fs::read_to_string(&manifest_path).map_err(|source| CorpusError::Io {
                    path: manifest_path.display().to_string(),
                    source,
                })?;
            serde_json::from_str(&text).map_err(|e| CorpusError::BadSidecar {
                path: manifest_path.display().to_string(),
                message: e.to_string(),
            })?
        } else {
            BTreeMap::new()
        }
    };

    let mut paths: Vec<PathBuf> = WalkDir::new(root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|entry| entry.file_type().is_file())
        .filter(|entry| {
            entry
                .file_name()
                .to_str()
                .is_some_and(|name| name.ends_with(TOKEN_FILE_SUFFIX))
        })
        .map(|entry| entry.into_path())
        .collect();
    paths.sort();

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) => {
                skipped.push((path, format!("unreadable: {e}")));
                continue;
            }
        };
        let relative = path.strip_prefix(root).unwrap_or(&path);
        let relative_key = relative
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");

        let parsed = parse_stream(&text);
        let mut warnings: Vec<String> = parsed
            .warnings
            .iter()
            .map(|w| format!("word {}: {}", w.word_index, w.message))
            .collect();

        let artist = if let Some(label) = manifest.get(&relative_key) {
            label.clone()
        } else if relative.components().count() >= 2 {
            relative
                .components()
                .next()
                .unwrap()
                .as_os_str()
                .to_string_lossy()
                .into_owned()
        } else if let Some(artist) = &parsed.stream.header.artist {
            artist.clone()
        } else {
            warnings.push("no artist label derivable from path or header".to_string());
            "unknown".to_string()
        };

        entries.push(CorpusEntry {
            path,
            artist,
            stream: parsed.stream,
            warnings,
        });
    }

    if entries.is_empty() {
        return Err(CorpusError::EmptyCorpus(root.display().to_string()));
    }
    let mut index = CorpusIndex::from_entries(entries);
    index.skipped = skipped;
    Ok(index)
}

/// Set or replace the stream's artist control token. Idempotent; the name
/// must be non-empty and contain neither whitespace nor `:`.
pub fn inject_artist_token(stream: &TokenStream, artist: &str) -> Result<TokenStream, CorpusError> {
    if artist.is_empty() || artist.contains(char::is_whitespace) || artist.contains(':') {
        return Err(CorpusError::InvalidArtistName(artist.to_string()));
    }
    let mut injected = stream.clone();
    injected.header.artist = Some(artist.to_string());
    Ok(injected)
}

/// An inclusive 1-based measure range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureRange {
    pub start_measure: usize,
    pub end_measure: usize,
}

/// Sidecar record marking where a song's solo sections are and which
/// instrument plays them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoloAnnotation {
    pub song_path: String,
    pub target_instrument: String,
    pub sections: Vec<MeasureRange>,
}

/// Load a JSON list of [`SoloAnnotation`] records.
pub fn load_annotations(path: &Path) -> Result<Vec<SoloAnnotation>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CorpusError::BadSidecar {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Extract one annotated solo section as a standalone stream.
///
/// The section spans measures `start_measure..=end_measure` (1-based,
/// `new_measure` delimited, measure 1 starting at `start`). Within the
/// span, only the target instrument's notes, their attached effects, and
/// structure tokens survive; waits made adjacent by the removals are merged
/// by summing so the section's tick span is conserved.
pub fn extract_solo(
    stream: &TokenStream,
    section: MeasureRange,
    target_instrument: &str,
) -> Result<TokenStream, CorpusError> {
    let measure_count = stream.measure_count();
    if !stream.body.iter().any(|t| matches!(t, Token::NewMeasure)) {
        return Err(CorpusError::NoMeasureTokens);
    }
    let MeasureRange {
        start_measure,
        end_measure,
    } = section;
    if start_measure < 1 || start_measure > end_measure || end_measure > measure_count {
        return Err(CorpusError::MeasureOutOfRange {
            start: start_measure,
            end: end_measure,
            measures: measure_count,
        });
    }

    // Slice the body into measures; boundary new_measure tokens are
    // separators, interior ones are re-inserted below.
    let mut measures: Vec<&[Token]> = Vec::new();
    let mut measure_start = 0;
    for (index, token) in stream.body.iter().enumerate() {
        if matches!(token, Token::NewMeasure) {
            measures.push(&stream.body[measure_start..index]);
            measure_start = index + 1;
        }
    }
    measures.push(&stream.body[measure_start..]);

    let mut span: Vec<&Token> = Vec::new();
    for (offset, measure) in measures[start_measure - 1..end_measure].iter().enumerate() {
        if offset > 0 {
            span.push(&Token::NewMeasure);
        }
        span.extend(measure.iter());
    }

    // Filter to the target instrument, tracking beat state so effects only
    // survive when their owning note does.
    let mut kept: Vec<Token> = Vec::new();
    let mut last_note_kept = false;
    let mut beat_has_kept_note = false;
    for token in span {
        match token {
            Token::Note { instrument, .. } => {
                if instrument == target_instrument {
                    kept.push(token.clone());
                    last_note_kept = true;
                    beat_has_kept_note = true;
                } else {
                    last_note_kept = false;
                }
            }
            Token::Drums { .. } => last_note_kept = false,
            Token::NoteEffect { .. } => {
                if last_note_kept {
                    kept.push(token.clone());
                }
            }
            Token::BeatEffect { .. } => {
                if beat_has_kept_note {
                    kept.push(token.clone());
                }
            }
            Token::Wait(_) | Token::NewMeasure => {
                kept.push(token.clone());
                last_note_kept = false;
                beat_has_kept_note = false;
            }
            // mid-stream tempo changes pass through untouched
            Token::Tempo(_) => kept.push(token.clone()),
            _ => {}
        }
    }

    // Merge runs of waits created by the removals.
    let mut body: Vec<Token> = Vec::new();
    for token in kept {
        if let (Token::Wait(ticks), Some(Token::Wait(previous))) = (&token, body.last_mut()) {
            *previous += ticks;
        } else {
            body.push(token);
        }
    }

    Ok(TokenStream {
        header: stream.header.clone(),
        body,
    })
}

/// Deterministic stratified train/validation/test split. Per-artist counts
/// are rounded by largest remainder; shuffling is seeded.
pub fn split(
    corpus: &CorpusIndex,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(CorpusIndex, CorpusIndex, CorpusIndex), CorpusError> {
    let ratio_array = [ratios.0, ratios.1, ratios.2];
    if ratio_array.iter().any(|r| *r < 0.0) || (ratio_array.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(CorpusError::InvalidRatios(ratio_array));
    }
    let all_nonempty = ratio_array.iter().all(|r| *r > 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits: [Vec<CorpusEntry>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    for (artist, group) in corpus.by_artist() {
        if all_nonempty && group.len() < 3 {
            return Err(CorpusError::TooFewSongs {
                artist: artist.to_string(),
                songs: group.len(),
            });
        }
        let mut entries: Vec<&CorpusEntry> = group;
        entries.shuffle(&mut rng);

        let quotas = largest_remainder(entries.len(), &ratio_array);
        let mut cursor = 0;
        for (slot, quota) in quotas.into_iter().enumerate() {
            for entry in &entries[cursor..cursor + quota] {
                splits[slot].push((*entry).clone());
            }
            cursor += quota;
        }
    }

    let [train, validation, test] = splits;
    Ok((
        CorpusIndex::from_entries(train),
        CorpusIndex::from_entries(validation),
        CorpusIndex::from_entries(test),
    ))
}

/// Apportion `n` items into slots proportional to `ratios`, assigning
/// leftovers to the largest fractional parts (ties to the earlier slot).
fn largest_remainder(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: [usize; 3] = [0; 3];
    let mut fractions: Vec<(usize, f64)> = Vec::new();
    let mut assigned = 0;
    for (slot, value) in exact.iter().enumerate() {
        counts[slot] = value.floor() as usize;
        assigned += counts[slot];
        fractions.push((slot, value - value.floor()));
    }
    fractions.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (slot, _) in fractions.into_iter().take(n - assigned) {
        counts[slot] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokens::{decode_events, serialize};

    fn write_song(dir: &Path, relative: &str, text: &str) {
        let path = dir.join(relative);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, text).unwrap();
    }

    #[test]
    fn ingest_labels_from_first_path_component() {
        let dir = tempfile::tempdir().unwrap();
        write_song(
            dir.path(),
            "jimi_hendrix/song1.tokens.txt",
            "tempo:100 start wait:960 end",
        );
        let corpus = ingest(dir.path()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.entries[0].artist, "jimi_hendrix");
    }

    #[test]
    fn manifest_overrides_path_label() {
        let dir = tempfile::tempdir().unwrap();
        write_song(
            dir.path(),
            "misc/song1.tokens.txt",
            "tempo:100 start wait:960 end",
        );
        std::fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"misc/song1.tokens.txt": "steve_vai"}"#,
        )
        .unwrap();
        let corpus = ingest(dir.path()).unwrap();
        assert_eq!(corpus.entries[0].artist, "steve_vai");
    }

    #[test]
    fn ingest_rejects_empty_roots_and_skips_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest(dir.path()),
            Err(CorpusError::EmptyCorpus(_))
        ));
        write_song(dir.path(), "a/ok.tokens.txt", "start wait:1 end");
        std::fs::write(dir.path().join("a/bad.tokens.txt"), [0xff, 0xfe, 0x01]).unwrap();
        let corpus = ingest(dir.path()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.skipped.len(), 1);
    }

    #[test]
    fn inject_sets_and_replaces_artist() {
        let stream = parse_stream("start wait:960 end").stream;
        let injected = inject_artist_token(&stream, "steve_vai").unwrap();
        assert!(serialize(&injected).starts_with("artist:steve_vai "));

        let replaced = inject_artist_token(&injected, "yngwie_malmsteen").unwrap();
        assert!(serialize(&replaced).starts_with("artist:yngwie_malmsteen "));
        assert_eq!(replaced.body, stream.body);

        let twice = inject_artist_token(&replaced, "yngwie_malmsteen").unwrap();
        assert_eq!(twice, replaced);
    }

    #[test]
    fn inject_rejects_bad_names() {
        let stream = TokenStream::default();
        assert!(inject_artist_token(&stream, "").is_err());
        assert!(inject_artist_token(&stream, "a b").is_err());
        assert!(inject_artist_token(&stream, "a:b").is_err());
    }

    const FOUR_MEASURES: &str = "tempo:100 start \
        distorted0:note:s1:f1 wait:240 new_measure \
        distorted0:note:s1:f2 bass:note:s1:f0 wait:240 new_measure \
        distorted0:note:s1:f3 nfx:bend wait:120 bass:note:s2:f2 wait:120 new_measure \
        distorted0:note:s1:f4 wait:240 end";

    #[test]
    fn extract_solo_slices_exact_measures() {
        let stream = parse_stream(FOUR_MEASURES).stream;
        let solo = extract_solo(
            &stream,
            MeasureRange {
                start_measure: 2,
                end_measure: 3,
            },
            "distorted0",
        )
        .unwrap();
        assert_eq!(solo.measure_count(), 2);
        assert!(!solo
            .body
            .iter()
            .any(|t| matches!(t, Token::Note { instrument, .. } if instrument == "bass")));
        // tick span of measures 2..3 is 240 + 240
        let timeline = decode_events(&solo, None);
        assert_eq!(timeline.total_ticks, 480);
    }

    #[test]
    fn extract_solo_merges_waits_left_by_removals() {
        // bass note sits between two waits; removing it merges them
        let stream = parse_stream(
            "start distorted0:note:s1:f1 wait:120 bass:note:s1:f0 wait:120 new_measure \
             distorted0:note:s1:f2 wait:240 end",
        )
        .stream;
        let solo = extract_solo(
            &stream,
            MeasureRange {
                start_measure: 1,
                end_measure: 2,
            },
            "distorted0",
        )
        .unwrap();
        assert_eq!(
            solo.body,
            vec![
                Token::Note {
                    instrument: "distorted0".to_string(),
                    string_num: 1,
                    fret: 1
                },
                Token::Wait(240),
                Token::NewMeasure,
                Token::Note {
                    instrument: "distorted0".to_string(),
                    string_num: 1,
                    fret: 2
                },
                Token::Wait(240),
            ]
        );
    }

    #[test]
    fn extract_solo_drops_other_instruments_effects() {
        let stream = parse_stream(
            "start bass:note:s1:f0 nfx:bend distorted0:note:s1:f1 nfx:vibrato bfx:palm_mute \
             wait:240 new_measure distorted0:note:s1:f2 wait:240 end",
        )
        .stream;
        let solo = extract_solo(
            &stream,
            MeasureRange {
                start_measure: 1,
                end_measure: 1,
            },
            "distorted0",
        )
        .unwrap();
        let effects: Vec<String> = solo
            .body
            .iter()
            .filter_map(|t| match t {
                Token::NoteEffect { effect, .. } => Some(format!("nfx:{effect}")),
                Token::BeatEffect { effect, .. } => Some(format!("bfx:{effect}")),
                _ => None,
            })
            .collect();
        assert_eq!(effects, vec!["nfx:vibrato", "bfx:palm_mute"]);
    }

    #[test]
    fn extract_solo_range_errors() {
        let stream = parse_stream(FOUR_MEASURES).stream;
        assert!(matches!(
            extract_solo(
                &stream,
                MeasureRange {
                    start_measure: 2,
                    end_measure: 9,
                },
                "distorted0",
            ),
            Err(CorpusError::MeasureOutOfRange { .. })
        ));

        let measureless = parse_stream("start wait:240 end").stream;
        assert!(matches!(
            extract_solo(
                &measureless,
                MeasureRange {
                    start_measure: 1,
                    end_measure: 1,
                },
                "distorted0",
            ),
            Err(CorpusError::NoMeasureTokens)
        ));
    }

    fn synthetic_corpus(songs_per_artist: usize) -> CorpusIndex {
        let mut entries = Vec::new();
        for artist in ["aa", "bb", "cc", "dd"] {
            for song in 0..songs_per_artist {
                entries.push(CorpusEntry {
                    path: PathBuf::from(format!("{artist}/song{song:02}.tokens.txt")),
                    artist: artist.to_string(),
                    stream: parse_stream("start wait:960 end").stream,
                    warnings: Vec::new(),
                });
            }
        }
        CorpusIndex::from_entries(entries)
    }

    #[test]
    fn split_counts_follow_largest_remainder() {
        let corpus = synthetic_corpus(20);
        let (train, validation, test) = split(&corpus, (0.55, 0.20, 0.25), 7).unwrap();
        assert_eq!(train.len(), 44);
        assert_eq!(validation.len(), 16);
        assert_eq!(test.len(), 20);
        for index in [&train, &validation, &test] {
            for artist in ["aa", "bb", "cc", "dd"] {
                let count = index.entries.iter().filter(|e| e.artist == artist).count();
                match index.len() {
                    44 => assert_eq!(count, 11),
                    16 => assert_eq!(count, 4),
                    _ => assert_eq!(count, 5),
                }
            }
        }
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let corpus = synthetic_corpus(5);
        let first = split(&corpus, (0.55, 0.20, 0.25), 42).unwrap();
        let second = split(&corpus, (0.55, 0.20, 0.25), 42).unwrap();
        assert_eq!(first.0.entries, second.0.entries);
        assert_eq!(first.1.entries, second.1.entries);
        assert_eq!(first.2.entries, second.2.entries);

        let mut all_paths: Vec<&PathBuf> = first
            .0
            .entries
            .iter()
            .chain(&first.1.entries)
            .chain(&first.2.entries)
            .map(|e| &e.path)
            .collect();
        all_paths.sort();
        all_paths.dedup();
        assert_eq!(all_paths.len(), corpus.len());
    }

    #[test]
    fn split_edge_cases() {
        let corpus = synthetic_corpus(2);
        assert!(matches!(
            split(&corpus, (0.55, 0.20, 0.25), 1),
            Err(CorpusError::TooFewSongs { .. })
        ));
        let (train, validation, test) = split(&corpus, (1.0, 0.0, 0.0), 1).unwrap();
        assert_eq!(train.len(), corpus.len());
        assert!(validation.is_empty());
        assert!(test.is_empty());

        assert!(matches!(
            split(&corpus, (0.5, 0.2, 0.2), 1),
            Err(CorpusError::InvalidRatios(_))
        ));
    }
}
