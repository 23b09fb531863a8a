//! Per-guitarist style features computed from token streams: note-duration
//! distributions, playing-technique distributions, pitch-class histograms,
//! pitch class entropy, scale consistency, and corpus summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::FeatureError;
use crate::tokens::{EventTimeline, Token, TokenStream};

/// Pitch-class spellings, sharps convention, index = midi % 12.
pub const PITCH_CLASS_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// The six techniques tracked by the technique distribution, matched by
/// prefix against nfx/bfx effect names.
pub const CANONICAL_TECHNIQUES: [&str; 6] =
    ["bend", "vibrato", "hammer", "slide", "tapping", "palm_mute"];

// ---------------------------------------------------------------------------
// Distribution
// ---------------------------------------------------------------------------

/// A categorical distribution over labeled bins: raw counts plus derived
/// probabilities. Shared by every feature and divergence computation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    bins: Vec<(String, f64)>,
}

impl Distribution {
    /// Build from (label, count) pairs. Duplicate labels accumulate into
    /// the first occurrence; counts are clamped at zero.
    pub fn from_counts(pairs: impl IntoIterator<Item = (String, f64)>) -> Self {
        let mut bins: Vec<(String, f64)> = Vec::new();
        for (label, count) in pairs {
            let count = count.max(0.0);
            match bins.iter_mut().find(|(existing, _)| *existing == label) {
                Some((_, total)) => *total += count,
                None => bins.push((label, count)),
            }
        }
        Distribution { bins }
    }

    pub fn bins(&self) -> &[(String, f64)] {
        &self.bins
    }

    pub fn count(&self, label: &str) -> Option<f64> {
        self.bins
            .iter()
            .find(|(existing, _)| existing == label)
            .map(|(_, count)| *count)
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().map(|(_, count)| count).sum()
    }

    /// True when every bin is zero; such distributions cannot feed a
    /// divergence.
    pub fn is_degenerate(&self) -> bool {
        self.total() <= 0.0
    }

    /// (label, probability) pairs; empty when the total is zero.
    pub fn probabilities(&self) -> Vec<(String, f64)> {
        let total = self.total();
        if total <= 0.0 {
            return Vec::new();
        }
        self.bins
            .iter()
            .map(|(label, count)| (label.clone(), count / total))
            .collect()
    }

    /// Bin-wise count addition; the associative merge used to aggregate
    /// per-song distributions into per-artist ones.
    pub fn merge(&mut self, other: &Distribution) {
        for (label, count) in &other.bins {
            match self.bins.iter_mut().find(|(existing, _)| existing == label) {
                Some((_, total)) => *total += count,
                None => self.bins.push((label.clone(), *count)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Feature operations
// ---------------------------------------------------------------------------

/// Note-duration distribution in ticks: one bin per distinct duration,
/// sorted numerically. Only pitched events count; drums carry no pitch
/// and stay out of the duration statistics.
pub fn note_duration_distribution(timeline: &EventTimeline) -> Result<Distribution, FeatureError> {
    if timeline.events.is_empty() {
        return Err(FeatureError::EmptyTimeline);
    }
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    for event in timeline.pitched_events() {
        *counts.entry(event.duration_ticks).or_insert(0.0) += 1.0;
    }
    Ok(Distribution::from_counts(
        counts
            .into_iter()
            .map(|(ticks, count)| (ticks.to_string(), count)),
    ))
}

/// Playing-technique distribution over the canonical six techniques,
/// counted per nfx/bfx token by effect-name prefix. Other effects are
/// ignored; all six bins are always present.
pub fn technique_distribution(stream: &TokenStream) -> Distribution {
    let mut counts = [0.0f64; 6];
    for token in &stream.body {
        let effect = match token {
            Token::NoteEffect { effect, .. } => effect,
            Token::BeatEffect { effect, .. } => effect,
            _ => continue,
        };
        if let Some(slot) = CANONICAL_TECHNIQUES
            .iter()
            .position(|technique| effect.starts_with(technique))
        {
            counts[slot] += 1.0;
        }
    }
    Distribution::from_counts(
        CANONICAL_TECHNIQUES
            .iter()
            .zip(counts)
            .map(|(label, count)| (label.to_string(), count)),
    )
}

/// Twelve-bin pitch-class histogram (C..B) over the timeline's pitched
/// events; drums carry no pitch and are excluded.
pub fn pitch_class_histogram(timeline: &EventTimeline) -> Result<Distribution, FeatureError> {
    let mut counts = [0.0f64; 12];
    let mut any = false;
    for event in timeline.pitched_events() {
        let pitch_class = (event.midi_pitch.unwrap() % 12) as usize;
        counts[pitch_class] += 1.0;
        any = true;
    }
    if !any {
        return Err(FeatureError::NoPitchedEvents);
    }
    Ok(Distribution::from_counts(
        PITCH_CLASS_NAMES
            .iter()
            .zip(counts)
            .map(|(label, count)| (label.to_string(), count)),
    ))
}

/// Shannon entropy in bits of a pitch-class histogram; 0 for a single
/// class, log2(12) for the uniform histogram.
pub fn pitch_class_entropy(histogram: &Distribution) -> Result<f64, FeatureError> {
    let total = histogram.total();
    if total <= 0.0 {
        return Err(FeatureError::EmptyHistogram);
    }
    let mut entropy = 0.0;
    for (_, count) in histogram.bins() {
        if *count > 0.0 {
            let p = count / total;
            entropy -= p * p.log2();
        }
    }
    Ok(entropy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    Major,
    Minor,
}

impl std::fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScaleMode::Major => "major",
            ScaleMode::Minor => "minor",
        })
    }
}

/// Best-fitting scale: the largest in-scale note fraction over all 12 major
/// and 12 natural-minor scales, with its argmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleResult {
    pub consistency: f64,
    pub root: u8,
    pub mode: ScaleMode,
}

const MAJOR_INTERVALS: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
const MINOR_INTERVALS: [u8; 7] = [0, 2, 3, 5, 7, 8, 10];

fn scale_classes(root: u8, mode: ScaleMode) -> [bool; 12] {
    let intervals = match mode {
        ScaleMode::Major => MAJOR_INTERVALS,
        ScaleMode::Minor => MINOR_INTERVALS,
    };
    let mut member = [false; 12];
    for interval in intervals {
        member[((root + interval) % 12) as usize] = true;
    }
    member
}

/// Scale consistency: maximum in-scale fraction over the 24 candidate
/// scales. Ties break toward the lowest root, major before minor.
pub fn scale_consistency(histogram: &Distribution) -> Result<ScaleResult, FeatureError> {
    let total = histogram.total();
    if total <= 0.0 {
        return Err(FeatureError::EmptyHistogram);
    }
    let mut class_counts = [0.0f64; 12];
    for (label, count) in histogram.bins() {
        if let Some(class) = PITCH_CLASS_NAMES.iter().position(|name| name == label) {
            class_counts[class] += count;
        }
    }

    let mut best: Option<ScaleResult> = None;
    for root in 0..12u8 {
        for mode in [ScaleMode::Major, ScaleMode::Minor] {
            let member = scale_classes(root, mode);
            let in_scale: f64 = class_counts
                .iter()
                .enumerate()
                .filter(|(class, _)| member[*class])
                .map(|(_, count)| count)
                .sum();
            let consistency = in_scale / total;
            let better = match &best {
                None => true,
                Some(current) => consistency > current.consistency + 1e-15,
            };
            if better {
                best = Some(ScaleResult {
                    consistency,
                    root,
                    mode,
                });
            }
        }
    }
    Ok(best.expect("24 candidate scales always produce a result"))
}

// ---------------------------------------------------------------------------
// Corpus summary
// ---------------------------------------------------------------------------

/// One summary row: average header tempo, note-token count, effect-token
/// count. `avg_tempo` is `None` for an artist with no songs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub avg_tempo: Option<u32>,
    pub num_songs: usize,
    pub num_notes: u64,
    pub num_fx: u64,
}

/// Per-artist corpus statistics in the shape of the conditioning-subset
/// overview table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub rows: BTreeMap<String, SummaryRow>,
}

impl CorpusSummary {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a TokenStream)>) -> Self {
        let mut tempos: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut rows: BTreeMap<String, SummaryRow> = BTreeMap::new();
        for (artist, stream) in pairs {
            let row = rows.entry(artist.to_string()).or_insert(SummaryRow {
                avg_tempo: None,
                num_songs: 0,
                num_notes: 0,
                num_fx: 0,
            });
            row.num_songs += 1;
            for token in &stream.body {
                match token {
                    Token::Note { .. } => row.num_notes += 1,
                    Token::NoteEffect { .. } | Token::BeatEffect { .. } => row.num_fx += 1,
                    _ => {}
                }
            }
            tempos
                .entry(artist.to_string())
                .or_default()
                .push(stream.header.tempo());
        }
        for (artist, artist_tempos) in tempos {
            let mean =
                artist_tempos.iter().map(|&t| t as f64).sum::<f64>() / artist_tempos.len() as f64;
            if let Some(row) = rows.get_mut(&artist) {
                row.avg_tempo = Some(mean.round() as u32);
            }
        }
        CorpusSummary { rows }
    }

    /// Insert a zero row for an artist with no songs (tempo undefined).
    pub fn ensure_artist(&mut self, artist: &str) {
        self.rows.entry(artist.to_string()).or_insert(SummaryRow {
            avg_tempo: None,
            num_songs: 0,
            num_notes: 0,
            num_fx: 0,
        });
    }
}
