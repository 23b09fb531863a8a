//! Guitarist classification: multinomial naive Bayes over token unigrams,
//! plus per-configuration score tables for generated corpora and an
//! optional feature-vector scorer for cross-checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusIndex;
use crate::error::ClassifyError;
use crate::musicology::{
    pitch_class_entropy, pitch_class_histogram, scale_consistency, technique_distribution,
    CANONICAL_TECHNIQUES,
};
use crate::stats::descriptive;
use crate::stylelm::ConfigId;
use crate::tokens::{decode_guitar_events, Token, TokenStream};

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Feature words of a stream: wait, guitar note, nfx and bfx token
/// spellings. Control tokens never reach the features (they would leak the
/// label), and bass, drums, unknown and structure tokens are skipped.
pub fn feature_words(stream: &TokenStream) -> Vec<String> {
    stream
        .body
        .iter()
        .filter(|token| match token {
            Token::Wait(_) | Token::NoteEffect { .. } | Token::BeatEffect { .. } => true,
            Token::Note { instrument, .. } => !instrument.starts_with("bass"),
            _ => false,
        })
        .map(Token::to_string)
        .collect()
}

/// Multinomial naive Bayes over token unigrams with Laplace smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub alpha: f64,
    /// Sorted class labels.
    pub artists: Vec<String>,
    /// log P(artist), aligned with `artists`.
    pub log_priors: Vec<f64>,
    /// Sorted feature vocabulary.
    pub vocab: Vec<String>,
    /// log P(token | artist), `[artist][vocab]`, each row normalized.
    pub log_likelihood: Vec<Vec<f64>>,
}

/// Train on a labeled corpus; token likelihoods are
/// `(count + α) / (total + α · |vocab|)` per artist.
pub fn train_nb(train_split: &CorpusIndex, alpha: f64) -> Result<NbModel, ClassifyError> {
    assert!(alpha > 0.0, "smoothing constant must be positive");
    let artists = train_split.artists();
    if artists.len() < 2 {
        return Err(ClassifyError::SingleClass);
    }

    let mut vocab_set: BTreeMap<String, ()> = BTreeMap::new();
    let mut per_entry_features: Vec<(usize, Vec<String>)> = Vec::new();
    for entry in &train_split.entries {
        let class = artists.binary_search(&entry.artist).unwrap();
        let features = feature_words(&entry.stream);
        for word in &features {
            vocab_set.entry(word.clone()).or_insert(());
        }
        per_entry_features.push((class, features));
    }
    let vocab: Vec<String> = vocab_set.into_keys().collect();

    let mut class_counts = vec![0usize; artists.len()];
    let mut token_counts = vec![vec![0u64; vocab.len()]; artists.len()];
    for (class, features) in &per_entry_features {
        class_counts[*class] += 1;
        for word in features {
            let index = vocab.binary_search(word).unwrap();
            token_counts[*class][index] += 1;
        }
    }

    let total_songs = train_split.len() as f64;
    let log_priors = class_counts
        .iter()
        .map(|&count| (count as f64 / total_songs).ln())
        .collect();

    let log_likelihood = token_counts
        .iter()
        .map(|counts| {
            let total: u64 = counts.iter().sum();
            let denominator = total as f64 + alpha * vocab.len() as f64;
            counts
                .iter()
                .map(|&count| ((count as f64 + alpha) / denominator).ln())
                .collect()
        })
        .collect();

    Ok(NbModel {
        alpha,
        artists,
        log_priors,
        vocab,
        log_likelihood,
    })
}

impl NbModel {
    /// Softmax-style posterior over artists for one stream. Tokens outside
    /// the training vocabulary are skipped.
    pub fn scores(&self, stream: &TokenStream) -> Result<Vec<f64>, ClassifyError> {
        let features = feature_words(stream);
        if features.is_empty() {
            return Err(ClassifyError::EmptyAfterFiltering);
        }
        let mut log_posterior = self.log_priors.clone();
        for word in &features {
            if let Ok(index) = self.vocab.binary_search(word) {
                for (class, posterior) in log_posterior.iter_mut().enumerate() {
                    *posterior += self.log_likelihood[class][index];
                }
            }
        }
        let max = log_posterior
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut scores: Vec<f64> = log_posterior.iter().map(|lp| (lp - max).exp()).collect();
        let total: f64 = scores.iter().sum();
        for score in scores.iter_mut() {
            *score /= total;
        }
        Ok(scores)
    }

    /// Predicted artist: argmax of scores, ties to the lexicographically
    /// first artist.
    pub fn predict(&self, stream: &TokenStream) -> Result<&str, ClassifyError> {
        let scores = self.scores(stream)?;
        let best = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        Ok(&self.artists[best])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Accuracy and confusion matrix of a model on a labeled test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub n_total: usize,
    pub n_correct: usize,
    /// confusion[true_artist][predicted_artist] = count
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    /// Streams that produced no features and were skipped.
    pub n_skipped: usize,
}

pub fn evaluate(model: &NbModel, test_split: &CorpusIndex) -> Evaluation {
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut n_total = 0;
    let mut n_correct = 0;
    let mut n_skipped = 0;
    for entry in &test_split.entries {
        let predicted = match model.predict(&entry.stream) {
            Ok(predicted) => predicted.to_string(),
            Err(_) => {
                n_skipped += 1;
                continue;
            }
        };
        n_total += 1;
        if predicted == entry.artist {
            n_correct += 1;
        }
        *confusion
            .entry(entry.artist.clone())
            .or_default()
            .entry(predicted)
            .or_insert(0) += 1;
    }
    Evaluation {
        accuracy: if n_total > 0 {
            n_correct as f64 / n_total as f64
        } else {
            0.0
        },
        n_total,
        n_correct,
        confusion,
        n_skipped,
    }
}

/// Mean classification scores per (conditioned artist, configuration),
/// in the canonical 16-row table shape: artists sorted, configurations in
/// M-FP, M-EP, S-FP, S-EP order. Each row sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    /// Column labels (the classifier's artists, sorted).
    pub artists: Vec<String>,
    pub rows: Vec<ScoreRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub conditioned_artist: String,
    pub config: ConfigId,
    /// Mean scores aligned with the matrix's `artists`.
    pub scores: Vec<f64>,
}

impl ScoreRow {
    /// Column index of the row's maximum score.
    pub fn best_column(&self) -> usize {
        self.scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap()
            .0
    }
}

impl ScoreMatrix {
    /// Number of rows whose maximum lands on the conditioned artist's own
    /// column.
    pub fn diagonal_row_maxima(&self) -> usize {
        self.rows
            .iter()
            .filter(|row| {
                self.artists
                    .get(row.best_column())
                    .is_some_and(|artist| *artist == row.conditioned_artist)
            })
            .count()
    }
}

/// Score every generated corpus and average per (artist, configuration)
/// cell. Rows with no streams are an error; streams that lose all their
/// tokens to filtering are skipped within a cell.
pub fn score_table(
    model: &NbModel,
    generated: &BTreeMap<(String, ConfigId), Vec<TokenStream>>,
) -> Result<ScoreMatrix, ClassifyError> {
    let mut rows = Vec::new();
    let mut keys: Vec<&(String, ConfigId)> = generated.keys().collect();
    keys.sort_by_key(|(artist, config)| (artist.clone(), config.table_position()));

    for key in keys {
        let (artist, config) = key;
        let streams = &generated[key];
        if streams.is_empty() {
            return Err(ClassifyError::EmptyConfiguration(format!(
                "{artist}/{config}"
            )));
        }
        let mut mean = vec![0.0f64; model.artists.len()];
        let mut scored = 0usize;
        for stream in streams {
            if let Ok(scores) = model.scores(stream) {
                for (slot, score) in mean.iter_mut().zip(scores) {
                    *slot += score;
                }
                scored += 1;
            }
        }
        if scored == 0 {
            return Err(ClassifyError::EmptyConfiguration(format!(
                "{artist}/{config}: no scoreable streams"
            )));
        }
        for slot in mean.iter_mut() {
            *slot /= scored as f64;
        }
        rows.push(ScoreRow {
            conditioned_artist: artist.clone(),
            config: *config,
            scores: mean,
        });
    }

    Ok(ScoreMatrix {
        artists: model.artists.clone(),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Feature-vector scorer (report cross-check)
// ---------------------------------------------------------------------------

/// Gaussian scorer over a small musicology feature vector (mean note
/// duration, six per-note technique rates, pitch class entropy, scale
/// consistency). A cross-check for the token-level classifier; not used
/// for the score tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVectorScorer {
    pub artists: Vec<String>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

const FEATURE_DIMENSIONS: usize = 9;
const VARIANCE_FLOOR: f64 = 1e-6;

/// The 9-dimensional style feature vector of one stream, or None when the
/// stream has no decodable pitched guitar notes.
pub fn style_feature_vector(stream: &TokenStream) -> Option<[f64; FEATURE_DIMENSIONS]> {
    let timeline = decode_guitar_events(stream);
    if timeline.events.is_empty() {
        return None;
    }
    let duration_values: Vec<f64> = timeline
        .events
        .iter()
        .map(|e| e.duration_ticks as f64)
        .collect();
    let mean_duration = descriptive(&duration_values).ok()?.mean;

    let histogram = pitch_class_histogram(&timeline).ok()?;
    let entropy = pitch_class_entropy(&histogram).ok()?;
    let scale = scale_consistency(&histogram).ok()?;

    let techniques = technique_distribution(stream);
    let note_count = stream.body.iter().filter(|t| t.is_note()).count() as f64;

    let mut vector = [0.0f64; FEATURE_DIMENSIONS];
    vector[0] = mean_duration;
    for (slot, technique) in CANONICAL_TECHNIQUES.iter().enumerate() {
        let count = techniques.count(technique).unwrap_or(0.0);
        vector[1 + slot] = if note_count > 0.0 {
            count / note_count
        } else {
            0.0
        };
    }
    vector[7] = entropy;
    vector[8] = scale.consistency;
    Some(vector)
}

impl FeatureVectorScorer {
    pub fn train(corpus: &CorpusIndex) -> Result<Self, ClassifyError> {
        let artists = corpus.artists();
        if artists.len() < 2 {
            return Err(ClassifyError::SingleClass);
        }
        let mut per_class: Vec<Vec<[f64; FEATURE_DIMENSIONS]>> = vec![Vec::new(); artists.len()];
        for entry in &corpus.entries {
            if let Some(vector) = style_feature_vector(&entry.stream) {
                let class = artists.binary_search(&entry.artist).unwrap();
                per_class[class].push(vector);
            }
        }
        let mut means = Vec::new();
        let mut variances = Vec::new();
        for vectors in &per_class {
            let n = vectors.len().max(1) as f64;
            let mut mean = vec![0.0; FEATURE_DIMENSIONS];
            for vector in vectors {
                for (slot, value) in mean.iter_mut().zip(vector) {
                    *slot += value / n;
                }
            }
            let mut variance = vec![0.0; FEATURE_DIMENSIONS];
            for vector in vectors {
                for ((slot, value), mu) in variance.iter_mut().zip(vector).zip(&mean) {
                    *slot += (value - mu) * (value - mu) / n;
                }
            }
            for slot in variance.iter_mut() {
                *slot = slot.max(VARIANCE_FLOOR);
            }
            means.push(mean);
            variances.push(variance);
        }
        Ok(FeatureVectorScorer {
            artists,
            means,
            variances,
        })
    }

    /// Softmax over per-class Gaussian log densities.
    pub fn scores(&self, stream: &TokenStream) -> Result<Vec<f64>, ClassifyError> {
        let vector = style_feature_vector(stream).ok_or(ClassifyError::EmptyAfterFiltering)?;
        let mut log_densities = Vec::with_capacity(self.artists.len());
        for (means, variances) in self.means.iter().zip(&self.variances) {
            let mut log_density = 0.0;
            for ((value, mean), variance) in vector.iter().zip(means).zip(variances) {
                let deviation = value - mean;
                log_density -= 0.5 * (deviation * deviation / variance + variance.ln());
            }
            log_densities.push(log_density);
        }
        let max = log_densities
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut scores: Vec<f64> = log_densities.iter().map(|ld| (ld - max).exp()).collect();
        let total: f64 = scores.iter().sum();
        for score in scores.iter_mut() {
            *score /= total;
        }
        Ok(scores)
    }
}
