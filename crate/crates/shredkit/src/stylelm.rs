//! Artist-conditioned autoregressive token language model.
//!
//! A per-artist interpolated n-gram with stupid-backoff blending and add-k
//! smoothing at the unigram floor. The artist control token is prepended to
//! every training sequence and additionally selects a per-artist count
//! table, so conditioning survives short context windows. Sampling is
//! temperature-scaled, optionally top-k truncated, and grammar-masked so
//! generated streams stay syntactically valid.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{inject_artist_token, CorpusIndex};
use crate::error::StyleLmError;
use crate::tokens::{parse_token, Token, TokenStream};

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_LAMBDA: f64 = 0.7;
pub const DEFAULT_ADD_K: f64 = 0.01;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;
/// Score multiplier applied when a token is unseen at a context level and
/// the estimate falls back to the next shorter context.
pub const BACKOFF_MULTIPLIER: f64 = 0.4;
/// Pseudo-artist selecting the unconditioned global component.
pub const GLOBAL_ARTIST: &str = "global";

const END_ID: u32 = 1;
const UNK_ID: u32 = 2;
const UNK_WORD: &str = "<unk>";

// ---------------------------------------------------------------------------
// Vocab
// ---------------------------------------------------------------------------

/// Bijection between token words and dense ids. Ids 0..=2 are reserved for
/// `start`, `end` and the out-of-vocabulary placeholder; the rest follow in
/// lexicographic order so rebuilding from the same corpus is stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let mut distinct: Vec<&str> = words
            .into_iter()
            .filter(|w| !matches!(*w, "start" | "end" | UNK_WORD))
            .collect();
        distinct.sort_unstable();
        distinct.dedup();

        let mut all: Vec<String> = Vec::with_capacity(distinct.len() + 3);
        all.push("start".to_string());
        all.push("end".to_string());
        all.push(UNK_WORD.to_string());
        all.extend(distinct.into_iter().map(str::to_string));

        let index = all
            .iter()
            .enumerate()
            .map(|(id, word)| (word.clone(), id as u32))
            .collect();
        Vocab { words: all, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Id of the word, or the reserved unknown id for out-of-vocabulary
    /// words.
    pub fn id_or_unknown(&self, word: &str) -> u32 {
        self.id(word).unwrap_or(UNK_ID)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

// ---------------------------------------------------------------------------
// Count tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    successors: BTreeMap<u32, u64>,
}

/// Counts for one conditioning source (global or a single artist), keyed by
/// context id sequences of length 0..order-1.
#[derive(Debug, Clone, Default, PartialEq)]
struct Component {
    contexts: BTreeMap<Vec<u32>, ContextCounts>,
}

impl Component {
    fn record(&mut self, context: &[u32], token: u32) {
        let counts = self.contexts.entry(context.to_vec()).or_default();
        counts.total += 1;
        *counts.successors.entry(token).or_insert(0) += 1;
    }
}

// ---------------------------------------------------------------------------
// Modes and configurations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Multi,
    Solo,
}

impl Mode {
    /// Generation token budget for this mode.
    pub fn max_tokens(self) -> usize {
        match self {
            Mode::Multi => 2048,
            Mode::Solo => 256,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Mode::Multi => "M",
            Mode::Solo => "S",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Multi => "multi",
            Mode::Solo => "solo",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "multi" => Ok(Mode::Multi),
            "solo" => Ok(Mode::Solo),
            other => Err(format!("unknown mode {other:?}; expected multi or solo")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Full,
    Empty,
}

impl PromptKind {
    pub fn letters(self) -> &'static str {
        match self {
            PromptKind::Full => "FP",
            PromptKind::Empty => "EP",
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptKind::Full => "full",
            PromptKind::Empty => "empty",
        })
    }
}

impl FromStr for PromptKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(PromptKind::Full),
            "empty" => Ok(PromptKind::Empty),
            other => Err(format!(
                "unknown prompt kind {other:?}; expected full or empty"
            )),
        }
    }
}

/// One of the four generation configurations: mode crossed with prompt
/// kind, written `M-FP`, `M-EP`, `S-FP`, `S-EP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigId {
    pub mode: Mode,
    pub prompt: PromptKind,
}

impl ConfigId {
    pub const ALL: [ConfigId; 4] = [
        ConfigId {
            mode: Mode::Multi,
            prompt: PromptKind::Full,
        },
        ConfigId {
            mode: Mode::Multi,
            prompt: PromptKind::Empty,
        },
        ConfigId {
            mode: Mode::Solo,
            prompt: PromptKind::Full,
        },
        ConfigId {
            mode: Mode::Solo,
            prompt: PromptKind::Empty,
        },
    ];

    /// Row position in the canonical table ordering M-FP, M-EP, S-FP, S-EP.
    pub fn table_position(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap()
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.mode.letter(), self.prompt.letters())
    }
}

impl FromStr for ConfigId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        for config in Self::ALL {
            if config.to_string() == s {
                return Ok(config);
            }
        }
        Err(format!(
            "unknown configuration {s:?}; expected one of M-FP, M-EP, S-FP, S-EP"
        ))
    }
}

/// Sampling parameters plus token budget for one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub mode: Mode,
    pub prompt_kind: PromptKind,
    pub max_tokens: usize,
    pub temperature: f64,
    pub top_k: Option<usize>,
    pub seed: u64,
}

impl GenerationConfig {
    pub fn new(mode: Mode, prompt_kind: PromptKind) -> Self {
        GenerationConfig {
            mode,
            prompt_kind,
            max_tokens: mode.max_tokens(),
            temperature: DEFAULT_TEMPERATURE,
            top_k: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn config_id(&self) -> ConfigId {
        ConfigId {
            mode: self.mode,
            prompt: self.prompt_kind,
        }
    }
}

// ---------------------------------------------------------------------------
// Grammar mask
// ---------------------------------------------------------------------------

/// How a vocabulary word may be sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MaskClass {
    /// Never sampled: `start`, header tokens, `wait:0`, the unknown
    /// placeholder.
    Never,
    /// Only sampled once the current beat has a note: nfx/bfx words.
    AfterNote,
    /// No restriction.
    Free,
}

fn mask_class(word: &str) -> MaskClass {
    if word == "start"
        || word == UNK_WORD
        || word == "wait:0"
        || word.starts_with("artist:")
        || word.starts_with("downtune:")
        || word.starts_with("tempo:")
    {
        MaskClass::Never
    } else if word.starts_with("nfx:") || word.starts_with("bfx:") {
        MaskClass::AfterNote
    } else {
        MaskClass::Free
    }
}

/// Tracks whether the beat being generated already contains a note, which
/// gates effect tokens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GrammarState {
    beat_has_note: bool,
}

impl GrammarState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replay a prompt body to obtain the state at its end.
    pub fn replay(body: &[Token]) -> Self {
        let mut state = Self::new();
        for token in body {
            state.update(token);
        }
        state
    }

    pub fn update(&mut self, token: &Token) {
        match token {
            Token::Note { .. } | Token::Drums { .. } => self.beat_has_note = true,
            Token::Wait(_) | Token::NewMeasure => self.beat_has_note = false,
            _ => {}
        }
    }

    pub fn beat_has_note(&self) -> bool {
        self.beat_has_note
    }
}

// ---------------------------------------------------------------------------
// The model
// ---------------------------------------------------------------------------

/// Interpolated per-artist/global n-gram over token words.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleLm {
    order: usize,
    lambda: f64,
    add_k: f64,
    vocab: Vocab,
    global: Component,
    artists: BTreeMap<String, Component>,
    mask_classes: Vec<MaskClass>,
}

impl StyleLm {
    /// Train from a labeled corpus. Every stream gets its artist control
    /// token injected before serialization, and counts are accumulated for
    /// all context lengths below `order`, both globally and per artist.
    pub fn train(
        corpus: &CorpusIndex,
        order: usize,
        lambda: f64,
        add_k: f64,
    ) -> Result<Self, StyleLmError> {
        if corpus.is_empty() {
            return Err(StyleLmError::EmptyCorpus);
        }
        let mut sequences = Vec::with_capacity(corpus.len());
        for entry in &corpus.entries {
            let injected = inject_artist_token(&entry.stream, &entry.artist)
                .map_err(|e| StyleLmError::Serde(e.to_string()))?;
            sequences.push((entry.artist.clone(), injected.words()));
        }
        Self::train_from_sequences(sequences, order, lambda, add_k)
    }

    /// Train from raw (artist, word sequence) pairs; the core of
    /// [`StyleLm::train`], also convenient for closed-form tests.
    pub fn train_from_sequences(
        sequences: Vec<(String, Vec<String>)>,
        order: usize,
        lambda: f64,
        add_k: f64,
    ) -> Result<Self, StyleLmError> {
        if sequences.is_empty() {
            return Err(StyleLmError::EmptyCorpus);
        }
        assert!(order >= 1, "n-gram order must be at least 1");
        assert!(
            (0.0..=1.0).contains(&lambda),
            "interpolation weight must be in [0, 1]"
        );
        assert!(add_k > 0.0, "add-k smoothing constant must be positive");

        let vocab = Vocab::from_words(
            sequences
                .iter()
                .flat_map(|(_, words)| words.iter().map(String::as_str)),
        );

        let mut global = Component::default();
        let mut artists: BTreeMap<String, Component> = BTreeMap::new();
        for (artist, words) in &sequences {
            let ids: Vec<u32> = words.iter().map(|w| vocab.id_or_unknown(w)).collect();
            let artist_component = artists.entry(artist.clone()).or_default();
            for position in 0..ids.len() {
                let token = ids[position];
                for context_len in 0..order.min(position + 1) {
                    let context = &ids[position - context_len..position];
                    global.record(context, token);
                    artist_component.record(context, token);
                }
            }
        }

        let mask_classes = vocab.words().iter().map(|w| mask_class(w)).collect();
        Ok(StyleLm {
            order,
            lambda,
            add_k,
            vocab,
            global,
            artists,
            mask_classes,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn add_k(&self) -> f64 {
        self.add_k
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Artists the model was conditioned on, sorted.
    pub fn artists(&self) -> Vec<&str> {
        self.artists.keys().map(String::as_str).collect()
    }

    fn component(&self, artist: &str) -> Result<&Component, StyleLmError> {
        if artist == GLOBAL_ARTIST {
            return Ok(&self.global);
        }
        self.artists
            .get(artist)
            .ok_or_else(|| StyleLmError::UnknownArtist(artist.to_string()))
    }

    /// Normalized next-token distribution of one component via stupid
    /// backoff: at each context level, seen successors take their maximum-
    /// likelihood mass and everything else inherits the shorter-context
    /// estimate scaled by the backoff multiplier; the floor is the add-k
    /// smoothed unigram.
    fn component_distribution(&self, component: &Component, context: &[u32]) -> Vec<f64> {
        let vocab_size = self.vocab.len();
        let empty: &[u32] = &[];
        let (total0, unigrams) = match component.contexts.get(empty) {
            Some(counts) => (counts.total as f64, Some(&counts.successors)),
            None => (0.0, None),
        };
        let denominator = total0 + self.add_k * vocab_size as f64;
        let mut scores: Vec<f64> = vec![self.add_k / denominator; vocab_size];
        if let Some(unigrams) = unigrams {
            for (&token, &count) in unigrams {
                scores[token as usize] = (count as f64 + self.add_k) / denominator;
            }
        }

        let max_level = self.order.saturating_sub(1).min(context.len());
        for level in 1..=max_level {
            let level_context = &context[context.len() - level..];
            if let Some(counts) = component.contexts.get(level_context) {
                if counts.total > 0 {
                    for score in scores.iter_mut() {
                        *score *= BACKOFF_MULTIPLIER;
                    }
                    for (&token, &count) in &counts.successors {
                        scores[token as usize] = count as f64 / counts.total as f64;
                    }
                }
            }
        }

        let normalizer: f64 = scores.iter().sum();
        for score in scores.iter_mut() {
            *score /= normalizer;
        }
        scores
    }

    fn distribution_with_lambda(
        &self,
        context: &[u32],
        artist: &str,
        lambda: f64,
    ) -> Result<Vec<f64>, StyleLmError> {
        let global = self.component_distribution(&self.global, context);
        if artist == GLOBAL_ARTIST || lambda == 0.0 {
            return Ok(global);
        }
        let artist_component = self.component(artist)?;
        let conditioned = self.component_distribution(artist_component, context);
        Ok(conditioned
            .iter()
            .zip(global)
            .map(|(a, g)| lambda * a + (1.0 - lambda) * g)
            .collect())
    }

    /// Full next-token distribution P(token | context, artist), summing to
    /// one over the vocabulary.
    pub fn distribution(&self, context: &[u32], artist: &str) -> Result<Vec<f64>, StyleLmError> {
        self.distribution_with_lambda(context, artist, self.lambda)
    }

    /// P(token | context, artist): the interpolation
    /// λ·P_artist + (1−λ)·P_global with backoff inside each component.
    pub fn prob(&self, context: &[&str], token: &str, artist: &str) -> Result<f64, StyleLmError> {
        let context_ids: Vec<u32> = context
            .iter()
            .map(|w| self.vocab.id_or_unknown(w))
            .collect();
        let distribution = self.distribution(&context_ids, artist)?;
        Ok(distribution[self.vocab.id_or_unknown(token) as usize])
    }

    /// Mean per-token log2 likelihood of a stream's serialized words under
    /// one artist with an explicit interpolation weight (λ=1 gives the pure
    /// per-artist component).
    pub fn mean_log2_likelihood(
        &self,
        stream: &TokenStream,
        artist: &str,
        lambda: f64,
    ) -> Result<f64, StyleLmError> {
        let words = stream.words();
        let ids: Vec<u32> = words.iter().map(|w| self.vocab.id_or_unknown(w)).collect();
        let mut total = 0.0;
        for position in 0..ids.len() {
            let context_start = position.saturating_sub(self.order - 1);
            let distribution =
                self.distribution_with_lambda(&ids[context_start..position], artist, lambda)?;
            total += distribution[ids[position] as usize].log2();
        }
        Ok(total / ids.len() as f64)
    }

    /// Sample the next token word: temperature-scale the distribution,
    /// optionally keep the top-k, zero grammar-masked words (falling back
    /// to wait tokens if nothing survives), renormalize, draw.
    pub fn sample_next(
        &self,
        context: &[String],
        artist: &str,
        temperature: f64,
        top_k: Option<usize>,
        grammar: &GrammarState,
        rng: &mut impl Rng,
    ) -> Result<String, StyleLmError> {
        let context_ids: Vec<u32> = context
            .iter()
            .map(|w| self.vocab.id_or_unknown(w))
            .collect();
        let id = self.sample_next_id(&context_ids, artist, temperature, top_k, grammar, rng)?;
        Ok(self.vocab.word(id).to_string())
    }

    fn sample_next_id(
        &self,
        context: &[u32],
        artist: &str,
        temperature: f64,
        top_k: Option<usize>,
        grammar: &GrammarState,
        rng: &mut impl Rng,
    ) -> Result<u32, StyleLmError> {
        assert!(temperature > 0.0, "temperature must be positive");
        let window_start = context.len() - self.order.saturating_sub(1).min(context.len());
        let distribution = self.distribution(&context[window_start..], artist)?;

        // Temperature in log space to survive extreme values.
        let mut weights: Vec<f64> = distribution.iter().map(|p| p.ln() / temperature).collect();
        let max_weight = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for weight in weights.iter_mut() {
            *weight = (*weight - max_weight).exp();
        }

        if let Some(k) = top_k {
            let k = k.max(1);
            if k < weights.len() {
                let mut order: Vec<usize> = (0..weights.len()).collect();
                order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
                for &index in &order[k..] {
                    weights[index] = 0.0;
                }
            }
        }

        let masked: Vec<f64> = weights
            .iter()
            .enumerate()
            .map(|(index, &weight)| match self.mask_classes[index] {
                MaskClass::Never => 0.0,
                MaskClass::AfterNote if !grammar.beat_has_note() => 0.0,
                _ => weight,
            })
            .collect();

        let mut final_weights = masked;
        if final_weights.iter().sum::<f64>() <= 0.0 {
            // Mask zeroed everything (e.g. top-k kept only effect words at
            // a beat start): fall back to wait tokens.
            final_weights = self
                .vocab
                .words()
                .iter()
                .enumerate()
                .map(|(index, word)| {
                    if word.starts_with("wait:") && word != "wait:0" {
                        weights[index].max(f64::MIN_POSITIVE)
                    } else {
                        0.0
                    }
                })
                .collect();
            if final_weights.iter().sum::<f64>() <= 0.0 {
                return Ok(END_ID);
            }
        }

        let total: f64 = final_weights.iter().sum();
        let mut draw = rng.gen::<f64>() * total;
        for (index, weight) in final_weights.iter().enumerate() {
            draw -= weight;
            if draw <= 0.0 && *weight > 0.0 {
                return Ok(index as u32);
            }
        }
        // Floating-point tail: return the last positive-weight token.
        Ok(final_weights
            .iter()
            .rposition(|w| *w > 0.0)
            .map(|i| i as u32)
            .unwrap_or(END_ID))
    }

    /// Autoregressively extend a prompt until `end` is sampled or the token
    /// budget is exhausted. Output is deterministic in (model, prompt,
    /// config).
    pub fn generate(
        &self,
        prompt: &TokenStream,
        artist: &str,
        config: &GenerationConfig,
    ) -> Result<TokenStream, StyleLmError> {
        if artist != GLOBAL_ARTIST {
            self.component(artist)?;
        }
        let prompt =
            inject_artist_token(prompt, artist).map_err(|e| StyleLmError::Serde(e.to_string()))?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut grammar = GrammarState::replay(&prompt.body);

        // Context = header words + start + body words, without the
        // trailing end marker.
        let mut context: Vec<u32> = prompt
            .words()
            .iter()
            .map(|w| self.vocab.id_or_unknown(w))
            .collect();
        context.pop();

        let mut body = prompt.body.clone();
        for _ in 0..config.max_tokens {
            let id = self.sample_next_id(
                &context,
                artist,
                config.temperature,
                config.top_k,
                &grammar,
                &mut rng,
            )?;
            if id == END_ID {
                break;
            }
            let token = parse_token(self.vocab.word(id));
            grammar.update(&token);
            body.push(token);
            context.push(id);
        }

        Ok(TokenStream {
            header: prompt.header.clone(),
            body,
        })
    }
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

/// Build a generation prompt from a reference song.
///
/// `Full` keeps the song's first two measures; `Empty` keeps only the first
/// note (with its attached nfx) and the wait that follows it. Both carry
/// the conditioning artist token.
pub fn make_prompt(
    song: &TokenStream,
    kind: PromptKind,
    artist: &str,
) -> Result<TokenStream, StyleLmError> {
    let injected =
        inject_artist_token(song, artist).map_err(|e| StyleLmError::Serde(e.to_string()))?;
    let body = match kind {
        PromptKind::Full => {
            let measures = injected.measure_count();
            if measures < 2 {
                return Err(StyleLmError::TooShort(measures));
            }
            let boundaries: Vec<usize> = injected
                .body
                .iter()
                .enumerate()
                .filter(|(_, t)| matches!(t, Token::NewMeasure))
                .map(|(i, _)| i)
                .collect();
            match boundaries.get(1) {
                Some(&second) => injected.body[..second].to_vec(),
                None => injected.body.clone(), // exactly two measures
            }
        }
        PromptKind::Empty => {
            let note_index = injected
                .body
                .iter()
                .position(Token::is_note)
                .ok_or(StyleLmError::NoNotes)?;
            let mut body = vec![injected.body[note_index].clone()];
            let mut cursor = note_index + 1;
            while let Some(Token::NoteEffect { .. }) = injected.body.get(cursor) {
                body.push(injected.body[cursor].clone());
                cursor += 1;
            }
            if let Some(wait) = injected.body[cursor..]
                .iter()
                .find(|t| matches!(t, Token::Wait(_)))
            {
                body.push(wait.clone());
            }
            body
        }
    };
    Ok(TokenStream {
        header: injected.header,
        body,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SerializedContext {
    total: u64,
    successors: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct SerializedModel {
    version: u32,
    order: usize,
    lambda: f64,
    add_k: f64,
    vocab: Vec<String>,
    global: BTreeMap<String, SerializedContext>,
    artists: BTreeMap<String, BTreeMap<String, SerializedContext>>,
}

const MODEL_VERSION: u32 = 1;

fn pack_component(component: &Component) -> BTreeMap<String, SerializedContext> {
    component
        .contexts
        .iter()
        .map(|(context, counts)| {
            let key = context
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let successors = counts
                .successors
                .iter()
                .map(|(token, count)| (token.to_string(), *count))
                .collect();
            (
                key,
                SerializedContext {
                    total: counts.total,
                    successors,
                },
            )
        })
        .collect()
}

fn unpack_component(
    packed: BTreeMap<String, SerializedContext>,
) -> Result<Component, StyleLmError> {
    let mut component = Component::default();
    for (key, counts) in packed {
        let context: Vec<u32> = if key.is_empty() {
            Vec::new()
        } else {
            key.split(' ')
                .map(|part| {
                    part.parse()
                        .map_err(|_| StyleLmError::Serde(format!("bad context key {key:?}")))
                })
                .collect::<Result<_, _>>()?
        };
        let successors = counts
            .successors
            .into_iter()
            .map(|(token, count)| {
                token
                    .parse::<u32>()
                    .map(|id| (id, count))
                    .map_err(|_| StyleLmError::Serde(format!("bad token id {token:?}")))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        component.contexts.insert(
            context,
            ContextCounts {
                total: counts.total,
                successors,
            },
        );
    }
    Ok(component)
}

impl StyleLm {
    /// Versioned JSON dump of the count tables and vocabulary.
    pub fn to_json(&self) -> String {
        let serialized = SerializedModel {
            version: MODEL_VERSION,
            order: self.order,
            lambda: self.lambda,
            add_k: self.add_k,
            vocab: self.vocab.words().to_vec(),
            global: pack_component(&self.global),
            artists: self
                .artists
                .iter()
                .map(|(artist, component)| (artist.clone(), pack_component(component)))
                .collect(),
        };
        serde_json::to_string_pretty(&serialized).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, StyleLmError> {
        let serialized: SerializedModel =
            serde_json::from_str(text).map_err(|e| StyleLmError::Serde(e.to_string()))?;
        if serialized.version != MODEL_VERSION {
            return Err(StyleLmError::Serde(format!(
                "unsupported model version {}",
                serialized.version
            )));
        }
        let mut index = HashMap::new();
        for (id, word) in serialized.vocab.iter().enumerate() {
            index.insert(word.clone(), id as u32);
        }
        let vocab = Vocab {
            words: serialized.vocab,
            index,
        };
        let mask_classes = vocab.words().iter().map(|w| mask_class(w)).collect();
        Ok(StyleLm {
            order: serialized.order,
            lambda: serialized.lambda,
            add_k: serialized.add_k,
            global: unpack_component(serialized.global)?,
            artists: serialized
                .artists
                .into_iter()
                .map(|(artist, packed)| unpack_component(packed).map(|c| (artist, c)))
                .collect::<Result<_, _>>()?,
            vocab,
            mask_classes,
        })
    }
}
