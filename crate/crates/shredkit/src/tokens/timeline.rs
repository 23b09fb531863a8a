//! Decoding token streams into timed note events with resolved MIDI pitches.
//!
//! The clock unit is the tick, 960 per quarter note. `wait` tokens advance
//! the clock; every note between two waits shares the current clock value
//! as its onset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stream::TokenStream;
use super::token::Token;
use crate::error::TimelineError;

/// Open-string MIDI pitches keyed by string number, plus a global downtune.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuning {
    pub open_string_midi: BTreeMap<u8, u8>,
    pub downtune_offset: i32,
}

impl Tuning {
    /// Standard guitar, strings numbered high to low: s1=E4 .. s6=E2, with
    /// s7=B1 for seven-string instruments.
    pub fn standard_guitar(downtune_offset: i32) -> Self {
        let open_string_midi = BTreeMap::from([
            (1, 64),
            (2, 59),
            (3, 55),
            (4, 50),
            (5, 45),
            (6, 40),
            (7, 35),
        ]);
        Tuning {
            open_string_midi,
            downtune_offset,
        }
    }

    /// Standard four-string bass, high to low: s1=G2 .. s4=E1.
    pub fn standard_bass(downtune_offset: i32) -> Self {
        let open_string_midi = BTreeMap::from([(1, 43), (2, 38), (3, 33), (4, 28)]);
        Tuning {
            open_string_midi,
            downtune_offset,
        }
    }

    /// Pick the standard tuning for an instrument token name.
    pub fn for_instrument(instrument: &str, downtune_offset: i32) -> Self {
        if instrument.starts_with("bass") {
            Tuning::standard_bass(downtune_offset)
        } else {
            Tuning::standard_guitar(downtune_offset)
        }
    }
}

/// Resolve a note token to a MIDI pitch: open string + downtune + fret.
pub fn pitch_of(string_num: u8, fret: u8, tuning: &Tuning) -> Result<u8, TimelineError> {
    let open = *tuning
        .open_string_midi
        .get(&string_num)
        .ok_or(TimelineError::UnknownString(string_num))? as i64;
    let midi = open + tuning.downtune_offset as i64 + fret as i64;
    if (0..=127).contains(&midi) {
        Ok(midi as u8)
    } else {
        Err(TimelineError::PitchOutOfRange {
            string_num,
            fret,
            downtune: tuning.downtune_offset,
            midi,
        })
    }
}

/// One decoded note: where it starts, how long until the same instrument's
/// next onset, and the effects attached to it. Drums events carry no pitch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub instrument: String,
    pub onset_tick: u64,
    pub midi_pitch: Option<u8>,
    pub duration_ticks: u64,
    pub effects: Vec<String>,
}

/// Decoded per-instrument timed events, sorted by (onset, instrument, pitch).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventTimeline {
    pub events: Vec<Event>,
    pub total_ticks: u64,
}

impl EventTimeline {
    /// Events carrying a MIDI pitch (drums excluded).
    pub fn pitched_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.midi_pitch.is_some())
    }
}

/// Replay a stream's clock and produce its event timeline.
///
/// Durations are inter-onset intervals per instrument; the last onset of an
/// instrument lasts until the stream's end. `nfx` effects attach to the
/// note token immediately before them, `bfx` effects to every note of the
/// beat they appear in. Notes whose pitch cannot be resolved (unknown
/// string, out-of-range downtune) are skipped.
pub fn decode_events(stream: &TokenStream, instrument_filter: Option<&str>) -> EventTimeline {
    let downtune = stream.header.downtune();
    let mut clock: u64 = 0;
    let mut events: Vec<Event> = Vec::new();
    // Indices into `events` for the beat currently being assembled, plus
    // the beat's pending bfx effect names.
    let mut beat_events: Vec<usize> = Vec::new();
    let mut beat_effects: Vec<String> = Vec::new();
    let mut tunings: BTreeMap<String, Tuning> = BTreeMap::new();

    let finalize_beat =
        |events: &mut Vec<Event>, beat_events: &mut Vec<usize>, beat_effects: &mut Vec<String>| {
            for &index in beat_events.iter() {
                events[index].effects.extend(beat_effects.iter().cloned());
            }
            beat_events.clear();
            beat_effects.clear();
        };

    for token in &stream.body {
        match token {
            Token::Note {
                instrument,
                string_num,
                fret,
            } => {
                let tuning = tunings
                    .entry(instrument.clone())
                    .or_insert_with(|| Tuning::for_instrument(instrument, downtune));
                if let Ok(midi) = pitch_of(*string_num, *fret, tuning) {
                    events.push(Event {
                        instrument: instrument.clone(),
                        onset_tick: clock,
                        midi_pitch: Some(midi),
                        duration_ticks: 0,
                        effects: Vec::new(),
                    });
                    beat_events.push(events.len() - 1);
                }
            }
            Token::Drums { .. } => {
                events.push(Event {
                    instrument: "drums".to_string(),
                    onset_tick: clock,
                    midi_pitch: None,
                    duration_ticks: 0,
                    effects: Vec::new(),
                });
                beat_events.push(events.len() - 1);
            }
            Token::Wait(ticks) => {
                finalize_beat(&mut events, &mut beat_events, &mut beat_effects);
                clock += ticks;
            }
            Token::NewMeasure => {
                finalize_beat(&mut events, &mut beat_events, &mut beat_effects);
            }
            Token::NoteEffect { effect, .. } => {
                if let Some(&index) = beat_events.last() {
                    events[index].effects.push(effect.clone());
                }
            }
            Token::BeatEffect { effect, .. } => beat_effects.push(effect.clone()),
            _ => {}
        }
    }
    finalize_beat(&mut events, &mut beat_events, &mut beat_effects);
    let total_ticks = clock;

    // Inter-onset durations, computed against each instrument's own onsets.
    let mut by_instrument: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (index, event) in events.iter().enumerate() {
        by_instrument
            .entry(event.instrument.as_str())
            .or_default()
            .push(index);
    }
    let mut durations = vec![0u64; events.len()];
    for indices in by_instrument.values() {
        // Events were pushed in clock order, so onsets are non-decreasing.
        for (slot, &index) in indices.iter().enumerate() {
            let onset = events[index].onset_tick;
            let next_onset = indices[slot..]
                .iter()
                .map(|&i| events[i].onset_tick)
                .find(|&o| o > onset);
            durations[index] = next_onset.unwrap_or(total_ticks).saturating_sub(onset);
        }
    }
    for (event, duration) in events.iter_mut().zip(durations) {
        event.duration_ticks = duration;
    }

    if let Some(filter) = instrument_filter {
        events.retain(|e| e.instrument == filter);
    }
    events.sort_by(|a, b| {
        (a.onset_tick, &a.instrument, a.midi_pitch).cmp(&(
            b.onset_tick,
            &b.instrument,
            b.midi_pitch,
        ))
    });

    EventTimeline {
        events,
        total_ticks,
    }
}

/// Decode only the guitar parts: every pitched instrument except bass, with
/// drums dropped. The timeline the style features are computed on.
pub fn decode_guitar_events(stream: &TokenStream) -> EventTimeline {
    let mut timeline = decode_events(stream, None);
    timeline
        .events
        .retain(|e| e.midi_pitch.is_some() && !e.instrument.starts_with("bass"));
    timeline
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokens::parse_stream;

    fn decode(text: &str) -> EventTimeline {
        decode_events(&parse_stream(text).stream, None)
    }

    #[test]
    fn pitches_stay_in_midi_range_for_supported_inputs() {
        // any fret up to 30 and downtune down to -12 resolves
        for downtune in -12..=0 {
            for tuning in [
                Tuning::standard_guitar(downtune),
                Tuning::standard_bass(downtune),
            ] {
                for &string_num in tuning.open_string_midi.keys() {
                    for fret in 0..=30 {
                        let midi = pitch_of(string_num, fret, &tuning).unwrap();
                        assert!(midi <= 127);
                    }
                }
            }
        }
    }

    #[test]
    fn pitch_of_matches_tuning_table() {
        let standard = Tuning::standard_guitar(0);
        assert_eq!(pitch_of(3, 5, &standard), Ok(60)); // C4
        assert_eq!(pitch_of(1, 0, &standard), Ok(64)); // open E4

        let half_step_down = Tuning::standard_guitar(-1);
        assert_eq!(pitch_of(6, 0, &half_step_down), Ok(39)); // Eb2

        assert_eq!(
            pitch_of(9, 0, &standard),
            Err(TimelineError::UnknownString(9))
        );
    }

    #[test]
    fn clock_advances_and_durations_are_inter_onset() {
        let timeline =
            decode("start distorted0:note:s3:f5 wait:240 distorted0:note:s3:f7 wait:240 end");
        assert_eq!(timeline.total_ticks, 480);
        assert_eq!(timeline.events.len(), 2);
        assert_eq!(timeline.events[0].onset_tick, 0);
        assert_eq!(timeline.events[0].duration_ticks, 240);
        assert_eq!(timeline.events[1].onset_tick, 240);
        assert_eq!(timeline.events[1].duration_ticks, 240);
    }

    #[test]
    fn nfx_attaches_to_preceding_note() {
        let timeline = decode("start distorted0:note:s3:f5 nfx:bend:pos0 wait:480 end");
        assert_eq!(timeline.events[0].effects, vec!["bend".to_string()]);
    }

    #[test]
    fn bfx_attaches_to_every_note_of_the_beat() {
        let timeline =
            decode("start distorted0:note:s3:f5 distorted0:note:s4:f5 bfx:palm_mute wait:480 end");
        assert_eq!(timeline.events.len(), 2);
        for event in &timeline.events {
            assert_eq!(event.effects, vec!["palm_mute".to_string()]);
        }
    }

    #[test]
    fn durations_are_per_instrument() {
        let timeline = decode(
            "start distorted0:note:s3:f5 bass:note:s1:f0 wait:240 \
             distorted0:note:s3:f7 wait:240 bass:note:s1:f2 wait:480 end",
        );
        let guitar: Vec<_> = timeline
            .events
            .iter()
            .filter(|e| e.instrument == "distorted0")
            .collect();
        let bass: Vec<_> = timeline
            .events
            .iter()
            .filter(|e| e.instrument == "bass")
            .collect();
        // guitar onsets 0 and 240: durations 240 and (960-240)
        assert_eq!(guitar[0].duration_ticks, 240);
        assert_eq!(guitar[1].duration_ticks, 720);
        // bass onsets 0 and 480: durations 480 and (960-480)
        assert_eq!(bass[0].duration_ticks, 480);
        assert_eq!(bass[1].duration_ticks, 480);
    }

    #[test]
    fn filter_keeps_one_instrument_and_total_ticks() {
        let timeline = decode_events(
            &parse_stream(
                "start distorted0:note:s3:f5 bass:note:s1:f0 wait:240 \
                 distorted0:note:s3:f7 wait:240 end",
            )
            .stream,
            Some("distorted0"),
        );
        assert!(timeline.events.iter().all(|e| e.instrument == "distorted0"));
        assert_eq!(timeline.events.len(), 2);
        assert_eq!(timeline.total_ticks, 480);
    }

    #[test]
    fn drums_carry_no_pitch() {
        let timeline = decode("start drums:note:36 wait:480 end");
        assert_eq!(timeline.events.len(), 1);
        assert_eq!(timeline.events[0].midi_pitch, None);
        assert_eq!(timeline.pitched_events().count(), 0);
    }

    #[test]
    fn unresolvable_notes_are_skipped() {
        let parsed = parse_stream("downtune:-60 start bass:note:s4:f0 wait:240 end");
        let timeline = decode_events(&parsed.stream, None);
        assert!(timeline.events.is_empty());
        assert_eq!(timeline.total_ticks, 240);
    }

    #[test]
    fn onsets_are_sorted_and_total_is_wait_sum() {
        let timeline =
            decode("start clean0:note:s1:f0 wait:100 wait:50 clean0:note:s2:f1 wait:200 end");
        assert_eq!(timeline.total_ticks, 350);
        let onsets: Vec<_> = timeline.events.iter().map(|e| e.onset_tick).collect();
        assert_eq!(onsets, vec![0, 150]);
    }
}
