//! `shredkit analyze`: per-artist feature distributions, per-song
//! tonality metrics, a corpus summary table, and the four rank-sum tests.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::json;

use shredkit::corpus::{ingest, CorpusIndex};
use shredkit::musicology::{
    note_duration_distribution, pitch_class_entropy, pitch_class_histogram, scale_consistency,
    technique_distribution, CorpusSummary, Distribution,
};
use shredkit::stats::kruskal_wallis;
use shredkit::tokens::decode_guitar_events;

use crate::report::{ensure_dir, fmt_float, write_csv, write_json, write_text, RunManifest};
use crate::CmdError;

/// Per-song scalar features feeding the rank-sum tests; one observation per
/// song, grouped by artist.
#[derive(Default)]
struct SongObservations {
    mean_duration: Vec<f64>,
    fx_per_note: Vec<f64>,
    pce: Vec<f64>,
    sc: Vec<f64>,
}

pub fn run(corpus_root: &Path, out_dir: &Path, emit_gnuplot: bool) -> Result<(), CmdError> {
    let corpus = ingest(corpus_root).map_err(|e| CmdError::Domain(e.to_string()))?;
    for (path, reason) in &corpus.skipped {
        log::warn!("skipped {}: {reason}", path.display());
    }
    ensure_dir(out_dir)?;

    write_distributions(&corpus, out_dir)?;
    write_song_metrics_and_tests(&corpus, corpus_root, out_dir)?;
    write_summary(&corpus, out_dir)?;
    if emit_gnuplot {
        write_gnuplot_scripts(out_dir)?;
    }

    RunManifest::new(
        "analyze",
        None,
        &[corpus_root],
        json!({
            "emit_gnuplot": emit_gnuplot,
            "technique_counting": "per_token",
            "duration_source": "guitar instruments, inter-onset ticks",
        }),
    )
    .write(out_dir)?;
    Ok(())
}

fn write_distributions(corpus: &CorpusIndex, out_dir: &Path) -> Result<(), CmdError> {
    let mut durations: BTreeMap<&str, Distribution> = BTreeMap::new();
    let mut techniques: BTreeMap<&str, Distribution> = BTreeMap::new();
    let mut pitch_classes: BTreeMap<&str, Distribution> = BTreeMap::new();

    for (artist, songs) in corpus.by_artist() {
        let duration_slot = durations.entry(artist).or_default();
        let technique_slot = techniques.entry(artist).or_default();
        let pitch_slot = pitch_classes.entry(artist).or_default();
        for song in songs {
            let timeline = decode_guitar_events(&song.stream);
            if let Ok(distribution) = note_duration_distribution(&timeline) {
                duration_slot.merge(&distribution);
            }
            technique_slot.merge(&technique_distribution(&song.stream));
            if let Ok(histogram) = pitch_class_histogram(&timeline) {
                pitch_slot.merge(&histogram);
            }
        }
    }

    let distribution_rows = |table: &BTreeMap<&str, Distribution>| -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (artist, distribution) in table {
            let total = distribution.total();
            for (label, count) in distribution.bins() {
                let probability = if total > 0.0 { count / total } else { 0.0 };
                rows.push(vec![
                    artist.to_string(),
                    label.clone(),
                    fmt_float(*count),
                    fmt_float(probability),
                ]);
            }
        }
        rows
    };

    write_csv(
        &out_dir.join("note_durations.csv"),
        &["artist", "duration_ticks", "count", "probability"],
        distribution_rows(&durations),
    )?;
    write_csv(
        &out_dir.join("techniques.csv"),
        &["artist", "technique", "count", "probability"],
        distribution_rows(&techniques),
    )?;
    write_csv(
        &out_dir.join("pitch_classes.csv"),
        &["artist", "pitch_class", "count", "probability"],
        distribution_rows(&pitch_classes),
    )
}

fn write_song_metrics_and_tests(
    corpus: &CorpusIndex,
    corpus_root: &Path,
    out_dir: &Path,
) -> Result<(), CmdError> {
    let mut rows = Vec::new();
    let mut observations: BTreeMap<&str, SongObservations> = BTreeMap::new();

    for entry in &corpus.entries {
        let timeline = decode_guitar_events(&entry.stream);
        if timeline.events.is_empty() {
            log::warn!(
                "{}: no guitar events, skipped in metrics",
                entry.path.display()
            );
            continue;
        }
        let slot = observations.entry(entry.artist.as_str()).or_default();

        let mean_duration = timeline
            .events
            .iter()
            .map(|e| e.duration_ticks as f64)
            .sum::<f64>()
            / timeline.events.len() as f64;
        slot.mean_duration.push(mean_duration);

        let fx_count = technique_distribution(&entry.stream).total();
        slot.fx_per_note
            .push(fx_count / timeline.events.len() as f64);

        let histogram = match pitch_class_histogram(&timeline) {
            Ok(histogram) => histogram,
            Err(_) => continue,
        };
        let entropy = pitch_class_entropy(&histogram).expect("non-empty histogram");
        let scale = scale_consistency(&histogram).expect("non-empty histogram");
        slot.pce.push(entropy);
        slot.sc.push(scale.consistency);

        // corpus-relative path, so reports compare across checkouts
        let song = entry
            .path
            .strip_prefix(corpus_root)
            .unwrap_or(&entry.path)
            .display()
            .to_string()
            .replace('\\', "/");
        rows.push(vec![
            entry.artist.clone(),
            song,
            fmt_float(entropy),
            fmt_float(scale.consistency),
            scale.root.to_string(),
            scale.mode.to_string(),
        ]);
    }

    write_csv(
        &out_dir.join("pce_sc.csv"),
        &["artist", "song", "pce_bits", "sc", "sc_root", "sc_mode"],
        rows,
    )?;

    // the four omnibus tests on per-song observations
    type Accessor = fn(&SongObservations) -> &Vec<f64>;
    let mut tests = serde_json::Map::new();
    let named: [(&str, Accessor); 4] = [
        ("note_duration", |o| &o.mean_duration),
        ("technique", |o| &o.fx_per_note),
        ("pce", |o| &o.pce),
        ("sc", |o| &o.sc),
    ];
    for (name, accessor) in named {
        let groups: Vec<Vec<f64>> = observations
            .values()
            .map(|o| accessor(o).clone())
            .filter(|g| !g.is_empty())
            .collect();
        let value = if groups.len() < 2 {
            json!({ "skipped": "need >=2 groups" })
        } else {
            match kruskal_wallis(&groups) {
                Ok(result) => serde_json::to_value(&result).unwrap(),
                Err(e) => json!({ "skipped": e.to_string() }),
            }
        };
        tests.insert(name.to_string(), value);
    }

    write_json(
        &out_dir.join("kruskal_wallis.json"),
        &json!({
            "unit": "song",
            "per_song_statistics": {
                "note_duration": "mean inter-onset duration in ticks",
                "technique": "canonical technique tokens per note",
                "pce": "pitch class entropy in bits",
                "sc": "scale consistency",
            },
            "tests": tests,
        }),
    )
}

fn write_summary(corpus: &CorpusIndex, out_dir: &Path) -> Result<(), CmdError> {
    let summary = CorpusSummary::from_pairs(
        corpus
            .entries
            .iter()
            .map(|entry| (entry.artist.as_str(), &entry.stream)),
    );
    let rows = summary
        .rows
        .iter()
        .map(|(artist, row)| {
            vec![
                artist.clone(),
                row.avg_tempo
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "undefined".to_string()),
                row.num_notes.to_string(),
                row.num_fx.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    write_csv(
        &out_dir.join("summary.csv"),
        &["artist", "avg_tempo_bpm", "num_notes", "num_fx"],
        rows,
    )
}

fn write_gnuplot_scripts(out_dir: &Path) -> Result<(), CmdError> {
    let scripts = [
        ("note_durations", "duration (ticks)"),
        ("techniques", "technique"),
        ("pitch_classes", "pitch class"),
    ];
    for (stem, x_label) in scripts {
        let script = format!(
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set style data histograms\n\
             set style fill solid 0.7\n\
             set xlabel '{x_label}'\n\
             set ylabel 'probability'\n\
             set output '{stem}.png'\n\
             set terminal pngcairo size 1200,600\n\
             plot '{stem}.csv' using 4:xtic(2)\n"
        );
        write_text(&out_dir.join(format!("{stem}.gp")), &script)?;
    }
    Ok(())
}
