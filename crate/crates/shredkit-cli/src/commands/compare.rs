//! `shredkit compare`: KLD matrices between groundtruth per-artist
//! distributions and generated per-(artist, configuration) distributions,
//! one matrix for note durations and one for playing techniques.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::json;

use shredkit::corpus::ingest;
use shredkit::musicology::{note_duration_distribution, technique_distribution, Distribution};
use shredkit::stats::kld;
use shredkit::stylelm::ConfigId;
use shredkit::tokens::{decode_guitar_events, TokenStream};

use crate::report::{ensure_dir, fmt_float, load_generated, write_csv, RunManifest};
use crate::CmdError;

pub fn run(
    groundtruth_root: &Path,
    generated_root: &Path,
    out_dir: &Path,
    epsilon: f64,
) -> Result<(), CmdError> {
    let groundtruth = ingest(groundtruth_root).map_err(|e| CmdError::Domain(e.to_string()))?;
    let generated = load_generated(generated_root)?;
    if generated.is_empty() {
        return Err(CmdError::Domain(format!(
            "no generated corpora under {}",
            generated_root.display()
        )));
    }

    let artists = groundtruth.artists();
    for artist in generated.keys().map(|(artist, _)| artist) {
        if !artists.contains(artist) {
            return Err(CmdError::Domain(format!(
                "generated artist {artist:?} missing from groundtruth labels {artists:?}"
            )));
        }
    }
    let mut missing = Vec::new();
    for artist in &artists {
        for config in ConfigId::ALL {
            if !generated.contains_key(&(artist.clone(), config)) {
                missing.push(format!("{artist}/{config}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(CmdError::Domain(format!(
            "configurations missing: {}",
            missing.join(", ")
        )));
    }

    // pooled groundtruth distributions per artist
    let mut groundtruth_durations: BTreeMap<&str, Distribution> = BTreeMap::new();
    let mut groundtruth_techniques: BTreeMap<&str, Distribution> = BTreeMap::new();
    for (artist, songs) in groundtruth.by_artist() {
        let durations = groundtruth_durations.entry(artist).or_default();
        let techniques = groundtruth_techniques.entry(artist).or_default();
        for song in songs {
            if let Ok(distribution) =
                note_duration_distribution(&decode_guitar_events(&song.stream))
            {
                durations.merge(&distribution);
            }
            techniques.merge(&technique_distribution(&song.stream));
        }
    }

    let pool_generated = |streams: &[TokenStream]| -> (Distribution, Distribution) {
        let mut durations = Distribution::default();
        let mut techniques = Distribution::default();
        for stream in streams {
            if let Ok(distribution) = note_duration_distribution(&decode_guitar_events(stream)) {
                durations.merge(&distribution);
            }
            techniques.merge(&technique_distribution(stream));
        }
        (durations, techniques)
    };

    let mut duration_rows = Vec::new();
    let mut technique_rows = Vec::new();
    for artist in &artists {
        for config in ConfigId::ALL {
            let streams = &generated[&(artist.clone(), config)];
            let (generated_durations, generated_techniques) = pool_generated(streams);

            let divergence_row = |generated_distribution: &Distribution,
                                  reference: &BTreeMap<&str, Distribution>|
             -> Vec<String> {
                let mut cells = Vec::new();
                let mut best: Option<(f64, &str)> = None;
                for column_artist in &artists {
                    let value = kld(
                        generated_distribution,
                        &reference[column_artist.as_str()],
                        epsilon,
                    )
                    .unwrap_or(f64::NAN);
                    if value.is_finite() && best.is_none_or(|(b, _)| value < b) {
                        best = Some((value, column_artist));
                    }
                    cells.push(fmt_float(value));
                }
                cells.push(best.map(|(_, name)| name.to_string()).unwrap_or_default());
                cells
            };

            let mut duration_row = vec![artist.clone(), config.to_string()];
            duration_row.extend(divergence_row(&generated_durations, &groundtruth_durations));
            duration_rows.push(duration_row);

            let mut technique_row = vec![artist.clone(), config.to_string()];
            technique_row.extend(divergence_row(
                &generated_techniques,
                &groundtruth_techniques,
            ));
            technique_rows.push(technique_row);
        }
    }

    ensure_dir(out_dir)?;
    let mut header: Vec<&str> = vec!["conditioned_artist", "config"];
    header.extend(artists.iter().map(String::as_str));
    header.push("best");

    write_csv(
        &out_dir.join("kld_note_durations.csv"),
        &header,
        duration_rows,
    )?;
    write_csv(&out_dir.join("kld_techniques.csv"), &header, technique_rows)?;

    RunManifest::new(
        "compare",
        None,
        &[groundtruth_root, generated_root],
        json!({
            "epsilon": epsilon,
            "direction": "kld(generated || groundtruth)",
        }),
    )
    .write(out_dir)?;
    Ok(())
}
