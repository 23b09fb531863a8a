//! `shredkit classify`: train the guitarist classifier on a split of the
//! corpus, report held-out accuracy and confusion, and score generated
//! corpora into the 16-row table.

use std::path::Path;

use serde_json::json;

use shredkit::classify::{evaluate, score_table, train_nb, FeatureVectorScorer};
use shredkit::corpus::{ingest, split};

use crate::report::{ensure_dir, fmt_float, load_generated, write_csv, write_json, RunManifest};
use crate::CmdError;

fn parse_ratios(text: &str) -> Result<(f64, f64, f64), CmdError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CmdError::Io(format!("bad --split {text:?}: {e}")))?;
    if parts.len() != 3 {
        return Err(CmdError::Io(format!(
            "bad --split {text:?}: need three comma-separated ratios"
        )));
    }
    Ok((parts[0], parts[1], parts[2]))
}

pub fn run(
    corpus_root: &Path,
    generated_root: Option<&Path>,
    out_dir: &Path,
    alpha: f64,
    seed: u64,
    split_spec: &str,
) -> Result<(), CmdError> {
    let corpus = ingest(corpus_root).map_err(|e| CmdError::Domain(e.to_string()))?;
    let ratios = parse_ratios(split_spec)?;
    let (train, validation, test) =
        split(&corpus, ratios, seed).map_err(|e| CmdError::Domain(e.to_string()))?;

    let model = train_nb(&train, alpha).map_err(|e| CmdError::Domain(e.to_string()))?;
    let evaluation = evaluate(&model, &test);

    ensure_dir(out_dir)?;
    write_json(
        &out_dir.join("accuracy.json"),
        &json!({
            "accuracy": evaluation.accuracy,
            "n_correct": evaluation.n_correct,
            "n_total": evaluation.n_total,
            "n_skipped": evaluation.n_skipped,
            "confusion": evaluation.confusion,
            "split_sizes": {
                "train": train.len(),
                "validation": validation.len(),
                "test": test.len(),
            },
        }),
    )?;
    write_json(&out_dir.join("nb_model.json"), &model)?;

    // feature-vector cross-check on the same split
    if let Ok(scorer) = FeatureVectorScorer::train(&train) {
        let mut correct = 0usize;
        let mut total = 0usize;
        for entry in &test.entries {
            if let Ok(scores) = scorer.scores(&entry.stream) {
                let best = scores
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap()
                    .0;
                total += 1;
                if scorer.artists[best] == entry.artist {
                    correct += 1;
                }
            }
        }
        write_json(
            &out_dir.join("feature_scorer_cross_check.json"),
            &json!({
                "accuracy": if total > 0 { correct as f64 / total as f64 } else { 0.0 },
                "n_total": total,
                "features": "mean duration, per-note technique rates, pce, sc",
            }),
        )?;
    }

    if let Some(generated_root) = generated_root {
        let generated = load_generated(generated_root)?;
        if generated.is_empty() {
            return Err(CmdError::Domain(format!(
                "no generated corpora under {}",
                generated_root.display()
            )));
        }
        let matrix =
            score_table(&model, &generated).map_err(|e| CmdError::Domain(e.to_string()))?;

        let mut header: Vec<&str> = vec!["conditioned_artist", "config"];
        header.extend(matrix.artists.iter().map(String::as_str));
        header.push("best");
        let rows = matrix
            .rows
            .iter()
            .map(|row| {
                let mut cells = vec![row.conditioned_artist.clone(), row.config.to_string()];
                cells.extend(row.scores.iter().map(|score| fmt_float(*score)));
                cells.push(matrix.artists[row.best_column()].clone());
                cells
            })
            .collect::<Vec<_>>();
        write_csv(&out_dir.join("score_matrix.csv"), &header, rows)?;
    }

    RunManifest::new(
        "classify",
        Some(seed),
        &[corpus_root],
        json!({
            "alpha": alpha,
            "split": split_spec,
            "features": "wait, guitar note, nfx, bfx token unigrams; control and bass tokens excluded",
        }),
    )
    .write(out_dir)?;
    Ok(())
}
