//! `shredkit extract-solos`: apply sidecar annotations and write each solo
//! section as its own token file.

use std::path::Path;

use serde_json::json;

use shredkit::corpus::{extract_solo, ingest, load_annotations};
use shredkit::tokens::serialize;

use crate::report::{ensure_dir, write_json, write_text, RunManifest};
use crate::CmdError;

pub fn run(corpus_root: &Path, annotations_path: &Path, out_dir: &Path) -> Result<(), CmdError> {
    let corpus = ingest(corpus_root).map_err(|e| CmdError::Domain(e.to_string()))?;
    let annotations =
        load_annotations(annotations_path).map_err(|e| CmdError::Io(e.to_string()))?;
    ensure_dir(out_dir)?;

    let mut extracted = 0usize;
    let mut failed = 0usize;
    for annotation in &annotations {
        let Some(entry) = corpus
            .entries
            .iter()
            .find(|entry| entry.path == corpus_root.join(&annotation.song_path))
        else {
            log::error!("{}: not found in corpus, skipped", annotation.song_path);
            failed += annotation.sections.len();
            continue;
        };
        let stem = Path::new(&annotation.song_path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "song".to_string())
            .trim_end_matches(".tokens")
            .to_string();

        for (index, section) in annotation.sections.iter().enumerate() {
            match extract_solo(&entry.stream, *section, &annotation.target_instrument) {
                Ok(solo) => {
                    let path = out_dir
                        .join(&entry.artist)
                        .join(format!("{stem}_solo{:02}.tokens.txt", index + 1));
                    write_text(&path, &(serialize(&solo) + "\n"))?;
                    extracted += 1;
                }
                Err(e) => {
                    log::error!(
                        "{} section {}..{}: {e}",
                        annotation.song_path,
                        section.start_measure,
                        section.end_measure
                    );
                    failed += 1;
                }
            }
        }
    }

    write_json(
        &out_dir.join("extraction_summary.json"),
        &json!({
            "annotated_songs": annotations.len(),
            "sections_total": extracted + failed,
            "extracted": extracted,
            "failed": failed,
        }),
    )?;
    RunManifest::new(
        "extract-solos",
        None,
        &[corpus_root, annotations_path],
        json!({}),
    )
    .write(out_dir)?;

    if extracted == 0 {
        return Err(CmdError::Domain("no sections extracted".to_string()));
    }
    Ok(())
}
