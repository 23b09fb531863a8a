//! `shredkit train-generate`: train the conditioned n-gram on a corpus and
//! sample songs per artist under one (mode, prompt) configuration, writing
//! them into the `<artist>/<CONFIG>/` layout the scoring commands read.

use std::path::PathBuf;

use serde_json::json;

use shredkit::corpus::ingest;
use shredkit::stylelm::{make_prompt, GenerationConfig, Mode, PromptKind, StyleLm};
use shredkit::tokens::serialize;

use crate::report::{ensure_dir, write_text, RunManifest};
use crate::CmdError;

pub struct Args {
    pub corpus: PathBuf,
    pub mode: Mode,
    pub prompt: PromptKind,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub order: usize,
    pub lambda: f64,
    pub add_k: f64,
    pub temperature: f64,
    pub top_k: Option<usize>,
}

pub fn run(args: Args) -> Result<(), CmdError> {
    let corpus = ingest(&args.corpus).map_err(|e| CmdError::Domain(e.to_string()))?;
    let model = StyleLm::train(&corpus, args.order, args.lambda, args.add_k)
        .map_err(|e| CmdError::Domain(format!("training failed: {e}")))?;
    ensure_dir(&args.out)?;

    let config_id = format!(
        "{}",
        shredkit::stylelm::ConfigId {
            mode: args.mode,
            prompt: args.prompt,
        }
    );
    let groups = corpus.by_artist();
    for (artist_index, (artist, songs)) in groups.iter().enumerate() {
        let config_dir = args.out.join(artist).join(&config_id);
        ensure_dir(&config_dir)?;

        for sample in 0..args.n {
            // cycle reference songs; skip ones that cannot form the prompt
            let mut prompt = None;
            for offset in 0..songs.len() {
                let reference = &songs[(sample + offset) % songs.len()];
                match make_prompt(&reference.stream, args.prompt, artist) {
                    Ok(built) => {
                        prompt = Some(built);
                        break;
                    }
                    Err(e) => log::warn!("{}: {e}", reference.path.display()),
                }
            }
            let Some(prompt) = prompt else {
                return Err(CmdError::Domain(format!(
                    "artist {artist}: no song can seed a {} prompt",
                    args.prompt
                )));
            };

            let mut generation_config = GenerationConfig::new(args.mode, args.prompt)
                .with_seed(
                    args.seed
                        .wrapping_add((artist_index * args.n + sample) as u64),
                )
                .with_temperature(args.temperature);
            generation_config.top_k = args.top_k;

            let generated = model
                .generate(&prompt, artist, &generation_config)
                .map_err(|e| CmdError::Domain(e.to_string()))?;
            let path = config_dir.join(format!("gen_{sample:03}.tokens.txt"));
            write_text(&path, &(serialize(&generated) + "\n"))?;
        }
    }

    write_text(&args.out.join("model.json"), &model.to_json())?;
    RunManifest::new(
        "train-generate",
        Some(args.seed),
        &[&args.corpus],
        json!({
            "mode": args.mode.to_string(),
            "prompt": args.prompt.to_string(),
            "n_per_artist": args.n,
            "order": args.order,
            "lambda": args.lambda,
            "add_k": args.add_k,
            "temperature": args.temperature,
            "top_k": args.top_k,
            "max_tokens": args.mode.max_tokens(),
        }),
    )
    .write(&args.out)?;
    Ok(())
}
