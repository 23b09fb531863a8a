//! Command-level behavior: exit codes, report shapes, determinism.

use std::path::Path;
use std::process::{Command, Output};

use shredkit_fixtures::{write_annotated_corpus, write_corpus};

fn shredkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shredkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.tokens.txt");
    std::fs::write(&good, "start clean0:note:s1:f0 nfx:bend wait:240 end").unwrap();
    let output = shredkit(&["validate", &path_str(&good)]);
    assert_eq!(output.status.code(), Some(0));
    assert!(output.stderr.is_empty());

    let bad = dir.path().join("bad.tokens.txt");
    std::fs::write(&bad, "start nfx:bend wait:240 end").unwrap();
    let output = shredkit(&["validate", &path_str(&bad)]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("effect without note"), "{stderr}");

    let output = shredkit(&[
        "validate",
        &path_str(&dir.path().join("missing.tokens.txt")),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validate_reports_zero_wait_with_index() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zero.tokens.txt");
    std::fs::write(&file, "start clean0:note:s1:f0 wait:0 end").unwrap();
    let output = shredkit(&["validate", &path_str(&file)]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains(":1: zero wait"), "{stderr}");
}

#[test]
fn analyze_produces_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 4, false, 3).unwrap();

    let out_first = dir.path().join("first");
    let out_second = dir.path().join("second");
    for out in [&out_first, &out_second] {
        let output = shredkit(&[
            "analyze",
            "--corpus",
            &path_str(&corpus),
            "--out",
            &path_str(out),
        ]);
        assert_eq!(output.status.code(), Some(0));
    }

    for report in [
        "note_durations.csv",
        "techniques.csv",
        "pitch_classes.csv",
        "pce_sc.csv",
        "summary.csv",
        "kruskal_wallis.json",
    ] {
        let first = std::fs::read(out_first.join(report)).unwrap();
        let second = std::fs::read(out_second.join(report)).unwrap();
        assert!(!first.is_empty());
        assert_eq!(first, second, "{report} differs between runs");
    }

    // four artists -> four KW tests with df = 3
    let tests: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_first.join("kruskal_wallis.json")).unwrap(),
    )
    .unwrap();
    for name in ["note_duration", "technique", "pce", "sc"] {
        let test = &tests["tests"][name];
        assert_eq!(test["df"], 3, "{name}: {test}");
    }
}

#[test]
fn analyze_single_artist_skips_tests() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir_all(corpus.join("only")).unwrap();
    std::fs::write(
        corpus.join("only/song.tokens.txt"),
        "tempo:100 start clean0:note:s1:f0 wait:240 end",
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = shredkit(&[
        "analyze",
        "--corpus",
        &path_str(&corpus),
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let tests: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("kruskal_wallis.json")).unwrap())
            .unwrap();
    assert_eq!(tests["tests"]["pce"]["skipped"], "need >=2 groups");
}

#[test]
fn analyze_empty_corpus_is_domain_failure() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("void");
    std::fs::create_dir_all(&corpus).unwrap();
    let output = shredkit(&[
        "analyze",
        "--corpus",
        &path_str(&corpus),
        "--out",
        &path_str(&dir.path().join("out")),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn train_generate_writes_n_files_per_artist_with_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 4, false, 5).unwrap();
    let out = dir.path().join("generated");

    let output = shredkit(&[
        "train-generate",
        "--corpus",
        &path_str(&corpus),
        "--mode",
        "solo",
        "--prompt",
        "full",
        "--n",
        "5",
        "--seed",
        "9",
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let mut files = Vec::new();
    for artist in ["bender", "hammerer", "slider", "tapper"] {
        for sample in 0..5 {
            let path = out
                .join(artist)
                .join("S-FP")
                .join(format!("gen_{sample:03}.tokens.txt"));
            assert!(path.is_file(), "{}", path.display());
            files.push(std::fs::read_to_string(path).unwrap());
        }
    }
    assert_eq!(files.len(), 20);
    assert!(out.join("model.json").is_file());
    assert!(out.join("run_manifest.json").is_file());

    // solo budget: body <= prompt + 256 tokens. The full prompt is at most
    // 3 header words + start + two 12-word measures + a measure boundary,
    // and serialization appends end.
    for text in &files {
        let words = text.split_whitespace().count();
        assert!(words <= 3 + 1 + 25 + 256 + 1, "{words} words");
    }

    // same seed reruns byte-identically
    let out_again = dir.path().join("generated_again");
    let output = shredkit(&[
        "train-generate",
        "--corpus",
        &path_str(&corpus),
        "--mode",
        "solo",
        "--prompt",
        "full",
        "--n",
        "5",
        "--seed",
        "9",
        "--out",
        &path_str(&out_again),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let first = std::fs::read(out.join("bender/S-FP/gen_000.tokens.txt")).unwrap();
    let second = std::fs::read(out_again.join("bender/S-FP/gen_000.tokens.txt")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn generated_files_pass_validation() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 3, true, 6).unwrap();
    let out = dir.path().join("generated");
    let output = shredkit(&[
        "train-generate",
        "--corpus",
        &path_str(&corpus),
        "--mode",
        "multi",
        "--prompt",
        "empty",
        "--n",
        "2",
        "--seed",
        "4",
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let mut generated: Vec<String> = Vec::new();
    for entry in walkdir(&out) {
        if entry.ends_with(".tokens.txt") {
            generated.push(entry);
        }
    }
    assert_eq!(generated.len(), 8);
    let output = shredkit(
        &std::iter::once("validate")
            .chain(generated.iter().map(String::as_str))
            .collect::<Vec<_>>(),
    );
    assert_eq!(output.status.code(), Some(0));
}

fn walkdir(root: &Path) -> Vec<String> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap().filter_map(Result::ok) {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                found.push(path.display().to_string());
            }
        }
    }
    found.sort();
    found
}

#[test]
fn compare_requires_all_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 3, false, 8).unwrap();
    let generated = dir.path().join("generated");

    // only one configuration present
    let output = shredkit(&[
        "train-generate",
        "--corpus",
        &path_str(&corpus),
        "--mode",
        "solo",
        "--prompt",
        "empty",
        "--n",
        "2",
        "--seed",
        "1",
        "--out",
        &path_str(&generated),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let output = shredkit(&[
        "compare",
        "--groundtruth",
        &path_str(&corpus),
        "--generated",
        &path_str(&generated),
        "--out",
        &path_str(&dir.path().join("cmp")),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("configurations missing"), "{stderr}");
}

#[test]
fn extract_solos_writes_sections_and_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let annotations = dir.path().join("solos.json");
    write_annotated_corpus(&corpus, &annotations, 2, 12).unwrap();

    let out = dir.path().join("solos");
    let output = shredkit(&[
        "extract-solos",
        "--corpus",
        &path_str(&corpus),
        "--annotations",
        &path_str(&annotations),
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("extraction_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["extracted"], 24); // 8 songs x 3 sections
    assert_eq!(summary["failed"], 0);

    let solos: Vec<String> = walkdir(&out)
        .into_iter()
        .filter(|path| path.ends_with(".tokens.txt"))
        .collect();
    assert_eq!(solos.len(), 24);
    let output = shredkit(
        &std::iter::once("validate")
            .chain(solos.iter().map(String::as_str))
            .collect::<Vec<_>>(),
    );
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn classify_reports_accuracy_and_rejects_single_class() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 8, false, 13).unwrap();

    let out = dir.path().join("cls");
    let output = shredkit(&[
        "classify",
        "--corpus",
        &path_str(&corpus),
        "--out",
        &path_str(&out),
        "--seed",
        "2",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let accuracy: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("accuracy.json")).unwrap()).unwrap();
    assert!(accuracy["accuracy"].as_f64().unwrap() > 0.8);
    assert!(out.join("nb_model.json").is_file());

    // single artist corpus
    let single = dir.path().join("single");
    std::fs::create_dir_all(single.join("only")).unwrap();
    for index in 0..4 {
        std::fs::write(
            single.join("only").join(format!("s{index}.tokens.txt")),
            "start clean0:note:s1:f0 wait:240 end",
        )
        .unwrap();
    }
    let output = shredkit(&[
        "classify",
        "--corpus",
        &path_str(&single),
        "--out",
        &path_str(&dir.path().join("cls2")),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn compare_flags_identity_on_diagonal_and_transfer_failure_off_it() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 3, false, 17).unwrap();

    // "generations" that are literal copies of the groundtruth songs,
    // except the bender rows, which copy hammerer's songs (a transfer
    // failure)
    let generated = dir.path().join("generated");
    for artist in ["bender", "hammerer", "slider", "tapper"] {
        let source = if artist == "bender" {
            "hammerer"
        } else {
            artist
        };
        for config in ["M-FP", "M-EP", "S-FP", "S-EP"] {
            let config_dir = generated.join(artist).join(config);
            std::fs::create_dir_all(&config_dir).unwrap();
            for song in 0..3 {
                std::fs::copy(
                    corpus
                        .join(source)
                        .join(format!("{source}_{song:03}.tokens.txt")),
                    config_dir.join(format!("gen_{song:03}.tokens.txt")),
                )
                .unwrap();
            }
        }
    }

    let out = dir.path().join("cmp");
    let output = shredkit(&[
        "compare",
        "--groundtruth",
        &path_str(&corpus),
        "--generated",
        &path_str(&generated),
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let table = std::fs::read_to_string(out.join("kld_note_durations.csv")).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split(',').collect();
    for line in table.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let conditioned = cells[0];
        let best = *cells.last().unwrap();
        if conditioned == "bender" {
            // copies of hammerer's songs minimize against hammerer
            assert_eq!(best, "hammerer", "{line}");
        } else {
            assert_eq!(best, conditioned, "{line}");
            // identical distributions give exactly zero divergence
            let own_column = header.iter().position(|h| *h == conditioned).unwrap();
            assert_eq!(cells[own_column], "0.000000", "{line}");
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    let output = shredkit(&["analyze", "--corpus"]);
    assert_eq!(output.status.code(), Some(2));
    let output = shredkit(&["train-generate", "--mode", "bogus"]);
    assert_eq!(output.status.code(), Some(2));
}
