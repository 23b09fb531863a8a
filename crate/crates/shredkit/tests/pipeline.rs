//! Cross-module properties over the synthetic fixture corpus: solo
//! extraction conservation, split stratification, and conditioning
//! separation between the language model and the classifier.

use shredkit::classify::{evaluate, train_nb};
use shredkit::corpus::{extract_solo, ingest, load_annotations, split};
use shredkit::musicology::{note_duration_distribution, technique_distribution};
use shredkit::stats::kld;
use shredkit::stylelm::{make_prompt, GenerationConfig, Mode, PromptKind, StyleLm};
use shredkit::tokens::{decode_events, decode_guitar_events, validate, Severity, Token};
use shredkit_fixtures::{write_annotated_corpus, write_corpus};

#[test]
fn solo_extraction_conserves_ticks_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("corpus");
    let annotations_path = dir.path().join("solos.json");
    write_annotated_corpus(&corpus_dir, &annotations_path, 3, 5).unwrap();

    let corpus = ingest(&corpus_dir).unwrap();
    let annotations = load_annotations(&annotations_path).unwrap();
    assert!(!annotations.is_empty());

    let mut extracted = 0;
    for annotation in &annotations {
        let entry = corpus
            .entries
            .iter()
            .find(|e| e.path.ends_with(&annotation.song_path))
            .expect("annotated song in corpus");
        for section in &annotation.sections {
            let solo =
                extract_solo(&entry.stream, *section, &annotation.target_instrument).unwrap();

            // tick span conservation against the source measure slice
            let source = decode_events(&entry.stream, None);
            let measure_ticks = measure_tick_spans(&entry.stream.body);
            let expected: u64 = measure_ticks[section.start_measure - 1..section.end_measure]
                .iter()
                .sum();
            let solo_timeline = decode_events(&solo, None);
            assert_eq!(solo_timeline.total_ticks, expected);
            assert!(source.total_ticks >= expected);

            // extracted streams are grammar-valid and single-instrument
            assert!(validate(&solo)
                .iter()
                .all(|v| v.severity != Severity::Error));
            assert!(solo.body.iter().all(|t| match t {
                Token::Note { instrument, .. } => instrument == &annotation.target_instrument,
                Token::Drums { .. } => false,
                _ => true,
            }));
            extracted += 1;
        }
    }
    assert_eq!(extracted, annotations.len() * 3);
}

fn measure_tick_spans(body: &[Token]) -> Vec<u64> {
    let mut spans = vec![0u64];
    for token in body {
        match token {
            Token::Wait(ticks) => *spans.last_mut().unwrap() += ticks,
            Token::NewMeasure => spans.push(0),
            _ => {}
        }
    }
    spans
}

#[test]
fn splits_partition_and_stratify() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 20, false, 11).unwrap();
    let corpus = ingest(dir.path()).unwrap();
    assert_eq!(corpus.len(), 80);

    let (train, validation, test) = split(&corpus, (0.55, 0.20, 0.25), 4).unwrap();
    assert_eq!((train.len(), validation.len(), test.len()), (44, 16, 20));
    for artist in corpus.artists() {
        let count = |index: &shredkit::corpus::CorpusIndex| {
            index.entries.iter().filter(|e| e.artist == artist).count()
        };
        assert_eq!(count(&train), 11);
        assert_eq!(count(&validation), 4);
        assert_eq!(count(&test), 5);
    }
}

#[test]
fn conditioning_separates_artists_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 8, false, 21).unwrap();
    let corpus = ingest(dir.path()).unwrap();
    let model = StyleLm::train(&corpus, 3, 0.7, 0.01).unwrap();
    let classifier = train_nb(&corpus, 1.0).unwrap();
    let groups = corpus.by_artist();

    for (artist_index, (artist, songs)) in groups.iter().enumerate() {
        let reference = &songs[0].stream;
        let prompt = make_prompt(reference, PromptKind::Empty, artist).unwrap();
        let mut config = GenerationConfig::new(Mode::Solo, PromptKind::Empty)
            .with_seed(100 + artist_index as u64);
        config.max_tokens = 120;
        let generated = model.generate(&prompt, artist, &config).unwrap();

        // classifier agrees with the conditioning artist
        assert_eq!(classifier.predict(&generated).unwrap(), *artist);

        // duration/technique distributions sit closest to the artist's own
        let generated_durations =
            note_duration_distribution(&decode_guitar_events(&generated)).unwrap();
        let generated_techniques = technique_distribution(&generated);
        let mut best_duration = (f64::INFINITY, "");
        let mut best_technique = (f64::INFINITY, "");
        for (other, other_songs) in &groups {
            let mut durations = shredkit::musicology::Distribution::default();
            let mut techniques = shredkit::musicology::Distribution::default();
            for song in other_songs {
                durations.merge(
                    &note_duration_distribution(&decode_guitar_events(&song.stream)).unwrap(),
                );
                techniques.merge(&technique_distribution(&song.stream));
            }
            let duration_divergence = kld(&generated_durations, &durations, 1e-6).unwrap();
            if duration_divergence < best_duration.0 {
                best_duration = (duration_divergence, other);
            }
            let technique_divergence = kld(&generated_techniques, &techniques, 1e-6).unwrap();
            if technique_divergence < best_technique.0 {
                best_technique = (technique_divergence, other);
            }
        }
        assert_eq!(best_duration.1, *artist, "duration KLD diagonal");
        assert_eq!(best_technique.1, *artist, "technique KLD diagonal");
    }
}

#[test]
fn held_out_classification_is_accurate_on_fixture_styles() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 12, false, 31).unwrap();
    let corpus = ingest(dir.path()).unwrap();
    let (train, _, test) = split(&corpus, (0.55, 0.20, 0.25), 9).unwrap();
    let model = train_nb(&train, 1.0).unwrap();
    let evaluation = evaluate(&model, &test);
    assert!(
        evaluation.accuracy >= 0.9,
        "accuracy {} below 0.9",
        evaluation.accuracy
    );
    assert_eq!(evaluation.n_total, test.len());
}
