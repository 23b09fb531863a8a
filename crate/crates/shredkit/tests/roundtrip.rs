//! Round-trip and totality properties of the token grammar.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shredkit::tokens::{canonical_whitespace, parse_stream, parse_token, serialize, Token};
use shredkit_fixtures::{canonical_artists, random_word, song_text};

proptest! {
    /// Any whitespace-free word parses to exactly one token whose rendering
    /// is the original word.
    #[test]
    fn token_round_trip(word in "[!-~]{1,24}") {
        let token = parse_token(&word);
        prop_assert_eq!(token.to_string(), word);
    }

    /// Structured near-grammar words round-trip too.
    #[test]
    fn structured_token_round_trip(
        head in prop::sample::select(vec!["wait", "tempo", "downtune", "nfx", "bfx", "drums", "clean0"]),
        tail in "[a-z0-9:.-]{0,16}",
    ) {
        let word = format!("{head}:{tail}");
        let token = parse_token(&word);
        prop_assert_eq!(token.to_string(), word);
    }

    /// parse ∘ serialize ∘ parse is the identity on arbitrary word soup.
    #[test]
    fn double_round_trip_is_identity(words in prop::collection::vec("[!-~]{1,12}", 0..40)) {
        let text = words.join(" ");
        let once = parse_stream(&text);
        let twice = parse_stream(&serialize(&once.stream));
        prop_assert_eq!(once.stream, twice.stream);
    }
}

#[test]
fn fixture_corpus_round_trips_canonically() {
    for signature in canonical_artists() {
        for song in 0..25 {
            for multi in [false, true] {
                let text = song_text(&signature, song, multi, 99);
                let parsed = parse_stream(&text);
                assert_eq!(serialize(&parsed.stream), canonical_whitespace(&text));
            }
        }
    }
}

#[test]
fn parse_token_totality_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF022);
    for _ in 0..100_000 {
        let word = random_word(&mut rng);
        let token = parse_token(&word);
        // Every word maps to exactly one variant and unknown words are
        // preserved byte for byte.
        if let Token::Unknown(raw) = &token {
            assert_eq!(raw, &word);
        }
        assert_eq!(token.to_string(), word);
    }
}

#[test]
fn whitespace_variants_parse_identically() {
    let text = "artist:a\tdowntune:-1\ntempo:99 start wait:240\n\nend";
    let parsed = parse_stream(text);
    assert_eq!(serialize(&parsed.stream), canonical_whitespace(text));
    assert_eq!(
        canonical_whitespace(text),
        "artist:a downtune:-1 tempo:99 start wait:240 end"
    );
}
