use docsearch::model::{FnScorer, RandomScorer};
use docsearch::search::ranking_score;
use docsearch::{beam_search, exact_decode, BeamParams, CountingScorer, TokenId, Vocab};
use proptest::prelude::*;

fn vocab(tokens: &[&str]) -> Vocab {
    Vocab::new(tokens.iter().map(|t| t.to_string()).collect()).unwrap()
}

/// Greedy takes `a` (0.6) but every continuation of `a` is poor; `b eos`
/// has probability 0.4 * 0.99.
fn garden_path() -> FnScorer<impl Fn(&[TokenId]) -> Vec<f64> + Sync> {
    let v = vocab(&["</s>", "<sep>", "a", "b"]);
    FnScorer::new(
        v,
        TokenId(1),
        TokenId(0),
        |prefix: &[TokenId]| match prefix {
            [] => vec![0.0, 0.0, 0.6, 0.4],
            [TokenId(2), ..] => vec![0.25, 0.25, 0.25, 0.25],
            _ => vec![0.99, 0.0, 0.005, 0.005],
        },
    )
}

#[test]
fn greedy_falls_for_the_garden_path() {
    let s = garden_path();
    let greedy = beam_search(
        &s,
        &[],
        &[],
        &BeamParams::new(1).with_max_len(2).with_length_norm(false),
    )
    .unwrap();
    assert_eq!(greedy[0].tokens, ["a", "</s>"]);
    let beam = beam_search(
        &s,
        &[],
        &[],
        &BeamParams::new(2).with_max_len(2).with_length_norm(false),
    )
    .unwrap();
    assert_eq!(beam[0].tokens, ["b", "</s>"]);
    assert!((beam[0].total_logprob - (0.4f64 * 0.99).ln()).abs() < 1e-12);
    let exact = exact_decode(&s, &[], &[], 2).unwrap();
    assert!(exact.bitwise_eq(&beam[0]));
}

#[test]
fn oracle_equivalence_on_random_tables() {
    let mut mismatches = 0;
    let mut instances = 0;
    for seed in 0..240u64 {
        let size = 2 + (seed % 2) as usize;
        let max_len = 1 + (seed % 4) as usize;
        let s = RandomScorer::new(size, seed, 1.0 + (seed % 3) as f64).unwrap();
        let beam = size.pow(max_len as u32);
        let params = BeamParams::new(beam)
            .with_max_len(max_len)
            .with_length_norm(false);
        let got = beam_search(&s, &[], &[], &params).unwrap();
        let want = exact_decode(&s, &[], &[], max_len).unwrap();
        instances += 1;
        if !got[0].bitwise_eq(&want) {
            mismatches += 1;
        }
    }
    assert_eq!((instances, mismatches), (240, 0));
}

#[test]
fn every_step_scores_the_full_batch() {
    // The end token is nearly impossible, so nothing finished ever beats
    // the live rows and the search runs to max_len, B scorer calls a step.
    let v = vocab(&["</s>", "<sep>", "a"]);
    let s = CountingScorer::new(FnScorer::new(
        v,
        TokenId(1),
        TokenId(0),
        |_: &[TokenId]| vec![1e-9, 0.5, 0.5 - 1e-9],
    ));
    let params = BeamParams::new(5).with_max_len(4);
    let hyps = beam_search(&s, &[], &[], &params).unwrap();
    assert_eq!(s.calls(), 5 * 4);
    assert_eq!(hyps.len(), 5);
    assert!(hyps.iter().all(|h| h.len() == 4 && h.tokens[3] == "</s>"));
}

#[test]
fn length_normalisation_flips_the_winner() {
    // `eos`: 0.45. `a eos`: 0.55 * 0.8 = 0.44, lower in total but higher
    // per token.
    let v = vocab(&["</s>", "<sep>", "a"]);
    let s = FnScorer::new(v, TokenId(1), TokenId(0), |p: &[TokenId]| match p.len() {
        0 => vec![0.45, 0.0, 0.55],
        1 => vec![0.8, 0.0, 0.2],
        _ => vec![1.0, 0.0, 0.0],
    });
    let params = BeamParams::new(2).with_max_len(3);
    let raw = beam_search(&s, &[], &[], &params.with_length_norm(false)).unwrap();
    assert_eq!(raw[0].tokens, ["</s>"]);
    let norm = beam_search(&s, &[], &[], &params).unwrap();
    assert_eq!(norm[0].tokens, ["a", "</s>"]);
    for w in norm.windows(2) {
        assert!(ranking_score(&w[0], true) >= ranking_score(&w[1], true));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_never_beats_the_optimum(seed in any::<u64>(), size in 2usize..5, max_len in 1usize..5, b in 1usize..6) {
        let s = RandomScorer::new(size, seed, 2.0).unwrap();
        let params = BeamParams::new(b).with_max_len(max_len).with_length_norm(false);
        let got = beam_search(&s, &[], &[], &params).unwrap();
        let want = exact_decode(&s, &[], &[], max_len).unwrap();
        prop_assert!(got[0].total_logprob <= want.total_logprob + 1e-12);
        prop_assert!(!got.is_empty() && got.len() <= b);
        for h in &got {
            prop_assert!(h.len() <= max_len);
            prop_assert_eq!(h.tokens.last().map(String::as_str), Some("</s>"));
            prop_assert_eq!(h.token_logprobs.len(), h.tokens.len());
        }
        for w in got.windows(2) {
            prop_assert!(w[0].total_logprob >= w[1].total_logprob);
        }
    }

    #[test]
    fn exhaustive_beam_is_exact(seed in any::<u64>(), size in 2usize..4, max_len in 1usize..5) {
        let s = RandomScorer::new(size, seed, 1.0).unwrap();
        let b = size.pow(max_len as u32);
        let params = BeamParams::new(b).with_max_len(max_len).with_length_norm(false);
        let got = beam_search(&s, &[], &[], &params).unwrap();
        let want = exact_decode(&s, &[], &[], max_len).unwrap();
        prop_assert!(got[0].bitwise_eq(&want));
    }
}
