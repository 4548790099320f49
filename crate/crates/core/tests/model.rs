use docsearch::model::{join_context, RandomScorer};
use docsearch::{score_sequence, Scorer, SyntheticModel, TokenId, WorldSpec};
use proptest::prelude::*;

fn words(world: &WorldSpec) -> Vec<String> {
    let mut w: Vec<String> = world.lexicon.keys().cloned().collect();
    w.push(world.pronoun_src.clone());
    w.push(world.formality_src.clone());
    w
}

#[test]
fn score_sequence_sums_token_log_probabilities() {
    let m = SyntheticModel::new(WorldSpec::default_world()).unwrap();
    let src: Vec<String> = ["dog", "<sep>", "it"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let ctx = join_context(&[vec!["hund".to_string()]], "<sep>");
    let target: Vec<String> = ["er", "</s>"].iter().map(|s| s.to_string()).collect();
    let h = score_sequence(&m, &src, &ctx, &target).unwrap();
    assert_eq!(h.token_logprobs.len(), 2);
    assert!((h.token_logprobs[0] - 0.95f64.ln()).abs() < 1e-12);
    assert!((h.total_logprob - 2.0 * 0.95f64.ln()).abs() < 1e-12);
    // A wrong pronoun gets a share of the noise.
    let wrong: Vec<String> = ["sie", "</s>"].iter().map(|s| s.to_string()).collect();
    let w = score_sequence(&m, &src, &ctx, &wrong).unwrap();
    let noise = 0.05 / (m.vocab().len() - 1) as f64;
    assert!((w.token_logprobs[0] - noise.ln()).abs() < 1e-12);
}

#[test]
fn targets_must_end_with_the_end_token() {
    let m = SyntheticModel::new(WorldSpec::default_world()).unwrap();
    let src = vec!["dog".to_string()];
    assert!(score_sequence(&m, &src, &[], &["hund".to_string()]).is_err());
}

proptest! {
    #[test]
    fn synthetic_distributions_sum_to_one(
        picks in proptest::collection::vec(0usize..64, 1..8),
        prefix_picks in proptest::collection::vec(0usize..64, 0..6),
        epsilon in 0.0f64..0.49,
    ) {
        let world = WorldSpec::default_world().with_epsilon(epsilon);
        let m = SyntheticModel::new(world.clone()).unwrap();
        let vocab = words(&world);
        let src: Vec<String> = picks.iter().map(|i| vocab[i % vocab.len()].clone()).collect();
        let prefix: Vec<TokenId> = prefix_picks
            .iter()
            .map(|i| TokenId((2 + i % (m.vocab().len() - 2)) as u32))
            .collect();
        let d = m.next_token_distribution(&src, &[], &prefix).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!(d.log_probs().iter().all(|lp| *lp <= 0.0));
    }

    #[test]
    fn random_distributions_sum_to_one(seed in any::<u64>(), size in 2usize..9, prefix in proptest::collection::vec(0u32..2, 0..5)) {
        let s = RandomScorer::new(size, seed, 3.0).unwrap();
        let prefix: Vec<TokenId> = prefix.into_iter().map(TokenId).collect();
        let d = s.next_token_distribution(&[], &[], &prefix).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-9);
        prop_assert_eq!(d, s.next_token_distribution(&[], &[], &prefix).unwrap());
    }
}
