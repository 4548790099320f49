use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Distribution, Scorer, TokenId, Vocab};
use crate::error::{Error, Result};

/// A scorer defined by a closure from the current prefix to next-token
/// probabilities in vocabulary order. Source and context are ignored. Handy
/// for hand-built search problems.
pub struct FnScorer<F> {
    vocab: Vocab,
    sep: TokenId,
    eos: TokenId,
    probs: F,
}

impl<F> FnScorer<F>
where
    F: Fn(&[TokenId]) -> Vec<f64> + Sync,
{
    pub fn new(vocab: Vocab, separator: TokenId, eos: TokenId, probs: F) -> Self {
        Self {
            vocab,
            sep: separator,
            eos,
            probs,
        }
    }
}

impl<F> Scorer for FnScorer<F>
where
    F: Fn(&[TokenId]) -> Vec<f64> + Sync,
{
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn separator(&self) -> TokenId {
        self.sep
    }

    fn eos(&self) -> TokenId {
        self.eos
    }

    fn next_token_distribution(
        &self,
        _src: &[String],
        _context: &[TokenId],
        prefix: &[TokenId],
    ) -> Result<Distribution> {
        Ok(Distribution::from_probs(&(self.probs)(prefix)))
    }
}

/// A scorer whose next-token distribution is a fixed pseudo-random function
/// of `(seed, prefix)`. Source and context are ignored. Larger `sharpness`
/// concentrates the mass on fewer tokens.
#[derive(Debug, Clone)]
pub struct RandomScorer {
    vocab: Vocab,
    sep: TokenId,
    eos: TokenId,
    seed: u64,
    sharpness: f64,
}

impl RandomScorer {
    /// Vocabulary `</s>`, `<sep>`, then `t0`, `t1`, … up to `size` tokens.
    pub fn new(size: usize, seed: u64, sharpness: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidInput(
                "a random scorer needs at least the end token and the separator".into(),
            ));
        }
        let tokens: Vec<String> = ["</s>".to_owned(), "<sep>".to_owned()]
            .into_iter()
            .chain((0..).map(|i| format!("t{i}")))
            .take(size)
            .collect();
        let vocab = Vocab::new(tokens)?;
        Ok(Self {
            sep: TokenId(1),
            eos: TokenId(0),
            vocab,
            seed,
            sharpness,
        })
    }

    fn key(&self, prefix: &[TokenId]) -> u64 {
        prefix
            .iter()
            .fold(self.seed ^ 0x9e37_79b9_7f4a_7c15, |h, t| {
                (h ^ (t.0 as u64 + 1))
                    .wrapping_mul(0x1000_0000_01b3)
                    .rotate_left(29)
            })
            ^ prefix.len() as u64
    }
}

impl Scorer for RandomScorer {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn separator(&self) -> TokenId {
        self.sep
    }

    fn eos(&self) -> TokenId {
        self.eos
    }

    fn next_token_distribution(
        &self,
        _src: &[String],
        _context: &[TokenId],
        prefix: &[TokenId],
    ) -> Result<Distribution> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key(prefix));
        let weights: Vec<f64> = (0..self.vocab.len())
            .map(|_| rng.gen_range(1e-3..1.0f64).powf(self.sharpness))
            .collect();
        let total: f64 = weights.iter().sum();
        Ok(Distribution::from_probs(
            &weights.iter().map(|w| w / total).collect::<Vec<_>>(),
        ))
    }
}
