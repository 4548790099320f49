use std::sync::atomic::{AtomicU64, Ordering};

use super::{TokenId, Vocab};
use crate::error::{Error, Result};

/// Next-token distribution over a scorer's vocabulary, stored as
/// log-probabilities in vocabulary order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    log_probs: Vec<f64>,
}

impl Distribution {
    pub fn from_log_probs(log_probs: Vec<f64>) -> Self {
        Self { log_probs }
    }

    /// Builds a distribution from plain probabilities; zero maps to `-inf`.
    pub fn from_probs(probs: &[f64]) -> Self {
        Self {
            log_probs: probs.iter().map(|p| p.ln()).collect(),
        }
    }

    pub fn log_prob(&self, id: TokenId) -> f64 {
        self.log_probs[id.index()]
    }

    pub fn prob(&self, id: TokenId) -> f64 {
        self.log_prob(id).exp()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.log_probs.iter().map(|lp| lp.exp()).sum()
    }

    /// Most probable token; ties go to the earliest vocabulary entry.
    pub fn argmax(&self) -> TokenId {
        let mut best = 0;
        for (i, &lp) in self.log_probs.iter().enumerate() {
            if lp > self.log_probs[best] {
                best = i;
            }
        }
        TokenId(best as u32)
    }
}

/// A decoded or scored target sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<String>,
    pub total_logprob: f64,
    pub token_logprobs: Vec<f64>,
}

impl Hypothesis {
    pub fn new(tokens: Vec<String>, token_logprobs: Vec<f64>) -> Self {
        debug_assert_eq!(tokens.len(), token_logprobs.len());
        let total_logprob = token_logprobs.iter().sum();
        Self {
            tokens,
            total_logprob,
            token_logprobs,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Bit-level equality, treating matching NaNs and infinities as equal.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
            && self.total_logprob.to_bits() == other.total_logprob.to_bits()
            && self.token_logprobs.len() == other.token_logprobs.len()
            && self
                .token_logprobs
                .iter()
                .zip(&other.token_logprobs)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// An autoregressive translation model.
///
/// `src` is the source window with sentences joined by
/// [`Scorer::source_separator`]. `context` holds the already fixed target
/// translations of the leading window sentences, each followed by the
/// separator. `prefix` is what has been generated so far for the remaining
/// sentences. Implementations must be deterministic.
pub trait Scorer: Sync {
    fn vocab(&self) -> &Vocab;

    fn separator(&self) -> TokenId;

    fn eos(&self) -> TokenId;

    fn source_separator(&self) -> &str {
        self.vocab().token(self.separator())
    }

    fn next_token_distribution(
        &self,
        src: &[String],
        context: &[TokenId],
        prefix: &[TokenId],
    ) -> Result<Distribution>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn separator(&self) -> TokenId {
        (**self).separator()
    }

    fn eos(&self) -> TokenId {
        (**self).eos()
    }

    fn source_separator(&self) -> &str {
        (**self).source_separator()
    }

    fn next_token_distribution(
        &self,
        src: &[String],
        context: &[TokenId],
        prefix: &[TokenId],
    ) -> Result<Distribution> {
        (**self).next_token_distribution(src, context, prefix)
    }
}

/// Wraps a scorer and counts forward passes.
pub struct CountingScorer<S> {
    inner: S,
    calls: AtomicU64,
}

impl<S: Scorer> CountingScorer<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: Scorer> Scorer for CountingScorer<S> {
    fn vocab(&self) -> &Vocab {
        self.inner.vocab()
    }

    fn separator(&self) -> TokenId {
        self.inner.separator()
    }

    fn eos(&self) -> TokenId {
        self.inner.eos()
    }

    fn source_separator(&self) -> &str {
        self.inner.source_separator()
    }

    fn next_token_distribution(
        &self,
        src: &[String],
        context: &[TokenId],
        prefix: &[TokenId],
    ) -> Result<Distribution> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.next_token_distribution(src, context, prefix)
    }
}

/// Joins source sentences into one window, separator between sentences.
pub fn join_source<S: AsRef<[String]>>(sentences: &[S], separator: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.push(separator.to_owned());
        }
        out.extend(s.as_ref().iter().cloned());
    }
    out
}

/// Formats fixed target context: every sentence is followed by a separator,
/// exactly as it would appear before the current sentence in a concatenated
/// training segment.
pub fn join_context<S: AsRef<[String]>>(sentences: &[S], separator: &str) -> Vec<String> {
    let mut out = Vec::new();
    for s in sentences {
        out.extend(s.as_ref().iter().cloned());
        out.push(separator.to_owned());
    }
    out
}

/// Scores `target` (which must end with the end token) token by token.
/// Impossible tokens give `-inf`, not an error.
pub fn score_sequence<S: Scorer + ?Sized>(
    scorer: &S,
    src: &[String],
    context: &[String],
    target: &[String],
) -> Result<Hypothesis> {
    let vocab = scorer.vocab();
    let context = vocab.encode(context)?;
    let target_ids = vocab.encode(target)?;
    score_sequence_ids(scorer, src, &context, &target_ids)
}

pub fn score_sequence_ids<S: Scorer + ?Sized>(
    scorer: &S,
    src: &[String],
    context: &[TokenId],
    target: &[TokenId],
) -> Result<Hypothesis> {
    if target.last() != Some(&scorer.eos()) {
        return Err(Error::InvalidInput(
            "scored target must end with the end token".into(),
        ));
    }
    let mut logprobs = Vec::with_capacity(target.len());
    for i in 0..target.len() {
        let dist = scorer.next_token_distribution(src, context, &target[..i])?;
        logprobs.push(dist.log_prob(target[i]));
    }
    Ok(Hypothesis::new(scorer.vocab().decode(target), logprobs))
}
