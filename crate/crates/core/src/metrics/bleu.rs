use std::collections::HashMap;

use crate::error::{Error, Result};

const MAX_ORDER: usize = 4;

/// Sufficient statistics of corpus BLEU; they add up across sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn sentence<T: AsRef<str>>(hyp: &[T], reference: &[T]) -> Self {
        let mut stats = Self {
            hyp_len: hyp.len() as u64,
            ref_len: reference.len() as u64,
            ..Self::default()
        };
        for n in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(reference, n);
            let hyp_counts = ngram_counts(hyp, n);
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
            stats.matches[n - 1] = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn add(&mut self, other: &Self) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// BLEU-4 with uniform weights and no smoothing, in [0, 1].
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.contains(&0) {
            return 0.0;
        }
        let log_precision: f64 = (0..MAX_ORDER)
            .map(|n| (self.matches[n] as f64 / self.totals[n] as f64).ln())
            .sum::<f64>()
            / MAX_ORDER as f64;
        let brevity = (1.0 - self.ref_len as f64 / self.hyp_len as f64).min(0.0);
        (log_precision + brevity).exp()
    }
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts
                .entry(gram.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU over pre-tokenized sentences.
pub fn bleu<T: AsRef<str>>(hypotheses: &[Vec<T>], references: &[Vec<T>]) -> Result<f64> {
    if hypotheses.len() != references.len() {
        return Err(Error::LengthMismatch {
            what: "hypotheses vs references",
            left: hypotheses.len(),
            right: references.len(),
        });
    }
    if references.is_empty() {
        return Err(Error::InvalidInput(
            "BLEU needs at least one reference".into(),
        ));
    }
    let mut stats = BleuStats::default();
    for (h, r) in hypotheses.iter().zip(references) {
        stats.add(&BleuStats::sentence(h, r));
    }
    Ok(stats.score())
}
