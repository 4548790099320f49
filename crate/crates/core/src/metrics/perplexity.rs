use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{join_source, score_sequence_ids, Scorer, TokenId};

/// Target context used when scoring a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// The evaluated translations of the preceding sentences.
    OwnContext,
    /// The references of the preceding sentences.
    ReferenceContext,
    /// The sentence alone, source and target.
    NoContext,
}

/// Summed log-probability and token count; add up across documents.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PerplexityStats {
    pub total_logprob: f64,
    pub tokens: u64,
}

impl PerplexityStats {
    pub fn add(&mut self, other: &Self) {
        self.total_logprob += other.total_logprob;
        self.tokens += other.tokens;
    }

    pub fn perplexity(&self) -> Result<f64> {
        if self.tokens == 0 {
            return Err(Error::NoTokens);
        }
        Ok((-self.total_logprob / self.tokens as f64).exp())
    }
}

/// Scores every target sentence (plus the end token) of one document.
pub fn perplexity_stats<S: Scorer + ?Sized>(
    scorer: &S,
    document: &Document,
    targets: &[Vec<String>],
    conditioning: Conditioning,
    window: usize,
) -> Result<PerplexityStats> {
    if targets.len() != document.len() {
        return Err(Error::LengthMismatch {
            what: "targets vs sentences",
            left: targets.len(),
            right: document.len(),
        });
    }
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    let vocab = scorer.vocab();
    let sep = scorer.separator();
    let mut stats = PerplexityStats::default();
    for i in 0..document.len() {
        let start = match conditioning {
            Conditioning::NoContext => i,
            _ => (i + 1).saturating_sub(window),
        };
        let sources: Vec<&[String]> = document.sentences[start..=i]
            .iter()
            .map(|s| s.src.as_slice())
            .collect();
        let src = join_source(&sources, scorer.source_separator());
        let mut context: Vec<TokenId> = Vec::new();
        for (sent, own) in document.sentences[start..i].iter().zip(&targets[start..i]) {
            let sentence = match conditioning {
                Conditioning::ReferenceContext => sent.reference.as_deref().ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "reference-context perplexity needs references (document {:?})",
                        document.doc_id
                    ))
                })?,
                _ => own.as_slice(),
            };
            for id in vocab.encode(sentence)? {
                if id != sep {
                    context.push(id);
                }
            }
            context.push(sep);
        }
        let mut target = vocab.encode(&targets[i])?;
        target.push(scorer.eos());
        let hyp = score_sequence_ids(scorer, &src, &context, &target)?;
        stats.total_logprob += hyp.total_logprob;
        stats.tokens += target.len() as u64;
    }
    Ok(stats)
}

/// `exp(-(sum log p) / tokens)` over all documents; `targets[d][i]` is the
/// translation of sentence `i` of document `d`.
pub fn perplexity<S: Scorer + ?Sized>(
    scorer: &S,
    documents: &[Document],
    targets: &[Vec<Vec<String>>],
    conditioning: Conditioning,
    window: usize,
) -> Result<f64> {
    if targets.len() != documents.len() {
        return Err(Error::LengthMismatch {
            what: "target documents vs documents",
            left: targets.len(),
            right: documents.len(),
        });
    }
    let mut stats = PerplexityStats::default();
    for (doc, t) in documents.iter().zip(targets) {
        stats.add(&perplexity_stats(scorer, doc, t, conditioning, window)?);
    }
    stats.perplexity()
}
