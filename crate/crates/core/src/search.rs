//! Token-level beam search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Hypothesis, Scorer, TokenId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamParams {
    pub beam_size: usize,
    /// Maximum hypothesis length including the end token. `None` derives a
    /// generous bound from the source window.
    pub max_len: Option<usize>,
    /// Rank finished hypotheses by log-probability per token instead of the
    /// raw total. Pruning always uses raw totals.
    pub length_norm: bool,
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            beam_size: 12,
            max_len: None,
            length_norm: true,
        }
    }
}

impl BeamParams {
    pub fn new(beam_size: usize) -> Self {
        Self {
            beam_size,
            ..Self::default()
        }
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = Some(max_len);
        self
    }

    pub fn with_length_norm(mut self, on: bool) -> Self {
        self.length_norm = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_size == 0 {
            return Err(Error::InvalidInput("beam size must be at least 1".into()));
        }
        if self.max_len == Some(0) {
            return Err(Error::InvalidInput("max_len must be at least 1".into()));
        }
        Ok(())
    }

    /// `2 * |src| + sentences + 1` unless set explicitly.
    pub fn resolve_max_len(&self, src: &[String], separator: &str) -> usize {
        self.max_len.unwrap_or_else(|| {
            let sentences = 1 + src.iter().filter(|t| *t == separator).count();
            2 * src.len() + sentences + 1
        })
    }
}

#[derive(Clone)]
struct Row {
    ids: Vec<TokenId>,
    logprobs: Vec<f64>,
    score: f64,
    live: bool,
}

impl Row {
    fn extended(&self, tok: TokenId, lp: f64) -> Row {
        let mut ids = Vec::with_capacity(self.ids.len() + 1);
        ids.extend_from_slice(&self.ids);
        ids.push(tok);
        let mut logprobs = Vec::with_capacity(self.logprobs.len() + 1);
        logprobs.extend_from_slice(&self.logprobs);
        logprobs.push(lp);
        Row {
            ids,
            logprobs,
            score: self.score + lp,
            live: true,
        }
    }
}

struct Candidate {
    row: usize,
    rank: usize,
    tok: TokenId,
    lp: f64,
    score: f64,
}

/// Beam search over `scorer`, returning up to `beam_size` finished
/// hypotheses, best first.
///
/// The beam is a fixed batch of `beam_size` rows. Rows without a live
/// hypothesis (at the first step, or when fewer candidates exist than rows)
/// are padding: they still go through the scorer, as in batched decoding,
/// but contribute no candidates. Every step therefore costs exactly
/// `beam_size` forward passes.
///
/// Each step keeps the best `beam_size` candidates that do not end in the end
/// token; every end-terminated candidate goes to the finished pool. The search
/// stops once the best finished hypothesis beats every live one on raw
/// log-probability (no live hypothesis can overtake it), or at `max_len`,
/// where live rows are closed with the end token.
pub fn beam_search<S: Scorer + ?Sized>(
    scorer: &S,
    src: &[String],
    context: &[String],
    params: &BeamParams,
) -> Result<Vec<Hypothesis>> {
    let context = scorer.vocab().encode(context)?;
    beam_search_ids(scorer, src, &context, params)
}

pub(crate) fn beam_search_ids<S: Scorer + ?Sized>(
    scorer: &S,
    src: &[String],
    context: &[TokenId],
    params: &BeamParams,
) -> Result<Vec<Hypothesis>> {
    params.validate()?;
    let width = params.beam_size;
    let max_len = params.resolve_max_len(src, scorer.source_separator());
    let eos = scorer.eos();
    let vocab = scorer.vocab();

    let start = Row {
        ids: Vec::new(),
        logprobs: Vec::new(),
        score: 0.0,
        live: true,
    };
    let mut rows = padded(vec![start], width);
    let mut finished: Vec<Row> = Vec::new();

    for step in 1..=max_len {
        let closing = step == max_len;
        let mut order: Vec<usize> = (0..rows.len()).filter(|&r| rows[r].live).collect();
        order.sort_by(|&a, &b| rows[a].ids.cmp(&rows[b].ids));
        let mut rank = vec![0; rows.len()];
        for (i, &r) in order.iter().enumerate() {
            rank[r] = i;
        }

        let mut candidates = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let dist = scorer.next_token_distribution(src, context, &row.ids)?;
            if !row.live {
                continue;
            }
            finished.push(row.extended(eos, dist.log_prob(eos)));
            if closing {
                continue;
            }
            for tok in vocab.ids().filter(|&t| t != eos) {
                let lp = dist.log_prob(tok);
                candidates.push(Candidate {
                    row: r,
                    rank: rank[r],
                    tok,
                    lp,
                    score: row.score + lp,
                });
            }
        }
        if closing || candidates.is_empty() {
            break;
        }

        let by_score = |a: &Candidate, b: &Candidate| {
            b.score
                .total_cmp(&a.score)
                .then(a.rank.cmp(&b.rank))
                .then(a.tok.cmp(&b.tok))
        };
        if candidates.len() > width {
            candidates.select_nth_unstable_by(width - 1, by_score);
            candidates.truncate(width);
        }
        candidates.sort_by(by_score);
        let next: Vec<Row> = candidates
            .iter()
            .map(|c| rows[c.row].extended(c.tok, c.lp))
            .collect();
        rows = padded(next, width);

        let best_live = rows[0].score;
        let best_done = finished
            .iter()
            .map(|f| f.score)
            .fold(f64::NEG_INFINITY, f64::max);
        if best_done > best_live {
            break;
        }
    }

    let key = |row: &Row| {
        if params.length_norm {
            row.score / row.ids.len() as f64
        } else {
            row.score
        }
    };
    finished.sort_by(|a, b| key(b).total_cmp(&key(a)).then_with(|| a.ids.cmp(&b.ids)));
    finished.truncate(width);
    Ok(finished
        .into_iter()
        .map(|row| Hypothesis::new(vocab.decode(&row.ids), row.logprobs))
        .collect())
}

/// Fills the batch up to `width` rows with inactive copies of the first row.
fn padded(mut rows: Vec<Row>, width: usize) -> Vec<Row> {
    let filler = Row {
        live: false,
        ..rows[0].clone()
    };
    rows.resize(width, filler);
    rows
}

/// Normalized or raw ranking score of a finished hypothesis.
pub fn ranking_score(hyp: &Hypothesis, length_norm: bool) -> f64 {
    if length_norm && !hyp.tokens.is_empty() {
        hyp.total_logprob / hyp.tokens.len() as f64
    } else {
        hyp.total_logprob
    }
}
