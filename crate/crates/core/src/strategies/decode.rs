use std::ops::Range;

use super::split::{split_hypothesis, Diagnostic};
use super::StrategyId;
use crate::corpus::window::window_ranges;
use crate::corpus::{Document, OutputSide, WindowMode};
use crate::error::{Error, Result};
use crate::model::{join_source, CountingScorer, Hypothesis, Scorer, TokenId};
use crate::search::{beam_search_ids, BeamParams};

/// Translation of one document under one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// One hypothesis per document sentence, without separators or end
    /// token.
    pub per_sentence: Vec<Hypothesis>,
    /// Scorer calls made during the run.
    pub forward_passes: u64,
    pub diagnostics: Vec<Diagnostic>,
    /// Sum of the total log-probabilities of the segment hypotheses the
    /// output was taken from.
    pub score: f64,
}

impl DecodeResult {
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.per_sentence.len() == other.per_sentence.len()
            && self
                .per_sentence
                .iter()
                .zip(&other.per_sentence)
                .all(|(a, b)| a.bitwise_eq(b))
    }
}

/// Translates `document` with `strategy` and a window of `window` sentences
/// (the current one plus `window - 1` neighbours).
pub fn decode_document<S: Scorer + ?Sized>(
    strategy: StrategyId,
    scorer: &S,
    document: &Document,
    window: usize,
    beam: &BeamParams,
) -> Result<DecodeResult> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    beam.validate()?;
    if let StrategyId::DocTransBeam { context_beam: 0 } = strategy {
        return Err(Error::InvalidInput(
            "context beam must be at least 1".into(),
        ));
    }
    if strategy == StrategyId::Cheating && !document.has_references() {
        return Err(Error::MissingReferences {
            strategy: strategy.name().into(),
            doc_id: document.doc_id.clone(),
        });
    }

    let counter = CountingScorer::new(scorer);
    let mut run = Run {
        scorer: &counter,
        doc: document,
        window,
        beam,
        diagnostics: Vec::new(),
        score: 0.0,
    };
    let per_sentence = match strategy {
        StrategyId::SentenceLevel | StrategyId::NoContext => run.sentence_level()?,
        StrategyId::FullSegment => run.windowed(WindowMode::NonOverlapping)?,
        StrategyId::LastSentence => run.windowed(WindowMode::SlidingLast)?,
        StrategyId::FirstSentence => run.windowed(WindowMode::SlidingFirst)?,
        StrategyId::TwoPass => run.two_pass()?,
        StrategyId::DocTrans => run.doc_trans()?,
        StrategyId::Cheating => run.cheating()?,
        StrategyId::DocTransBeam { context_beam } => run.doc_trans_beam(context_beam)?,
    };
    Ok(DecodeResult {
        per_sentence,
        forward_passes: counter.calls(),
        diagnostics: run.diagnostics,
        score: run.score,
    })
}

struct Run<'a, S: Scorer> {
    scorer: &'a S,
    doc: &'a Document,
    window: usize,
    beam: &'a BeamParams,
    diagnostics: Vec<Diagnostic>,
    score: f64,
}

impl<S: Scorer> Run<'_, S> {
    /// First sentence of the (head-truncated) window ending at `i`.
    fn window_start(&self, i: usize) -> usize {
        (i + 1).saturating_sub(self.window)
    }

    /// Beam search over the source sentences `members`, with `context`
    /// holding fixed translations of the leading members.
    fn segment(&self, members: Range<usize>, context: &[&[String]]) -> Result<Vec<Hypothesis>> {
        let sources: Vec<&[String]> = self.doc.sentences[members]
            .iter()
            .map(|s| s.src.as_slice())
            .collect();
        let src = join_source(&sources, self.scorer.source_separator());
        let ctx = self.context_ids(context)?;
        beam_search_ids(self.scorer, &src, &ctx, self.beam)
    }

    /// Every context sentence followed by exactly one separator. Stray
    /// separators inside a sentence (from a surplus merge) are dropped so the
    /// sentence count stays right.
    fn context_ids(&self, context: &[&[String]]) -> Result<Vec<TokenId>> {
        let vocab = self.scorer.vocab();
        let sep = self.scorer.separator();
        let mut out = Vec::new();
        for sentence in context {
            for tok in sentence.iter() {
                let id = vocab.id(tok)?;
                if id != sep {
                    out.push(id);
                }
            }
            out.push(sep);
        }
        Ok(out)
    }

    fn split(&mut self, hyp: &Hypothesis, parts: usize, at: usize) -> Vec<Hypothesis> {
        let vocab = self.scorer.vocab();
        let (parts, diag) = split_hypothesis(
            hyp,
            parts,
            vocab.token(self.scorer.separator()),
            vocab.token(self.scorer.eos()),
        );
        if let Some(kind) = diag {
            self.diagnostics.push(Diagnostic { sentence: at, kind });
        }
        parts
    }

    /// Decodes sentence `i` given context translations of its predecessors
    /// inside the window.
    fn sentence_in_context(&mut self, i: usize, context: &[&[String]]) -> Result<Hypothesis> {
        let hyps = self.segment(i - context.len()..i + 1, context)?;
        let best = &hyps[0];
        self.score += best.total_logprob;
        Ok(self.split(best, 1, i).remove(0))
    }

    fn sentence_level(&mut self) -> Result<Vec<Hypothesis>> {
        (0..self.doc.len())
            .map(|i| self.sentence_in_context(i, &[]))
            .collect()
    }

    fn windowed(&mut self, mode: WindowMode) -> Result<Vec<Hypothesis>> {
        let mut out = vec![None; self.doc.len()];
        for (center, members, side) in window_ranges(self.doc.len(), self.window, mode)? {
            let hyps = self.segment(members.clone(), &[])?;
            let best = &hyps[0];
            self.score += best.total_logprob;
            let at = if side == OutputSide::All {
                members.end - 1
            } else {
                center
            };
            let outputs = match side {
                OutputSide::All => members.clone(),
                OutputSide::Last => members.end - 1..members.end,
                OutputSide::First => members.start..members.start + 1,
            };
            let parts = self.split(best, members.len(), at);
            for (idx, part) in members.zip(parts) {
                if outputs.contains(&idx) {
                    out[idx] = Some(part);
                }
            }
        }
        Ok(out
            .into_iter()
            .map(|h| h.expect("windows cover every sentence"))
            .collect())
    }

    fn two_pass(&mut self) -> Result<Vec<Hypothesis>> {
        let first = self.sentence_level()?;
        self.score = 0.0;
        (0..self.doc.len())
            .map(|i| {
                let ctx: Vec<&[String]> = first[self.window_start(i)..i]
                    .iter()
                    .map(|h| h.tokens.as_slice())
                    .collect();
                self.sentence_in_context(i, &ctx)
            })
            .collect()
    }

    fn doc_trans(&mut self) -> Result<Vec<Hypothesis>> {
        let mut chosen: Vec<Hypothesis> = Vec::with_capacity(self.doc.len());
        for i in 0..self.doc.len() {
            let ctx: Vec<&[String]> = chosen[self.window_start(i)..i]
                .iter()
                .map(|h| h.tokens.as_slice())
                .collect();
            let hyp = self.sentence_in_context(i, &ctx)?;
            chosen.push(hyp);
        }
        Ok(chosen)
    }

    fn cheating(&mut self) -> Result<Vec<Hypothesis>> {
        let doc = self.doc;
        (0..doc.len())
            .map(|i| {
                let ctx: Vec<&[String]> = doc.sentences[self.window_start(i)..i]
                    .iter()
                    .map(|s| s.reference.as_deref().expect("checked up front"))
                    .collect();
                self.sentence_in_context(i, &ctx)
            })
            .collect()
    }

    /// Keeps `width` context streams. Each stream is extended by its top
    /// `width` sentence hypotheses, streams are ranked by the summed raw
    /// log-probability of their sentences and pruned back to `width`. As in
    /// the token-level beam, missing streams are padding that is still
    /// decoded.
    fn doc_trans_beam(&mut self, width: usize) -> Result<Vec<Hypothesis>> {
        let vocab = self.scorer.vocab();
        let mut streams = pad_streams(vec![Stream::default()], width);
        for i in 0..self.doc.len() {
            let start = self.window_start(i);
            let mut candidates: Vec<(usize, Hypothesis, Vec<TokenId>, f64)> = Vec::new();
            for (s, stream) in streams.iter().enumerate() {
                let ctx: Vec<&[String]> = stream.sentences[start..i]
                    .iter()
                    .map(|h| h.tokens.as_slice())
                    .collect();
                let hyps = self.segment(start..i + 1, &ctx)?;
                if !stream.live {
                    continue;
                }
                for hyp in hyps.into_iter().take(width) {
                    let ids = vocab.encode(&hyp.tokens)?;
                    let score = stream.score + hyp.total_logprob;
                    candidates.push((s, hyp, ids, score));
                }
            }
            candidates.sort_by(|a, b| {
                b.3.total_cmp(&a.3)
                    .then_with(|| streams[a.0].ids.cmp(&streams[b.0].ids))
                    .then_with(|| a.2.cmp(&b.2))
            });
            candidates.truncate(width);
            let next = candidates
                .into_iter()
                .map(|(s, hyp, ids, score)| {
                    let mut stream = streams[s].clone();
                    let vocab = self.scorer.vocab();
                    let (mut parts, diag) = split_hypothesis(
                        &hyp,
                        1,
                        vocab.token(self.scorer.separator()),
                        vocab.token(self.scorer.eos()),
                    );
                    if let Some(kind) = diag {
                        stream.diagnostics.push(Diagnostic { sentence: i, kind });
                    }
                    stream.sentences.push(parts.remove(0));
                    stream.ids.push(ids);
                    stream.score = score;
                    stream
                })
                .collect();
            streams = pad_streams(next, width);
        }
        let best = streams.swap_remove(0);
        self.score = best.score;
        self.diagnostics.extend(best.diagnostics);
        Ok(best.sentences)
    }
}

#[derive(Clone)]
struct Stream {
    sentences: Vec<Hypothesis>,
    ids: Vec<Vec<TokenId>>,
    diagnostics: Vec<Diagnostic>,
    score: f64,
    live: bool,
}

impl Default for Stream {
    fn default() -> Self {
        Self {
            sentences: Vec::new(),
            ids: Vec::new(),
            diagnostics: Vec::new(),
            score: 0.0,
            live: true,
        }
    }
}

fn pad_streams(mut streams: Vec<Stream>, width: usize) -> Vec<Stream> {
    let filler = Stream {
        live: false,
        ..streams[0].clone()
    };
    streams.resize(width, filler);
    streams
}
