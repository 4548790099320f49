use super::StrategyId;

/// Exact number of forward passes [`decode_document`](super::decode_document)
/// makes on a document whose sentences have the given source lengths, for a
/// position-synchronous scorer (one target token per source token, a
/// separator between sentences, an end token) and beam width `beam_size`.
///
/// A segment of `s` sentences with lengths `l_1..l_s` takes
/// `sum(l_j + 1)` beam steps of `beam_size` scorer calls each.
pub fn predicted_document_cost(
    strategy: StrategyId,
    sentence_lengths: &[usize],
    window: usize,
    beam_size: usize,
) -> u64 {
    let n = sentence_lengths.len();
    let steps = |r: std::ops::Range<usize>| -> u64 {
        sentence_lengths[r].iter().map(|&l| l as u64 + 1).sum()
    };
    let w = window.max(1);
    let sentence_steps = steps(0..n);
    let total_steps = match strategy {
        StrategyId::SentenceLevel
        | StrategyId::NoContext
        | StrategyId::FullSegment
        | StrategyId::DocTrans
        | StrategyId::Cheating => sentence_steps,
        StrategyId::TwoPass => 2 * sentence_steps,
        StrategyId::DocTransBeam { context_beam } => context_beam as u64 * sentence_steps,
        StrategyId::LastSentence => (0..n)
            .map(|i| steps((i + 1).saturating_sub(w)..i + 1))
            .sum(),
        StrategyId::FirstSentence => (0..n).map(|i| steps(i..(i + w).min(n))).sum(),
    };
    beam_size as u64 * total_steps
}

/// [`predicted_document_cost`] for `sentences` sentences of `length` tokens
/// each.
pub fn predicted_cost(
    strategy: StrategyId,
    sentences: usize,
    length: usize,
    window: usize,
    beam_size: usize,
) -> u64 {
    predicted_document_cost(strategy, &vec![length; sentences], window, beam_size)
}
