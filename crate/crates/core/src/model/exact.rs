use super::{Hypothesis, Scorer, TokenId};
use crate::error::{Error, Result};

/// Upper bound on `|V|^max_len` accepted by [`exact_decode`].
pub const EXACT_DECODE_LIMIT: u64 = 10_000_000;

struct Best {
    ids: Vec<TokenId>,
    logprobs: Vec<f64>,
    score: f64,
}

/// Exhaustive search over every end-terminated sequence of at most
/// `max_len` tokens. Returns the highest total log-probability; ties go to
/// the lexicographically smallest sequence in vocabulary order.
pub fn exact_decode<S: Scorer + ?Sized>(
    scorer: &S,
    src: &[String],
    context: &[String],
    max_len: usize,
) -> Result<Hypothesis> {
    let vocab_len = scorer.vocab().len();
    let space = (vocab_len as u64).checked_pow(max_len as u32);
    if max_len == 0 || space.is_none_or(|s| s > EXACT_DECODE_LIMIT) {
        return Err(Error::SearchSpaceTooLarge {
            vocab: vocab_len,
            max_len,
            limit: EXACT_DECODE_LIMIT,
        });
    }
    let context = scorer.vocab().encode(context)?;
    let mut best = None;
    let mut ids = Vec::with_capacity(max_len);
    let mut logprobs = Vec::with_capacity(max_len);
    expand(
        scorer,
        src,
        &context,
        max_len,
        &mut ids,
        &mut logprobs,
        0.0,
        &mut best,
    )?;
    let best = best.expect("at least the bare end token is enumerated");
    Ok(Hypothesis::new(
        scorer.vocab().decode(&best.ids),
        best.logprobs,
    ))
}

#[allow(clippy::too_many_arguments)]
fn expand<S: Scorer + ?Sized>(
    scorer: &S,
    src: &[String],
    context: &[TokenId],
    max_len: usize,
    ids: &mut Vec<TokenId>,
    logprobs: &mut Vec<f64>,
    score: f64,
    best: &mut Option<Best>,
) -> Result<()> {
    let eos = scorer.eos();
    let dist = scorer.next_token_distribution(src, context, ids)?;

    let done = score + dist.log_prob(eos);
    ids.push(eos);
    let better = match best {
        None => true,
        Some(b) => done > b.score || (done == b.score && *ids < b.ids),
    };
    if better {
        let mut lps = logprobs.clone();
        lps.push(dist.log_prob(eos));
        *best = Some(Best {
            ids: ids.clone(),
            logprobs: lps,
            score: done,
        });
    }
    ids.pop();

    if ids.len() + 1 < max_len {
        for tok in scorer.vocab().ids().filter(|&t| t != eos) {
            let lp = dist.log_prob(tok);
            ids.push(tok);
            logprobs.push(lp);
            expand(
                scorer,
                src,
                context,
                max_len,
                ids,
                logprobs,
                score + lp,
                best,
            )?;
            ids.pop();
            logprobs.pop();
        }
    }
    Ok(())
}
