use serde::{Deserialize, Serialize};

use crate::model::Hypothesis;

/// Mismatch between the separators in a segment hypothesis and the number
/// of sentences it should contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    SeparatorDeficit,
    SeparatorSurplus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub sentence: usize,
    pub kind: DiagnosticKind,
}

/// Splits a segment on `separator` into exactly `expected_parts` parts.
///
/// A trailing `eos` is dropped. Missing parts are padded with empty ones at
/// the end; surplus parts are merged into the last expected part with their
/// separators kept.
pub fn split_by_separator<T: PartialEq + Clone>(
    tokens: &[T],
    expected_parts: usize,
    separator: &T,
    eos: &T,
) -> (Vec<Vec<T>>, Option<DiagnosticKind>) {
    let (parts, diag) = split_items(tokens, expected_parts, |t| t == separator, |t| t == eos);
    (
        parts
            .into_iter()
            .map(|p| p.into_iter().cloned().collect())
            .collect(),
        diag,
    )
}

/// [`split_by_separator`] on a hypothesis, carrying the per-token
/// log-probabilities along. Separators and the end token are not part of
/// any returned sentence, except separators re-inserted by a surplus merge.
pub fn split_hypothesis(
    hyp: &Hypothesis,
    expected_parts: usize,
    separator: &str,
    eos: &str,
) -> (Vec<Hypothesis>, Option<DiagnosticKind>) {
    let items: Vec<(&String, f64)> = hyp
        .tokens
        .iter()
        .zip(hyp.token_logprobs.iter().copied())
        .collect();
    let (parts, diag) = split_items(&items, expected_parts, |t| t.0 == separator, |t| t.0 == eos);
    let parts = parts
        .into_iter()
        .map(|p| {
            let (tokens, lps): (Vec<String>, Vec<f64>) =
                p.into_iter().map(|&(t, lp)| (t.clone(), lp)).unzip();
            Hypothesis::new(tokens, lps)
        })
        .collect();
    (parts, diag)
}

fn split_items<T>(
    items: &[T],
    expected_parts: usize,
    is_sep: impl Fn(&T) -> bool,
    is_eos: impl Fn(&T) -> bool,
) -> (Vec<Vec<&T>>, Option<DiagnosticKind>) {
    let expected = expected_parts.max(1);
    let body = match items.last() {
        Some(last) if is_eos(last) => &items[..items.len() - 1],
        _ => items,
    };
    let mut parts: Vec<Vec<&T>> = vec![Vec::new()];
    let mut seps: Vec<&T> = Vec::new();
    for item in body {
        if is_sep(item) {
            seps.push(item);
            parts.push(Vec::new());
        } else {
            parts.last_mut().unwrap().push(item);
        }
    }
    match parts.len().cmp(&expected) {
        std::cmp::Ordering::Equal => (parts, None),
        std::cmp::Ordering::Less => {
            parts.resize_with(expected, Vec::new);
            (parts, Some(DiagnosticKind::SeparatorDeficit))
        }
        std::cmp::Ordering::Greater => {
            let surplus = parts.split_off(expected);
            let last = parts.last_mut().unwrap();
            for (extra, sep) in surplus.into_iter().zip(&seps[expected - 1..]) {
                last.push(sep);
                last.extend(extra);
            }
            (parts, Some(DiagnosticKind::SeparatorSurplus))
        }
    }
}
