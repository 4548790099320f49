//! Serializable run reports and the metric computation shared by the
//! `decode`, `compare` and `evaluate` commands.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, WorldSpec};
use crate::error::{Error, Result};
use crate::metrics::{
    bleu, contrastive_accuracy, contrastive_items_from_corpus, perplexity, pronoun_f1,
    Conditioning, F1Report, PronounEvalSpec,
};
use crate::model::Scorer;
use crate::strategies::{DecodeResult, Diagnostic, StrategyId};

/// JSON has no infinities; non-finite values are written as strings.
pub mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Text("NaN".into())
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::custom(format!("not a number: {s:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(|x| to_repr(*x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?
                .into_iter()
                .map(from_repr)
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub strategy: String,
    pub window: usize,
    pub beam_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_beam: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    pub length_norm: bool,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunParams {
    pub fn strategy_id(&self) -> Result<StrategyId> {
        StrategyId::parse(&self.strategy, self.context_beam.unwrap_or(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentReport {
    pub doc_id: String,
    pub translations: Vec<Vec<String>>,
    #[serde(with = "real::vec")]
    pub sentence_logprobs: Vec<f64>,
    pub forward_passes: u64,
    #[serde(with = "real")]
    pub score: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl DocumentReport {
    pub fn new(doc_id: impl Into<String>, result: &DecodeResult) -> Self {
        Self {
            doc_id: doc_id.into(),
            translations: result
                .per_sentence
                .iter()
                .map(|h| h.tokens.clone())
                .collect(),
            sentence_logprobs: result
                .per_sentence
                .iter()
                .map(|h| h.total_logprob)
                .collect(),
            forward_passes: result.forward_passes,
            score: result.score,
            diagnostics: result.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    pub conditioning: Conditioning,
    #[serde(with = "real")]
    pub hypotheses: f64,
    #[serde(with = "real")]
    pub references: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<PerplexityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<F1Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formality: Option<F1Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrastive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub params: RunParams,
    pub documents: Vec<DocumentReport>,
    pub forward_passes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    pub wall_time_secs: f64,
}

impl RunReport {
    pub fn new(params: RunParams, documents: Vec<DocumentReport>, wall_time_secs: f64) -> Self {
        Self {
            forward_passes: documents.iter().map(|d| d.forward_passes).sum(),
            params,
            documents,
            metrics: None,
            wall_time_secs,
        }
    }

    pub fn translations(&self) -> Vec<Vec<Vec<String>>> {
        self.documents
            .iter()
            .map(|d| d.translations.clone())
            .collect()
    }

    /// Checks that the report covers exactly `corpus`, document by document.
    pub fn check_alignment(&self, corpus: &[Document]) -> Result<()> {
        if self.documents.len() != corpus.len() {
            return Err(Error::LengthMismatch {
                what: "report documents vs corpus documents",
                left: self.documents.len(),
                right: corpus.len(),
            });
        }
        for (r, d) in self.documents.iter().zip(corpus) {
            if r.doc_id != d.doc_id {
                return Err(Error::InvalidInput(format!(
                    "report document {:?} does not match corpus document {:?}",
                    r.doc_id, d.doc_id
                )));
            }
            if r.translations.len() != d.len() {
                return Err(Error::LengthMismatch {
                    what: "report sentences vs corpus sentences",
                    left: r.translations.len(),
                    right: d.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ppl,
    Bleu,
    Gender,
    Formality,
    Contrastive,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Ppl,
        Metric::Bleu,
        Metric::Gender,
        Metric::Formality,
        Metric::Contrastive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ppl => "ppl",
            Metric::Bleu => "bleu",
            Metric::Gender => "gender",
            Metric::Formality => "formality",
            Metric::Contrastive => "contrastive",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown metric {s:?}")))
    }
}

/// Hypothesis perplexity is conditioned the way the strategy saw its input:
/// strategies without left context are scored sentence by sentence, the
/// others on their own preceding translations.
pub fn perplexity_conditioning(strategy: StrategyId) -> Conditioning {
    if strategy.uses_left_context() {
        Conditioning::OwnContext
    } else {
        Conditioning::NoContext
    }
}

/// Computes `metrics` for `hypotheses` (one token list per corpus sentence).
/// Every metric except contrastive accuracy needs references.
#[allow(clippy::too_many_arguments)]
pub fn compute_metrics<S: Scorer + ?Sized>(
    scorer: &S,
    world: &WorldSpec,
    corpus: &[Document],
    hypotheses: &[Vec<Vec<String>>],
    strategy: StrategyId,
    window: usize,
    min_support: u64,
    metrics: &[Metric],
) -> Result<MetricsReport> {
    let mut out = MetricsReport::default();
    let needs_refs = metrics.iter().any(|m| *m != Metric::Contrastive);
    if needs_refs {
        if let Some(d) = corpus.iter().find(|d| !d.has_references()) {
            return Err(Error::MissingReferences {
                strategy: "evaluation".into(),
                doc_id: d.doc_id.clone(),
            });
        }
    }
    let references: Vec<Vec<Vec<String>>> = corpus
        .iter()
        .map(|d| {
            d.sentences
                .iter()
                .map(|s| s.reference.clone().unwrap_or_default())
                .collect()
        })
        .collect();
    for metric in metrics {
        match metric {
            Metric::Ppl => {
                let conditioning = perplexity_conditioning(strategy);
                out.perplexity = Some(PerplexityReport {
                    conditioning,
                    hypotheses: perplexity(scorer, corpus, hypotheses, conditioning, window)?,
                    references: perplexity(
                        scorer,
                        corpus,
                        &references,
                        Conditioning::ReferenceContext,
                        window,
                    )?,
                });
            }
            Metric::Bleu => {
                let hyps: Vec<Vec<String>> = hypotheses.iter().flatten().cloned().collect();
                let refs: Vec<Vec<String>> = references.iter().flatten().cloned().collect();
                out.bleu = Some(bleu(&hyps, &refs)?);
            }
            Metric::Gender => {
                let spec = PronounEvalSpec::gender(world);
                out.gender = Some(pronoun_f1(corpus, hypotheses, &spec, min_support)?);
            }
            Metric::Formality => {
                let spec = PronounEvalSpec::formality(world);
                out.formality = Some(pronoun_f1(corpus, hypotheses, &spec, min_support)?);
            }
            Metric::Contrastive => {
                let spec = PronounEvalSpec::gender(world);
                let items = contrastive_items_from_corpus(corpus, &spec, window, &world.separator)?;
                out.contrastive = Some(contrastive_accuracy(scorer, &items)?);
            }
        }
    }
    Ok(out)
}
