use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Gender, Register, WorldSpec};
use crate::error::{Error, Result};

/// Classes with fewer instances are left out of the macro average.
pub const DEFAULT_MIN_SUPPORT: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PronounCategory {
    Gender,
    Formality,
}

/// Word lists defining one pronoun phenomenon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounEvalSpec {
    pub category: PronounCategory,
    /// Source tokens that make a sentence eligible.
    pub src_triggers: BTreeSet<String>,
    /// Target token to class label.
    pub class_map: BTreeMap<String, String>,
}

impl PronounEvalSpec {
    pub fn new(
        category: PronounCategory,
        src_triggers: BTreeSet<String>,
        class_map: BTreeMap<String, String>,
    ) -> Result<Self> {
        let classes: BTreeSet<&String> = class_map.values().collect();
        if classes.len() < 2 || src_triggers.is_empty() {
            return Err(Error::InvalidInput(
                "pronoun evaluation needs triggers and at least two classes".into(),
            ));
        }
        Ok(Self {
            category,
            src_triggers,
            class_map,
        })
    }

    /// Third-person pronoun gender: classes `M`, `F`, `N`.
    pub fn gender(world: &WorldSpec) -> Self {
        Self {
            category: PronounCategory::Gender,
            src_triggers: BTreeSet::from([world.pronoun_src.clone()]),
            class_map: Gender::ALL
                .iter()
                .map(|g| (world.pronoun(*g).to_owned(), format!("{g:?}")))
                .collect(),
        }
    }

    /// Second-person register: classes `formal`, `informal`.
    pub fn formality(world: &WorldSpec) -> Self {
        Self {
            category: PronounCategory::Formality,
            src_triggers: BTreeSet::from([world.formality_src.clone()]),
            class_map: [
                (Register::Formal, "formal"),
                (Register::Informal, "informal"),
            ]
            .iter()
            .map(|(r, label)| (world.formality(*r).to_owned(), (*label).to_owned()))
            .collect(),
        }
    }

    pub fn classes(&self) -> BTreeSet<&str> {
        self.class_map.values().map(String::as_str).collect()
    }

    pub fn class_of(&self, token: &str) -> Option<&str> {
        self.class_map.get(token).map(String::as_str)
    }

    /// First target token (in map order) carrying `class`.
    pub fn token_for(&self, class: &str) -> Option<&str> {
        self.class_map
            .iter()
            .find(|(_, c)| *c == class)
            .map(|(t, _)| t.as_str())
    }

    pub(crate) fn trigger_count(&self, src: &[String]) -> usize {
        src.iter()
            .filter(|t| self.src_triggers.contains(*t))
            .count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub per_class: BTreeMap<String, ClassScores>,
    /// Mean F1 over the classes with at least `min_support` instances; 0
    /// when there are none.
    pub macro_f1: f64,
    /// F1 of the pooled counts over all classes.
    pub micro_f1: f64,
    pub instances: u64,
    pub min_support: u64,
    pub macro_classes: Vec<String>,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
    support: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Pronoun translation F1 against the references.
///
/// A sentence yields instances only when its source has a trigger token and
/// its reference has class tokens; it yields `min(triggers, reference class
/// tokens)` of them. Instance `k` takes its true class from the `k`-th class
/// token of the reference and its prediction from the `k`-th class token of
/// the hypothesis (if any).
pub fn pronoun_f1(
    documents: &[Document],
    hypotheses: &[Vec<Vec<String>>],
    spec: &PronounEvalSpec,
    min_support: u64,
) -> Result<F1Report> {
    if hypotheses.len() != documents.len() {
        return Err(Error::LengthMismatch {
            what: "hypothesis documents vs documents",
            left: hypotheses.len(),
            right: documents.len(),
        });
    }
    let mut counts: BTreeMap<&str, Counts> = spec
        .classes()
        .into_iter()
        .map(|c| (c, Counts::default()))
        .collect();
    let mut instances = 0;
    for (doc, hyps) in documents.iter().zip(hypotheses) {
        if hyps.len() != doc.len() {
            return Err(Error::LengthMismatch {
                what: "hypotheses vs sentences",
                left: hyps.len(),
                right: doc.len(),
            });
        }
        for (sentence, hyp) in doc.sentences.iter().zip(hyps) {
            let Some(reference) = &sentence.reference else {
                continue;
            };
            let triggers = spec.trigger_count(&sentence.src);
            if triggers == 0 {
                continue;
            }
            let truth: Vec<&str> = reference.iter().filter_map(|t| spec.class_of(t)).collect();
            let predicted: Vec<&str> = hyp.iter().filter_map(|t| spec.class_of(t)).collect();
            for (k, &gold) in truth.iter().take(triggers).enumerate() {
                instances += 1;
                counts.get_mut(gold).unwrap().support += 1;
                match predicted.get(k) {
                    Some(&p) if p == gold => counts.get_mut(gold).unwrap().tp += 1,
                    Some(&p) => {
                        counts.get_mut(gold).unwrap().fn_ += 1;
                        counts.get_mut(p).unwrap().fp += 1;
                    }
                    None => counts.get_mut(gold).unwrap().fn_ += 1,
                }
            }
        }
    }

    let mut per_class = BTreeMap::new();
    let mut macro_classes = Vec::new();
    let mut macro_sum = 0.0;
    let mut pooled = Counts::default();
    for (class, c) in &counts {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let scores = ClassScores {
            precision,
            recall,
            f1: f1(precision, recall),
            support: c.support,
        };
        if c.support >= min_support && c.support > 0 {
            macro_classes.push((*class).to_owned());
            macro_sum += scores.f1;
        }
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn_ += c.fn_;
        per_class.insert((*class).to_owned(), scores);
    }
    let macro_f1 = if macro_classes.is_empty() {
        0.0
    } else {
        macro_sum / macro_classes.len() as f64
    };
    let micro_f1 = f1(
        ratio(pooled.tp, pooled.tp + pooled.fp),
        ratio(pooled.tp, pooled.tp + pooled.fn_),
    );
    Ok(F1Report {
        per_class,
        macro_f1,
        micro_f1,
        instances,
        min_support,
        macro_classes,
    })
}
