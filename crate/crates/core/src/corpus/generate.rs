use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Annotation, Document, Gender, Register, Sentence, WorldSpec};
use crate::error::{Error, Result};
use crate::model::{join_source, Scorer, SyntheticModel, TokenId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub n_docs: usize,
    pub sentences_per_doc: usize,
    pub sentence_len: usize,
    /// Context window the corpus is built for: every pronoun's antecedent
    /// lies 1 to `window - 1` sentences earlier.
    pub window: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_docs: 100,
            sentences_per_doc: 6,
            sentence_len: 6,
            window: 3,
        }
    }
}

/// Noise admitted at one reference position. Pronoun and second-person
/// tokens are never noise, so every annotated class stays visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Any,
    /// Holds the referent noun: noise must be a noun of the same gender.
    Referent(Gender),
    /// Between a referent and its pronoun: noise nouns must share its gender.
    Pending(Gender),
}

impl Slot {
    fn admits(self, noun: Option<Gender>) -> bool {
        match (self, noun) {
            (Slot::Any, _) => true,
            (Slot::Referent(g) | Slot::Pending(g), Some(n)) => g == n,
            (Slot::Referent(_), None) => false,
            (Slot::Pending(_), None) => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Ends with the noun a later pronoun refers to.
    Antecedent,
    /// Between antecedent and pronoun; no nouns.
    Gap,
    /// Holds the pronoun and no nouns.
    Pronoun,
    Free,
}

/// Generates a synthetic corpus for `spec`, fully determined by `seed`.
///
/// Source sentences are built from distinct lexicon words. Each document has
/// a register (formal documents mention the marker word in their first
/// sentence and occasionally later) and a chain of pronoun episodes: an
/// antecedent sentence whose last noun is the referent, up to `window - 2`
/// noun-free gap sentences, and a noun-free sentence with the pronoun.
///
/// References are sampled token by token from the synthetic model, reading
/// the previous references as target context and knowing the document's
/// register. Annotations record the true class of every pronoun and
/// second-person token.
pub fn generate_synthetic_corpus(
    spec: &WorldSpec,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<Vec<Document>> {
    if config.n_docs == 0 {
        return Ok(Vec::new());
    }
    if config.sentence_len == 0 {
        return Err(Error::InvalidInput(
            "sentence length must be at least 1".into(),
        ));
    }
    if config.sentences_per_doc < 2 || config.window < 2 {
        return Err(Error::InvalidInput(
            "documents need at least 2 sentences and a window of at least 2 to hold a pronoun and its antecedent".into(),
        ));
    }
    let model = SyntheticModel::new(spec.clone())?;
    let nouns: Vec<&String> = spec.noun_genders.keys().collect();
    let fillers: Vec<&String> = spec
        .lexicon
        .keys()
        .filter(|w| !spec.is_noun(w) && **w != spec.formality_marker)
        .collect();
    if nouns.is_empty() {
        return Err(Error::LexiconTooSmall("no nouns".into()));
    }
    if fillers.len() < config.sentence_len {
        return Err(Error::LexiconTooSmall(format!(
            "{} non-noun words for sentences of {} distinct words",
            fillers.len(),
            config.sentence_len
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = Generator {
        spec,
        model: &model,
        nouns,
        fillers,
        config,
    };
    (0..config.n_docs)
        .map(|d| gen.document(format!("doc{d:04}"), &mut rng))
        .collect()
}

struct Generator<'a> {
    spec: &'a WorldSpec,
    model: &'a SyntheticModel,
    nouns: Vec<&'a String>,
    fillers: Vec<&'a String>,
    config: &'a GeneratorConfig,
}

impl Generator<'_> {
    fn document(&self, doc_id: String, rng: &mut ChaCha8Rng) -> Result<Document> {
        let n = self.config.sentences_per_doc;
        let register = if rng.gen_bool(0.5) {
            Register::Formal
        } else {
            Register::Informal
        };

        let mut roles = Vec::with_capacity(n);
        while n - roles.len() >= 2 {
            let left = n - roles.len();
            if left >= 3 && !roles.is_empty() && rng.gen_bool(0.25) {
                roles.push(Role::Free);
                continue;
            }
            let dist = rng.gen_range(1..=(self.config.window - 1).min(left - 1));
            roles.push(Role::Antecedent);
            roles.extend(std::iter::repeat_n(Role::Gap, dist - 1));
            roles.push(Role::Pronoun);
        }
        roles.resize(n, Role::Free);

        let mut sentences = Vec::with_capacity(n);
        let mut slots = Vec::with_capacity(n);
        let mut referent = Gender::M;
        for (i, role) in roles.iter().enumerate() {
            let len = self.config.sentence_len;
            let (mut src, annotations, sentence_slots) = match role {
                Role::Antecedent => {
                    let (src, r, g) = self.antecedent_sentence(rng);
                    referent = g;
                    let slots = (0..len)
                        .map(|p| match p.cmp(&r) {
                            Ordering::Less => Slot::Any,
                            Ordering::Equal => Slot::Referent(g),
                            Ordering::Greater => Slot::Pending(g),
                        })
                        .collect();
                    (src, Vec::new(), slots)
                }
                Role::Gap => (
                    self.words(0, rng),
                    Vec::new(),
                    vec![Slot::Pending(referent); len],
                ),
                Role::Free => {
                    let k = rng.gen_range(0..=2usize.min(len));
                    (self.words(k, rng), Vec::new(), vec![Slot::Any; len])
                }
                Role::Pronoun => {
                    let mut src = self.words(0, rng);
                    let pos = rng.gen_range(0..src.len());
                    src[pos] = self.spec.pronoun_src.clone();
                    let slots = (0..len)
                        .map(|p| {
                            if p < pos {
                                Slot::Pending(referent)
                            } else {
                                Slot::Any
                            }
                        })
                        .collect();
                    (
                        src,
                        vec![Annotation {
                            pos,
                            class: referent.into(),
                        }],
                        slots,
                    )
                }
            };
            slots.push(sentence_slots);
            let mut annotations = annotations;
            let free_slots = |src: &[String]| -> Vec<usize> {
                (0..src.len())
                    .filter(|&p| {
                        !self.spec.is_noun(&src[p])
                            && src[p] != self.spec.pronoun_src
                            && src[p] != self.spec.formality_src
                            && src[p] != self.spec.formality_marker
                    })
                    .collect()
            };
            let wants_marker = register == Register::Formal && (i == 0 || rng.gen_bool(0.15));
            if wants_marker {
                if let Some(&p) = free_slots(&src).choose(rng) {
                    src[p] = self.spec.formality_marker.clone();
                }
            }
            if rng.gen_bool(0.35) {
                if let Some(&p) = free_slots(&src).choose(rng) {
                    src[p] = self.spec.formality_src.clone();
                    annotations.push(Annotation {
                        pos: p,
                        class: register.into(),
                    });
                }
            }
            annotations.sort_by_key(|a| a.pos);
            sentences.push(Sentence {
                src,
                reference: None,
                annotations: Some(annotations),
            });
        }

        self.sample_references(&mut sentences, &slots, register, rng)?;
        Ok(Document { doc_id, sentences })
    }

    /// `nouns` distinct nouns and distinct fillers, shuffled.
    fn words(&self, nouns: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        let len = self.config.sentence_len;
        let nouns = nouns.min(self.nouns.len()).min(len);
        let mut words: Vec<String> = self
            .nouns
            .choose_multiple(rng, nouns)
            .chain(self.fillers.choose_multiple(rng, len - nouns))
            .map(|w| (*w).clone())
            .collect();
        words.shuffle(rng);
        words
    }

    /// Source words, position of the referent (the last noun) and its gender.
    fn antecedent_sentence(&self, rng: &mut ChaCha8Rng) -> (Vec<String>, usize, Gender) {
        let k = rng.gen_range(1..=2);
        let src = self.words(k, rng);
        let pos = src
            .iter()
            .rposition(|w| self.spec.is_noun(w))
            .expect("at least one noun drawn");
        let gender = self.spec.noun_genders[&src[pos]];
        (src, pos, gender)
    }

    /// Samples each reference token from the model, keeping the intended
    /// token's probability and only those noise tokens that leave the
    /// annotated ground truth intact (see [`Slot`]).
    fn sample_references(
        &self,
        sentences: &mut [Sentence],
        slots: &[Vec<Slot>],
        register: Register,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let model = self.model;
        let sep = model.separator();
        let eos = model.eos();
        let class_tokens: Vec<TokenId> = Gender::ALL
            .iter()
            .map(|g| model.pronoun_id(*g))
            .chain(Register::ALL.iter().map(|r| model.formality_id(*r)))
            .collect();
        for i in 0..sentences.len() {
            let start = (i + 1).saturating_sub(self.config.window);
            let sources: Vec<&[String]> = sentences[start..=i]
                .iter()
                .map(|s| s.src.as_slice())
                .collect();
            let src = join_source(&sources, &self.spec.separator);
            let mut context = Vec::new();
            for s in &sentences[start..i] {
                let r = s
                    .reference
                    .as_ref()
                    .expect("earlier references are sampled");
                context.extend(model.vocab().encode(r)?);
                context.push(sep);
            }
            let mut prefix: Vec<TokenId> = Vec::with_capacity(sentences[i].src.len());
            for slot in &slots[i] {
                let dist =
                    model.distribution_with_register(&src, &context, &prefix, Some(register))?;
                let intended = dist.argmax();
                let weights: Vec<f64> = model
                    .vocab()
                    .ids()
                    .map(|t| {
                        let allowed = t == intended
                            || (t != sep
                                && t != eos
                                && !class_tokens.contains(&t)
                                && slot.admits(model.noun_gender(t)));
                        if allowed {
                            dist.prob(t)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                prefix.push(sample_index(&weights, rng));
            }
            sentences[i].reference = Some(model.vocab().decode(&prefix));
        }
        Ok(())
    }
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> TokenId {
    let total: f64 = weights.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if acc > target {
                return TokenId(i as u32);
            }
        }
    }
    TokenId(last as u32)
}
