use std::collections::HashMap;

use super::{Distribution, Scorer, TokenId, Vocab};
use crate::corpus::{Gender, Register, WorldSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum SourceKind {
    Word(TokenId),
    Pronoun,
    SecondPerson,
}

/// What the model intends to emit at the next position.
enum Intent<'a> {
    One(TokenId),
    Tie(&'a [TokenId]),
}

/// Closed-form, position-synchronous translation model over a [`WorldSpec`].
///
/// Each source token maps to exactly one target token; sentence ends map to
/// the separator (or the end token after the last sentence of the window).
/// The intended token gets mass `1 - epsilon`, the rest is spread uniformly.
/// Pronoun gender follows the most recent noun translation visible on the
/// target side; formality follows the presence of the marker word anywhere
/// in the source window. Unresolvable cases split `1 - epsilon` evenly over
/// the candidate tokens.
#[derive(Debug, Clone)]
pub struct SyntheticModel {
    spec: WorldSpec,
    vocab: Vocab,
    sep: TokenId,
    eos: TokenId,
    pronouns: [TokenId; 3],
    formality: [TokenId; 2],
    source: HashMap<String, SourceKind>,
    noun_gender: Vec<Option<Gender>>,
}

impl SyntheticModel {
    /// Vocabulary order: end token, separator, pronouns (M, F, N), formal and
    /// informal second person, then the lexicon translations sorted.
    pub fn new(spec: WorldSpec) -> Result<Self> {
        spec.validate()?;
        let mut tokens = vec![spec.eos.clone(), spec.separator.clone()];
        tokens.extend(Gender::ALL.iter().map(|g| spec.pronoun(*g).to_owned()));
        tokens.extend(Register::ALL.iter().map(|r| spec.formality(*r).to_owned()));
        let mut words: Vec<String> = spec.lexicon.values().cloned().collect();
        words.sort();
        tokens.extend(words);
        let vocab = Vocab::new(tokens)?;

        let mut source = HashMap::new();
        for (src, tgt) in &spec.lexicon {
            source.insert(src.clone(), SourceKind::Word(vocab.id(tgt)?));
        }
        source.insert(spec.pronoun_src.clone(), SourceKind::Pronoun);
        source.insert(spec.formality_src.clone(), SourceKind::SecondPerson);

        let mut noun_gender = vec![None; vocab.len()];
        for (noun, g) in &spec.noun_genders {
            noun_gender[vocab.id(&spec.lexicon[noun])?.index()] = Some(*g);
        }

        Ok(Self {
            sep: vocab.id(&spec.separator)?,
            eos: vocab.id(&spec.eos)?,
            pronouns: [
                vocab.id(spec.pronoun(Gender::M))?,
                vocab.id(spec.pronoun(Gender::F))?,
                vocab.id(spec.pronoun(Gender::N))?,
            ],
            formality: [
                vocab.id(spec.formality(Register::Formal))?,
                vocab.id(spec.formality(Register::Informal))?,
            ],
            spec,
            vocab,
            source,
            noun_gender,
        })
    }

    pub fn spec(&self) -> &WorldSpec {
        &self.spec
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn pronoun_id(&self, g: Gender) -> TokenId {
        self.pronouns[Gender::ALL.iter().position(|x| *x == g).unwrap()]
    }

    pub fn formality_id(&self, r: Register) -> TokenId {
        self.formality[Register::ALL.iter().position(|x| *x == r).unwrap()]
    }

    /// Gender of a target token if it translates a noun.
    pub fn noun_gender(&self, id: TokenId) -> Option<Gender> {
        self.noun_gender[id.index()]
    }

    /// Translation of a lexicon word.
    pub fn translate_word(&self, word: &str) -> Option<TokenId> {
        match self.source.get(word) {
            Some(SourceKind::Word(id)) => Some(*id),
            _ => None,
        }
    }

    /// The model distribution, optionally with the register of the document
    /// known in advance. The corpus generator samples references from the
    /// latter; decoding always uses the plain model.
    pub(crate) fn distribution_with_register(
        &self,
        src: &[String],
        context: &[TokenId],
        prefix: &[TokenId],
        register: Option<Register>,
    ) -> Result<Distribution> {
        if src.is_empty() {
            return Err(Error::InvalidInput("empty source window".into()));
        }
        let mut sentences: Vec<&[String]> = Vec::new();
        let mut start = 0;
        let mut marker = false;
        for (i, tok) in src.iter().enumerate() {
            if *tok == self.spec.separator {
                sentences.push(&src[start..i]);
                start = i + 1;
            } else if !self.source.contains_key(tok) {
                return Err(Error::OutOfVocabulary(tok.clone()));
            } else if *tok == self.spec.formality_marker {
                marker = true;
            }
        }
        sentences.push(&src[start..]);

        let fixed = context.iter().filter(|&&t| t == self.sep).count();
        if fixed >= sentences.len() {
            return Err(Error::InvalidInput(format!(
                "target context covers {fixed} sentences but the source window has {}",
                sentences.len()
            )));
        }
        let done_in_prefix = prefix.iter().filter(|&&t| t == self.sep).count();
        let pos = match prefix.iter().rposition(|&t| t == self.sep) {
            Some(p) => prefix.len() - p - 1,
            None => prefix.len(),
        };
        let current = fixed + done_in_prefix;

        let intent = if current >= sentences.len() {
            Intent::One(self.eos)
        } else if let Some(tok) = sentences[current].get(pos) {
            match self.source[tok] {
                SourceKind::Word(id) => Intent::One(id),
                SourceKind::Pronoun => match self.antecedent_gender(context, prefix) {
                    Some(g) => Intent::One(self.pronoun_id(g)),
                    None => Intent::Tie(&self.pronouns),
                },
                SourceKind::SecondPerson => {
                    if marker {
                        Intent::One(self.formality_id(Register::Formal))
                    } else if let Some(r) = register {
                        Intent::One(self.formality_id(r))
                    } else {
                        Intent::Tie(&self.formality)
                    }
                }
            }
        } else if current + 1 < sentences.len() {
            Intent::One(self.sep)
        } else {
            Intent::One(self.eos)
        };
        Ok(self.spread(intent))
    }

    fn antecedent_gender(&self, context: &[TokenId], prefix: &[TokenId]) -> Option<Gender> {
        prefix
            .iter()
            .rev()
            .chain(context.iter().rev())
            .find_map(|&t| self.noun_gender(t))
    }

    fn spread(&self, intent: Intent<'_>) -> Distribution {
        let v = self.vocab.len();
        let eps = self.spec.epsilon;
        let (hits, n): (&[TokenId], usize) = match &intent {
            Intent::One(id) => (std::slice::from_ref(id), 1),
            Intent::Tie(ids) => (ids, ids.len()),
        };
        let rest = if v > n { eps / (v - n) as f64 } else { 0.0 };
        let mut probs = vec![rest; v];
        for id in hits {
            probs[id.index()] = (1.0 - eps) / n as f64;
        }
        Distribution::from_probs(&probs)
    }
}

impl Scorer for SyntheticModel {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn separator(&self) -> TokenId {
        self.sep
    }

    fn eos(&self) -> TokenId {
        self.eos
    }

    fn source_separator(&self) -> &str {
        &self.spec.separator
    }

    fn next_token_distribution(
        &self,
        src: &[String],
        context: &[TokenId],
        prefix: &[TokenId],
    ) -> Result<Distribution> {
        self.distribution_with_register(src, context, prefix, None)
    }
}
