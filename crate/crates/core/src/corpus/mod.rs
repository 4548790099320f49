//! Documents, corpus files, context windows and synthetic corpora.

mod generate;
mod io;
pub(crate) mod window;
mod world;

pub use generate::{generate_synthetic_corpus, GeneratorConfig};
pub use io::{load_corpus, read_corpus, save_corpus, write_corpus};
pub use window::{make_windows, OutputSide, Window, WindowMode};
pub use world::{Gender, Register, WorldSpec};

use serde::{Deserialize, Serialize};

/// Ground-truth label attached to a source token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnnotationClass {
    #[serde(rename = "gender-M")]
    GenderM,
    #[serde(rename = "gender-F")]
    GenderF,
    #[serde(rename = "gender-N")]
    GenderN,
    #[serde(rename = "formality-formal")]
    Formal,
    #[serde(rename = "formality-informal")]
    Informal,
}

impl AnnotationClass {
    pub fn gender(self) -> Option<Gender> {
        match self {
            Self::GenderM => Some(Gender::M),
            Self::GenderF => Some(Gender::F),
            Self::GenderN => Some(Gender::N),
            Self::Formal | Self::Informal => None,
        }
    }

    pub fn register(self) -> Option<Register> {
        match self {
            Self::Formal => Some(Register::Formal),
            Self::Informal => Some(Register::Informal),
            _ => None,
        }
    }
}

impl From<Gender> for AnnotationClass {
    fn from(g: Gender) -> Self {
        match g {
            Gender::M => Self::GenderM,
            Gender::F => Self::GenderF,
            Gender::N => Self::GenderN,
        }
    }
}

impl From<Register> for AnnotationClass {
    fn from(r: Register) -> Self {
        match r {
            Register::Formal => Self::Formal,
            Register::Informal => Self::Informal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    /// Index into the sentence's source tokens.
    pub pos: usize,
    pub class: AnnotationClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub src: Vec<String>,
    #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Vec<Annotation>>,
}

impl Sentence {
    pub fn new(src: Vec<String>) -> Self {
        Self {
            src,
            reference: None,
            annotations: None,
        }
    }

    pub fn with_reference(mut self, reference: Vec<String>) -> Self {
        self.reference = Some(reference);
        self
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.src.is_empty() {
            return Err("sentence has an empty \"src\"".into());
        }
        if let Some(anns) = &self.annotations {
            if let Some(a) = anns.iter().find(|a| a.pos >= self.src.len()) {
                return Err(format!(
                    "annotation position {} outside source of length {}",
                    a.pos,
                    self.src.len()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Self {
            doc_id: doc_id.into(),
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// True when every sentence carries a reference translation.
    pub fn has_references(&self) -> bool {
        self.sentences.iter().all(|s| s.reference.is_some())
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.sentences.is_empty() {
            return Err(format!("document {:?} has no sentences", self.doc_id));
        }
        for (i, s) in self.sentences.iter().enumerate() {
            s.validate().map_err(|e| format!("sentence {i}: {e}"))?;
        }
        Ok(())
    }
}

/// Convenience for building token lists in tests and examples.
pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}
