//! Document-level decoding strategies and their forward-pass costs.

mod cost;
mod decode;
mod split;

pub use cost::{predicted_cost, predicted_document_cost};
pub use decode::{decode_document, DecodeResult};
pub use split::{split_by_separator, split_hypothesis, Diagnostic, DiagnosticKind};

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Default width of the sentence-level context beam of `doc-trans-beam`.
pub const DEFAULT_CONTEXT_BEAM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyId {
    /// Every sentence on its own.
    SentenceLevel,
    /// Same procedure as `SentenceLevel`, kept as the document model's
    /// no-context row.
    NoContext,
    /// Non-overlapping blocks of `W` sentences, all translated together.
    FullSegment,
    /// Sliding windows ending at each sentence; keep the last translation.
    LastSentence,
    /// Sliding windows starting at each sentence; keep the first translation.
    FirstSentence,
    /// Sentence-level first pass, then re-translate each sentence with the
    /// first-pass translations of its predecessors as target context.
    TwoPass,
    /// Sentence by sentence, conditioning on the translations chosen so far.
    DocTrans,
    /// `DocTrans` with `context_beam` competing context streams.
    DocTransBeam { context_beam: usize },
    /// `DocTrans` with the reference translations as context.
    Cheating,
}

impl StrategyId {
    /// All strategies in table order.
    pub fn all(context_beam: usize) -> [StrategyId; 9] {
        [
            Self::SentenceLevel,
            Self::NoContext,
            Self::FullSegment,
            Self::LastSentence,
            Self::FirstSentence,
            Self::TwoPass,
            Self::DocTrans,
            Self::DocTransBeam { context_beam },
            Self::Cheating,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SentenceLevel => "sentence-level",
            Self::NoContext => "no-context",
            Self::FullSegment => "full-segment",
            Self::LastSentence => "last-sentence",
            Self::FirstSentence => "first-sentence",
            Self::TwoPass => "two-pass",
            Self::DocTrans => "doc-trans",
            Self::DocTransBeam { .. } => "doc-trans-beam",
            Self::Cheating => "cheating",
        }
    }

    /// Position in table order.
    pub fn order(&self) -> usize {
        Self::all(1)
            .iter()
            .position(|s| s.name() == self.name())
            .unwrap()
    }

    /// Parses a strategy name; `doc-trans-beam` gets `context_beam`.
    pub fn parse(name: &str, context_beam: usize) -> Result<Self, Error> {
        Self::all(context_beam)
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown strategy {name:?}")))
    }

    /// Whether the decoded sentences saw any preceding context.
    pub fn uses_left_context(&self) -> bool {
        !matches!(
            self,
            Self::SentenceLevel | Self::NoContext | Self::FirstSentence
        )
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, DEFAULT_CONTEXT_BEAM)
    }
}
