//! Document-level translation decoding.
//!
//! The crate is organised around an abstract autoregressive [`Scorer`]. On top
//! of it sit token-level beam search ([`search`]), nine document-level
//! decoding strategies with exact forward-pass accounting ([`strategies`]),
//! and the evaluation metrics used to compare them ([`metrics`]). A
//! closed-form synthetic translation model ([`model::SyntheticModel`]) and a
//! matching corpus generator ([`corpus::generate_synthetic_corpus`]) provide
//! ground truth for all of it.

pub mod corpus;
pub mod error;
pub mod metrics;
pub mod model;
pub mod report;
pub mod search;
pub mod strategies;

pub use corpus::{
    load_corpus, make_windows, save_corpus, AnnotationClass, Document, Gender, Register, Sentence,
    Window, WindowMode, WorldSpec,
};
pub use error::{Error, Result};
pub use model::{
    exact_decode, score_sequence, CountingScorer, Distribution, Hypothesis, Scorer, SyntheticModel,
    TokenId, Vocab,
};
pub use search::{beam_search, BeamParams};
pub use strategies::{decode_document, predicted_cost, DecodeResult, StrategyId};
