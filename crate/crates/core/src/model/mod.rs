//! The scorer contract, the synthetic translation model and the exhaustive
//! search oracle.

mod exact;
mod scorer;
mod synthetic;
mod table;
mod vocab;

pub use exact::{exact_decode, EXACT_DECODE_LIMIT};
pub use scorer::{
    join_context, join_source, score_sequence, score_sequence_ids, CountingScorer, Distribution,
    Hypothesis, Scorer,
};
pub use synthetic::SyntheticModel;
pub use table::{FnScorer, RandomScorer};
pub use vocab::{TokenId, Vocab};
