//! Corpus-level evaluation: perplexity, BLEU, pronoun F1 and contrastive
//! scoring accuracy.

mod bleu;
mod contrastive;
mod perplexity;
mod pronoun;

pub use bleu::{bleu, BleuStats};
pub use contrastive::{
    contrastive_accuracy, contrastive_items_from_corpus, load_contrastive_items,
    read_contrastive_items, write_contrastive_items, ContrastiveItem,
};
pub use perplexity::{perplexity, perplexity_stats, Conditioning, PerplexityStats};
pub use pronoun::{
    pronoun_f1, ClassScores, F1Report, PronounCategory, PronounEvalSpec, DEFAULT_MIN_SUPPORT,
};
