use std::collections::HashMap;

use crate::error::{Error, Result};

/// Index of a token in a [`Vocab`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenId(pub u32);

impl TokenId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered target vocabulary. The order doubles as the tie-break order
/// everywhere in the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocab {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), TokenId(i as u32)).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn id(&self, token: &str) -> Result<TokenId> {
        self.get(token)
            .ok_or_else(|| Error::OutOfVocabulary(token.to_owned()))
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id.index()]
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<TokenId>> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter().map(|&id| self.token(id).to_owned()).collect()
    }

    pub fn ids(&self) -> impl Iterator<Item = TokenId> {
        (0..self.tokens.len() as u32).map(TokenId)
    }
}
