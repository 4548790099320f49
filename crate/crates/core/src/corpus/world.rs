use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
    N,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::M, Gender::F, Gender::N];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Register {
    Formal,
    Informal,
}

impl Register {
    pub const ALL: [Register; 2] = [Register::Formal, Register::Informal];
}

/// The synthetic translation world: a word-for-word lexicon plus the two
/// ambiguity classes (third-person pronoun gender and second-person
/// formality) that need document context to resolve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub lexicon: BTreeMap<String, String>,
    pub noun_genders: BTreeMap<String, Gender>,
    pub pronoun_src: String,
    pub pronoun_tgt: BTreeMap<Gender, String>,
    pub formality_src: String,
    pub formality_tgt: BTreeMap<Register, String>,
    pub formality_marker: String,
    pub epsilon: f64,
    pub separator: String,
    pub eos: String,
}

impl WorldSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let spec: WorldSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("world spec serializes")
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn pronoun(&self, g: Gender) -> &str {
        &self.pronoun_tgt[&g]
    }

    pub fn formality(&self, r: Register) -> &str {
        &self.formality_tgt[&r]
    }

    pub fn is_noun(&self, word: &str) -> bool {
        self.noun_genders.contains_key(word)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWorld(msg));
        if !(0.0..0.5).contains(&self.epsilon) {
            return bad(format!("epsilon {} outside [0, 0.5)", self.epsilon));
        }
        if self.lexicon.is_empty() {
            return bad("empty lexicon".into());
        }
        for g in Gender::ALL {
            if !self.pronoun_tgt.contains_key(&g) {
                return bad(format!("pronoun_tgt lacks gender {g:?}"));
            }
        }
        for r in Register::ALL {
            if !self.formality_tgt.contains_key(&r) {
                return bad(format!("formality_tgt lacks register {r:?}"));
            }
        }
        if let Some(noun) = self
            .noun_genders
            .keys()
            .find(|n| !self.lexicon.contains_key(*n))
        {
            return bad(format!("noun {noun:?} has no lexicon entry"));
        }
        if !self.lexicon.contains_key(&self.formality_marker) {
            return bad(format!(
                "formality marker {:?} has no lexicon entry",
                self.formality_marker
            ));
        }
        if self.is_noun(&self.formality_marker) {
            return bad("formality marker must not be a noun".into());
        }
        for special in [
            &self.pronoun_src,
            &self.formality_src,
            &self.separator,
            &self.eos,
        ] {
            if self.lexicon.contains_key(special) {
                return bad(format!("{special:?} is both special and a lexicon word"));
            }
        }
        let source_specials = [&self.pronoun_src, &self.formality_src, &self.separator];
        if source_specials.iter().collect::<HashSet<_>>().len() != source_specials.len() {
            return bad("pronoun_src, formality_src and separator must differ".into());
        }

        let mut seen = HashSet::new();
        let targets = self
            .lexicon
            .values()
            .chain(self.pronoun_tgt.values())
            .chain(self.formality_tgt.values())
            .chain([&self.separator, &self.eos]);
        for t in targets {
            if !seen.insert(t.as_str()) {
                return bad(format!("target token {t:?} is used more than once"));
            }
        }
        Ok(())
    }

    /// A small English to German world used by the CLI and the tests.
    pub fn default_world() -> Self {
        let nouns: [(&str, &str, Gender); 12] = [
            ("moon", "mond", Gender::M),
            ("table", "tisch", Gender::M),
            ("dog", "hund", Gender::M),
            ("tree", "baum", Gender::M),
            ("sun", "sonne", Gender::F),
            ("door", "tuer", Gender::F),
            ("cat", "katze", Gender::F),
            ("lamp", "lampe", Gender::F),
            ("house", "haus", Gender::N),
            ("book", "buch", Gender::N),
            ("car", "auto", Gender::N),
            ("window", "fenster", Gender::N),
        ];
        let others = [
            ("see", "sehen"),
            ("big", "gross"),
            ("old", "alt"),
            ("new", "neu"),
            ("is", "ist"),
            ("was", "war"),
            ("very", "sehr"),
            ("here", "hier"),
            ("now", "jetzt"),
            ("and", "und"),
            ("we", "wir"),
            ("like", "moegen"),
            ("good", "gut"),
            ("small", "klein"),
            ("today", "heute"),
            ("sir", "herr"),
        ];
        let mut lexicon = BTreeMap::new();
        let mut noun_genders = BTreeMap::new();
        for (src, tgt, g) in nouns {
            lexicon.insert(src.to_owned(), tgt.to_owned());
            noun_genders.insert(src.to_owned(), g);
        }
        for (src, tgt) in others {
            lexicon.insert(src.to_owned(), tgt.to_owned());
        }
        WorldSpec {
            lexicon,
            noun_genders,
            pronoun_src: "it".into(),
            pronoun_tgt: BTreeMap::from([
                (Gender::M, "er".to_owned()),
                (Gender::F, "sie".to_owned()),
                (Gender::N, "es".to_owned()),
            ]),
            formality_src: "you".into(),
            formality_tgt: BTreeMap::from([
                (Register::Formal, "Sie".to_owned()),
                (Register::Informal, "du".to_owned()),
            ]),
            formality_marker: "sir".into(),
            epsilon: 0.05,
            separator: "<sep>".into(),
            eos: "</s>".into(),
        }
    }
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self::default_world()
    }
}
