use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::metrics::PronounEvalSpec;
use crate::model::{join_context, join_source, score_sequence, Scorer};

/// One contrastive test case. `src` is the whole source window (sentences
/// joined by the separator); `ctx` is the target context in the
/// separator-terminated format; the targets carry no end token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveItem {
    pub src: Vec<String>,
    pub ctx: Vec<String>,
    pub correct: Vec<String>,
    pub wrong: Vec<Vec<String>>,
    /// Right-side context; carried through files but never scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctx_right: Option<Vec<String>>,
}

fn score<S: Scorer + ?Sized>(scorer: &S, item: &ContrastiveItem, target: &[String]) -> Result<f64> {
    let mut target = target.to_vec();
    target.push(scorer.vocab().token(scorer.eos()).to_owned());
    Ok(score_sequence(scorer, &item.src, &item.ctx, &target)?.total_logprob)
}

/// Fraction of items whose correct target outscores every wrong one.
/// A tie counts against the item.
pub fn contrastive_accuracy<S: Scorer + ?Sized>(
    scorer: &S,
    items: &[ContrastiveItem],
) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::NoItems);
    }
    let mut correct = 0usize;
    for (n, item) in items.iter().enumerate() {
        if item.wrong.is_empty() {
            return Err(Error::InvalidInput(format!(
                "contrastive item {n} has no wrong targets"
            )));
        }
        let good = score(scorer, item, &item.correct)?;
        let mut wins = true;
        for wrong in &item.wrong {
            if score(scorer, item, wrong)? >= good {
                wins = false;
                break;
            }
        }
        correct += usize::from(wins);
    }
    Ok(correct as f64 / items.len() as f64)
}

/// Builds one item per pronoun instance of the corpus, with the gold
/// references of the preceding window sentences as context. The wrong
/// targets replace the instance's pronoun with each other class's token.
pub fn contrastive_items_from_corpus(
    documents: &[Document],
    spec: &PronounEvalSpec,
    window: usize,
    separator: &str,
) -> Result<Vec<ContrastiveItem>> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    let classes = spec.classes();
    let mut items = Vec::new();
    for doc in documents {
        for (i, sentence) in doc.sentences.iter().enumerate() {
            let Some(reference) = &sentence.reference else {
                continue;
            };
            let triggers = spec.trigger_count(&sentence.src);
            let positions: Vec<usize> = reference
                .iter()
                .enumerate()
                .filter(|(_, t)| spec.class_of(t).is_some())
                .map(|(p, _)| p)
                .take(triggers)
                .collect();
            if positions.is_empty() {
                continue;
            }
            let start = (i + 1).saturating_sub(window);
            let sources: Vec<&[String]> = doc.sentences[start..=i]
                .iter()
                .map(|s| s.src.as_slice())
                .collect();
            let context: Vec<&[String]> = doc.sentences[start..i]
                .iter()
                .map(|s| {
                    s.reference
                        .as_deref()
                        .ok_or_else(|| Error::MissingReferences {
                            strategy: "contrastive".into(),
                            doc_id: doc.doc_id.clone(),
                        })
                })
                .collect::<Result<_>>()?;
            let src = join_source(&sources, separator);
            let ctx = join_context(&context, separator);
            for &pos in &positions {
                let gold = spec.class_of(&reference[pos]).unwrap();
                let wrong = classes
                    .iter()
                    .filter(|c| **c != gold)
                    .map(|c| {
                        let mut w = reference.clone();
                        w[pos] = spec.token_for(c).unwrap().to_owned();
                        w
                    })
                    .collect();
                items.push(ContrastiveItem {
                    src: src.clone(),
                    ctx: ctx.clone(),
                    correct: reference.clone(),
                    wrong,
                    ctx_right: None,
                });
            }
        }
    }
    Ok(items)
}

pub fn read_contrastive_items<R: BufRead>(reader: R) -> Result<Vec<ContrastiveItem>> {
    let mut items = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: "<reader>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

pub fn load_contrastive_items(path: impl AsRef<Path>) -> Result<Vec<ContrastiveItem>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_contrastive_items(BufReader::new(file))
}

pub fn write_contrastive_items<W: Write>(mut writer: W, items: &[ContrastiveItem]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n").map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokens, Sentence, WorldSpec};
    use crate::model::SyntheticModel;

    fn sharp_model() -> SyntheticModel {
        SyntheticModel::new(WorldSpec::default_world().with_epsilon(0.0)).unwrap()
    }

    fn item(correct: &str, wrong: &[&str]) -> ContrastiveItem {
        ContrastiveItem {
            src: tokens("dog <sep> it is"),
            ctx: tokens("hund <sep>"),
            correct: tokens(correct),
            wrong: wrong.iter().map(|w| tokens(w)).collect(),
            ctx_right: None,
        }
    }

    #[test]
    fn probability_one_target_wins() {
        let m = sharp_model();
        let items = [item("er ist", &["sie ist", "es ist"])];
        assert_eq!(contrastive_accuracy(&m, &items).unwrap(), 1.0);
    }

    #[test]
    fn tie_is_incorrect() {
        let m = sharp_model();
        let items = [item("er ist", &["er ist"])];
        assert_eq!(contrastive_accuracy(&m, &items).unwrap(), 0.0);
    }

    #[test]
    fn empty_items_error() {
        assert!(matches!(
            contrastive_accuracy(&sharp_model(), &[]),
            Err(Error::NoItems)
        ));
    }

    #[test]
    fn items_from_corpus_swap_each_instance() {
        let world = WorldSpec::default_world();
        let spec = PronounEvalSpec::gender(&world);
        let doc = Document::new(
            "d",
            vec![
                Sentence::new(tokens("dog")).with_reference(tokens("hund")),
                Sentence::new(tokens("it is")).with_reference(tokens("er ist")),
            ],
        );
        let items = contrastive_items_from_corpus(&[doc], &spec, 3, "<sep>").unwrap();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].src, tokens("dog <sep> it is"));
        assert_eq!(items[0].ctx, tokens("hund <sep>"));
        let mut firsts: Vec<&str> = items[0].wrong.iter().map(|w| w[0].as_str()).collect();
        firsts.sort();
        assert_eq!(firsts, ["es", "sie"]);
    }

    #[test]
    fn jsonl_round_trip() {
        let mut items = vec![item("er ist", &["es ist"])];
        items[0].ctx_right = Some(tokens("und hier"));
        let mut buf = Vec::new();
        write_contrastive_items(&mut buf, &items).unwrap();
        assert_eq!(read_contrastive_items(buf.as_slice()).unwrap(), items);
    }
}
