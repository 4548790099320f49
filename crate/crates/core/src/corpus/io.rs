use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::Document;
use crate::error::{Error, Result};

/// Loads a JSON Lines corpus, one document per line. Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_corpus(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: Default::default(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        doc.validate().map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::DuplicateDocId {
                doc_id: doc.doc_id,
                line: line_no,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<W: Write>(mut writer: W, docs: &[Document]) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n").map_err(|source| Error::Io {
            path: Default::default(),
            source,
        })?;
    }
    Ok(())
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    write_corpus(&mut writer, docs)?;
    writer.flush().map_err(io_err)
}
