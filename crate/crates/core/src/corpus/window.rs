use std::ops::Range;

use super::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Consecutive blocks of `W` sentences; the last block may be shorter.
    NonOverlapping,
    /// One window per sentence, holding it and up to `W - 1` predecessors.
    SlidingLast,
    /// One window per sentence, holding it and up to `W - 1` successors.
    SlidingFirst,
    Single,
}

/// Which members of a window are output sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputSide {
    All,
    Last,
    First,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub doc_id: String,
    pub center: usize,
    pub members: Range<usize>,
    pub side: OutputSide,
}

impl Window {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_indices(&self) -> Vec<usize> {
        self.members.clone().collect()
    }

    /// Document indices whose translation is taken from this window.
    pub fn output_indices(&self) -> Range<usize> {
        match self.side {
            OutputSide::All => self.members.clone(),
            OutputSide::Last => self.members.end - 1..self.members.end,
            OutputSide::First => self.members.start..self.members.start + 1,
        }
    }
}

/// Splits a document into context windows. Windows never cross the document
/// boundary; sentences near either end simply get shorter windows.
pub fn make_windows(document: &Document, size: usize, mode: WindowMode) -> Result<Vec<Window>> {
    let ranges = window_ranges(document.len(), size, mode)?;
    Ok(ranges
        .into_iter()
        .map(|(center, members, side)| Window {
            doc_id: document.doc_id.clone(),
            center,
            members,
            side,
        })
        .collect())
}

pub(crate) fn window_ranges(
    len: usize,
    size: usize,
    mode: WindowMode,
) -> Result<Vec<(usize, Range<usize>, OutputSide)>> {
    if size == 0 {
        return Err(Error::ZeroWindow);
    }
    let out = match mode {
        WindowMode::NonOverlapping => (0..len)
            .step_by(size)
            .map(|start| (start, start..(start + size).min(len), OutputSide::All))
            .collect(),
        WindowMode::SlidingLast => (0..len)
            .map(|i| (i, (i + 1).saturating_sub(size)..i + 1, OutputSide::Last))
            .collect(),
        WindowMode::SlidingFirst => (0..len)
            .map(|i| (i, i..(i + size).min(len), OutputSide::First))
            .collect(),
        WindowMode::Single => (0..len).map(|i| (i, i..i + 1, OutputSide::All)).collect(),
    };
    Ok(out)
}
