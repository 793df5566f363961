//! Display-facing projections of a composition session.

use serde::{Deserialize, Serialize};

/// The pre-edit text under composition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionView {
    pub composing: String,
    /// Cursor position in characters.
    pub cursor: usize,
}

impl CompositionView {
    pub fn new(composing: String) -> CompositionView {
        let cursor = composing.chars().count();
        CompositionView { composing, cursor }
    }

    pub fn is_empty(&self) -> bool {
        self.composing.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: char,
    pub text: String,
}

/// One page of the candidate window.
///
/// `items` holds only the current page, labelled from the table's selection
/// keys in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateList {
    pub items: Vec<Candidate>,
    pub highlighted: usize,
    pub page: usize,
    pub page_size: usize,
    pub page_count: usize,
}

impl CandidateList {
    pub fn highlighted(&self) -> Option<&Candidate> {
        self.items.get(self.highlighted)
    }

    pub fn by_label(&self, label: char) -> Option<&Candidate> {
        self.items.iter().find(|c| c.label == label)
    }
}
