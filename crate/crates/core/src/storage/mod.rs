//! Indexed access to a table's chardefs.
//!
//! Two backends implement [`TableStore`]: [`MemoryStore`], built from a
//! parsed table, and [`SqliteStore`], a single-file database that can be
//! reopened without the source table. Both return identical results for the
//! same table: sequences in lexicographic order, texts in file order.

mod glob;
mod memory;
mod sqlite;

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub use glob::{GlobToken, QueryPattern};
pub use memory::MemoryStore;
pub use sqlite::{import_table, SqliteStore, SCHEMA_VERSION};

/// A sequence with all of its texts, in file order.
pub type SequenceMatch = (String, Vec<String>);

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access {}: {reason}", path.display())]
    IoFailure { path: PathBuf, reason: String },
    #[error("store schema version {found}, expected {expected}")]
    SchemaMismatch { found: i64, expected: i64 },
    #[error("bad pattern {pattern:?}: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error("store query failed: {0}")]
    Query(String),
}

pub trait TableStore: Send + Sync + fmt::Debug {
    /// Texts bound to exactly `sequence`, in file order. A miss is empty.
    fn lookup_exact(&self, sequence: &str) -> Result<Vec<String>, StoreError>;

    /// Whether some longer sequence starts with `sequence`.
    fn has_extensions(&self, sequence: &str) -> Result<bool, StoreError>;

    /// Every sequence starting with `prefix`, `prefix` itself included.
    fn lookup_prefix(&self, prefix: &str) -> Result<Vec<SequenceMatch>, StoreError>;

    /// Every sequence matching an already validated pattern.
    fn match_pattern(&self, pattern: &QueryPattern) -> Result<Vec<SequenceMatch>, StoreError>;

    /// Number of chardef rows.
    fn entry_count(&self) -> Result<usize, StoreError>;

    fn is_key(&self, c: char) -> bool;

    /// Parses `pattern`, checks it only uses key characters and the `*`/`?`
    /// wildcards, and runs it.
    fn match_glob(&self, pattern: &str) -> Result<Vec<SequenceMatch>, StoreError> {
        let parsed = QueryPattern::parse(pattern)?;
        if let Some(c) = parsed.literals().find(|&c| !self.is_key(c)) {
            return Err(StoreError::BadPattern {
                pattern: pattern.to_owned(),
                reason: format!("'{c}' is neither a key nor a wildcard"),
            });
        }
        self.match_pattern(&parsed)
    }
}

/// The smallest string greater than every string starting with `prefix`,
/// or `None` when no such string exists.
pub(crate) fn prefix_successor(prefix: &str) -> Option<String> {
    let mut chars: Vec<char> = prefix.chars().collect();
    while let Some(last) = chars.pop() {
        let mut next = last as u32 + 1;
        if (0xD800..0xE000).contains(&next) {
            next = 0xE000;
        }
        if let Some(c) = char::from_u32(next) {
            chars.push(c);
            return Some(chars.into_iter().collect());
        }
    }
    None
}
