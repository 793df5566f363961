use std::collections::{BTreeMap, HashSet};
use std::ops::Bound;

use super::{prefix_successor, QueryPattern, SequenceMatch, StoreError, TableStore};
use crate::cintable::CinTable;

/// Chardefs grouped by sequence in a sorted map.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    entries: BTreeMap<String, Vec<String>>,
    keys: HashSet<char>,
    count: usize,
}

impl MemoryStore {
    pub fn build(table: &CinTable) -> MemoryStore {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for c in &table.chardefs {
            entries
                .entry(c.sequence.clone())
                .or_default()
                .push(c.text.clone());
        }
        MemoryStore {
            entries,
            keys: table.keynames.keys().copied().collect(),
            count: table.chardefs.len(),
        }
    }

    fn range_from<'a>(&'a self, prefix: &str) -> impl Iterator<Item = (&'a String, &'a Vec<String>)> + 'a {
        let upper = match prefix_successor(prefix) {
            Some(s) => Bound::Excluded(s),
            None => Bound::Unbounded,
        };
        self.entries
            .range::<String, _>((Bound::Included(prefix.to_owned()), upper))
    }
}

impl TableStore for MemoryStore {
    fn lookup_exact(&self, sequence: &str) -> Result<Vec<String>, StoreError> {
        Ok(self.entries.get(sequence).cloned().unwrap_or_default())
    }

    fn has_extensions(&self, sequence: &str) -> Result<bool, StoreError> {
        Ok(self
            .entries
            .range::<str, _>((Bound::Excluded(sequence), Bound::Unbounded))
            .next()
            .is_some_and(|(k, _)| k.starts_with(sequence)))
    }

    fn lookup_prefix(&self, prefix: &str) -> Result<Vec<SequenceMatch>, StoreError> {
        Ok(self
            .range_from(prefix)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect())
    }

    fn match_pattern(&self, pattern: &QueryPattern) -> Result<Vec<SequenceMatch>, StoreError> {
        let prefix = pattern.literal_prefix();
        Ok(self
            .range_from(&prefix)
            .filter(|(k, _)| pattern.matches(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect())
    }

    fn entry_count(&self) -> Result<usize, StoreError> {
        Ok(self.count)
    }

    fn is_key(&self, c: char) -> bool {
        self.keys.contains(&c)
    }
}
