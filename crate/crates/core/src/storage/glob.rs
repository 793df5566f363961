use std::fmt;

use super::StoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobToken {
    Key(char),
    /// `?`: exactly one key.
    One,
    /// `*`: zero or more keys.
    Many,
}

/// A wildcard query over key sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPattern {
    source: String,
    tokens: Vec<GlobToken>,
}

impl QueryPattern {
    pub fn parse(pattern: &str) -> Result<QueryPattern, StoreError> {
        if pattern.is_empty() {
            return Err(StoreError::BadPattern {
                pattern: String::new(),
                reason: "empty pattern".to_owned(),
            });
        }
        let tokens = pattern
            .chars()
            .map(|c| match c {
                '*' => GlobToken::Many,
                '?' => GlobToken::One,
                c => GlobToken::Key(c),
            })
            .collect();
        Ok(QueryPattern {
            source: pattern.to_owned(),
            tokens,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn tokens(&self) -> &[GlobToken] {
        &self.tokens
    }

    pub fn literals(&self) -> impl Iterator<Item = char> + '_ {
        self.tokens.iter().filter_map(|t| match t {
            GlobToken::Key(c) => Some(*c),
            _ => None,
        })
    }

    /// Leading keys before the first wildcard.
    pub fn literal_prefix(&self) -> String {
        self.tokens
            .iter()
            .map_while(|t| match t {
                GlobToken::Key(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// The equivalent SQLite `GLOB` operand. `[` opens a character class
    /// there, so a literal one is written as `[[]`.
    pub fn to_sqlite_glob(&self) -> String {
        let mut out = String::with_capacity(self.source.len());
        for t in &self.tokens {
            match t {
                GlobToken::Many => out.push('*'),
                GlobToken::One => out.push('?'),
                GlobToken::Key('[') => out.push_str("[[]"),
                GlobToken::Key(c) => out.push(*c),
            }
        }
        out
    }

    pub fn matches(&self, sequence: &str) -> bool {
        let seq: Vec<char> = sequence.chars().collect();
        let pat = &self.tokens;
        let (mut p, mut s) = (0, 0);
        // position of the last `*` and the sequence index it was tried at
        let mut backtrack: Option<(usize, usize)> = None;
        while s < seq.len() {
            match pat.get(p) {
                Some(GlobToken::Many) => {
                    backtrack = Some((p, s));
                    p += 1;
                }
                Some(GlobToken::One) => {
                    p += 1;
                    s += 1;
                }
                Some(GlobToken::Key(c)) if *c == seq[s] => {
                    p += 1;
                    s += 1;
                }
                _ => match backtrack {
                    Some((star, from)) => {
                        p = star + 1;
                        s = from + 1;
                        backtrack = Some((star, from + 1));
                    }
                    None => return false,
                },
            }
        }
        pat[p..].iter().all(|t| *t == GlobToken::Many)
    }
}

impl fmt::Display for QueryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
