//! The key-token scripting syntax used by `convert` and `repl`.
//!
//! Tokens are separated by whitespace. A token is either one non-space
//! character, typed literally, or one of `<space>`, `<esc>`, `<bs>`,
//! `<enter>`.

use std::fmt;

use vanilla_core::{KeyEvent, NamedKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenError {
    pub line: usize,
    pub column: usize,
    pub token: String,
}

impl fmt::Display for TokenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: unknown token {:?}", self.line, self.column, self.token)
    }
}

impl std::error::Error for TokenError {}

pub fn parse_token(token: &str) -> Option<KeyEvent> {
    let named = match token {
        "<space>" => NamedKey::Space,
        "<esc>" => NamedKey::Escape,
        "<bs>" => NamedKey::Backspace,
        "<enter>" => NamedKey::Enter,
        _ => {
            let mut chars = token.chars();
            return match (chars.next(), chars.next()) {
                (Some(c), None) if !c.is_whitespace() => Some(KeyEvent::char(c)),
                _ => None,
            };
        }
    };
    Some(KeyEvent::named(named))
}

/// Parses a whole script. Positions are 1-based and count characters.
pub fn parse_tokens(input: &str) -> Result<Vec<KeyEvent>, TokenError> {
    let mut events = Vec::new();
    for (index, line) in input.lines().enumerate() {
        let mut column = 0;
        let mut start: Option<usize> = None;
        let mut token = String::new();
        // a trailing space flushes the last token
        for c in line.chars().chain(std::iter::once(' ')) {
            column += 1;
            if c.is_whitespace() {
                if let Some(col) = start.take() {
                    let event = parse_token(&token).ok_or_else(|| TokenError {
                        line: index + 1,
                        column: col,
                        token: token.clone(),
                    })?;
                    events.push(event);
                    token.clear();
                }
            } else {
                start.get_or_insert(column);
                token.push(c);
            }
        }
    }
    Ok(events)
}
