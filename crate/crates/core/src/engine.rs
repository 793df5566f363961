//! The generic table input method.
//!
//! A [`Session`] holds the keys typed so far (the reading) and, when open,
//! the candidate window. Each [`KeyEvent`] produces exactly one
//! [`EngineOutput`] describing what the display should show next.
//!
//! Transitions, in order of precedence:
//!
//! | key | state | effect |
//! |-----|-------|--------|
//! | selection key | window open | commit the candidate with that label on the current page, or beep |
//! | keyname key | window closed, or opened by autocompose | append to the reading if it stays within `max_seq_len`, else beep |
//! | space | window open | commit the highlighted candidate, or page forward when space does not select |
//! | space | reading non-empty | one candidate commits, several open the window, none beeps |
//! | backspace | window opened by space | close the window, keep the reading |
//! | backspace | reading non-empty | drop the last key |
//! | escape | anything pending | clear reading and window |
//! | enter | reading non-empty | commit the raw keys |
//! | other | reading non-empty | beep |
//!
//! Anything else, including keys with Ctrl or Alt held, is passed through
//! to the application untouched.

use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::cintable::BehaviorConfig;
use crate::key::{KeyEvent, KeyKind, NamedKey};
use crate::service::ServiceContext;
use crate::storage::TableStore;
use crate::view::{Candidate, CandidateList, CompositionView};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageDirection {
    Next,
    Prev,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("candidate window is not visible")]
    WindowHidden,
}

/// Everything a renderer needs after one key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOutput {
    /// `false` means the key belongs to the application and nothing changed.
    pub handled: bool,
    pub commits: Vec<String>,
    pub view: CompositionView,
    pub window: Option<CandidateList>,
    pub beep: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Window {
    candidates: Vec<String>,
    page: usize,
    highlighted: usize,
    /// Opened by autocompose while typing, rather than by an explicit request.
    auto: bool,
}

#[derive(Debug, Default)]
struct Step {
    passthrough: bool,
    commits: Vec<String>,
    beep: bool,
}

impl Step {
    fn handled() -> Step {
        Step::default()
    }

    fn passthrough() -> Step {
        Step {
            passthrough: true,
            ..Step::default()
        }
    }

    fn beep() -> Step {
        Step {
            beep: true,
            ..Step::default()
        }
    }

    fn commit(text: String) -> Step {
        Step {
            commits: vec![text],
            ..Step::default()
        }
    }
}

#[derive(Debug)]
pub struct Session {
    store: Arc<dyn TableStore>,
    config: BehaviorConfig,
    keynames: Arc<IndexMap<char, String>>,
    ctx: ServiceContext,
    reading: Vec<char>,
    window: Option<Window>,
}

impl Session {
    pub fn new(
        store: Arc<dyn TableStore>,
        config: BehaviorConfig,
        keynames: Arc<IndexMap<char, String>>,
    ) -> Session {
        Session {
            store,
            config,
            keynames,
            ctx: ServiceContext::default(),
            reading: Vec::new(),
            window: None,
        }
    }

    /// Beeps are also forwarded to the context's beep callback.
    pub fn with_context(mut self, ctx: ServiceContext) -> Session {
        self.ctx = ctx;
        self
    }

    pub fn config(&self) -> &BehaviorConfig {
        &self.config
    }

    pub fn reading(&self) -> &[char] {
        &self.reading
    }

    pub fn process_key(&mut self, event: KeyEvent) -> EngineOutput {
        let step = if event.modifiers.is_command() {
            Step::passthrough()
        } else {
            match event.kind {
                KeyKind::Char(c) => self.on_char(c),
                KeyKind::Named(NamedKey::Space) => self.on_space(),
                KeyKind::Named(NamedKey::Backspace) => self.on_backspace(),
                KeyKind::Named(NamedKey::Escape) => self.on_escape(),
                KeyKind::Named(NamedKey::Enter) => self.on_enter(),
            }
        };
        if step.beep {
            self.ctx.beep();
        }
        self.output(step)
    }

    pub fn page_candidates(&mut self, direction: PageDirection) -> Result<EngineOutput, EngineError> {
        let page_size = self.config.page_size();
        let window = self.window.as_mut().ok_or(EngineError::WindowHidden)?;
        let pages = window.candidates.len().div_ceil(page_size).max(1);
        window.page = match direction {
            PageDirection::Next => (window.page + 1) % pages,
            PageDirection::Prev => (window.page + pages - 1) % pages,
        };
        window.highlighted = 0;
        Ok(self.output(Step::handled()))
    }

    pub fn current_view(&self) -> CompositionView {
        let composing = self
            .reading
            .iter()
            .map(|c| match self.keynames.get(c) {
                Some(label) => label.clone(),
                None => c.to_string(),
            })
            .collect();
        CompositionView::new(composing)
    }

    pub fn current_window(&self) -> Option<CandidateList> {
        let window = self.window.as_ref()?;
        let page_size = self.config.page_size();
        let start = window.page * page_size;
        let items = window.candidates[start..]
            .iter()
            .zip(self.config.selection_keys.chars())
            .map(|(text, label)| Candidate {
                label,
                text: text.clone(),
            })
            .collect();
        Some(CandidateList {
            items,
            highlighted: window.highlighted,
            page: window.page,
            page_size,
            page_count: window.candidates.len().div_ceil(page_size),
        })
    }

    fn output(&self, step: Step) -> EngineOutput {
        EngineOutput {
            handled: !step.passthrough,
            commits: step.commits,
            view: self.current_view(),
            window: self.current_window(),
            beep: step.beep,
        }
    }

    fn reading_string(&self) -> String {
        self.reading.iter().collect()
    }

    fn lookup(&self) -> Vec<String> {
        let seq = self.reading_string();
        self.store.lookup_exact(&seq).unwrap_or_else(|e| {
            tracing::warn!(sequence = %seq, error = %e, "table lookup failed");
            Vec::new()
        })
    }

    fn clear(&mut self) {
        self.reading.clear();
        self.window = None;
    }

    fn open_window(&mut self, candidates: Vec<String>, auto: bool) {
        self.window = Some(Window {
            candidates,
            page: 0,
            highlighted: 0,
            auto,
        });
    }

    /// Re-derives the autocompose window from the reading.
    fn refresh_auto_window(&mut self) {
        self.window = None;
        if self.config.autocompose && !self.reading.is_empty() {
            let candidates = self.lookup();
            if !candidates.is_empty() {
                self.open_window(candidates, true);
            }
        }
    }

    fn commit_from_window(&mut self, index_on_page: usize) -> Step {
        let Some(window) = &self.window else {
            return Step::beep();
        };
        let index = window.page * self.config.page_size() + index_on_page;
        match window.candidates.get(index) {
            Some(text) if index_on_page < self.config.page_size() => {
                let text = text.clone();
                self.clear();
                Step::commit(text)
            }
            _ => Step::beep(),
        }
    }

    fn on_char(&mut self, c: char) -> Step {
        if let Some(window) = &self.window {
            if let Some(index) = self.config.selection_index(c) {
                return self.commit_from_window(index);
            }
            if !window.auto {
                return Step::beep();
            }
        }
        if !self.keynames.contains_key(&c) {
            return if self.reading.is_empty() {
                Step::passthrough()
            } else {
                Step::beep()
            };
        }
        if self.reading.len() + 1 > self.config.max_seq_len {
            return Step::beep();
        }
        self.reading.push(c);
        if self.reading.len() == self.config.max_seq_len && self.config.commit_at_max {
            let mut candidates = self.lookup();
            return match candidates.len() {
                0 => {
                    self.reading.pop();
                    self.refresh_auto_window();
                    Step::beep()
                }
                1 => {
                    self.clear();
                    Step::commit(candidates.swap_remove(0))
                }
                _ => {
                    self.open_window(candidates, self.config.autocompose);
                    Step::handled()
                }
            };
        }
        self.refresh_auto_window();
        Step::handled()
    }

    fn on_space(&mut self) -> Step {
        if let Some(window) = &self.window {
            if self.config.space_selects_first {
                let highlighted = window.highlighted;
                return self.commit_from_window(highlighted);
            }
            let _ = self.page_candidates(PageDirection::Next);
            return Step::handled();
        }
        if self.reading.is_empty() {
            return Step::passthrough();
        }
        let mut candidates = self.lookup();
        match candidates.len() {
            0 => Step::beep(),
            1 => {
                self.clear();
                Step::commit(candidates.swap_remove(0))
            }
            _ => {
                self.open_window(candidates, false);
                Step::handled()
            }
        }
    }

    fn on_backspace(&mut self) -> Step {
        if self.window.as_ref().is_some_and(|w| !w.auto) {
            self.window = None;
            return Step::handled();
        }
        if self.reading.pop().is_none() {
            return Step::passthrough();
        }
        self.refresh_auto_window();
        Step::handled()
    }

    fn on_escape(&mut self) -> Step {
        if self.reading.is_empty() && self.window.is_none() {
            return Step::passthrough();
        }
        self.clear();
        Step::handled()
    }

    fn on_enter(&mut self) -> Step {
        if self.reading.is_empty() {
            return Step::passthrough();
        }
        let raw = self.reading_string();
        self.clear();
        Step::commit(raw)
    }
}
