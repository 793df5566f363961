//! Keystrokes as seen by input modules.

use std::fmt;

/// The handful of non-character keys an input module reacts to.
///
/// Arrow keys, function keys and the like are deliberately absent; callers
/// treat them as unhandled and deliver them to the application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedKey {
    Space,
    Escape,
    Backspace,
    Enter,
}

impl NamedKey {
    pub const ALL: [NamedKey; 4] = [
        NamedKey::Space,
        NamedKey::Escape,
        NamedKey::Backspace,
        NamedKey::Enter,
    ];

    /// Name used on the wire.
    pub fn as_str(self) -> &'static str {
        match self {
            NamedKey::Space => "space",
            NamedKey::Escape => "escape",
            NamedKey::Backspace => "backspace",
            NamedKey::Enter => "enter",
        }
    }

    pub fn from_name(name: &str) -> Option<NamedKey> {
        NamedKey::ALL.into_iter().find(|k| k.as_str() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyKind {
    Char(char),
    Named(NamedKey),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Modifiers {
    pub shift: bool,
    pub ctrl: bool,
    pub alt: bool,
}

impl Modifiers {
    pub const NONE: Modifiers = Modifiers {
        shift: false,
        ctrl: false,
        alt: false,
    };

    /// Ctrl or Alt held: the keystroke is a shortcut, not text.
    pub fn is_command(self) -> bool {
        self.ctrl || self.alt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyEvent {
    pub kind: KeyKind,
    pub modifiers: Modifiers,
}

impl KeyEvent {
    pub fn char(c: char) -> KeyEvent {
        KeyEvent {
            kind: KeyKind::Char(c),
            modifiers: Modifiers::NONE,
        }
    }

    pub fn named(key: NamedKey) -> KeyEvent {
        KeyEvent {
            kind: KeyKind::Named(key),
            modifiers: Modifiers::NONE,
        }
    }

    pub fn with_modifiers(mut self, modifiers: Modifiers) -> KeyEvent {
        self.modifiers = modifiers;
        self
    }

    /// Parses the wire spelling of a key: a single scalar is a literal
    /// character, anything longer must be one of the named keys.
    pub fn from_wire(key: &str) -> Option<KeyEvent> {
        let mut chars = key.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Some(KeyEvent::char(c)),
            (Some(_), Some(_)) => NamedKey::from_name(key).map(KeyEvent::named),
            (None, _) => None,
        }
    }

    pub fn to_wire(&self) -> String {
        match self.kind {
            KeyKind::Char(c) => c.to_string(),
            KeyKind::Named(k) => k.as_str().to_owned(),
        }
    }

    pub fn as_char(&self) -> Option<char> {
        match self.kind {
            KeyKind::Char(c) => Some(c),
            KeyKind::Named(_) => None,
        }
    }
}

impl fmt::Display for KeyEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_wire())
    }
}
