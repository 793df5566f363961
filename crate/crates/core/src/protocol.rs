//! Text-service wire protocol.
//!
//! Every frame is one JSON object on one line, terminated by `\n`. The
//! `type` field names the variant. Over WebSocket each text message carries
//! one frame without the trailing newline.
//!
//! Clients send [`ClientFrame`]s; the server answers with [`ServerFrame`]s.
//! A `state` frame always describes the complete display, so a renderer
//! never needs anything but the latest one.

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::engine::{EngineOutput, PageDirection};
use crate::view::CandidateList;

pub const PROTOCOL_VERSION: &str = "1";

/// Longest line accepted before the frame is rejected unread.
pub const MAX_FRAME_LEN: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientFrame {
    Hello { version: String },
    ListModules {},
    OpenSession { module: String },
    Key { session: u64, key: String },
    Page { session: u64, direction: Direction },
    CloseSession { session: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Next,
    Prev,
}

impl From<Direction> for PageDirection {
    fn from(d: Direction) -> PageDirection {
        match d {
            Direction::Next => PageDirection::Next,
            Direction::Prev => PageDirection::Prev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModuleInfo {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WireCandidate {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    Welcome {
        version: String,
        modules: Vec<ModuleInfo>,
    },
    SessionOpened {
        session: u64,
    },
    State {
        session: u64,
        composing: String,
        candidates: Vec<WireCandidate>,
        page: u64,
        visible: bool,
    },
    Commit {
        session: u64,
        text: String,
    },
    Passthrough {
        session: u64,
        key: String,
    },
    Beep {
        session: u64,
    },
    Error {
        code: String,
        message: String,
    },
}

impl ServerFrame {
    pub fn error(code: &str, message: impl Into<String>) -> ServerFrame {
        ServerFrame::Error {
            code: code.to_owned(),
            message: message.into(),
        }
    }

    pub fn state(session: u64, composing: &str, window: Option<&CandidateList>) -> ServerFrame {
        match window {
            Some(w) => ServerFrame::State {
                session,
                composing: composing.to_owned(),
                candidates: w
                    .items
                    .iter()
                    .map(|c| WireCandidate {
                        label: c.label.to_string(),
                        text: c.text.clone(),
                    })
                    .collect(),
                page: w.page as u64,
                visible: true,
            },
            None => ServerFrame::State {
                session,
                composing: composing.to_owned(),
                candidates: Vec::new(),
                page: 0,
                visible: false,
            },
        }
    }

    /// Projects one engine transition onto frames: commits, then passthrough
    /// or beep, then exactly one state frame.
    pub fn from_output(session: u64, key: &str, out: &EngineOutput) -> Vec<ServerFrame> {
        let mut frames: Vec<ServerFrame> = out
            .commits
            .iter()
            .map(|text| ServerFrame::Commit {
                session,
                text: text.clone(),
            })
            .collect();
        if !out.handled {
            frames.push(ServerFrame::Passthrough {
                session,
                key: key.to_owned(),
            });
        }
        if out.beep {
            frames.push(ServerFrame::Beep { session });
        }
        frames.push(ServerFrame::state(
            session,
            &out.view.composing,
            out.window.as_ref(),
        ));
        frames
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad frame: {0}")]
pub struct BadFrame(pub String);

fn bad(reason: impl Into<String>) -> BadFrame {
    BadFrame(reason.into())
}

/// Serializes a frame as JSON without the line terminator.
pub fn encode_json<T: Serialize>(frame: &T) -> String {
    // Frames hold only strings, integers, booleans and lists of those.
    serde_json::to_string(frame).expect("frame serialization cannot fail")
}

/// One LF-terminated line. JSON escapes control characters inside strings,
/// so the only raw LF is the terminator.
pub fn encode_frame<T: Serialize>(frame: &T) -> Vec<u8> {
    let mut line = encode_json(frame).into_bytes();
    line.push(b'\n');
    line
}

/// Reads a JSON object with a `type` field, tolerating a trailing CR/LF and
/// surrounding whitespace.
fn decode_object(bytes: &[u8]) -> Result<(String, Map<String, Value>), BadFrame> {
    let text = std::str::from_utf8(bytes).map_err(|_| bad("invalid UTF-8"))?;
    let text = text.strip_suffix('\n').unwrap_or(text);
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.contains('\n') {
        return Err(bad("more than one line"));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    let Value::Object(mut map) = value else {
        return Err(bad("frame is not a JSON object"));
    };
    match map.remove("type") {
        Some(Value::String(t)) => Ok((t, map)),
        Some(_) => Err(bad("type not a string")),
        None => Err(bad("missing field type")),
    }
}

struct Fields(Map<String, Value>);

impl Fields {
    fn take(&mut self, name: &str) -> Result<Value, BadFrame> {
        self.0
            .remove(name)
            .ok_or_else(|| bad(format!("missing field {name}")))
    }

    fn string(&mut self, name: &str) -> Result<String, BadFrame> {
        match self.take(name)? {
            Value::String(s) => Ok(s),
            _ => Err(bad(format!("{name} not a string"))),
        }
    }

    fn nonempty(&mut self, name: &str) -> Result<String, BadFrame> {
        let s = self.string(name)?;
        if s.is_empty() {
            return Err(bad(format!("{name} is empty")));
        }
        Ok(s)
    }

    fn uint(&mut self, name: &str) -> Result<u64, BadFrame> {
        self.take(name)?
            .as_u64()
            .ok_or_else(|| bad(format!("{name} not integer")))
    }

    fn session(&mut self) -> Result<u64, BadFrame> {
        match self.uint("session")? {
            0 => Err(bad("session not positive")),
            id => Ok(id),
        }
    }

    fn boolean(&mut self, name: &str) -> Result<bool, BadFrame> {
        self.take(name)?
            .as_bool()
            .ok_or_else(|| bad(format!("{name} not boolean")))
    }

    fn array(&mut self, name: &str) -> Result<Vec<Value>, BadFrame> {
        match self.take(name)? {
            Value::Array(items) => Ok(items),
            _ => Err(bad(format!("{name} not a list"))),
        }
    }
}

fn object(value: Value, what: &str) -> Result<Fields, BadFrame> {
    match value {
        Value::Object(map) => Ok(Fields(map)),
        _ => Err(bad(format!("{what} entry not an object"))),
    }
}

pub fn decode_client_frame(bytes: &[u8]) -> Result<ClientFrame, BadFrame> {
    let (kind, map) = decode_object(bytes)?;
    let mut f = Fields(map);
    Ok(match kind.as_str() {
        "hello" => ClientFrame::Hello {
            version: f.string("version")?,
        },
        "list_modules" => ClientFrame::ListModules {},
        "open_session" => ClientFrame::OpenSession {
            module: f.string("module")?,
        },
        "key" => ClientFrame::Key {
            session: f.session()?,
            key: f.nonempty("key")?,
        },
        "page" => {
            let session = f.session()?;
            let direction = match f.string("direction")?.as_str() {
                "next" => Direction::Next,
                "prev" => Direction::Prev,
                other => return Err(bad(format!("unknown direction {other:?}"))),
            };
            ClientFrame::Page { session, direction }
        }
        "close_session" => ClientFrame::CloseSession {
            session: f.session()?,
        },
        other => return Err(bad(format!("unknown type {other:?}"))),
    })
}

pub fn decode_server_frame(bytes: &[u8]) -> Result<ServerFrame, BadFrame> {
    let (kind, map) = decode_object(bytes)?;
    let mut f = Fields(map);
    Ok(match kind.as_str() {
        "welcome" => {
            let version = f.string("version")?;
            let modules = f
                .array("modules")?
                .into_iter()
                .map(|m| {
                    let mut m = object(m, "modules")?;
                    Ok(ModuleInfo {
                        id: m.string("id")?,
                        name: m.string("name")?,
                    })
                })
                .collect::<Result<_, BadFrame>>()?;
            ServerFrame::Welcome { version, modules }
        }
        "session_opened" => ServerFrame::SessionOpened {
            session: f.session()?,
        },
        "state" => {
            let session = f.session()?;
            let composing = f.string("composing")?;
            let candidates = f
                .array("candidates")?
                .into_iter()
                .map(|c| {
                    let mut c = object(c, "candidates")?;
                    Ok(WireCandidate {
                        label: c.string("label")?,
                        text: c.string("text")?,
                    })
                })
                .collect::<Result<_, BadFrame>>()?;
            ServerFrame::State {
                session,
                composing,
                candidates,
                page: f.uint("page")?,
                visible: f.boolean("visible")?,
            }
        }
        "commit" => ServerFrame::Commit {
            session: f.session()?,
            text: f.string("text")?,
        },
        "passthrough" => ServerFrame::Passthrough {
            session: f.session()?,
            key: f.nonempty("key")?,
        },
        "beep" => ServerFrame::Beep {
            session: f.session()?,
        },
        "error" => ServerFrame::Error {
            code: f.string("code")?,
            message: f.string("message")?,
        },
        other => return Err(bad(format!("unknown type {other:?}"))),
    })
}

/// Splits a byte stream into LF-terminated lines, however the bytes were
/// chunked in transit.
#[derive(Debug, Default)]
pub struct LineAssembler {
    buf: Vec<u8>,
    /// Scan resumes here; everything before it is known to hold no LF.
    scanned: usize,
    discarding: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Line {
    Complete(Vec<u8>),
    /// A line longer than [`MAX_FRAME_LEN`] was dropped.
    Overlong,
}

impl LineAssembler {
    pub fn new() -> LineAssembler {
        LineAssembler::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Bytes buffered without a terminating LF yet.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    pub fn next_line(&mut self) -> Option<Line> {
        match self.buf[self.scanned..].iter().position(|&b| b == b'\n') {
            Some(i) => {
                let end = self.scanned + i + 1;
                let line: Vec<u8> = self.buf.drain(..end).collect();
                self.scanned = 0;
                if std::mem::take(&mut self.discarding) {
                    return Some(Line::Overlong);
                }
                if line.len() > MAX_FRAME_LEN + 1 {
                    return Some(Line::Overlong);
                }
                Some(Line::Complete(line))
            }
            None => {
                if self.buf.len() > MAX_FRAME_LEN {
                    self.discarding = true;
                    self.buf.clear();
                }
                self.scanned = self.buf.len();
                None
            }
        }
    }
}
