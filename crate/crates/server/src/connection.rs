use std::collections::BTreeMap;
use std::sync::Arc;

use vanilla_core::engine::Session;
use vanilla_core::protocol::{decode_client_frame, ClientFrame, ServerFrame, PROTOCOL_VERSION};
use vanilla_core::KeyEvent;

use crate::Service;

/// Consecutive undecodable frames tolerated before the connection is dropped.
pub const MAX_BAD_FRAMES: u32 = 10;

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Reply {
    pub frames: Vec<ServerFrame>,
    /// The peer has sent too many bad frames in a row.
    pub close: bool,
}

/// Protocol state of one client connection, independent of the transport.
/// Frames are handled strictly one after another.
pub struct Connection {
    service: Arc<Service>,
    greeted: bool,
    sessions: BTreeMap<u64, Session>,
    next_id: u64,
    bad_streak: u32,
}

impl Connection {
    pub fn new(service: Arc<Service>) -> Connection {
        Connection {
            service,
            greeted: false,
            sessions: BTreeMap::new(),
            next_id: 1,
            bad_streak: 0,
        }
    }

    pub fn open_sessions(&self) -> usize {
        self.sessions.len()
    }

    /// Decodes and handles one line (or one WebSocket message).
    pub fn handle_line(&mut self, bytes: &[u8]) -> Reply {
        match decode_client_frame(bytes) {
            Ok(frame) => {
                self.bad_streak = 0;
                Reply {
                    frames: self.handle_frame(frame),
                    close: false,
                }
            }
            Err(e) => self.bad_frame(&e.0),
        }
    }

    pub fn bad_frame(&mut self, reason: &str) -> Reply {
        self.bad_streak += 1;
        Reply {
            frames: vec![ServerFrame::error("bad_frame", reason)],
            close: self.bad_streak > MAX_BAD_FRAMES,
        }
    }

    pub fn handle_frame(&mut self, frame: ClientFrame) -> Vec<ServerFrame> {
        if !self.greeted && !matches!(frame, ClientFrame::Hello { .. }) {
            return vec![ServerFrame::error("protocol", "send hello first")];
        }
        match frame {
            ClientFrame::Hello { version } => {
                if version != PROTOCOL_VERSION {
                    return vec![ServerFrame::error(
                        "unsupported_version",
                        format!("server speaks version {PROTOCOL_VERSION}, not {version:?}"),
                    )];
                }
                self.greeted = true;
                vec![self.service.welcome()]
            }
            ClientFrame::ListModules {} => vec![self.service.welcome()],
            ClientFrame::OpenSession { module } => {
                let Some(m) = self.service.resolve(&module) else {
                    return vec![ServerFrame::error(
                        "unknown_module",
                        format!("no module {module:?}"),
                    )];
                };
                if self.sessions.len() >= self.service.max_sessions() {
                    return vec![ServerFrame::error(
                        "too_many_sessions",
                        format!("at most {} sessions per connection", self.service.max_sessions()),
                    )];
                }
                let id = self.next_id;
                self.next_id += 1;
                self.sessions
                    .insert(id, m.create_session(self.service.context().clone()));
                vec![ServerFrame::SessionOpened { session: id }]
            }
            ClientFrame::Key { session, key } => {
                let Some(s) = self.sessions.get_mut(&session) else {
                    return vec![unknown_session(session)];
                };
                match KeyEvent::from_wire(&key) {
                    Some(event) => ServerFrame::from_output(session, &key, &s.process_key(event)),
                    // keys outside the supported set belong to the application
                    None => vec![
                        ServerFrame::Passthrough { session, key },
                        ServerFrame::state(session, &s.current_view().composing, s.current_window().as_ref()),
                    ],
                }
            }
            ClientFrame::Page { session, direction } => {
                let Some(s) = self.sessions.get_mut(&session) else {
                    return vec![unknown_session(session)];
                };
                match s.page_candidates(direction.into()) {
                    Ok(out) => vec![ServerFrame::state(
                        session,
                        &out.view.composing,
                        out.window.as_ref(),
                    )],
                    Err(e) => vec![ServerFrame::error("window_hidden", e.to_string())],
                }
            }
            ClientFrame::CloseSession { session } => match self.sessions.remove(&session) {
                Some(_) => Vec::new(),
                None => vec![unknown_session(session)],
            },
        }
    }
}

fn unknown_session(id: u64) -> ServerFrame {
    ServerFrame::error("unknown_session", format!("no open session {id}"))
}
