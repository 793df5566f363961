//! Text-service server.
//!
//! Clients speak the line-delimited JSON protocol from
//! [`vanilla_core::protocol`] over TCP, or the same frames over a WebSocket
//! at `/ws`. The server owns every composition session and reports nothing
//! but state, commit, passthrough and beep frames; rendering is left to the
//! client.

mod connection;
mod net;
mod service;

use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;

pub use connection::{Connection, Reply, MAX_BAD_FRAMES};
pub use net::{serve, serve_with, RunningServer, WS_PATH};
pub use service::Service;

pub const DEFAULT_TCP_LISTEN: &str = "127.0.0.1:9876";
pub const DEFAULT_MAX_SESSIONS: usize = 16;
pub const TABLES_DIR_ENV: &str = "VANILLA_TABLES_DIR";

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub tcp_listen: SocketAddr,
    pub ws_listen: Option<SocketAddr>,
    pub tables_dir: PathBuf,
    /// Used when a client opens a session with an empty module id.
    pub default_module: Option<String>,
    pub max_sessions_per_conn: usize,
}

impl ServerConfig {
    pub fn new(tcp_listen: SocketAddr, tables_dir: impl Into<PathBuf>) -> ServerConfig {
        ServerConfig {
            tcp_listen,
            ws_listen: None,
            tables_dir: tables_dir.into(),
            default_module: None,
            max_sessions_per_conn: DEFAULT_MAX_SESSIONS,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("tables directory {}: {reason}", path.display())]
    TablesDir { path: PathBuf, reason: String },
    #[error("cannot bind {addr}: {source}")]
    BindFailure {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("default module {0:?} is not loaded")]
    UnknownDefaultModule(String),
}
