#![allow(dead_code)]

use std::fs;
use std::net::SocketAddr;
use std::time::Duration;

use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;
use vanilla_core::protocol::{decode_server_frame, encode_frame, ClientFrame, Direction, ServerFrame};
use vanilla_core::testing::T1_SOURCE;
use vanilla_server::{serve, RunningServer, ServerConfig};

pub const READ_TIMEOUT: Duration = Duration::from_secs(10);

pub fn t1_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("T1.cin"), T1_SOURCE).unwrap();
    dir
}

pub async fn start(dir: &tempfile::TempDir, ws: bool) -> RunningServer {
    let mut config = ServerConfig::new("127.0.0.1:0".parse().unwrap(), dir.path());
    if ws {
        config.ws_listen = Some("127.0.0.1:0".parse().unwrap());
    }
    serve(config).await.unwrap()
}

/// A scripted protocol client over TCP.
pub struct Client {
    reader: BufReader<OwnedReadHalf>,
    writer: OwnedWriteHalf,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> Client {
        let stream = TcpStream::connect(addr).await.unwrap();
        stream.set_nodelay(true).unwrap();
        let (r, w) = stream.into_split();
        Client {
            reader: BufReader::new(r),
            writer: w,
        }
    }

    pub async fn send(&mut self, frame: &ClientFrame) {
        self.writer.write_all(&encode_frame(frame)).await.unwrap();
    }

    pub async fn send_raw(&mut self, bytes: &[u8]) {
        self.writer.write_all(bytes).await.unwrap();
    }

    /// Next raw line, or `None` once the server closed the stream.
    pub async fn recv_line(&mut self) -> Option<String> {
        let mut line = String::new();
        let n = tokio::time::timeout(READ_TIMEOUT, self.reader.read_line(&mut line))
            .await
            .expect("server did not answer in time")
            .ok()?;
        (n > 0).then_some(line)
    }

    pub async fn recv(&mut self) -> ServerFrame {
        let line = self.recv_line().await.expect("connection closed");
        decode_server_frame(line.as_bytes()).unwrap()
    }

    /// Reads frames up to and including the next state frame.
    pub async fn recv_until_state(&mut self) -> Vec<ServerFrame> {
        let mut frames = Vec::new();
        loop {
            let f = self.recv().await;
            let done = matches!(f, ServerFrame::State { .. });
            frames.push(f);
            if done {
                return frames;
            }
        }
    }

    pub async fn hello(&mut self) -> ServerFrame {
        self.send(&ClientFrame::Hello { version: "1".into() }).await;
        self.recv().await
    }

    pub async fn open(&mut self, module: &str) -> u64 {
        self.send(&ClientFrame::OpenSession {
            module: module.into(),
        })
        .await;
        match self.recv().await {
            ServerFrame::SessionOpened { session } => session,
            other => panic!("expected session_opened, got {other:?}"),
        }
    }

    pub async fn key(&mut self, session: u64, key: &str) -> Vec<ServerFrame> {
        self.send(&ClientFrame::Key {
            session,
            key: key.into(),
        })
        .await;
        self.recv_until_state().await
    }
}

pub fn commits(frames: &[ServerFrame]) -> String {
    frames
        .iter()
        .filter_map(|f| match f {
            ServerFrame::Commit { text, .. } => Some(text.as_str()),
            _ => None,
        })
        .collect()
}

/// The scripted T1 session used for golden transcripts.
pub fn t1_script() -> Vec<ClientFrame> {
    let mut frames = vec![
        ClientFrame::Hello { version: "1".into() },
        ClientFrame::OpenSession {
            module: "table:T1".into(),
        },
    ];
    for k in ["a", "b", "space", "a", "space", "2", "z", "a", "escape"] {
        frames.push(ClientFrame::Key {
            session: 1,
            key: k.into(),
        });
    }
    frames.push(ClientFrame::Page {
        session: 1,
        direction: Direction::Next,
    });
    frames.push(ClientFrame::CloseSession { session: 1 });
    frames.push(ClientFrame::Key {
        session: 1,
        key: "a".into(),
    });
    frames
}

/// Runs `script` over one connection and records `> client` / `< server`
/// lines. Each client frame is answered before the next is sent; frames
/// that get no answer are followed by a `list_modules` probe to sync.
pub async fn transcript(addr: SocketAddr, script: &[ClientFrame]) -> String {
    let mut client = Client::connect(addr).await;
    let mut out = String::new();
    for frame in script {
        let line = String::from_utf8(encode_frame(frame)).unwrap();
        out.push_str("> ");
        out.push_str(&line);
        client.send(frame).await;
        let expect_state = matches!(frame, ClientFrame::Key { .. } | ClientFrame::Page { .. });
        if matches!(frame, ClientFrame::CloseSession { .. }) {
            // no reply on success; sync with a probe
            let probe = ClientFrame::ListModules {};
            out.push_str("> ");
            out.push_str(std::str::from_utf8(&encode_frame(&probe)).unwrap());
            client.send(&probe).await;
        }
        loop {
            let line = client.recv_line().await.expect("closed");
            out.push_str("< ");
            out.push_str(&line);
            let f = decode_server_frame(line.as_bytes()).unwrap();
            let done = match f {
                ServerFrame::State { .. } => true,
                ServerFrame::Error { .. }
                | ServerFrame::Welcome { .. }
                | ServerFrame::SessionOpened { .. } => true,
                _ => !expect_state,
            };
            if done {
                break;
            }
        }
    }
    out
}
