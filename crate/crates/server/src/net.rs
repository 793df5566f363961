use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::tcp::OwnedWriteHalf;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::watch;
use tokio::task::{JoinHandle, JoinSet};
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::handshake::server::{ErrorResponse, Request, Response};
use tokio_tungstenite::tungstenite::http::StatusCode;
use tokio_tungstenite::tungstenite::Message;
use vanilla_core::protocol::{encode_frame, encode_json, Line, LineAssembler};

use crate::{Connection, ServerConfig, ServerError, Service};

pub const WS_PATH: &str = "/ws";

/// How long a closing connection keeps reading frames the client already
/// sent before the shutdown signal.
const DRAIN_WINDOW: Duration = Duration::from_millis(50);

/// A server accepting connections in the background.
pub struct RunningServer {
    tcp_addr: SocketAddr,
    ws_addr: Option<SocketAddr>,
    shutdown: watch::Sender<bool>,
    acceptors: Vec<JoinHandle<()>>,
}

/// Loads the tables, binds the listeners and starts accepting.
pub async fn serve(config: ServerConfig) -> Result<RunningServer, ServerError> {
    let service = Arc::new(Service::load(&config)?);
    serve_with(service, config.tcp_listen, config.ws_listen).await
}

pub async fn serve_with(
    service: Arc<Service>,
    tcp_listen: SocketAddr,
    ws_listen: Option<SocketAddr>,
) -> Result<RunningServer, ServerError> {
    let bind = |addr: SocketAddr| async move {
        TcpListener::bind(addr)
            .await
            .map_err(|source| ServerError::BindFailure { addr, source })
    };
    let tcp = bind(tcp_listen).await?;
    let ws = match ws_listen {
        Some(addr) => Some(bind(addr).await?),
        None => None,
    };
    let local = |l: &TcpListener, fallback: SocketAddr| l.local_addr().unwrap_or(fallback);
    let tcp_addr = local(&tcp, tcp_listen);
    let ws_addr = ws.as_ref().zip(ws_listen).map(|(l, a)| local(l, a));

    let (shutdown, _) = watch::channel(false);
    let mut acceptors = vec![tokio::spawn(accept_loop(
        tcp,
        service.clone(),
        shutdown.subscribe(),
        Transport::Tcp,
    ))];
    if let Some(ws) = ws {
        acceptors.push(tokio::spawn(accept_loop(
            ws,
            service,
            shutdown.subscribe(),
            Transport::WebSocket,
        )));
    }
    tracing::info!(%tcp_addr, ?ws_addr, "listening");
    Ok(RunningServer {
        tcp_addr,
        ws_addr,
        shutdown,
        acceptors,
    })
}

impl RunningServer {
    pub fn tcp_addr(&self) -> SocketAddr {
        self.tcp_addr
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_addr
    }

    /// Stops accepting, lets open connections flush and close, and
    /// force-closes whatever is still running once `grace` has passed.
    pub async fn shutdown(self, grace: Duration) {
        let _ = self.shutdown.send(true);
        let mut acceptors = self.acceptors;
        let all = futures_util::future::join_all(acceptors.iter_mut());
        if timeout(grace, all).await.is_err() {
            tracing::warn!("grace period expired, closing remaining connections");
            for a in &acceptors {
                a.abort();
            }
        }
    }

    /// Serves until Ctrl-C, then shuts down.
    pub async fn run_until_ctrl_c(self, grace: Duration) {
        let _ = tokio::signal::ctrl_c().await;
        tracing::info!("shutting down");
        self.shutdown(grace).await;
    }
}

#[derive(Debug, Clone, Copy)]
enum Transport {
    Tcp,
    WebSocket,
}

async fn accept_loop(
    listener: TcpListener,
    service: Arc<Service>,
    mut shutdown: watch::Receiver<bool>,
    transport: Transport,
) {
    // dropping the set on abort closes every connection it holds
    let mut connections = JoinSet::new();
    loop {
        tokio::select! {
            accepted = listener.accept() => match accepted {
                Ok((stream, peer)) => {
                    tracing::debug!(%peer, ?transport, "connection");
                    let service = service.clone();
                    let shutdown = shutdown.clone();
                    match transport {
                        Transport::Tcp => connections.spawn(tcp_connection(stream, service, shutdown)),
                        Transport::WebSocket => connections.spawn(ws_connection(stream, service, shutdown)),
                    };
                }
                Err(e) => tracing::warn!(error = %e, "accept failed"),
            },
            Some(_) = connections.join_next(), if !connections.is_empty() => {}
            _ = shutdown.changed() => break,
        }
    }
    drop(listener);
    while connections.join_next().await.is_some() {}
}

/// Feeds received bytes through the connection and writes the replies.
/// Returns `false` when the connection must close.
async fn feed(
    conn: &mut Connection,
    lines: &mut LineAssembler,
    bytes: &[u8],
    writer: &mut OwnedWriteHalf,
) -> bool {
    lines.push(bytes);
    let mut out = Vec::new();
    let mut keep_open = true;
    while let Some(line) = lines.next_line() {
        let reply = match line {
            Line::Complete(line) if line.trim_ascii().is_empty() => continue,
            Line::Complete(line) => conn.handle_line(&line),
            Line::Overlong => conn.bad_frame("frame too long"),
        };
        for frame in &reply.frames {
            out.extend(encode_frame(frame));
        }
        if reply.close {
            keep_open = false;
            break;
        }
    }
    if !out.is_empty() && writer.write_all(&out).await.is_err() {
        return false;
    }
    keep_open
}

async fn tcp_connection(stream: TcpStream, service: Arc<Service>, mut shutdown: watch::Receiver<bool>) {
    let _ = stream.set_nodelay(true);
    let (mut reader, mut writer) = stream.into_split();
    let mut conn = Connection::new(service);
    let mut lines = LineAssembler::new();
    let mut buf = vec![0u8; 16 * 1024];
    loop {
        tokio::select! {
            read = reader.read(&mut buf) => match read {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if !feed(&mut conn, &mut lines, &buf[..n], &mut writer).await {
                        break;
                    }
                }
            },
            _ = shutdown.changed() => {
                while let Ok(Ok(n)) = timeout(DRAIN_WINDOW, reader.read(&mut buf)).await {
                    if n == 0 || !feed(&mut conn, &mut lines, &buf[..n], &mut writer).await {
                        break;
                    }
                }
                break;
            }
        }
    }
    let _ = writer.shutdown().await;
}

// the signature is fixed by the handshake callback
#[allow(clippy::result_large_err)]
fn check_path(request: &Request, response: Response) -> Result<Response, ErrorResponse> {
    if request.uri().path() == WS_PATH {
        return Ok(response);
    }
    let mut err = ErrorResponse::new(Some(format!("the endpoint is {WS_PATH}")));
    *err.status_mut() = StatusCode::NOT_FOUND;
    Err(err)
}

async fn ws_connection(stream: TcpStream, service: Arc<Service>, mut shutdown: watch::Receiver<bool>) {
    let _ = stream.set_nodelay(true);
    let ws = match tokio_tungstenite::accept_hdr_async(stream, check_path).await {
        Ok(ws) => ws,
        Err(e) => {
            tracing::debug!(error = %e, "websocket handshake failed");
            return;
        }
    };
    let (mut sink, mut source) = ws.split();
    let mut conn = Connection::new(service);
    loop {
        let message = tokio::select! {
            m = source.next() => m,
            _ = shutdown.changed() => break,
        };
        let reply = match message {
            Some(Ok(Message::Text(text))) => conn.handle_line(text.as_bytes()),
            Some(Ok(Message::Binary(bytes))) => conn.handle_line(&bytes),
            Some(Ok(Message::Ping(_) | Message::Pong(_) | Message::Frame(_))) => continue,
            Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
        };
        let mut failed = false;
        for frame in &reply.frames {
            if sink.feed(Message::text(encode_json(frame))).await.is_err() {
                failed = true;
                break;
            }
        }
        if failed || sink.flush().await.is_err() || reply.close {
            break;
        }
    }
    let _ = sink.send(Message::Close(None)).await;
}
