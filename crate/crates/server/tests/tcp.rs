mod common;

use std::time::{Duration, Instant};

use common::{commits, start, t1_dir, t1_script, transcript, Client};
use vanilla_core::protocol::{ClientFrame, ServerFrame};
use vanilla_server::{serve, ServerConfig, ServerError, MAX_BAD_FRAMES};

const GOLDEN: &str = include_str!("golden/t1_session.ndjson");

fn error_code(frame: &ServerFrame) -> &str {
    match frame {
        ServerFrame::Error { code, .. } => code,
        other => panic!("expected error, got {other:?}"),
    }
}

#[tokio::test]
async fn welcome_lists_loaded_tables() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    match c.hello().await {
        ServerFrame::Welcome { version, modules } => {
            assert_eq!(version, "1");
            assert_eq!(modules.len(), 1);
            assert_eq!(modules[0].id, "table:T1");
            assert_eq!(modules[0].name, "Demo");
        }
        other => panic!("{other:?}"),
    }
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn golden_transcript_is_stable() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    for _ in 0..10 {
        let got = transcript(server.tcp_addr(), &t1_script()).await;
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/t1_session.ndjson");
            std::fs::write(path, &got).unwrap();
            continue;
        }
        assert_eq!(got, GOLDEN);
    }
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn typing_commits_over_the_wire() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    c.hello().await;
    let s = c.open("table:T1").await;
    let mut all = Vec::new();
    for k in ["a", "b", "space", "a", "space", "2"] {
        all.extend(c.key(s, k).await);
    }
    assert_eq!(commits(&all), "明月");
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn sessions_on_one_connection_are_independent() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    c.hello().await;
    let s1 = c.open("table:T1").await;
    let s2 = c.open("table:T1").await;
    assert_ne!(s1, s2);
    c.key(s1, "a").await;
    let f = c.key(s2, "b").await;
    assert_eq!(f.last().unwrap(), &ServerFrame::state(s2, "B", None));
    let f = c.key(s1, "b").await;
    assert_eq!(f.last().unwrap(), &ServerFrame::state(s1, "AB", None));
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn concurrent_connections_match_sequential_runs() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let addr = server.tcp_addr();
    let reference = transcript(addr, &t1_script()).await;
    let tasks: Vec<_> = (0..20)
        .map(|_| tokio::spawn(async move { transcript(addr, &t1_script()).await }))
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap(), reference);
    }
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn bad_frames_are_reported_then_connection_closes() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    c.hello().await;
    // a good frame resets the streak
    for _ in 0..MAX_BAD_FRAMES {
        c.send_raw(b"{nope\n").await;
        assert_eq!(error_code(&c.recv().await), "bad_frame");
    }
    c.send(&ClientFrame::ListModules {}).await;
    assert!(matches!(c.recv().await, ServerFrame::Welcome { .. }));
    for _ in 0..=MAX_BAD_FRAMES {
        c.send_raw(b"[]\n").await;
        assert_eq!(error_code(&c.recv().await), "bad_frame");
    }
    assert_eq!(c.recv_line().await, None);
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn overlong_line_is_a_bad_frame() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    c.hello().await;
    let mut junk = vec![b'x'; 200 * 1024];
    junk.push(b'\n');
    c.send_raw(&junk).await;
    assert_eq!(error_code(&c.recv().await), "bad_frame");
    c.send(&ClientFrame::ListModules {}).await;
    assert!(matches!(c.recv().await, ServerFrame::Welcome { .. }));
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn frames_split_across_writes_are_reassembled() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    let bytes = br#"{"type":"hello","version":"1"}
{"type":"open_session","module":"table:T1"}
"#;
    for chunk in bytes.chunks(3) {
        c.send_raw(chunk).await;
        tokio::time::sleep(Duration::from_millis(1)).await;
    }
    assert!(matches!(c.recv().await, ServerFrame::Welcome { .. }));
    assert_eq!(c.recv().await, ServerFrame::SessionOpened { session: 1 });
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn shutdown_without_clients_is_prompt() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let started = Instant::now();
    server.shutdown(Duration::from_secs(5)).await;
    assert!(started.elapsed() < Duration::from_secs(1));
}

#[tokio::test]
async fn shutdown_closes_idle_clients_cleanly() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    c.hello().await;
    let started = Instant::now();
    server.shutdown(Duration::from_secs(5)).await;
    assert!(started.elapsed() < Duration::from_secs(1));
    assert_eq!(c.recv_line().await, None);
}

#[tokio::test]
async fn shutdown_answers_in_flight_keys() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let mut c = Client::connect(server.tcp_addr()).await;
    c.hello().await;
    let s = c.open("table:T1").await;
    c.send(&ClientFrame::Key {
        session: s,
        key: "a".into(),
    })
    .await;
    server.shutdown(Duration::from_secs(5)).await;
    assert_eq!(c.recv_until_state().await, vec![ServerFrame::state(s, "A", None)]);
    assert_eq!(c.recv_line().await, None);
}

#[tokio::test]
async fn bind_failure_is_reported() {
    let dir = t1_dir();
    let server = start(&dir, false).await;
    let config = ServerConfig::new(server.tcp_addr(), dir.path());
    match serve(config).await {
        Err(ServerError::BindFailure { addr, .. }) => assert_eq!(addr, server.tcp_addr()),
        Err(other) => panic!("{other}"),
        Ok(_) => panic!("second bind succeeded"),
    }
    server.shutdown(Duration::from_secs(1)).await;
}

#[tokio::test]
async fn missing_tables_dir_fails_fast() {
    let dir = t1_dir();
    let config = ServerConfig::new("127.0.0.1:0".parse().unwrap(), dir.path().join("absent"));
    assert!(matches!(serve(config).await, Err(ServerError::TablesDir { .. })));
}

#[tokio::test]
async fn unknown_default_module_fails_fast() {
    let dir = t1_dir();
    let mut config = ServerConfig::new("127.0.0.1:0".parse().unwrap(), dir.path());
    config.default_module = Some("table:nope".into());
    assert!(matches!(
        serve(config).await,
        Err(ServerError::UnknownDefaultModule(_))
    ));
}
