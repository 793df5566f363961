use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use indexmap::IndexMap;
use rusqlite::{params, Connection, OpenFlags, OptionalExtension};

use super::{prefix_successor, QueryPattern, SequenceMatch, StoreError, TableStore};
use crate::cintable::{BehaviorConfig, CinTable};

pub const SCHEMA_VERSION: i64 = 1;

const SCHEMA: &str = "
CREATE TABLE meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE keyname (ord INTEGER PRIMARY KEY, key TEXT NOT NULL UNIQUE, label TEXT NOT NULL);
CREATE TABLE chardef (rank INTEGER PRIMARY KEY, sequence TEXT NOT NULL, text TEXT NOT NULL);
CREATE INDEX chardef_sequence ON chardef (sequence, rank);
";

/// A table imported into a single SQLite file.
///
/// Besides the chardef rows the file carries the table names, keynames and
/// behavior settings, so a session can run from the file alone.
#[derive(Debug)]
pub struct SqliteStore {
    conn: Mutex<Connection>,
    path: PathBuf,
    ename: String,
    cname: String,
    keynames: IndexMap<char, String>,
    behavior: BehaviorConfig,
    keys: HashSet<char>,
}

fn io_failure(path: &Path, err: impl ToString) -> StoreError {
    StoreError::IoFailure {
        path: path.to_owned(),
        reason: err.to_string(),
    }
}

fn query_failure(err: rusqlite::Error) -> StoreError {
    StoreError::Query(err.to_string())
}

/// Writes `table` to a fresh database at `path`, replacing any file there.
pub fn import_table(table: &CinTable, path: &Path) -> Result<SqliteStore, StoreError> {
    match fs::remove_file(path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(io_failure(path, e)),
    }
    let mut conn = Connection::open(path).map_err(|e| io_failure(path, e))?;
    write_table(&mut conn, table).map_err(|e| io_failure(path, e))?;
    drop(conn);
    SqliteStore::open(path)
}

fn write_table(conn: &mut Connection, table: &CinTable) -> rusqlite::Result<()> {
    let tx = conn.transaction()?;
    tx.execute_batch(SCHEMA)?;
    {
        let b = &table.behavior;
        let mut meta = tx.prepare("INSERT INTO meta (key, value) VALUES (?1, ?2)")?;
        for (k, v) in [
            ("schema_version", SCHEMA_VERSION.to_string()),
            ("ename", table.ename.clone()),
            ("cname", table.cname.clone()),
            ("selkey", b.selection_keys.clone()),
            ("autocompose", b.autocompose.to_string()),
            ("maxseq", b.max_seq_len.to_string()),
            ("commitatmax", b.commit_at_max.to_string()),
            ("spacesel", b.space_selects_first.to_string()),
        ] {
            meta.execute(params![k, v])?;
        }
        let mut kn = tx.prepare("INSERT INTO keyname (ord, key, label) VALUES (?1, ?2, ?3)")?;
        for (i, (key, label)) in table.keynames.iter().enumerate() {
            kn.execute(params![i as i64, key.to_string(), label])?;
        }
        let mut cd = tx.prepare("INSERT INTO chardef (rank, sequence, text) VALUES (?1, ?2, ?3)")?;
        for (rank, c) in table.chardefs.iter().enumerate() {
            cd.execute(params![rank as i64, c.sequence, c.text])?;
        }
    }
    tx.commit()
}

impl SqliteStore {
    pub fn open(path: &Path) -> Result<SqliteStore, StoreError> {
        SqliteStore::open_expecting(path, SCHEMA_VERSION)
    }

    /// Opens read-only, failing unless the file records `expected` as its
    /// schema version.
    pub fn open_expecting(path: &Path, expected: i64) -> Result<SqliteStore, StoreError> {
        let flags = OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX;
        let conn = Connection::open_with_flags(path, flags).map_err(|e| io_failure(path, e))?;

        let has_meta: bool = conn
            .query_row(
                "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'meta'",
                [],
                |r| r.get::<_, i64>(0),
            )
            .map(|n| n > 0)
            .map_err(|e| io_failure(path, e))?;
        let meta = |key: &str| -> Result<Option<String>, StoreError> {
            conn.query_row("SELECT value FROM meta WHERE key = ?1", [key], |r| r.get(0))
                .optional()
                .map_err(|e| io_failure(path, e))
        };
        let found = if has_meta {
            meta("schema_version")?.and_then(|v| v.parse().ok()).unwrap_or(0)
        } else {
            0
        };
        if found != expected {
            return Err(StoreError::SchemaMismatch { found, expected });
        }

        let corrupt = |what: &str| io_failure(path, format!("corrupt metadata: {what}"));
        let flag = |key: &str| -> Result<bool, StoreError> {
            match meta(key)?.as_deref() {
                Some("true") => Ok(true),
                Some("false") => Ok(false),
                _ => Err(corrupt(key)),
            }
        };
        let behavior = BehaviorConfig {
            autocompose: flag("autocompose")?,
            max_seq_len: meta("maxseq")?
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| corrupt("maxseq"))?,
            commit_at_max: flag("commitatmax")?,
            selection_keys: meta("selkey")?.ok_or_else(|| corrupt("selkey"))?,
            space_selects_first: flag("spacesel")?,
        };
        let ename = meta("ename")?.unwrap_or_default();
        let cname = meta("cname")?.unwrap_or_default();

        let mut keynames = IndexMap::new();
        {
            let mut stmt = conn
                .prepare("SELECT key, label FROM keyname ORDER BY ord")
                .map_err(|e| io_failure(path, e))?;
            let rows = stmt
                .query_map([], |r| Ok((r.get::<_, String>(0)?, r.get::<_, String>(1)?)))
                .map_err(|e| io_failure(path, e))?;
            for row in rows {
                let (key, label) = row.map_err(|e| io_failure(path, e))?;
                let mut chars = key.chars();
                match (chars.next(), chars.next()) {
                    (Some(k), None) => keynames.insert(k, label),
                    _ => return Err(corrupt("keyname key")),
                };
            }
        }

        Ok(SqliteStore {
            conn: Mutex::new(conn),
            path: path.to_owned(),
            ename,
            cname,
            keys: keynames.keys().copied().collect(),
            keynames,
            behavior,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn ename(&self) -> &str {
        &self.ename
    }

    pub fn cname(&self) -> &str {
        &self.cname
    }

    pub fn keynames(&self) -> &IndexMap<char, String> {
        &self.keynames
    }

    pub fn behavior(&self) -> &BehaviorConfig {
        &self.behavior
    }

    fn grouped(&self, sql: &str, params: impl rusqlite::Params) -> Result<Vec<SequenceMatch>, StoreError> {
        let conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        let mut stmt = conn.prepare_cached(sql).map_err(query_failure)?;
        let mut rows = stmt.query(params).map_err(query_failure)?;
        let mut out: Vec<SequenceMatch> = Vec::new();
        while let Some(row) = rows.next().map_err(query_failure)? {
            let seq: String = row.get(0).map_err(query_failure)?;
            let text: String = row.get(1).map_err(query_failure)?;
            match out.last_mut() {
                Some((last, texts)) if *last == seq => texts.push(text),
                _ => out.push((seq, vec![text])),
            }
        }
        Ok(out)
    }
}

impl TableStore for SqliteStore {
    fn lookup_exact(&self, sequence: &str) -> Result<Vec<String>, StoreError> {
        let conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        let mut stmt = conn
            .prepare_cached("SELECT text FROM chardef WHERE sequence = ?1 ORDER BY rank")
            .map_err(query_failure)?;
        let rows = stmt.query_map([sequence], |r| r.get(0)).map_err(query_failure)?;
        rows.collect::<Result<_, _>>().map_err(query_failure)
    }

    fn has_extensions(&self, sequence: &str) -> Result<bool, StoreError> {
        let conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        let found = match prefix_successor(sequence) {
            Some(upper) => conn
                .prepare_cached("SELECT 1 FROM chardef WHERE sequence > ?1 AND sequence < ?2 LIMIT 1")
                .and_then(|mut s| s.exists(params![sequence, upper])),
            None => conn
                .prepare_cached("SELECT 1 FROM chardef WHERE sequence > ?1 LIMIT 1")
                .and_then(|mut s| s.exists(params![sequence])),
        };
        found.map_err(query_failure)
    }

    fn lookup_prefix(&self, prefix: &str) -> Result<Vec<SequenceMatch>, StoreError> {
        match prefix_successor(prefix) {
            Some(upper) => self.grouped(
                "SELECT sequence, text FROM chardef WHERE sequence >= ?1 AND sequence < ?2 \
                 ORDER BY sequence, rank",
                params![prefix, upper],
            ),
            None => self.grouped(
                "SELECT sequence, text FROM chardef WHERE sequence >= ?1 ORDER BY sequence, rank",
                params![prefix],
            ),
        }
    }

    fn match_pattern(&self, pattern: &QueryPattern) -> Result<Vec<SequenceMatch>, StoreError> {
        self.grouped(
            "SELECT sequence, text FROM chardef WHERE sequence GLOB ?1 ORDER BY sequence, rank",
            params![pattern.to_sqlite_glob()],
        )
    }

    fn entry_count(&self) -> Result<usize, StoreError> {
        let conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        conn.query_row("SELECT count(*) FROM chardef", [], |r| r.get::<_, i64>(0))
            .map(|n| n as usize)
            .map_err(query_failure)
    }

    fn is_key(&self, c: char) -> bool {
        self.keys.contains(&c)
    }
}
