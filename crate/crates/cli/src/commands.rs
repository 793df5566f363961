//! The file-based subcommands. Each returns the process exit code and
//! writes through the given streams so tests can drive them in memory.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use vanilla_core::cintable::{has_fatal, parse_cin_bytes, validate};
use vanilla_core::storage::import_table;
use vanilla_core::{
    CandidateList, CinTable, EngineOutput, KeyEvent, KeyKind, MemoryStore, NamedKey, Session, SqliteStore,
    TableStore,
};

use crate::tokens::{parse_token, parse_tokens};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_IO: u8 = 2;

/// Reads and parses a table, printing diagnostics. `Err` carries the exit
/// code to use.
fn read_table(path: &Path, err: &mut dyn Write) -> Result<CinTable, u8> {
    let bytes = fs::read(path).map_err(|e| {
        let _ = writeln!(err, "cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    let (table, mut diagnostics) = parse_cin_bytes(&bytes);
    if !has_fatal(&diagnostics) {
        diagnostics.extend(validate(&table));
    }
    for d in &diagnostics {
        let _ = writeln!(err, "{d}");
    }
    if has_fatal(&diagnostics) {
        return Err(EXIT_INVALID);
    }
    Ok(table)
}

pub fn validate_cmd(path: &Path, err: &mut dyn Write) -> u8 {
    match read_table(path, err) {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    }
}

pub fn import_cmd(table: &Path, db: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let table = match read_table(table, err) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let written = import_table(&table, db).and_then(|store| store.entry_count());
    match written {
        Ok(n) => {
            let _ = writeln!(out, "{n} entries");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "cannot write {}: {e}", db.display());
            EXIT_IO
        }
    }
}

/// Where `convert` and `repl` take their table from.
pub enum TableSource<'a> {
    Cin(&'a Path),
    Db(&'a Path),
}

pub fn open_session(source: TableSource<'_>, err: &mut dyn Write) -> Result<Session, u8> {
    match source {
        TableSource::Cin(path) => {
            let table = read_table(path, err)?;
            let store: Arc<dyn TableStore> = Arc::new(MemoryStore::build(&table));
            Ok(Session::new(store, table.behavior, Arc::new(table.keynames)))
        }
        TableSource::Db(path) => {
            let store = SqliteStore::open(path).map_err(|e| {
                let _ = writeln!(err, "{e}");
                EXIT_IO
            })?;
            let config = store.behavior().clone();
            let keynames = Arc::new(store.keynames().clone());
            Ok(Session::new(Arc::new(store), config, keynames))
        }
    }
}

/// Text an unhandled key contributes to the output stream.
fn passthrough_text(key: &KeyEvent) -> Option<char> {
    match key.kind {
        KeyKind::Char(c) => Some(c),
        KeyKind::Named(NamedKey::Space) => Some(' '),
        KeyKind::Named(NamedKey::Enter) => Some('\n'),
        KeyKind::Named(_) => None,
    }
}

/// Runs a token script through `session`. Output is the concatenation of
/// commits and passed-through keys; with `events` set, one line per event
/// also goes to `err`.
pub fn convert(
    session: &mut Session,
    script: &str,
    events: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<u8> {
    let keys = match parse_tokens(script) {
        Ok(keys) => keys,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_INVALID);
        }
    };
    let mut text = String::new();
    let mut beeps = 0;
    for key in keys {
        let output = session.process_key(key);
        for c in &output.commits {
            text.push_str(c);
            if events {
                writeln!(err, "commit {c}")?;
            }
        }
        if !output.handled {
            text.extend(passthrough_text(&key));
            if events {
                writeln!(err, "passthrough {}", key.to_wire())?;
            }
        }
        if output.beep {
            beeps += 1;
            if events {
                writeln!(err, "beep")?;
            }
        }
    }
    out.write_all(text.as_bytes())?;
    out.flush()?;
    writeln!(err, "beeps: {beeps}")?;
    Ok(EXIT_OK)
}

pub fn state_line(composing: &str, window: Option<&CandidateList>) -> String {
    let items: Vec<String> = window
        .map(|w| {
            w.items
                .iter()
                .map(|c| format!("{}:{}", c.label, c.text))
                .collect()
        })
        .unwrap_or_default();
    format!("composing={composing} window=[{}]", items.join(" "))
}

fn print_output(out: &mut dyn Write, key: &KeyEvent, output: &EngineOutput) -> io::Result<()> {
    for c in &output.commits {
        writeln!(out, "COMMIT {c}")?;
    }
    if !output.handled {
        writeln!(out, "PASSTHROUGH {}", key.to_wire())?;
    }
    if output.beep {
        writeln!(out, "BEEP")?;
    }
    writeln!(
        out,
        "{}",
        state_line(&output.view.composing, output.window.as_ref())
    )
}

/// One token per line until `:q` or end of input.
pub fn repl(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<u8> {
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let token = line.trim();
        match token {
            "" => continue,
            ":q" => break,
            _ => {}
        }
        match parse_token(token) {
            Some(key) => print_output(out, &key, &session.process_key(key))?,
            None => writeln!(err, "unknown token {token:?}")?,
        }
        out.flush()?;
    }
    Ok(EXIT_OK)
}
