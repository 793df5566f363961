//! The `.cin` table dialect.
//!
//! A table has a header of `%directive value` lines followed by two blocks:
//!
//! ```text
//! %ename demo
//! %cname Demo
//! %selkey 123
//! %ov_maxseq 2
//! %keyname begin
//! a A
//! %keyname end
//! %chardef begin
//! a 日
//! %chardef end
//! ```
//!
//! `%keyname` maps each key to the label shown while composing; `%chardef`
//! maps key sequences to output text, in ranking order. Besides `%selkey`,
//! the behavior switches are `%ov_autocompose`, `%ov_maxseq`,
//! `%ov_commitatmax` and `%ov_spacesel`; all of them are optional.
//!
//! Parsing never fails outright. Problems come back as [`Diagnostic`]s and a
//! table is only usable when none of them is [`Severity::Fatal`].

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;

const DEFAULT_SELECTION_KEYS: &str = "123456789";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Fatal,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Fatal => "fatal",
        })
    }
}

/// A parser or validator finding, tied to a 1-based source line.
///
/// Line 0 means the table was not parsed from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    fn fatal(line: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Fatal,
            line,
            message: message.into(),
        }
    }

    fn warning(line: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            line,
            message: message.into(),
        }
    }

    pub fn is_fatal(&self) -> bool {
        self.severity == Severity::Fatal
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.severity, self.line, self.message)
    }
}

pub fn has_fatal(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_fatal)
}

/// The five behavior switches shared by table input methods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorConfig {
    /// Show candidates while typing, without waiting for space.
    pub autocompose: bool,
    pub max_seq_len: usize,
    /// Resolve the reading as soon as it reaches `max_seq_len`.
    pub commit_at_max: bool,
    /// Candidate labels, in order. Also the candidate page size.
    pub selection_keys: String,
    pub space_selects_first: bool,
}

impl BehaviorConfig {
    pub fn page_size(&self) -> usize {
        self.selection_keys.chars().count()
    }

    pub fn selection_label(&self, index: usize) -> Option<char> {
        self.selection_keys.chars().nth(index)
    }

    pub fn selection_index(&self, key: char) -> Option<usize> {
        self.selection_keys.chars().position(|c| c == key)
    }

    /// Problems that make the configuration unusable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_seq_len == 0 {
            out.push("max_seq_len must be positive".to_owned());
        }
        out.extend(selection_key_problem(&self.selection_keys));
        out
    }
}

impl Default for BehaviorConfig {
    fn default() -> BehaviorConfig {
        BehaviorConfig {
            autocompose: false,
            max_seq_len: 1,
            commit_at_max: false,
            selection_keys: DEFAULT_SELECTION_KEYS.to_owned(),
            space_selects_first: true,
        }
    }
}

fn selection_key_problem(keys: &str) -> Option<String> {
    if keys.is_empty() {
        return Some("selection keys must not be empty".to_owned());
    }
    let mut seen = HashSet::new();
    for c in keys.chars() {
        if c.is_whitespace() {
            return Some("selection keys must not contain whitespace".to_owned());
        }
        if !seen.insert(c) {
            return Some(format!("selection key '{c}' appears twice"));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chardef {
    pub sequence: String,
    pub text: String,
}

impl Chardef {
    pub fn new(sequence: impl Into<String>, text: impl Into<String>) -> Chardef {
        Chardef {
            sequence: sequence.into(),
            text: text.into(),
        }
    }
}

/// Where things came from in the parsed source; not part of table equality.
#[derive(Debug, Clone, Default)]
struct Origin {
    selkey: usize,
    keynames: Vec<usize>,
    chardefs: Vec<usize>,
}

/// A parsed table. Equality is structural and ignores source positions.
#[derive(Debug, Clone, Default)]
pub struct CinTable {
    pub ename: String,
    pub cname: String,
    pub keynames: IndexMap<char, String>,
    /// In file order; candidate ranking follows it.
    pub chardefs: Vec<Chardef>,
    pub behavior: BehaviorConfig,
    origin: Option<Origin>,
}

impl PartialEq for CinTable {
    fn eq(&self, other: &CinTable) -> bool {
        self.ename == other.ename
            && self.cname == other.cname
            && self.keynames.iter().eq(other.keynames.iter())
            && self.chardefs == other.chardefs
            && self.behavior == other.behavior
    }
}

impl Eq for CinTable {}

impl CinTable {
    pub fn new(
        ename: impl Into<String>,
        cname: impl Into<String>,
        keynames: IndexMap<char, String>,
        chardefs: Vec<Chardef>,
        behavior: BehaviorConfig,
    ) -> CinTable {
        CinTable {
            ename: ename.into(),
            cname: cname.into(),
            keynames,
            chardefs,
            behavior,
            origin: None,
        }
    }

    pub fn longest_sequence(&self) -> usize {
        self.chardefs
            .iter()
            .map(|c| c.sequence.chars().count())
            .max()
            .unwrap_or(0)
    }

    fn chardef_line(&self, index: usize) -> usize {
        self.origin
            .as_ref()
            .and_then(|o| o.chardefs.get(index).copied())
            .unwrap_or(0)
    }

    fn keyname_line(&self, index: usize) -> usize {
        self.origin
            .as_ref()
            .and_then(|o| o.keynames.get(index).copied())
            .unwrap_or(0)
    }

    fn selkey_line(&self) -> usize {
        self.origin.as_ref().map_or(0, |o| o.selkey)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Top,
    Keyname,
    Chardef,
}

#[derive(Default)]
struct Directives {
    ename: Option<String>,
    cname: Option<String>,
    selkey: Option<String>,
    autocompose: Option<bool>,
    maxseq: Option<usize>,
    commitatmax: Option<bool>,
    spacesel: Option<bool>,
}

fn is_sep(c: char) -> bool {
    c == ' ' || c == '\t'
}

/// Splits `line` into its first field and the trimmed remainder.
fn split_field(line: &str) -> (&str, &str) {
    let line = line.trim_matches(is_sep);
    match line.find(is_sep) {
        Some(i) => (&line[..i], line[i..].trim_matches(is_sep)),
        None => (line, ""),
    }
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Parses raw bytes, reporting invalid UTF-8 as a fatal diagnostic on the
/// line where decoding failed.
pub fn parse_cin_bytes(bytes: &[u8]) -> (CinTable, Vec<Diagnostic>) {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_cin(text),
        Err(e) => {
            let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
            let lossy = String::from_utf8_lossy(bytes);
            let (table, mut diags) = parse_cin(&lossy);
            diags.insert(0, Diagnostic::fatal(line, "invalid UTF-8"));
            (table, diags)
        }
    }
}

pub fn parse_cin(source: &str) -> (CinTable, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut source = source;
    if let Some(rest) = source.strip_prefix('\u{feff}') {
        diags.push(Diagnostic::warning(1, "byte order mark ignored"));
        source = rest;
    }

    let mut dir = Directives::default();
    let mut origin = Origin::default();
    let mut keynames: IndexMap<char, String> = IndexMap::new();
    let mut chardefs: Vec<Chardef> = Vec::new();
    let mut seen_pairs: HashSet<(String, String)> = HashSet::new();
    let mut block = Block::Top;
    let mut block_start = 0;
    let mut keyname_done = false;
    let mut chardef_begun = false;
    let mut chardef_done = false;
    let mut last_line = 1;

    for (idx, raw) in source.split('\n').enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_matches(is_sep);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (head, rest) = split_field(trimmed);

        match block {
            Block::Keyname => {
                if head == "%keyname" && rest == "end" {
                    block = Block::Top;
                    keyname_done = true;
                    continue;
                }
                let mut key_chars = head.chars();
                let key = match (key_chars.next(), key_chars.next()) {
                    (Some(k), None) => k,
                    _ => {
                        diags.push(Diagnostic::fatal(
                            lineno,
                            format!("keyname key {head:?} must be a single character"),
                        ));
                        continue;
                    }
                };
                if rest.is_empty() {
                    diags.push(Diagnostic::fatal(lineno, format!("keyname '{key}' has no label")));
                    continue;
                }
                if keynames.contains_key(&key) {
                    diags.push(Diagnostic::warning(
                        lineno,
                        format!("duplicate keyname '{key}' ignored"),
                    ));
                    continue;
                }
                keynames.insert(key, rest.to_owned());
                origin.keynames.push(lineno);
            }
            Block::Chardef => {
                if head == "%chardef" && rest == "end" {
                    block = Block::Top;
                    chardef_done = true;
                    continue;
                }
                if rest.is_empty() {
                    diags.push(Diagnostic::fatal(
                        lineno,
                        format!("chardef {head:?} needs a sequence and a text"),
                    ));
                    continue;
                }
                let pair = (head.to_owned(), rest.to_owned());
                if !seen_pairs.insert(pair) {
                    diags.push(Diagnostic::warning(
                        lineno,
                        format!("duplicate chardef \"{head} {rest}\" dropped"),
                    ));
                    continue;
                }
                chardefs.push(Chardef::new(head, rest));
                origin.chardefs.push(lineno);
            }
            Block::Top => {
                let Some(name) = head.strip_prefix('%').filter(|n| !n.is_empty()) else {
                    diags.push(Diagnostic::fatal(
                        lineno,
                        format!("malformed line outside any block: {trimmed:?}"),
                    ));
                    continue;
                };
                match name {
                    "keyname" => match rest {
                        "begin" if !keyname_done => {
                            block = Block::Keyname;
                            block_start = lineno;
                        }
                        "begin" => diags.push(Diagnostic::fatal(lineno, "second %keyname block")),
                        "end" => diags.push(Diagnostic::fatal(lineno, "%keyname end without begin")),
                        _ => diags.push(Diagnostic::fatal(
                            lineno,
                            format!("malformed directive %keyname {rest:?}"),
                        )),
                    },
                    "chardef" => match rest {
                        "begin" if !chardef_begun => {
                            block = Block::Chardef;
                            block_start = lineno;
                            chardef_begun = true;
                        }
                        "begin" => diags.push(Diagnostic::fatal(lineno, "second %chardef block")),
                        "end" => diags.push(Diagnostic::fatal(lineno, "%chardef end without begin")),
                        _ => diags.push(Diagnostic::fatal(
                            lineno,
                            format!("malformed directive %chardef {rest:?}"),
                        )),
                    },
                    _ => parse_directive(name, rest, lineno, &mut dir, &mut origin, &mut diags),
                }
            }
        }
    }

    match block {
        Block::Keyname => diags.push(Diagnostic::fatal(block_start, "%keyname block is never closed")),
        Block::Chardef => diags.push(Diagnostic::fatal(last_line, "missing %chardef end")),
        Block::Top => {}
    }
    if !chardef_begun {
        diags.push(Diagnostic::fatal(last_line, "missing %chardef begin"));
    } else if chardef_done && chardefs.is_empty() {
        diags.push(Diagnostic::warning(block_start, "empty chardef"));
    }

    // Every key of every sequence needs a display label.
    let mut kept = Vec::with_capacity(chardefs.len());
    let mut kept_lines = Vec::with_capacity(chardefs.len());
    for (entry, line) in chardefs.into_iter().zip(origin.chardefs.drain(..)) {
        match entry.sequence.chars().find(|c| !keynames.contains_key(c)) {
            Some(c) => diags.push(Diagnostic::fatal(
                line,
                format!("key '{c}' in sequence {:?} has no keyname", entry.sequence),
            )),
            None => {
                kept.push(entry);
                kept_lines.push(line);
            }
        }
    }
    origin.chardefs = kept_lines;

    let longest = kept.iter().map(|c| c.sequence.chars().count()).max().unwrap_or(0);
    let behavior = BehaviorConfig {
        autocompose: dir.autocompose.unwrap_or(false),
        max_seq_len: dir.maxseq.unwrap_or(longest.max(1)),
        commit_at_max: dir.commitatmax.unwrap_or(false),
        selection_keys: dir.selkey.unwrap_or_else(|| DEFAULT_SELECTION_KEYS.to_owned()),
        space_selects_first: dir.spacesel.unwrap_or(true),
    };
    let table = CinTable {
        ename: dir.ename.unwrap_or_default(),
        cname: dir.cname.unwrap_or_default(),
        keynames,
        chardefs: kept,
        behavior,
        origin: Some(origin),
    };
    diags.sort_by_key(|d| d.line);
    (table, diags)
}

fn parse_directive(
    name: &str,
    value: &str,
    line: usize,
    dir: &mut Directives,
    origin: &mut Origin,
    diags: &mut Vec<Diagnostic>,
) {
    fn set<T>(slot: &mut Option<T>, value: T, name: &str, line: usize, diags: &mut Vec<Diagnostic>) {
        if slot.is_some() {
            diags.push(Diagnostic::warning(
                line,
                format!("%{name} given twice; the later value wins"),
            ));
        }
        *slot = Some(value);
    }
    let malformed = |diags: &mut Vec<Diagnostic>, why: &str| {
        diags.push(Diagnostic::fatal(
            line,
            format!("malformed directive %{name}: {why}"),
        ));
    };

    match name {
        "ename" | "cname" if value.is_empty() => malformed(diags, "missing value"),
        "ename" if !value.is_ascii() => malformed(diags, "value must be ASCII"),
        "ename" => set(&mut dir.ename, value.to_owned(), name, line, diags),
        "cname" => set(&mut dir.cname, value.to_owned(), name, line, diags),
        "selkey" => match selection_key_problem(value) {
            Some(why) => malformed(diags, &why),
            None => {
                origin.selkey = line;
                set(&mut dir.selkey, value.to_owned(), name, line, diags)
            }
        },
        "ov_maxseq" => match value.parse::<usize>() {
            Ok(n) if n > 0 => set(&mut dir.maxseq, n, name, line, diags),
            _ => malformed(diags, "expected a positive integer"),
        },
        "ov_autocompose" | "ov_commitatmax" | "ov_spacesel" => {
            let Some(flag) = parse_bool(value) else {
                malformed(diags, "expected true or false");
                return;
            };
            let slot = match name {
                "ov_autocompose" => &mut dir.autocompose,
                "ov_commitatmax" => &mut dir.commitatmax,
                _ => &mut dir.spacesel,
            };
            set(slot, flag, name, line, diags);
        }
        _ => diags.push(Diagnostic::warning(
            line,
            format!("unknown directive %{name} ignored"),
        )),
    }
}

/// Writes a table back out. All five behavior directives are always
/// emitted, so the output does not depend on parser defaults.
pub fn serialize_cin(table: &CinTable) -> String {
    use std::fmt::Write;

    let b = &table.behavior;
    let mut out = String::new();
    if !table.ename.is_empty() {
        let _ = writeln!(out, "%ename {}", table.ename);
    }
    if !table.cname.is_empty() {
        let _ = writeln!(out, "%cname {}", table.cname);
    }
    let _ = writeln!(out, "%selkey {}", b.selection_keys);
    let _ = writeln!(out, "%ov_autocompose {}", b.autocompose);
    let _ = writeln!(out, "%ov_maxseq {}", b.max_seq_len);
    let _ = writeln!(out, "%ov_commitatmax {}", b.commit_at_max);
    let _ = writeln!(out, "%ov_spacesel {}", b.space_selects_first);
    out.push_str("%keyname begin\n");
    for (key, label) in &table.keynames {
        let _ = writeln!(out, "{key} {label}");
    }
    out.push_str("%keyname end\n%chardef begin\n");
    for c in &table.chardefs {
        let _ = writeln!(out, "{} {}", c.sequence, c.text);
    }
    out.push_str("%chardef end\n");
    out
}

fn bad_field(s: &str) -> bool {
    s.is_empty() || s.starts_with(is_sep) || s.ends_with(is_sep) || s.chars().any(char::is_control)
}

/// Checks a table for problems that parsing alone does not catch.
///
/// Warnings: sequences longer than `max_seq_len`, selection keys that are
/// also keyname keys, keynames no chardef uses. Fatal: anything that would
/// not survive a serialize/parse round trip or breaks the table invariants.
pub fn validate(table: &CinTable) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let b = &table.behavior;

    for problem in b.problems() {
        diags.push(Diagnostic::fatal(table.selkey_line(), problem));
    }
    if !table.ename.is_ascii() || bad_field(&table.ename) && !table.ename.is_empty() {
        diags.push(Diagnostic::fatal(
            0,
            format!("ename {:?} is not a clean ASCII name", table.ename),
        ));
    }
    if bad_field(&table.cname) && !table.cname.is_empty() {
        diags.push(Diagnostic::fatal(
            0,
            format!("cname {:?} is not a clean name", table.cname),
        ));
    }

    for (i, (key, label)) in table.keynames.iter().enumerate() {
        if key.is_whitespace() || key.is_control() || *key == '#' {
            diags.push(Diagnostic::fatal(
                table.keyname_line(i),
                format!("key {key:?} cannot be written to a table file"),
            ));
        }
        if bad_field(label) {
            diags.push(Diagnostic::fatal(
                table.keyname_line(i),
                format!("label {label:?} of key '{key}' cannot be written to a table file"),
            ));
        }
    }

    let mut pairs = HashSet::new();
    for (i, c) in table.chardefs.iter().enumerate() {
        let line = table.chardef_line(i);
        if c.sequence.is_empty() {
            diags.push(Diagnostic::fatal(line, "empty chardef sequence"));
        }
        if let Some(k) = c.sequence.chars().find(|k| !table.keynames.contains_key(k)) {
            diags.push(Diagnostic::fatal(
                line,
                format!("key '{k}' in sequence {:?} has no keyname", c.sequence),
            ));
        }
        if bad_field(&c.text) {
            diags.push(Diagnostic::fatal(
                line,
                format!("text {:?} cannot be written to a table file", c.text),
            ));
        }
        if !pairs.insert((&c.sequence, &c.text)) {
            diags.push(Diagnostic::fatal(
                line,
                format!("duplicate chardef \"{} {}\"", c.sequence, c.text),
            ));
        }
        let len = c.sequence.chars().count();
        if len > b.max_seq_len {
            diags.push(Diagnostic::warning(
                line,
                format!(
                    "sequence {:?} has {len} keys, more than max_seq_len {}",
                    c.sequence, b.max_seq_len
                ),
            ));
        }
    }

    for key in b.selection_keys.chars() {
        if table.keynames.contains_key(&key) {
            diags.push(Diagnostic::warning(
                table.selkey_line(),
                format!("selection key '{key}' shadows keyname"),
            ));
        }
    }

    let used: HashSet<char> = table.chardefs.iter().flat_map(|c| c.sequence.chars()).collect();
    for (i, key) in table.keynames.keys().enumerate() {
        if !used.contains(key) {
            diags.push(Diagnostic::warning(
                table.keyname_line(i),
                format!("keyname '{key}' is never used by any chardef"),
            ));
        }
    }

    diags.sort_by_key(|d| d.line);
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const T1: &str = include_str!("../../../fixtures/T1.cin");

    fn t1() -> CinTable {
        let (table, diags) = parse_cin(T1);
        assert!(diags.is_empty(), "{diags:?}");
        table
    }

    #[test]
    fn parses_fixture() {
        let t = t1();
        assert_eq!(t.ename, "demo");
        assert_eq!(t.cname, "Demo");
        assert_eq!(t.keynames.len(), 2);
        assert_eq!(t.keynames[&'a'], "A");
        assert_eq!(t.chardefs.len(), 4);
        assert_eq!(
            t.chardefs,
            vec![
                Chardef::new("a", "日"),
                Chardef::new("a", "月"),
                Chardef::new("ab", "明"),
                Chardef::new("b", "木"),
            ]
        );
        assert_eq!(t.behavior.selection_keys, "123");
        assert_eq!(t.behavior.max_seq_len, 2);
        assert!(!t.behavior.autocompose);
        assert!(!t.behavior.commit_at_max);
        assert!(t.behavior.space_selects_first);
    }

    #[test]
    fn defaults_when_directives_absent() {
        let src = "%keyname begin\nq Q\nw W\n%keyname end\n%chardef begin\nqwq x\nw y\n%chardef end\n";
        let (t, diags) = parse_cin(src);
        assert!(!has_fatal(&diags));
        assert_eq!(t.behavior.max_seq_len, 3);
        assert_eq!(t.behavior.selection_keys, "123456789");
        assert!(!t.behavior.autocompose);
        assert!(!t.behavior.commit_at_max);
        assert!(t.behavior.space_selects_first);
        assert_eq!(t.ename, "");
    }

    #[test]
    fn empty_chardef_block_warns() {
        let src = "%ename e\n%keyname begin\na A\n%keyname end\n%chardef begin\n%chardef end\n";
        let (t, diags) = parse_cin(src);
        assert!(t.chardefs.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert_eq!(diags[0].message, "empty chardef");
        assert_eq!(t.behavior.max_seq_len, 1);
    }

    #[test]
    fn unknown_key_is_fatal_at_its_line() {
        let src = T1.replace("b 木", "c 木");
        let (t, diags) = parse_cin(&src);
        let fatal: Vec<_> = diags.iter().filter(|d| d.is_fatal()).collect();
        assert_eq!(fatal.len(), 1);
        assert_eq!(fatal[0].line, 13);
        assert!(fatal[0].message.contains("'c'"));
        assert_eq!(t.chardefs.len(), 3);
    }

    #[test]
    fn missing_chardef_begin_is_fatal() {
        let src = "%ename x\n%keyname begin\na A\n%keyname end\n";
        let (_, diags) = parse_cin(src);
        assert!(diags
            .iter()
            .any(|d| d.is_fatal() && d.message == "missing %chardef begin"));
    }

    #[test]
    fn missing_chardef_end_is_fatal() {
        let src = T1.replace("%chardef end\n", "");
        let (_, diags) = parse_cin(&src);
        assert!(diags
            .iter()
            .any(|d| d.is_fatal() && d.message == "missing %chardef end"));
    }

    #[test]
    fn malformed_directives() {
        for (line, bad) in [
            ("%ov_maxseq 0", "positive"),
            ("%ov_maxseq two", "positive"),
            ("%ov_autocompose yes", "true or false"),
            ("%selkey 1 2", "whitespace"),
            ("%selkey 121", "twice"),
            ("%ename", "missing value"),
            ("%ename 中文", "ASCII"),
            ("%", "malformed line"),
            ("stray text", "malformed line"),
            ("%keyname sideways", "malformed directive"),
        ] {
            let src = format!("{line}\n{T1}");
            let (_, diags) = parse_cin(&src);
            let d = diags
                .iter()
                .find(|d| d.is_fatal())
                .unwrap_or_else(|| panic!("{line}"));
            assert_eq!(d.line, 1, "{line}");
            assert!(d.message.contains(bad), "{line}: {}", d.message);
        }
    }

    #[test]
    fn unknown_directive_only_warns() {
        let (t, diags) = parse_cin(&format!("%prompt hello\n{T1}"));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert_eq!(t.chardefs.len(), 4);
    }

    #[test]
    fn duplicate_pairs_dropped_homophones_kept() {
        let src = T1.replace("b 木", "b 木\na 日\nb 本");
        let (t, diags) = parse_cin(&src);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].line, 14);
        assert_eq!(diags[0].severity, Severity::Warning);
        let texts: Vec<_> = t.chardefs.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["日", "月", "明", "木", "本"]);
    }

    #[test]
    fn crlf_tabs_comments_and_bom() {
        let src = format!(
            "\u{feff}# header comment\r\n{}",
            T1.replace('\n', "\r\n").replace("ab 明", "ab\t \t明  ")
        );
        let (t, diags) = parse_cin(&src);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(t, t1());
    }

    #[test]
    fn invalid_utf8_reported_on_its_line() {
        let mut bytes = T1.as_bytes().to_vec();
        let pos = T1.find("b 木").unwrap() + 2;
        bytes[pos] = 0xff;
        let (_, diags) = parse_cin_bytes(&bytes);
        let d = diags.iter().find(|d| d.message == "invalid UTF-8").unwrap();
        assert!(d.is_fatal());
        assert_eq!(d.line, 13);
    }

    #[test]
    fn serialize_round_trip_fixture() {
        let t = t1();
        let text = serialize_cin(&t);
        let (back, diags) = parse_cin(&text);
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(back, t);
    }

    #[test]
    fn serialize_empty_table_keeps_block() {
        let mut t = t1();
        t.chardefs.clear();
        let text = serialize_cin(&t);
        assert!(text.contains("%chardef begin\n%chardef end\n"));
        let (back, _) = parse_cin(&text);
        assert_eq!(back, t);
    }

    #[test]
    fn validate_fixture_clean() {
        assert!(validate(&t1()).is_empty());
    }

    #[test]
    fn validate_selection_key_shadowing() {
        let (t, diags) = parse_cin(&T1.replace("%selkey 123", "%selkey a23"));
        assert!(diags.is_empty());
        let v = validate(&t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
        assert_eq!(v[0].line, 3);
        assert_eq!(v[0].message, "selection key 'a' shadows keyname");
    }

    #[test]
    fn validate_overlong_sequence() {
        let (t, diags) = parse_cin(&T1.replace("b 木", "b 木\naba 晶"));
        assert!(diags.is_empty());
        let v = validate(&t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
        assert_eq!(v[0].line, 14);
        assert!(v[0].message.contains("\"aba\""));
    }

    #[test]
    fn validate_unused_keyname() {
        let (t, _) = parse_cin(&T1.replace("b B", "b B\nz Z"));
        let v = validate(&t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].line, 8);
        assert_eq!(v[0].message, "keyname 'z' is never used by any chardef");
    }

    #[test]
    fn validate_rejects_unwritable_tables() {
        let mut t = t1();
        t.keynames.insert(' ', "SP".into());
        t.chardefs.push(Chardef::new("a", " padded"));
        t.behavior.selection_keys = String::new();
        let fatal = validate(&t).into_iter().filter(Diagnostic::is_fatal).count();
        assert_eq!(fatal, 3);
    }

    #[test]
    fn diagnostic_format() {
        let d = Diagnostic::fatal(13, "boom");
        assert_eq!(d.to_string(), "fatal:13: boom");
    }
}
