//! Seeded generators and reference oracles shared by the test suites.
//!
//! The oracles here work on the raw chardef list with linear scans and never
//! touch [`crate::storage`] or [`crate::engine`], so they can check both.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::cintable::{BehaviorConfig, Chardef, CinTable};

pub use rand::{Rng, SeedableRng};
pub type TestRng = ChaCha8Rng;

pub const T1_SOURCE: &str = include_str!("../../../fixtures/T1.cin");

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const KEY_POOL: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's', 't', 'u',
    'v', 'w', 'x', 'y', 'z', ',', '.', '/', ';', '\'', '[', ']', '-', '=', '`',
];
const TEXT_POOL: &[&str] = &[
    "日", "月", "明", "木", "林", "森", "人", "大", "天", "夫", "口", "中", "水", "火", "山", "石", "田",
    "土", "竹", "戈", "十", "女", "心", "手", "言", "門", "馬", "魚", "鳥", "龍", "é", "ß", "x", "🀄", "ok",
    "中文",
];
const LABEL_POOL: &[&str] = &[
    "日", "月", "金", "木", "水", "火", "土", "竹", "戈", "十", "A", "Ω",
];

/// Random table generation knobs.
#[derive(Debug, Clone)]
pub struct TableSpec {
    pub keys: usize,
    pub entries: usize,
    pub max_len: usize,
    /// Share of entries that reuse an earlier sequence (homophones).
    pub homophone_rate: f64,
}

impl Default for TableSpec {
    fn default() -> TableSpec {
        TableSpec {
            keys: 6,
            entries: 40,
            max_len: 4,
            homophone_rate: 0.3,
        }
    }
}

pub fn random_text<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *TEXT_POOL.choose(rng).unwrap()).collect()
}

/// A valid table: distinct (sequence, text) pairs, every key labelled,
/// random behavior switches, selection keys disjoint from the keys.
pub fn random_table<R: Rng>(rng: &mut R, spec: &TableSpec) -> CinTable {
    let mut pool = KEY_POOL.to_vec();
    pool.shuffle(rng);
    let keys: Vec<char> = pool[..spec.keys.min(pool.len())].to_vec();

    let mut keynames = IndexMap::new();
    for &k in &keys {
        let label = if rng.gen_bool(0.5) {
            k.to_ascii_uppercase().to_string()
        } else {
            LABEL_POOL.choose(rng).unwrap().to_string()
        };
        keynames.insert(k, label);
    }

    let mut chardefs: Vec<Chardef> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut attempts = 0;
    while chardefs.len() < spec.entries && attempts < spec.entries * 20 {
        attempts += 1;
        let sequence = if !chardefs.is_empty() && rng.gen_bool(spec.homophone_rate) {
            chardefs.choose(rng).unwrap().sequence.clone()
        } else {
            let len = rng.gen_range(1..=spec.max_len);
            (0..len).map(|_| *keys.choose(rng).unwrap()).collect()
        };
        let text = random_text(rng);
        if seen.insert((sequence.clone(), text.clone())) {
            chardefs.push(Chardef::new(sequence, text));
        }
    }

    let selection_len = rng.gen_range(1..=9);
    let selection_keys: String = "123456789".chars().take(selection_len).collect();
    let longest = chardefs
        .iter()
        .map(|c| c.sequence.chars().count())
        .max()
        .unwrap_or(1);
    let behavior = BehaviorConfig {
        autocompose: rng.gen_bool(0.5),
        max_seq_len: rng.gen_range(1..=longest + 1),
        commit_at_max: rng.gen_bool(0.5),
        selection_keys,
        space_selects_first: rng.gen_bool(0.5),
    };
    let ename = format!("t{}", rng.gen_range(0..10_000));
    let cname = if rng.gen_bool(0.5) {
        "隨機表".to_owned()
    } else {
        String::new()
    };
    CinTable::new(ename, cname, keynames, chardefs, behavior)
}

/// A random pattern of up to `max_len` tokens drawn from the table's keys
/// and the two wildcards.
pub fn random_pattern<R: Rng>(rng: &mut R, table: &CinTable, max_len: usize) -> String {
    let keys: Vec<char> = table.keynames.keys().copied().collect();
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0..=1 => '*',
            2..=3 => '?',
            _ => *keys.choose(rng).unwrap(),
        })
        .collect()
}

/// Character-by-character glob matcher, written recursively and
/// independently of the store's iterative one.
pub fn naive_glob(pattern: &[char], sequence: &[char]) -> bool {
    match pattern.split_first() {
        None => sequence.is_empty(),
        Some(('*', rest)) => (0..=sequence.len()).any(|skip| naive_glob(rest, &sequence[skip..])),
        Some(('?', rest)) => !sequence.is_empty() && naive_glob(rest, &sequence[1..]),
        Some((c, rest)) => sequence.first() == Some(c) && naive_glob(rest, &sequence[1..]),
    }
}

/// Linear scan: texts of `sequence` in file order.
pub fn scan_exact(table: &CinTable, sequence: &str) -> Vec<String> {
    table
        .chardefs
        .iter()
        .filter(|c| c.sequence == sequence)
        .map(|c| c.text.clone())
        .collect()
}

/// Linear scan over the chardef list: matching sequences sorted, texts in
/// file order.
pub fn scan_where(table: &CinTable, keep: impl Fn(&str) -> bool) -> Vec<(String, Vec<String>)> {
    let mut sequences: Vec<&str> = table
        .chardefs
        .iter()
        .map(|c| c.sequence.as_str())
        .filter(|s| keep(s))
        .collect();
    sequences.sort_unstable();
    sequences.dedup();
    sequences
        .into_iter()
        .map(|s| (s.to_owned(), scan_exact(table, s)))
        .collect()
}

pub fn scan_glob(table: &CinTable, pattern: &str) -> Vec<(String, Vec<String>)> {
    let pattern: Vec<char> = pattern.chars().collect();
    scan_where(table, |s| naive_glob(&pattern, &s.chars().collect::<Vec<_>>()))
}

pub fn scan_prefix(table: &CinTable, prefix: &str) -> Vec<(String, Vec<String>)> {
    scan_where(table, |s| s.starts_with(prefix))
}

/// What a hand simulation of the composition rules predicts for one key,
/// for tables with autocompose and commit-at-max switched off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleStep {
    pub handled: bool,
    pub commits: Vec<String>,
    pub composing: String,
    pub window: Vec<(char, String)>,
    pub beep: bool,
}

/// A deliberately small model of the composition rules: reading and window
/// are plain vectors and every lookup scans the chardef list.
pub struct RuleOracle<'a> {
    table: &'a CinTable,
    reading: Vec<char>,
    window: Option<(Vec<String>, usize)>,
}

impl<'a> RuleOracle<'a> {
    pub fn new(table: &'a CinTable) -> RuleOracle<'a> {
        assert!(!table.behavior.autocompose && !table.behavior.commit_at_max);
        RuleOracle {
            table,
            reading: Vec::new(),
            window: None,
        }
    }

    /// `key` uses the wire spelling: one character, or space, escape,
    /// backspace, enter.
    pub fn press(&mut self, key: &str) -> OracleStep {
        let b = &self.table.behavior;
        let sel: Vec<char> = b.selection_keys.chars().collect();
        let mut step = OracleStep {
            handled: true,
            commits: vec![],
            composing: String::new(),
            window: vec![],
            beep: false,
        };
        let reading_str: String = self.reading.iter().collect();
        match key {
            "space" => match self.window.take() {
                Some((cands, page)) if b.space_selects_first => {
                    step.commits.push(cands[page * sel.len()].clone());
                    self.reading.clear();
                }
                Some((cands, page)) => {
                    let pages = cands.len().div_ceil(sel.len());
                    self.window = Some((cands, (page + 1) % pages));
                }
                None if self.reading.is_empty() => step.handled = false,
                None => {
                    let cands = scan_exact(self.table, &reading_str);
                    match cands.len() {
                        0 => step.beep = true,
                        1 => {
                            step.commits.push(cands[0].clone());
                            self.reading.clear();
                        }
                        _ => self.window = Some((cands, 0)),
                    }
                }
            },
            "backspace" => {
                if self.window.take().is_none() && self.reading.pop().is_none() {
                    step.handled = false;
                }
            }
            "escape" => {
                if self.window.is_none() && self.reading.is_empty() {
                    step.handled = false;
                }
                self.window = None;
                self.reading.clear();
            }
            "enter" => {
                if self.reading.is_empty() {
                    step.handled = false;
                } else {
                    step.commits.push(reading_str.clone());
                    self.reading.clear();
                    self.window = None;
                }
            }
            _ => {
                let c = key.chars().next().unwrap();
                if let Some((cands, page)) = &self.window {
                    match sel.iter().position(|&s| s == c) {
                        Some(i) if page * sel.len() + i < cands.len() => {
                            step.commits.push(cands[page * sel.len() + i].clone());
                            self.reading.clear();
                            self.window = None;
                        }
                        _ => step.beep = true,
                    }
                } else if self.table.keynames.contains_key(&c) {
                    if self.reading.len() < b.max_seq_len {
                        self.reading.push(c);
                    } else {
                        step.beep = true;
                    }
                } else if self.reading.is_empty() {
                    step.handled = false;
                } else {
                    step.beep = true;
                }
            }
        }
        step.composing = self
            .reading
            .iter()
            .map(|c| self.table.keynames[c].as_str())
            .collect();
        if let Some((cands, page)) = &self.window {
            step.window = cands
                .iter()
                .skip(page * sel.len())
                .zip(sel.iter())
                .map(|(t, &l)| (l, t.clone()))
                .collect();
        }
        step
    }
}
