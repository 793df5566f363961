//! Table-driven input method framework.
//!
//! The crate is split along the path a keystroke takes:
//!
//! * [`cintable`] parses `.cin` tables (keynames, chardefs and the five
//!   behavior switches) and writes them back out.
//! * [`storage`] indexes a table for exact, prefix and wildcard lookup, either
//!   in memory or in a single-file SQLite database.
//! * [`engine`] is the generic table module: a composition state machine that
//!   turns [`KeyEvent`]s into display state, commits and beeps.
//! * [`protocol`] defines the line-delimited JSON frames spoken between a
//!   text-service server and its display clients.
//! * [`module`] holds the input-module contract and the registry that
//!   discovers `.cin` tables on disk.

pub mod cintable;
pub mod engine;
pub mod key;
pub mod module;
pub mod protocol;
pub mod service;
pub mod storage;
pub mod view;

#[cfg(feature = "test-util")]
pub mod testing;

pub use cintable::{parse_cin, serialize_cin, validate, BehaviorConfig, CinTable, Diagnostic, Severity};
pub use engine::{EngineOutput, PageDirection, Session};
pub use key::{KeyEvent, KeyKind, Modifiers, NamedKey};
pub use module::{InputModule, ModuleDescriptor, ModuleSource, Registry, RegistryError, TableModule};
pub use service::ServiceContext;
pub use storage::{MemoryStore, QueryPattern, SqliteStore, StoreError, TableStore};
pub use view::{Candidate, CandidateList, CompositionView};
