//! Input modules and the registry that holds them.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use indexmap::IndexMap;
use thiserror::Error;

use crate::cintable::{has_fatal, parse_cin_bytes, BehaviorConfig, CinTable};
use crate::engine::Session;
use crate::service::ServiceContext;
use crate::storage::{MemoryStore, SqliteStore, TableStore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleSource {
    Builtin,
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDescriptor {
    pub id: String,
    pub display_name: String,
    pub localized_names: BTreeMap<String, String>,
    pub source: ModuleSource,
}

/// Builtin ids use `[a-z0-9_.-]+`; table ids are `table:` followed by the
/// file stem, which may also use upper-case letters.
pub fn is_valid_id(id: &str) -> bool {
    fn simple(s: &str, upper: bool) -> bool {
        !s.is_empty()
            && s.chars().all(|c| {
                c.is_ascii_lowercase()
                    || c.is_ascii_digit()
                    || matches!(c, '_' | '.' | '-')
                    || (upper && c.is_ascii_uppercase())
            })
    }
    match id.strip_prefix(TABLE_ID_PREFIX) {
        Some(stem) => simple(stem, true),
        None => simple(id, false),
    }
}

pub const TABLE_ID_PREFIX: &str = "table:";

pub trait InputModule: Send + Sync {
    fn descriptor(&self) -> &ModuleDescriptor;
    fn create_session(&self, ctx: ServiceContext) -> Session;
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("module id {0:?} is already registered")]
    DuplicateId(String),
    #[error("module id {0:?} is not a valid id")]
    InvalidId(String),
    #[error("cannot read directory {}: {reason}", path.display())]
    DirUnreadable { path: PathBuf, reason: String },
}

/// A module backed by a `.cin` table or an imported store.
pub struct TableModule {
    descriptor: ModuleDescriptor,
    store: Arc<dyn TableStore>,
    behavior: BehaviorConfig,
    keynames: Arc<IndexMap<char, String>>,
}

fn table_names(ename: &str, cname: &str, fallback: &str) -> (String, BTreeMap<String, String>) {
    let mut localized = BTreeMap::new();
    if !ename.is_empty() {
        localized.insert("en".to_owned(), ename.to_owned());
    }
    if !cname.is_empty() {
        localized.insert("zh".to_owned(), cname.to_owned());
    }
    let display = [cname, ename, fallback]
        .into_iter()
        .find(|s| !s.is_empty())
        .unwrap_or_default()
        .to_owned();
    (display, localized)
}

impl TableModule {
    pub fn from_table(id: impl Into<String>, table: &CinTable, source: ModuleSource) -> TableModule {
        let id = id.into();
        let (display_name, localized_names) = table_names(&table.ename, &table.cname, &id);
        TableModule {
            descriptor: ModuleDescriptor {
                id,
                display_name,
                localized_names,
                source,
            },
            store: Arc::new(MemoryStore::build(table)),
            behavior: table.behavior.clone(),
            keynames: Arc::new(table.keynames.clone()),
        }
    }

    pub fn from_sqlite(id: impl Into<String>, store: SqliteStore) -> TableModule {
        let id = id.into();
        let (display_name, localized_names) = table_names(store.ename(), store.cname(), &id);
        TableModule {
            descriptor: ModuleDescriptor {
                id,
                display_name,
                localized_names,
                source: ModuleSource::Table(store.path().to_owned()),
            },
            behavior: store.behavior().clone(),
            keynames: Arc::new(store.keynames().clone()),
            store: Arc::new(store),
        }
    }

    pub fn store(&self) -> &Arc<dyn TableStore> {
        &self.store
    }
}

impl InputModule for TableModule {
    fn descriptor(&self) -> &ModuleDescriptor {
        &self.descriptor
    }

    fn create_session(&self, ctx: ServiceContext) -> Session {
        Session::new(self.store.clone(), self.behavior.clone(), self.keynames.clone()).with_context(ctx)
    }
}

/// A builtin module with an empty table: every key passes through.
pub struct EchoModule {
    descriptor: ModuleDescriptor,
}

impl EchoModule {
    pub fn new(id: impl Into<String>) -> EchoModule {
        let id = id.into();
        EchoModule {
            descriptor: ModuleDescriptor {
                display_name: id.clone(),
                id,
                localized_names: BTreeMap::new(),
                source: ModuleSource::Builtin,
            },
        }
    }
}

impl InputModule for EchoModule {
    fn descriptor(&self) -> &ModuleDescriptor {
        &self.descriptor
    }

    fn create_session(&self, ctx: ServiceContext) -> Session {
        Session::new(
            Arc::new(MemoryStore::default()),
            BehaviorConfig::default(),
            Arc::new(IndexMap::new()),
        )
        .with_context(ctx)
    }
}

#[derive(Default)]
struct Modules {
    order: Vec<Arc<dyn InputModule>>,
    by_id: HashMap<String, usize>,
}

/// Modules by id, in registration order. Reads run concurrently;
/// registrations are serialized.
#[derive(Default)]
pub struct Registry {
    modules: RwLock<Modules>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn register(&self, module: Arc<dyn InputModule>) -> Result<(), RegistryError> {
        let id = module.descriptor().id.clone();
        if !is_valid_id(&id) {
            return Err(RegistryError::InvalidId(id));
        }
        let mut modules = self.modules.write().unwrap_or_else(|e| e.into_inner());
        if modules.by_id.contains_key(&id) {
            return Err(RegistryError::DuplicateId(id));
        }
        let index = modules.order.len();
        modules.order.push(module);
        modules.by_id.insert(id, index);
        Ok(())
    }

    pub fn lookup(&self, id: &str) -> Option<Arc<dyn InputModule>> {
        let modules = self.modules.read().unwrap_or_else(|e| e.into_inner());
        modules.by_id.get(id).map(|&i| modules.order[i].clone())
    }

    pub fn list_modules(&self) -> Vec<ModuleDescriptor> {
        let modules = self.modules.read().unwrap_or_else(|e| e.into_inner());
        modules.order.iter().map(|m| m.descriptor().clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.modules.read().unwrap_or_else(|e| e.into_inner()).order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Discovers the tables in `dir` and registers each of them. Modules that
    /// collide with an already registered id are reported and skipped.
    pub fn load_tables(
        &self,
        dir: &Path,
        ctx: &ServiceContext,
    ) -> Result<Vec<ModuleDescriptor>, RegistryError> {
        let mut loaded = Vec::new();
        for module in discover_table_modules(dir, ctx)? {
            let descriptor = module.descriptor().clone();
            match self.register(Arc::new(module)) {
                Ok(()) => loaded.push(descriptor),
                Err(e) => ctx.notify(&e.to_string()),
            }
        }
        Ok(loaded)
    }
}

/// One module per `*.cin` file in `dir`, sorted by file name. Files that
/// cannot be read, parse with fatal diagnostics, or have a stem unusable as
/// an id are skipped and reported through `ctx.notify`.
pub fn discover_table_modules(dir: &Path, ctx: &ServiceContext) -> Result<Vec<TableModule>, RegistryError> {
    let unreadable = |e: std::io::Error| RegistryError::DirUnreadable {
        path: dir.to_owned(),
        reason: e.to_string(),
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(unreadable)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "cin") && p.is_file())
        .collect();
    paths.sort();

    let mut modules = Vec::new();
    for path in paths {
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            ctx.notify(&format!("{}: file name is not UTF-8", path.display()));
            continue;
        };
        let id = format!("{TABLE_ID_PREFIX}{stem}");
        if !is_valid_id(&id) {
            ctx.notify(&format!("{}: {id:?} is not a valid module id", path.display()));
            continue;
        }
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                ctx.notify(&format!("{}: {e}", path.display()));
                continue;
            }
        };
        let (table, diags) = parse_cin_bytes(&bytes);
        if has_fatal(&diags) {
            let fatal: Vec<_> = diags.iter().filter(|d| d.is_fatal()).collect();
            ctx.notify(&format!(
                "{}:{}: {} (skipped, {} fatal diagnostic(s))",
                path.display(),
                fatal[0].line,
                fatal[0].message,
                fatal.len()
            ));
            continue;
        }
        modules.push(TableModule::from_table(id, &table, ModuleSource::Table(path)));
    }
    Ok(modules)
}

pub fn discover_tables(dir: &Path, ctx: &ServiceContext) -> Result<Vec<ModuleDescriptor>, RegistryError> {
    Ok(discover_table_modules(dir, ctx)?
        .iter()
        .map(|m| m.descriptor().clone())
        .collect())
}
