use std::path::Path;
use std::sync::Arc;

use vanilla_core::module::{InputModule, Registry, RegistryError};
use vanilla_core::protocol::{ModuleInfo, ServerFrame, PROTOCOL_VERSION};
use vanilla_core::ServiceContext;

use crate::{ServerConfig, ServerError};

/// State shared by every connection: the loaded modules. Read-only once
/// the server is up.
pub struct Service {
    registry: Registry,
    ctx: ServiceContext,
    default_module: Option<String>,
    max_sessions: usize,
}

impl Service {
    pub fn new(registry: Registry, max_sessions: usize) -> Service {
        Service {
            registry,
            ctx: ServiceContext::default().with_notify(|m| tracing::warn!("{m}")),
            default_module: None,
            max_sessions,
        }
    }

    /// Loads every table in `config.tables_dir`.
    pub fn load(config: &ServerConfig) -> Result<Service, ServerError> {
        let service = Service::new(Registry::new(), config.max_sessions_per_conn);
        service.load_tables(&config.tables_dir)?;
        if let Some(id) = &config.default_module {
            if service.registry.lookup(id).is_none() {
                return Err(ServerError::UnknownDefaultModule(id.clone()));
            }
        }
        Ok(Service {
            default_module: config.default_module.clone(),
            ..service
        })
    }

    fn load_tables(&self, dir: &Path) -> Result<(), ServerError> {
        let loaded = self.registry.load_tables(dir, &self.ctx).map_err(|e| match e {
            RegistryError::DirUnreadable { path, reason } => ServerError::TablesDir { path, reason },
            other => ServerError::TablesDir {
                path: dir.to_owned(),
                reason: other.to_string(),
            },
        })?;
        tracing::info!(dir = %dir.display(), modules = loaded.len(), "tables loaded");
        Ok(())
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn context(&self) -> &ServiceContext {
        &self.ctx
    }

    pub fn max_sessions(&self) -> usize {
        self.max_sessions
    }

    pub fn resolve(&self, id: &str) -> Option<Arc<dyn InputModule>> {
        match (id, &self.default_module) {
            ("", Some(default)) => self.registry.lookup(default),
            _ => self.registry.lookup(id),
        }
    }

    pub fn welcome(&self) -> ServerFrame {
        ServerFrame::Welcome {
            version: PROTOCOL_VERSION.to_owned(),
            modules: self
                .registry
                .list_modules()
                .into_iter()
                .map(|d| ModuleInfo {
                    id: d.id,
                    name: d.display_name,
                })
                .collect(),
        }
    }
}
