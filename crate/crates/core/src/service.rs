//! Services the host environment offers to input modules.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

type NotifyFn = dyn Fn(&str) + Send + Sync;
type BeepFn = dyn Fn() + Send + Sync;

/// Host callbacks and settings handed to every session.
///
/// Callbacks run inline on the key path and must return quickly.
#[derive(Clone)]
pub struct ServiceContext {
    notify: Arc<NotifyFn>,
    beep: Arc<BeepFn>,
    pub locale: String,
    pub user_data_dir: PathBuf,
}

impl ServiceContext {
    pub fn new(locale: impl Into<String>, user_data_dir: impl Into<PathBuf>) -> ServiceContext {
        ServiceContext {
            notify: Arc::new(|_| {}),
            beep: Arc::new(|| {}),
            locale: locale.into(),
            user_data_dir: user_data_dir.into(),
        }
    }

    pub fn with_notify(mut self, f: impl Fn(&str) + Send + Sync + 'static) -> ServiceContext {
        self.notify = Arc::new(f);
        self
    }

    pub fn with_beep(mut self, f: impl Fn() + Send + Sync + 'static) -> ServiceContext {
        self.beep = Arc::new(f);
        self
    }

    pub fn notify(&self, message: &str) {
        (self.notify)(message)
    }

    pub fn beep(&self) {
        (self.beep)()
    }
}

impl Default for ServiceContext {
    fn default() -> ServiceContext {
        ServiceContext::new("en", ".")
    }
}

impl fmt::Debug for ServiceContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ServiceContext")
            .field("locale", &self.locale)
            .field("user_data_dir", &self.user_data_dir)
            .finish_non_exhaustive()
    }
}
