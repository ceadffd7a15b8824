use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::time::Duration;

use etable_core::etable::DEFAULT_PAGE_SIZE;

pub const PORT_VAR: &str = "ETABLE_PORT";
pub const PAGE_SIZE_VAR: &str = "ETABLE_PAGE_SIZE";
pub const DEFAULT_PORT: u16 = 8080;

/// Everything `serve` needs to start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub tgdb: PathBuf,
    pub addr: SocketAddr,
    pub page_size: usize,
    /// Sessions idle longer than this are dropped. Zero keeps them forever.
    pub idle_timeout: Duration,
    /// Directory served at `/` for the browser client, if any.
    pub static_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn new(tgdb: impl Into<PathBuf>) -> Self {
        Self {
            tgdb: tgdb.into(),
            addr: SocketAddr::new(IpAddr::V4(Ipv4Addr::LOCALHOST), DEFAULT_PORT),
            page_size: DEFAULT_PAGE_SIZE,
            idle_timeout: Duration::from_secs(30 * 60),
            static_dir: None,
        }
    }

    /// Applies `ETABLE_PORT` and `ETABLE_PAGE_SIZE` as read through `lookup`.
    pub fn with_env(mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        if let Some(port) = lookup(PORT_VAR) {
            let port = port.trim().parse::<u16>().map_err(|e| format!("{PORT_VAR}={port:?}: {e}"))?;
            self.addr.set_port(port);
        }
        if let Some(size) = lookup(PAGE_SIZE_VAR) {
            self.page_size = size.trim().parse().map_err(|e| format!("{PAGE_SIZE_VAR}={size:?}: {e}"))?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn with_process_env(self) -> Result<Self, String> {
        self.with_env(|k| std::env::var(k).ok())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.page_size == 0 {
            return Err("page size must be at least 1".into());
        }
        Ok(())
    }
}
