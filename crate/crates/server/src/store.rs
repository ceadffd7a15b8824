//! In-memory session registry.
//!
//! Each session sits behind its own mutex, so actions on one session are
//! totally ordered while different sessions run in parallel. The registry
//! lock is held only long enough to look a session up.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use etable_core::{InstanceGraph, Session};
use parking_lot::{Mutex, RwLock};

pub struct SessionEntry {
    pub session: Session,
    last_used: Instant,
}

pub type SessionHandle = Arc<Mutex<SessionEntry>>;

pub struct SessionStore {
    graph: Arc<InstanceGraph>,
    page_size: usize,
    idle_timeout: Duration,
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

/// 128 random bits as 32 lowercase hex digits.
pub fn new_session_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl SessionStore {
    pub fn new(graph: Arc<InstanceGraph>, page_size: usize, idle_timeout: Duration) -> Self {
        Self { graph, page_size, idle_timeout, sessions: RwLock::new(HashMap::new()) }
    }

    pub fn graph(&self) -> &Arc<InstanceGraph> {
        &self.graph
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    pub fn create(&self) -> String {
        let entry = SessionEntry {
            session: Session::with_page_size(self.graph.clone(), self.page_size),
            last_used: Instant::now(),
        };
        let handle = Arc::new(Mutex::new(entry));
        let mut sessions = self.sessions.write();
        loop {
            let id = new_session_id();
            if !sessions.contains_key(&id) {
                sessions.insert(id.clone(), handle);
                return id;
            }
        }
    }

    /// Looks a session up and marks it as used.
    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        let handle = self.sessions.read().get(id).cloned()?;
        handle.lock().last_used = Instant::now();
        Some(handle)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle since before `now - idle_timeout` and returns how
    /// many went. A zero timeout never evicts. Sessions busy with an action
    /// are skipped.
    pub fn evict_idle(&self, now: Instant) -> usize {
        if self.idle_timeout.is_zero() {
            return 0;
        }
        let mut sessions = self.sessions.write();
        let before = sessions.len();
        sessions.retain(|_, h| match h.try_lock() {
            Some(entry) => now.saturating_duration_since(entry.last_used) <= self.idle_timeout,
            None => true,
        });
        before - sessions.len()
    }
}
