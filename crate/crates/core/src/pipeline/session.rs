use std::collections::BTreeSet;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use super::{load_state, persist, read_json, reproject, revision_dir, PipelineError, SessionState};
use crate::layout::Layout;

/// Shared session with snapshot isolation: readers always get a complete
/// revision, and reprojections run one at a time without blocking them.
#[derive(Debug)]
pub struct Session {
    current: RwLock<Arc<SessionState>>,
    writer: Mutex<()>,
}

impl Session {
    pub fn new(state: SessionState) -> Self {
        Session { current: RwLock::new(Arc::new(state)), writer: Mutex::new(()) }
    }

    /// Open the latest revision stored under `output_dir`.
    pub fn open(output_dir: &Path) -> Result<Self, PipelineError> {
        Ok(Session::new(load_state(output_dir)?))
    }

    pub fn snapshot(&self) -> Arc<SessionState> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Reproject and persist a new revision, then publish it. On error the
    /// current revision stays in place.
    pub fn reproject(&self, remove: &BTreeSet<String>) -> Result<Arc<SessionState>, PipelineError> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let base = self.snapshot();
        let next = reproject(&base, remove)?;
        persist(&next)?;
        let next = Arc::new(next);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::clone(&next);
        Ok(next)
    }

    /// Layout of revision `rev`, or the latest when `None`. Older revisions
    /// are read from their snapshot on disk.
    pub fn layout(&self, rev: Option<u64>) -> Result<(u64, Layout), PipelineError> {
        let snap = self.snapshot();
        match rev {
            None => Ok((snap.revision, snap.layout.clone())),
            Some(r) if r == snap.revision => Ok((r, snap.layout.clone())),
            Some(r) if r > snap.revision => Err(PipelineError::NotFound(format!("revision {r}"))),
            Some(r) => {
                let path = revision_dir(&snap.config.output_dir, r).join("layout.json");
                if !path.exists() {
                    return Err(PipelineError::NotFound(format!("revision {r}")));
                }
                Ok((r, read_json(&path)?))
            }
        }
    }
}
