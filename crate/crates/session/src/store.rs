use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pbt_core::PatternCorpus;
use thiserror::Error;

use crate::event::{parse_log, to_line, LogError, SessionEvent};
use crate::session::{ReplayError, Session};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Log {
        path: PathBuf,
        #[source]
        source: LogError,
    },
    #[error("{path}: {source}")]
    Replay {
        path: PathBuf,
        #[source]
        source: ReplayError,
    },
    #[error("invalid session id `{0}`")]
    InvalidId(String),
}

/// One `<session_id>.jsonl` file per session under a data directory.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| StoreError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, session_id: &str) -> Result<PathBuf, StoreError> {
        let valid = !session_id.is_empty()
            && session_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid {
            return Err(StoreError::InvalidId(session_id.to_string()));
        }
        Ok(self.dir.join(format!("{session_id}.jsonl")))
    }

    /// Appends events and syncs them to disk before returning.
    pub fn append(&self, events: &[SessionEvent]) -> Result<(), StoreError> {
        let Some(first) = events.first() else {
            return Ok(());
        };
        let path = self.path_for(&first.session_id)?;
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let mut buf = String::new();
        for e in events {
            buf.push_str(&to_line(e));
            buf.push('\n');
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        file.write_all(buf.as_bytes()).map_err(io_err)?;
        file.sync_data().map_err(io_err)
    }

    pub fn read_events(&self, session_id: &str) -> Result<Vec<SessionEvent>, StoreError> {
        read_log_file(&self.path_for(session_id)?)
    }

    /// Replays every log in the directory, sorted by file name.
    pub fn load_all(&self, corpus: Option<Arc<PatternCorpus>>) -> Result<Vec<Session>, StoreError> {
        log_files(&self.dir)?
            .into_iter()
            .map(|path| {
                let events = read_log_file(&path)?;
                Session::replay(&events, corpus.clone())
                    .map_err(|source| StoreError::Replay { path, source })
            })
            .collect()
    }
}

/// `.jsonl` files directly under `dir`, sorted by name.
pub fn log_files(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let io_err = |source| StoreError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.extension().is_some_and(|e| e == "jsonl") && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn read_log_file(path: &Path) -> Result<Vec<SessionEvent>, StoreError> {
    let text = io::read_to_string(File::open(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?)
    .map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_log(&text).map_err(|source| StoreError::Log {
        path: path.to_path_buf(),
        source,
    })
}
