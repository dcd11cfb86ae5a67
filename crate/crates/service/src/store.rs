//! Append-only session log.
//!
//! Every save or delete appends one JSON line to `sessions.jsonl`; opening the
//! store replays the log. A torn final line (crash mid-write) is dropped and
//! the file truncated back to the last complete record. All mutations go
//! through one mutex, so the log has a single writer.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use outbreak_core::Evidence;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LOG_FILE: &str = "sessions.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("session storage unavailable: {0}")]
    Io(#[from] io::Error),
    #[error("session log corrupt at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::NotFound(_) => "NOT_FOUND",
            StoreError::Io(_) | StoreError::Corrupt { .. } => "STORAGE_UNAVAILABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub label: String,
    pub evidence: Evidence,
    /// UTC seconds since the epoch.
    pub created: u64,
    pub modified: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Record {
    Put { session: Session },
    Delete { id: String },
}

struct Inner {
    file: File,
    sessions: HashMap<String, (u64, Session)>,
    seq: u64,
}

impl Inner {
    fn apply(&mut self, record: Record) {
        self.seq += 1;
        match record {
            Record::Put { session } => {
                self.sessions.insert(session.id.clone(), (self.seq, session));
            }
            Record::Delete { id } => {
                self.sessions.remove(&id);
            }
        }
    }

    fn append(&mut self, record: Record) -> Result<(), StoreError> {
        let mut line = serde_json::to_string(&record).map_err(io::Error::other)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.apply(record);
        Ok(())
    }
}

pub struct SessionStore {
    path: PathBuf,
    inner: Mutex<Inner>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or_default()
}

impl SessionStore {
    /// Opens (creating if needed) the log in `dir` and replays it.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        let mut inner_records = Vec::new();
        let mut valid_len = 0u64;
        let mut torn = None;
        {
            let mut reader = BufReader::new(&mut file);
            reader.seek(SeekFrom::Start(0))?;
            let mut buf = String::new();
            let mut line_no = 0;
            loop {
                buf.clear();
                let n = reader.read_line(&mut buf)?;
                if n == 0 {
                    break;
                }
                line_no += 1;
                if let Some(t) = torn.take() {
                    // A bad line followed by more data is real corruption.
                    return Err(t);
                }
                let complete = buf.ends_with('\n');
                match serde_json::from_str::<Record>(buf.trim_end()) {
                    Ok(r) if complete => {
                        inner_records.push(r);
                        valid_len += n as u64;
                    }
                    Ok(_) => {
                        torn = Some(StoreError::Corrupt {
                            line: line_no,
                            reason: "missing newline".into(),
                        })
                    }
                    Err(e) => {
                        torn = Some(StoreError::Corrupt {
                            line: line_no,
                            reason: e.to_string(),
                        })
                    }
                }
            }
        }
        if torn.is_some() {
            tracing::warn!(path = %path.display(), "dropping torn final session record");
            file.set_len(valid_len)?;
        }
        let mut inner = Inner {
            file,
            sessions: HashMap::new(),
            seq: 0,
        };
        for r in inner_records {
            inner.apply(r);
        }
        Ok(Self {
            path,
            inner: Mutex::new(inner),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn create(&self, label: String, evidence: Evidence) -> Result<Session, StoreError> {
        let t = now();
        let session = Session {
            id: uuid::Uuid::new_v4().to_string(),
            label,
            evidence,
            created: t,
            modified: t,
        };
        self.lock().append(Record::Put {
            session: session.clone(),
        })?;
        Ok(session)
    }

    /// Replaces the label and/or evidence of an existing session.
    pub fn update(&self, id: &str, label: Option<String>, evidence: Option<Evidence>) -> Result<Session, StoreError> {
        let mut inner = self.lock();
        let (_, current) = inner
            .sessions
            .get(id)
            .ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        let mut session = current.clone();
        if let Some(l) = label {
            session.label = l;
        }
        if let Some(e) = evidence {
            session.evidence = e;
        }
        session.modified = now().max(session.created);
        inner.append(Record::Put {
            session: session.clone(),
        })?;
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Session, StoreError> {
        self.lock()
            .sessions
            .get(id)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    pub fn delete(&self, id: &str) -> Result<(), StoreError> {
        let mut inner = self.lock();
        if !inner.sessions.contains_key(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        inner.append(Record::Delete { id: id.to_string() })
    }

    /// All sessions, oldest modification first; ties keep write order.
    pub fn list(&self) -> Vec<Session> {
        let inner = self.lock();
        let mut all: Vec<&(u64, Session)> = inner.sessions.values().collect();
        all.sort_by_key(|(seq, s)| (s.modified, *seq));
        all.into_iter().map(|(_, s)| s.clone()).collect()
    }
}
