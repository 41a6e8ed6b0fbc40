//! Directory-backed model and session stores.
//!
//! Layout under the data root: `models/<id>.json` holds an envelope
//! `{id, version, document}` whose `document` is kept byte for byte as it was
//! written; `sessions/<id>.json` holds `{id, model_id, session}`. Every write
//! goes to a temporary file in the same directory and is renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use causalkit::elicitation::ElicitationSession;
use causalkit::CausalModel;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt record {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), StoreError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_dir_json(dir: &Path) -> Result<Vec<(PathBuf, String)>, StoreError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            out.push((path, text));
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    id: String,
    version: u64,
    document: Box<RawValue>,
}

/// A stored model at one version.
#[derive(Clone, Debug)]
pub struct ModelRecord {
    pub id: String,
    pub version: u64,
    /// The document text exactly as stored.
    pub document: String,
    pub model: Arc<CausalModel>,
}

impl ModelRecord {
    /// `{id, version, document}` with the document spliced in verbatim.
    pub fn envelope(&self) -> String {
        let env = ModelEnvelope {
            id: self.id.clone(),
            version: self.version,
            document: RawValue::from_string(self.document.clone()).expect("stored documents are valid JSON"),
        };
        serde_json::to_string(&env).expect("envelopes serialize")
    }
}

pub struct ModelStore {
    dir: PathBuf,
    records: RwLock<BTreeMap<String, ModelRecord>>,
}

impl ModelStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut records = BTreeMap::new();
        for (path, text) in read_dir_json(&dir)? {
            let corrupt = |message: String| StoreError::Corrupt {
                path: path.clone(),
                message,
            };
            let env: ModelEnvelope = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
            let model = CausalModel::from_json(env.document.get()).map_err(|e| corrupt(e.to_string()))?;
            records.insert(
                env.id.clone(),
                ModelRecord {
                    id: env.id,
                    version: env.version,
                    document: env.document.get().to_owned(),
                    model: Arc::new(model),
                },
            );
        }
        Ok(ModelStore {
            dir,
            records: RwLock::new(records),
        })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn list(&self) -> Vec<(String, u64)> {
        self.records
            .read()
            .expect("model lock")
            .values()
            .map(|r| (r.id.clone(), r.version))
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<ModelRecord> {
        self.records.read().expect("model lock").get(id).cloned()
    }

    /// Stores an already validated model under a fresh id at version 1.
    pub fn insert(&self, document: String, model: CausalModel) -> Result<ModelRecord, StoreError> {
        let record = ModelRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            version: 1,
            document,
            model: Arc::new(model),
        };
        let mut records = self.records.write().expect("model lock");
        write_atomic(&self.path(&record.id), &record.envelope())?;
        records.insert(record.id.clone(), record.clone());
        Ok(record)
    }

    /// Applies `f` to the current model and stores the result as the next version.
    pub fn update<E>(
        &self,
        id: &str,
        f: impl FnOnce(&CausalModel) -> Result<CausalModel, E>,
    ) -> Result<Option<ModelRecord>, E>
    where
        E: From<StoreError>,
    {
        let mut records = self.records.write().expect("model lock");
        let Some(current) = records.get(id) else {
            return Ok(None);
        };
        let model = f(&current.model)?;
        let record = ModelRecord {
            id: id.to_owned(),
            version: current.version + 1,
            document: model.to_json(),
            model: Arc::new(model),
        };
        write_atomic(&self.path(id), &record.envelope())?;
        records.insert(id.to_owned(), record.clone());
        Ok(Some(record))
    }

    pub fn remove(&self, id: &str) -> Result<bool, StoreError> {
        let mut records = self.records.write().expect("model lock");
        if records.remove(id).is_none() {
            return Ok(false);
        }
        let path = self.path(id);
        fs::remove_file(&path).map_err(io_err(&path))?;
        Ok(true)
    }
}

/// One stored elicitation session.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    pub model_id: String,
    pub session: ElicitationSession,
}

pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<SessionRecord>>>>,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut sessions = BTreeMap::new();
        for (path, text) in read_dir_json(&dir)? {
            let rec: SessionRecord = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                message: e.to_string(),
            })?;
            sessions.insert(rec.id.clone(), Arc::new(Mutex::new(rec)));
        }
        Ok(SessionStore {
            dir,
            sessions: Mutex::new(sessions),
        })
    }

    fn save(&self, rec: &SessionRecord) -> Result<(), StoreError> {
        let text = serde_json::to_string(rec).expect("sessions serialize");
        write_atomic(&self.dir.join(format!("{}.json", rec.id)), &text)
    }

    pub fn create(&self, model_id: &str, session: ElicitationSession) -> Result<SessionRecord, StoreError> {
        let rec = SessionRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            model_id: model_id.to_owned(),
            session,
        };
        self.save(&rec)?;
        self.sessions
            .lock()
            .expect("session map lock")
            .insert(rec.id.clone(), Arc::new(Mutex::new(rec.clone())));
        Ok(rec)
    }

    fn handle(&self, id: &str) -> Option<Arc<Mutex<SessionRecord>>> {
        self.sessions.lock().expect("session map lock").get(id).cloned()
    }

    pub fn get(&self, id: &str) -> Option<SessionRecord> {
        self.handle(id).map(|h| h.lock().expect("session lock").clone())
    }

    /// Runs `f` on a copy of the session while holding its lock; the copy
    /// replaces the stored session (and is persisted) only when `f` succeeds.
    pub fn mutate<T, E>(
        &self,
        id: &str,
        f: impl FnOnce(&mut SessionRecord) -> Result<T, E>,
    ) -> Option<Result<(T, SessionRecord), E>>
    where
        E: From<StoreError>,
    {
        let handle = self.handle(id)?;
        let mut guard = handle.lock().expect("session lock");
        let mut draft = guard.clone();
        Some(f(&mut draft).and_then(|out| {
            self.save(&draft)?;
            *guard = draft.clone();
            Ok((out, draft))
        }))
    }
}
