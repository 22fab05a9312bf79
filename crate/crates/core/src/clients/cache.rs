use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{ClientError, PaperRecord, PaperSource};
use crate::kb::PaperRef;

/// Memoizes a [`PaperSource`], optionally persisting fetched records as one
/// JSON line per paper so later runs need no network.
pub struct CachedPaperSource<S> {
    inner: S,
    records: Mutex<BTreeMap<PaperRef, PaperRecord>>,
    authors: Mutex<BTreeMap<String, Vec<PaperRecord>>>,
    remote_calls: AtomicUsize,
    file: Option<PathBuf>,
}

impl<S: PaperSource> CachedPaperSource<S> {
    pub fn new(inner: S) -> Self {
        CachedPaperSource {
            inner,
            records: Mutex::new(BTreeMap::new()),
            authors: Mutex::new(BTreeMap::new()),
            remote_calls: AtomicUsize::new(0),
            file: None,
        }
    }

    /// Loads any records already in `path` and appends new ones to it.
    pub fn with_file(inner: S, path: impl AsRef<Path>) -> Result<Self, ClientError> {
        let path = path.as_ref().to_path_buf();
        let mut records = BTreeMap::new();
        if path.exists() {
            let f = File::open(&path).map_err(|e| ClientError::Configuration(e.to_string()))?;
            for line in BufReader::new(f).lines() {
                let line = line.map_err(|e| ClientError::Configuration(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: PaperRecord =
                    serde_json::from_str(&line).map_err(|e| ClientError::Decode(e.to_string()))?;
                records.insert(r.paper_ref.clone(), r);
            }
        }
        let mut cache = Self::new(inner);
        cache.records = Mutex::new(records);
        cache.file = Some(path);
        Ok(cache)
    }

    /// Number of calls forwarded to the wrapped source.
    pub fn remote_calls(&self) -> usize {
        self.remote_calls.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    fn persist(&self, record: &PaperRecord) {
        let Some(path) = &self.file else { return };
        let result = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| {
                let line = serde_json::to_string(record).map_err(std::io::Error::other)?;
                writeln!(f, "{line}")
            });
        if let Err(e) = result {
            log::warn!("metadata cache {}: {e}", path.display());
        }
    }
}

impl<S: PaperSource> PaperSource for CachedPaperSource<S> {
    fn fetch_paper_metadata(&self, paper: &PaperRef) -> Result<PaperRecord, ClientError> {
        if let Some(r) = self.records.lock().unwrap().get(paper) {
            return Ok(r.clone());
        }
        self.remote_calls.fetch_add(1, Ordering::Relaxed);
        let r = self.inner.fetch_paper_metadata(paper)?;
        self.persist(&r);
        self.records
            .lock()
            .unwrap()
            .insert(paper.clone(), r.clone());
        Ok(r)
    }

    fn author_papers(&self, author_id: &str) -> Result<Vec<PaperRecord>, ClientError> {
        if let Some(v) = self.authors.lock().unwrap().get(author_id) {
            return Ok(v.clone());
        }
        self.remote_calls.fetch_add(1, Ordering::Relaxed);
        let v = self.inner.author_papers(author_id)?;
        self.authors
            .lock()
            .unwrap()
            .insert(author_id.to_string(), v.clone());
        Ok(v)
    }
}
