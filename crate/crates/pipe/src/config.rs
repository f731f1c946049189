//! Config hashing, the worker pool and atomic output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::PipeError;

pub const THREADS_ENV: &str = "VALENCE_PIPE_THREADS";

pub fn digest_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// What a run's outputs depend on: the command, its parameters and the
/// digests of its inputs. Paths are left out so moved inputs hash the same.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, P: Serialize> {
    pub command: &'a str,
    pub params: &'a P,
    pub inputs: Vec<(String, String)>,
}

impl<P: Serialize> RunConfig<'_, P> {
    pub fn hash(&self) -> String {
        digest_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

/// Pool sized by `VALENCE_PIPE_THREADS`; unset or 0 lets rayon decide.
pub fn thread_pool() -> Result<rayon::ThreadPool, PipeError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| PipeError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipeError::Config(format!("thread pool: {e}")))
}

/// Writes `contents` to `dir/name` through a temporary file and a rename,
/// so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), PipeError> {
    let target = dir.join(name);
    let parent = target.parent().unwrap_or(dir);
    fs::create_dir_all(parent).map_err(PipeError::io(parent))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(PipeError::io(parent))?;
    tmp.write_all(contents.as_bytes()).map_err(PipeError::io(&target))?;
    tmp.persist(&target).map_err(|e| PipeError::Io { path: target.clone(), source: e.error })?;
    Ok(())
}
