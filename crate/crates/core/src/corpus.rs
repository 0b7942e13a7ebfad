//! The bundled corpus: one subdirectory of fact files per program, each
//! with a `description.txt`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ir::{FactSet, LoadError, Program};

/// Overrides the corpus location.
pub const CORPUS_ENV: &str = "INDYSCOPE_CORPUS";

/// The corpus directory: `$INDYSCOPE_CORPUS` if set, else the one shipped
/// with the crate sources.
pub fn corpus_dir() -> PathBuf {
    std::env::var_os(CORPUS_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus"))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusEntry {
    pub name: String,
    #[serde(skip)]
    pub path: PathBuf,
    pub description: String,
    pub expected_reachable: usize,
    pub expected_unreachable: usize,
}

impl CorpusEntry {
    pub fn load(&self) -> Result<Program, LoadError> {
        Program::load(&self.path)
    }

    pub fn facts(&self) -> Result<FactSet, LoadError> {
        FactSet::read_dir(&self.path)
    }
}

/// Lists corpus programs in name order. A missing directory is an empty
/// corpus.
pub fn list(dir: &Path) -> io::Result<Vec<CorpusEntry>> {
    let read = match fs::read_dir(dir) {
        Ok(r) => r,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut entries = Vec::new();
    for item in read {
        let path = item?.path();
        let desc = path.join("description.txt");
        if !desc.is_file() {
            continue;
        }
        let description = fs::read_to_string(&desc)?.lines().next().unwrap_or("").trim().to_string();
        entries.push(CorpusEntry {
            name: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            expected_reachable: count_rows(&path.join("ExpectedReachable.facts"))?,
            expected_unreachable: count_rows(&path.join("ExpectedUnreachable.facts"))?,
            description,
            path,
        });
    }
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(entries)
}

/// Looks up one program of the default corpus by name.
pub fn find(name: &str) -> io::Result<Option<CorpusEntry>> {
    Ok(list(&corpus_dir())?.into_iter().find(|e| e.name == name))
}

fn count_rows(path: &Path) -> io::Result<usize> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .count()),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(0),
        Err(e) => Err(e),
    }
}
