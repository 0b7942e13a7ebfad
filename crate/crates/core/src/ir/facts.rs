use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::LoadError;

/// Fact files understood by the loader: `(relation name, arity, required)`.
/// Files are named `<Name>.facts`.
pub const FACT_FILES: &[(&str, usize, bool)] = &[
    ("Type", 4, true),
    ("Method", 6, true),
    ("FormalParam", 3, true),
    ("ThisVar", 2, true),
    ("ReturnVar", 2, true),
    ("Alloc", 4, true),
    ("Move", 4, true),
    ("StoreField", 5, true),
    ("LoadField", 5, true),
    ("StoreArray", 4, true),
    ("LoadArray", 4, true),
    ("Const", 5, true),
    ("Call", 7, true),
    ("ActualParam", 3, true),
    ("InvokeDynamic", 7, true),
    ("BootArg", 4, true),
    ("EntryPoint", 1, true),
    ("ExpectedReachable", 1, false),
    ("ExpectedUnreachable", 1, false),
];

pub(crate) fn arity_of(relation: &str) -> Option<usize> {
    FACT_FILES
        .iter()
        .find(|(name, _, _)| *name == relation)
        .map(|&(_, arity, _)| arity)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactRow {
    /// 1-based line number in the source file; 0 for rows built in memory.
    pub line: usize,
    pub fields: Vec<String>,
}

/// Raw, unvalidated contents of a facts directory.
///
/// Optional files that were absent are distinguished from present but
/// empty ones, since the expectation files drive the checker.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactSet {
    relations: BTreeMap<String, Vec<FactRow>>,
}

impl FactSet {
    /// An empty fact set with every required relation present.
    pub fn new() -> Self {
        let mut set = FactSet::default();
        for &(name, _, required) in FACT_FILES {
            if required {
                set.relations.insert(name.to_string(), Vec::new());
            }
        }
        set
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self, LoadError> {
        let dir = dir.as_ref();
        let mut set = FactSet::default();
        for &(name, arity, required) in FACT_FILES {
            let path = dir.join(format!("{name}.facts"));
            let text = match fs::read_to_string(&path) {
                Ok(text) => text,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    if required {
                        return Err(LoadError::MissingFile(path));
                    }
                    continue;
                }
                Err(source) => return Err(LoadError::Io { path, source }),
            };
            let mut rows = Vec::new();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.strip_suffix('\r').unwrap_or(raw);
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let fields: Vec<String> = line.splitn(arity, '\t').map(str::to_string).collect();
                if fields.len() != arity {
                    return Err(LoadError::Invalid {
                        file: format!("{name}.facts"),
                        line: i + 1,
                        message: format!("expected {arity} tab-separated fields, found {}", fields.len()),
                    });
                }
                rows.push(FactRow { line: i + 1, fields });
            }
            set.relations.insert(name.to_string(), rows);
        }
        Ok(set)
    }

    pub fn write_dir(&self, dir: impl AsRef<Path>) -> std::io::Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for (name, rows) in &self.relations {
            let mut f = fs::File::create(dir.join(format!("{name}.facts")))?;
            for row in rows {
                writeln!(f, "{}", row.fields.join("\t"))?;
            }
        }
        Ok(())
    }

    pub fn has(&self, relation: &str) -> bool {
        self.relations.contains_key(relation)
    }

    pub fn rows(&self, relation: &str) -> &[FactRow] {
        self.relations.get(relation).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Mutable access; creates the relation if it was absent.
    pub fn rows_mut(&mut self, relation: &str) -> &mut Vec<FactRow> {
        self.relations.entry(relation.to_string()).or_default()
    }

    /// Appends an in-memory row.
    ///
    /// # Panics
    /// On an unknown relation or a field count that does not match its arity.
    pub fn push<S: Into<String>>(&mut self, relation: &str, fields: impl IntoIterator<Item = S>) {
        let arity = arity_of(relation).unwrap_or_else(|| panic!("unknown fact relation {relation}"));
        let fields: Vec<String> = fields.into_iter().map(Into::into).collect();
        assert_eq!(fields.len(), arity, "arity mismatch for {relation}");
        self.rows_mut(relation).push(FactRow { line: 0, fields });
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn total_rows(&self) -> usize {
        self.relations.values().map(Vec::len).sum()
    }
}
