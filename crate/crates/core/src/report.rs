//! Analysis summaries, ground-truth checking, and relation dump files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::fixpoint::Solution;
use crate::store::{Diagnostic, EdgeKind};

/// Files always written by [`write_dumps`], with the relation each one holds.
pub const STANDARD_DUMPS: &[(&str, &str)] = &[
    ("Reachable.csv", "Reachable"),
    ("CallGraphEdge.csv", "CallGraphEdge"),
    ("VarPointsTo.csv", "VPT"),
    ("UnmodeledInvokeAPI.csv", "UnmodeledInvokeAPI"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Reachable,
    Unreachable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// An expected-unreachable method was found reachable, and the caller
    /// accepted over-approximation.
    OverApprox,
}

impl Status {
    pub fn mark(self) -> &'static str {
        match self {
            Status::Pass => "✓",
            Status::Fail => "✗",
            Status::OverApprox => "over-approx",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckEntry {
    pub method: String,
    pub expected: Expected,
    pub reachable: bool,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub methods: Vec<CheckEntry>,
}

impl CheckOutcome {
    /// Compares reachability with the program's expectation facts, or
    /// returns `None` when the program has none.
    pub fn evaluate(solution: &Solution<'_>, allow_overapprox: bool) -> Option<CheckOutcome> {
        let p = solution.program;
        let exp = p.expectations()?;
        let mut methods = Vec::new();
        for &m in &exp.reachable {
            let reachable = solution.store.is_reachable(m);
            methods.push(CheckEntry {
                method: p.method(m).id.clone(),
                expected: Expected::Reachable,
                reachable,
                status: if reachable { Status::Pass } else { Status::Fail },
            });
        }
        for &m in &exp.unreachable {
            let reachable = solution.store.is_reachable(m);
            let status = match (reachable, allow_overapprox) {
                (false, _) => Status::Pass,
                (true, true) => Status::OverApprox,
                (true, false) => Status::Fail,
            };
            methods.push(CheckEntry {
                method: p.method(m).id.clone(),
                expected: Expected::Unreachable,
                reachable,
                status,
            });
        }
        let passed = methods.iter().all(|e| e.status != Status::Fail);
        Some(CheckOutcome { passed, methods })
    }

    /// A plain-text table, one expected method per line.
    pub fn table(&self) -> String {
        let width = self.methods.iter().map(|e| e.method.len()).max().unwrap_or(0);
        let mut s = String::new();
        for e in &self.methods {
            let expected = match e.expected {
                Expected::Reachable => "reachable",
                Expected::Unreachable => "unreachable",
            };
            let found = if e.reachable { "reachable" } else { "unreachable" };
            let _ = writeln!(
                s,
                "{:<width$}  expected {:<11}  found {:<11}  {}",
                e.method,
                expected,
                found,
                e.status.mark()
            );
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub reachable_count: usize,
    pub edge_counts_by_kind: BTreeMap<&'static str, usize>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_outcome: Option<CheckOutcome>,
}

impl AnalysisReport {
    pub fn new(solution: &Solution<'_>, allow_overapprox: bool) -> AnalysisReport {
        let mut edge_counts_by_kind: BTreeMap<&'static str, usize> =
            EdgeKind::ALL.iter().map(|k| (k.as_str(), 0)).collect();
        for (_, _, kind) in solution.store.call_graph(solution.program) {
            *edge_counts_by_kind.entry(kind.as_str()).or_default() += 1;
        }
        AnalysisReport {
            reachable_count: solution.store.reachable.len(),
            edge_counts_by_kind,
            diagnostics: solution.store.diagnostics.all().to_vec(),
            check_outcome: CheckOutcome::evaluate(solution, allow_overapprox),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Renders rows as TAB-separated lines in lexicographic order.
pub fn tsv<'a>(rows: impl IntoIterator<Item = &'a Vec<String>>) -> String {
    let mut lines: Vec<String> = rows.into_iter().map(|r| r.join("\t")).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Writes the standard dump files, `report.json`, and one `<Name>.csv`
/// per extra relation name. Unknown names are an error.
pub fn write_dumps(
    solution: &Solution<'_>,
    report: &AnalysisReport,
    out_dir: &Path,
    extra: &[String],
) -> io::Result<()> {
    let dump = solution.dump();
    for name in extra {
        if !dump.contains_key(name.as_str()) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("unknown relation `{name}`"),
            ));
        }
    }
    fs::create_dir_all(out_dir)?;
    let empty = Default::default();
    for (file, rel) in STANDARD_DUMPS {
        fs::write(out_dir.join(file), tsv(dump.get(rel).unwrap_or(&empty)))?;
    }
    for name in extra {
        fs::write(out_dir.join(format!("{name}.csv")), tsv(&dump[name.as_str()]))?;
    }
    fs::write(out_dir.join("report.json"), report.to_json() + "\n")
}
