//! Turns the reflection kernel off for every corpus program and reports
//! which results change. Lambda programs are unaffected; programs whose
//! bootstraps use reflection lose their edges.

use indyscope::fixpoint::Settings;
use indyscope::rules::AnalysisOptions;
use indyscope::{analyze, corpus};

fn main() {
    let off = AnalysisOptions {
        reflection: false,
        ..AnalysisOptions::default()
    };
    for entry in corpus::list(&corpus::corpus_dir()).unwrap() {
        let program = entry.load().unwrap();
        let a = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
        let b = analyze(&program, &off, Settings::default()).unwrap();
        let (da, db) = (a.dump(), b.dump());
        let lost: usize = da.iter().map(|(rel, rows)| rows.difference(&db[rel]).count()).sum();
        let edges: Vec<_> = a.edges().difference(&b.edges()).cloned().collect();
        println!("{:<18} {:>4} tuples lost", entry.name, lost);
        for (site, callee, kind) in edges {
            println!("    edge {site} -> {callee} ({kind})");
        }
    }
}
