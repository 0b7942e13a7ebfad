//! A bootstrap method that looks up `A.print` and returns a
//! `ConstantCallSite`; the invokedynamic site ends up calling it.

use indyscope::fixpoint::Settings;
use indyscope::rules::AnalysisOptions;
use indyscope::{analyze, corpus};

fn main() {
    let program = corpus::find("late_linking").unwrap().expect("bundled corpus").load().unwrap();
    let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();

    for (site, callee, kind) in solution.edges() {
        println!("{site:<14} -> {callee:<28} {kind}");
    }
    println!();
    let dump = solution.dump();
    for row in &dump["IFPT"] {
        println!("target field: {}", row.join("  "));
    }
    println!("A.print/a points to {:?}", solution.points_to("A.print/a"));
}
