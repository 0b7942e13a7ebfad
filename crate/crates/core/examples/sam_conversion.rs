//! A `Runnable` as an anonymous class and as a lambda. Without lambda
//! modeling, only the lambda body is lost.

use indyscope::fixpoint::Settings;
use indyscope::rules::AnalysisOptions;
use indyscope::{analyze, corpus};

fn main() {
    let program = corpus::find("sam_conversion").unwrap().expect("bundled corpus").load().unwrap();
    let with = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
    let without_opts = AnalysisOptions {
        lambdas: false,
        ..AnalysisOptions::default()
    };
    let without = analyze(&program, &without_opts, Settings::default()).unwrap();

    let (a, b) = (with.reachable_methods(), without.reachable_methods());
    println!("reachable with lambdas:    {}", a.len());
    println!("reachable without lambdas: {}", b.len());
    for m in a.difference(&b) {
        println!("lost: {m}");
    }
}
