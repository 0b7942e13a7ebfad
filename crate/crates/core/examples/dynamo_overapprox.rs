//! Reflection-driven linking in the style of Dynamo. The flow-insensitive
//! name set makes the filtered-out method reachable too; the checker
//! reports it as an over-approximation.

use indyscope::fixpoint::Settings;
use indyscope::report::CheckOutcome;
use indyscope::rules::AnalysisOptions;
use indyscope::{analyze, corpus};

fn main() {
    let program = corpus::find("dynamo").unwrap().expect("bundled corpus").load().unwrap();
    let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
    for row in &solution.dump()["MHCGE"] {
        println!("MHCGE {}", row.join("  "));
    }
    println!("svc = {:?}", solution.points_to("Client.main/svc"));
    println!();
    for allow in [false, true] {
        let outcome = CheckOutcome::evaluate(&solution, allow).unwrap();
        println!("allow over-approximation: {allow}");
        print!("{}", outcome.table());
        println!("passed: {}\n", outcome.passed);
    }
}
