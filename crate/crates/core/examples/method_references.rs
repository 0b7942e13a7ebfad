//! The four kinds of method reference: static, bound, unbound and
//! constructor. For each, shows the lambda edge and the receiver/parameter
//! shift chosen for the implementing method.

use indyscope::fixpoint::Settings;
use indyscope::rules::AnalysisOptions;
use indyscope::store::EdgeKind;
use indyscope::{analyze, corpus};

fn main() {
    for name in ["mref_static", "mref_bound", "mref_unbound", "mref_constructor"] {
        let program = corpus::find(name).unwrap().expect("bundled corpus").load().unwrap();
        let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
        println!("{name}");
        for (site, callee, kind) in solution.edges() {
            if kind == EdgeKind::Lambda {
                println!("  {site} -> {callee}");
            }
        }
        for row in &solution.dump()["ParamsReceiverShiftRight"] {
            println!("  shift (k, n) = ({}, {}) for {}", row[2], row[3], row[1]);
        }
    }
    let program = corpus::find("mref_constructor").unwrap().unwrap().load().unwrap();
    let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
    println!("Box b = f.apply(..) gives {:?}", solution.points_to("Main.main/b"));
}
