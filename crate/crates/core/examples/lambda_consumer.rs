//! A `Consumer` lambda that captures `this`. Prints the lambda relations
//! that connect `c.accept("input")` to `target`.

use indyscope::fixpoint::Settings;
use indyscope::rules::AnalysisOptions;
use indyscope::{analyze, corpus};

fn main() {
    let program = corpus::find("lambda_consumer").unwrap().expect("bundled corpus").load().unwrap();
    let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
    let dump = solution.dump();
    for rel in [
        "LambdaMetafactoryInvoke",
        "LambdaObject",
        "LambdaCaptured",
        "CalledInstanceImplMethod",
        "ParamsReceiverShiftRight",
        "LambdaCGE",
    ] {
        for row in &dump[rel] {
            println!("{rel}({})", row.join(", "));
        }
    }
    println!("target reachable: {}", solution.is_reachable("LambdaConsumer.target"));
    println!(
        "target's parameter: {:?}",
        solution.points_to("LambdaConsumer.target/input")
    );
}
