//! Whole-program points-to, call-graph and reachability analysis for a
//! small Java-like IR, with models of method handles, `invokedynamic`, and
//! lambda/method-reference creation through the lambda metafactory.
//!
//! ```
//! use indyscope::{analyze, corpus, fixpoint::Settings, rules::AnalysisOptions};
//!
//! let program = corpus::find("lambda_consumer").unwrap().unwrap().load().unwrap();
//! let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
//! assert!(solution.is_reachable("LambdaConsumer.target"));
//! ```

pub mod cli;
pub mod corpus;
pub mod fixpoint;
pub mod ir;
pub mod report;
pub mod rules;
pub mod store;
pub mod value;

use fixpoint::{RulePack, Settings, Solution, SolveError};
use ir::Program;
use rules::AnalysisOptions;

/// Solves the standard rule pack for `options` over `program`.
pub fn analyze<'p>(
    program: &'p Program,
    options: &AnalysisOptions,
    settings: Settings,
) -> Result<Solution<'p>, SolveError> {
    fixpoint::solve(program, &RulePack::standard(options), settings)
}
