//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus;
use crate::fixpoint::{Settings, SolveError, DEFAULT_MAX_ROUNDS};
use crate::ir::Program;
use crate::report::{write_dumps, AnalysisReport, CheckOutcome};
use crate::rules::AnalysisOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "indyscope", version, about = "Points-to, call-graph and reachability analysis with method-handle, invokedynamic and lambda support")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a facts directory and write relation dumps.
    Analyze {
        /// Facts directory, or the name of a bundled corpus program.
        facts: String,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Extra relations to dump, comma separated (`all` for every relation).
        #[arg(long, value_name = "RELATIONS", value_delimiter = ',')]
        dump: Vec<String>,
        #[arg(long)]
        allow_overapprox: bool,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Compare reachability with the program's expectation facts.
    Check {
        /// Facts directory, or the name of a bundled corpus program.
        facts: String,
        /// Accept expected-unreachable methods that are found reachable.
        #[arg(long)]
        allow_overapprox: bool,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Bundled corpus programs.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    /// Disable constant-based reflection (class constants, forName, getMethod).
    #[arg(long)]
    pub no_reflection: bool,
    /// Require invokeExact descriptors to equal the handle's type.
    #[arg(long)]
    pub strict_invoke_exact: bool,
    /// Let the unknown string match every name in name-based lookups.
    #[arg(long)]
    pub top_string_matches_all: bool,
    /// Disable metafactory and functional-object modeling.
    #[arg(long)]
    pub no_lambdas: bool,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    #[arg(long)]
    pub single_thread: bool,
}

impl AnalysisArgs {
    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            reflection: !self.no_reflection,
            strict_invoke_exact: self.strict_invoke_exact,
            top_string_matches_all: self.top_string_matches_all,
            lambdas: !self.no_lambdas,
            ..AnalysisOptions::default()
        }
    }

    pub fn settings(&self) -> Settings {
        Settings {
            max_rounds: self.max_rounds,
            single_thread: self.single_thread,
        }
    }
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Analyze {
            facts,
            out,
            dump,
            allow_overapprox,
            analysis,
        } => analyze(&facts, &out, &dump, allow_overapprox, &analysis),
        Command::Check {
            facts,
            allow_overapprox,
            analysis,
        } => check(&facts, allow_overapprox, &analysis),
        Command::Corpus {
            command: CorpusCommand::List { json },
        } => list_corpus(json),
    }
}

fn resolve_facts(arg: &str) -> PathBuf {
    let path = Path::new(arg);
    if !path.exists() {
        if let Ok(Some(entry)) = corpus::find(arg) {
            return entry.path;
        }
    }
    path.to_path_buf()
}

fn load(arg: &str) -> Result<Program, i32> {
    Program::load(resolve_facts(arg)).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INPUT
    })
}

fn solve_or_report<'p>(program: &'p Program, analysis: &AnalysisArgs) -> Result<crate::fixpoint::Solution<'p>, i32> {
    crate::analyze(program, &analysis.options(), analysis.settings()).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            SolveError::RoundLimit { .. } => EXIT_LIMIT,
        }
    })
}

fn analyze(facts: &str, out: &Path, dump: &[String], allow_overapprox: bool, analysis: &AnalysisArgs) -> i32 {
    let program = match load(facts) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let solution = match solve_or_report(&program, analysis) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let report = AnalysisReport::new(&solution, allow_overapprox);
    let extra: Vec<String> = if dump.iter().any(|d| d == "all") {
        crate::store::RELATION_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        dump.to_vec()
    };
    if let Err(e) = write_dumps(&solution, &report, out, &extra) {
        eprintln!("error: writing {}: {e}", out.display());
        return EXIT_INPUT;
    }
    println!(
        "{} reachable methods, {} rounds, {} diagnostics",
        report.reachable_count,
        solution.rounds,
        report.diagnostics.len()
    );
    for (kind, n) in &report.edge_counts_by_kind {
        println!("  {kind:<9} {n}");
    }
    println!("wrote {}", out.display());
    EXIT_OK
}

fn check(facts: &str, allow_overapprox: bool, analysis: &AnalysisArgs) -> i32 {
    let program = match load(facts) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if program.expectations().is_none() {
        eprintln!("error: no ExpectedReachable.facts or ExpectedUnreachable.facts in {facts}");
        return EXIT_INPUT;
    }
    let solution = match solve_or_report(&program, analysis) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let outcome = CheckOutcome::evaluate(&solution, allow_overapprox).expect("expectations present");
    print!("{}", outcome.table());
    if outcome.passed {
        println!("check passed");
        EXIT_OK
    } else {
        println!("check failed");
        EXIT_CHECK_FAILED
    }
}

fn list_corpus(json: bool) -> i32 {
    let entries = match corpus::list(&corpus::corpus_dir()) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: reading corpus: {e}");
            return EXIT_INPUT;
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&entries).expect("listing serializes"));
    } else {
        let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        for e in &entries {
            println!(
                "{:<width$}  +{} -{}  {}",
                e.name, e.expected_reachable, e.expected_unreachable, e.description
            );
        }
    }
    EXIT_OK
}
