//! Builds a program in code, including a vararg bootstrap whose extra
//! static arguments are packed into a mock `Object[]`, then writes it out
//! as a facts directory.

use indyscope::fixpoint::Settings;
use indyscope::ir::{MethodKind, ProgramBuilder};
use indyscope::rules::AnalysisOptions;
use indyscope::analyze;

const O: &str = "java.lang.Object";
const S: &str = "java.lang.String";

fn main() {
    let mut b = ProgramBuilder::new();
    b.class(O, None, &[])
        .primitive("void")
        .primitive("int")
        .class(S, Some(O), &[])
        .array("java.lang.Object[]");
    for t in [
        "java.lang.invoke.MethodHandles$Lookup",
        "java.lang.invoke.MethodType",
        "java.lang.invoke.CallSite",
    ] {
        b.class(t, Some(O), &[]);
    }
    b.class("Linker", Some(O), &[]);
    b.method(
        "Linker.bootstrap",
        "Linker",
        "bootstrap",
        "java.lang.invoke.CallSite",
        &["java.lang.invoke.MethodHandles$Lookup", S, "java.lang.invoke.MethodType", "java.lang.Object[]"],
        MethodKind::Static,
    )
    .load_array("first", "p3");
    let mut main = b.method("Linker.main", "Linker", "main", "void", &[], MethodKind::Static);
    main.indy(
        "Linker.bootstrap",
        "go",
        "void",
        &[],
        None,
        &[],
        &[("string", "a"), ("string", "b"), ("string", "c"), ("int", "3"), ("int", "4")],
    );
    b.entry("Linker.main");

    let program = b.build().unwrap();
    let solution = analyze(&program, &AnalysisOptions::default(), Settings::default()).unwrap();
    println!("vararg array: {:?}", solution.points_to("Linker.bootstrap/p3"));
    println!("elements:     {:?}", solution.points_to("Linker.bootstrap/first"));
    for d in solution.store.diagnostics().all() {
        println!("{:?} {}: {}", d.severity, d.site, d.message);
    }

    let dir = std::env::temp_dir().join("indyscope-built-program");
    b.facts().write_dir(&dir).unwrap();
    println!("facts written to {}", dir.display());
}
