#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use indyscope::fixpoint::{naive_solve, solve, RulePack, Settings, Solution};
use indyscope::ir::{MethodKind, Program};
use indyscope::rules::AnalysisOptions;
use indyscope::store::Dump;
use indyscope::value::{type_compat, AbstractValue};
use indyscope::{analyze, corpus};

pub const LAMBDA_PROGRAMS: &[&str] = &[
    "lambda_consumer",
    "lambda_function",
    "lambda_supplier",
    "lambda_closures",
    "mref_static",
    "mref_bound",
    "mref_unbound",
    "mref_constructor",
    "sam_conversion",
];

pub fn load(name: &str) -> Program {
    corpus::find(name)
        .unwrap()
        .unwrap_or_else(|| panic!("corpus program {name} missing"))
        .load()
        .unwrap()
}

pub fn corpus_names() -> Vec<String> {
    corpus::list(&corpus::corpus_dir())
        .unwrap()
        .into_iter()
        .map(|e| e.name)
        .collect()
}

pub fn run<'p>(p: &'p Program, options: AnalysisOptions) -> Solution<'p> {
    analyze(p, &options, Settings::default()).unwrap()
}

pub fn no_reflection() -> AnalysisOptions {
    AnalysisOptions {
        reflection: false,
        ..AnalysisOptions::default()
    }
}

pub fn naive(p: &Program, options: AnalysisOptions) -> Dump {
    naive_solve(p, &RulePack::standard(&options), Settings::default())
        .unwrap()
        .dump()
}

pub fn single_thread(p: &Program, options: AnalysisOptions) -> Dump {
    let settings = Settings {
        single_thread: true,
        ..Settings::default()
    };
    solve(p, &RulePack::standard(&options), settings).unwrap().dump()
}

/// Relations of `a` that are not a subset of the same relation in `b`.
pub fn not_subset(a: &Dump, b: &Dump) -> Vec<String> {
    let empty = BTreeSet::new();
    a.iter()
        .filter(|(rel, rows)| !rows.is_subset(b.get(*rel).unwrap_or(&empty)))
        .map(|(rel, _)| rel.to_string())
        .collect()
}

pub fn row(fields: &[&str]) -> Vec<String> {
    fields.iter().map(|s| s.to_string()).collect()
}

/// Structural invariants that must hold for every solution.
pub fn check_invariants(sol: &Solution<'_>) -> Result<(), String> {
    let p = sol.program;
    let s = &sol.store;
    let name = |m| p.method(m).id.as_str();

    for &(_, m, h) in s.mhcge().all() {
        match s.value(h).as_handle() {
            Some(mh) if mh.method == m => {}
            _ => return Err(format!("MHCGE handle {h:?} does not denote {}", name(m))),
        }
    }
    for &(_, m, _) in s.cge().all() {
        if !s.is_reachable(m) {
            return Err(format!("CGE target {} not reachable", name(m)));
        }
    }
    for &(_, bm) in s.cgeb().all() {
        if !s.is_reachable(bm) {
            return Err(format!("bootstrap {} not reachable", name(bm)));
        }
    }
    for &(v, _) in s.vpt().all() {
        if !s.is_reachable(p.var(v).method) {
            return Err(format!("VPT mentions {} of an unreachable method", p.var(v).id));
        }
    }

    let sites: BTreeSet<_> = s.indy_call_site().all().iter().map(|&(c, _, _)| c).collect();
    for &(c, _, _) in s.call_site_contents().all() {
        if !sites.contains(&c) {
            return Err("CallSiteContents on an unbound call site".into());
        }
    }
    for &(i, m, h) in s.mhcge().all() {
        if p.insn(i).as_indy().is_none() {
            continue;
        }
        let mh = s.value(h).as_handle().unwrap();
        let decl = p.method(m);
        let justified = s.indy_call_site().all().iter().any(|&(c, i2, t)| {
            i2 == i
                && s.call_site_contents().contains(&(c, h, m))
                && (type_compat(p, mh.mtype.ret, t) || (decl.is_constructor() && decl.declaring_type == t))
        });
        if !justified {
            return Err(format!("indy MHCGE to {} fails both guards", name(m)));
        }
    }

    let mut shifts: BTreeMap<_, Vec<(u8, u8)>> = BTreeMap::new();
    for &(l, m, k, n) in s.shift().all() {
        shifts.entry((l, m)).or_default().push((k, n));
    }
    for ((_, m), ks) in &shifts {
        if ks.len() != 1 {
            return Err(format!("{} has {} shifts", name(*m), ks.len()));
        }
        if !matches!(ks[0], (0, 0) | (0, 1) | (1, 0)) {
            return Err(format!("bad shift {:?}", ks[0]));
        }
    }
    for &(l, _, i) in s.lambda_object().all() {
        match s.value(l) {
            AbstractValue::Mock { ty, site } if *site == i && p.ty(*ty).kind == indyscope::ir::TypeKind::Interface => {}
            v => return Err(format!("lambda value {v:?} is not an interface mock of its site")),
        }
    }
    for &(j, m, l) in s.lambda_cge().all() {
        let Some(&(_, _, i)) = s.lambda_object().all().iter().find(|&&(l2, m2, _)| l2 == l && m2 == m) else {
            return Err("LambdaCGE without LambdaObject".into());
        };
        let d = p.insn(i).as_indy().unwrap();
        let call = p.insn(j).as_call().unwrap();
        if call.callee.name != d.name {
            return Err(format!("lambda edge name {} vs {}", call.callee.name, d.name));
        }
        let Some(&(k, n)) = shifts.get(&(l, m)).and_then(|v| v.first()) else {
            return Err(format!("no shift for {}", name(m)));
        };
        let (k, n) = (k as isize, n as isize);
        let cap = d.args.len() as isize;
        let arity = p.method(m).param_types.len() as isize;
        let actuals = p.insn(j).actuals().len() as isize;
        for pos in n..actuals {
            let idx = cap - (k + n) + pos;
            if !(0..arity).contains(&idx) {
                return Err(format!("argument {pos} of {} maps to {idx}", p.insn(j).id));
            }
        }
        for pos in k..cap {
            if !(0..arity).contains(&(pos - k)) {
                return Err(format!("capture {pos} maps out of range"));
            }
        }
        if (cap - k) + (actuals - n) != arity {
            return Err(format!("{} formals not covered exactly at {}", name(m), p.insn(j).id));
        }
        let want = match p.method(m).kind {
            MethodKind::Instance if cap == 0 => (0, 1),
            MethodKind::Instance => (1, 0),
            _ => (0, 0),
        };
        if (k, n) != want {
            return Err(format!("shift for {} is {:?}, want {want:?}", name(m), (k, n)));
        }
    }
    Ok(())
}

const STATEMENT_FILES: &[&str] = &[
    "Alloc",
    "Move",
    "StoreField",
    "LoadField",
    "StoreArray",
    "LoadArray",
    "Const",
    "Call",
    "InvokeDynamic",
];

/// Removes every instruction whose position (in statement-file order) is
/// marked in `drop`, together with its actual and bootstrap arguments.
/// Types, methods and entry points are kept, so the result is a valid
/// subset of the input.
pub fn drop_instructions(facts: &indyscope::ir::FactSet, drop: &[bool]) -> indyscope::ir::FactSet {
    let mut out = facts.clone();
    let mut removed = BTreeSet::new();
    let mut k = 0;
    for rel in STATEMENT_FILES {
        for row in facts.rows(rel) {
            if drop.get(k % drop.len().max(1)).copied().unwrap_or(false) {
                removed.insert(row.fields[0].clone());
            }
            k += 1;
        }
    }
    for rel in STATEMENT_FILES.iter().chain(&["ActualParam", "BootArg"]) {
        out.rows_mut(rel).retain(|r| !removed.contains(&r.fields[0]));
    }
    out
}
