//! The rule pack: baseline points-to analysis, the reflection kernel, the
//! method-handle model, invokedynamic, and lambdas.

mod api;
mod indy;
mod lambda;
mod methodhandle;
mod pointsto;
mod reflection;

use crate::fixpoint::RulePack;
use crate::ir::{Constant, Insn, InsnId, MethodId, Program, VarId};
use crate::store::{Diagnostic, Fact, Severity, ValRef};
use crate::value::{method_mtype, AbstractValue};

pub use api::{Api, Sites};
pub use methodhandle::invocation_type;

/// Switches for optional parts of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Constant-based reflection: class constants, `Class.forName`,
    /// `getMethod` and friends.
    pub reflection: bool,
    /// `invokeExact` requires the call descriptor to equal the handle's type.
    pub strict_invoke_exact: bool,
    /// The unknown string matches every name in name-keyed lookups.
    pub top_string_matches_all: bool,
    /// Metafactory recognition and functional-object dispatch.
    pub lambdas: bool,
    /// Model of `java.lang.invoke` factory methods (lookup, find*, unreflect,
    /// methodType, asType and call-site targets).
    pub method_handle_api: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            reflection: true,
            strict_invoke_exact: false,
            top_string_matches_all: false,
            lambdas: true,
            method_handle_api: true,
        }
    }
}

impl RulePack {
    /// The full rule set, minus whatever `options` switches off.
    pub fn standard(options: &AnalysisOptions) -> RulePack {
        let mut pack = RulePack::new();
        pack.push(pointsto::EntryPoints)
            .push(pointsto::Statements {
                class_constants: options.reflection,
            })
            .push(pointsto::AssignFlow)
            .push(pointsto::HeapFlow)
            .push(pointsto::VirtualDispatch);
        if options.reflection {
            pack.push(reflection::ReflectionKernel {
                top_string_matches_all: options.top_string_matches_all,
            });
        }
        if options.method_handle_api {
            pack.push(methodhandle::HandleApi {
                top_string_matches_all: options.top_string_matches_all,
            });
        }
        pack.push(methodhandle::HandleInvoke {
            strict_invoke_exact: options.strict_invoke_exact,
        })
        .push(methodhandle::HandleFlow)
        .push(indy::Bootstrap)
        .push(indy::CallSiteBinding)
        .push(indy::CallSiteDispatch);
        if options.lambdas {
            pack.push(lambda::Metafactory)
                .push(lambda::LambdaCreate)
                .push(lambda::LambdaDispatch)
                .push(lambda::LambdaShift)
                .push(lambda::LambdaFlow);
        }
        pack
    }
}

fn diag(out: &mut Vec<Fact>, severity: Severity, site: &str, message: String) {
    out.push(Fact::Diagnostic(Diagnostic {
        severity,
        site: site.to_string(),
        message,
    }));
}

fn vpt(out: &mut Vec<Fact>, v: VarId, val: impl Into<ValRef>) {
    out.push(Fact::Vpt(v, val.into()));
}

/// Materializes a load-time constant.
fn constant_value(p: &Program, c: &Constant) -> AbstractValue {
    match c {
        Constant::Str(s) => AbstractValue::string(s),
        Constant::Class(t) => AbstractValue::Class(*t),
        Constant::Handle(m) => mh_materialize(p, *m),
        Constant::MethodType(mt) => AbstractValue::MethodType(mt.clone()),
        Constant::Int(n) => AbstractValue::Int(*n),
    }
}

/// `MH(m, MethodMT(m))`.
pub fn mh_materialize(p: &Program, m: MethodId) -> AbstractValue {
    AbstractValue::handle(m, method_mtype(p, m))
}

/// Ordinary argument and return passing for an edge `insn -> m`:
/// actual `n + skip` flows to formal `n`, and the callee's return variable
/// to the instruction's result.
fn pass_args(p: &Program, insn: &Insn, m: MethodId, skip: usize, out: &mut Vec<Fact>) {
    let callee = p.method(m);
    for (n, &formal) in callee.formals.iter().enumerate() {
        if let Some(&actual) = insn.actuals().get(n + skip) {
            out.push(Fact::Assign(actual, formal));
        }
    }
    pass_return(insn, p, m, out);
}

fn pass_return(insn: &Insn, p: &Program, m: MethodId, out: &mut Vec<Fact>) {
    if let (Some(ret), Some(callee_ret)) = (insn.assign_ret(), p.method(m).return_var) {
        out.push(Fact::Assign(callee_ret, ret));
    }
}

fn insn_name(p: &Program, i: InsnId) -> &str {
    &p.insn(i).id
}
