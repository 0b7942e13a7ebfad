//! Lambdas and method references: metafactory sites produce mock
//! functional objects, and calls on those objects are routed to the
//! implementing method with captured values and arguments laid out by the
//! receiver/parameter shift.

use std::collections::BTreeSet;

use super::api::MetafactoryKind;
use super::{diag, insn_name, pass_return, vpt};
use crate::fixpoint::{Rule, RuleCx};
use crate::ir::{Constant, InsnId, MethodId, MethodKind, Program, TypeKind, UseRole};
use crate::store::{Fact, Severity};
use crate::value::{AbstractValue, ValueId};

/// Number of values captured at a metafactory site.
fn capture_arity(p: &Program, i: InsnId) -> usize {
    p.insn(i).actuals().len()
}

pub(crate) struct Metafactory;

impl Rule for Metafactory {
    fn name(&self) -> &'static str {
        "metafactory"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &(i, bm) in cx.store.cgeb.delta() {
            let Some(kind) = cx.sites.metafactory(bm) else { continue };
            let d = p.insn(i).as_indy().expect("indy");
            if kind == MetafactoryKind::Alt {
                diag(
                    out,
                    Severity::Info,
                    insn_name(p, i),
                    "altMetafactory flags and extra arguments are ignored".into(),
                );
            }
            if p.ty(d.mtype.ret).kind == TypeKind::Interface {
                out.push(Fact::MetafactoryInvoke(i, d.mtype.ret));
            } else {
                diag(
                    out,
                    Severity::Warning,
                    insn_name(p, i),
                    format!("metafactory site produces non-interface type {}", p.ty(d.mtype.ret).id),
                );
            }
        }
    }
}

/// Creates the functional object and records captured values.
pub(crate) struct LambdaCreate;

impl Rule for LambdaCreate {
    fn name(&self) -> &'static str {
        "lambda-create"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        for &(i, t) in s.metafactory_invoke.delta() {
            let d = p.insn(i).as_indy().expect("indy");
            match d.boot_args.get(1) {
                Some(Constant::Handle(m)) => {
                    let lambda = AbstractValue::Mock { ty: t, site: i };
                    if let Some(ret) = d.ret {
                        vpt(out, ret, lambda.clone());
                    }
                    out.push(Fact::LambdaObject(lambda.into(), *m, i));
                }
                _ => diag(
                    out,
                    Severity::Warning,
                    insn_name(p, i),
                    "metafactory argument 1 is not a method handle constant".into(),
                ),
            }
            for (n, &a) in d.args.iter().enumerate() {
                for &val in s.points_to(a) {
                    out.push(Fact::LambdaCaptured(i, n, val));
                }
            }
        }
        for &(v, val) in s.vpt.delta() {
            for u in p.uses_of(v) {
                let UseRole::IndyArg(n) = u.role else { continue };
                let d = p.insn(u.insn).as_indy().expect("indy");
                if s.metafactory_invoke.contains(&(u.insn, d.mtype.ret)) {
                    out.push(Fact::LambdaCaptured(u.insn, n, val));
                }
            }
        }
    }
}

/// Calls whose receiver may be a functional object, matched by the name
/// of the interface method the object implements.
pub(crate) struct LambdaDispatch;

impl Rule for LambdaDispatch {
    fn name(&self) -> &'static str {
        "lambda-dispatch"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let s = cx.store;
        for &(v, lambda) in s.vpt.delta() {
            for &(m, i) in s.lambdas_of(lambda) {
                self.link(cx, v, lambda, m, i, out);
            }
        }
        for &(lambda, m, i) in s.lambda_object.delta() {
            for &v in s.pointed_by(lambda) {
                self.link(cx, v, lambda, m, i, out);
            }
        }
    }
}

impl LambdaDispatch {
    fn link(&self, cx: &RuleCx<'_>, v: crate::ir::VarId, lambda: ValueId, m: MethodId, i: InsnId, out: &mut Vec<Fact>) {
        let p = cx.program;
        let name = &p.insn(i).as_indy().expect("indy").name;
        for u in p.uses_of(v).iter().filter(|u| u.role == UseRole::CallBase) {
            let call = p.insn(u.insn).as_call().expect("call");
            if call.kind.is_dynamic_dispatch() && call.callee.name == *name {
                out.push(Fact::LambdaCge(u.insn, m, lambda));
                out.push(Fact::Reachable(m));
            }
        }
    }
}

/// Decides how captured values and invocation arguments line up with the
/// implementing method's receiver and formals.
pub(crate) struct LambdaShift;

impl Rule for LambdaShift {
    fn name(&self) -> &'static str {
        "lambda-shift"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        for &(_, m, lambda) in s.lambda_cge.delta() {
            for &(impl_m, i) in s.lambdas_of(lambda) {
                if impl_m != m {
                    continue;
                }
                let (k, n) = match p.method(m).kind {
                    MethodKind::Instance => {
                        out.push(Fact::CalledInstanceImpl(i, m, lambda));
                        if capture_arity(p, i) == 0 {
                            (0, 1)
                        } else {
                            (1, 0)
                        }
                    }
                    MethodKind::Static | MethodKind::Constructor => (0, 0),
                };
                out.push(Fact::Shift(lambda, m, k, n));
            }
        }
    }
}

/// Value flow into and out of implementing methods.
pub(crate) struct LambdaFlow;

impl Rule for LambdaFlow {
    fn name(&self) -> &'static str {
        "lambda-flow"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let s = cx.store;
        let mut dirty: BTreeSet<(ValueId, MethodId)> = BTreeSet::new();
        dirty.extend(s.lambda_cge.delta().iter().map(|&(_, m, l)| (l, m)));
        dirty.extend(s.shift.delta().iter().map(|&(l, m, _, _)| (l, m)));
        for &(i, _, _) in s.lambda_captured.delta() {
            dirty.extend(s.lambdas_at(i).iter().copied());
        }
        for (lambda, m) in dirty {
            for &(impl_m, i) in s.lambdas_of(lambda) {
                if impl_m == m {
                    self.flow(cx, lambda, m, i, out);
                }
            }
        }
    }
}

impl LambdaFlow {
    fn flow(&self, cx: &RuleCx<'_>, lambda: ValueId, m: MethodId, i: InsnId, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        let calls = s.lambda_calls_of(lambda, m);
        if calls.is_empty() {
            return;
        }
        let decl = p.method(m);
        let arity = decl.param_types.len();
        let captures = capture_arity(p, i);
        let out_of_range = |site: &str, idx: isize, what: &str, out: &mut Vec<Fact>| {
            diag(
                out,
                Severity::Warning,
                site,
                format!("{what} maps to parameter {idx} of {}, which has {arity}", decl.id),
            );
        };

        for &(k, n) in s.shifts_of(lambda, m) {
            let (k, n) = (usize::from(k), usize::from(n));
            for &(pos, val) in s.captured_at(i) {
                if k == 1 && pos == 0 {
                    if let Some(this) = decl.this_var {
                        vpt(out, this, val);
                    }
                }
                if pos < k {
                    continue;
                }
                let idx = pos - k;
                if idx < arity {
                    if let Some(f) = decl.formal(idx) {
                        vpt(out, f, val);
                    }
                } else {
                    out_of_range(insn_name(p, i), idx as isize, &format!("captured value {pos}"), out);
                }
            }
            for &j in calls {
                let call = p.insn(j);
                let actuals = call.actuals();
                for (pos, &a) in actuals.iter().enumerate().skip(n) {
                    let idx = captures as isize - (k + n) as isize + pos as isize;
                    if (0..arity as isize).contains(&idx) {
                        if let Some(f) = decl.formal(idx as usize) {
                            out.push(Fact::Assign(a, f));
                        }
                    } else {
                        out_of_range(&call.id, idx, &format!("argument {pos}"), out);
                    }
                }
                if n == 1 {
                    if let (Some(&recv), Some(this)) = (actuals.first(), decl.this_var) {
                        out.push(Fact::Assign(recv, this));
                    }
                }
            }
        }
        for &j in calls {
            let call = p.insn(j);
            pass_return(call, p, m, out);
            if decl.is_constructor() {
                let obj = AbstractValue::Mock {
                    ty: decl.declaring_type,
                    site: j,
                };
                if let Some(this) = decl.this_var {
                    vpt(out, this, obj.clone());
                }
                if let Some(ret) = call.assign_ret() {
                    vpt(out, ret, obj);
                }
            }
        }
    }
}
