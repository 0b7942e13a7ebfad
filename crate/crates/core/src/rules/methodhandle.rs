//! Method-handle invocation, and the `java.lang.invoke` factory API.

use std::collections::BTreeSet;

use super::api::Api;
use super::{diag, mh_materialize, pass_args, vpt};
use crate::fixpoint::{Rule, RuleCx};
use crate::ir::{InsnId, LookupMode, MethodKind, Program, TypeId, UseRole, VarId};
use crate::store::{Fact, Severity};
use crate::value::{as_type_compat, jdk, AbstractValue, MethodHandle, MethodType, ValueId};

/// The type a handle's invoker must be called with: the receiver comes
/// first for instance methods, and constructors return their class.
pub fn invocation_type(p: &Program, h: &MethodHandle) -> MethodType {
    let decl = p.method(h.method);
    match decl.kind {
        MethodKind::Static => h.mtype.clone(),
        MethodKind::Constructor => MethodType::new(decl.declaring_type, h.mtype.params.clone()),
        MethodKind::Instance => {
            let params: Vec<TypeId> = std::iter::once(decl.declaring_type)
                .chain(h.mtype.params.iter().copied())
                .collect();
            MethodType::new(h.mtype.ret, params)
        }
    }
}

pub(crate) struct HandleApi {
    pub top_string_matches_all: bool,
}

impl Rule for HandleApi {
    fn name(&self) -> &'static str {
        "method-handle-api"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        for &i in cx.dirty_sites() {
            if let Some(api) = cx.sites.api(i) {
                self.site(cx, i, api, out);
            }
        }
        // A call-site target that appears later still reaches getTarget.
        let (p, s) = (cx.program, cx.store);
        let target = p.call_site_target_field();
        for &(c, f, h) in s.ifpt.delta() {
            if f != target {
                continue;
            }
            for &v in s.pointed_by(c) {
                for u in p.uses_of(v).iter().filter(|u| u.role == UseRole::CallBase) {
                    if cx.sites.api(u.insn) == Some(Api::GetTarget) {
                        if let Some(ret) = p.insn(u.insn).assign_ret() {
                            vpt(out, ret, h);
                        }
                    }
                }
            }
        }
    }
}

impl HandleApi {
    fn site(&self, cx: &RuleCx<'_>, i: InsnId, api: Api, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        let call = p.insn(i).as_call().expect("classified call");
        let pts = |v: Option<VarId>| v.map(|v| s.points_to(v)).unwrap_or(&[]);
        let base = pts(call.base);
        let arg = |n: usize| pts(call.args.get(n).copied());
        let values = |vs: &[ValueId]| vs.iter().map(|&v| s.value(v)).collect::<Vec<_>>();
        let target = p.call_site_target_field();

        match api {
            Api::CallSiteInit | Api::SetTarget => {
                for &c in base {
                    for &h in arg(0) {
                        if s.value(h).as_handle().is_some() {
                            out.push(Fact::Ifpt(c.into(), target, h.into()));
                        }
                    }
                }
                return;
            }
            _ => {}
        }
        let Some(ret) = call.ret else { return };
        match api {
            Api::Lookup => vpt(out, ret, AbstractValue::Lookup(p.caller_type(i))),
            Api::LookupClass => {
                for v in values(base) {
                    if let AbstractValue::Lookup(t) = v {
                        vpt(out, ret, AbstractValue::Class(*t));
                    }
                }
            }
            Api::Unreflect | Api::UnreflectSpecial | Api::UnreflectConstructor => {
                let want_ctor = api == Api::UnreflectConstructor;
                for v in values(arg(0)) {
                    if let AbstractValue::Method(m) = v {
                        if p.method(*m).is_constructor() == want_ctor {
                            vpt(out, ret, mh_materialize(p, *m));
                        }
                    }
                }
            }
            Api::FindVirtual | Api::FindStatic => {
                let has_lookup =
                    call.base.is_none() || values(base).iter().any(|v| matches!(v, AbstractValue::Lookup(_)));
                if !has_lookup {
                    return;
                }
                let mode = if api == Api::FindStatic {
                    LookupMode::StaticOnly
                } else {
                    LookupMode::Virtual
                };
                for c in values(arg(0)) {
                    let AbstractValue::Class(t) = c else { continue };
                    for name in values(arg(1)) {
                        for n in self.names(p, *t, name) {
                            for mt in values(arg(2)) {
                                let AbstractValue::MethodType(mt) = mt else { continue };
                                if let Some(m) = p.method_lookup(*t, &n, mt, mode) {
                                    vpt(out, ret, mh_materialize(p, m));
                                }
                            }
                        }
                    }
                }
            }
            Api::MethodType => {
                for mt in self.method_types(cx, call) {
                    vpt(out, ret, AbstractValue::MethodType(mt));
                }
            }
            Api::AsType => {
                for h in values(base) {
                    let AbstractValue::Handle(h) = h else { continue };
                    for mt in values(arg(0)) {
                        let AbstractValue::MethodType(mt) = mt else { continue };
                        if as_type_compat(p, &h.mtype, mt) {
                            vpt(out, ret, AbstractValue::handle(h.method, mt.clone()));
                        }
                    }
                }
            }
            Api::GetTarget => {
                for &c in base {
                    for &h in s.field(c, target) {
                        vpt(out, ret, h);
                    }
                }
            }
            _ => {}
        }
    }

    /// Method names a name argument can denote on `t`.
    fn names(&self, p: &Program, t: TypeId, name: &AbstractValue) -> Vec<String> {
        match name {
            AbstractValue::Str(s) => vec![s.to_string()],
            AbstractValue::TopString if self.top_string_matches_all => p
                .supertypes(t)
                .iter()
                .flat_map(|&u| p.methods_of(u))
                .map(|&m| p.method(m).name.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            _ => Vec::new(),
        }
    }

    /// `methodType(rtype, ptype...)` over class arguments, or
    /// `methodType(rtype, MethodType)` which takes the parameters of the
    /// second argument.
    fn method_types(&self, cx: &RuleCx<'_>, call: &crate::ir::Call) -> Vec<MethodType> {
        let (p, s) = (cx.program, cx.store);
        let class_args = |v: VarId| -> Vec<TypeId> {
            s.points_to(v)
                .iter()
                .filter_map(|&o| match s.value(o) {
                    AbstractValue::Class(t) => Some(*t),
                    _ => None,
                })
                .collect()
        };
        let desc = &call.descriptor;
        let mt_variant =
            desc.arity() == 2 && p.ty(desc.params[1]).id == jdk::METHOD_TYPE && call.args.len() == 2;
        if mt_variant {
            let mut result = Vec::new();
            for r in class_args(call.args[0]) {
                for &o in s.points_to(call.args[1]) {
                    if let AbstractValue::MethodType(mt) = s.value(o) {
                        result.push(MethodType::new(r, mt.params.clone()));
                    }
                }
            }
            return result;
        }
        if call.args.is_empty() || call.args.len() > 5 {
            return Vec::new();
        }
        let mut combos: Vec<Vec<TypeId>> = vec![Vec::new()];
        for &a in &call.args {
            let options = class_args(a);
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    options.iter().map(move |&t| {
                        let mut next = prefix.clone();
                        next.push(t);
                        next
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|ts| MethodType::new(ts[0], ts[1..].to_vec()))
            .collect()
    }
}

/// Edges from `invoke`/`invokeExact` calls to the methods of the handles
/// their receiver may hold.
pub(crate) struct HandleInvoke {
    pub strict_invoke_exact: bool,
}

impl Rule for HandleInvoke {
    fn name(&self) -> &'static str {
        "method-handle-invoke"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &(v, h) in cx.store.vpt.delta() {
            let AbstractValue::Handle(mh) = cx.store.value(h) else { continue };
            for u in p.uses_of(v).iter().filter(|u| u.role == UseRole::CallBase) {
                let api = cx.sites.api(u.insn);
                if !matches!(api, Some(Api::Invoke | Api::InvokeExact)) {
                    continue;
                }
                let desc = &p.insn(u.insn).as_call().expect("call").descriptor;
                let accepted = if api == Some(Api::InvokeExact) {
                    !self.strict_invoke_exact || *desc == invocation_type(p, mh)
                } else {
                    as_type_compat(p, desc, &invocation_type(p, mh))
                };
                if accepted {
                    out.push(Fact::Mhcge(u.insn, mh.method, h.into()));
                    out.push(Fact::Reachable(mh.method));
                }
            }
        }
    }
}

/// Argument, receiver and return passing along method-handle edges, from
/// both `invoke` calls and invokedynamic sites.
pub(crate) struct HandleFlow;

impl Rule for HandleFlow {
    fn name(&self) -> &'static str {
        "method-handle-flow"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &(i, m, h) in cx.store.mhcge.delta() {
            let insn = p.insn(i);
            let decl = p.method(m);
            let expected = decl.param_types.len() + usize::from(decl.kind == MethodKind::Instance);
            if insn.actuals().len() < expected {
                diag(
                    out,
                    Severity::Warning,
                    &insn.id,
                    format!(
                        "method-handle call passes {} arguments but {} expects {expected}",
                        insn.actuals().len(),
                        decl.id
                    ),
                );
            }
            match decl.kind {
                MethodKind::Static => pass_args(p, insn, m, 0, out),
                MethodKind::Instance => {
                    if let (Some(&recv), Some(this)) = (insn.actuals().first(), decl.this_var) {
                        out.push(Fact::Assign(recv, this));
                    }
                    pass_args(p, insn, m, 1, out);
                }
                MethodKind::Constructor => {
                    let handle = cx.store.value(h).as_handle().expect("handle value").clone();
                    let mock = AbstractValue::MockHandle {
                        ty: decl.declaring_type,
                        handle,
                    };
                    if let Some(this) = decl.this_var {
                        vpt(out, this, mock.clone());
                    }
                    if let Some(ret) = insn.assign_ret() {
                        vpt(out, ret, mock);
                    }
                    pass_args(p, insn, m, 0, out);
                }
            }
        }
    }
}
