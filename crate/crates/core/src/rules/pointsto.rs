//! Context-insensitive, field-sensitive points-to analysis with ordinary
//! call-graph construction.

use super::api::{signature, Api};
use super::{constant_value, diag, pass_args, vpt};
use crate::fixpoint::{Rule, RuleCx};
use crate::ir::{CallKind, Constant, InsnId, LookupMode, Op, Program, TypeKind, UseRole};
use crate::store::{EdgeKind, Fact, Severity};
use crate::value::{jdk, AbstractValue, ValueId};

pub(crate) struct EntryPoints;

impl Rule for EntryPoints {
    fn name(&self) -> &'static str {
        "entry-points"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        if !cx.initial {
            return;
        }
        let entries = cx.program.entry_points();
        if entries.is_empty() {
            diag(out, Severity::Warning, "-", "no entry points; nothing is reachable".into());
        }
        out.extend(entries.iter().map(|&m| Fact::Reachable(m)));
    }
}

/// Statements whose effect depends only on their method being reachable:
/// allocations, constants, moves, and statically bound calls.
pub(crate) struct Statements {
    pub class_constants: bool,
}

impl Rule for Statements {
    fn name(&self) -> &'static str {
        "statements"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &m in cx.store.reachable.delta() {
            for &i in p.insns_of(m) {
                match &p.insn(i).op {
                    Op::Alloc { to, ty } => vpt(out, *to, AbstractValue::Alloc { site: i, ty: *ty }),
                    Op::Const { to, value } => {
                        if self.class_constants || !matches!(value, Constant::Class(_)) {
                            vpt(out, *to, constant_value(p, value));
                        }
                    }
                    Op::Move { to, from } => out.push(Fact::Assign(*from, *to)),
                    Op::Call(_) => self.call(cx, i, out),
                    _ => {}
                }
            }
        }
    }
}

impl Statements {
    fn call(&self, cx: &RuleCx<'_>, i: InsnId, out: &mut Vec<Fact>) {
        let p = cx.program;
        let insn = p.insn(i);
        let call = insn.as_call().expect("call instruction");
        match cx.sites.api(i) {
            Some(Api::Unmodeled) => {
                let sig = signature(p, call);
                diag(out, Severity::Warning, &insn.id, format!("unmodeled method-handle API call {sig}"));
                out.push(Fact::Unmodeled(i, sig.into()));
                return;
            }
            Some(_) => return,
            None => {}
        }
        if !matches!(call.kind, CallKind::Static | CallKind::Special) {
            return;
        }
        let target = call
            .callee
            .owner
            .and_then(|t| p.resolve_direct(t, &call.callee.name, &call.descriptor));
        let Some(m) = target else {
            diag(out, Severity::Warning, &insn.id, format!("unlinked call {}", signature(p, call)));
            unknown_string_result(p, call, out);
            return;
        };
        out.push(Fact::Cge(i, m, EdgeKind::Static));
        out.push(Fact::Reachable(m));
        if call.kind == CallKind::Special {
            if let (Some(base), Some(this)) = (call.base, p.method(m).this_var) {
                out.push(Fact::Assign(base, this));
            }
        }
        pass_args(p, insn, m, 0, out);
    }
}

/// Results of unresolved calls returning `String` are the unknown string.
fn unknown_string_result(p: &Program, call: &crate::ir::Call, out: &mut Vec<Fact>) {
    if let Some(ret) = call.ret {
        if p.ty(call.descriptor.ret).id == jdk::STRING {
            vpt(out, ret, AbstractValue::TopString);
        }
    }
}

/// `to = from` edges, including the ones produced by call binding.
pub(crate) struct AssignFlow;

impl Rule for AssignFlow {
    fn name(&self) -> &'static str {
        "assign"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let s = cx.store;
        for &(from, to) in s.assign.delta() {
            for &o in s.points_to(from) {
                vpt(out, to, o);
            }
        }
        for &(v, o) in s.vpt.delta() {
            for &to in s.assigned_from(v) {
                vpt(out, to, o);
            }
        }
    }
}

/// Field and array loads and stores.
pub(crate) struct HeapFlow;

impl Rule for HeapFlow {
    fn name(&self) -> &'static str {
        "heap"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        for &(v, o) in s.vpt.delta() {
            for u in p.uses_of(v) {
                self.on_new_value(cx, u.insn, u.role, o, out);
            }
        }
        for &(o, f, val) in s.ifpt.delta() {
            for &v in s.pointed_by(o) {
                for u in p.uses_of(v).iter().filter(|u| u.role == UseRole::LoadBase) {
                    if let Op::LoadField { to, field, .. } = p.insn(u.insn).op {
                        if field == f {
                            vpt(out, to, val);
                        }
                    }
                }
            }
        }
        for &(a, val) in s.apt.delta() {
            for &v in s.pointed_by(a) {
                for u in p.uses_of(v).iter().filter(|u| u.role == UseRole::ArrayLoadBase) {
                    if let Op::LoadArray { to, .. } = p.insn(u.insn).op {
                        vpt(out, to, val);
                    }
                }
            }
        }
        for &(f, val) in s.sfpt.delta() {
            for &i in p.static_loads_of(f) {
                if let Op::LoadField { to, .. } = p.insn(i).op {
                    if s.is_reachable(p.insn(i).method) {
                        vpt(out, to, val);
                    }
                }
            }
        }
        for &m in s.reachable.delta() {
            for &i in p.insns_of(m) {
                if let Op::LoadField { to, base: None, field } = p.insn(i).op {
                    for &val in s.static_field(field) {
                        vpt(out, to, val);
                    }
                }
            }
        }
    }
}

impl HeapFlow {
    fn on_new_value(&self, cx: &RuleCx<'_>, i: InsnId, role: UseRole, o: ValueId, out: &mut Vec<Fact>) {
        let s = cx.store;
        match (role, &cx.program.insn(i).op) {
            (UseRole::StoreBase, Op::StoreField { field, from, .. }) => {
                for &val in s.points_to(*from) {
                    out.push(Fact::Ifpt(o.into(), *field, val.into()));
                }
            }
            (UseRole::StoreValue, Op::StoreField { base: Some(b), field, .. }) => {
                for &ob in s.points_to(*b) {
                    out.push(Fact::Ifpt(ob.into(), *field, o.into()));
                }
            }
            (UseRole::StoreValue, Op::StoreField { base: None, field, .. }) => {
                out.push(Fact::Sfpt(*field, o.into()));
            }
            (UseRole::LoadBase, Op::LoadField { to, field, .. }) => {
                for &val in s.field(o, *field) {
                    vpt(out, *to, val);
                }
            }
            (UseRole::ArrayStoreBase, Op::StoreArray { from, .. }) => {
                for &val in s.points_to(*from) {
                    out.push(Fact::Apt(o.into(), val.into()));
                }
            }
            (UseRole::ArrayStoreValue, Op::StoreArray { base, .. }) => {
                for &ob in s.points_to(*base) {
                    out.push(Fact::Apt(ob.into(), o.into()));
                }
            }
            (UseRole::ArrayLoadBase, Op::LoadArray { to, .. }) => {
                for &val in s.array(o) {
                    vpt(out, *to, val);
                }
            }
            _ => {}
        }
    }
}

/// Virtual and interface calls, dispatched on the runtime type of each
/// class-typed receiver. Receivers of interface type (functional objects)
/// are left to the lambda rules.
pub(crate) struct VirtualDispatch;

impl Rule for VirtualDispatch {
    fn name(&self) -> &'static str {
        "virtual-dispatch"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &(v, o) in cx.store.vpt.delta() {
            for u in p.uses_of(v).iter().filter(|u| u.role == UseRole::CallBase) {
                let insn = p.insn(u.insn);
                let call = insn.as_call().expect("call base use");
                if !call.kind.is_dynamic_dispatch() || cx.sites.api(u.insn).is_some() {
                    continue;
                }
                let Some(t) = cx.store.value(o).runtime_type(p) else {
                    continue;
                };
                if p.ty(t).kind != TypeKind::Class {
                    continue;
                }
                match p.method_lookup(t, &call.callee.name, &call.descriptor, LookupMode::Virtual) {
                    Some(m) => {
                        out.push(Fact::Cge(u.insn, m, EdgeKind::Virtual));
                        out.push(Fact::Reachable(m));
                        if let Some(this) = p.method(m).this_var {
                            vpt(out, this, o);
                        }
                        pass_args(p, insn, m, 0, out);
                    }
                    None => {
                        diag(
                            out,
                            Severity::Warning,
                            &insn.id,
                            format!("unlinked call {} on receiver type {}", signature(p, call), p.ty(t).id),
                        );
                        unknown_string_result(p, call, out);
                    }
                }
            }
        }
    }
}
