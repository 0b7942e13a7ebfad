//! invokedynamic: bootstrap calls, call-site objects, and dispatch through
//! call-site targets.

use super::{constant_value, diag, pass_return, vpt};
use crate::fixpoint::{Rule, RuleCx};
use crate::ir::{InsnId, MethodId, TypeId};
use crate::store::{Fact, Severity};
use crate::value::{jdk, type_compat, AbstractValue, ValueId};

/// Runs the bootstrap method of every invokedynamic instruction in a
/// reachable method.
pub(crate) struct Bootstrap;

impl Rule for Bootstrap {
    fn name(&self) -> &'static str {
        "bootstrap"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &m in cx.store.reachable.delta() {
            for &i in p.insns_of(m) {
                let insn = p.insn(i);
                let Some(d) = insn.as_indy() else { continue };
                let bm = d.bootstrap;
                let decl = p.method(bm);
                out.push(Fact::Cgeb(i, bm));
                out.push(Fact::Reachable(bm));

                let jvm_args = [
                    AbstractValue::Lookup(p.caller_type(i)),
                    AbstractValue::string(&d.name),
                    AbstractValue::MethodType(d.mtype.clone()),
                ];
                for (n, val) in jvm_args.into_iter().enumerate() {
                    if let Some(f) = decl.formal(n) {
                        vpt(out, f, val);
                    }
                }

                let vararg = cx.sites.is_vararg_bootstrap(bm);
                let mut packed = Vec::new();
                for (n, c) in d.boot_args.iter().enumerate() {
                    let val = constant_value(p, c);
                    if vararg && n > 2 {
                        packed.push(val.clone());
                    }
                    if n + 3 < decl.param_types.len() {
                        if let Some(f) = decl.formal(n + 3) {
                            vpt(out, f, val);
                        }
                    } else if !(vararg && n > 2) {
                        diag(
                            out,
                            Severity::Warning,
                            &insn.id,
                            format!("bootstrap argument {n} has no parameter in {}; dropped", decl.id),
                        );
                    }
                }
                if !packed.is_empty() {
                    match p.type_id(jdk::OBJECT_ARRAY) {
                        Some(array_ty) => {
                            let array = AbstractValue::Mock { ty: array_ty, site: i };
                            if let Some(f) = decl.formal(3) {
                                vpt(out, f, array.clone());
                            }
                            for val in packed {
                                out.push(Fact::Apt(array.clone().into(), val.into()));
                            }
                        }
                        None => diag(
                            out,
                            Severity::Warning,
                            &insn.id,
                            format!("vararg bootstrap arguments need {} to be declared", jdk::OBJECT_ARRAY),
                        ),
                    }
                }

                if !cx.sites.is_metafactory(bm) {
                    pass_return(insn, p, bm, out);
                }
            }
        }
    }
}

/// Records call-site objects returned by bootstrap methods.
pub(crate) struct CallSiteBinding;

impl Rule for CallSiteBinding {
    fn name(&self) -> &'static str {
        "call-site-binding"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        let Some(call_site) = p.type_id(jdk::CALL_SITE) else { return };
        let bind = |c: ValueId, i: InsnId, out: &mut Vec<Fact>| {
            let is_call_site = s
                .value(c)
                .runtime_type(p)
                .is_some_and(|t| p.is_subtype(t, call_site));
            if is_call_site {
                let d = p.insn(i).as_indy().expect("indy");
                out.push(Fact::IndyCallSite(c, i, d.mtype.ret));
            }
        };
        for &(i, bm) in s.cgeb.delta() {
            if cx.sites.is_metafactory(bm) {
                continue;
            }
            if let Some(r) = p.method(bm).return_var {
                for &c in s.points_to(r) {
                    bind(c, i, out);
                }
            }
        }
        for &(v, c) in s.vpt.delta() {
            let Some(bm) = cx.sites.return_owner(v) else { continue };
            if cx.sites.is_metafactory(bm) {
                continue;
            }
            for &i in s.bootstrapped_by(bm) {
                bind(c, i, out);
            }
        }
    }
}

/// Relates bound call sites to their target handles and links the
/// invokedynamic instruction to the handle's method.
pub(crate) struct CallSiteDispatch;

impl Rule for CallSiteDispatch {
    fn name(&self) -> &'static str {
        "call-site-dispatch"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let (p, s) = (cx.program, cx.store);
        let target = p.call_site_target_field();
        for &(c, i, t) in s.indy_call_site.delta() {
            for &h in s.field(c, target) {
                self.link(cx, c, i, t, h, out);
            }
        }
        for &(c, f, h) in s.ifpt.delta() {
            if f != target {
                continue;
            }
            for &(i, t) in s.call_sites_of(c) {
                self.link(cx, c, i, t, h, out);
            }
        }
    }
}

impl CallSiteDispatch {
    fn link(&self, cx: &RuleCx<'_>, c: ValueId, i: InsnId, t: TypeId, h: ValueId, out: &mut Vec<Fact>) {
        let p = cx.program;
        let Some(mh) = cx.store.value(h).as_handle() else { return };
        let m: MethodId = mh.method;
        let decl = p.method(m);
        let returns_t = type_compat(p, mh.mtype.ret, t);
        let constructs_t = decl.is_constructor() && decl.declaring_type == t;
        if returns_t || constructs_t {
            out.push(Fact::CallSiteContents(c, h, m));
            out.push(Fact::Mhcge(i, m, h.into()));
            out.push(Fact::Reachable(m));
        }
    }
}
