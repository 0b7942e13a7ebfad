//! Constant-string reflection: `Class.forName` and method/constructor
//! retrieval from reified classes.

use super::api::Api;
use super::{diag, vpt};
use crate::fixpoint::{Rule, RuleCx};
use crate::ir::{MethodId, Program, TypeId, TypeKind};
use crate::store::{Fact, Severity};
use crate::value::{AbstractValue, ValueId};

pub(crate) struct ReflectionKernel {
    pub top_string_matches_all: bool,
}

impl Rule for ReflectionKernel {
    fn name(&self) -> &'static str {
        "reflection"
    }

    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>) {
        let p = cx.program;
        for &i in cx.dirty_sites() {
            let Some(api) = cx.sites.api(i) else { continue };
            let insn = p.insn(i);
            let call = insn.as_call().expect("classified call");
            let Some(ret) = call.ret else { continue };
            let arg0 = call.args.first().map(|&a| cx.store.points_to(a)).unwrap_or(&[]);
            let classes = || self.classes(cx, call.base);
            match api {
                Api::ForName => {
                    for &s in arg0 {
                        match cx.store.value(s) {
                            AbstractValue::Str(name) => match p.type_id(name) {
                                Some(t) => vpt(out, ret, AbstractValue::Class(t)),
                                None => diag(
                                    out,
                                    Severity::Warning,
                                    &insn.id,
                                    format!("Class.forName on undeclared type {name:?}"),
                                ),
                            },
                            AbstractValue::TopString if self.top_string_matches_all => {
                                for (t, decl) in p.types() {
                                    if matches!(decl.kind, TypeKind::Class | TypeKind::Interface) {
                                        vpt(out, ret, AbstractValue::Class(t));
                                    }
                                }
                            }
                            AbstractValue::TopString => diag(
                                out,
                                Severity::Warning,
                                &insn.id,
                                "Class.forName on a non-constant string".into(),
                            ),
                            _ => {}
                        }
                    }
                }
                Api::GetMethod | Api::GetDeclaredMethod => {
                    for t in classes() {
                        let owners: &[TypeId] = if api == Api::GetMethod {
                            p.supertypes(t)
                        } else {
                            std::slice::from_ref(&t)
                        };
                        for &s in arg0 {
                            for m in self.named_methods(p, owners, cx.store.value(s)) {
                                vpt(out, ret, AbstractValue::Method(m));
                            }
                        }
                    }
                }
                Api::GetConstructor | Api::GetDeclaredConstructor => {
                    for t in classes() {
                        for &m in p.methods_of(t) {
                            if p.method(m).is_constructor() {
                                vpt(out, ret, AbstractValue::Method(m));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
}

impl ReflectionKernel {
    fn classes(&self, cx: &RuleCx<'_>, base: Option<crate::ir::VarId>) -> Vec<TypeId> {
        base.map(|b| cx.store.points_to(b))
            .unwrap_or(&[])
            .iter()
            .filter_map(|&v: &ValueId| match cx.store.value(v) {
                AbstractValue::Class(t) => Some(*t),
                _ => None,
            })
            .collect()
    }

    /// Non-constructor methods of `owners` whose name is the given string.
    fn named_methods(&self, p: &Program, owners: &[TypeId], name: &AbstractValue) -> Vec<MethodId> {
        let matches = |n: &str| match name {
            AbstractValue::Str(s) => &**s == n,
            AbstractValue::TopString => self.top_string_matches_all,
            _ => false,
        };
        owners
            .iter()
            .flat_map(|&t| p.methods_of(t).iter().copied())
            .filter(|&m| !p.method(m).is_constructor() && matches(&p.method(m).name))
            .collect()
    }
}
