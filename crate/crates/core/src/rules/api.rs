//! Recognition of platform API calls, and other per-program site tables
//! computed once before solving.

use std::collections::HashMap;

use crate::ir::{Call, CallKind, InsnId, MethodId, Program, TypeKind, VarId};
use crate::value::jdk;

/// A call to a platform method with built-in semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Api {
    Lookup,
    LookupClass,
    Unreflect,
    UnreflectSpecial,
    UnreflectConstructor,
    FindVirtual,
    FindStatic,
    MethodType,
    AsType,
    Invoke,
    InvokeExact,
    CallSiteInit,
    SetTarget,
    GetTarget,
    ForName,
    GetMethod,
    GetDeclaredMethod,
    GetConstructor,
    GetDeclaredConstructor,
    /// Any other `java.lang.invoke` method.
    Unmodeled,
}

const CALL_SITES: [&str; 4] = [
    jdk::CALL_SITE,
    jdk::CONSTANT_CALL_SITE,
    jdk::MUTABLE_CALL_SITE,
    jdk::VOLATILE_CALL_SITE,
];

/// Classifies a call by its symbolic owner and name. Bare names are
/// recognized only on signature-polymorphic (`mhpoly`) calls.
pub fn classify(call: &Call) -> Option<Api> {
    let owner = call.callee.owner_name.as_deref();
    if owner.is_none() && call.kind != CallKind::MhPoly {
        return None;
    }
    let on = |o: &str| owner.is_none_or(|x| x == o);
    let on_call_site = owner.is_none_or(|x| CALL_SITES.contains(&x));
    let api = match call.callee.name.as_str() {
        "lookup" if on(jdk::METHOD_HANDLES) => Api::Lookup,
        "lookupClass" if on(jdk::LOOKUP) => Api::LookupClass,
        "unreflect" if on(jdk::LOOKUP) => Api::Unreflect,
        "unreflectSpecial" if on(jdk::LOOKUP) => Api::UnreflectSpecial,
        "unreflectConstructor" if on(jdk::LOOKUP) => Api::UnreflectConstructor,
        "findVirtual" if on(jdk::LOOKUP) => Api::FindVirtual,
        "findStatic" if on(jdk::LOOKUP) => Api::FindStatic,
        "methodType" if on(jdk::METHOD_TYPE) => Api::MethodType,
        "asType" if on(jdk::METHOD_HANDLE) => Api::AsType,
        "invoke" if on(jdk::METHOD_HANDLE) => Api::Invoke,
        "invokeExact" if on(jdk::METHOD_HANDLE) => Api::InvokeExact,
        "<init>" if owner.is_some() && on_call_site && owner != Some(jdk::CALL_SITE) => Api::CallSiteInit,
        "setTarget" if on_call_site => Api::SetTarget,
        "getTarget" if on_call_site => Api::GetTarget,
        "forName" if on(jdk::CLASS) => Api::ForName,
        "getMethod" if on(jdk::CLASS) => Api::GetMethod,
        "getDeclaredMethod" if on(jdk::CLASS) => Api::GetDeclaredMethod,
        "getConstructor" if on(jdk::CLASS) => Api::GetConstructor,
        "getDeclaredConstructor" if on(jdk::CLASS) => Api::GetDeclaredConstructor,
        _ => match owner {
            None => Api::Unmodeled,
            Some(o) if o.starts_with(jdk::INVOKE_PACKAGE) => Api::Unmodeled,
            Some(_) => return None,
        },
    };
    Some(api)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum MetafactoryKind {
    Standard,
    Alt,
}

/// Static per-program tables shared by the rules.
#[derive(Debug)]
pub struct Sites {
    api: Vec<Option<Api>>,
    return_owner: HashMap<VarId, MethodId>,
    metafactory: Vec<Option<MetafactoryKind>>,
    vararg_boot: Vec<bool>,
}

impl Sites {
    pub fn new(p: &Program) -> Self {
        let api = p
            .insns()
            .map(|(_, insn)| insn.as_call().and_then(classify))
            .collect();
        let mut return_owner = HashMap::new();
        let mut metafactory = Vec::with_capacity(p.method_count());
        let mut vararg_boot = Vec::with_capacity(p.method_count());
        for (m, decl) in p.methods() {
            if let Some(r) = decl.return_var {
                return_owner.insert(r, m);
            }
            let owner = &p.ty(decl.declaring_type).id;
            metafactory.push(match decl.name.as_str() {
                "metafactory" if owner == jdk::LAMBDA_METAFACTORY => Some(MetafactoryKind::Standard),
                "altMetafactory" if owner == jdk::LAMBDA_METAFACTORY => Some(MetafactoryKind::Alt),
                _ => None,
            });
            vararg_boot.push(
                decl.param_types.len() == 4 && p.ty(decl.param_types[3]).kind == TypeKind::Array,
            );
        }
        Sites {
            api,
            return_owner,
            metafactory,
            vararg_boot,
        }
    }

    pub fn api(&self, i: InsnId) -> Option<Api> {
        self.api[i.index()]
    }

    /// The method whose return variable is `v`.
    pub fn return_owner(&self, v: VarId) -> Option<MethodId> {
        self.return_owner.get(&v).copied()
    }

    pub(crate) fn metafactory(&self, m: MethodId) -> Option<MetafactoryKind> {
        self.metafactory[m.index()]
    }

    pub fn is_metafactory(&self, m: MethodId) -> bool {
        self.metafactory(m).is_some()
    }

    /// Declares exactly four parameters, the last an array.
    pub fn is_vararg_bootstrap(&self, m: MethodId) -> bool {
        self.vararg_boot[m.index()]
    }
}

/// `Owner.name(params)ret` or `name(params)ret` for diagnostics.
pub(crate) fn signature(p: &Program, call: &Call) -> String {
    let owner = call
        .callee
        .owner_name
        .as_deref()
        .map(|o| format!("{o}."))
        .unwrap_or_default();
    format!("{owner}{}{}", call.callee.name, p.display_mtype(&call.descriptor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{CalleeRef, MethodKind, ProgramBuilder};
    use crate::value::MethodType;

    fn call(kind: CallKind, owner: Option<&str>, name: &str) -> Call {
        Call {
            kind,
            base: None,
            callee: CalleeRef {
                owner: None,
                owner_name: owner.map(str::to_string),
                name: name.to_string(),
            },
            descriptor: MethodType::new(crate::ir::TypeId(0), Vec::new()),
            ret: None,
            args: Vec::new(),
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&call(CallKind::Static, Some(jdk::METHOD_HANDLES), "lookup")), Some(Api::Lookup));
        assert_eq!(classify(&call(CallKind::MhPoly, None, "invokeExact")), Some(Api::InvokeExact));
        assert_eq!(classify(&call(CallKind::Virtual, None, "invokeExact")), None);
        assert_eq!(
            classify(&call(CallKind::Special, Some(jdk::CONSTANT_CALL_SITE), "<init>")),
            Some(Api::CallSiteInit)
        );
        assert_eq!(classify(&call(CallKind::Virtual, Some(jdk::METHOD_HANDLE), "bindTo")), Some(Api::Unmodeled));
        assert_eq!(classify(&call(CallKind::Static, Some("A"), "lookup")), None);
    }

    #[test]
    fn vararg_and_metafactory_detection() {
        let mut b = ProgramBuilder::new();
        b.class(jdk::OBJECT, None, &[]).primitive("void").array(jdk::OBJECT_ARRAY);
        b.class(jdk::LAMBDA_METAFACTORY, Some(jdk::OBJECT), &[]);
        let o = jdk::OBJECT;
        b.method("LMF.alt", jdk::LAMBDA_METAFACTORY, "altMetafactory", o, &[o, o, o, jdk::OBJECT_ARRAY], MethodKind::Static);
        b.method("LMF.mf", jdk::LAMBDA_METAFACTORY, "metafactory", o, &[o, o, o, o, o, o], MethodKind::Static);
        let p = b.build().unwrap();
        let s = Sites::new(&p);
        let alt = p.method_id("LMF.alt").unwrap();
        let mf = p.method_id("LMF.mf").unwrap();
        assert!(s.is_vararg_bootstrap(alt) && !s.is_vararg_bootstrap(mf));
        assert_eq!(s.metafactory(alt), Some(MetafactoryKind::Alt));
        assert_eq!(s.metafactory(mf), Some(MetafactoryKind::Standard));
    }
}
