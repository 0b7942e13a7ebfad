//! Intermediate representation: types, methods, variables and instructions.
//!
//! A [`Program`] is an immutable, validated fact database. All tables are
//! indexed by dense numeric ids that follow the lexicographic order of the
//! textual ids, so iteration over any table is deterministic.

mod builder;
mod facts;
mod load;

use std::collections::HashMap;
use std::fmt;

pub use builder::ProgramBuilder;
pub use facts::{FactRow, FactSet, FACT_FILES};
pub use load::LoadError;

use crate::value::MethodType;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Declared type.
    TypeId
);
id_type!(
    /// Declared method.
    MethodId
);
id_type!(
    /// Instruction.
    InsnId
);
id_type!(
    /// Method-scoped local variable.
    VarId
);
id_type!(
    /// Field identifier. Fields are keyed by name only.
    FieldId
);

/// Name of the pseudo-field that holds the target handle of a call-site object.
pub const CALL_SITE_TARGET_FIELD: &str = "java.lang.invoke.CallSite.target";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeKind {
    Class,
    Interface,
    Array,
    Primitive,
}

impl TypeKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "class" => TypeKind::Class,
            "interface" => TypeKind::Interface,
            "array" => TypeKind::Array,
            "primitive" => TypeKind::Primitive,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TypeKind::Class => "class",
            TypeKind::Interface => "interface",
            TypeKind::Array => "array",
            TypeKind::Primitive => "primitive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TypeDecl {
    pub id: String,
    pub kind: TypeKind,
    pub superclass: Option<TypeId>,
    pub interfaces: Vec<TypeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Static,
    Constructor,
    Instance,
}

impl MethodKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "static" => MethodKind::Static,
            "constructor" => MethodKind::Constructor,
            "instance" => MethodKind::Instance,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Static => "static",
            MethodKind::Constructor => "constructor",
            MethodKind::Instance => "instance",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MethodDecl {
    pub id: String,
    pub declaring_type: TypeId,
    pub name: String,
    pub return_type: TypeId,
    pub param_types: Vec<TypeId>,
    pub kind: MethodKind,
    /// Either empty (no body in the fact base) or one variable per parameter.
    pub formals: Vec<VarId>,
    pub this_var: Option<VarId>,
    pub return_var: Option<VarId>,
}

impl MethodDecl {
    pub fn is_static(&self) -> bool {
        self.kind == MethodKind::Static
    }

    pub fn is_constructor(&self) -> bool {
        self.kind == MethodKind::Constructor
    }

    pub fn formal(&self, n: usize) -> Option<VarId> {
        self.formals.get(n).copied()
    }
}

#[derive(Clone, Debug)]
pub struct VarDecl {
    pub id: String,
    pub method: MethodId,
}

/// Load-time constant, as found in constant-pool style operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Str(String),
    Class(TypeId),
    Handle(MethodId),
    MethodType(MethodType),
    Int(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CallKind {
    Static,
    Special,
    Virtual,
    Interface,
    /// Signature-polymorphic call on a method handle (or another
    /// `java.lang.invoke` API method).
    MhPoly,
}

impl CallKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "static" => CallKind::Static,
            "special" => CallKind::Special,
            "virtual" => CallKind::Virtual,
            "interface" => CallKind::Interface,
            "mhpoly" => CallKind::MhPoly,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CallKind::Static => "static",
            CallKind::Special => "special",
            CallKind::Virtual => "virtual",
            CallKind::Interface => "interface",
            CallKind::MhPoly => "mhpoly",
        }
    }

    pub fn is_dynamic_dispatch(self) -> bool {
        matches!(self, CallKind::Virtual | CallKind::Interface)
    }
}

/// Symbolic callee reference of a call instruction: `Owner.name` or a bare
/// `name`. The owner need not declare the method (library methods are
/// referenced symbolically).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalleeRef {
    pub owner: Option<TypeId>,
    pub owner_name: Option<String>,
    pub name: String,
}

#[derive(Clone, Debug)]
pub struct Call {
    pub kind: CallKind,
    pub base: Option<VarId>,
    pub callee: CalleeRef,
    pub descriptor: MethodType,
    pub ret: Option<VarId>,
    pub args: Vec<VarId>,
}

#[derive(Clone, Debug)]
pub struct InvokeDynamic {
    pub bootstrap: MethodId,
    pub name: String,
    pub mtype: MethodType,
    pub ret: Option<VarId>,
    pub args: Vec<VarId>,
    pub boot_args: Vec<Constant>,
}

#[derive(Clone, Debug)]
pub enum Op {
    Alloc { to: VarId, ty: TypeId },
    Move { to: VarId, from: VarId },
    /// `base` is `None` for static fields.
    LoadField { to: VarId, base: Option<VarId>, field: FieldId },
    StoreField { base: Option<VarId>, field: FieldId, from: VarId },
    LoadArray { to: VarId, base: VarId },
    StoreArray { base: VarId, from: VarId },
    Const { to: VarId, value: Constant },
    Call(Call),
    InvokeDynamic(InvokeDynamic),
}

#[derive(Clone, Debug)]
pub struct Insn {
    pub id: String,
    pub method: MethodId,
    pub op: Op,
}

impl Insn {
    pub fn as_call(&self) -> Option<&Call> {
        match &self.op {
            Op::Call(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_indy(&self) -> Option<&InvokeDynamic> {
        match &self.op {
            Op::InvokeDynamic(d) => Some(d),
            _ => None,
        }
    }

    /// Actual parameters of a call or invokedynamic instruction.
    pub fn actuals(&self) -> &[VarId] {
        match &self.op {
            Op::Call(c) => &c.args,
            Op::InvokeDynamic(d) => &d.args,
            _ => &[],
        }
    }

    /// The variable assigned the result of a call or invokedynamic instruction.
    pub fn assign_ret(&self) -> Option<VarId> {
        match &self.op {
            Op::Call(c) => c.ret,
            Op::InvokeDynamic(d) => d.ret,
            _ => None,
        }
    }
}

/// How an instruction reads a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UseRole {
    MoveFrom,
    StoreBase,
    StoreValue,
    LoadBase,
    ArrayStoreBase,
    ArrayStoreValue,
    ArrayLoadBase,
    CallBase,
    CallArg(usize),
    IndyArg(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarUse {
    pub insn: InsnId,
    pub role: UseRole,
}

/// Ground truth for the reachability checker.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expectations {
    pub reachable: Vec<MethodId>,
    pub unreachable: Vec<MethodId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LookupMode {
    /// Searches the type, then its superclass chain, then superinterfaces.
    /// Static methods and constructors never match.
    Virtual,
    /// Matches only static methods declared directly in the type.
    StaticOnly,
}

#[derive(Debug)]
pub struct Program {
    pub(crate) types: Vec<TypeDecl>,
    pub(crate) type_ids: HashMap<String, TypeId>,
    pub(crate) methods: Vec<MethodDecl>,
    pub(crate) method_ids: HashMap<String, MethodId>,
    pub(crate) vars: Vec<VarDecl>,
    pub(crate) var_ids: HashMap<String, VarId>,
    pub(crate) fields: Vec<String>,
    pub(crate) field_ids: HashMap<String, FieldId>,
    pub(crate) insns: Vec<Insn>,
    pub(crate) insn_ids: HashMap<String, InsnId>,
    pub(crate) entry_points: Vec<MethodId>,
    pub(crate) expectations: Option<Expectations>,
    // derived
    pub(crate) supertypes: Vec<Vec<TypeId>>,
    pub(crate) methods_by_type: Vec<Vec<MethodId>>,
    pub(crate) insns_by_method: Vec<Vec<InsnId>>,
    pub(crate) var_uses: Vec<Vec<VarUse>>,
    /// Static-field loads, by field.
    pub(crate) static_loads: Vec<Vec<InsnId>>,
    pub(crate) target_field: FieldId,
}

impl Program {
    pub fn types(&self) -> impl ExactSizeIterator<Item = (TypeId, &TypeDecl)> {
        self.types
            .iter()
            .enumerate()
            .map(|(i, t)| (TypeId(i as u32), t))
    }

    pub fn methods(&self) -> impl ExactSizeIterator<Item = (MethodId, &MethodDecl)> {
        self.methods
            .iter()
            .enumerate()
            .map(|(i, m)| (MethodId(i as u32), m))
    }

    pub fn insns(&self) -> impl ExactSizeIterator<Item = (InsnId, &Insn)> {
        self.insns
            .iter()
            .enumerate()
            .map(|(i, n)| (InsnId(i as u32), n))
    }

    pub fn vars(&self) -> impl ExactSizeIterator<Item = (VarId, &VarDecl)> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, v)| (VarId(i as u32), v))
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn method_count(&self) -> usize {
        self.methods.len()
    }

    pub fn insn_count(&self) -> usize {
        self.insns.len()
    }

    pub fn ty(&self, id: TypeId) -> &TypeDecl {
        &self.types[id.index()]
    }

    pub fn method(&self, id: MethodId) -> &MethodDecl {
        &self.methods[id.index()]
    }

    pub fn insn(&self, id: InsnId) -> &Insn {
        &self.insns[id.index()]
    }

    pub fn var(&self, id: VarId) -> &VarDecl {
        &self.vars[id.index()]
    }

    pub fn field_name(&self, id: FieldId) -> &str {
        &self.fields[id.index()]
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_ids.get(name).copied()
    }

    pub fn method_id(&self, name: &str) -> Option<MethodId> {
        self.method_ids.get(name).copied()
    }

    pub fn insn_id(&self, name: &str) -> Option<InsnId> {
        self.insn_ids.get(name).copied()
    }

    /// Looks up a variable by its scoped id `<methodId>/<name>`.
    pub fn var_id(&self, scoped: &str) -> Option<VarId> {
        self.var_ids.get(scoped).copied()
    }

    pub fn field_id(&self, name: &str) -> Option<FieldId> {
        self.field_ids.get(name).copied()
    }

    pub fn call_site_target_field(&self) -> FieldId {
        self.target_field
    }

    pub fn entry_points(&self) -> &[MethodId] {
        &self.entry_points
    }

    pub fn expectations(&self) -> Option<&Expectations> {
        self.expectations.as_ref()
    }

    pub fn insns_of(&self, m: MethodId) -> &[InsnId] {
        &self.insns_by_method[m.index()]
    }

    pub fn methods_of(&self, t: TypeId) -> &[MethodId] {
        &self.methods_by_type[t.index()]
    }

    pub fn uses_of(&self, v: VarId) -> &[VarUse] {
        &self.var_uses[v.index()]
    }

    /// Loads of the static field `f`.
    pub fn static_loads_of(&self, f: FieldId) -> &[InsnId] {
        &self.static_loads[f.index()]
    }

    pub fn field_count(&self) -> usize {
        self.fields.len()
    }

    /// Reflexive-transitive supertypes of `t`, sorted by id.
    pub fn supertypes(&self, t: TypeId) -> &[TypeId] {
        &self.supertypes[t.index()]
    }

    pub fn is_subtype(&self, sub: TypeId, sup: TypeId) -> bool {
        self.supertypes[sub.index()].binary_search(&sup).is_ok()
    }

    /// Declaring type of the method enclosing `insn`.
    pub fn caller_type(&self, insn: InsnId) -> TypeId {
        self.method(self.insn(insn).method).declaring_type
    }

    /// Superclass chain starting at (and including) `t`, then every
    /// superinterface reachable from that chain, breadth-first.
    fn resolution_order(&self, t: TypeId) -> Vec<TypeId> {
        let mut order = Vec::new();
        let mut cur = Some(t);
        while let Some(c) = cur {
            order.push(c);
            cur = self.ty(c).superclass;
        }
        let mut queue: std::collections::VecDeque<TypeId> = order
            .iter()
            .flat_map(|&c| self.ty(c).interfaces.iter().copied())
            .collect();
        while let Some(i) = queue.pop_front() {
            if order.contains(&i) {
                continue;
            }
            order.push(i);
            queue.extend(self.ty(i).interfaces.iter().copied());
        }
        order
    }

    /// Resolves a method by name and exact method type on `t`.
    pub fn method_lookup(
        &self,
        t: TypeId,
        name: &str,
        mt: &MethodType,
        mode: LookupMode,
    ) -> Option<MethodId> {
        let matches = |m: MethodId| {
            let decl = self.method(m);
            decl.name == name && crate::value::method_mtype(self, m) == *mt
        };
        match mode {
            LookupMode::StaticOnly => self
                .methods_of(t)
                .iter()
                .copied()
                .find(|&m| self.method(m).is_static() && matches(m)),
            LookupMode::Virtual => self.resolution_order(t).into_iter().find_map(|c| {
                self.methods_of(c)
                    .iter()
                    .copied()
                    .find(|&m| self.method(m).kind == MethodKind::Instance && matches(m))
            }),
        }
    }

    /// Resolves the symbolic target of a static or special call: any method
    /// kind, found on the owner or its supertypes.
    pub fn resolve_direct(&self, owner: TypeId, name: &str, mt: &MethodType) -> Option<MethodId> {
        self.resolution_order(owner).into_iter().find_map(|c| {
            self.methods_of(c).iter().copied().find(|&m| {
                self.method(m).name == name && crate::value::method_mtype(self, m) == *mt
            })
        })
    }

    /// Renders a method type as a literal, e.g. `(A,int)void`.
    pub fn display_mtype<'a>(&'a self, mt: &'a MethodType) -> impl fmt::Display + 'a {
        MethodTypeDisplay { program: self, mt }
    }
}

struct MethodTypeDisplay<'a> {
    program: &'a Program,
    mt: &'a MethodType,
}

impl fmt::Display for MethodTypeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.mt.params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&self.program.ty(*p).id)?;
        }
        write!(f, "){}", self.program.ty(self.mt.ret).id)
    }
}

/// Splits a method-type literal `(T1,T2)R` into parameter and return names.
pub fn parse_method_type_literal(s: &str) -> Option<(Vec<&str>, &str)> {
    let rest = s.strip_prefix('(')?;
    let close = rest.find(')')?;
    let params = &rest[..close];
    let ret = &rest[close + 1..];
    if ret.is_empty() || ret.contains(['(', ')', ',']) {
        return None;
    }
    let params = if params.is_empty() {
        Vec::new()
    } else {
        params.split(',').collect::<Vec<_>>()
    };
    if params.iter().any(|p| p.is_empty()) {
        return None;
    }
    Some((params, ret))
}
