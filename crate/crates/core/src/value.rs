//! Abstract values and the type-compatibility predicates used by the rules.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;

use crate::ir::{InsnId, MethodId, Program, TypeId};

/// Names of platform types the rules refer to.
pub mod jdk {
    pub const OBJECT: &str = "java.lang.Object";
    pub const OBJECT_ARRAY: &str = "java.lang.Object[]";
    pub const STRING: &str = "java.lang.String";
    pub const CLASS: &str = "java.lang.Class";
    pub const VOID: &str = "void";
    pub const INT: &str = "int";
    pub const REFLECT_METHOD: &str = "java.lang.reflect.Method";
    pub const REFLECT_CONSTRUCTOR: &str = "java.lang.reflect.Constructor";
    pub const METHOD_HANDLE: &str = "java.lang.invoke.MethodHandle";
    pub const METHOD_HANDLES: &str = "java.lang.invoke.MethodHandles";
    pub const LOOKUP: &str = "java.lang.invoke.MethodHandles$Lookup";
    pub const METHOD_TYPE: &str = "java.lang.invoke.MethodType";
    pub const CALL_SITE: &str = "java.lang.invoke.CallSite";
    pub const CONSTANT_CALL_SITE: &str = "java.lang.invoke.ConstantCallSite";
    pub const MUTABLE_CALL_SITE: &str = "java.lang.invoke.MutableCallSite";
    pub const VOLATILE_CALL_SITE: &str = "java.lang.invoke.VolatileCallSite";
    pub const LAMBDA_METAFACTORY: &str = "java.lang.invoke.LambdaMetafactory";
    pub const INVOKE_PACKAGE: &str = "java.lang.invoke.";

    /// Primitive/wrapper pairs related by boxing conversion.
    pub const BOXING: [(&str, &str); 8] = [
        ("boolean", "java.lang.Boolean"),
        ("byte", "java.lang.Byte"),
        ("char", "java.lang.Character"),
        ("short", "java.lang.Short"),
        ("int", "java.lang.Integer"),
        ("long", "java.lang.Long"),
        ("float", "java.lang.Float"),
        ("double", "java.lang.Double"),
    ];
}

/// A return type and an ordered parameter list. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodType {
    pub ret: TypeId,
    pub params: Arc<[TypeId]>,
}

impl MethodType {
    pub fn new(ret: TypeId, params: impl Into<Arc<[TypeId]>>) -> Self {
        MethodType {
            ret,
            params: params.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// The analysis model of a method handle: a target method and the method
/// type the handle currently presents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodHandle {
    pub method: MethodId,
    pub mtype: MethodType,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbstractValue {
    /// Object allocated by an `alloc` instruction.
    Alloc { site: InsnId, ty: TypeId },
    /// Analysis-fabricated object of type `ty` keyed by an instruction:
    /// functional objects, constructor-reference results, vararg arrays.
    Mock { ty: TypeId, site: InsnId },
    /// Object allocated by invoking a constructor method handle.
    MockHandle { ty: TypeId, handle: MethodHandle },
    Handle(MethodHandle),
    MethodType(MethodType),
    /// Lookup object whose lookup class is the given type.
    Lookup(TypeId),
    /// Reified `Class` object.
    Class(TypeId),
    /// Reified `Method`/`Constructor` object.
    Method(MethodId),
    Str(Arc<str>),
    /// Any string not known to be a constant.
    TopString,
    Int(i64),
}

impl AbstractValue {
    pub fn handle(method: MethodId, mtype: MethodType) -> Self {
        AbstractValue::Handle(MethodHandle { method, mtype })
    }

    pub fn string(s: &str) -> Self {
        AbstractValue::Str(Arc::from(s))
    }

    pub fn as_handle(&self) -> Option<&MethodHandle> {
        match self {
            AbstractValue::Handle(h) => Some(h),
            _ => None,
        }
    }

    /// Runtime type of the value, when the fact base declares it.
    pub fn runtime_type(&self, program: &Program) -> Option<TypeId> {
        match self {
            AbstractValue::Alloc { ty, .. }
            | AbstractValue::Mock { ty, .. }
            | AbstractValue::MockHandle { ty, .. } => Some(*ty),
            AbstractValue::Handle(_) => program.type_id(jdk::METHOD_HANDLE),
            AbstractValue::MethodType(_) => program.type_id(jdk::METHOD_TYPE),
            AbstractValue::Lookup(_) => program.type_id(jdk::LOOKUP),
            AbstractValue::Class(_) => program.type_id(jdk::CLASS),
            AbstractValue::Method(m) => program.type_id(if program.method(*m).is_constructor() {
                jdk::REFLECT_CONSTRUCTOR
            } else {
                jdk::REFLECT_METHOD
            }),
            AbstractValue::Str(_) | AbstractValue::TopString => program.type_id(jdk::STRING),
            AbstractValue::Int(_) => program.type_id(jdk::INT),
        }
    }

    pub fn display<'a>(&'a self, program: &'a Program) -> impl fmt::Display + 'a {
        ValueDisplay {
            value: self,
            program,
        }
    }
}

struct ValueDisplay<'a> {
    value: &'a AbstractValue,
    program: &'a Program,
}

fn write_handle(f: &mut fmt::Formatter<'_>, p: &Program, h: &MethodHandle) -> fmt::Result {
    write!(f, "mh {}:{}", p.method(h.method).id, p.display_mtype(&h.mtype))
}

impl fmt::Display for ValueDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.program;
        match self.value {
            AbstractValue::Alloc { site, ty } => write!(f, "new {}@{}", p.ty(*ty).id, p.insn(*site).id),
            AbstractValue::Mock { ty, site } => write!(f, "mock {}@{}", p.ty(*ty).id, p.insn(*site).id),
            AbstractValue::MockHandle { ty, handle } => {
                write!(f, "mock {}@", p.ty(*ty).id)?;
                write_handle(f, p, handle)
            }
            AbstractValue::Handle(h) => write_handle(f, p, h),
            AbstractValue::MethodType(mt) => write!(f, "mt {}", p.display_mtype(mt)),
            AbstractValue::Lookup(t) => write!(f, "lookup {}", p.ty(*t).id),
            AbstractValue::Class(t) => write!(f, "class {}", p.ty(*t).id),
            AbstractValue::Method(m) => write!(f, "method {}", p.method(*m).id),
            AbstractValue::Str(s) => write!(f, "{s:?}"),
            AbstractValue::TopString => f.write_str("string ⊤"),
            AbstractValue::Int(n) => write!(f, "int {n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub(crate) u32);

impl ValueId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interning table: structurally equal values share one [`ValueId`].
#[derive(Clone, Debug, Default)]
pub struct ValueTable {
    values: IndexSet<AbstractValue>,
}

impl ValueTable {
    pub fn intern(&mut self, value: AbstractValue) -> ValueId {
        let (idx, _) = self.values.insert_full(value);
        ValueId(idx as u32)
    }

    pub fn get(&self, value: &AbstractValue) -> Option<ValueId> {
        self.values.get_index_of(value).map(|i| ValueId(i as u32))
    }

    pub fn value(&self, id: ValueId) -> &AbstractValue {
        &self.values[id.index()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `MethodMT(m)`: return type and declared parameters, receiver excluded.
pub fn method_mtype(program: &Program, m: MethodId) -> MethodType {
    let decl = program.method(m);
    MethodType::new(decl.return_type, decl.param_types.clone())
}

fn boxing_pair(program: &Program, a: TypeId, b: TypeId) -> bool {
    let (a, b) = (program.ty(a).id.as_str(), program.ty(b).id.as_str());
    jdk::BOXING
        .iter()
        .any(|&(prim, wrapper)| (a == prim && b == wrapper) || (a == wrapper && b == prim))
}

/// True when the types are equal, one is a subtype of the other, or they
/// form a primitive/wrapper boxing pair.
pub fn type_compat(program: &Program, t: TypeId, t2: TypeId) -> bool {
    t == t2 || program.is_subtype(t, t2) || program.is_subtype(t2, t) || boxing_pair(program, t, t2)
}

/// Same arity, and pairwise [`type_compat`] on parameters and return types.
pub fn as_type_compat(program: &Program, mt1: &MethodType, mt2: &MethodType) -> bool {
    mt1.arity() == mt2.arity()
        && type_compat(program, mt1.ret, mt2.ret)
        && mt1
            .params
            .iter()
            .zip(mt2.params.iter())
            .all(|(&a, &b)| type_compat(program, a, b))
}
