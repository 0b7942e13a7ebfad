//! Set-semantics relations with delta windows, and the store that holds
//! every analysis relation together with its join indexes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::ir::{FieldId, InsnId, MethodId, Program, TypeId, VarId};
use crate::value::{AbstractValue, ValueId, ValueTable};

/// An append-only set of tuples.
///
/// Tuples are kept in insertion order. `tuples[..stable]` is what rules see
/// during a round and `tuples[delta_start..stable]` is the part that was new
/// in the previous round. Tuples inserted while a round is being merged sit
/// past `stable` until the next [`Relation::advance`].
#[derive(Clone, Debug)]
pub struct Relation<T> {
    set: HashSet<T>,
    tuples: Vec<T>,
    delta_start: usize,
    stable: usize,
}

impl<T> Default for Relation<T> {
    fn default() -> Self {
        Relation {
            set: HashSet::new(),
            tuples: Vec::new(),
            delta_start: 0,
            stable: 0,
        }
    }
}

impl<T: Clone + Eq + Hash> Relation<T> {
    pub fn all(&self) -> &[T] {
        &self.tuples[..self.stable]
    }

    pub fn delta(&self) -> &[T] {
        &self.tuples[self.delta_start..self.stable]
    }

    pub fn contains(&self, t: &T) -> bool {
        self.set.contains(t)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    fn insert(&mut self, t: T) -> bool {
        if self.set.insert(t.clone()) {
            self.tuples.push(t);
            true
        } else {
            false
        }
    }

    /// Publishes pending tuples as the new delta. In naive mode the delta
    /// is the whole relation. Returns whether anything was pending.
    fn advance(&mut self, naive: bool) -> bool {
        let grew = self.tuples.len() > self.stable;
        self.delta_start = if naive { 0 } else { self.stable };
        self.stable = self.tuples.len();
        grew
    }
}

/// Call-graph edge label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Static,
    Virtual,
    Bootstrap,
    Mh,
    Indy,
    Lambda,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 6] = [
        EdgeKind::Static,
        EdgeKind::Virtual,
        EdgeKind::Bootstrap,
        EdgeKind::Mh,
        EdgeKind::Indy,
        EdgeKind::Lambda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Static => "static",
            EdgeKind::Virtual => "virtual",
            EdgeKind::Bootstrap => "bootstrap",
            EdgeKind::Mh => "mh",
            EdgeKind::Indy => "indy",
            EdgeKind::Lambda => "lambda",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Textual id of the instruction or method the diagnostic is about.
    pub site: String,
    pub message: String,
}

/// A value operand of an emitted fact: already interned, or to be interned
/// when the round is merged.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValRef {
    Id(ValueId),
    New(AbstractValue),
}

impl From<ValueId> for ValRef {
    fn from(v: ValueId) -> Self {
        ValRef::Id(v)
    }
}

impl From<AbstractValue> for ValRef {
    fn from(v: AbstractValue) -> Self {
        ValRef::New(v)
    }
}

/// A tuple proposed by a rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Fact {
    Reachable(MethodId),
    Vpt(VarId, ValRef),
    Ifpt(ValRef, FieldId, ValRef),
    Sfpt(FieldId, ValRef),
    Apt(ValRef, ValRef),
    Assign(VarId, VarId),
    Cge(InsnId, MethodId, EdgeKind),
    Cgeb(InsnId, MethodId),
    Mhcge(InsnId, MethodId, ValRef),
    IndyCallSite(ValueId, InsnId, TypeId),
    CallSiteContents(ValueId, ValueId, MethodId),
    MetafactoryInvoke(InsnId, TypeId),
    LambdaObject(ValRef, MethodId, InsnId),
    LambdaCaptured(InsnId, usize, ValueId),
    CalledInstanceImpl(InsnId, MethodId, ValueId),
    Shift(ValueId, MethodId, u8, u8),
    LambdaCge(InsnId, MethodId, ValueId),
    Unmodeled(InsnId, Arc<str>),
    Diagnostic(Diagnostic),
}

fn push<K: Eq + Hash, V>(map: &mut HashMap<K, Vec<V>>, k: K, v: V) {
    map.entry(k).or_default().push(v);
}

fn get<'a, K: Eq + Hash, V>(map: &'a HashMap<K, Vec<V>>, k: &K) -> &'a [V] {
    map.get(k).map(Vec::as_slice).unwrap_or(&[])
}

/// Every analysis relation, plus the value intern table.
///
/// Indexes are updated as tuples are merged, so during a round they cover
/// exactly the tuples visible through [`Relation::all`].
#[derive(Clone, Debug, Default)]
pub struct Store {
    pub(crate) values: ValueTable,
    pub(crate) reachable: Relation<MethodId>,
    pub(crate) vpt: Relation<(VarId, ValueId)>,
    pub(crate) ifpt: Relation<(ValueId, FieldId, ValueId)>,
    pub(crate) sfpt: Relation<(FieldId, ValueId)>,
    pub(crate) apt: Relation<(ValueId, ValueId)>,
    pub(crate) assign: Relation<(VarId, VarId)>,
    pub(crate) cge: Relation<(InsnId, MethodId, EdgeKind)>,
    pub(crate) cgeb: Relation<(InsnId, MethodId)>,
    pub(crate) mhcge: Relation<(InsnId, MethodId, ValueId)>,
    pub(crate) indy_call_site: Relation<(ValueId, InsnId, TypeId)>,
    pub(crate) call_site_contents: Relation<(ValueId, ValueId, MethodId)>,
    pub(crate) metafactory_invoke: Relation<(InsnId, TypeId)>,
    pub(crate) lambda_object: Relation<(ValueId, MethodId, InsnId)>,
    pub(crate) lambda_captured: Relation<(InsnId, usize, ValueId)>,
    pub(crate) called_instance_impl: Relation<(InsnId, MethodId, ValueId)>,
    pub(crate) shift: Relation<(ValueId, MethodId, u8, u8)>,
    pub(crate) lambda_cge: Relation<(InsnId, MethodId, ValueId)>,
    pub(crate) unmodeled: Relation<(InsnId, Arc<str>)>,
    pub(crate) diagnostics: Relation<Diagnostic>,

    vpt_by_var: HashMap<VarId, Vec<ValueId>>,
    vpt_by_val: HashMap<ValueId, Vec<VarId>>,
    ifpt_by_base: HashMap<(ValueId, FieldId), Vec<ValueId>>,
    sfpt_by_field: HashMap<FieldId, Vec<ValueId>>,
    apt_by_base: HashMap<ValueId, Vec<ValueId>>,
    assign_by_from: HashMap<VarId, Vec<VarId>>,
    cgeb_by_boot: HashMap<MethodId, Vec<InsnId>>,
    call_site_by_value: HashMap<ValueId, Vec<(InsnId, TypeId)>>,
    lambda_by_value: HashMap<ValueId, Vec<(MethodId, InsnId)>>,
    lambda_by_site: HashMap<InsnId, Vec<(ValueId, MethodId)>>,
    captured_by_site: HashMap<InsnId, Vec<(usize, ValueId)>>,
    shift_by_pair: HashMap<(ValueId, MethodId), Vec<(u8, u8)>>,
    lambda_cge_by_pair: HashMap<(ValueId, MethodId), Vec<InsnId>>,
}

impl Store {
    pub fn values(&self) -> &ValueTable {
        &self.values
    }

    pub fn value(&self, id: ValueId) -> &AbstractValue {
        self.values.value(id)
    }

    pub fn reachable(&self) -> &Relation<MethodId> {
        &self.reachable
    }

    pub fn vpt(&self) -> &Relation<(VarId, ValueId)> {
        &self.vpt
    }

    pub fn ifpt(&self) -> &Relation<(ValueId, FieldId, ValueId)> {
        &self.ifpt
    }

    pub fn apt(&self) -> &Relation<(ValueId, ValueId)> {
        &self.apt
    }

    pub fn cge(&self) -> &Relation<(InsnId, MethodId, EdgeKind)> {
        &self.cge
    }

    pub fn cgeb(&self) -> &Relation<(InsnId, MethodId)> {
        &self.cgeb
    }

    pub fn mhcge(&self) -> &Relation<(InsnId, MethodId, ValueId)> {
        &self.mhcge
    }

    pub fn indy_call_site(&self) -> &Relation<(ValueId, InsnId, TypeId)> {
        &self.indy_call_site
    }

    pub fn call_site_contents(&self) -> &Relation<(ValueId, ValueId, MethodId)> {
        &self.call_site_contents
    }

    pub fn lambda_object(&self) -> &Relation<(ValueId, MethodId, InsnId)> {
        &self.lambda_object
    }

    pub fn lambda_captured(&self) -> &Relation<(InsnId, usize, ValueId)> {
        &self.lambda_captured
    }

    pub fn shift(&self) -> &Relation<(ValueId, MethodId, u8, u8)> {
        &self.shift
    }

    pub fn lambda_cge(&self) -> &Relation<(InsnId, MethodId, ValueId)> {
        &self.lambda_cge
    }

    pub fn diagnostics(&self) -> &Relation<Diagnostic> {
        &self.diagnostics
    }

    pub fn is_reachable(&self, m: MethodId) -> bool {
        self.reachable.contains(&m)
    }

    pub fn points_to(&self, v: VarId) -> &[ValueId] {
        get(&self.vpt_by_var, &v)
    }

    pub(crate) fn pointed_by(&self, o: ValueId) -> &[VarId] {
        get(&self.vpt_by_val, &o)
    }

    pub(crate) fn field(&self, base: ValueId, f: FieldId) -> &[ValueId] {
        get(&self.ifpt_by_base, &(base, f))
    }

    pub(crate) fn static_field(&self, f: FieldId) -> &[ValueId] {
        get(&self.sfpt_by_field, &f)
    }

    pub(crate) fn array(&self, base: ValueId) -> &[ValueId] {
        get(&self.apt_by_base, &base)
    }

    pub(crate) fn assigned_from(&self, v: VarId) -> &[VarId] {
        get(&self.assign_by_from, &v)
    }

    pub(crate) fn bootstrapped_by(&self, bm: MethodId) -> &[InsnId] {
        get(&self.cgeb_by_boot, &bm)
    }

    pub(crate) fn call_sites_of(&self, c: ValueId) -> &[(InsnId, TypeId)] {
        get(&self.call_site_by_value, &c)
    }

    pub(crate) fn lambdas_of(&self, v: ValueId) -> &[(MethodId, InsnId)] {
        get(&self.lambda_by_value, &v)
    }

    pub(crate) fn lambdas_at(&self, i: InsnId) -> &[(ValueId, MethodId)] {
        get(&self.lambda_by_site, &i)
    }

    pub(crate) fn captured_at(&self, i: InsnId) -> &[(usize, ValueId)] {
        get(&self.captured_by_site, &i)
    }

    pub(crate) fn shifts_of(&self, lambda: ValueId, m: MethodId) -> &[(u8, u8)] {
        get(&self.shift_by_pair, &(lambda, m))
    }

    pub(crate) fn lambda_calls_of(&self, lambda: ValueId, m: MethodId) -> &[InsnId] {
        get(&self.lambda_cge_by_pair, &(lambda, m))
    }

    fn resolve(&mut self, v: ValRef) -> ValueId {
        match v {
            ValRef::Id(id) => id,
            ValRef::New(value) => self.values.intern(value),
        }
    }

    /// Inserts one fact, updating indexes. Returns whether it was new.
    pub(crate) fn merge(&mut self, fact: Fact) -> bool {
        match fact {
            Fact::Reachable(m) => self.reachable.insert(m),
            Fact::Vpt(v, o) => {
                let o = self.resolve(o);
                let new = self.vpt.insert((v, o));
                if new {
                    push(&mut self.vpt_by_var, v, o);
                    push(&mut self.vpt_by_val, o, v);
                }
                new
            }
            Fact::Ifpt(b, f, o) => {
                let (b, o) = (self.resolve(b), self.resolve(o));
                let new = self.ifpt.insert((b, f, o));
                if new {
                    push(&mut self.ifpt_by_base, (b, f), o);
                }
                new
            }
            Fact::Sfpt(f, o) => {
                let o = self.resolve(o);
                let new = self.sfpt.insert((f, o));
                if new {
                    push(&mut self.sfpt_by_field, f, o);
                }
                new
            }
            Fact::Apt(a, o) => {
                let (a, o) = (self.resolve(a), self.resolve(o));
                let new = self.apt.insert((a, o));
                if new {
                    push(&mut self.apt_by_base, a, o);
                }
                new
            }
            Fact::Assign(from, to) => {
                let new = self.assign.insert((from, to));
                if new {
                    push(&mut self.assign_by_from, from, to);
                }
                new
            }
            Fact::Cge(i, m, k) => self.cge.insert((i, m, k)),
            Fact::Cgeb(i, m) => {
                let new = self.cgeb.insert((i, m));
                if new {
                    push(&mut self.cgeb_by_boot, m, i);
                }
                new
            }
            Fact::Mhcge(i, m, h) => {
                let h = self.resolve(h);
                self.mhcge.insert((i, m, h))
            }
            Fact::IndyCallSite(c, i, t) => {
                let new = self.indy_call_site.insert((c, i, t));
                if new {
                    push(&mut self.call_site_by_value, c, (i, t));
                }
                new
            }
            Fact::CallSiteContents(c, h, m) => self.call_site_contents.insert((c, h, m)),
            Fact::MetafactoryInvoke(i, t) => self.metafactory_invoke.insert((i, t)),
            Fact::LambdaObject(l, m, i) => {
                let l = self.resolve(l);
                let new = self.lambda_object.insert((l, m, i));
                if new {
                    push(&mut self.lambda_by_value, l, (m, i));
                    push(&mut self.lambda_by_site, i, (l, m));
                }
                new
            }
            Fact::LambdaCaptured(i, n, o) => {
                let new = self.lambda_captured.insert((i, n, o));
                if new {
                    push(&mut self.captured_by_site, i, (n, o));
                }
                new
            }
            Fact::CalledInstanceImpl(i, m, l) => self.called_instance_impl.insert((i, m, l)),
            Fact::Shift(l, m, k, n) => {
                let new = self.shift.insert((l, m, k, n));
                if new {
                    push(&mut self.shift_by_pair, (l, m), (k, n));
                }
                new
            }
            Fact::LambdaCge(j, m, l) => {
                let new = self.lambda_cge.insert((j, m, l));
                if new {
                    push(&mut self.lambda_cge_by_pair, (l, m), j);
                }
                new
            }
            Fact::Unmodeled(i, sig) => self.unmodeled.insert((i, sig)),
            Fact::Diagnostic(d) => self.diagnostics.insert(d),
        }
    }

    /// Publishes pending tuples. Returns the names of relations that grew.
    pub(crate) fn advance(&mut self, naive: bool) -> Vec<&'static str> {
        let mut grew = Vec::new();
        macro_rules! adv {
            ($($field:ident => $name:literal),* $(,)?) => {$(
                if self.$field.advance(naive) {
                    grew.push($name);
                }
            )*};
        }
        adv!(
            reachable => "Reachable",
            vpt => "VPT",
            ifpt => "IFPT",
            sfpt => "SFPT",
            apt => "APT",
            assign => "Assign",
            cge => "CGE",
            cgeb => "CGEB",
            mhcge => "MHCGE",
            indy_call_site => "InvokedynamicCallSite",
            call_site_contents => "CallSiteContents",
            metafactory_invoke => "LambdaMetafactoryInvoke",
            lambda_object => "LambdaObject",
            lambda_captured => "LambdaCaptured",
            called_instance_impl => "CalledInstanceImplMethod",
            shift => "ParamsReceiverShiftRight",
            lambda_cge => "LambdaCGE",
            unmodeled => "UnmodeledInvokeAPI",
            diagnostics => "Diagnostic",
        );
        grew
    }

    /// All call-graph edges with their labels. Method-handle edges are
    /// labelled `indy` at invokedynamic instructions and `mh` elsewhere.
    pub fn call_graph(&self, program: &Program) -> BTreeSet<(InsnId, MethodId, EdgeKind)> {
        let mut edges: BTreeSet<_> = self.cge.all().iter().copied().collect();
        edges.extend(self.cgeb.all().iter().map(|&(i, m)| (i, m, EdgeKind::Bootstrap)));
        edges.extend(self.mhcge.all().iter().map(|&(i, m, _)| {
            let kind = if program.insn(i).as_indy().is_some() {
                EdgeKind::Indy
            } else {
                EdgeKind::Mh
            };
            (i, m, kind)
        }));
        edges.extend(self.lambda_cge.all().iter().map(|&(j, m, _)| (j, m, EdgeKind::Lambda)));
        edges
    }

    /// Decodes every relation into sorted rows of strings.
    pub fn dump(&self, program: &Program) -> Dump {
        let p = program;
        let val = |v: ValueId| self.value(v).display(p).to_string();
        let m = |m: MethodId| p.method(m).id.clone();
        let i = |i: InsnId| p.insn(i).id.clone();
        let var = |v: VarId| p.var(v).id.clone();
        let ty = |t: TypeId| p.ty(t).id.clone();
        let fld = |f: FieldId| p.field_name(f).to_string();
        let dyn_name = |i: InsnId| p.insn(i).as_indy().map(|d| d.name.clone()).unwrap_or_default();

        let mut d = Dump::new();
        macro_rules! rel {
            ($name:literal, $rel:expr, |$t:pat_param| $row:expr) => {
                d.insert($name, $rel.all().iter().map(|$t| $row).collect());
            };
        }
        rel!("Reachable", self.reachable, |&x| vec![m(x)]);
        rel!("VPT", self.vpt, |&(v, o)| vec![var(v), val(o)]);
        rel!("IFPT", self.ifpt, |&(b, f, o)| vec![val(b), fld(f), val(o)]);
        rel!("SFPT", self.sfpt, |&(f, o)| vec![fld(f), val(o)]);
        rel!("APT", self.apt, |&(a, o)| vec![val(a), val(o)]);
        rel!("Assign", self.assign, |&(a, b)| vec![var(a), var(b)]);
        rel!("CGE", self.cge, |&(x, y, k)| vec![i(x), m(y), k.to_string()]);
        rel!("CGEB", self.cgeb, |&(x, y)| vec![i(x), m(y)]);
        rel!("MHCGE", self.mhcge, |&(x, y, h)| vec![i(x), m(y), val(h)]);
        rel!("InvokedynamicCallSite", self.indy_call_site, |&(c, x, t)| vec![val(c), i(x), ty(t)]);
        rel!("CallSiteContents", self.call_site_contents, |&(c, h, y)| vec![val(c), val(h), m(y)]);
        rel!("LambdaMetafactoryInvoke", self.metafactory_invoke, |&(x, t)| vec![i(x), dyn_name(x), ty(t)]);
        rel!("LambdaObject", self.lambda_object, |&(l, y, x)| vec![val(l), m(y), dyn_name(x), i(x)]);
        rel!("LambdaCaptured", self.lambda_captured, |&(x, n, o)| vec![i(x), n.to_string(), val(o)]);
        rel!("CalledInstanceImplMethod", self.called_instance_impl, |&(x, y, l)| vec![i(x), m(y), val(l)]);
        rel!("ParamsReceiverShiftRight", self.shift, |&(l, y, k, n)| vec![val(l), m(y), k.to_string(), n.to_string()]);
        rel!("LambdaCGE", self.lambda_cge, |&(x, y, l)| vec![i(x), m(y), val(l)]);
        rel!("UnmodeledInvokeAPI", self.unmodeled, |(x, sig)| vec![i(*x), sig.to_string()]);
        rel!("Diagnostic", self.diagnostics, |dg| vec![
            dg.severity.as_str().to_string(),
            dg.site.clone(),
            dg.message.clone()
        ]);
        d.insert(
            "CallGraphEdge",
            self.call_graph(p)
                .into_iter()
                .map(|(x, y, k)| vec![i(x), m(y), k.to_string()])
                .collect(),
        );
        d
    }
}

/// Decoded relation contents keyed by relation name.
pub type Dump = BTreeMap<&'static str, BTreeSet<Vec<String>>>;

/// Names accepted by [`Store::dump`] consumers, in dump order.
pub const RELATION_NAMES: &[&str] = &[
    "APT",
    "Assign",
    "CGE",
    "CGEB",
    "CallGraphEdge",
    "CallSiteContents",
    "CalledInstanceImplMethod",
    "Diagnostic",
    "IFPT",
    "InvokedynamicCallSite",
    "LambdaCGE",
    "LambdaCaptured",
    "LambdaMetafactoryInvoke",
    "LambdaObject",
    "MHCGE",
    "ParamsReceiverShiftRight",
    "Reachable",
    "SFPT",
    "UnmodeledInvokeAPI",
    "VPT",
];
