use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::facts::{FactRow, FactSet};
use super::*;
use crate::value::MethodType;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing fact file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Invalid {
        file: String,
        line: usize,
        message: String,
    },
}

type Result<T> = std::result::Result<T, LoadError>;

fn invalid(relation: &str, row: &FactRow, message: impl Into<String>) -> LoadError {
    LoadError::Invalid {
        file: format!("{relation}.facts"),
        line: row.line,
        message: message.into(),
    }
}

fn opt(s: &str) -> Option<&str> {
    (s != "-").then_some(s)
}

fn list(s: &str) -> Vec<&str> {
    match opt(s) {
        None => Vec::new(),
        Some(s) => s.split(',').collect(),
    }
}

/// Statement relations and the column holding the enclosing method.
const STATEMENT_FILES: &[&str] = &[
    "Alloc",
    "Move",
    "StoreField",
    "LoadField",
    "StoreArray",
    "LoadArray",
    "Const",
    "Call",
    "InvokeDynamic",
];

impl Program {
    /// Loads and validates a facts directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Program> {
        Program::from_facts(&FactSet::read_dir(dir)?)
    }

    /// Validates an in-memory fact set.
    pub fn from_facts(facts: &FactSet) -> Result<Program> {
        for &(name, arity, required) in super::FACT_FILES {
            if required && !facts.has(name) {
                return Err(LoadError::MissingFile(PathBuf::from(format!("{name}.facts"))));
            }
            if let Some(row) = facts.rows(name).iter().find(|r| r.fields.len() != arity) {
                return Err(invalid(name, row, format!("expected {arity} fields")));
            }
        }
        Loader::new(facts).run()
    }
}

struct Loader<'f> {
    facts: &'f FactSet,
    type_ids: HashMap<String, TypeId>,
    method_ids: HashMap<String, MethodId>,
    var_ids: HashMap<String, VarId>,
    field_ids: HashMap<String, FieldId>,
    insn_ids: HashMap<String, InsnId>,
    /// insn id -> enclosing method id (textual), for scoping actual-parameter variables.
    insn_method: HashMap<String, String>,
}

fn assign_ids<I: From<u32>>(names: impl IntoIterator<Item = String>) -> (Vec<String>, HashMap<String, I>) {
    let sorted: BTreeSet<String> = names.into_iter().collect();
    let ids = sorted
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), I::from(i as u32)))
        .collect();
    (sorted.into_iter().collect(), ids)
}

macro_rules! from_u32 {
    ($($t:ident),*) => {$(
        impl From<u32> for $t {
            fn from(v: u32) -> Self { $t(v) }
        }
    )*};
}
from_u32!(TypeId, MethodId, VarId, FieldId, InsnId);

impl<'f> Loader<'f> {
    fn new(facts: &'f FactSet) -> Self {
        Loader {
            facts,
            type_ids: HashMap::new(),
            method_ids: HashMap::new(),
            var_ids: HashMap::new(),
            field_ids: HashMap::new(),
            insn_ids: HashMap::new(),
            insn_method: HashMap::new(),
        }
    }

    fn rows(&self, relation: &str) -> &'f [FactRow] {
        self.facts.rows(relation)
    }

    fn ty(&self, rel: &str, row: &FactRow, name: &str) -> Result<TypeId> {
        self.type_ids
            .get(name)
            .copied()
            .ok_or_else(|| invalid(rel, row, format!("undeclared type `{name}`")))
    }

    fn method(&self, rel: &str, row: &FactRow, name: &str) -> Result<MethodId> {
        self.method_ids
            .get(name)
            .copied()
            .ok_or_else(|| invalid(rel, row, format!("undeclared method `{name}`")))
    }

    fn var(&self, method: &str, name: &str) -> VarId {
        self.var_ids[&format!("{method}/{name}")]
    }

    fn opt_var(&self, method: &str, name: &str) -> Option<VarId> {
        opt(name).map(|n| self.var(method, n))
    }

    fn mtype(&self, rel: &str, row: &FactRow, ret: &str, params: &[&str]) -> Result<MethodType> {
        let ret = self.ty(rel, row, ret)?;
        let params = params
            .iter()
            .map(|p| self.ty(rel, row, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(MethodType::new(ret, params))
    }

    fn mtype_literal(&self, rel: &str, row: &FactRow, lit: &str) -> Result<MethodType> {
        let (params, ret) = parse_method_type_literal(lit)
            .ok_or_else(|| invalid(rel, row, format!("malformed method type `{lit}`")))?;
        self.mtype(rel, row, ret, &params)
    }

    fn constant(&self, rel: &str, row: &FactRow, kind: &str, payload: &str) -> Result<Constant> {
        Ok(match kind {
            "string" => Constant::Str(payload.to_string()),
            "class" => Constant::Class(self.ty(rel, row, payload)?),
            "mh" => Constant::Handle(self.method(rel, row, payload)?),
            "mt" => Constant::MethodType(self.mtype_literal(rel, row, payload)?),
            "int" => Constant::Int(
                payload
                    .parse()
                    .map_err(|_| invalid(rel, row, format!("malformed integer `{payload}`")))?,
            ),
            other => return Err(invalid(rel, row, format!("unknown constant kind `{other}`"))),
        })
    }

    fn run(mut self) -> Result<Program> {
        let types = self.load_types()?;
        let supertypes = self.supertype_closure(&types)?;
        let mut methods = self.load_methods()?;
        self.collect_insn_headers()?;
        let vars = self.collect_vars()?;
        let fields = self.collect_fields();
        self.bind_method_vars(&mut methods)?;
        let insns = self.load_insns()?;

        let mut entry_points = Vec::new();
        for row in self.rows("EntryPoint") {
            entry_points.push(self.method("EntryPoint", row, &row.fields[0])?);
        }
        entry_points.sort();
        entry_points.dedup();

        let expectations = if self.facts.has("ExpectedReachable") || self.facts.has("ExpectedUnreachable") {
            let mut exp = Expectations::default();
            for row in self.rows("ExpectedReachable") {
                exp.reachable.push(self.method("ExpectedReachable", row, &row.fields[0])?);
            }
            for row in self.rows("ExpectedUnreachable") {
                exp.unreachable.push(self.method("ExpectedUnreachable", row, &row.fields[0])?);
            }
            Some(exp)
        } else {
            None
        };

        let mut methods_by_type = vec![Vec::new(); types.len()];
        for (i, m) in methods.iter().enumerate() {
            methods_by_type[m.declaring_type.index()].push(MethodId(i as u32));
        }
        let mut insns_by_method = vec![Vec::new(); methods.len()];
        let mut var_uses = vec![Vec::new(); vars.len()];
        let mut static_loads = vec![Vec::new(); fields.len()];
        for (i, insn) in insns.iter().enumerate() {
            let id = InsnId(i as u32);
            insns_by_method[insn.method.index()].push(id);
            if let Op::LoadField { base: None, field, .. } = insn.op {
                static_loads[field.index()].push(id);
            }
            for (var, role) in reads(&insn.op) {
                var_uses[var.index()].push(VarUse { insn: id, role });
            }
        }
        let target_field = self.field_ids[CALL_SITE_TARGET_FIELD];

        Ok(Program {
            types,
            type_ids: self.type_ids,
            methods,
            method_ids: self.method_ids,
            vars,
            var_ids: self.var_ids,
            fields,
            field_ids: self.field_ids,
            insns,
            insn_ids: self.insn_ids,
            entry_points,
            expectations,
            supertypes,
            methods_by_type,
            insns_by_method,
            var_uses,
            static_loads,
            target_field,
        })
    }

    fn load_types(&mut self) -> Result<Vec<TypeDecl>> {
        let mut by_name: BTreeMap<&str, &FactRow> = BTreeMap::new();
        for row in self.rows("Type") {
            if by_name.insert(&row.fields[0], row).is_some() {
                return Err(invalid("Type", row, format!("duplicate type id `{}`", row.fields[0])));
            }
        }
        let (_, ids) = assign_ids::<TypeId>(by_name.keys().map(|s| s.to_string()));
        self.type_ids = ids;
        by_name
            .values()
            .map(|row| {
                let f = &row.fields;
                let kind = TypeKind::parse(&f[1])
                    .ok_or_else(|| invalid("Type", row, format!("unknown type kind `{}`", f[1])))?;
                let superclass = opt(&f[2]).map(|s| self.ty("Type", row, s)).transpose()?;
                let interfaces = list(&f[3])
                    .into_iter()
                    .map(|s| self.ty("Type", row, s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TypeDecl {
                    id: f[0].clone(),
                    kind,
                    superclass,
                    interfaces,
                })
            })
            .collect()
    }

    fn supertype_closure(&self, types: &[TypeDecl]) -> Result<Vec<Vec<TypeId>>> {
        #[derive(Clone, Copy, PartialEq)]
        enum State {
            New,
            Active,
            Done,
        }
        fn visit(
            t: usize,
            types: &[TypeDecl],
            state: &mut [State],
            out: &mut [Vec<TypeId>],
        ) -> std::result::Result<(), usize> {
            match state[t] {
                State::Done => return Ok(()),
                State::Active => return Err(t),
                State::New => {}
            }
            state[t] = State::Active;
            let mut acc: BTreeSet<TypeId> = BTreeSet::from([TypeId(t as u32)]);
            let decl = &types[t];
            for sup in decl.superclass.iter().chain(decl.interfaces.iter()) {
                visit(sup.index(), types, state, out)?;
                acc.extend(out[sup.index()].iter().copied());
            }
            out[t] = acc.into_iter().collect();
            state[t] = State::Done;
            Ok(())
        }
        let mut state = vec![State::New; types.len()];
        let mut out = vec![Vec::new(); types.len()];
        for t in 0..types.len() {
            if let Err(culprit) = visit(t, types, &mut state, &mut out) {
                let name = &types[culprit].id;
                let row = self
                    .rows("Type")
                    .iter()
                    .find(|r| &r.fields[0] == name)
                    .expect("declared type has a row");
                return Err(invalid("Type", row, format!("cyclic subtype relation involving `{name}`")));
            }
        }
        Ok(out)
    }

    fn load_methods(&mut self) -> Result<Vec<MethodDecl>> {
        let mut by_name: BTreeMap<&str, &FactRow> = BTreeMap::new();
        for row in self.rows("Method") {
            if by_name.insert(&row.fields[0], row).is_some() {
                return Err(invalid("Method", row, format!("duplicate method id `{}`", row.fields[0])));
            }
        }
        let (_, ids) = assign_ids::<MethodId>(by_name.keys().map(|s| s.to_string()));
        self.method_ids = ids;
        by_name
            .values()
            .map(|row| {
                let f = &row.fields;
                let kind = MethodKind::parse(&f[5])
                    .ok_or_else(|| invalid("Method", row, format!("unknown method flag `{}`", f[5])))?;
                if kind == MethodKind::Constructor && (f[2] != "<init>" || f[3] != "void") {
                    return Err(invalid(
                        "Method",
                        row,
                        format!("constructor `{}` must be named <init> and return void", f[0]),
                    ));
                }
                let mt = self.mtype("Method", row, &f[3], &list(&f[4]))?;
                Ok(MethodDecl {
                    id: f[0].clone(),
                    declaring_type: self.ty("Method", row, &f[1])?,
                    name: f[2].clone(),
                    return_type: mt.ret,
                    param_types: mt.params.to_vec(),
                    kind,
                    formals: Vec::new(),
                    this_var: None,
                    return_var: None,
                })
            })
            .collect()
    }

    fn collect_insn_headers(&mut self) -> Result<()> {
        let mut names = Vec::new();
        for rel in STATEMENT_FILES {
            for row in self.rows(rel) {
                let (insn, method) = (&row.fields[0], &row.fields[1]);
                self.method(rel, row, method)?;
                if self.insn_method.insert(insn.clone(), method.clone()).is_some() {
                    return Err(invalid(rel, row, format!("duplicate instruction id `{insn}`")));
                }
                names.push(insn.clone());
            }
        }
        let (_, ids) = assign_ids::<InsnId>(names);
        self.insn_ids = ids;
        Ok(())
    }

    /// Variable columns of each statement relation (excluding `-` placeholders).
    fn statement_vars(rel: &str, f: &[String]) -> Vec<String> {
        let cols: &[usize] = match rel {
            "Alloc" => &[2],
            "Move" => &[2, 3],
            "StoreField" | "LoadField" => &[2, 4],
            "StoreArray" | "LoadArray" => &[2, 3],
            "Const" => &[2],
            "Call" => &[3, 6],
            "InvokeDynamic" => &[6],
            _ => &[],
        };
        cols.iter()
            .filter_map(|&c| opt(&f[c]).map(str::to_string))
            .collect()
    }

    fn collect_vars(&mut self) -> Result<Vec<VarDecl>> {
        let mut scoped: BTreeMap<String, String> = BTreeMap::new();
        let mut add = |method: &str, name: &str| {
            scoped.insert(format!("{method}/{name}"), method.to_string());
        };
        for rel in ["FormalParam", "ThisVar", "ReturnVar"] {
            for row in self.rows(rel) {
                self.method(rel, row, &row.fields[0])?;
                add(&row.fields[0], row.fields.last().unwrap());
            }
        }
        for rel in STATEMENT_FILES {
            for row in self.rows(rel) {
                for v in Self::statement_vars(rel, &row.fields) {
                    add(&row.fields[1], &v);
                }
            }
        }
        for row in self.rows("ActualParam") {
            let method = self
                .insn_method
                .get(&row.fields[0])
                .ok_or_else(|| invalid("ActualParam", row, format!("undeclared instruction `{}`", row.fields[0])))?;
            add(method, &row.fields[2]);
        }
        let (names, ids) = assign_ids::<VarId>(scoped.keys().cloned());
        self.var_ids = ids;
        Ok(names
            .into_iter()
            .map(|id| {
                let method = self.method_ids[&scoped[&id]];
                VarDecl { id, method }
            })
            .collect())
    }

    fn collect_fields(&mut self) -> Vec<String> {
        let mut names = vec![CALL_SITE_TARGET_FIELD.to_string()];
        for rel in ["StoreField", "LoadField"] {
            names.extend(self.rows(rel).iter().map(|r| r.fields[3].clone()));
        }
        let (names, ids) = assign_ids::<FieldId>(names);
        self.field_ids = ids;
        names
    }

    fn bind_method_vars(&self, methods: &mut [MethodDecl]) -> Result<()> {
        let mut formals: BTreeMap<MethodId, BTreeMap<usize, (VarId, &FactRow)>> = BTreeMap::new();
        for row in self.rows("FormalParam") {
            let f = &row.fields;
            let m = self.method("FormalParam", row, &f[0])?;
            let idx: usize = f[1]
                .parse()
                .map_err(|_| invalid("FormalParam", row, format!("malformed index `{}`", f[1])))?;
            let arity = methods[m.index()].param_types.len();
            if idx >= arity {
                return Err(invalid(
                    "FormalParam",
                    row,
                    format!("index {idx} out of range for `{}` with {arity} parameters", f[0]),
                ));
            }
            if formals
                .entry(m)
                .or_default()
                .insert(idx, (self.var(&f[0], &f[2]), row))
                .is_some()
            {
                return Err(invalid("FormalParam", row, format!("duplicate formal {idx} of `{}`", f[0])));
            }
        }
        for (m, by_index) in formals {
            let decl = &mut methods[m.index()];
            if by_index.len() != decl.param_types.len() {
                let (_, row) = by_index.values().next().unwrap();
                return Err(invalid(
                    "FormalParam",
                    row,
                    format!("formals of `{}` must cover indices 0..{}", decl.id, decl.param_types.len()),
                ));
            }
            decl.formals = by_index.values().map(|(v, _)| *v).collect();
        }
        for row in self.rows("ThisVar") {
            let m = self.method("ThisVar", row, &row.fields[0])?;
            let decl = &mut methods[m.index()];
            if decl.is_static() {
                return Err(invalid("ThisVar", row, format!("static method `{}` has no this variable", decl.id)));
            }
            if decl.this_var.replace(self.var(&row.fields[0], &row.fields[1])).is_some() {
                return Err(invalid("ThisVar", row, format!("duplicate this variable for `{}`", decl.id)));
            }
        }
        for row in self.rows("ReturnVar") {
            let m = self.method("ReturnVar", row, &row.fields[0])?;
            let decl = &mut methods[m.index()];
            if self.type_ids.get("void") == Some(&decl.return_type) {
                return Err(invalid("ReturnVar", row, format!("void method `{}` has no return variable", decl.id)));
            }
            if decl.return_var.replace(self.var(&row.fields[0], &row.fields[1])).is_some() {
                return Err(invalid("ReturnVar", row, format!("duplicate return variable for `{}`", decl.id)));
            }
        }
        Ok(())
    }

    fn dense<'a>(
        rel: &str,
        rows: impl Iterator<Item = &'a FactRow>,
    ) -> Result<HashMap<&'a str, Vec<&'a FactRow>>> {
        let mut grouped: HashMap<&str, BTreeMap<usize, &FactRow>> = HashMap::new();
        for row in rows {
            let idx: usize = row.fields[1]
                .parse()
                .map_err(|_| invalid(rel, row, format!("malformed index `{}`", row.fields[1])))?;
            if grouped.entry(&row.fields[0]).or_default().insert(idx, row).is_some() {
                return Err(invalid(rel, row, format!("duplicate index {idx} for `{}`", row.fields[0])));
            }
        }
        grouped
            .into_iter()
            .map(|(insn, by_idx)| {
                if let Some((_, row)) = by_idx.iter().enumerate().find(|(i, (k, _))| *i != **k) {
                    return Err(invalid(rel, row.1, format!("indices of `{insn}` must be dense from 0")));
                }
                Ok((insn, by_idx.into_values().collect()))
            })
            .collect()
    }

    fn load_insns(&self) -> Result<Vec<Insn>> {
        let actuals = Self::dense("ActualParam", self.rows("ActualParam").iter())?;
        let boot_args = Self::dense("BootArg", self.rows("BootArg").iter())?;
        let mut insns: BTreeMap<&str, Insn> = BTreeMap::new();

        for rel in STATEMENT_FILES {
            for row in self.rows(rel) {
                let f = &row.fields;
                let m = &f[1];
                let v = |name: &str| self.var(m, name);
                let op = match *rel {
                    "Alloc" => Op::Alloc {
                        to: v(&f[2]),
                        ty: self.ty(rel, row, &f[3])?,
                    },
                    "Move" => Op::Move {
                        to: v(&f[2]),
                        from: v(&f[3]),
                    },
                    "StoreField" => Op::StoreField {
                        base: self.opt_var(m, &f[2]),
                        field: self.field_ids[&f[3]],
                        from: v(&f[4]),
                    },
                    "LoadField" => Op::LoadField {
                        base: self.opt_var(m, &f[2]),
                        field: self.field_ids[&f[3]],
                        to: v(&f[4]),
                    },
                    "StoreArray" => Op::StoreArray {
                        base: v(&f[2]),
                        from: v(&f[3]),
                    },
                    "LoadArray" => Op::LoadArray {
                        base: v(&f[2]),
                        to: v(&f[3]),
                    },
                    "Const" => Op::Const {
                        to: v(&f[2]),
                        value: self.constant(rel, row, &f[3], &f[4])?,
                    },
                    "Call" => {
                        let kind = CallKind::parse(&f[2])
                            .ok_or_else(|| invalid(rel, row, format!("unknown call kind `{}`", f[2])))?;
                        let (owner_name, name) = match f[4].rsplit_once('.') {
                            Some((o, n)) => (Some(o.to_string()), n.to_string()),
                            None => (None, f[4].clone()),
                        };
                        let owner = owner_name
                            .as_deref()
                            .map(|o| self.ty(rel, row, o))
                            .transpose()?;
                        let args = actuals
                            .get(f[0].as_str())
                            .map(|rows| rows.iter().map(|r| v(&r.fields[2])).collect())
                            .unwrap_or_default();
                        Op::Call(Call {
                            kind,
                            base: self.opt_var(m, &f[3]),
                            callee: CalleeRef {
                                owner,
                                owner_name,
                                name,
                            },
                            descriptor: self.mtype_literal(rel, row, &f[5])?,
                            ret: self.opt_var(m, &f[6]),
                            args,
                        })
                    }
                    "InvokeDynamic" => {
                        let args = actuals
                            .get(f[0].as_str())
                            .map(|rows| rows.iter().map(|r| v(&r.fields[2])).collect())
                            .unwrap_or_default();
                        let boot_args = boot_args
                            .get(f[0].as_str())
                            .map(|rows| {
                                rows.iter()
                                    .map(|r| self.constant("BootArg", r, &r.fields[2], &r.fields[3]))
                                    .collect::<Result<Vec<_>>>()
                            })
                            .transpose()?
                            .unwrap_or_default();
                        Op::InvokeDynamic(InvokeDynamic {
                            bootstrap: self.method(rel, row, &f[2])?,
                            name: f[3].clone(),
                            mtype: self.mtype(rel, row, &f[4], &list(&f[5]))?,
                            ret: self.opt_var(m, &f[6]),
                            args,
                            boot_args,
                        })
                    }
                    _ => unreachable!(),
                };
                insns.insert(
                    f[0].as_str(),
                    Insn {
                        id: f[0].clone(),
                        method: self.method_ids[m],
                        op,
                    },
                );
            }
        }

        for (rel, grouped) in [("ActualParam", &actuals), ("BootArg", &boot_args)] {
            for (insn, rows) in grouped {
                let ok = match insns.get(insn).map(|i| &i.op) {
                    Some(Op::InvokeDynamic(_)) => true,
                    Some(Op::Call(_)) => rel == "ActualParam",
                    _ => false,
                };
                if !ok {
                    return Err(invalid(
                        rel,
                        rows[0],
                        format!("`{insn}` is not a call or invokedynamic instruction"),
                    ));
                }
            }
        }
        Ok(insns.into_values().collect())
    }
}

fn reads(op: &Op) -> Vec<(VarId, UseRole)> {
    match op {
        Op::Alloc { .. } | Op::Const { .. } => Vec::new(),
        Op::Move { from, .. } => vec![(*from, UseRole::MoveFrom)],
        Op::LoadField { base, .. } => base.iter().map(|b| (*b, UseRole::LoadBase)).collect(),
        Op::StoreField { base, from, .. } => base
            .iter()
            .map(|b| (*b, UseRole::StoreBase))
            .chain([(*from, UseRole::StoreValue)])
            .collect(),
        Op::LoadArray { base, .. } => vec![(*base, UseRole::ArrayLoadBase)],
        Op::StoreArray { base, from } => {
            vec![(*base, UseRole::ArrayStoreBase), (*from, UseRole::ArrayStoreValue)]
        }
        Op::Call(c) => c
            .base
            .iter()
            .map(|b| (*b, UseRole::CallBase))
            .chain(c.args.iter().enumerate().map(|(i, a)| (*a, UseRole::CallArg(i))))
            .collect(),
        Op::InvokeDynamic(d) => d
            .args
            .iter()
            .enumerate()
            .map(|(i, a)| (*a, UseRole::IndyArg(i)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FactSet {
        let mut f = FactSet::new();
        f.push("Type", ["java.lang.Object", "class", "-", "-"]);
        f.push("Type", ["void", "primitive", "-", "-"]);
        f
    }

    fn expect_err(f: &FactSet, needle: &str) -> String {
        let msg = Program::from_facts(f).unwrap_err().to_string();
        assert!(msg.contains(needle), "`{msg}` lacks `{needle}`");
        msg
    }

    #[test]
    fn minimal_program() {
        let mut f = FactSet::new();
        f.push("Type", ["java.lang.Object", "class", "-", "-"]);
        let p = Program::from_facts(&f).unwrap();
        assert_eq!(p.type_count(), 1);
        assert_eq!(p.method_count(), 0);
        assert!(p.expectations().is_none());
    }

    #[test]
    fn dangling_type_is_named() {
        let mut f = base();
        f.push("Type", ["B", "class", "Foo", "-"]);
        let msg = expect_err(&f, "`Foo`");
        assert!(msg.starts_with("Type.facts:"));
    }

    #[test]
    fn duplicate_ids() {
        let mut f = base();
        f.push("Type", ["void", "primitive", "-", "-"]);
        expect_err(&f, "duplicate type id");

        let mut f = base();
        f.push("Method", ["M.m", "java.lang.Object", "m", "void", "-", "static"]);
        f.push("Alloc", ["i", "M.m", "x", "java.lang.Object"]);
        f.push("Move", ["i", "M.m", "y", "x"]);
        expect_err(&f, "duplicate instruction id `i`");
    }

    #[test]
    fn cycles_are_rejected() {
        let mut f = base();
        f.push("Type", ["A", "class", "B", "-"]);
        f.push("Type", ["B", "class", "A", "-"]);
        expect_err(&f, "cyclic");
    }

    #[test]
    fn method_shape_checks() {
        let mut f = base();
        f.push("Method", ["C.<init>", "java.lang.Object", "init", "void", "-", "constructor"]);
        expect_err(&f, "must be named <init>");

        let mut f = base();
        f.push("Method", ["S.m", "java.lang.Object", "m", "void", "void", "static"]);
        f.push("ThisVar", ["S.m", "this"]);
        expect_err(&f, "has no this variable");

        let mut f = base();
        f.push("Method", ["S.m", "java.lang.Object", "m", "void", "java.lang.Object,java.lang.Object", "static"]);
        f.push("FormalParam", ["S.m", "1", "b"]);
        expect_err(&f, "must cover indices");

        let mut f = base();
        f.push("Method", ["S.m", "java.lang.Object", "m", "void", "-", "static"]);
        f.push("ReturnVar", ["S.m", "r"]);
        expect_err(&f, "void method");
    }

    #[test]
    fn actuals_must_be_dense() {
        let mut f = base();
        f.push("Method", ["S.m", "java.lang.Object", "m", "void", "-", "static"]);
        f.push("Call", ["c", "S.m", "static", "-", "S.m", "()void", "-"]);
        f.push("ActualParam", ["c", "1", "x"]);
        expect_err(&f, "dense");
    }

    #[test]
    fn malformed_payloads() {
        let mut f = base();
        f.push("Method", ["S.m", "java.lang.Object", "m", "void", "-", "static"]);
        f.push("Const", ["k", "S.m", "x", "mt", "(java.lang.Object"]);
        expect_err(&f, "malformed method type");

        let mut f = base();
        f.push("Method", ["S.m", "java.lang.Object", "m", "void", "-", "static"]);
        f.push("Const", ["k", "S.m", "x", "int", "nope"]);
        expect_err(&f, "malformed integer");
    }

    #[test]
    fn scoped_variables_and_order() {
        let mut f = base();
        f.push("Type", ["A", "class", "java.lang.Object", "-"]);
        f.push("Method", ["A.m", "A", "m", "void", "-", "static"]);
        f.push("Alloc", ["a2", "A.m", "x", "A"]);
        f.push("Alloc", ["a1", "A.m", "y", "A"]);
        f.push("EntryPoint", ["A.m"]);
        let p = Program::from_facts(&f).unwrap();
        let ids: Vec<&str> = p.insns().map(|(_, i)| i.id.as_str()).collect();
        assert_eq!(ids, ["a1", "a2"]);
        assert!(p.var_id("A.m/x").is_some());
        let a = p.type_id("A").unwrap();
        let obj = p.type_id("java.lang.Object").unwrap();
        assert!(p.is_subtype(a, obj));
        assert!(!p.is_subtype(obj, a));
        assert_eq!(p.entry_points(), &[p.method_id("A.m").unwrap()]);
    }
}
