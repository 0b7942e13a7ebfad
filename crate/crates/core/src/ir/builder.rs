use super::facts::FactSet;
use super::load::LoadError;
use super::{MethodKind, Program};

/// Programmatic construction of a fact base.
///
/// The builder only records fact rows; all validation happens in
/// [`ProgramBuilder::build`], exactly as for a facts directory.
///
/// ```
/// use indyscope::ir::{MethodKind, ProgramBuilder};
///
/// let mut b = ProgramBuilder::new();
/// b.class("java.lang.Object", None, &[]).primitive("void");
/// let mut main = b.method("Main.main", "java.lang.Object", "main", "void", &[], MethodKind::Static);
/// main.alloc("o", "java.lang.Object");
/// b.entry("Main.main");
/// let program = b.build().unwrap();
/// assert_eq!(program.insn_count(), 1);
/// ```
#[derive(Clone, Debug)]
pub struct ProgramBuilder {
    facts: FactSet,
    next_insn: usize,
}

impl Default for ProgramBuilder {
    fn default() -> Self {
        Self::new()
    }
}

fn joined(items: &[&str]) -> String {
    if items.is_empty() {
        "-".to_string()
    } else {
        items.join(",")
    }
}

impl ProgramBuilder {
    pub fn new() -> Self {
        ProgramBuilder {
            facts: FactSet::new(),
            next_insn: 0,
        }
    }

    /// Starts from existing facts, e.g. a loaded corpus program.
    pub fn from_facts(facts: FactSet) -> Self {
        ProgramBuilder { facts, next_insn: 0 }
    }

    pub fn class(&mut self, name: &str, superclass: Option<&str>, interfaces: &[&str]) -> &mut Self {
        self.facts.push(
            "Type",
            [name, "class", superclass.unwrap_or("-"), &joined(interfaces)],
        );
        self
    }

    pub fn interface(&mut self, name: &str, superinterfaces: &[&str]) -> &mut Self {
        self.facts
            .push("Type", [name, "interface", "-", &joined(superinterfaces)]);
        self
    }

    pub fn primitive(&mut self, name: &str) -> &mut Self {
        self.facts.push("Type", [name, "primitive", "-", "-"]);
        self
    }

    pub fn array(&mut self, name: &str) -> &mut Self {
        self.facts.push("Type", [name, "array", "-", "-"]);
        self
    }

    /// Declares a method and returns a builder for its body. Formals default
    /// to `p0..pN`, the receiver to `this` and the return variable to `ret`.
    pub fn method(
        &mut self,
        id: &str,
        declaring_type: &str,
        name: &str,
        return_type: &str,
        params: &[&str],
        kind: MethodKind,
    ) -> MethodBuilder<'_> {
        self.facts.push(
            "Method",
            [id, declaring_type, name, return_type, &joined(params), kind.as_str()],
        );
        for i in 0..params.len() {
            self.facts
                .push("FormalParam", [id.to_string(), i.to_string(), format!("p{i}")]);
        }
        if kind != MethodKind::Static {
            self.facts.push("ThisVar", [id, "this"]);
        }
        if return_type != "void" {
            self.facts.push("ReturnVar", [id, "ret"]);
        }
        MethodBuilder {
            builder: self,
            method: id.to_string(),
        }
    }

    /// Reopens a previously declared method to append statements.
    pub fn body(&mut self, method: &str) -> MethodBuilder<'_> {
        MethodBuilder {
            builder: self,
            method: method.to_string(),
        }
    }

    pub fn entry(&mut self, method: &str) -> &mut Self {
        self.facts.push("EntryPoint", [method]);
        self
    }

    pub fn expect_reachable(&mut self, method: &str) -> &mut Self {
        self.facts.push("ExpectedReachable", [method]);
        self
    }

    pub fn expect_unreachable(&mut self, method: &str) -> &mut Self {
        self.facts.push("ExpectedUnreachable", [method]);
        self
    }

    pub fn facts(&self) -> &FactSet {
        &self.facts
    }

    pub fn into_facts(self) -> FactSet {
        self.facts
    }

    pub fn build(&self) -> Result<Program, LoadError> {
        Program::from_facts(&self.facts)
    }

    fn fresh_insn(&mut self, method: &str) -> String {
        self.next_insn += 1;
        format!("{method}@{:04}", self.next_insn)
    }
}

/// Appends statements to one method. Every statement method returns the
/// generated instruction id.
pub struct MethodBuilder<'b> {
    builder: &'b mut ProgramBuilder,
    method: String,
}

impl MethodBuilder<'_> {
    fn stmt(&mut self, relation: &str, tail: &[&str]) -> String {
        let insn = self.builder.fresh_insn(&self.method);
        let mut row = vec![insn.clone(), self.method.clone()];
        row.extend(tail.iter().map(|s| s.to_string()));
        self.builder.facts.push(relation, row);
        insn
    }

    fn actuals(&mut self, insn: &str, args: &[&str]) {
        for (i, a) in args.iter().enumerate() {
            self.builder
                .facts
                .push("ActualParam", [insn.to_string(), i.to_string(), a.to_string()]);
        }
    }

    pub fn alloc(&mut self, to: &str, ty: &str) -> String {
        self.stmt("Alloc", &[to, ty])
    }

    pub fn assign(&mut self, to: &str, from: &str) -> String {
        self.stmt("Move", &[to, from])
    }

    /// `to = base.field`; pass `None` for a static field.
    pub fn load(&mut self, to: &str, base: Option<&str>, field: &str) -> String {
        self.stmt("LoadField", &[base.unwrap_or("-"), field, to])
    }

    pub fn store(&mut self, base: Option<&str>, field: &str, from: &str) -> String {
        self.stmt("StoreField", &[base.unwrap_or("-"), field, from])
    }

    pub fn load_array(&mut self, to: &str, base: &str) -> String {
        self.stmt("LoadArray", &[base, to])
    }

    pub fn store_array(&mut self, base: &str, from: &str) -> String {
        self.stmt("StoreArray", &[base, from])
    }

    /// `kind` is one of `string`, `class`, `mh`, `mt`, `int`.
    pub fn constant(&mut self, to: &str, kind: &str, payload: &str) -> String {
        self.stmt("Const", &[to, kind, payload])
    }

    /// `kind` is a call kind as written in `Call.facts`; `callee` is
    /// `Owner.name` or a bare name.
    pub fn call(
        &mut self,
        kind: &str,
        base: Option<&str>,
        callee: &str,
        descriptor: &str,
        ret: Option<&str>,
        args: &[&str],
    ) -> String {
        let insn = self.stmt(
            "Call",
            &[kind, base.unwrap_or("-"), callee, descriptor, ret.unwrap_or("-")],
        );
        self.actuals(&insn, args);
        insn
    }

    /// `boot_args` are `(kind, payload)` constants.
    #[allow(clippy::too_many_arguments)]
    pub fn indy(
        &mut self,
        bootstrap: &str,
        name: &str,
        ret_type: &str,
        param_types: &[&str],
        ret: Option<&str>,
        args: &[&str],
        boot_args: &[(&str, &str)],
    ) -> String {
        let insn = self.stmt(
            "InvokeDynamic",
            &[bootstrap, name, ret_type, &joined(param_types), ret.unwrap_or("-")],
        );
        self.actuals(&insn, args);
        for (i, (kind, payload)) in boot_args.iter().enumerate() {
            self.builder.facts.push(
                "BootArg",
                [insn.clone(), i.to_string(), kind.to_string(), payload.to_string()],
            );
        }
        insn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_variables() {
        let mut b = ProgramBuilder::new();
        b.class("java.lang.Object", None, &[]).primitive("void");
        b.class("A", Some("java.lang.Object"), &[]);
        b.method("A.m", "A", "m", "A", &["A", "A"], MethodKind::Instance);
        let p = b.build().unwrap();
        let m = p.method(p.method_id("A.m").unwrap());
        assert_eq!(m.formals.len(), 2);
        assert_eq!(m.this_var, p.var_id("A.m/this"));
        assert_eq!(m.return_var, p.var_id("A.m/ret"));
    }

    #[test]
    fn builder_errors_surface_at_build() {
        let mut b = ProgramBuilder::new();
        b.class("A", Some("Missing"), &[]);
        assert!(b.build().unwrap_err().to_string().contains("Missing"));
    }
}
