//! Semi-naive fixpoint evaluation over the relation store.
//!
//! Each round, every rule reads the store as it stood at the end of the
//! previous round (full relations plus that round's delta) and proposes
//! facts. Rules may run in parallel; their outputs are merged in rule order,
//! so the result never depends on scheduling.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::ir::{InsnId, MethodId, Program, VarId};
use crate::rules::Sites;
use crate::store::{Dump, EdgeKind, Fact, Store};
use crate::value::ValueId;

pub const DEFAULT_MAX_ROUNDS: usize = 1_000_000;

/// A monotone rule evaluator.
pub trait Rule: Send + Sync {
    fn name(&self) -> &'static str;

    /// Proposes facts derivable from the current store. Implementations
    /// must at least cover every derivation that uses a delta tuple;
    /// re-proposing known facts is harmless.
    fn eval(&self, cx: &RuleCx<'_>, out: &mut Vec<Fact>);
}

/// What a rule sees during one round.
pub struct RuleCx<'a> {
    pub program: &'a Program,
    pub store: &'a Store,
    pub sites: &'a Sites,
    /// True in the first round, and in every round of naive evaluation.
    pub initial: bool,
    fresh_methods: HashSet<MethodId>,
    vpt_delta: HashMap<VarId, Vec<ValueId>>,
    dirty: Vec<InsnId>,
}

impl<'a> RuleCx<'a> {
    fn new(program: &'a Program, store: &'a Store, sites: &'a Sites, initial: bool) -> Self {
        let fresh_methods: HashSet<MethodId> = store.reachable.delta().iter().copied().collect();
        let mut vpt_delta: HashMap<VarId, Vec<ValueId>> = HashMap::new();
        for &(v, o) in store.vpt.delta() {
            vpt_delta.entry(v).or_default().push(o);
        }
        let mut dirty = BTreeSet::new();
        for &m in store.reachable.delta() {
            dirty.extend(program.insns_of(m).iter().copied());
        }
        for &(v, _) in store.vpt.delta() {
            dirty.extend(program.uses_of(v).iter().map(|u| u.insn));
        }
        RuleCx {
            program,
            store,
            sites,
            initial,
            fresh_methods,
            vpt_delta,
            dirty: dirty.into_iter().collect(),
        }
    }

    /// Whether `m` became reachable in the previous round.
    pub fn is_fresh(&self, m: MethodId) -> bool {
        self.fresh_methods.contains(&m)
    }

    /// Whether the method enclosing `i` became reachable in the previous round.
    pub fn site_is_fresh(&self, i: InsnId) -> bool {
        self.is_fresh(self.program.insn(i).method)
    }

    /// Values that `v` started pointing to in the previous round.
    pub fn new_points_to(&self, v: VarId) -> &[ValueId] {
        self.vpt_delta.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Receivers to consider at site `i` for variable `v`: everything if the
    /// site's method just became reachable, otherwise only the delta.
    pub fn points_to_at(&self, i: InsnId, v: VarId) -> &[ValueId] {
        if self.site_is_fresh(i) {
            self.store.points_to(v)
        } else {
            self.new_points_to(v)
        }
    }

    /// Instructions whose method just became reachable or that read a
    /// variable whose points-to set grew, in id order.
    pub fn dirty_sites(&self) -> &[InsnId] {
        &self.dirty
    }
}

/// An ordered collection of rules.
#[derive(Default)]
pub struct RulePack {
    rules: Vec<Box<dyn Rule>>,
}

impl RulePack {
    pub fn new() -> Self {
        RulePack::default()
    }

    pub fn push(&mut self, rule: impl Rule + 'static) -> &mut Self {
        self.rules.push(Box::new(rule));
        self
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.name()).collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub max_rounds: usize,
    pub single_thread: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            max_rounds: DEFAULT_MAX_ROUNDS,
            single_thread: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no fixpoint after {rounds} rounds; still growing: {}", growing.join(", "))]
    RoundLimit {
        rounds: usize,
        growing: Vec<&'static str>,
    },
}

/// The fixpoint of a rule pack over a program.
pub struct Solution<'p> {
    pub program: &'p Program,
    pub store: Store,
    pub rounds: usize,
}

impl Solution<'_> {
    pub fn dump(&self) -> Dump {
        self.store.dump(self.program)
    }

    pub fn is_reachable(&self, method: &str) -> bool {
        self.program
            .method_id(method)
            .is_some_and(|m| self.store.is_reachable(m))
    }

    pub fn reachable_methods(&self) -> BTreeSet<&str> {
        self.store
            .reachable
            .all()
            .iter()
            .map(|&m| self.program.method(m).id.as_str())
            .collect()
    }

    /// Decoded points-to set of a scoped variable (`<methodId>/<name>`).
    pub fn points_to(&self, var: &str) -> BTreeSet<String> {
        self.program
            .var_id(var)
            .map(|v| {
                self.store
                    .points_to(v)
                    .iter()
                    .map(|&o| self.store.value(o).display(self.program).to_string())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Decoded call-graph edges `(insn, callee, kind)`.
    pub fn edges(&self) -> BTreeSet<(String, String, EdgeKind)> {
        self.store
            .call_graph(self.program)
            .into_iter()
            .map(|(i, m, k)| {
                (
                    self.program.insn(i).id.clone(),
                    self.program.method(m).id.clone(),
                    k,
                )
            })
            .collect()
    }
}

/// Semi-naive evaluation.
pub fn solve<'p>(program: &'p Program, rules: &RulePack, settings: Settings) -> Result<Solution<'p>, SolveError> {
    run(program, rules, settings, false)
}

/// Naive evaluation: every round re-applies every rule to the full
/// relations. Slower, and useful as an oracle for [`solve`].
pub fn naive_solve<'p>(
    program: &'p Program,
    rules: &RulePack,
    settings: Settings,
) -> Result<Solution<'p>, SolveError> {
    run(program, rules, settings, true)
}

fn run<'p>(program: &'p Program, rules: &RulePack, settings: Settings, naive: bool) -> Result<Solution<'p>, SolveError> {
    let sites = Sites::new(program);
    let mut store = Store::default();
    let mut rounds = 0;
    loop {
        let outputs: Vec<Vec<Fact>> = {
            let cx = RuleCx::new(program, &store, &sites, naive || rounds == 0);
            let eval = |rule: &dyn Rule| {
                let mut out = Vec::new();
                rule.eval(&cx, &mut out);
                out
            };
            if settings.single_thread {
                rules.rules.iter().map(|r| eval(r.as_ref())).collect()
            } else {
                rules.rules.par_iter().map(|r| eval(r.as_ref())).collect()
            }
        };
        for fact in outputs.into_iter().flatten() {
            store.merge(fact);
        }
        let growing = store.advance(naive);
        rounds += 1;
        if growing.is_empty() {
            return Ok(Solution {
                program,
                store,
                rounds,
            });
        }
        if rounds >= settings.max_rounds {
            return Err(SolveError::RoundLimit { rounds, growing });
        }
    }
}
