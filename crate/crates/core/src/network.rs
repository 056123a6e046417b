//! Lifted Bayesian networks: a DAG over relation symbols where every relation
//! carries guarded conditional probabilities over its parents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atomic_types::{enumerate_types, QfProgram};
use crate::error::{Error, Result};
use crate::evaluator::{decode, Compiled, FiniteStructure};
use crate::formula::{parse, Formula, Signature, Var};
use crate::rational::{format_rational, one, parse_rational, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub guard: Formula,
    pub prob: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSpec {
    pub name: String,
    pub arity: usize,
    pub parents: BTreeSet<String>,
    pub rules: Vec<Rule>,
}

impl RelationSpec {
    /// The guard variables `x1..xk`.
    pub fn arg_vars(&self) -> Vec<Var> {
        arg_vars(self.arity)
    }
}

pub fn arg_vars(arity: usize) -> Vec<Var> {
    (1..=arity).map(|i| format!("x{i}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedNetwork {
    sig: Signature,
    relations: BTreeMap<String, RelationSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    relations: Vec<RelationFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    name: String,
    arity: usize,
    #[serde(default)]
    parents: Vec<String>,
    rules: Vec<RuleFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    guard: String,
    prob: String,
}

impl LiftedNetwork {
    /// Checks that parents exist, the parent graph is acyclic, guards only
    /// mention parents and `x1..xk` freely, and probabilities lie in `[0,1]`.
    pub fn new(specs: Vec<RelationSpec>) -> Result<Self> {
        let sig = Signature::new(specs.iter().map(|s| (s.name.clone(), s.arity)))?;
        let mut relations = BTreeMap::new();
        for spec in specs {
            for p in &spec.parents {
                if !sig.contains(p) {
                    return Err(Error::Network(format!("`{}` lists unknown parent `{p}`", spec.name)));
                }
            }
            if spec.rules.is_empty() {
                return Err(Error::Network(format!("`{}` has no rules", spec.name)));
            }
            let allowed: BTreeSet<Var> = spec.arg_vars().into_iter().collect();
            for rule in &spec.rules {
                rule.guard.check_signature(&sig)?;
                if let Some(bad) = rule.guard.relations().into_iter().find(|r| !spec.parents.contains(r)) {
                    return Err(Error::Network(format!(
                        "guard `{}` of `{}` mentions `{bad}`, which is not a parent",
                        rule.guard, spec.name
                    )));
                }
                if let Some(v) = rule.guard.free_vars().into_iter().find(|v| !allowed.contains(v)) {
                    return Err(Error::Network(format!(
                        "guard `{}` of `{}` has free variable `{v}`; only x1..x{} are allowed",
                        rule.guard, spec.name, spec.arity
                    )));
                }
                if rule.prob < zero() || rule.prob > one() {
                    return Err(Error::Network(format!(
                        "probability {} of `{}` is outside [0,1]",
                        format_rational(&rule.prob),
                        spec.name
                    )));
                }
            }
            relations.insert(spec.name.clone(), spec);
        }
        let net = LiftedNetwork { sig, relations };
        if let Some(cycle) = net.find_cycle() {
            return Err(Error::Network(format!("parent graph has a cycle: {}", cycle.join(" -> "))));
        }
        Ok(net)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Network(e.to_string()))?;
        let sig = Signature::new(file.relations.iter().map(|r| (r.name.clone(), r.arity)))?;
        let mut specs = Vec::new();
        for r in file.relations {
            let mut rules = Vec::new();
            for rule in r.rules {
                let guard = parse(&rule.guard, &sig)?;
                let prob = parse_rational(&rule.prob).ok_or_else(|| {
                    Error::Network(format!("probability `{}` of `{}` is not a rational number", rule.prob, r.name))
                })?;
                rules.push(Rule { guard, prob });
            }
            specs.push(RelationSpec { name: r.name, arity: r.arity, parents: r.parents.into_iter().collect(), rules });
        }
        Self::new(specs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = NetworkFile {
            relations: self
                .relations
                .values()
                .map(|r| RelationFile {
                    name: r.name.clone(),
                    arity: r.arity,
                    parents: r.parents.iter().cloned().collect(),
                    rules: r
                        .rules
                        .iter()
                        .map(|rule| RuleFile { guard: rule.guard.to_string(), prob: format_rational(&rule.prob) })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSpec> {
        self.relations.get(name)
    }

    /// Relations in name order.
    pub fn relations(&self) -> impl Iterator<Item = &RelationSpec> + '_ {
        self.relations.values()
    }

    pub fn parents(&self, name: &str) -> BTreeSet<String> {
        self.relations.get(name).map(|r| r.parents.clone()).unwrap_or_default()
    }

    pub fn children(&self, name: &str) -> BTreeSet<String> {
        self.relations.values().filter(|r| r.parents.contains(name)).map(|r| r.name.clone()).collect()
    }

    fn find_cycle(&self) -> Option<Vec<String>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn dfs(net: &LiftedNetwork, v: &str, state: &mut BTreeMap<String, u8>, stack: &mut Vec<String>) -> Option<Vec<String>> {
            state.insert(v.to_string(), 1);
            stack.push(v.to_string());
            for p in net.parents(v) {
                match state.get(&p).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|s| *s == p).expect("on stack");
                        let mut cycle = stack[start..].to_vec();
                        cycle.push(p);
                        return Some(cycle);
                    }
                    0 => {
                        if let Some(c) = dfs(net, &p, state, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(v.to_string(), 2);
            None
        }
        let mut state = BTreeMap::new();
        for name in self.relations.keys() {
            if state.get(name).copied().unwrap_or(0) == 0 {
                if let Some(c) = dfs(self, name, &mut state, &mut Vec::new()) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Length of the longest directed path starting at `name` (edges point parent to child).
    pub fn mp_rank(&self, name: &str) -> usize {
        self.children(name).iter().map(|c| 1 + self.mp_rank(c)).max().unwrap_or(0)
    }

    /// Maximum `mp_rank` over all relations.
    pub fn network_rank(&self) -> usize {
        self.relations.keys().map(|r| self.mp_rank(r)).max().unwrap_or(0)
    }

    /// Length of the longest directed path ending at `name`.
    pub fn depth(&self, name: &str) -> usize {
        self.parents(name).iter().map(|p| 1 + self.depth(p)).max().unwrap_or(0)
    }

    /// Increasing parent-closed signatures `σ_0 ⊆ … ⊆ σ_ρ = σ`, where `σ_r`
    /// holds the relations whose longest incoming path has length at most `r`.
    pub fn strata(&self) -> Vec<Signature> {
        if self.sig.is_empty() {
            return vec![Signature::empty()];
        }
        let depths: BTreeMap<&str, usize> = self.relations.keys().map(|r| (r.as_str(), self.depth(r))).collect();
        let top = depths.values().copied().max().unwrap_or(0);
        (0..=top)
            .map(|r| self.sig.restrict(depths.iter().filter(|(_, &d)| d <= r).map(|(n, _)| *n)))
            .collect()
    }

    /// Relations in sampling order: by depth, then by name.
    pub fn topological_order(&self) -> Vec<String> {
        let mut names: Vec<(usize, String)> = self.relations.keys().map(|r| (self.depth(r), r.clone())).collect();
        names.sort();
        names.into_iter().map(|(_, n)| n).collect()
    }

    /// Smallest parent-closed signature containing `names`.
    pub fn ancestor_closure<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Signature {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<String> = names.into_iter().map(str::to_string).collect();
        while let Some(n) = todo.pop() {
            if seen.insert(n.clone()) {
                todo.extend(self.parents(&n));
            }
        }
        self.sig.restrict(seen.iter().map(String::as_str))
    }

    /// The network induced by a parent-closed sub-signature.
    pub fn subnetwork(&self, sig: &Signature) -> Result<LiftedNetwork> {
        if !sig.is_subset(&self.sig) {
            return Err(Error::Signature(format!("{sig} is not a sub-signature of {}", self.sig)));
        }
        for name in sig.names() {
            if let Some(p) = self.parents(name).into_iter().find(|p| !sig.contains(p)) {
                return Err(Error::NotParentClosed { relation: name.to_string(), parent: p });
            }
        }
        Ok(LiftedNetwork {
            sig: sig.clone(),
            relations: self.relations.iter().filter(|(n, _)| sig.contains(n)).map(|(n, r)| (n.clone(), r.clone())).collect(),
        })
    }

    /// Replaces guards (and keeps probabilities) relation by relation.
    pub fn with_guards(&self, guards: &BTreeMap<String, Vec<Formula>>) -> Result<LiftedNetwork> {
        let specs = self
            .relations
            .values()
            .map(|r| {
                let mut r = r.clone();
                if let Some(gs) = guards.get(&r.name) {
                    for (rule, g) in r.rules.iter_mut().zip(gs) {
                        rule.guard = g.clone();
                    }
                }
                r
            })
            .collect();
        LiftedNetwork::new(specs)
    }

    /// Checks acyclicity and that the guards of every relation partition its
    /// parent structures: exactly when all guards are quantifier-free,
    /// otherwise on every structure with domain size up to `n_check`.
    pub fn validate(&self, n_check: usize) -> ValidationReport {
        let mut violations = Vec::new();
        if let Some(cycle) = self.find_cycle() {
            violations.push(Violation {
                relation: cycle[0].clone(),
                kind: ViolationKind::Cycle,
                witness: cycle.join(" -> "),
            });
            return ValidationReport { violations };
        }
        for spec in self.relations.values() {
            let psig = self.sig.restrict(spec.parents.iter().map(String::as_str));
            if spec.rules.iter().all(|r| r.guard.is_quantifier_free()) {
                violations.extend(self.check_qf_guards(spec, &psig));
            } else {
                violations.extend(self.check_guards_by_enumeration(spec, &psig, n_check));
            }
        }
        ValidationReport { violations }
    }

    fn check_qf_guards(&self, spec: &RelationSpec, psig: &Signature) -> Vec<Violation> {
        let vars = spec.arg_vars();
        let progs: Vec<QfProgram> = spec
            .rules
            .iter()
            .map(|r| QfProgram::compile(&r.guard, psig, &vars).expect("guards checked at construction"))
            .collect();
        let mut out = Vec::new();
        for p in enumerate_types(psig, &vars) {
            let hits: Vec<usize> = (0..progs.len()).filter(|&i| progs[i].eval_type(&p)).collect();
            let kind = match hits.len() {
                1 => continue,
                0 => ViolationKind::Gap,
                _ => ViolationKind::Overlap,
            };
            out.push(Violation { relation: spec.name.clone(), kind, witness: format!("type {p}; guards {hits:?}") });
        }
        out
    }

    fn check_guards_by_enumeration(&self, spec: &RelationSpec, psig: &Signature, n_check: usize) -> Vec<Violation> {
        let compiled: Vec<Compiled> =
            spec.rules.iter().map(|r| Compiled::new(&r.guard, psig).expect("guards checked at construction")).collect();
        let vars = spec.arg_vars();
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for n in 1..=n_check {
            let bits: usize = psig.iter().map(|(_, a)| n.pow(a as u32)).sum();
            if bits > 20 {
                break;
            }
            for mask in 0u64..1 << bits {
                let world = structure_from_mask(psig, n, mask);
                for t in 0..n.pow(spec.arity as u32) {
                    let tuple = decode(t, n, spec.arity);
                    let hits: Vec<usize> = (0..compiled.len())
                        .filter(|&i| {
                            // guard free vars are a subset of x1..xk, in sorted order
                            let pos: Vec<usize> = compiled[i]
                                .free_vars()
                                .map(|v| tuple[vars.iter().position(|w| w == v).expect("x_i")])
                                .collect();
                            compiled[i].eval_tuple(&world, &pos)
                        })
                        .collect();
                    let kind = match hits.len() {
                        1 => continue,
                        0 => ViolationKind::Gap,
                        _ => ViolationKind::Overlap,
                    };
                    if seen.insert(kind) {
                        let shown: Vec<usize> = tuple.iter().map(|e| e + 1).collect();
                        out.push(Violation {
                            relation: spec.name.clone(),
                            kind,
                            witness: format!("structure {} tuple {shown:?}; guards {hits:?}", world.to_json()),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Structure whose atoms (relations in signature order, tuples in
/// lexicographic order) are read off the bits of `mask`.
pub fn structure_from_mask(sig: &Signature, n: usize, mask: u64) -> FiniteStructure {
    let mut s = FiniteStructure::empty(sig, n);
    let mut bit = 0;
    for r in 0..sig.len() {
        for cell in s.table_mut(r) {
            *cell = mask >> bit & 1 == 1;
            bit += 1;
        }
    }
    s
}

/// Inverse of [`structure_from_mask`]; `None` when the world has 64 or more atoms.
pub fn structure_mask(world: &FiniteStructure) -> Option<u64> {
    let mut mask = 0u64;
    let mut bit = 0;
    for r in 0..world.sig().len() {
        for &cell in world.table(r) {
            if bit >= 64 {
                return None;
            }
            mask |= u64::from(cell) << bit;
            bit += 1;
        }
    }
    Some(mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    Overlap,
    Gap,
    Cycle,
    Scope,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Overlap => "overlap",
            ViolationKind::Gap => "gap",
            ViolationKind::Cycle => "cycle",
            ViolationKind::Scope => "scope",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub relation: String,
    pub kind: ViolationKind,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}
