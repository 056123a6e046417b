//! Almost-sure quantifier elimination.
//!
//! Every subformula is represented by the set of complete atomic types over
//! its free variables (sorted) that it is almost surely equivalent to. Boolean
//! structure is evaluated type by type; existential quantifiers and proportion
//! comparisons are decided from the asymptotic type masses of a
//! [`TypeProbTable`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::asymptotics::{TypeProbTable, Witness};
use crate::atomic_types::{atom_count, dimension, enumerate_types, normalize_classes, partitions, restrict_arc, CompleteAtomicType};
use crate::error::{Error, Result};
use crate::formula::{Comparison, Formula, Side, Signature, Var};
use crate::network::LiftedNetwork;
use crate::rational::{rat, zero, Rational};

type TypeKey = (Vec<usize>, Vec<u64>);

/// A set of complete atomic types over a fixed, sorted variable tuple.
#[derive(Debug, Clone)]
pub struct TypeSet {
    vars: Vec<Var>,
    sig: Arc<Signature>,
    types: Vec<CompleteAtomicType>,
    keys: HashSet<TypeKey>,
}

impl PartialEq for TypeSet {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.sig == other.sig && self.types == other.types
    }
}

impl Eq for TypeSet {}

impl TypeSet {
    pub fn new(sig: Arc<Signature>, vars: Vec<Var>, mut types: Vec<CompleteAtomicType>) -> Self {
        types.sort();
        types.dedup();
        let keys = types.iter().map(CompleteAtomicType::key).collect();
        TypeSet { vars, sig, types, keys }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn types(&self) -> &[CompleteAtomicType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Membership of a type over exactly these variables.
    pub fn contains(&self, p: &CompleteAtomicType) -> bool {
        self.keys.contains(&p.key())
    }

    /// Membership of the restriction of a type over a superset of the variables.
    pub fn contains_restriction(&self, p: &CompleteAtomicType) -> bool {
        match restrict_arc(p, &self.sig, &self.vars) {
            Ok(q) => self.contains(&q),
            Err(_) => false,
        }
    }

    /// Whether the set holds every type over its variables.
    pub fn is_full(&self) -> bool {
        self.len() == type_count(&self.sig, self.vars.len())
    }

    /// Canonical rendering: `~true`, `true`, or the disjunction of the types.
    pub fn to_formula(&self) -> Formula {
        if self.is_empty() {
            Formula::bottom()
        } else if self.is_full() {
            Formula::Top
        } else {
            Formula::disj(self.types.iter().map(CompleteAtomicType::to_formula))
        }
    }

    /// All types over `vars` (a superset of the set's variables) whose
    /// restriction lies in the set.
    pub fn cylinder(&self, vars: &[Var]) -> Result<TypeSet> {
        for v in &self.vars {
            if !vars.contains(v) {
                return Err(Error::UnassignedVariable(v.clone()));
            }
        }
        let types = enumerate_types(&self.sig, vars).into_iter().filter(|p| self.contains_restriction(p)).collect();
        Ok(TypeSet::new(Arc::clone(&self.sig), vars.to_vec(), types))
    }

    /// Re-expresses the set over a sub-signature, provided membership does not
    /// depend on the dropped relations.
    pub fn project_to(&self, sub: &Signature) -> Option<TypeSet> {
        let sub = Arc::new(sub.clone());
        let projected: Vec<CompleteAtomicType> =
            self.types.iter().map(|p| restrict_arc(p, &sub, &self.vars)).collect::<Result<_>>().ok()?;
        let projected = TypeSet::new(Arc::clone(&sub), self.vars.clone(), projected);
        let preimage =
            enumerate_types(&self.sig, &self.vars).iter().filter(|p| projected.contains_restriction(p)).count();
        (preimage == self.len()).then_some(projected)
    }
}

impl fmt::Display for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Number of complete types over `n` variables.
pub fn type_count(sig: &Signature, n: usize) -> usize {
    partitions(n)
        .iter()
        .map(|classes| {
            let nc = classes.iter().max().map_or(0, |m| m + 1);
            1usize << atom_count(sig, nc)
        })
        .sum()
}

/// Operation tallies for the construction of the index set of a comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub arith: usize,
    pub num_cmp: usize,
    pub lit_cmp: usize,
}

impl OpCounts {
    pub fn total(&self) -> usize {
        self.arith + self.num_cmp + self.lit_cmp
    }
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, o: Self) {
        self.arith += o.arith;
        self.num_cmp += o.num_cmp;
        self.lit_cmp += o.lit_cmp;
    }
}

/// The quantities attached to one parameter type `t` of one side of a comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaRow {
    pub t: CompleteAtomicType,
    /// Largest dimension among realizations of the denominator.
    pub e: usize,
    /// Conditional mass of the denominator realizations of dimension `e`.
    pub beta: Rational,
    /// Number of those realizations.
    pub l: usize,
    /// Same three for the numerator (zero when it has no realization).
    pub d: usize,
    pub alpha: Rational,
    pub m: usize,
    pub gamma: Rational,
}

#[derive(Debug, Clone)]
pub struct ComparisonAnalysis {
    pub xs: Vec<Var>,
    pub bound: Vec<Var>,
    pub rows: Vec<GammaRow>,
    pub starred_rows: Vec<GammaRow>,
    /// Parameter types for which the comparison almost surely holds.
    pub selected: TypeSet,
    pub counts: OpCounts,
}

impl ComparisonAnalysis {
    pub fn to_formula(&self) -> Formula {
        self.selected.to_formula()
    }
}

pub fn cost_report(analysis: &ComparisonAnalysis) -> OpCounts {
    analysis.counts
}

enum Node {
    Const(bool),
    Atom(usize, Vec<usize>),
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Child(TypeSet),
}

impl Node {
    fn eval(&self, p: &CompleteAtomicType, offsets: &[usize]) -> bool {
        match self {
            Node::Const(b) => *b,
            Node::Atom(r, args) => {
                let tuple: Vec<usize> = args.iter().map(|&i| p.classes()[i]).collect();
                p.holds_rel(offsets, *r, &tuple)
            }
            Node::Eq(a, b) => p.classes()[*a] == p.classes()[*b],
            Node::Not(a) => !a.eval(p, offsets),
            Node::And(a, b) => a.eval(p, offsets) && b.eval(p, offsets),
            Node::Or(a, b) => a.eval(p, offsets) || b.eval(p, offsets),
            Node::Implies(a, b) => !a.eval(p, offsets) || b.eval(p, offsets),
            Node::Iff(a, b) => a.eval(p, offsets) == b.eval(p, offsets),
            Node::Child(set) => set.contains_restriction(p),
        }
    }
}

struct Engine<'a> {
    table: &'a TypeProbTable,
    counts: OpCounts,
}

impl<'a> Engine<'a> {
    fn mass(&self, p: &CompleteAtomicType) -> Result<Rational> {
        self.table.msf_p(p)
    }

    fn all_types(&self, vars: &[Var]) -> Vec<CompleteAtomicType> {
        enumerate_types(self.table.sig(), vars)
    }

    fn set(&mut self, f: &Formula) -> Result<TypeSet> {
        match f {
            Formula::Exists(ys, body) => {
                let mut set = self.set(body)?;
                for y in ys.iter().rev() {
                    if set.vars.contains(y) {
                        set = self.exists_step(&set, y)?;
                    }
                }
                Ok(set)
            }
            Formula::Compare(c) => {
                let xs = f.free_var_list();
                Ok(self.comparison(c, &xs)?.selected)
            }
            _ => {
                let vars = f.free_var_list();
                let node = self.compile(f, &vars)?;
                Ok(self.filter(&node, &vars))
            }
        }
    }

    fn filter(&self, node: &Node, vars: &[Var]) -> TypeSet {
        let types = self
            .all_types(vars)
            .into_iter()
            .filter(|p| {
                let offsets = p.atom_offsets();
                node.eval(p, &offsets)
            })
            .collect();
        TypeSet::new(Arc::clone(self.table.sig()), vars.to_vec(), types)
    }

    fn compile(&mut self, f: &Formula, vars: &[Var]) -> Result<Node> {
        let var = |v: &Var| vars.iter().position(|w| w == v).ok_or_else(|| Error::UnassignedVariable(v.clone()));
        Ok(match f {
            Formula::Top => Node::Const(true),
            Formula::Atom { rel, args } => Node::Atom(
                self.table.sig().index_of(rel).ok_or_else(|| Error::UnknownRelation(rel.clone()))?,
                args.iter().map(var).collect::<Result<_>>()?,
            ),
            Formula::Eq(a, b) => Node::Eq(var(a)?, var(b)?),
            Formula::Not(a) => Node::Not(Box::new(self.compile(a, vars)?)),
            Formula::And(a, b) => Node::And(Box::new(self.compile(a, vars)?), Box::new(self.compile(b, vars)?)),
            Formula::Or(a, b) => Node::Or(Box::new(self.compile(a, vars)?), Box::new(self.compile(b, vars)?)),
            Formula::Implies(a, b) => {
                Node::Implies(Box::new(self.compile(a, vars)?), Box::new(self.compile(b, vars)?))
            }
            Formula::Iff(a, b) => Node::Iff(Box::new(self.compile(a, vars)?), Box::new(self.compile(b, vars)?)),
            Formula::Exists(..) | Formula::Compare(_) => Node::Child(self.set(f)?),
        })
    }

    /// `∃y` over a set: keep each `q` of positive mass with some
    /// positive-mass extension in the set.
    fn exists_step(&mut self, set: &TypeSet, y: &str) -> Result<TypeSet> {
        let rest: Vec<Var> = set.vars.iter().filter(|v| *v != y).cloned().collect();
        let mut verdict: BTreeMap<CompleteAtomicType, bool> = BTreeMap::new();
        for p in &set.types {
            let q = restrict_arc(p, &set.sig, &rest)?;
            if verdict.get(&q) == Some(&true) {
                continue;
            }
            let keep = !self.mass(p)?.is_zero() && !self.mass(&q)?.is_zero();
            let slot = verdict.entry(q).or_insert(false);
            *slot |= keep;
        }
        let types = verdict.into_iter().filter_map(|(q, keep)| keep.then_some(q)).collect();
        Ok(TypeSet::new(Arc::clone(&set.sig), rest, types))
    }

    fn comparison(&mut self, c: &Comparison, xs: &[Var]) -> Result<ComparisonAnalysis> {
        let mut w: Vec<Var> = xs.to_vec();
        w.extend(c.bound.iter().cloned());
        let nodes = [&c.num1, &c.den1, &c.num2, &c.den2].map(|part| self.compile(part, &w));
        let [num1, den1, num2, den2] = nodes;
        let (num1, den1, num2, den2) = (num1?, den1?, num2?, den2?);
        let types = self.all_types(&w);
        let mut member = Vec::with_capacity(types.len());
        for p in &types {
            let offsets = p.atom_offsets();
            let d1 = den1.eval(p, &offsets);
            let d2 = den2.eval(p, &offsets);
            member.push([d1 && num1.eval(p, &offsets), d1, d2 && num2.eval(p, &offsets), d2]);
        }
        let sig = Arc::clone(self.table.sig());
        let empty = |counts| ComparisonAnalysis {
            xs: xs.to_vec(),
            bound: c.bound.clone(),
            rows: Vec::new(),
            starred_rows: Vec::new(),
            selected: TypeSet::new(Arc::clone(&sig), xs.to_vec(), Vec::new()),
            counts,
        };
        if !member.iter().any(|m| m[1]) || !member.iter().any(|m| m[3]) {
            return Ok(empty(OpCounts::default()));
        }
        let rows = self.gamma_rows(&types, &member, 0, 1, xs, &c.bound)?;
        let starred = self.gamma_rows(&types, &member, 2, 3, xs, &c.bound)?;

        // Merge-join the two sorted parameter lists.
        let mut selected = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < rows.len() && j < starred.len() {
            let (a, b) = (&rows[i], &starred[j]);
            self.counts.lit_cmp += a.t.literal_count().max(1);
            match a.t.cmp(&b.t) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let (lhs, rhs) = match c.side {
                        Side::Left => (&c.r + &a.gamma, b.gamma.clone()),
                        Side::Right => (a.gamma.clone(), &b.gamma + &c.r),
                    };
                    self.counts.num_cmp += 1;
                    if lhs == rhs {
                        let (alpha, beta) = match c.side {
                            Side::Left => (b.gamma.clone(), a.gamma.clone()),
                            Side::Right => (a.gamma.clone(), b.gamma.clone()),
                        };
                        return Err(Error::Critical(Box::new(Witness { r: c.r.clone(), alpha, beta })));
                    }
                    if lhs > rhs {
                        selected.push(a.t.clone());
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(ComparisonAnalysis {
            xs: xs.to_vec(),
            bound: c.bound.clone(),
            rows,
            starred_rows: starred,
            selected: TypeSet::new(sig, xs.to_vec(), selected),
            counts: self.counts,
        })
    }

    /// One row per positive-mass parameter type with a denominator realization.
    fn gamma_rows(
        &mut self,
        types: &[CompleteAtomicType],
        member: &[[bool; 4]],
        num: usize,
        den: usize,
        xs: &[Var],
        ys: &[Var],
    ) -> Result<Vec<GammaRow>> {
        struct Acc {
            e: usize,
            beta: Rational,
            l: usize,
            d: Option<usize>,
            alpha: Rational,
            m: usize,
        }
        let sig = Arc::clone(self.table.sig());
        let mut base: HashMap<TypeKey, Rational> = HashMap::new();
        let mut groups: BTreeMap<CompleteAtomicType, Acc> = BTreeMap::new();
        for (p, m) in types.iter().zip(member) {
            if !m[den] {
                continue;
            }
            let t = restrict_arc(p, &sig, xs)?;
            let tm = match base.get(&t.key()) {
                Some(v) => v.clone(),
                None => {
                    let v = self.mass(&t)?;
                    base.insert(t.key(), v.clone());
                    self.counts.num_cmp += 1;
                    v
                }
            };
            if tm.is_zero() {
                continue;
            }
            let pm = self.mass(p)?;
            self.counts.num_cmp += 2;
            if pm.is_zero() {
                continue;
            }
            self.counts.arith += p.relation_literal_count() + 2;
            let cond = pm / &tm;
            let dim = dimension(p, ys);
            let acc = groups.entry(t).or_insert(Acc { e: 0, beta: zero(), l: 0, d: None, alpha: zero(), m: 0 });
            if dim > acc.e || acc.l == 0 {
                acc.e = dim;
                acc.beta = zero();
                acc.l = 0;
            }
            if dim == acc.e {
                acc.beta += &cond;
                acc.l += 1;
            }
            if m[num] {
                match acc.d {
                    Some(d) if dim < d => {}
                    Some(d) if dim == d => {
                        acc.alpha += &cond;
                        acc.m += 1;
                    }
                    _ => {
                        acc.d = Some(dim);
                        acc.alpha = cond;
                        acc.m = 1;
                    }
                }
            }
        }
        let rows = groups
            .into_iter()
            .map(|(t, a)| {
                self.counts.arith += 1;
                self.counts.num_cmp += 2;
                let d = a.d.unwrap_or(0);
                let gamma = match a.d {
                    Some(d) if d == a.e && d > 0 => &a.alpha / &a.beta,
                    Some(d) if d == a.e => rat(a.m as i64, a.l as i64),
                    _ => zero(),
                };
                GammaRow { t, e: a.e, beta: a.beta, l: a.l, d, alpha: a.alpha, m: a.m, gamma }
            })
            .collect();
        Ok(rows)
    }
}

fn check_k(f: &Formula, k: usize) -> Result<()> {
    let size = f.free_vars().len() + f.quantifier_rank();
    if size > k {
        return Err(Error::BoundExceeded { what: "free variables + quantifier rank".into(), value: size, bound: k });
    }
    Ok(())
}

fn check_noncritical(table: &TypeProbTable, f: &Formula) -> Result<()> {
    if f.threshold_constants().is_empty() {
        return Ok(());
    }
    match table.is_noncritical(f)?.witnesses.into_iter().next() {
        Some(w) => Err(Error::Critical(Box::new(w))),
        None => Ok(()),
    }
}

fn check_sig(table: &TypeProbTable, f: &Formula) -> Result<()> {
    f.check_signature(table.sig())
}

/// The type set `f` is almost surely equivalent to, over its sorted free variables.
pub fn eliminate_set(table: &TypeProbTable, f: &Formula, k: usize) -> Result<TypeSet> {
    Ok(eliminate_with_cost(table, f, k)?.0)
}

/// Like [`eliminate_set`], also returning the tallies summed over all comparisons.
pub fn eliminate_with_cost(table: &TypeProbTable, f: &Formula, k: usize) -> Result<(TypeSet, OpCounts)> {
    check_sig(table, f)?;
    check_k(f, k)?;
    check_noncritical(table, f)?;
    let mut engine = Engine { table, counts: OpCounts::default() };
    let set = engine.set(f)?;
    Ok((set, engine.counts))
}

/// A quantifier-free formula almost surely equivalent to `f`, in canonical form.
pub fn eliminate(table: &TypeProbTable, f: &Formula) -> Result<Formula> {
    Ok(eliminate_set(table, f, table.bounds().k)?.to_formula())
}

fn sorted_vars(xs: &[Var]) -> Result<Vec<Var>> {
    let set: BTreeSet<Var> = xs.iter().cloned().collect();
    if set.len() != xs.len() {
        let mut seen = BTreeSet::new();
        let dup = xs.iter().find(|x| !seen.insert(*x)).expect("duplicate exists");
        return Err(Error::RepeatedBoundVariable(dup.clone()));
    }
    Ok(set.into_iter().collect())
}

fn check_scope(f: &Formula, xs: &[Var]) -> Result<()> {
    match f.free_vars().into_iter().find(|v| !xs.contains(v)) {
        Some(v) => Err(Error::UnassignedVariable(v)),
        None => Ok(()),
    }
}

/// `∃y body` for a quantifier-free body, as a type disjunction over `xs`.
pub fn eliminate_existential(table: &TypeProbTable, body: &Formula, y: &str, xs: &[Var]) -> Result<Formula> {
    if !body.is_quantifier_free() {
        return Err(Error::NotQuantifierFree);
    }
    check_sig(table, body)?;
    let xs = sorted_vars(xs)?;
    let mut all = xs.clone();
    if !all.iter().any(|v| v == y) {
        all.push(y.to_string());
    }
    let all = sorted_vars(&all)?;
    check_scope(body, &all)?;
    let mut engine = Engine { table, counts: OpCounts::default() };
    let node = engine.compile(body, &all)?;
    let set = engine.filter(&node, &all);
    let set = if xs.iter().any(|v| v == y) { set } else { engine.exists_step(&set, y)? };
    Ok(set.to_formula())
}

/// Decides a comparison with quantifier-free parts, parameterized by `xs`.
pub fn eliminate_comparison(table: &TypeProbTable, comp: &Comparison, xs: &[Var]) -> Result<ComparisonAnalysis> {
    if comp.parts().iter().any(|p| !p.is_quantifier_free()) {
        return Err(Error::NotQuantifierFree);
    }
    let f = Formula::compare(comp.clone());
    check_sig(table, &f)?;
    let xs = sorted_vars(xs)?;
    check_scope(&f, &xs)?;
    if let Some(y) = comp.bound.iter().find(|y| xs.contains(y)) {
        return Err(Error::RepeatedBoundVariable(y.clone()));
    }
    Engine { table, counts: OpCounts::default() }.comparison(comp, &xs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitResult {
    pub qf: Formula,
    /// Limit probability for tuples with the requested identity pattern.
    pub d: Rational,
    /// Limit probability for every identity pattern of the free variables.
    pub table: Vec<(String, Rational)>,
}

/// Parses `distinct` or a comma-separated list of equalities `x=y` into a
/// class labelling of `vars`.
pub fn parse_pattern(pattern: &str, vars: &[Var]) -> Result<Vec<usize>> {
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let pattern = pattern.trim();
    if !(pattern.is_empty() || pattern == "distinct") {
        for eq in pattern.split(',') {
            let (a, b) = eq.split_once('=').ok_or_else(|| Error::Syntax {
                pos: 0,
                message: format!("pattern item `{eq}` is not of the form x=y"),
            })?;
            let idx = |v: &str| {
                vars.iter().position(|w| w == v.trim()).ok_or_else(|| Error::UnassignedVariable(v.trim().to_string()))
            };
            let (ra, rb) = (idx(a)?, idx(b)?);
            let (ra, rb) = (find(&mut parent, ra), find(&mut parent, rb));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let labels: Vec<usize> = (0..vars.len()).map(|i| find(&mut parent, i)).collect();
    Ok(normalize_classes(&labels).0)
}

/// Renders a class labelling as a pattern string accepted by [`parse_pattern`].
pub fn format_pattern(classes: &[usize], vars: &[Var]) -> String {
    let mut eqs = Vec::new();
    for (i, &c) in classes.iter().enumerate() {
        if let Some(rep) = classes.iter().position(|&d| d == c).filter(|&rep| rep < i) {
            eqs.push(format!("{}={}", vars[rep], vars[i]));
        }
    }
    if eqs.is_empty() {
        "distinct".into()
    } else {
        eqs.join(",")
    }
}

/// Limit of `P_n(f(a))` for tuples `a` whose equalities follow `pattern`.
pub fn limit_probability(table: &TypeProbTable, f: &Formula, pattern: &str) -> Result<LimitResult> {
    let set = eliminate_set(table, f, table.bounds().k)?;
    let vars = set.vars().to_vec();
    let wanted = parse_pattern(pattern, &vars)?;
    let mut by_pattern: BTreeMap<Vec<usize>, Rational> =
        partitions(vars.len()).into_iter().map(|c| (c, zero())).collect();
    for p in set.types() {
        *by_pattern.get_mut(p.classes()).expect("every partition listed") += table.msf_p(p)?;
    }
    let d = by_pattern[&wanted].clone();
    Ok(LimitResult {
        qf: set.to_formula(),
        d,
        table: by_pattern.into_iter().map(|(c, d)| (format_pattern(&c, &vars), d)).collect(),
    })
}

/// The network with every guard replaced by an almost surely equivalent
/// quantifier-free guard; structure and probabilities are unchanged.
pub fn quantifier_free_network(net: &LiftedNetwork) -> Result<LiftedNetwork> {
    TypeProbTable::new(net)?.quantifier_free_network()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::{parse, render};
    use crate::rational::one;

    fn elim(net: &LiftedNetwork, text: &str) -> String {
        let t = TypeProbTable::new(net).unwrap();
        render(&eliminate(&t, &parse(text, net.sig()).unwrap()).unwrap())
    }

    fn vars(vs: &[&str]) -> Vec<Var> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn existential_examples() {
        assert_eq!(elim(&fixtures::coin(), "exists y : (P(y) & y!=x)"), "true");
        assert_eq!(elim(&fixtures::certain(), "exists y : ~P(y)"), "~true");
        assert_eq!(elim(&fixtures::coin(), "exists y : (P(y) & y=x)"), "P(x)");

        let graph = fixtures::graph();
        let t = TypeProbTable::new(&graph).unwrap();
        let body = parse("R(x,y)", graph.sig()).unwrap();
        assert_eq!(eliminate_existential(&t, &body, "y", &vars(&["x"])).unwrap(), Formula::Top);
        let never = parse("R(x,y) & ~R(x,y)", graph.sig()).unwrap();
        assert_eq!(render(&eliminate_existential(&t, &never, "y", &vars(&["x"])).unwrap()), "~true");
    }

    #[test]
    fn comparison_examples() {
        let coin = fixtures::coin();
        assert_eq!(elim(&coin, "[ ||P(y):y=y||{y} >= 1/3 ]"), "true");
        assert_eq!(elim(&coin, "[ ||P(y):y=y||{y} >= 2/3 ]"), "~true");
        let t = TypeProbTable::new(&coin).unwrap();
        let f = parse("[ ||P(y):y=y||{y} >= 1/2 ]", coin.sig()).unwrap();
        assert!(matches!(eliminate(&t, &f), Err(Error::Critical(_))));
    }

    #[test]
    fn comparison_rows() {
        let pq = fixtures::pq();
        let t = TypeProbTable::new(&pq).unwrap();
        let Formula::Compare(c) = parse("[ ||Q(y):P(y)||{y} >= 61/100 ]", pq.sig()).unwrap() else { panic!() };
        let a = eliminate_comparison(&t, &c, &[]).unwrap();
        assert_eq!(a.rows.len(), 1);
        assert_eq!(a.rows[0].gamma, rat(3, 4));
        assert_eq!(a.rows[0].beta, rat(1, 2));
        assert_eq!(a.starred_rows[0].gamma, zero());
        assert_eq!(a.to_formula(), Formula::Top);
        let counts = cost_report(&a);
        assert!(counts.arith >= 1 && counts.num_cmp >= 1 && counts.lit_cmp >= 1);
    }

    #[test]
    fn parameterized_comparison() {
        // Among the other elements, the proportion that share x's colour is 1/2,
        // and with x itself included the same holds in the limit.
        let coin = fixtures::coin();
        assert_eq!(elim(&coin, "[ ||P(y) <-> P(x):y=y||{y} >= 37/100 ]"), "true");
        // Proportion of y equal to x vanishes.
        assert_eq!(elim(&coin, "[ ||y=x:y=y||{y} >= 37/100 ]"), "~true");
        // The left-hand form with the arguments reversed.
        assert_eq!(elim(&coin, "[ 1/3 + ||P(y):y=y||{y} >= ||P(y):y=y||{y} ]"), "true");
        assert_eq!(elim(&coin, "[ ||P(y):y=y||{y} >= ||P(y):y=y||{y} + 1/3 ]"), "~true");
    }

    #[test]
    fn free_variable_output_is_canonical() {
        let pq = fixtures::pq();
        assert_eq!(elim(&pq, "P(x) & exists y : (Q(y) & y!=x)"), "(P(x) & ~Q(x)) | (P(x) & Q(x))");
        assert_eq!(elim(&pq, "P(x) | ~P(x)"), "true");
        assert_eq!(elim(&pq, "x!=x"), "~true");
    }

    #[test]
    fn idempotent() {
        let pq = fixtures::pq();
        let t = TypeProbTable::new(&pq).unwrap();
        for text in ["exists y : (Q(y) & y=x)", "P(x) -> exists y : (P(y) & ~Q(y) & x!=y)", "Q(x) & P(y)"] {
            let once = eliminate(&t, &parse(text, pq.sig()).unwrap()).unwrap();
            assert_eq!(eliminate(&t, &once).unwrap(), once, "{text}");
        }
    }

    #[test]
    fn limit_examples() {
        let pq = fixtures::pq();
        let t = TypeProbTable::new(&pq).unwrap();
        let q = parse("Q(x)", pq.sig()).unwrap();
        assert_eq!(limit_probability(&t, &q, "distinct").unwrap().d, rat(1, 2));
        let graph = fixtures::graph();
        let tg = TypeProbTable::new(&graph).unwrap();
        let s = parse("exists x, y : (x!=y & R(x,y) & ~R(y,x))", graph.sig()).unwrap();
        assert_eq!(limit_probability(&tg, &s, "").unwrap().d, one());
        let never = parse("x!=x", pq.sig()).unwrap();
        assert_eq!(limit_probability(&t, &never, "distinct").unwrap().d, zero());

        let loopy = parse("R(x,y)", graph.sig()).unwrap();
        let res = limit_probability(&tg, &loopy, "x=y").unwrap();
        assert_eq!(res.d, rat(1, 2));
        assert_eq!(res.table, vec![("x=y".to_string(), rat(1, 2)), ("distinct".to_string(), rat(1, 2))]);
    }

    #[test]
    fn patterns() {
        let vs = vars(&["x", "y", "z"]);
        assert_eq!(parse_pattern("distinct", &vs).unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_pattern("x=z", &vs).unwrap(), vec![0, 1, 0]);
        assert_eq!(parse_pattern("z=y, y=x", &vs).unwrap(), vec![0, 0, 0]);
        assert!(parse_pattern("x=w", &vs).is_err());
        assert_eq!(format_pattern(&[0, 1, 0], &vs), "x=z");
        assert_eq!(format_pattern(&[0, 0, 0], &vs), "x=y,x=z");
    }

    #[test]
    fn qf_network_examples() {
        let qf = quantifier_free_network(&fixtures::exists_guard()).unwrap();
        let guards: Vec<String> = qf.relation("Q").unwrap().rules.iter().map(|r| render(&r.guard)).collect();
        assert_eq!(guards, ["true", "~true"]);
        let same = quantifier_free_network(&fixtures::pq()).unwrap();
        assert_eq!(same, fixtures::pq());
        let prop = quantifier_free_network(&fixtures::proportion_guard("337/1000")).unwrap();
        let guards: Vec<String> = prop.relation("Q").unwrap().rules.iter().map(|r| render(&r.guard)).collect();
        assert_eq!(guards, ["true", "~true"]);
    }

    #[test]
    fn k_bound() {
        let graph = fixtures::graph();
        let t = TypeProbTable::new(&graph).unwrap();
        let f = parse("exists a, b, c, d, e : R(a,e)", graph.sig()).unwrap();
        assert!(matches!(eliminate(&t, &f), Err(Error::BoundExceeded { .. })));
    }
}
