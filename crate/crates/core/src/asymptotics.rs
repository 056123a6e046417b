//! Asymptotic type probabilities, critical numbers and the noncriticality check.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::atomic_types::{enumerate_types, partitions, restrict_arc, CompleteAtomicType, QfProgram};
use crate::eliminator;
use crate::error::{Error, Result};
use crate::formula::{Formula, Signature, Var};
use crate::network::{arg_vars, LiftedNetwork, RelationSpec, Rule};
use crate::rational::{one, rat, zero, Rational};

/// Limits guarding the exponential parts of the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Largest `m` for which critical numbers are computed.
    pub m: usize,
    /// Largest `|free variables| + quantifier rank` accepted by elimination.
    pub k: usize,
    /// Largest number of intermediate (numerator, denominator) states or
    /// fractions materialized while enumerating critical numbers.
    pub budget: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { m: 4, k: 4, budget: 2_000_000 }
    }
}

struct StarRule {
    guard: Formula,
    program: QfProgram,
    prob: Rational,
    one_minus: Rational,
}

struct StarRelation {
    index: usize,
    arity: usize,
    parents: BTreeSet<String>,
    rules: Vec<StarRule>,
}

type TypeKey = (Vec<usize>, Vec<u64>);

/// Asymptotic probabilities of complete atomic types under a network whose
/// guards have been replaced by quantifier-free equivalents.
pub struct TypeProbTable {
    net: LiftedNetwork,
    bounds: Bounds,
    sig: Arc<Signature>,
    relations: Vec<StarRelation>, // signature order
    memo: Mutex<HashMap<TypeKey, Rational>>,
    critical: Mutex<BTreeMap<usize, Arc<CriticalSet>>>,
}

impl TypeProbTable {
    pub fn new(net: &LiftedNetwork) -> Result<Self> {
        Self::with_bounds(net, Bounds::default())
    }

    /// Eliminates quantified guards relation by relation: a guard of `R` is
    /// eliminated over the subnetwork spanned by the ancestors of `R`'s parents.
    pub fn with_bounds(net: &LiftedNetwork, bounds: Bounds) -> Result<Self> {
        let sig = net.sig().clone();
        let mut relations = Vec::new();
        for spec in net.relations() {
            relations.push(Self::star_relation(net, spec, &sig, bounds)?);
        }
        Ok(TypeProbTable {
            net: net.clone(),
            bounds,
            sig: Arc::new(sig),
            relations,
            memo: Mutex::new(HashMap::new()),
            critical: Mutex::new(BTreeMap::new()),
        })
    }

    fn star_relation(net: &LiftedNetwork, spec: &RelationSpec, sig: &Signature, bounds: Bounds) -> Result<StarRelation> {
        let vars = spec.arg_vars();
        let mut parents = spec.parents.clone();
        let mut starred = Vec::new();
        if spec.rules.iter().all(|r| r.guard.is_quantifier_free()) {
            starred = spec.rules.iter().map(|r| r.guard.clone()).collect();
        } else {
            let closure = net.ancestor_closure(spec.parents.iter().map(String::as_str));
            let sub = net.subnetwork(&closure)?;
            let sub_table = TypeProbTable::with_bounds(&sub, bounds)?;
            let parent_sig = sig.restrict(spec.parents.iter().map(String::as_str));
            for rule in &spec.rules {
                let set = eliminator::eliminate_set(&sub_table, &rule.guard, bounds.k)?;
                match set.project_to(&parent_sig) {
                    Some(projected) => starred.push(projected.to_formula()),
                    None => {
                        // The eliminated guard depends on non-parent ancestors.
                        parents.extend(closure.names().map(str::to_string));
                        starred.push(set.to_formula());
                    }
                }
            }
        }
        let rules = spec
            .rules
            .iter()
            .zip(starred)
            .map(|(rule, guard)| {
                Ok(StarRule {
                    program: QfProgram::compile(&guard, sig, &vars)?,
                    guard,
                    prob: rule.prob.clone(),
                    one_minus: one() - &rule.prob,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StarRelation { index: sig.index_of(&spec.name).expect("in sig"), arity: spec.arity, parents, rules })
    }

    pub fn network(&self) -> &LiftedNetwork {
        &self.net
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    /// The quantifier-free guards, per relation.
    pub fn starred_guards(&self) -> BTreeMap<String, Vec<Formula>> {
        self.net
            .relations()
            .zip(&self.relations)
            .map(|(spec, star)| (spec.name.clone(), star.rules.iter().map(|r| r.guard.clone()).collect()))
            .collect()
    }

    /// The network with every guard replaced by its quantifier-free equivalent.
    pub fn quantifier_free_network(&self) -> Result<LiftedNetwork> {
        let specs = self
            .net
            .relations()
            .zip(&self.relations)
            .map(|(spec, star)| RelationSpec {
                name: spec.name.clone(),
                arity: spec.arity,
                parents: star.parents.clone(),
                rules: star.rules.iter().map(|r| Rule { guard: r.guard.clone(), prob: r.prob.clone() }).collect(),
            })
            .collect();
        LiftedNetwork::new(specs)
    }

    /// Asymptotic probability that a tuple realizes `p`: one factor `μ` or
    /// `1 − μ` per relation atom over the classes of `p`, chosen by the unique
    /// quantifier-free guard that `p` satisfies on that atom's arguments.
    pub fn msf_p(&self, p: &CompleteAtomicType) -> Result<Rational> {
        if p.sig() != &*self.sig {
            return Err(Error::Signature(format!("type over {} but network over {}", p.sig(), self.sig)));
        }
        let key = p.key();
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(v.clone());
        }
        let v = self.compute_msf_p(p)?;
        self.memo.lock().expect("memo lock").insert(key, v.clone());
        Ok(v)
    }

    fn compute_msf_p(&self, p: &CompleteAtomicType) -> Result<Rational> {
        let nc = p.n_classes();
        let offsets = p.atom_offsets();
        let mut acc = one();
        for rel in &self.relations {
            for t in 0..nc.pow(rel.arity as u32) {
                let tuple = crate::evaluator::decode(t, nc, rel.arity);
                let mut chosen = None;
                for (i, rule) in rel.rules.iter().enumerate() {
                    let holds = rel.rules.len() == 1 && rule.guard == Formula::Top
                        || rule.program.eval_with(&|v| tuple[v], &|r, args| p.holds_rel(&offsets, r, args));
                    if holds {
                        if chosen.is_some() {
                            return Err(Error::Network(format!(
                                "two guards of `{}` hold on type {p}",
                                self.sig.names().nth(rel.index).unwrap_or("?")
                            )));
                        }
                        chosen = Some(i);
                    }
                }
                let rule = &rel.rules[chosen.ok_or_else(|| {
                    Error::Network(format!("no guard of `{}` holds on type {p}", self.sig.names().nth(rel.index).unwrap_or("?")))
                })?];
                if p.holds_rel(&offsets, rel.index, &tuple) {
                    acc *= &rule.prob;
                } else {
                    acc *= &rule.one_minus;
                }
                if acc.is_zero() {
                    return Ok(acc);
                }
            }
        }
        Ok(acc)
    }

    /// `msfP(p | q)` for `q` the restriction of `p` to a prefix of its variables.
    pub fn msf_p_cond(&self, p: &CompleteAtomicType, q: &CompleteAtomicType) -> Result<Rational> {
        let denom = self.msf_p(q)?;
        if denom.is_zero() {
            return Err(Error::ZeroMass);
        }
        Ok(self.msf_p(p)? / denom)
    }

    /// The `m`-critical numbers (memoized per `m`).
    pub fn critical_numbers(&self, m: usize) -> Result<Arc<CriticalSet>> {
        if m > self.bounds.m {
            return Err(Error::BoundExceeded { what: "m".into(), value: m, bound: self.bounds.m });
        }
        if let Some(c) = self.critical.lock().expect("critical lock").get(&m) {
            return Ok(Arc::clone(c));
        }
        let set = Arc::new(self.compute_critical_numbers(m)?);
        self.critical.lock().expect("critical lock").insert(m, Arc::clone(&set));
        Ok(set)
    }

    fn compute_critical_numbers(&self, m: usize) -> Result<CriticalSet> {
        let mut values: BTreeSet<Rational> = [zero(), one()].into_iter().collect();
        let budget = self.bounds.budget;

        // (a) ratios of sums of conditional extension masses over a common base type
        let mut multisets: HashSet<Vec<(Rational, usize)>> = HashSet::new();
        for d in 0..m {
            for k in 1..=m - d {
                let vars: Vec<Var> = (1..=d + k).map(|i| format!("v{i}")).collect();
                let xs = &vars[..d];
                let mut groups: BTreeMap<CompleteAtomicType, BTreeMap<Rational, usize>> = BTreeMap::new();
                let mut base_mass: HashMap<CompleteAtomicType, Rational> = HashMap::new();
                for p in enumerate_types(&self.sig, &vars) {
                    let mass = self.msf_p(&p)?;
                    if mass.is_zero() {
                        continue;
                    }
                    let q = restrict_arc(&p, &self.sig, xs)?;
                    let qm = match base_mass.get(&q) {
                        Some(v) => v.clone(),
                        None => {
                            let v = self.msf_p(&q)?;
                            base_mass.insert(q.clone(), v.clone());
                            v
                        }
                    };
                    *groups.entry(q).or_default().entry(mass / qm).or_insert(0) += 1;
                }
                multisets.extend(groups.into_values().map(|g| g.into_iter().collect::<Vec<_>>()));
            }
        }
        for ms in &multisets {
            for r in subset_sum_ratios(ms, budget)? {
                values.insert(r);
            }
            if values.len() > budget {
                return Err(Error::BoundExceeded { what: "critical-number count".into(), value: values.len(), bound: budget });
            }
        }

        // (b) fractions l'/l with l up to the number of dimension-0 extension pairs
        let l_max = zero_dimension_pairs(&self.sig, m);
        let fractions = l_max.saturating_mul(l_max + 1) / 2;
        if fractions > budget {
            return Err(Error::BoundExceeded { what: "critical fractions".into(), value: fractions, bound: budget });
        }
        for l in 1..=l_max as i64 {
            for lp in 0..=l {
                values.insert(rat(lp, l));
            }
        }
        Ok(CriticalSet { m, values })
    }

    /// Whether no threshold of `f` is a difference of `l`-critical numbers,
    /// `l = |free variables| + quantifier rank`.
    pub fn is_noncritical(&self, f: &Formula) -> Result<Noncriticality> {
        let thresholds = f.threshold_constants();
        if thresholds.is_empty() {
            return Ok(Noncriticality { witnesses: Vec::new() });
        }
        let l = f.free_vars().len() + f.quantifier_rank();
        let crit = self.critical_numbers(l)?;
        let mut witnesses = Vec::new();
        for r in &thresholds {
            for alpha in &crit.values {
                let beta = alpha - r;
                if crit.values.contains(&beta) {
                    witnesses.push(Witness { r: r.clone(), alpha: alpha.clone(), beta });
                }
            }
        }
        Ok(Noncriticality { witnesses })
    }

    /// A rational `ε` such that `f` is `ε`-noncritical but not `2ε`-noncritical.
    pub fn epsilon_margin(&self, f: &Formula) -> Result<Margin> {
        let check = self.is_noncritical(f)?;
        if let Some(w) = check.witnesses.into_iter().next() {
            return Err(Error::Critical(Box::new(w)));
        }
        let thresholds = f.threshold_constants();
        if thresholds.is_empty() {
            return Ok(Margin::Unbounded);
        }
        let l = f.free_vars().len() + f.quantifier_rank();
        let crit = self.critical_numbers(l)?;
        let pairs = crit.len().saturating_mul(crit.len()).saturating_mul(thresholds.len());
        if pairs > self.bounds.budget {
            return Err(Error::BoundExceeded { what: "critical pairs".into(), value: pairs, bound: self.bounds.budget });
        }
        let constraints = margin_constraints(&thresholds, &crit.values);
        if constraints.is_empty() {
            return Ok(Margin::Unbounded);
        }
        Ok(Margin::Bounded(search_margin(&constraints)))
    }
}

/// Every ratio `Σ a_j v_j / Σ b_j v_j` with `0 ≤ a_j ≤ b_j ≤ c_j` and a positive denominator,
/// for a multiset of positive values `v_j` with multiplicities `c_j`.
fn subset_sum_ratios(multiset: &[(Rational, usize)], budget: usize) -> Result<BTreeSet<Rational>> {
    // Scale to integers so states hash cheaply.
    let lcm = multiset.iter().fold(BigInt::one(), |acc, (v, _)| num_integer::Integer::lcm(&acc, v.denom()));
    let ints: Vec<(BigInt, usize)> =
        multiset.iter().map(|(v, c)| ((v * Rational::from_integer(lcm.clone())).to_integer(), *c)).collect();
    let mut states: HashSet<(BigInt, BigInt)> = HashSet::from([(BigInt::zero(), BigInt::zero())]);
    for (v, c) in &ints {
        let mut next = HashSet::new();
        for (n, d) in &states {
            for b in 0..=*c {
                for a in 0..=b {
                    next.insert((n + v * BigInt::from(a), d + v * BigInt::from(b)));
                }
                if next.len() > budget {
                    return Err(Error::BoundExceeded {
                        what: "critical-number states".into(),
                        value: next.len(),
                        bound: budget,
                    });
                }
            }
        }
        states = next;
    }
    Ok(states.into_iter().filter(|(_, d)| !d.is_zero()).map(|(n, d)| Rational::new(n, d)).collect())
}

/// Number of pairs `(p(x1..x_m'), q(x1..x_d))`, `d < m' ≤ m`, where `q ⊆ p`
/// and `p` adds no new elements: each of `x_{d+1}..x_m'` equals one of the
/// `c` classes of `q`, so `p` is fixed by `q` and a map into its classes.
pub fn zero_dimension_pairs(sig: &Signature, m: usize) -> usize {
    let mut total = 0usize;
    for m_prime in 1..=m {
        for d in 1..m_prime {
            for classes in partitions(d) {
                let c = classes.iter().max().map_or(0, |x| x + 1);
                let atoms = crate::atomic_types::atom_count(sig, c);
                let types = 1usize.checked_shl(atoms as u32).unwrap_or(usize::MAX);
                total = total.saturating_add(types.saturating_mul(c.saturating_pow((m_prime - d) as u32)));
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalSet {
    pub m: usize,
    pub values: BTreeSet<Rational>,
}

impl CriticalSet {
    pub fn contains(&self, r: &Rational) -> bool {
        self.values.contains(r)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A threshold `r` that equals `alpha − beta` for critical `alpha`, `beta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub r: Rational,
    pub alpha: Rational,
    pub beta: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Noncriticality {
    /// Ordered by threshold, then by `alpha`.
    pub witnesses: Vec<Witness>,
}

impl Noncriticality {
    pub fn ok(&self) -> bool {
        self.witnesses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Margin {
    Bounded(Rational),
    Unbounded,
}

/// With `s = (1+2ε)²`, the implications of ε-noncriticality become
/// `β s² − r s − α < 0` (when `r + α > β`) and `β s² + r s − α < 0` (when
/// `α > β + r`); both hold at `s = 1` and fail beyond a root, unless the
/// left side never becomes positive.
struct Constraint {
    beta: Rational,
    linear: Rational,
    alpha: Rational,
}

impl Constraint {
    fn holds(&self, s: &Rational) -> bool {
        &self.beta * s * s + &self.linear * s - &self.alpha < zero()
    }
}

fn margin_constraints(thresholds: &BTreeSet<Rational>, crit: &BTreeSet<Rational>) -> Vec<Constraint> {
    let mut out = Vec::new();
    for r in thresholds {
        for alpha in crit {
            for beta in crit {
                // s grows without bound only if the quadratic and linear terms vanish or help
                if r + alpha > *beta && beta > &zero() {
                    out.push(Constraint { beta: beta.clone(), linear: -r.clone(), alpha: alpha.clone() });
                }
                if *alpha > beta + r && (beta > &zero() || r > &zero()) {
                    out.push(Constraint { beta: beta.clone(), linear: r.clone(), alpha: alpha.clone() });
                }
            }
        }
    }
    out
}

fn search_margin(constraints: &[Constraint]) -> Rational {
    let two = rat(2, 1);
    let holds = |eps: &Rational| {
        let root = one() + &two * eps;
        let s = &root * &root;
        constraints.iter().all(|c| c.holds(&s))
    };
    let mut eps = one();
    if holds(&eps) {
        while holds(&(&eps * &two)) {
            eps *= &two;
        }
    } else {
        while !holds(&eps) {
            eps /= &two;
        }
    }
    let (mut lo, mut hi) = (eps.clone(), eps * &two);
    for _ in 0..20 {
        let mid = (&lo + &hi) / &two;
        if holds(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// Free-function forms.

pub fn msf_p(table: &TypeProbTable, p: &CompleteAtomicType) -> Result<Rational> {
    table.msf_p(p)
}

pub fn msf_p_cond(table: &TypeProbTable, p: &CompleteAtomicType, q: &CompleteAtomicType) -> Result<Rational> {
    table.msf_p_cond(p, q)
}

pub fn critical_numbers(net: &LiftedNetwork, m: usize) -> Result<CriticalSet> {
    Ok((*TypeProbTable::new(net)?.critical_numbers(m)?).clone())
}

pub fn is_noncritical(net: &LiftedNetwork, f: &Formula) -> Result<Noncriticality> {
    if f.threshold_constants().is_empty() {
        return Ok(Noncriticality { witnesses: Vec::new() });
    }
    TypeProbTable::new(net)?.is_noncritical(f)
}

pub fn epsilon_margin(net: &LiftedNetwork, f: &Formula) -> Result<Margin> {
    if f.threshold_constants().is_empty() {
        return Ok(Margin::Unbounded);
    }
    TypeProbTable::new(net)?.epsilon_margin(f)
}

/// Guard variables of a relation of the given arity, re-exported for callers
/// building types over `x1..xk`.
pub fn guard_vars(arity: usize) -> Vec<Var> {
    arg_vars(arity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic_types::to_type_disjunction;
    use crate::fixtures;
    use crate::formula::parse;

    fn vars(vs: &[&str]) -> Vec<Var> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    fn one_type(table: &TypeProbTable, text: &str, vs: &[&str]) -> CompleteAtomicType {
        let f = parse(text, table.sig()).unwrap();
        let ts = to_type_disjunction(&f, table.sig(), &vars(vs)).unwrap();
        assert_eq!(ts.len(), 1, "{text} is not a complete type");
        ts.into_iter().next().unwrap()
    }

    #[test]
    fn pq_one_variable_masses() {
        let t = TypeProbTable::new(&fixtures::pq()).unwrap();
        assert_eq!(t.msf_p(&one_type(&t, "P(x) & Q(x)", &["x"])).unwrap(), rat(3, 8));
        assert_eq!(t.msf_p(&one_type(&t, "P(x) & ~Q(x)", &["x"])).unwrap(), rat(1, 8));
        assert_eq!(t.msf_p(&one_type(&t, "~P(x) & Q(x)", &["x"])).unwrap(), rat(1, 8));
        assert_eq!(t.msf_p(&one_type(&t, "~P(x) & ~Q(x)", &["x"])).unwrap(), rat(3, 8));
    }

    #[test]
    fn empty_signature_mass_is_one() {
        let empty = LiftedNetwork::new(Vec::new()).unwrap();
        let t = TypeProbTable::new(&empty).unwrap();
        for p in enumerate_types(&Signature::empty(), &vars(&["x", "y"])) {
            assert_eq!(t.msf_p(&p).unwrap(), one());
        }
    }

    #[test]
    fn conditional_masses() {
        let coin = TypeProbTable::new(&fixtures::coin()).unwrap();
        let p = one_type(&coin, "P(x) & P(y) & x!=y", &["x", "y"]);
        let q = one_type(&coin, "P(x)", &["x"]);
        assert_eq!(coin.msf_p_cond(&p, &q).unwrap(), rat(1, 2));
        assert_eq!(coin.msf_p_cond(&q, &q).unwrap(), one());

        let pq = TypeProbTable::new(&fixtures::pq()).unwrap();
        let p = one_type(&pq, "P(x) & Q(x) & P(y) & ~Q(y) & x!=y", &["x", "y"]);
        let q = one_type(&pq, "P(x) & Q(x)", &["x"]);
        assert_eq!(pq.msf_p(&p).unwrap(), rat(3, 64));
        assert_eq!(pq.msf_p_cond(&p, &q).unwrap(), rat(1, 8));

        let certain = TypeProbTable::new(&fixtures::certain()).unwrap();
        let q0 = one_type(&certain, "~P(x)", &["x"]);
        assert_eq!(certain.msf_p_cond(&q0, &q0), Err(Error::ZeroMass));
    }

    #[test]
    fn masses_sum_to_one_per_identity_fragment() {
        for net in [fixtures::coin(), fixtures::pq(), fixtures::graph(), fixtures::exists_guard(), fixtures::chain()] {
            let t = TypeProbTable::new(&net).unwrap();
            let vs = vars(&["x", "y"]);
            let mut sums: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
            for p in enumerate_types(t.sig(), &vs) {
                *sums.entry(p.classes().to_vec()).or_insert_with(zero) += t.msf_p(&p).unwrap();
            }
            assert!(sums.values().all(|s| *s == one()), "{sums:?}");
        }
    }

    #[test]
    fn critical_examples() {
        for net in [fixtures::coin(), fixtures::pq(), fixtures::graph()] {
            for m in 1..=2 {
                let c = critical_numbers(&net, m).unwrap();
                assert!(c.contains(&zero()) && c.contains(&one()));
            }
        }
        let coin = critical_numbers(&fixtures::coin(), 1).unwrap();
        assert_eq!(coin.values, [rat(0, 1), rat(1, 2), rat(1, 1)].into_iter().collect());
        let pq = critical_numbers(&fixtures::pq(), 1).unwrap();
        for v in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            assert!(pq.contains(&v), "{v}");
        }
    }

    #[test]
    fn critical_sets_grow_with_m() {
        let t = TypeProbTable::new(&fixtures::pq()).unwrap();
        let c1 = t.critical_numbers(1).unwrap();
        let c2 = t.critical_numbers(2).unwrap();
        assert!(c1.values.is_subset(&c2.values));
        assert!(c2.len() > c1.len());
    }

    #[test]
    fn bound_is_enforced() {
        let t = TypeProbTable::new(&fixtures::coin()).unwrap();
        assert!(matches!(t.critical_numbers(5), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn noncriticality_examples() {
        let coin = fixtures::coin();
        let half = parse("[ ||P(y):y=y||{y} >= 1/2 ]", coin.sig()).unwrap();
        let check = is_noncritical(&coin, &half).unwrap();
        assert!(!check.ok());
        assert_eq!(check.witnesses[0], Witness { r: rat(1, 2), alpha: rat(1, 2), beta: zero() });
        let third = parse("[ ||P(y):y=y||{y} >= 1/3 ]", coin.sig()).unwrap();
        assert!(is_noncritical(&coin, &third).unwrap().ok());
        let fo = parse("forall x : exists y : (P(y) & x!=y)", coin.sig()).unwrap();
        assert!(is_noncritical(&coin, &fo).unwrap().ok());
    }

    #[test]
    fn epsilon_margins() {
        let coin = fixtures::coin();
        let fo = parse("exists x : P(x)", coin.sig()).unwrap();
        assert_eq!(epsilon_margin(&coin, &fo).unwrap(), Margin::Unbounded);
        let half = parse("[ ||P(y):y=y||{y} >= 1/2 ]", coin.sig()).unwrap();
        assert!(matches!(epsilon_margin(&coin, &half), Err(Error::Critical(_))));

        let third = parse("[ ||P(y):y=y||{y} >= 1/3 ]", coin.sig()).unwrap();
        let Margin::Bounded(eps) = epsilon_margin(&coin, &third).unwrap() else { panic!("expected a bound") };
        assert!(eps > zero());
        let crit = critical_numbers(&coin, 1).unwrap();
        let thresholds = third.threshold_constants();
        let constraints = margin_constraints(&thresholds, &crit.values);
        let at = |e: &Rational| {
            let root = one() + rat(2, 1) * e;
            let s = &root * &root;
            constraints.iter().all(|c| c.holds(&s))
        };
        assert!(at(&eps));
        assert!(!at(&(&eps * rat(2, 1))));
        // Direct check of the two implications at the returned margin.
        let root = one() + rat(2, 1) * &eps;
        let s = &root * &root;
        let r = rat(1, 3);
        for a in &crit.values {
            for b in &crit.values {
                if &r + a > *b {
                    assert!(&r + a / &s > b * &s);
                }
                if *a > b + &r {
                    assert!(a / &s > b * &s + &r);
                }
            }
        }
    }

    #[test]
    fn zero_dimension_pair_counts() {
        let graph = Signature::new([("R", 2)]).unwrap();
        assert_eq!(zero_dimension_pairs(&graph, 1), 0);
        assert_eq!(zero_dimension_pairs(&graph, 2), 2);
        // m'=2,d=1: 2; m'=3,d=1: 2; m'=3,d=2: 2·1 + 16·2
        assert_eq!(zero_dimension_pairs(&graph, 3), 38);
    }
}
