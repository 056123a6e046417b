//! Finite structures and the truth relation of CPL on them.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, Side, Signature, Var};
use crate::rational::Rational;

/// A structure on the domain `{1..n}`. Internally elements are 0-based and
/// each relation is a dense bit table indexed by tuples in base `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteStructure {
    n: usize,
    sig: Signature,
    tables: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    n: usize,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl FiniteStructure {
    /// All relations empty.
    pub fn empty(sig: &Signature, n: usize) -> Self {
        let tables = sig.iter().map(|(_, a)| vec![false; n.pow(a as u32)]).collect();
        FiniteStructure { n, sig: sig.clone(), tables }
    }

    /// Builds a structure from 1-based tuples.
    pub fn from_tuples<'a, I>(sig: &Signature, n: usize, relations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Vec<Vec<usize>>)>,
    {
        let mut s = Self::empty(sig, n);
        for (rel, tuples) in relations {
            let r = sig.index_of(rel).ok_or_else(|| Error::UnknownRelation(rel.to_string()))?;
            let arity = sig.arity(rel).expect("indexed");
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::ArityMismatch { relation: rel.to_string(), expected: arity, found: t.len() });
                }
                if t.iter().any(|&e| e == 0 || e > n) {
                    return Err(Error::Structure(format!("tuple {t:?} of `{rel}` is outside the domain 1..{n}")));
                }
                let zero: Vec<usize> = t.iter().map(|e| e - 1).collect();
                s.set_index(r, &zero, true);
            }
        }
        Ok(s)
    }

    pub fn from_json(text: &str, sig: &Signature) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text).map_err(|e| Error::Structure(e.to_string()))?;
        Self::from_tuples(sig, file.n, file.relations.iter().map(|(k, v)| (k.as_str(), v.clone())))
    }

    /// `{"n": .., "relations": {"R": [[1,2], ..]}}` with 1-based elements, every relation listed.
    pub fn to_json_value(&self) -> serde_json::Value {
        let relations: BTreeMap<String, Vec<Vec<usize>>> =
            self.sig.names().map(|name| (name.to_string(), self.tuples(name))).collect();
        serde_json::to_value(StructureFile { n: self.n, relations }).expect("serializable")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    fn offset(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &e| acc * self.n + e)
    }

    /// Truth of relation number `r` (signature order) on a 0-based tuple.
    pub fn holds_index(&self, r: usize, tuple: &[usize]) -> bool {
        self.tables[r][self.offset(tuple)]
    }

    pub fn set_index(&mut self, r: usize, tuple: &[usize], value: bool) {
        let o = self.offset(tuple);
        self.tables[r][o] = value;
    }

    /// Truth of `rel` on a 1-based tuple.
    pub fn holds(&self, rel: &str, tuple: &[usize]) -> bool {
        let Some(r) = self.sig.index_of(rel) else { return false };
        let zero: Vec<usize> = tuple.iter().map(|e| e - 1).collect();
        self.holds_index(r, &zero)
    }

    /// Tuples of `rel`, 1-based, in lexicographic order.
    pub fn tuples(&self, rel: &str) -> Vec<Vec<usize>> {
        let Some(r) = self.sig.index_of(rel) else { return Vec::new() };
        let arity = self.sig.arity(rel).expect("indexed");
        self.tables[r]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| decode(i, self.n, arity).into_iter().map(|e| e + 1).collect())
            .collect()
    }

    /// Raw table of relation number `r`.
    pub fn table(&self, r: usize) -> &[bool] {
        &self.tables[r]
    }

    pub fn table_mut(&mut self, r: usize) -> &mut [bool] {
        &mut self.tables[r]
    }

    /// The reduct to a sub-signature.
    pub fn reduct(&self, sig: &Signature) -> Result<FiniteStructure> {
        if !sig.is_subset(&self.sig) {
            return Err(Error::Signature(format!("{sig} is not a sub-signature of {}", self.sig)));
        }
        let tables = sig.names().map(|name| self.tables[self.sig.index_of(name).expect("subset")].clone()).collect();
        Ok(FiniteStructure { n: self.n, sig: sig.clone(), tables })
    }
}

/// Decodes a base-`n` index into a 0-based tuple.
pub fn decode(mut i: usize, n: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = i % n.max(1);
        i /= n.max(1);
    }
    out
}

/// Variable assignment with 1-based domain elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub BTreeMap<Var, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `x=1,y=2` (empty string gives the empty assignment).
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (v, e) = part
                .split_once('=')
                .ok_or_else(|| Error::Structure(format!("assignment `{part}` is not of the form var=element")))?;
            let e: usize =
                e.trim().parse().map_err(|_| Error::Structure(format!("element `{}` is not a natural number", e.trim())))?;
            map.insert(v.trim().to_string(), e);
        }
        Ok(Assignment(map))
    }

    pub fn with(mut self, v: &str, e: usize) -> Self {
        self.0.insert(v.to_string(), e);
        self
    }

    pub fn get(&self, v: &str) -> Option<usize> {
        self.0.get(v).copied()
    }
}

impl<S: Into<String>> FromIterator<(S, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// A formula compiled for repeated evaluation: variables become slots in a
/// flat environment, relations become signature indices.
#[derive(Debug, Clone)]
pub struct Compiled {
    node: Node,
    slots: Vec<Var>,
    free: Vec<usize>,
    n_compares: usize,
}

#[derive(Debug, Clone)]
enum Node {
    Top,
    Atom(usize, Vec<usize>),
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Exists(Vec<usize>, Box<Node>),
    Compare(Box<CompareNode>),
}

#[derive(Debug, Clone)]
struct CompareNode {
    id: usize,
    r: Rational,
    side: Side,
    parts: [Node; 4],
    bound: Vec<usize>,
    free: Vec<usize>,
}

impl Compiled {
    pub fn new(f: &Formula, sig: &Signature) -> Result<Self> {
        f.check_signature(sig)?;
        let slots: Vec<Var> = f.all_vars().into_iter().collect();
        let slot = |v: &Var| slots.iter().position(|s| s == v).expect("collected");
        let mut n_compares = 0;
        let node = compile(f, sig, &slot, &mut n_compares);
        let free = f.free_vars().iter().map(slot).collect();
        Ok(Compiled { node, slots, free, n_compares })
    }

    pub fn free_vars(&self) -> impl Iterator<Item = &Var> + '_ {
        self.free.iter().map(|&s| &self.slots[s])
    }

    /// Truth in `a` under `asg` (1-based elements).
    pub fn eval(&self, a: &FiniteStructure, asg: &Assignment) -> Result<bool> {
        let mut env = vec![0usize; self.slots.len()];
        for &s in &self.free {
            let v = &self.slots[s];
            let e = asg.get(v).ok_or_else(|| Error::UnassignedVariable(v.clone()))?;
            if e == 0 || e > a.n {
                return Err(Error::Structure(format!("element {e} assigned to `{v}` is outside 1..{}", a.n)));
            }
            env[s] = e - 1;
        }
        Ok(self.eval_env(a, &mut env))
    }

    /// Truth with free variables bound positionally to 0-based elements
    /// (in the order of [`Compiled::free_vars`]).
    pub fn eval_tuple(&self, a: &FiniteStructure, tuple: &[usize]) -> bool {
        let mut env = vec![0usize; self.slots.len()];
        for (&s, &e) in self.free.iter().zip(tuple) {
            env[s] = e;
        }
        self.eval_env(a, &mut env)
    }

    fn eval_env(&self, a: &FiniteStructure, env: &mut [usize]) -> bool {
        let ctx = Ctx { a, memo: RefCell::new(vec![HashMap::new(); self.n_compares]) };
        ctx.eval(&self.node, env)
    }
}

fn compile(f: &Formula, sig: &Signature, slot: &dyn Fn(&Var) -> usize, next_id: &mut usize) -> Node {
    let b = |x: &Formula, next_id: &mut usize| Box::new(compile(x, sig, slot, next_id));
    match f {
        Formula::Top => Node::Top,
        Formula::Atom { rel, args } => Node::Atom(sig.index_of(rel).expect("checked"), args.iter().map(slot).collect()),
        Formula::Eq(x, y) => Node::Eq(slot(x), slot(y)),
        Formula::Not(x) => Node::Not(b(x, next_id)),
        Formula::And(x, y) => Node::And(b(x, next_id), b(y, next_id)),
        Formula::Or(x, y) => Node::Or(b(x, next_id), b(y, next_id)),
        Formula::Implies(x, y) => Node::Implies(b(x, next_id), b(y, next_id)),
        Formula::Iff(x, y) => Node::Iff(b(x, next_id), b(y, next_id)),
        Formula::Exists(vs, body) => Node::Exists(vs.iter().map(slot).collect(), b(body, next_id)),
        Formula::Compare(c) => {
            let id = *next_id;
            *next_id += 1;
            let parts = [
                compile(&c.num1, sig, slot, next_id),
                compile(&c.den1, sig, slot, next_id),
                compile(&c.num2, sig, slot, next_id),
                compile(&c.den2, sig, slot, next_id),
            ];
            Node::Compare(Box::new(CompareNode {
                id,
                r: c.r.clone(),
                side: c.side,
                parts,
                bound: c.bound.iter().map(slot).collect(),
                free: f.free_vars().iter().map(slot).collect(),
            }))
        }
    }
}

struct Ctx<'a> {
    a: &'a FiniteStructure,
    memo: RefCell<Vec<HashMap<Vec<usize>, bool>>>,
}

impl Ctx<'_> {
    fn eval(&self, node: &Node, env: &mut [usize]) -> bool {
        match node {
            Node::Top => true,
            Node::Atom(r, args) => {
                let idx = args.iter().fold(0, |acc, &s| acc * self.a.n + env[s]);
                self.a.tables[*r][idx]
            }
            Node::Eq(x, y) => env[*x] == env[*y],
            Node::Not(x) => !self.eval(x, env),
            Node::And(x, y) => self.eval(x, env) && self.eval(y, env),
            Node::Or(x, y) => self.eval(x, env) || self.eval(y, env),
            Node::Implies(x, y) => !self.eval(x, env) || self.eval(y, env),
            Node::Iff(x, y) => self.eval(x, env) == self.eval(y, env),
            Node::Exists(vs, body) => {
                let saved: Vec<usize> = vs.iter().map(|&s| env[s]).collect();
                let found = self.any_tuple(vs, env, &mut |env| self.eval(body, env));
                for (&s, v) in vs.iter().zip(saved) {
                    env[s] = v;
                }
                found
            }
            Node::Compare(c) => {
                let key: Vec<usize> = c.free.iter().map(|&s| env[s]).collect();
                if let Some(&v) = self.memo.borrow()[c.id].get(&key) {
                    return v;
                }
                let v = self.compare(c, env);
                self.memo.borrow_mut()[c.id].insert(key, v);
                v
            }
        }
    }

    /// Iterates over all assignments to `vs`, stopping early when `f` returns true.
    fn any_tuple(&self, vs: &[usize], env: &mut [usize], f: &mut dyn FnMut(&mut [usize]) -> bool) -> bool {
        let n = self.a.n;
        if n == 0 {
            return false;
        }
        for &s in vs {
            env[s] = 0;
        }
        loop {
            if f(env) {
                return true;
            }
            // odometer increment, last variable fastest
            let mut k = vs.len();
            loop {
                if k == 0 {
                    return false;
                }
                k -= 1;
                env[vs[k]] += 1;
                if env[vs[k]] < n {
                    break;
                }
                env[vs[k]] = 0;
            }
        }
    }

    fn compare(&self, c: &CompareNode, env: &mut [usize]) -> bool {
        let saved: Vec<usize> = c.bound.iter().map(|&s| env[s]).collect();
        let (mut n1, mut d1, mut n2, mut d2) = (0u64, 0u64, 0u64, 0u64);
        self.any_tuple(&c.bound, env, &mut |env| {
            if self.eval(&c.parts[1], env) {
                d1 += 1;
                if self.eval(&c.parts[0], env) {
                    n1 += 1;
                }
            }
            if self.eval(&c.parts[3], env) {
                d2 += 1;
                if self.eval(&c.parts[2], env) {
                    n2 += 1;
                }
            }
            false
        });
        for (&s, v) in c.bound.iter().zip(saved) {
            env[s] = v;
        }
        if d1 == 0 || d2 == 0 {
            return false;
        }
        let p1 = Rational::new(BigInt::from(n1), BigInt::from(d1));
        let p2 = Rational::new(BigInt::from(n2), BigInt::from(d2));
        match c.side {
            Side::Left => &c.r + p1 >= p2,
            Side::Right => p1 >= p2 + &c.r,
        }
    }
}

/// Truth of `f` in `a` under `asg`.
pub fn evaluate(a: &FiniteStructure, f: &Formula, asg: &Assignment) -> Result<bool> {
    Compiled::new(f, &a.sig)?.eval(a, asg)
}

/// The tuples over `ys` (1-based) making `f` true, given `asg` for the other free variables.
pub fn solution_set(a: &FiniteStructure, f: &Formula, asg: &Assignment, ys: &[Var]) -> Result<Vec<Vec<usize>>> {
    let compiled = Compiled::new(f, &a.sig)?;
    let mut out = Vec::new();
    let total = a.n.checked_pow(ys.len() as u32).ok_or_else(|| Error::Structure("too many tuples".into()))?;
    for i in 0..total {
        let tuple: Vec<usize> = decode(i, a.n, ys.len()).into_iter().map(|e| e + 1).collect();
        let mut local = asg.clone();
        for (y, &e) in ys.iter().zip(&tuple) {
            local.0.insert(y.clone(), e);
        }
        if compiled.eval(a, &local)? {
            out.push(tuple);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn vars(vs: &[&str]) -> Vec<Var> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn existential() {
        let sig = Signature::new([("P", 1)]).unwrap();
        let a = FiniteStructure::from_tuples(&sig, 2, [("P", vec![vec![1]])]).unwrap();
        assert!(evaluate(&a, &parse("exists x : P(x)", &sig).unwrap(), &Assignment::new()).unwrap());
        assert!(!evaluate(&a, &parse("forall x : P(x)", &sig).unwrap(), &Assignment::new()).unwrap());
    }

    #[test]
    fn empty_denominator_falsifies_both_directions() {
        let sig = Signature::new([("P", 1)]).unwrap();
        let a = FiniteStructure::empty(&sig, 3);
        let ge = parse("[ ||x=x : P(x)||{x} >= 0 ]", &sig).unwrap();
        let le = parse("[ 0 + ||x!=x : x=x||{x} >= ||x=x : P(x)||{x} ]", &sig).unwrap();
        assert!(!evaluate(&a, &ge, &Assignment::new()).unwrap());
        assert!(!evaluate(&a, &le, &Assignment::new()).unwrap());
        assert!(evaluate(&a, &ge.clone().negate(), &Assignment::new()).unwrap());
    }

    #[test]
    fn friendship_sentence() {
        let sig = Signature::new([("M", 1), ("F", 2)]).unwrap();
        let a = FiniteStructure::from_tuples(
            &sig,
            3,
            [("M", vec![vec![1]]), ("F", vec![vec![1, 2], vec![2, 1], vec![2, 3], vec![3, 2]])],
        )
        .unwrap();
        let f = parse("[ || [ ||M(y):F(x,y)||{y} >= 1/3 ] -> M(x) : x=x ||{x} >= 1/2 ]", &sig).unwrap();
        // x=1: no friend is M -> implication holds; x=2: 1/2 of friends are M but M(2) fails;
        // x=3: no friend is M. Two thirds of persons satisfy the implication.
        assert!(evaluate(&a, &f, &Assignment::new()).unwrap());
        let inner = parse("[ ||M(y):F(x,y)||{y} >= 1/3 ]", &sig).unwrap();
        let holds: Vec<bool> =
            (1..=3).map(|x| evaluate(&a, &inner, &Assignment::new().with("x", x)).unwrap()).collect();
        assert_eq!(holds, [false, true, false]);
    }

    #[test]
    fn solution_sets() {
        let sig = Signature::new([("P", 1), ("R", 2)]).unwrap();
        let a = FiniteStructure::from_tuples(&sig, 3, [("P", vec![vec![2]]), ("R", vec![vec![1, 2], vec![3, 1]])])
            .unwrap();
        let y = vars(&["y"]);
        let none = Assignment::new();
        assert_eq!(solution_set(&a, &parse("y=y", &sig).unwrap(), &none, &y).unwrap(), [[1], [2], [3]]);
        assert_eq!(solution_set(&a, &parse("P(y)", &sig).unwrap(), &none, &y).unwrap(), [[2]]);
        let x1 = Assignment::new().with("x", 1);
        assert_eq!(solution_set(&a, &parse("R(x,y)", &sig).unwrap(), &x1, &y).unwrap(), [[2]]);
    }

    #[test]
    fn unassigned_variable_is_an_error() {
        let sig = Signature::new([("P", 1)]).unwrap();
        let a = FiniteStructure::empty(&sig, 2);
        assert_eq!(
            evaluate(&a, &parse("P(x)", &sig).unwrap(), &Assignment::new()),
            Err(Error::UnassignedVariable("x".into()))
        );
    }

    #[test]
    fn shadowing_restores_outer_binding() {
        let sig = Signature::new([("P", 1)]).unwrap();
        let a = FiniteStructure::from_tuples(&sig, 2, [("P", vec![vec![1]])]).unwrap();
        let f = parse("(exists x : ~P(x)) & P(x)", &sig).unwrap();
        assert!(evaluate(&a, &f, &Assignment::new().with("x", 1)).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let sig = Signature::new([("P", 1), ("R", 2)]).unwrap();
        let text = r#"{"n":3,"relations":{"R":[[1,2],[2,3]]}}"#;
        let a = FiniteStructure::from_json(text, &sig).unwrap();
        assert!(a.holds("R", &[2, 3]));
        assert_eq!(FiniteStructure::from_json(&a.to_json(), &sig).unwrap(), a);
        assert!(FiniteStructure::from_json(r#"{"n":2,"relations":{"R":[[1,3]]}}"#, &sig).is_err());
    }

    #[test]
    fn assignment_parsing() {
        assert_eq!(Assignment::parse("x=1, y=2").unwrap(), Assignment::new().with("x", 1).with("y", 2));
        assert!(Assignment::parse("x").is_err());
        assert_eq!(Assignment::parse("").unwrap(), Assignment::new());
    }
}
