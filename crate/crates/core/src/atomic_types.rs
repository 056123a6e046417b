//! Complete atomic types over a variable tuple.
//!
//! A type is stored as an identity fragment (a restricted growth string
//! assigning each variable to an equivalence class) plus one bit per relation
//! atom over class indices. Relation atoms are laid out per relation in
//! signature order; within a relation of arity `a`, the tuple `(c1..ca)` of
//! class indices sits at `c1*nc^(a-1) + ... + ca`, i.e. lexicographic order.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Formula, Signature, Var};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralAtom {
    Equal(Var, Var),
    Relation(String, Vec<Var>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: LiteralAtom,
}

impl Literal {
    pub fn to_formula(&self) -> Formula {
        let f = match &self.atom {
            LiteralAtom::Equal(a, b) => Formula::eq(a, b),
            LiteralAtom::Relation(r, args) => Formula::atom(r, args),
        };
        if self.positive {
            f
        } else {
            f.negate()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompleteAtomicType {
    // Field order gives the enumeration order: partition first, then atom mask.
    classes: Vec<usize>,
    bits: Vec<u64>,
    n_classes: usize,
    vars: Vec<Var>,
    sig: Arc<Signature>,
}

/// Number of relation atoms over `nc` classes.
pub fn atom_count(sig: &Signature, nc: usize) -> usize {
    sig.iter().map(|(_, a)| nc.pow(a as u32)).sum()
}

fn offsets(sig: &Signature, nc: usize) -> Vec<usize> {
    let mut acc = 0;
    sig.iter()
        .map(|(_, a)| {
            let o = acc;
            acc += nc.pow(a as u32);
            o
        })
        .collect()
}

fn tuple_index(nc: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &c| acc * nc + c)
}

/// All restricted growth strings of length `n`, lexicographically.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for c in 0..=limit {
            prefix.push(c);
            go(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

/// Canonical restricted growth string for an arbitrary class labelling.
pub fn normalize_classes(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: Vec<usize> = Vec::new();
    let rgs = labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(i) => i,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect();
    (rgs, seen.len())
}

fn check_distinct(vars: &[Var]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(v) {
            return Err(Error::RepeatedBoundVariable(v.clone()));
        }
    }
    Ok(())
}

impl CompleteAtomicType {
    /// Builds a type from a class labelling of `vars` and a truth function on
    /// relation atoms over (normalized) class tuples.
    pub fn from_fn<F>(sig: Arc<Signature>, vars: Vec<Var>, labels: &[usize], mut holds: F) -> Self
    where
        F: FnMut(&str, &[usize]) -> bool,
    {
        let (classes, nc) = normalize_classes(labels);
        let total = atom_count(&sig, nc);
        let mut bits = vec![0u64; total.div_ceil(64)];
        let mut idx = 0;
        for (name, arity) in sig.iter() {
            for t in 0..nc.pow(arity as u32) {
                let tuple = decode(t, nc, arity);
                if holds(name, &tuple) {
                    bits[idx / 64] |= 1 << (idx % 64);
                }
                idx += 1;
            }
        }
        CompleteAtomicType { classes, bits, n_classes: nc, vars, sig }
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn sig_arc(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Class index of each variable, as a restricted growth string.
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn bits(&self) -> &[u64] {
        &self.bits
    }

    /// Memo key that ignores variable names.
    pub fn key(&self) -> (Vec<usize>, Vec<u64>) {
        (self.classes.clone(), self.bits.clone())
    }

    pub fn var_index(&self, v: &str) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }

    pub fn class_of(&self, v: &str) -> Option<usize> {
        self.var_index(v).map(|i| self.classes[i])
    }

    /// Index of the first variable of each class.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.n_classes];
        for (i, &c) in self.classes.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = i;
            }
        }
        reps
    }

    fn bit(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    /// Truth of `rel` on a tuple of class indices.
    pub fn holds(&self, rel: &str, tuple: &[usize]) -> bool {
        let Some(r) = self.sig.index_of(rel) else { return false };
        let off = offsets(&self.sig, self.n_classes)[r];
        self.bit(off + tuple_index(self.n_classes, tuple))
    }

    fn holds_at(&self, offsets: &[usize], rel: usize, tuple: impl Iterator<Item = usize>) -> bool {
        let idx = tuple.fold(0, |acc, c| acc * self.n_classes + c);
        self.bit(offsets[rel] + idx)
    }

    /// Start of each relation's block of atom bits, in signature order.
    pub fn atom_offsets(&self) -> Vec<usize> {
        offsets(&self.sig, self.n_classes)
    }

    /// Truth of relation number `rel` on a class tuple, given [`Self::atom_offsets`].
    pub fn holds_rel(&self, offsets: &[usize], rel: usize, tuple: &[usize]) -> bool {
        self.holds_at(offsets, rel, tuple.iter().copied())
    }

    /// Number of relation atoms (literals other than identities).
    pub fn relation_literal_count(&self) -> usize {
        atom_count(&self.sig, self.n_classes)
    }

    /// Number of literals in the canonical listing.
    pub fn literal_count(&self) -> usize {
        let v = self.vars.len();
        v * v.saturating_sub(1) / 2 + self.relation_literal_count()
    }

    /// The type restricted to the empty signature.
    pub fn identity_fragment(&self) -> CompleteAtomicType {
        CompleteAtomicType {
            classes: self.classes.clone(),
            bits: Vec::new(),
            n_classes: self.n_classes,
            vars: self.vars.clone(),
            sig: Arc::new(Signature::empty()),
        }
    }

    /// Literals on class representatives: identities for every pair of
    /// variables, then relation literals in signature and tuple order.
    pub fn literals(&self) -> Vec<Literal> {
        let mut out = Vec::new();
        for i in 0..self.vars.len() {
            for j in i + 1..self.vars.len() {
                out.push(Literal {
                    positive: self.classes[i] == self.classes[j],
                    atom: LiteralAtom::Equal(self.vars[i].clone(), self.vars[j].clone()),
                });
            }
        }
        let reps = self.representatives();
        let mut idx = 0;
        for (name, arity) in self.sig.iter() {
            for t in 0..self.n_classes.pow(arity as u32) {
                let args = decode(t, self.n_classes, arity).into_iter().map(|c| self.vars[reps[c]].clone()).collect();
                out.push(Literal { positive: self.bit(idx), atom: LiteralAtom::Relation(name.to_string(), args) });
                idx += 1;
            }
        }
        out
    }

    /// The type as a conjunction of its literals (`true` when there are none).
    pub fn to_formula(&self) -> Formula {
        Formula::conj(self.literals().iter().map(Literal::to_formula))
    }

    /// Whether the identity fragment of `self` is the given class labelling.
    pub fn has_identity(&self, labels: &[usize]) -> bool {
        normalize_classes(labels).0 == self.classes
    }
}

impl fmt::Display for CompleteAtomicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

fn decode(mut t: usize, nc: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = t % nc.max(1);
        t /= nc.max(1);
    }
    out
}

/// All complete atomic types over `vars`, ordered by partition then mask.
pub fn enumerate_types(sig: &Signature, vars: &[Var]) -> Vec<CompleteAtomicType> {
    let sig = Arc::new(sig.clone());
    let mut out = Vec::new();
    for classes in partitions(vars.len()) {
        out.extend(types_with_partition(&sig, vars, &classes));
    }
    out
}

/// Types over `vars` whose identity fragment is the given restricted growth string.
pub fn types_with_partition(sig: &Arc<Signature>, vars: &[Var], classes: &[usize]) -> Vec<CompleteAtomicType> {
    let nc = classes.iter().max().map_or(0, |m| m + 1);
    let a = atom_count(sig, nc);
    assert!(a < 40, "too many relation atoms ({a}) to enumerate");
    (0u64..1 << a)
        .map(|mask| CompleteAtomicType {
            classes: classes.to_vec(),
            bits: if a == 0 { Vec::new() } else { vec![mask] },
            n_classes: nc,
            vars: vars.to_vec(),
            sig: Arc::clone(sig),
        })
        .collect()
}

/// Number of classes containing a variable of `ys` and no variable outside it.
pub fn dimension(p: &CompleteAtomicType, ys: &[Var]) -> usize {
    let mut only_ys = vec![true; p.n_classes];
    let mut has_y = vec![false; p.n_classes];
    for (v, &c) in p.vars.iter().zip(&p.classes) {
        if ys.contains(v) {
            has_y[c] = true;
        } else {
            only_ys[c] = false;
        }
    }
    (0..p.n_classes).filter(|&c| has_y[c] && only_ys[c]).count()
}

/// The `sig'`-literals of `p` that mention only variables in `xs`.
pub fn restrict(p: &CompleteAtomicType, sig: &Signature, xs: &[Var]) -> Result<CompleteAtomicType> {
    restrict_arc(p, &Arc::new(sig.clone()), xs)
}

pub fn restrict_arc(p: &CompleteAtomicType, sig: &Arc<Signature>, xs: &[Var]) -> Result<CompleteAtomicType> {
    if !sig.is_subset(&p.sig) {
        return Err(Error::Signature(format!("{sig} is not a sub-signature of {}", p.sig)));
    }
    let labels = xs
        .iter()
        .map(|x| p.class_of(x).ok_or_else(|| Error::UnassignedVariable(x.clone())))
        .collect::<Result<Vec<_>>>()?;
    let (classes, nc) = normalize_classes(&labels);
    // old class of each new class
    let mut back = vec![0; nc];
    for (&new, &old) in classes.iter().zip(&labels) {
        back[new] = old;
    }
    let old_offsets = offsets(&p.sig, p.n_classes);
    let total = atom_count(sig, nc);
    let mut bits = vec![0u64; total.div_ceil(64)];
    let mut idx = 0;
    for (name, arity) in sig.iter() {
        let r = p.sig.index_of(name).expect("checked subset");
        for t in 0..nc.pow(arity as u32) {
            let tuple = decode(t, nc, arity);
            if p.holds_at(&old_offsets, r, tuple.iter().map(|&c| back[c])) {
                bits[idx / 64] |= 1 << (idx % 64);
            }
            idx += 1;
        }
    }
    Ok(CompleteAtomicType { classes, bits, n_classes: nc, vars: xs.to_vec(), sig: Arc::clone(sig) })
}

/// A quantifier-free formula compiled against a fixed variable tuple.
#[derive(Debug, Clone)]
pub struct QfProgram {
    node: Node,
    sig: Signature,
}

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Atom(usize, Vec<usize>),
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
}

impl QfProgram {
    pub fn compile(f: &Formula, sig: &Signature, vars: &[Var]) -> Result<Self> {
        if !f.is_quantifier_free() {
            return Err(Error::NotQuantifierFree);
        }
        f.check_signature(sig)?;
        Ok(QfProgram { node: compile(f, sig, vars)?, sig: sig.clone() })
    }

    /// Evaluates on a type over the same variable tuple the program was compiled for.
    pub fn eval_type(&self, p: &CompleteAtomicType) -> bool {
        debug_assert!(self.sig.is_subset(&p.sig));
        let offsets = offsets(&p.sig, p.n_classes);
        // Relation indices were compiled against `self.sig`; remap when the type's signature is larger.
        let remap: Vec<usize> =
            self.sig.names().map(|n| p.sig.index_of(n).expect("relation in type signature")).collect();
        self.eval_with(&|v| p.classes[v], &|r, args: &[usize]| p.holds_at(&offsets, remap[r], args.iter().copied()))
    }

    /// Evaluates with variable `i` interpreted as `element(i)` and relation
    /// atoms (by index in the compile-time signature) answered by `holds`.
    pub fn eval_with(&self, element: &dyn Fn(usize) -> usize, holds: &dyn Fn(usize, &[usize]) -> bool) -> bool {
        eval(&self.node, element, holds)
    }
}

fn compile(f: &Formula, sig: &Signature, vars: &[Var]) -> Result<Node> {
    let var = |v: &Var| vars.iter().position(|w| w == v).ok_or_else(|| Error::UnassignedVariable(v.clone()));
    let bin = |a: &Formula, b: &Formula| -> Result<(Box<Node>, Box<Node>)> {
        Ok((Box::new(compile(a, sig, vars)?), Box::new(compile(b, sig, vars)?)))
    };
    Ok(match f {
        Formula::Top => Node::Const(true),
        Formula::Atom { rel, args } => Node::Atom(
            sig.index_of(rel).ok_or_else(|| Error::UnknownRelation(rel.clone()))?,
            args.iter().map(var).collect::<Result<_>>()?,
        ),
        Formula::Eq(a, b) => Node::Eq(var(a)?, var(b)?),
        Formula::Not(a) => Node::Not(Box::new(compile(a, sig, vars)?)),
        Formula::And(a, b) => {
            let (a, b) = bin(a, b)?;
            Node::And(a, b)
        }
        Formula::Or(a, b) => {
            let (a, b) = bin(a, b)?;
            Node::Or(a, b)
        }
        Formula::Implies(a, b) => {
            let (a, b) = bin(a, b)?;
            Node::Implies(a, b)
        }
        Formula::Iff(a, b) => {
            let (a, b) = bin(a, b)?;
            Node::Iff(a, b)
        }
        Formula::Exists(..) | Formula::Compare(_) => return Err(Error::NotQuantifierFree),
    })
}

fn eval(node: &Node, element: &dyn Fn(usize) -> usize, holds: &dyn Fn(usize, &[usize]) -> bool) -> bool {
    match node {
        Node::Const(b) => *b,
        Node::Atom(r, args) => {
            let tuple: Vec<usize> = args.iter().map(|&v| element(v)).collect();
            holds(*r, &tuple)
        }
        Node::Eq(a, b) => element(*a) == element(*b),
        Node::Not(a) => !eval(a, element, holds),
        Node::And(a, b) => eval(a, element, holds) && eval(b, element, holds),
        Node::Or(a, b) => eval(a, element, holds) || eval(b, element, holds),
        Node::Implies(a, b) => !eval(a, element, holds) || eval(b, element, holds),
        Node::Iff(a, b) => eval(a, element, holds) == eval(b, element, holds),
    }
}

/// Truth of a quantifier-free formula in the canonical structure of `p`.
pub fn type_satisfies(p: &CompleteAtomicType, f: &Formula) -> Result<bool> {
    Ok(QfProgram::compile(f, &p.sig, &p.vars)?.eval_type(p))
}

/// The complete types over `vars` that satisfy `f`, in enumeration order.
pub fn to_type_disjunction(f: &Formula, sig: &Signature, vars: &[Var]) -> Result<Vec<CompleteAtomicType>> {
    check_distinct(vars)?;
    let prog = QfProgram::compile(f, sig, vars)?;
    Ok(enumerate_types(sig, vars).into_iter().filter(|p| prog.eval_type(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn vars(vs: &[&str]) -> Vec<Var> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        let counts: Vec<usize> = (0..6).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn type_counts() {
        let r2 = Signature::new([("R", 2)]).unwrap();
        assert_eq!(enumerate_types(&r2, &vars(&["x"])).len(), 2);
        let xy = enumerate_types(&r2, &vars(&["x", "y"]));
        assert_eq!(xy.len(), 18);
        assert_eq!(xy.iter().filter(|p| p.n_classes() == 1).count(), 2);
        assert_eq!(enumerate_types(&Signature::empty(), &vars(&["x", "y"])).len(), 2);
    }

    #[test]
    fn dimensions() {
        let sig = Signature::empty();
        let xy = enumerate_types(&sig, &vars(&["x", "y"]));
        let same = &xy[0];
        let distinct = &xy[1];
        assert_eq!(dimension(distinct, &vars(&["y"])), 1);
        assert_eq!(dimension(same, &vars(&["y"])), 0);
        let xyz = enumerate_types(&sig, &vars(&["x", "y", "z"]));
        let all_distinct = xyz.iter().find(|p| p.n_classes() == 3).unwrap();
        assert_eq!(dimension(all_distinct, &vars(&["y", "z"])), 2);
    }

    #[test]
    fn restriction() {
        let pq = Signature::new([("P", 1), ("Q", 1)]).unwrap();
        let p_only = Signature::new([("P", 1)]).unwrap();
        let ts = to_type_disjunction(&parse("P(x) & ~Q(x)", &pq).unwrap(), &pq, &vars(&["x"])).unwrap();
        assert_eq!(ts.len(), 1);
        let r = restrict(&ts[0], &p_only, &vars(&["x"])).unwrap();
        assert_eq!(r.to_formula().to_string(), "P(x)");
        let id = restrict(&ts[0], &Signature::empty(), &vars(&["x"])).unwrap();
        assert_eq!(id.to_formula(), Formula::Top);

        let r2 = Signature::new([("R", 2)]).unwrap();
        let f = parse("R(x,y) & ~R(x,x) & x!=y", &r2).unwrap();
        for p in to_type_disjunction(&f, &r2, &vars(&["x", "y"])).unwrap() {
            let q = restrict(&p, &r2, &vars(&["x"])).unwrap();
            assert_eq!(q.to_formula().to_string(), "~R(x,x)");
        }
    }

    #[test]
    fn disjunction_examples() {
        let p = Signature::new([("P", 1)]).unwrap();
        assert_eq!(to_type_disjunction(&Formula::Top, &p, &vars(&["x"])).unwrap().len(), 2);
        let f = parse("P(x) & x!=y", &p).unwrap();
        assert_eq!(to_type_disjunction(&f, &p, &vars(&["x", "y"])).unwrap().len(), 2);
        let g = parse("x!=x", &p).unwrap();
        assert!(to_type_disjunction(&g, &p, &vars(&["x"])).unwrap().is_empty());
    }

    #[test]
    fn satisfaction() {
        let p = Signature::new([("P", 1)]).unwrap();
        let ts = enumerate_types(&p, &vars(&["x", "y"]));
        let x_eq_y = &ts[0];
        assert!(!type_satisfies(x_eq_y, &parse("x!=y", &p).unwrap()).unwrap());
        assert!(type_satisfies(x_eq_y, &Formula::Top).unwrap());
        let with_p = ts.iter().find(|t| type_satisfies(t, &parse("P(x)", &p).unwrap()).unwrap()).unwrap();
        assert!(with_p.literals().iter().any(|l| l.positive && l.atom == LiteralAtom::Relation("P".into(), vars(&["x"]))));
    }

    #[test]
    fn rendering_uses_representatives() {
        let r2 = Signature::new([("R", 2)]).unwrap();
        let ts = enumerate_types(&r2, &vars(&["x", "y"]));
        assert_eq!(ts[0].to_formula().to_string(), "x=y & ~R(x,x)");
        assert_eq!(ts[2].to_formula().to_string(), "x!=y & ~R(x,x) & ~R(x,y) & ~R(y,x) & ~R(y,y)");
        assert_eq!(ts[3].to_formula().to_string(), "x!=y & R(x,x) & ~R(x,y) & ~R(y,x) & ~R(y,y)");
    }

    #[test]
    fn types_round_trip_through_formulas() {
        let sig = Signature::new([("P", 1), ("R", 2)]).unwrap();
        let vs = vars(&["x", "y"]);
        for p in enumerate_types(&sig, &vs) {
            let back = to_type_disjunction(&p.to_formula(), &sig, &vs).unwrap();
            assert_eq!(back, vec![p]);
        }
    }
}
