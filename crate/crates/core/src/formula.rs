//! Conditional probability formulas: AST, concrete syntax, and syntactic analyses.
//!
//! Concrete syntax (ASCII, loosest binding first): `<->`, `->` (right
//! associative), `|`, `&`, then the unary forms `~`, `exists` and `forall`.
//! Comparison quantifiers are written in square brackets:
//!
//! ```text
//! [ r + ||phi : psi||{ys} >= ||theta : tau||{ys} ]
//! [ ||phi : psi||{ys} >= ||theta : tau||{ys} + r ]
//! [ ||phi : psi||{ys} >= r ]            // proportion of ys with phi among psi is at least r
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

pub type Var = String;

const KEYWORDS: [&str; 3] = ["exists", "forall", "true"];

/// A finite relational signature. Relations are kept sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new<I, S>(relations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, arity) in relations {
            let name = name.into();
            if !is_identifier(&name) || KEYWORDS.contains(&name.as_str()) {
                return Err(Error::Signature(format!("`{name}` is not a valid relation name")));
            }
            if arity == 0 {
                return Err(Error::Signature(format!("relation `{name}` must have arity >= 1")));
            }
            if map.insert(name.clone(), arity).is_some() {
                return Err(Error::Signature(format!("relation `{name}` declared twice")));
            }
        }
        Ok(Self { relations: map })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.relations.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Position of `name` in the sorted relation list.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.keys().position(|k| k == name)
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.relations.iter().all(|(n, a)| other.arity(n) == Some(*a))
    }

    /// The sub-signature containing the listed names that occur in `self`.
    pub fn restrict<'a, I>(&self, names: I) -> Signature
    where
        I: IntoIterator<Item = &'a str>,
    {
        let keep: BTreeSet<&str> = names.into_iter().collect();
        Signature {
            relations: self
                .relations
                .iter()
                .filter(|(n, _)| keep.contains(n.as_str()))
                .map(|(n, a)| (n.clone(), *a))
                .collect(),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, a)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}/{a}")?;
        }
        write!(f, "}}")
    }
}

/// Which side of the inequality carries the threshold `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// `r + ||num1 | den1|| >= ||num2 | den2||`
    Left,
    /// `||num1 | den1|| >= ||num2 | den2|| + r`
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Comparison {
    pub r: Rational,
    pub side: Side,
    pub num1: Formula,
    pub den1: Formula,
    pub num2: Formula,
    pub den2: Formula,
    pub bound: Vec<Var>,
}

impl Comparison {
    pub fn parts(&self) -> [&Formula; 4] {
        [&self.num1, &self.den1, &self.num2, &self.den2]
    }

    /// The `||phi : psi||{ys} >= r` shorthand: compares against the constant-false
    /// proportion `||y1 != y1 : y1 = y1||`.
    pub fn proportion_at_least(phi: Formula, psi: Formula, bound: Vec<Var>, r: Rational) -> Self {
        let y1 = bound.first().cloned().unwrap_or_default();
        Comparison {
            r,
            side: Side::Right,
            num1: phi,
            den1: psi,
            num2: Formula::neq(&y1, &y1),
            den2: Formula::eq(&y1, &y1),
            bound,
        }
    }

    fn is_proportion_shorthand(&self) -> bool {
        let Some(y1) = self.bound.first() else { return false };
        self.side == Side::Right
            && self.num2 == Formula::neq(y1, y1)
            && self.den2 == Formula::eq(y1, y1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Atom { rel: String, args: Vec<Var> },
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Compare(Box<Comparison>),
}

impl Formula {
    pub fn atom<S: AsRef<str>>(rel: &str, args: &[S]) -> Formula {
        Formula::Atom { rel: rel.to_string(), args: args.iter().map(|a| a.as_ref().to_string()).collect() }
    }

    pub fn eq(a: &str, b: &str) -> Formula {
        Formula::Eq(a.to_string(), b.to_string())
    }

    pub fn neq(a: &str, b: &str) -> Formula {
        Formula::Eq(a.to_string(), b.to_string()).negate()
    }

    pub fn bottom() -> Formula {
        Formula::Top.negate()
    }

    pub fn negate(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn iff(self, other: Formula) -> Formula {
        Formula::Iff(Box::new(self), Box::new(other))
    }

    pub fn exists<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        Formula::Exists(vars.iter().map(|v| v.as_ref().to_string()).collect(), Box::new(body))
    }

    pub fn compare(c: Comparison) -> Formula {
        Formula::Compare(Box::new(c))
    }

    /// Left-nested conjunction; empty input gives `true`.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; empty input gives `~true`.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or_else(Formula::bottom)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Top | Formula::Atom { .. } | Formula::Eq(..) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Exists(..) | Formula::Compare(_) => false,
        }
    }

    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(a) => a.quantifier_rank(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            Formula::Exists(vs, body) => body.quantifier_rank() + vs.len(),
            Formula::Compare(c) => {
                c.parts().iter().map(|p| p.quantifier_rank()).max().unwrap_or(0) + c.bound.len()
            }
        }
    }

    /// Free variables, in lexicographic order.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn free_var_list(&self) -> Vec<Var> {
        self.free_vars().into_iter().collect()
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Top => {}
            Formula::Atom { args, .. } => args.iter().for_each(|v| add(v, bound)),
            Formula::Eq(a, b) => {
                add(a, bound);
                add(b, bound);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(vs, body) => {
                let depth = bound.len();
                bound.extend(vs.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(depth);
            }
            Formula::Compare(c) => {
                let depth = bound.len();
                bound.extend(c.bound.iter().cloned());
                for p in c.parts() {
                    p.collect_free(bound, out);
                }
                bound.truncate(depth);
            }
        }
    }

    /// Every variable occurring anywhere in the formula, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { args, .. } => out.extend(args.iter().cloned()),
            Formula::Eq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Formula::Exists(vs, _) => out.extend(vs.iter().cloned()),
            Formula::Compare(c) => out.extend(c.bound.iter().cloned()),
            _ => {}
        });
        out
    }

    pub fn relations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom { rel, .. } = f {
                out.insert(rel.clone());
            }
        });
        out
    }

    /// Thresholds `r` of all comparison subformulas.
    pub fn threshold_constants(&self) -> BTreeSet<Rational> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Compare(c) = f {
                out.insert(c.r.clone());
            }
        });
        out
    }

    /// Pre-order traversal, descending into comparison parts.
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        match self {
            Formula::Top | Formula::Atom { .. } | Formula::Eq(..) => {}
            Formula::Not(a) | Formula::Exists(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Compare(c) => c.parts().iter().for_each(|p| p.visit(f)),
        }
    }

    /// Checks relation names and arities against `sig`.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        let mut err = None;
        self.visit(&mut |f| {
            if err.is_some() {
                return;
            }
            if let Formula::Atom { rel, args } = f {
                match sig.arity(rel) {
                    None => err = Some(Error::UnknownRelation(rel.clone())),
                    Some(a) if a != args.len() => {
                        err = Some(Error::ArityMismatch { relation: rel.clone(), expected: a, found: args.len() })
                    }
                    _ => {}
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Length of the formula as a symbol sequence: the number of lexical tokens
    /// of its rendering.
    pub fn length(&self) -> usize {
        tokenize(&render(self)).map(|t| t.len()).unwrap_or(0)
    }

    /// Renames free occurrences of variables according to `map`.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> Formula {
        self.rename_inner(map, &mut Vec::new())
    }

    fn rename_inner(&self, map: &BTreeMap<Var, Var>, bound: &mut Vec<Var>) -> Formula {
        let r = |v: &Var, bound: &Vec<Var>| -> Var {
            if bound.contains(v) {
                v.clone()
            } else {
                map.get(v).cloned().unwrap_or_else(|| v.clone())
            }
        };
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom { rel, args } => Formula::Atom { rel: rel.clone(), args: args.iter().map(|v| r(v, bound)).collect() },
            Formula::Eq(a, b) => Formula::Eq(r(a, bound), r(b, bound)),
            Formula::Not(a) => a.rename_inner(map, bound).negate(),
            Formula::And(a, b) => a.rename_inner(map, bound).and(b.rename_inner(map, bound)),
            Formula::Or(a, b) => a.rename_inner(map, bound).or(b.rename_inner(map, bound)),
            Formula::Implies(a, b) => a.rename_inner(map, bound).implies(b.rename_inner(map, bound)),
            Formula::Iff(a, b) => a.rename_inner(map, bound).iff(b.rename_inner(map, bound)),
            Formula::Exists(vs, body) => {
                let depth = bound.len();
                bound.extend(vs.iter().cloned());
                let body = body.rename_inner(map, bound);
                bound.truncate(depth);
                Formula::Exists(vs.clone(), Box::new(body))
            }
            Formula::Compare(c) => {
                let depth = bound.len();
                bound.extend(c.bound.iter().cloned());
                let out = Comparison {
                    r: c.r.clone(),
                    side: c.side,
                    num1: c.num1.rename_inner(map, bound),
                    den1: c.den1.rename_inner(map, bound),
                    num2: c.num2.rename_inner(map, bound),
                    den2: c.den2.rename_inner(map, bound),
                    bound: c.bound.clone(),
                };
                bound.truncate(depth);
                Formula::compare(out)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

pub fn quantifier_rank(f: &Formula) -> usize {
    f.quantifier_rank()
}

pub fn free_vars(f: &Formula) -> Vec<Var> {
    f.free_var_list()
}

pub fn threshold_constants(f: &Formula) -> BTreeSet<Rational> {
    f.threshold_constants()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ---------------------------------------------------------------------------
// Rendering

const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_UNARY: u8 = 5;
const PREC_PRIMARY: u8 = 6;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => PREC_IFF,
        Formula::Implies(..) => PREC_IMP,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        Formula::Not(inner) if matches!(**inner, Formula::Eq(..)) => PREC_PRIMARY,
        Formula::Not(_) | Formula::Exists(..) => PREC_UNARY,
        _ => PREC_PRIMARY,
    }
}

/// Concrete syntax for `f`; `parse(render(f))` reproduces `f`.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_child(f: &Formula, min_prec: u8, out: &mut String) {
    if precedence(f) < min_prec {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_vars(vs: &[Var], out: &mut String) {
    out.push_str(&vs.join(","));
}

fn write_ratio(num: &Formula, den: &Formula, bound: &[Var], out: &mut String) {
    out.push_str("||");
    write_formula(num, out);
    out.push_str(" : ");
    write_formula(den, out);
    out.push_str("||{");
    write_vars(bound, out);
    out.push('}');
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Top => out.push_str("true"),
        Formula::Atom { rel, args } => {
            out.push_str(rel);
            out.push('(');
            write_vars(args, out);
            out.push(')');
        }
        Formula::Eq(a, b) => {
            out.push_str(a);
            out.push('=');
            out.push_str(b);
        }
        Formula::Not(inner) => {
            if let Formula::Eq(a, b) = &**inner {
                out.push_str(a);
                out.push_str("!=");
                out.push_str(b);
            } else {
                out.push('~');
                write_child(inner, PREC_UNARY, out);
            }
        }
        Formula::And(a, b) => {
            write_child(a, PREC_AND, out);
            out.push_str(" & ");
            write_child(b, PREC_AND + 1, out);
        }
        Formula::Or(a, b) => {
            // Conjunctions inside disjunctions get parentheses for readability.
            write_child(a, PREC_AND + 1, out);
            out.push_str(" | ");
            write_child(b, PREC_AND + 1, out);
        }
        Formula::Implies(a, b) => {
            write_child(a, PREC_IMP + 1, out);
            out.push_str(" -> ");
            write_child(b, PREC_IMP, out);
        }
        Formula::Iff(a, b) => {
            write_child(a, PREC_IFF, out);
            out.push_str(" <-> ");
            write_child(b, PREC_IFF + 1, out);
        }
        Formula::Exists(vs, body) => {
            out.push_str("exists ");
            write_vars(vs, out);
            out.push_str(" : ");
            write_child(body, PREC_UNARY, out);
        }
        Formula::Compare(c) => {
            out.push_str("[ ");
            if c.is_proportion_shorthand() {
                write_ratio(&c.num1, &c.den1, &c.bound, out);
                out.push_str(" >= ");
                out.push_str(&format_rational(&c.r));
            } else {
                match c.side {
                    Side::Left => {
                        out.push_str(&format_rational(&c.r));
                        out.push_str(" + ");
                        write_ratio(&c.num1, &c.den1, &c.bound, out);
                        out.push_str(" >= ");
                        write_ratio(&c.num2, &c.den2, &c.bound, out);
                    }
                    Side::Right => {
                        write_ratio(&c.num1, &c.den1, &c.bound, out);
                        out.push_str(" >= ");
                        write_ratio(&c.num2, &c.den2, &c.bound, out);
                        out.push_str(" + ");
                        out.push_str(&format_rational(&c.r));
                    }
                }
            }
            out.push_str(" ]");
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Neq,
    Tilde,
    Amp,
    Bar,
    DoubleBar,
    Arrow,
    DArrow,
    Colon,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Ge,
    Slash,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Tilde => "~",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::DoubleBar => "||",
            Tok::Arrow => "->",
            Tok::DArrow => "<->",
            Tok::Colon => ":",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Ge => ">=",
            Tok::Slash => "/",
            Tok::Ident(_) | Tok::Number(_) => "",
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let next = bytes.get(i + 1).copied();
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'=' => Tok::Eq,
            b'~' => Tok::Tilde,
            b'&' => Tok::Amp,
            b':' => Tok::Colon,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'+' => Tok::Plus,
            b'/' => Tok::Slash,
            b'!' if next == Some(b'=') => {
                i += 1;
                Tok::Neq
            }
            b'|' if next == Some(b'|') => {
                i += 1;
                Tok::DoubleBar
            }
            b'|' => Tok::Bar,
            b'-' if next == Some(b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'-' => Tok::Minus,
            b'>' if next == Some(b'=') => {
                i += 1;
                Tok::Ge
            }
            b'<' if text[i..].starts_with("<->") => {
                i += 2;
                Tok::DArrow
            }
            c if c.is_ascii_digit() || (c == b'.' && next.is_some_and(|d| d.is_ascii_digit())) => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((Tok::Number(text[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax { pos: i, message: format!("unexpected character `{ch}`") });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses `text` against `sig`, desugaring `forall`, `!=` and the proportion shorthand.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, sig, end: text.len() };
    let f = p.formula()?;
    if let Some((tok, at)) = p.tokens.get(p.pos) {
        return Err(Error::Syntax { pos: *at, message: format!("unexpected {} after end of formula", tok.describe()) });
    }
    Ok(f)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.here(), message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(&format!("`{}`", tok.symbol()))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.imp()?;
        while self.eat(&Tok::DArrow) {
            let rhs = self.imp()?;
            lhs = lhs.iff(rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imp()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.and()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(self.unary()?.negate());
        }
        match self.peek() {
            Some(Tok::Ident(kw)) if kw == "exists" || kw == "forall" => {
                let universal = kw == "forall";
                self.pos += 1;
                let vars = self.var_list()?;
                self.expect(Tok::Colon)?;
                let body = self.unary()?;
                Ok(if universal {
                    Formula::Exists(vars, Box::new(body.negate())).negate()
                } else {
                    Formula::Exists(vars, Box::new(body))
                })
            }
            _ => self.primary(),
        }
    }

    fn var(&mut self) -> Result<Var> {
        match self.peek() {
            Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => self.unexpected("a variable"),
        }
    }

    fn var_list(&mut self) -> Result<Vec<Var>> {
        let mut vars = vec![self.var()?];
        while self.eat(&Tok::Comma) {
            vars.push(self.var()?);
        }
        Ok(vars)
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::LBracket) => self.compare(),
            Some(Tok::Ident(name)) if name == "true" => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Ident(name)) if self.peek_at(1) == Some(&Tok::LParen) => {
                let at = self.here();
                self.pos += 2;
                let args = self.var_list()?;
                self.expect(Tok::RParen)?;
                match self.sig.arity(&name) {
                    None => Err(Error::UnknownRelation(name)),
                    Some(a) if a != args.len() => {
                        let _ = at;
                        Err(Error::ArityMismatch { relation: name, expected: a, found: args.len() })
                    }
                    Some(_) => Ok(Formula::Atom { rel: name, args }),
                }
            }
            Some(Tok::Ident(_)) => {
                let a = self.var()?;
                if self.eat(&Tok::Eq) {
                    let b = self.var()?;
                    Ok(Formula::Eq(a, b))
                } else if self.eat(&Tok::Neq) {
                    let b = self.var()?;
                    Ok(Formula::Eq(a, b).negate())
                } else {
                    self.unexpected("`=`, `!=` or `(`")
                }
            }
            _ => self.unexpected("a formula"),
        }
    }

    fn threshold(&mut self) -> Result<Rational> {
        let negative = self.eat(&Tok::Minus);
        let at = self.here();
        let mut text = match self.peek() {
            Some(Tok::Number(s)) => s.clone(),
            _ => return self.unexpected("a rational number"),
        };
        self.pos += 1;
        if self.eat(&Tok::Slash) {
            match self.peek() {
                Some(Tok::Number(s)) if !s.contains('.') && !text.contains('.') => {
                    text = format!("{text}/{s}");
                    self.pos += 1;
                }
                _ => return self.unexpected("an integer denominator"),
            }
        }
        let r = parse_rational(&text)
            .ok_or_else(|| Error::Syntax { pos: at, message: format!("malformed number `{text}`") })?;
        if negative && !num_traits::Zero::is_zero(&r) {
            return Err(Error::NegativeThreshold(format!("-{text}")));
        }
        debug_assert!(!r.is_negative());
        Ok(r)
    }

    /// `||phi : psi||{ys}`
    fn ratio(&mut self) -> Result<(Formula, Formula, Vec<Var>)> {
        self.expect(Tok::DoubleBar)?;
        let num = self.formula()?;
        self.expect(Tok::Colon)?;
        let den = self.formula()?;
        self.expect(Tok::DoubleBar)?;
        self.expect(Tok::LBrace)?;
        let at = self.here();
        let bound = self.var_list()?;
        self.expect(Tok::RBrace)?;
        let mut seen = BTreeSet::new();
        for v in &bound {
            if !seen.insert(v) {
                let _ = at;
                return Err(Error::RepeatedBoundVariable(v.clone()));
            }
        }
        Ok((num, den, bound))
    }

    fn compare(&mut self) -> Result<Formula> {
        self.expect(Tok::LBracket)?;
        let starts_with_number = matches!(self.peek(), Some(Tok::Number(_)) | Some(Tok::Minus));
        if starts_with_number {
            let r = self.threshold()?;
            self.expect(Tok::Plus)?;
            let (num1, den1, bound) = self.ratio()?;
            self.expect(Tok::Ge)?;
            let at = self.here();
            let (num2, den2, bound2) = self.ratio()?;
            self.expect(Tok::RBracket)?;
            if bound != bound2 {
                return Err(Error::Syntax { pos: at, message: "both proportions must bind the same variables".into() });
            }
            return Ok(Formula::compare(Comparison { r, side: Side::Left, num1, den1, num2, den2, bound }));
        }
        let (num1, den1, bound) = self.ratio()?;
        self.expect(Tok::Ge)?;
        if matches!(self.peek(), Some(Tok::Number(_)) | Some(Tok::Minus)) {
            let r = self.threshold()?;
            self.expect(Tok::RBracket)?;
            return Ok(Formula::compare(Comparison::proportion_at_least(num1, den1, bound, r)));
        }
        let at = self.here();
        let (num2, den2, bound2) = self.ratio()?;
        self.expect(Tok::Plus)?;
        let r = self.threshold()?;
        self.expect(Tok::RBracket)?;
        if bound != bound2 {
            return Err(Error::Syntax { pos: at, message: "both proportions must bind the same variables".into() });
        }
        Ok(Formula::compare(Comparison { r, side: Side::Right, num1, den1, num2, den2, bound }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn sig() -> Signature {
        Signature::new([("P", 1), ("Q", 1), ("R", 2), ("M", 1), ("F", 2)]).unwrap()
    }

    fn p(text: &str) -> Formula {
        parse(text, &sig()).unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    #[test]
    fn signature_rejects_duplicates_and_nullary() {
        assert!(Signature::new([("P", 1), ("P", 2)]).is_err());
        assert!(Signature::new([("P", 0)]).is_err());
        assert!(Signature::new([("exists", 1)]).is_err());
    }

    #[test]
    fn exists_parses() {
        assert_eq!(p("exists y : P(y)"), Formula::exists(&["y"], Formula::atom("P", &["y"])));
    }

    #[test]
    fn proportion_shorthand_expands() {
        let f = p("[ ||P(y) : y=y||{y} >= 1/3 ]");
        let Formula::Compare(c) = &f else { panic!("not a comparison") };
        assert_eq!(c.r, rat(1, 3));
        assert_eq!(c.side, Side::Right);
        assert_eq!(c.num1, Formula::atom("P", &["y"]));
        assert_eq!(c.den1, Formula::eq("y", "y"));
        assert_eq!(c.num2, Formula::neq("y", "y"));
        assert_eq!(c.den2, Formula::eq("y", "y"));
        assert_eq!(c.bound, vec!["y".to_string()]);
    }

    #[test]
    fn friendship_sentence_nests() {
        let f = p("[ || [ ||M(y):F(x,y)||{y} >= 1/3 ] -> M(x) : x=x ||{x} >= 1/2 ]");
        let Formula::Compare(outer) = &f else { panic!() };
        assert_eq!(outer.r, rat(1, 2));
        let Formula::Implies(lhs, _) = &outer.num1 else { panic!() };
        assert!(matches!(**lhs, Formula::Compare(_)));
        assert!(f.free_vars().is_empty());
        assert_eq!(f.quantifier_rank(), 2);
        assert_eq!(f.threshold_constants(), [rat(1, 3), rat(1, 2)].into_iter().collect());
    }

    #[test]
    fn explicit_comparisons() {
        let f = p("[ 1/4 + ||P(y) : true||{y} >= ||Q(y) : P(y)||{y} ]");
        let Formula::Compare(c) = &f else { panic!() };
        assert_eq!(c.side, Side::Left);
        assert_eq!(c.r, rat(1, 4));
        let g = p("[ ||P(y) : true||{y} >= ||Q(y) : P(y)||{y} + 0.25 ]");
        let Formula::Compare(c) = &g else { panic!() };
        assert_eq!(c.side, Side::Right);
        assert_eq!(c.r, rat(1, 4));
    }

    #[test]
    fn desugaring() {
        assert_eq!(p("forall x : P(x)"), Formula::exists(&["x"], Formula::atom("P", &["x"]).negate()).negate());
        assert_eq!(p("x != y"), Formula::eq("x", "y").negate());
    }

    #[test]
    fn precedence_and_associativity() {
        let a = || Formula::atom("P", &["x"]);
        let b = || Formula::atom("Q", &["x"]);
        let c = || Formula::atom("P", &["y"]);
        assert_eq!(p("P(x) | Q(x) & P(y)"), a().or(b().and(c())));
        assert_eq!(p("P(x) -> Q(x) -> P(y)"), a().implies(b().implies(c())));
        assert_eq!(p("P(x) & Q(x) & P(y)"), a().and(b()).and(c()));
        assert_eq!(p("P(x) <-> Q(x) -> P(y)"), a().iff(b().implies(c())));
        // exists binds a unary body only
        assert_eq!(p("exists x : P(x) & Q(x)"), Formula::exists(&["x"], a()).and(b()));
    }

    #[test]
    fn errors() {
        let s = sig();
        assert!(matches!(parse("S(x)", &s), Err(Error::UnknownRelation(_))));
        assert!(matches!(parse("R(x)", &s), Err(Error::ArityMismatch { .. })));
        assert!(matches!(parse("[ ||P(y):true||{y} >= -1/3 ]", &s), Err(Error::NegativeThreshold(_))));
        assert!(matches!(parse("[ ||R(y,z):true||{y,y} >= 1/3 ]", &s), Err(Error::RepeatedBoundVariable(_))));
        assert!(matches!(parse("P(x) &", &s), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse("P(x) $ Q(x)", &s), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x", &s), Err(Error::Syntax { .. })));
        assert!(matches!(parse("[ ||P(y):true||{y} >= ||P(z):true||{z} + 1 ]", &s), Err(Error::Syntax { .. })));
        assert!(matches!(parse("exists true : P(x)", &s), Err(Error::Syntax { .. })));
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Formula::atom("P", &["x"])), "P(x)");
        assert_eq!(render(&Formula::exists(&["y"], Formula::eq("x", "y"))), "exists y : x=y");
        assert_eq!(render(&Formula::bottom()), "~true");
        assert_eq!(render(&p("[ ||P(y):y=y||{y} >= 1/3 ]")), "[ ||P(y) : y=y||{y} >= 1/3 ]");
    }

    #[test]
    fn render_round_trips_tricky_shapes() {
        for text in [
            "(P(x) | Q(x)) & P(y)",
            "P(x) & (Q(x) & P(y))",
            "(P(x) -> Q(x)) -> P(y)",
            "P(x) <-> (Q(x) <-> P(y))",
            "~(P(x) & Q(x))",
            "~exists x : P(x)",
            "exists x : (P(x) | Q(x))",
            "~~x!=y",
            "[ 1/2 + ||R(x,y) : true||{y} >= ||x!=y : x=x||{y} ]",
            "[ ||P(y) & Q(z) : true||{y,z} >= ||P(y) : Q(z)||{y,z} + 3/7 ]",
        ] {
            let f = p(text);
            assert_eq!(p(&render(&f)), f, "{text} -> {}", render(&f));
        }
    }

    #[test]
    fn quantifier_rank_clauses() {
        assert_eq!(p("R(x,y)").quantifier_rank(), 0);
        assert_eq!(p("exists x : exists y : R(x,y)").quantifier_rank(), 2);
        assert_eq!(p("[ ||R(y1,y2) : true||{y1,y2} >= 1/5 ]").quantifier_rank(), 2);
        assert_eq!(p("exists x, y : R(x,y)").quantifier_rank(), 2);
    }

    #[test]
    fn free_variables() {
        let set = |vs: &[&str]| vs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(p("R(x,y)").free_vars(), set(&["x", "y"]));
        assert_eq!(p("exists y : R(x,y)").free_vars(), set(&["x"]));
        assert_eq!(p("[ ||R(x,y) : true||{y} >= 1/3 ]").free_vars(), set(&["x"]));
        assert_eq!(p("P(x) & exists x : Q(x)").free_vars(), set(&["x"]));
    }

    #[test]
    fn thresholds() {
        assert!(p("exists x : P(x)").threshold_constants().is_empty());
        assert_eq!(p("[ ||P(y):y=y||{y} >= 1/3 ]").threshold_constants().len(), 1);
    }

    #[test]
    fn renaming_respects_binders() {
        let f = p("P(x) & exists x : R(x,y)");
        let map: BTreeMap<Var, Var> = [("x".to_string(), "a".to_string()), ("y".to_string(), "b".to_string())].into();
        assert_eq!(render(&f.rename_free(&map)), "P(a) & exists x : R(x,b)");
    }

    #[test]
    fn length_counts_tokens() {
        assert_eq!(p("P(x)").length(), 4);
        assert_eq!(p("exists y : x=y").length(), 6);
    }
}
