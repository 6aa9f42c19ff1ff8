//! First-order formulas over the two supported signatures.
//!
//! The concrete syntax is ASCII:
//!
//! ```text
//! iff   := imp ( "<->" iff )?
//! imp   := or ( "->" imp )?
//! or    := and ( "|" and )*
//! and   := unary ( "&" unary )*
//! unary := "~" unary | ("exists" | "forall") IDENT "." iff | atom | "(" iff ")"
//! atom  := term ("<" | "=") term | "true" | "false"
//! term  := IDENT | "c" DIGITS          (constants only under FiniteEnum)
//! ```
//!
//! `&` and `|` associate to the left, `->` and `<->` to the right, and a
//! quantifier body extends as far to the right as possible. The printer emits
//! the minimum parentheses needed for [`parse`] to rebuild the same tree.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

/// The two signatures the engine understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signature {
    /// `<` and `=`, no constants.
    Dlo,
    /// `=` and constants `c0 .. c{n-1}`.
    FiniteEnum(usize),
}

impl Signature {
    pub fn has_order(self) -> bool {
        matches!(self, Signature::Dlo)
    }

    pub fn constant_count(self) -> usize {
        match self {
            Signature::Dlo => 0,
            Signature::FiniteEnum(n) => n,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signature::Dlo => write!(f, "DLO"),
            Signature::FiniteEnum(n) => write!(f, "FiniteEnum({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(usize),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(k) => write!(f, "c{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Lt => "<",
            Rel::Eq => "=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Term, Rel, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(lhs: Term, rel: Rel, rhs: Term) -> Self {
        Formula::Atom(lhs, rel, rhs)
    }

    pub fn lt(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Formula::Atom(Term::var(lhs), Rel::Lt, Term::var(rhs))
    }

    pub fn eq(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Formula::Atom(Term::var(lhs), Rel::Eq, Term::var(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(body))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Number of nested quantifiers on the deepest branch.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => 0,
            Formula::Not(a) => a.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + a.quantifier_depth(),
        }
    }

    /// Bound variables of every quantifier node, in pre-order.
    pub fn quantifiers(&self) -> Vec<(Quantifier, String)> {
        let mut out = Vec::new();
        self.collect_quantifiers(&mut out);
        out
    }

    fn collect_quantifiers(&self, out: &mut Vec<(Quantifier, String)>) {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => {}
            Formula::Not(a) => a.collect_quantifiers(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_quantifiers(out);
                b.collect_quantifiers(out);
            }
            Formula::Exists(v, a) => {
                out.push((Quantifier::Exists, v.clone()));
                a.collect_quantifiers(out);
            }
            Formula::Forall(v, a) => {
                out.push((Quantifier::Forall, v.clone()));
                a.collect_quantifiers(out);
            }
        }
    }

    /// Whether every symbol belongs to `sig`.
    pub fn check_signature(&self, sig: Signature) -> Result<(), FormulaError> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(l, rel, r) => {
                if *rel == Rel::Lt && !sig.has_order() {
                    return Err(FormulaError::Symbol {
                        symbol: "<".into(),
                        sig,
                    });
                }
                for t in [l, r] {
                    if let Term::Const(k) = t {
                        if *k >= sig.constant_count() {
                            return Err(FormulaError::Symbol {
                                symbol: t.to_string(),
                                sig,
                            });
                        }
                    }
                }
                Ok(())
            }
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.check_signature(sig),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.check_signature(sig)?;
                b.check_signature(sig)
            }
        }
    }
}

/// Variables with a free occurrence, in order of first occurrence.
pub fn free_vars(f: &Formula) -> Vec<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(l, _, r) => {
                for t in [l, r] {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) && !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
            }
            Formula::Not(a) => go(a, bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                bound.push(v.clone());
                go(a, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Appends primes to `base` until the name avoids everything in `taken`.
pub fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    let mut name = format!("{base}'");
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Capture-avoiding substitution of free occurrences.
///
/// A bound variable that would capture a variable of a substituted term is
/// renamed with the prime-suffix scheme (`u`, `u'`, `u''`, ...).
pub fn substitute(f: &Formula, map: &BTreeMap<String, Term>) -> Formula {
    let subst_term = |t: &Term, map: &BTreeMap<String, Term>| match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(l, rel, r) => Formula::Atom(subst_term(l, map), *rel, subst_term(r, map)),
        Formula::Not(a) => Formula::not(substitute(a, map)),
        Formula::And(a, b) => Formula::and(substitute(a, map), substitute(b, map)),
        Formula::Or(a, b) => Formula::or(substitute(a, map), substitute(b, map)),
        Formula::Implies(a, b) => Formula::implies(substitute(a, map), substitute(b, map)),
        Formula::Iff(a, b) => Formula::iff(substitute(a, map), substitute(b, map)),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let body_free = free_vars(body);
            let mut inner: BTreeMap<String, Term> = map
                .iter()
                .filter(|(k, _)| *k != v && body_free.contains(k))
                .map(|(k, t)| (k.clone(), t.clone()))
                .collect();
            let captures = inner.values().any(|t| t.as_var() == Some(v.as_str()));
            let (var, body) = if captures {
                let mut taken: HashSet<String> = body_free.iter().cloned().collect();
                taken.extend(inner.values().filter_map(|t| t.as_var().map(str::to_owned)));
                let renamed = fresh_name(v, &taken);
                inner.insert(v.clone(), Term::Var(renamed.clone()));
                (renamed, substitute(body, &inner))
            } else {
                (v.clone(), substitute(body, &inner))
            };
            match f {
                Formula::Exists(..) => Formula::Exists(var, Box::new(body)),
                _ => Formula::Forall(var, Box::new(body)),
            }
        }
    }
}

/// Substitutes a single variable.
pub fn substitute_one(f: &Formula, var: &str, term: Term) -> Formula {
    let mut map = BTreeMap::new();
    map.insert(var.to_owned(), term);
    substitute(f, &map)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("symbol `{symbol}` is not in signature {sig}")]
    Symbol { symbol: String, sig: Signature },
}

// ---------------------------------------------------------------- printing

const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_UNARY: u8 = 5;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f, 0, true)
    }
}

// `tail` is true when nothing follows this subformula in its enclosing
// context, which is the only place an unparenthesized quantifier may sit.
fn write_formula(form: &Formula, f: &mut fmt::Formatter<'_>, ctx: u8, tail: bool) -> fmt::Result {
    let binary = |f: &mut fmt::Formatter<'_>, own: u8, lctx: u8, rctx: u8, op: &str, l: &Formula, r: &Formula| {
        let paren = own < ctx;
        if paren {
            f.write_str("(")?;
        }
        write_formula(l, f, lctx, false)?;
        write!(f, " {op} ")?;
        write_formula(r, f, rctx, tail || paren)?;
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    };
    match form {
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::Atom(l, rel, r) => write!(f, "{l} {rel} {r}"),
        Formula::Not(a) => {
            f.write_str("~")?;
            write_formula(a, f, PREC_UNARY, tail)
        }
        Formula::And(l, r) => binary(f, PREC_AND, PREC_AND, PREC_UNARY, "&", l, r),
        Formula::Or(l, r) => binary(f, PREC_OR, PREC_OR, PREC_AND, "|", l, r),
        Formula::Implies(l, r) => binary(f, PREC_IMP, PREC_OR, PREC_IMP, "->", l, r),
        Formula::Iff(l, r) => binary(f, PREC_IFF, PREC_IMP, PREC_IFF, "<->", l, r),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let kw = if matches!(form, Formula::Exists(..)) { "exists" } else { "forall" };
            if !tail {
                f.write_str("(")?;
            }
            write!(f, "{kw} {v}. ")?;
            write_formula(body, f, 0, true)?;
            if !tail {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Lt,
    Eq,
    Dot,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'=' => Tok::Eq,
            b'.' => Tok::Dot,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Tok::Iff
            }
            b'<' => Tok::Lt,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_owned())));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(FormulaError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    sig: Signature,
}

const KEYWORDS: [&str; 4] = ["exists", "forall", "true", "false"];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.imp()?;
        if self.eat(&Tok::Iff) {
            Ok(Formula::iff(lhs, self.iff()?))
        } else {
            Ok(lhs)
        }
    }

    fn imp(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            Ok(Formula::implies(lhs, self.imp()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(Tok::Ident(word)) if word == "exists" || word == "forall" => {
                self.pos += 1;
                let var = match self.peek().cloned() {
                    Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => v,
                    _ => return self.err("expected a variable after quantifier"),
                };
                if self.constant_index(&var).is_some() {
                    return self.err(format!("cannot quantify over constant `{var}`"));
                }
                self.pos += 1;
                if !self.eat(&Tok::Dot) {
                    return self.err("expected `.` after quantified variable");
                }
                let body = self.iff()?;
                Ok(if word == "exists" {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                })
            }
            Some(Tok::Ident(word)) if word == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(word)) if word == "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(_)) => self.atom(),
            Some(_) => self.err("expected a formula"),
            None => self.err("unexpected end of input"),
        }
    }

    fn constant_index(&self, word: &str) -> Option<usize> {
        if let Signature::FiniteEnum(_) = self.sig {
            let digits = word.strip_prefix('c')?;
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return digits.parse().ok();
            }
        }
        None
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Ident(word)) if !KEYWORDS.contains(&word.as_str()) => {
                self.pos += 1;
                match self.constant_index(&word) {
                    Some(k) if k < self.sig.constant_count() => Ok(Term::Const(k)),
                    Some(_) => Err(FormulaError::Symbol {
                        symbol: word,
                        sig: self.sig,
                    }),
                    None => Ok(Term::Var(word)),
                }
            }
            _ => Err(FormulaError::Syntax {
                pos: at,
                msg: "expected a term".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Some(Tok::Lt) => {
                if !self.sig.has_order() {
                    return Err(FormulaError::Symbol {
                        symbol: "<".into(),
                        sig: self.sig,
                    });
                }
                Rel::Lt
            }
            Some(Tok::Eq) => Rel::Eq,
            _ => return self.err("expected `<` or `=`"),
        };
        self.pos += 1;
        let rhs = self.term()?;
        Ok(Formula::Atom(lhs, rel, rhs))
    }
}

/// Parses `text` under `sig`.
pub fn parse(text: &str, sig: Signature) -> Result<Formula, FormulaError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        sig,
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dlo(s: &str) -> Formula {
        parse(s, Signature::Dlo).unwrap()
    }

    #[test]
    fn parses_single_atom() {
        assert_eq!(dlo("a < b"), Formula::lt("a", "b"));
    }

    #[test]
    fn parses_quantified_conjunction() {
        assert_eq!(
            dlo("exists u. (a < u & u < b)"),
            Formula::exists("u", Formula::and(Formula::lt("a", "u"), Formula::lt("u", "b")))
        );
        // body extends to the right without parentheses too
        assert_eq!(dlo("exists u. a < u & u < b"), dlo("exists u. (a < u & u < b)"));
    }

    #[test]
    fn parses_constant_atom() {
        let f = parse("x = c1", Signature::FiniteEnum(2)).unwrap();
        assert_eq!(f, Formula::Atom(Term::var("x"), Rel::Eq, Term::Const(1)));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            dlo("~a < b & c < d | e = f -> g = h <-> i = j"),
            Formula::iff(
                Formula::implies(
                    Formula::or(
                        Formula::and(Formula::not(Formula::lt("a", "b")), Formula::lt("c", "d")),
                        Formula::eq("e", "f")
                    ),
                    Formula::eq("g", "h")
                ),
                Formula::eq("i", "j")
            )
        );
        assert_eq!(
            dlo("a = b -> b = c -> c = d"),
            Formula::implies(
                Formula::eq("a", "b"),
                Formula::implies(Formula::eq("b", "c"), Formula::eq("c", "d"))
            )
        );
    }

    #[test]
    fn signature_errors() {
        assert!(matches!(
            parse("x < y", Signature::FiniteEnum(2)),
            Err(FormulaError::Symbol { .. })
        ));
        assert!(matches!(
            parse("x = c2", Signature::FiniteEnum(2)),
            Err(FormulaError::Symbol { .. })
        ));
        // under DLO `c1` is just a variable name
        assert_eq!(dlo("x = c1"), Formula::eq("x", "c1"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse("a < ", Signature::Dlo),
            Err(FormulaError::Syntax {
                pos: 4,
                msg: "expected a term".into()
            })
        );
        match parse("a < b )", Signature::Dlo) {
            Err(FormulaError::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse("a # b", Signature::Dlo).is_err());
        assert!(parse("exists . a < b", Signature::Dlo).is_err());
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(free_vars(&dlo("a < b")), vec!["a", "b"]);
        assert_eq!(free_vars(&dlo("exists u. a < u")), vec!["a"]);
        assert!(free_vars(&dlo("forall u. exists v. u < v")).is_empty());
        assert_eq!(free_vars(&dlo("b < a & (exists a. a < c) & a = d")), vec!["b", "a", "c", "d"]);
    }

    #[test]
    fn substitute_examples() {
        let s = |f: &str, v: &str, t: &str| substitute_one(&dlo(f), v, Term::var(t)).to_string();
        assert_eq!(s("u < v", "u", "a"), "a < v");
        assert_eq!(s("exists u. u < v", "v", "u"), "exists u'. u' < u");
        assert_eq!(s("u = u", "u", "a"), "a = a");
        // bound occurrences are untouched
        assert_eq!(s("exists u. u < v", "u", "a"), "exists u. u < v");
        // renaming skips names already in use
        assert_eq!(s("exists u. u < v & u' = v", "v", "u"), "exists u''. u'' < u & u' = u");
    }

    #[test]
    fn printer_parenthesizes_quantifiers() {
        let f = Formula::and(Formula::exists("u", Formula::lt("u", "a")), Formula::lt("a", "b"));
        assert_eq!(f.to_string(), "(exists u. u < a) & a < b");
        let g = Formula::and(Formula::lt("a", "b"), Formula::exists("u", Formula::lt("u", "a")));
        assert_eq!(g.to_string(), "a < b & exists u. u < a");
        let h = Formula::or(g.clone(), Formula::True);
        assert_eq!(h.to_string(), "a < b & (exists u. u < a) | true");
        assert_eq!(dlo(&h.to_string()), h);
    }

    fn arb_formula(sig: Signature) -> impl Strategy<Value = Formula> {
        let vars = prop::sample::select(vec!["a", "b", "u", "v", "w'"]);
        let term = match sig {
            Signature::Dlo => vars.prop_map(Term::var).boxed(),
            Signature::FiniteEnum(n) => prop_oneof![
                vars.prop_map(Term::var),
                (0..n).prop_map(Term::Const)
            ]
            .boxed(),
        };
        let rel = if sig.has_order() {
            prop_oneof![Just(Rel::Lt), Just(Rel::Eq)].boxed()
        } else {
            Just(Rel::Eq).boxed()
        };
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (term.clone(), rel, term).prop_map(|(l, r, t)| Formula::Atom(l, r, t)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            let var = prop::sample::select(vec!["u", "v", "x"]);
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
                (var.clone(), inner.clone()).prop_map(|(v, a)| Formula::exists(v, a)),
                (var, inner).prop_map(|(v, a)| Formula::forall(v, a)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in arb_formula(Signature::Dlo)) {
            prop_assert_eq!(parse(&f.to_string(), Signature::Dlo).unwrap(), f);
        }

        #[test]
        fn print_then_parse_is_identity_finite(f in arb_formula(Signature::FiniteEnum(3))) {
            prop_assert_eq!(parse(&f.to_string(), Signature::FiniteEnum(3)).unwrap(), f);
        }

        #[test]
        fn substitution_free_vars(f in arb_formula(Signature::Dlo), target in "[ab]") {
            let fv = free_vars(&f);
            prop_assume!(fv.contains(&"u".to_string()));
            let g = substitute_one(&f, "u", Term::var(target.clone()));
            let mut expected: Vec<String> = fv.into_iter().filter(|v| v != "u").collect();
            if !expected.contains(&target) {
                expected.push(target);
            }
            let mut got = free_vars(&g);
            expected.sort();
            got.sort();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn substitution_keeps_quantifier_kinds(f in arb_formula(Signature::Dlo), target in "[abu]") {
            let g = substitute_one(&f, "v", Term::var(target));
            let kinds = |h: &Formula| h.quantifiers().into_iter().map(|(q, _)| q).collect::<Vec<_>>();
            prop_assert_eq!(kinds(&f), kinds(&g));
        }
    }
}
