//! Quantifier elimination for dense linear orders without endpoints.
//!
//! Quantifiers are removed innermost first. For `exists x. body` the body is
//! put in negation normal form (negated atoms become disjunctions of positive
//! ones, which is sound because the order is total), split along its top-level
//! disjunction, and each disjunct is handled by one of
//!
//! * the one-point rule when the disjunct is a conjunction containing `x = t`,
//! * dropping the quantifier when `x` does not occur,
//! * conversion to DNF and Fourier-Motzkin style elimination: every lower
//!   bound of `x` must lie below every upper bound, which is all density and
//!   the absence of endpoints require.
//!
//! `forall x. body` is `~exists x. ~body`.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Formula, Rel, Term};

/// A positive literal `lhs rel rhs`, normalized so that equalities have their
/// arguments sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub lhs: Term,
    pub rel: Rel,
    pub rhs: Term,
}

/// Result of normalizing a literal.
enum Norm {
    True,
    False,
    Lit(Lit),
}

impl Lit {
    fn normalized(lhs: Term, rel: Rel, rhs: Term) -> Norm {
        if lhs == rhs {
            return match rel {
                Rel::Eq => Norm::True,
                Rel::Lt => Norm::False,
            };
        }
        let (lhs, rhs) = if rel == Rel::Eq && rhs < lhs { (rhs, lhs) } else { (lhs, rhs) };
        Norm::Lit(Lit { lhs, rel, rhs })
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.lhs.as_var() == Some(var) || self.rhs.as_var() == Some(var)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::Atom(self.lhs.clone(), self.rel, self.rhs.clone())
    }

    fn replace(&self, var: &str, by: &Term) -> Norm {
        let sub = |t: &Term| if t.as_var() == Some(var) { by.clone() } else { t.clone() };
        Lit::normalized(sub(&self.lhs), self.rel, sub(&self.rhs))
    }
}

/// Negation normal form over positive literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nnf {
    True,
    False,
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

impl Nnf {
    fn lit(lhs: Term, rel: Rel, rhs: Term) -> Nnf {
        match Lit::normalized(lhs, rel, rhs) {
            Norm::True => Nnf::True,
            Norm::False => Nnf::False,
            Norm::Lit(l) => Nnf::Lit(l),
        }
    }

    fn and(parts: Vec<Nnf>) -> Nnf {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Nnf::True => {}
                Nnf::False => return Nnf::False,
                Nnf::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Nnf::True,
            1 => out.pop().unwrap_or(Nnf::True),
            _ => Nnf::And(out),
        }
    }

    fn or(parts: Vec<Nnf>) -> Nnf {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Nnf::False => {}
                Nnf::True => return Nnf::True,
                Nnf::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Nnf::False,
            1 => out.pop().unwrap_or(Nnf::False),
            _ => Nnf::Or(out),
        }
    }

    /// Converts a quantifier-free formula; `positive = false` negates it.
    pub fn from_formula(f: &Formula, positive: bool) -> Nnf {
        match f {
            Formula::True => if positive { Nnf::True } else { Nnf::False },
            Formula::False => if positive { Nnf::False } else { Nnf::True },
            Formula::Atom(l, rel, r) => {
                if positive {
                    Nnf::lit(l.clone(), *rel, r.clone())
                } else {
                    match rel {
                        // ~(l < r)  ==  r < l | l = r
                        Rel::Lt => Nnf::or(vec![
                            Nnf::lit(r.clone(), Rel::Lt, l.clone()),
                            Nnf::lit(l.clone(), Rel::Eq, r.clone()),
                        ]),
                        // ~(l = r)  ==  l < r | r < l
                        Rel::Eq => Nnf::or(vec![
                            Nnf::lit(l.clone(), Rel::Lt, r.clone()),
                            Nnf::lit(r.clone(), Rel::Lt, l.clone()),
                        ]),
                    }
                }
            }
            Formula::Not(a) => Nnf::from_formula(a, !positive),
            Formula::And(a, b) => {
                let parts = vec![Nnf::from_formula(a, positive), Nnf::from_formula(b, positive)];
                if positive { Nnf::and(parts) } else { Nnf::or(parts) }
            }
            Formula::Or(a, b) => {
                let parts = vec![Nnf::from_formula(a, positive), Nnf::from_formula(b, positive)];
                if positive { Nnf::or(parts) } else { Nnf::and(parts) }
            }
            Formula::Implies(a, b) => {
                if positive {
                    Nnf::or(vec![Nnf::from_formula(a, false), Nnf::from_formula(b, true)])
                } else {
                    Nnf::and(vec![Nnf::from_formula(a, true), Nnf::from_formula(b, false)])
                }
            }
            Formula::Iff(a, b) => {
                let (ap, an) = (Nnf::from_formula(a, true), Nnf::from_formula(a, false));
                let (bp, bn) = (Nnf::from_formula(b, true), Nnf::from_formula(b, false));
                if positive {
                    Nnf::or(vec![Nnf::and(vec![ap, bp]), Nnf::and(vec![an, bn])])
                } else {
                    Nnf::or(vec![Nnf::and(vec![ap, bn]), Nnf::and(vec![an, bp])])
                }
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                panic!("Nnf::from_formula called on a quantified formula")
            }
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            Nnf::True => Formula::True,
            Nnf::False => Formula::False,
            Nnf::Lit(l) => l.to_formula(),
            Nnf::And(parts) => Formula::conj(parts.iter().map(Nnf::to_formula)),
            Nnf::Or(parts) => Formula::disj(parts.iter().map(Nnf::to_formula)),
        }
    }

    fn mentions(&self, var: &str) -> bool {
        match self {
            Nnf::True | Nnf::False => false,
            Nnf::Lit(l) => l.mentions(var),
            Nnf::And(ps) | Nnf::Or(ps) => ps.iter().any(|p| p.mentions(var)),
        }
    }

    fn replace(&self, var: &str, by: &Term) -> Nnf {
        match self {
            Nnf::True => Nnf::True,
            Nnf::False => Nnf::False,
            Nnf::Lit(l) => match l.replace(var, by) {
                Norm::True => Nnf::True,
                Norm::False => Nnf::False,
                Norm::Lit(l) => Nnf::Lit(l),
            },
            Nnf::And(ps) => Nnf::and(ps.iter().map(|p| p.replace(var, by)).collect()),
            Nnf::Or(ps) => Nnf::or(ps.iter().map(|p| p.replace(var, by)).collect()),
        }
    }
}

/// A conjunction of positive literals.
pub type Conj = BTreeSet<Lit>;

/// Whether a conjunction of order literals has a model in a dense order.
///
/// Equalities are merged with union-find; the conjunction is unsatisfiable
/// exactly when a strict edge lands inside one class or closes a cycle.
pub fn consistent(conj: &Conj) -> bool {
    let mut index: BTreeMap<&Term, usize> = BTreeMap::new();
    for l in conj {
        for t in [&l.lhs, &l.rhs] {
            let next = index.len();
            index.entry(t).or_insert(next);
        }
    }
    let n = index.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for l in conj.iter().filter(|l| l.rel == Rel::Eq) {
        let (a, b) = (find(&mut parent, index[&l.lhs]), find(&mut parent, index[&l.rhs]));
        parent[a] = b;
    }
    // distinct constants are distinct elements
    let consts: Vec<(usize, &Term)> = index
        .iter()
        .filter(|(t, _)| matches!(t, Term::Const(_)))
        .map(|(t, &i)| (i, *t))
        .collect();
    for (i, (a, ta)) in consts.iter().enumerate() {
        for (b, tb) in &consts[i + 1..] {
            if ta != tb && find(&mut parent, *a) == find(&mut parent, *b) {
                return false;
            }
        }
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in conj.iter().filter(|l| l.rel == Rel::Lt) {
        let (a, b) = (find(&mut parent, index[&l.lhs]), find(&mut parent, index[&l.rhs]));
        if a == b {
            return false;
        }
        succ[a].push(b);
    }
    // cycle detection on the class graph
    let mut state = vec![0u8; n];
    fn has_cycle(v: usize, succ: &[Vec<usize>], state: &mut [u8]) -> bool {
        state[v] = 1;
        for &w in &succ[v] {
            if state[w] == 1 || (state[w] == 0 && has_cycle(w, succ, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    (0..n).all(|v| state[v] != 0 || !has_cycle(v, &succ, &mut state))
}

fn push_minimal(dnf: &mut Vec<Conj>, c: Conj) {
    if dnf.iter().any(|d| d.is_subset(&c)) {
        return;
    }
    dnf.retain(|d| !c.is_subset(d));
    dnf.push(c);
}

/// Disjunctive normal form with inconsistent and subsumed conjuncts removed.
/// An empty result means `false`; a result containing the empty conjunction
/// means `true`.
pub fn dnf(f: &Nnf) -> Vec<Conj> {
    match f {
        Nnf::True => vec![Conj::new()],
        Nnf::False => Vec::new(),
        Nnf::Lit(l) => vec![std::iter::once(l.clone()).collect()],
        Nnf::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                for c in dnf(p) {
                    push_minimal(&mut out, c);
                }
            }
            out
        }
        Nnf::And(parts) => {
            let mut acc = vec![Conj::new()];
            for p in parts {
                let rhs = dnf(p);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &rhs {
                        let c: Conj = a.union(b).cloned().collect();
                        if consistent(&c) {
                            push_minimal(&mut next, c);
                        }
                    }
                }
                if next.is_empty() {
                    return next;
                }
                acc = next;
            }
            acc
        }
    }
}

fn dnf_to_nnf(dnf: Vec<Conj>) -> Nnf {
    Nnf::or(
        dnf.into_iter()
            .map(|c| Nnf::and(c.into_iter().map(Nnf::Lit).collect()))
            .collect(),
    )
}

/// Eliminates `exists var` from a single conjunction of literals.
fn eliminate_from_conj(var: &str, conj: &Conj) -> Option<Conj> {
    let pinned = conj.iter().find_map(|l| match (l.rel, l.lhs.as_var(), l.rhs.as_var()) {
        (Rel::Eq, Some(v), _) if v == var => Some(l.rhs.clone()),
        (Rel::Eq, _, Some(v)) if v == var => Some(l.lhs.clone()),
        _ => None,
    });
    let mut out = Conj::new();
    if let Some(t) = pinned {
        for l in conj {
            match l.replace(var, &t) {
                Norm::True => {}
                Norm::False => return None,
                Norm::Lit(l) => {
                    out.insert(l);
                }
            }
        }
        return consistent(&out).then_some(out);
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for l in conj {
        if l.lhs.as_var() == Some(var) {
            upper.push(l.rhs.clone());
        } else if l.rhs.as_var() == Some(var) {
            lower.push(l.lhs.clone());
        } else {
            out.insert(l.clone());
        }
    }
    for lo in &lower {
        for hi in &upper {
            match Lit::normalized(lo.clone(), Rel::Lt, hi.clone()) {
                Norm::True => {}
                Norm::False => return None,
                Norm::Lit(l) => {
                    out.insert(l);
                }
            }
        }
    }
    consistent(&out).then_some(out)
}

/// `exists var. body` for a quantifier-free body, as a quantifier-free NNF.
pub fn eliminate_exists(var: &str, body: &Nnf) -> Nnf {
    let disjuncts = match body {
        Nnf::Or(ps) => ps.clone(),
        other => vec![other.clone()],
    };
    let mut pieces = Vec::new();
    for d in disjuncts {
        if !d.mentions(var) {
            pieces.push(d);
            continue;
        }
        // one-point rule on a top-level conjunct `var = t`
        if let Nnf::And(ps) = &d {
            let pin = ps.iter().find_map(|p| match p {
                Nnf::Lit(l) if l.rel == Rel::Eq && l.lhs.as_var() == Some(var) => Some(l.rhs.clone()),
                Nnf::Lit(l) if l.rel == Rel::Eq && l.rhs.as_var() == Some(var) => Some(l.lhs.clone()),
                _ => None,
            });
            if let Some(t) = pin {
                pieces.push(d.replace(var, &t));
                continue;
            }
        }
        if let Nnf::Lit(l) = &d {
            if l.rel == Rel::Eq {
                // exists x. x = t
                pieces.push(Nnf::True);
                continue;
            }
        }
        let eliminated: Vec<Conj> = dnf(&d)
            .iter()
            .filter_map(|c| eliminate_from_conj(var, c))
            .collect();
        let mut minimal = Vec::new();
        for c in eliminated {
            push_minimal(&mut minimal, c);
        }
        pieces.push(dnf_to_nnf(minimal));
    }
    Nnf::or(pieces)
}

/// Returns a quantifier-free formula equivalent to `f` in DLO.
///
/// Quantifier-free subformulas are returned untouched; only quantifier nodes
/// are rewritten.
pub fn qe(f: &Formula) -> Formula {
    if f.is_quantifier_free() {
        return f.clone();
    }
    match f {
        Formula::Exists(v, body) => {
            let body = Nnf::from_formula(&qe(body), true);
            eliminate_exists(v, &body).to_formula()
        }
        Formula::Forall(v, body) => {
            let negated = Nnf::from_formula(&qe(body), false);
            Nnf::from_formula(&eliminate_exists(v, &negated).to_formula(), false).to_formula()
        }
        Formula::Not(a) => fold_not(qe(a)),
        Formula::And(a, b) => fold(Formula::and(qe(a), qe(b))),
        Formula::Or(a, b) => fold(Formula::or(qe(a), qe(b))),
        Formula::Implies(a, b) => fold(Formula::implies(qe(a), qe(b))),
        Formula::Iff(a, b) => fold(Formula::iff(qe(a), qe(b))),
        Formula::True | Formula::False | Formula::Atom(..) => f.clone(),
    }
}

fn fold_not(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        other => Formula::not(other),
    }
}

/// Constant folding of `true`/`false` at the root of a binary node.
fn fold(f: Formula) -> Formula {
    use Formula::*;
    match f {
        And(a, b) => match (*a, *b) {
            (False, _) | (_, False) => False,
            (True, x) | (x, True) => x,
            (x, y) => Formula::and(x, y),
        },
        Or(a, b) => match (*a, *b) {
            (True, _) | (_, True) => True,
            (False, x) | (x, False) => x,
            (x, y) => Formula::or(x, y),
        },
        Implies(a, b) => match (*a, *b) {
            (False, _) | (_, True) => True,
            (True, x) => x,
            (x, False) => fold_not(x),
            (x, y) => Formula::implies(x, y),
        },
        Iff(a, b) => match (*a, *b) {
            (True, x) | (x, True) => x,
            (False, x) | (x, False) => fold_not(x),
            (x, y) => Formula::iff(x, y),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Signature};

    fn dlo(s: &str) -> Formula {
        parse(s, Signature::Dlo).unwrap()
    }

    fn conj(lits: &[&str]) -> Conj {
        lits.iter()
            .map(|s| match dlo(s) {
                Formula::Atom(l, r, t) => match Lit::normalized(l, r, t) {
                    Norm::Lit(l) => l,
                    _ => panic!("trivial literal"),
                },
                _ => panic!("not an atom"),
            })
            .collect()
    }

    #[test]
    fn textbook_examples() {
        assert_eq!(qe(&dlo("exists u. (a < u & u < b)")), dlo("a < b"));
        assert_eq!(qe(&dlo("exists u. u < a")), Formula::True);
        assert_eq!(qe(&dlo("forall u. a < u")), Formula::False);
        assert_eq!(qe(&dlo("forall u. exists v. u < v")), Formula::True);
        assert_eq!(qe(&dlo("exists u. u < u")), Formula::False);
        assert_eq!(qe(&dlo("exists u. u = a & u < b")), dlo("a < b"));
    }

    #[test]
    fn consistency_check() {
        assert!(consistent(&conj(&["a < b", "b < c"])));
        assert!(!consistent(&conj(&["a < b", "b < c", "c < a"])));
        assert!(!consistent(&conj(&["a = b", "b < a"])));
        assert!(!consistent(&conj(&["a = b", "b = c", "a < c"])));
        assert!(consistent(&conj(&["a = b", "b = c", "a < d"])));
    }

    #[test]
    fn dnf_prunes_contradictions() {
        let f = Nnf::from_formula(&dlo("(a < b | b < a) & a = b"), true);
        assert!(dnf(&f).is_empty());
        let g = Nnf::from_formula(&dlo("a < b | a < b & b < c"), true);
        assert_eq!(dnf(&g), vec![conj(&["a < b"])]);
    }
}
