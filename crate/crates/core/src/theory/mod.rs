//! Decision procedures for the two complete theories: dense linear order
//! without endpoints, and a finite structure `{0, ..., n-1}` naming every
//! element by a constant.

pub mod qe;

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::formula::{free_vars, fresh_name, substitute_one, Formula, Rel, Signature, Term};
use crate::rational::{as_index, int, Rational};

pub use qe::qe;

/// Variable assignment for evaluation.
pub type Assignment = HashMap<String, Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("finite enumerated theory needs at least two elements, got {0}")]
    TooSmall(usize),
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("formula is not quantifier-free")]
    NotQuantifierFree,
}

/// A complete theory together with its canonical model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Theory {
    sig: Signature,
}

impl Theory {
    pub fn dlo() -> Self {
        Theory { sig: Signature::Dlo }
    }

    /// Models always have at least two elements, so `n >= 2`.
    pub fn finite_enum(n: usize) -> Result<Self, TheoryError> {
        if n < 2 {
            return Err(TheoryError::TooSmall(n));
        }
        Ok(Theory {
            sig: Signature::FiniteEnum(n),
        })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn is_dlo(&self) -> bool {
        self.sig == Signature::Dlo
    }

    /// Domain size for the finite theory, `None` for DLO.
    pub fn domain_size(&self) -> Option<usize> {
        match self.sig {
            Signature::Dlo => None,
            Signature::FiniteEnum(n) => Some(n),
        }
    }

    pub fn in_domain(&self, v: &Rational) -> bool {
        match self.sig {
            Signature::Dlo => true,
            Signature::FiniteEnum(n) => as_index(v).is_some_and(|k| k < n),
        }
    }

    /// The value a "nothing in particular" witness falls back to.
    pub fn default_value(&self) -> Rational {
        int(0)
    }

    /// Truth of a quantifier-free formula.
    pub fn eval_qf(&self, f: &Formula, assign: &Assignment) -> Result<bool, TheoryError> {
        eval_qf(f, assign)
    }

    /// Truth of an arbitrary formula. DLO goes through quantifier
    /// elimination; the finite theory expands quantifiers over its domain.
    pub fn eval(&self, f: &Formula, assign: &Assignment) -> Result<bool, TheoryError> {
        match self.sig {
            Signature::Dlo => eval_qf(&qe(f), assign),
            Signature::FiniteEnum(n) => eval_finite(f, n, &mut assign.clone()),
        }
    }

    /// Truth of the universal closure of `f`.
    pub fn is_valid(&self, f: &Formula) -> bool {
        let closure = free_vars(f)
            .into_iter()
            .rev()
            .fold(f.clone(), |acc, v| Formula::forall(v, acc));
        match self.sig {
            Signature::Dlo => {
                let reduced = qe(&closure);
                // a DLO sentence without constants reduces to true or false
                eval_qf(&reduced, &Assignment::new()).expect("closed formula has no free variables")
            }
            Signature::FiniteEnum(n) => eval_finite(&closure, n, &mut Assignment::new())
                .expect("closed formula has no free variables"),
        }
    }

    /// Whether `f` has at most one solution in `var` for every value of its
    /// other free variables: `forall var var'. f & f[var'/var] -> var = var'`.
    pub fn is_functional(&self, f: &Formula, var: &str) -> bool {
        self.is_valid(&at_most_one(f, var))
    }

    /// One isolating formula per complete `n`-type, in variables `v1..vn`.
    ///
    /// DLO: one chain `u1 a1 u2 ... un` per weak ordering, each `ai` in
    /// `{<, =}`, ordered lexicographically by its token sequence with `<`
    /// before `=`. Finite theory: `v1 = c_j1 & ... & vn = c_jn` for every
    /// assignment, in lexicographic order. For `n = 0` the single formula is
    /// `true`.
    pub fn isolating_formulas(&self, n: usize) -> Vec<Formula> {
        let vars = numbered_vars("v", n);
        match self.sig {
            Signature::Dlo => {
                let mut chains: Vec<Vec<(usize, u8)>> =
                    weak_orderings(n).iter().map(|r| chain_tokens(r)).collect();
                chains.sort();
                chains.iter().map(|c| chain_formula(c, &vars)).collect()
            }
            Signature::FiniteEnum(k) => {
                let mut out = Vec::new();
                let mut digits = vec![0usize; n];
                loop {
                    out.push(const_formula(&digits, &vars));
                    // odometer, last position fastest
                    let mut i = n;
                    loop {
                        if i == 0 {
                            return out;
                        }
                        i -= 1;
                        digits[i] += 1;
                        if digits[i] < k {
                            break;
                        }
                        digits[i] = 0;
                    }
                }
            }
        }
    }

    /// The isolating formula satisfied by `values` (one per variable).
    pub fn type_formula(&self, values: &[Rational], vars: &[String]) -> Formula {
        match self.sig {
            Signature::Dlo => chain_formula(&chain_tokens(&dense_ranks(values)), vars),
            Signature::FiniteEnum(_) => {
                let digits: Vec<usize> = values
                    .iter()
                    .map(|v| as_index(v).expect("finite-theory value in domain"))
                    .collect();
                const_formula(&digits, vars)
            }
        }
    }

    /// Definable closure inside the model: DLO defines nothing beyond the
    /// parameters themselves, and the finite theory names every element.
    pub fn dcl_in_model(&self, value: &Rational, tuple: &[Rational]) -> bool {
        match self.sig {
            Signature::Dlo => tuple.contains(value),
            Signature::FiniteEnum(_) => true,
        }
    }

    /// Interpretation of a constant symbol.
    pub fn constant(&self, k: usize) -> Rational {
        int(k as i64)
    }
}

/// `forall var forall var'. (f & f[var'/var]) -> var = var'`.
pub fn at_most_one(f: &Formula, var: &str) -> Formula {
    let mut taken: HashSet<String> = free_vars(f).into_iter().collect();
    for (_, v) in f.quantifiers() {
        taken.insert(v);
    }
    taken.insert(var.to_owned());
    let other = fresh_name(var, &taken);
    let renamed = substitute_one(f, var, Term::Var(other.clone()));
    Formula::forall(
        var,
        Formula::forall(
            other.clone(),
            Formula::implies(Formula::and(f.clone(), renamed), Formula::eq(var, other)),
        ),
    )
}

/// `v1 .. vn` style names.
pub fn numbered_vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn term_value(t: &Term, assign: &Assignment) -> Result<Rational, TheoryError> {
    match t {
        Term::Var(v) => assign
            .get(v)
            .cloned()
            .ok_or_else(|| TheoryError::Unassigned(v.clone())),
        Term::Const(k) => Ok(int(*k as i64)),
    }
}

fn eval_atom(l: &Term, rel: Rel, r: &Term, assign: &Assignment) -> Result<bool, TheoryError> {
    let (a, b) = (term_value(l, assign)?, term_value(r, assign)?);
    Ok(match rel {
        Rel::Lt => a < b,
        Rel::Eq => a == b,
    })
}

fn eval_qf(f: &Formula, assign: &Assignment) -> Result<bool, TheoryError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(l, rel, r) => eval_atom(l, *rel, r, assign)?,
        Formula::Not(a) => !eval_qf(a, assign)?,
        Formula::And(a, b) => eval_qf(a, assign)? && eval_qf(b, assign)?,
        Formula::Or(a, b) => eval_qf(a, assign)? || eval_qf(b, assign)?,
        Formula::Implies(a, b) => !eval_qf(a, assign)? || eval_qf(b, assign)?,
        Formula::Iff(a, b) => eval_qf(a, assign)? == eval_qf(b, assign)?,
        Formula::Exists(..) | Formula::Forall(..) => return Err(TheoryError::NotQuantifierFree),
    })
}

fn eval_finite(f: &Formula, n: usize, assign: &mut Assignment) -> Result<bool, TheoryError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(l, rel, r) => eval_atom(l, *rel, r, assign)?,
        Formula::Not(a) => !eval_finite(a, n, assign)?,
        Formula::And(a, b) => eval_finite(a, n, assign)? && eval_finite(b, n, assign)?,
        Formula::Or(a, b) => eval_finite(a, n, assign)? || eval_finite(b, n, assign)?,
        Formula::Implies(a, b) => !eval_finite(a, n, assign)? || eval_finite(b, n, assign)?,
        Formula::Iff(a, b) => eval_finite(a, n, assign)? == eval_finite(b, n, assign)?,
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let want = matches!(f, Formula::Exists(..));
            let saved = assign.remove(v);
            let mut result = !want;
            for k in 0..n {
                assign.insert(v.clone(), int(k as i64));
                if eval_finite(body, n, assign)? == want {
                    result = want;
                    break;
                }
            }
            assign.remove(v);
            if let Some(old) = saved {
                assign.insert(v.clone(), old);
            }
            result
        }
    })
}

/// Points covering every order-cell relative to `values`: the values
/// themselves, midpoints between neighbours, and one point beyond each end.
pub fn cell_representatives(values: impl IntoIterator<Item = Rational>) -> Vec<Rational> {
    let mut sorted: Vec<Rational> = values.into_iter().collect();
    sorted.sort();
    sorted.dedup();
    if sorted.is_empty() {
        return vec![int(0)];
    }
    let mut out = Vec::with_capacity(2 * sorted.len() + 1);
    out.push(&sorted[0] - int(1));
    for w in sorted.windows(2) {
        out.push(w[0].clone());
        out.push((&w[0] + &w[1]) / int(2));
    }
    let last = sorted[sorted.len() - 1].clone();
    out.push(last.clone());
    out.push(last + int(1));
    out
}

/// DLO truth by direct search: a quantified variable ranges over one
/// representative of each order-cell relative to the values already assigned.
/// Independent of [`qe`]; used to cross-check it.
pub fn eval_direct(f: &Formula, assign: &Assignment) -> Result<bool, TheoryError> {
    fn go(f: &Formula, assign: &mut Assignment) -> Result<bool, TheoryError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(l, rel, r) => eval_atom(l, *rel, r, assign)?,
            Formula::Not(a) => !go(a, assign)?,
            Formula::And(a, b) => go(a, assign)? && go(b, assign)?,
            Formula::Or(a, b) => go(a, assign)? || go(b, assign)?,
            Formula::Implies(a, b) => !go(a, assign)? || go(b, assign)?,
            Formula::Iff(a, b) => go(a, assign)? == go(b, assign)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let want = matches!(f, Formula::Exists(..));
                let saved = assign.remove(v);
                let candidates = cell_representatives(assign.values().cloned());
                let mut result = !want;
                for c in candidates {
                    assign.insert(v.clone(), c);
                    if go(body, assign)? == want {
                        result = want;
                        break;
                    }
                }
                assign.remove(v);
                if let Some(old) = saved {
                    assign.insert(v.clone(), old);
                }
                result
            }
        })
    }
    go(f, &mut assign.clone())
}

/// Dense ranks: equal values share a rank, ranks are `0..k` in value order.
pub fn dense_ranks(values: &[Rational]) -> Vec<usize> {
    let mut sorted: Vec<&Rational> = values.iter().collect();
    sorted.sort();
    sorted.dedup();
    values
        .iter()
        .map(|v| sorted.binary_search(&v).expect("value present"))
        .collect()
}

/// Every weak ordering of `n` items as a dense rank vector.
pub fn weak_orderings(n: usize) -> Vec<Vec<usize>> {
    // set partitions as restricted growth strings, then every block order
    fn partitions(i: usize, n: usize, cur: &mut Vec<usize>, blocks: usize, out: &mut Vec<(Vec<usize>, usize)>) {
        if i == n {
            out.push((cur.clone(), blocks));
            return;
        }
        for b in 0..=blocks {
            cur.push(b);
            partitions(i + 1, n, cur, blocks.max(b + 1), out);
            cur.pop();
        }
    }
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let mut parts = Vec::new();
    partitions(0, n, &mut Vec::new(), 0, &mut parts);
    let mut out = Vec::new();
    for (blocks_of, k) in parts {
        for perm in permutations(k) {
            out.push(blocks_of.iter().map(|&b| perm[b]).collect());
        }
    }
    out
}

// chain encoding: (variable index, relation to the next variable), where the
// relation code is 0 for `<`, 1 for `=`, 2 for "last"
fn chain_tokens(ranks: &[usize]) -> Vec<(usize, u8)> {
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by_key(|&i| (ranks[i], i));
    order
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let rel = match order.get(pos + 1) {
                None => 2,
                Some(&j) if ranks[j] == ranks[i] => 1,
                Some(_) => 0,
            };
            (i, rel)
        })
        .collect()
}

fn chain_formula(tokens: &[(usize, u8)], vars: &[String]) -> Formula {
    Formula::conj(tokens.windows(2).map(|w| {
        let rel = if w[0].1 == 0 { Rel::Lt } else { Rel::Eq };
        Formula::Atom(Term::Var(vars[w[0].0].clone()), rel, Term::Var(vars[w[1].0].clone()))
    }))
}

fn const_formula(digits: &[usize], vars: &[String]) -> Formula {
    Formula::conj(
        digits
            .iter()
            .zip(vars)
            .map(|(&k, v)| Formula::Atom(Term::Var(v.clone()), Rel::Eq, Term::Const(k))),
    )
}

/// Builds an assignment from `(variable, value)` pairs.
pub fn assignment<'a>(pairs: impl IntoIterator<Item = (&'a str, Rational)>) -> Assignment {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

/// Ordered map view, handy for deterministic debug output.
pub fn sorted_assignment(a: &Assignment) -> BTreeMap<&str, &Rational> {
    a.iter().map(|(k, v)| (k.as_str(), v)).collect()
}
