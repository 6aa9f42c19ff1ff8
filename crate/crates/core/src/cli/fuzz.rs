//! Seeded generators for instances, formulas and assignments.
//!
//! All randomness flows from a `ChaCha8Rng`, so a seed fixes every instance
//! and every verdict.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::closure::Params;
use crate::formula::{Formula, Rel, Signature, Term};
use crate::measure::{Event, Partition};
use crate::rational::{frac, int, Rational};
use crate::randvar::{RandElem, Randomization};
use crate::theory::{numbered_vars, Assignment, Theory};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which theories the generator may pick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoryChoice {
    Dlo,
    FiniteEnum,
    Mixed,
}

/// A randomization whose named elements are exactly the parameter tuple.
#[derive(Clone, Debug)]
pub struct Instance {
    pub r: Randomization,
    pub params: Params,
}

/// Weights: 2 to 6 atoms, raw weights dyadic or in thirds, normalized.
pub fn partition(rng: &mut ChaCha8Rng) -> Partition {
    let n = rng.gen_range(2..=6);
    let denom = if rng.gen_bool(0.5) { 4 } else { 3 };
    let raw: Vec<Rational> = (0..n).map(|_| frac(rng.gen_range(1..=denom), denom)).collect();
    let total: Rational = raw.iter().sum();
    Partition::new(
        numbered_vars("w", n)
            .into_iter()
            .zip(raw.into_iter().map(|w| w / &total))
            .collect(),
    )
    .expect("normalized weights")
}

/// A model value: `k/2` for `k` in `0..20` under DLO, an index otherwise.
pub fn value(rng: &mut ChaCha8Rng, theory: &Theory) -> Rational {
    match theory.domain_size() {
        None => frac(rng.gen_range(0..20), 2),
        Some(n) => int(rng.gen_range(0..n) as i64),
    }
}

pub fn element(rng: &mut ChaCha8Rng, theory: &Theory, atoms: usize) -> RandElem {
    RandElem::new((0..atoms).map(|_| value(rng, theory)).collect())
}

pub fn theory(rng: &mut ChaCha8Rng, choice: TheoryChoice) -> Theory {
    let dlo = match choice {
        TheoryChoice::Dlo => true,
        TheoryChoice::FiniteEnum => false,
        TheoryChoice::Mixed => rng.gen_bool(0.75),
    };
    if dlo {
        Theory::dlo()
    } else {
        Theory::finite_enum(rng.gen_range(2..=4)).expect("n >= 2")
    }
}

/// An instance with 0 to 3 parameters named `p1..`.
pub fn instance(rng: &mut ChaCha8Rng, choice: TheoryChoice) -> Instance {
    let theory = theory(rng, choice);
    let partition = partition(rng);
    let atoms = partition.len();
    let k = rng.gen_range(0..=3);
    let elems: Vec<RandElem> = (0..k).map(|_| element(rng, &theory, atoms)).collect();
    let params = Params::from_elems(elems.clone());
    let r = Randomization::new(theory, partition, params.names().iter().cloned().zip(elems))
        .expect("generated elements are valid");
    Instance { r, params }
}

pub fn corpus(seed: u64, count: usize, choice: TheoryChoice) -> Vec<Instance> {
    let mut rng = rng(seed);
    (0..count).map(|_| instance(&mut rng, choice)).collect()
}

pub fn event(rng: &mut ChaCha8Rng, atoms: usize) -> Event {
    let bits: Vec<bool> = (0..atoms).map(|_| rng.gen_bool(0.5)).collect();
    Event::from_predicate(atoms, |i| bits[i])
}

/// A random formula over `free` of quantifier depth at most `depth`. Bound
/// variables are `x1, x2, ..` and may shadow nothing in `free`.
pub fn formula(rng: &mut ChaCha8Rng, sig: Signature, free: &[String], depth: usize) -> Formula {
    let mut scope: Vec<String> = free.to_vec();
    gen_formula(rng, sig, &mut scope, depth, 4)
}

fn gen_term(rng: &mut ChaCha8Rng, sig: Signature, scope: &[String]) -> Term {
    let consts = sig.constant_count();
    // callers never ask for a term when there is neither a variable nor a constant
    if scope.is_empty() || (consts > 0 && rng.gen_bool(0.25)) {
        Term::Const(rng.gen_range(0..consts))
    } else {
        Term::Var(scope.choose(rng).expect("nonempty").clone())
    }
}

fn gen_atom(rng: &mut ChaCha8Rng, sig: Signature, scope: &[String]) -> Formula {
    if scope.is_empty() && sig.constant_count() == 0 {
        return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
    }
    let rel = if sig.has_order() && rng.gen_bool(0.6) { Rel::Lt } else { Rel::Eq };
    Formula::Atom(gen_term(rng, sig, scope), rel, gen_term(rng, sig, scope))
}

fn gen_formula(rng: &mut ChaCha8Rng, sig: Signature, scope: &mut Vec<String>, depth: usize, size: usize) -> Formula {
    if size == 0 {
        return gen_atom(rng, sig, scope);
    }
    let roll = rng.gen_range(0..10);
    match roll {
        0..=1 => gen_atom(rng, sig, scope),
        2 => Formula::not(gen_formula(rng, sig, scope, depth, size - 1)),
        3 | 4 => Formula::and(
            gen_formula(rng, sig, scope, depth, size / 2),
            gen_formula(rng, sig, scope, depth, size / 2),
        ),
        5 => Formula::or(
            gen_formula(rng, sig, scope, depth, size / 2),
            gen_formula(rng, sig, scope, depth, size / 2),
        ),
        6 => {
            let l = gen_formula(rng, sig, scope, depth, size / 2);
            let r = gen_formula(rng, sig, scope, depth, size / 2);
            if rng.gen_bool(0.5) {
                Formula::implies(l, r)
            } else {
                Formula::iff(l, r)
            }
        }
        _ if depth == 0 => gen_atom(rng, sig, scope),
        _ => {
            let v = format!("x{}", scope.iter().filter(|s| s.starts_with('x')).count() + 1);
            scope.push(v.clone());
            let body = gen_formula(rng, sig, scope, depth - 1, size);
            scope.pop();
            if rng.gen_bool(0.5) {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
    }
}

/// Random values for `vars`, drawn from a small pool so ties are common.
pub fn assignment(rng: &mut ChaCha8Rng, theory: &Theory, vars: &[String]) -> Assignment {
    vars.iter()
        .map(|v| {
            let value = match theory.domain_size() {
                None => frac(rng.gen_range(0..8), 2),
                Some(n) => int(rng.gen_range(0..n) as i64),
            };
            (v.clone(), value)
        })
        .collect()
}
