//! Random elements as step functions over a finite partition.
//!
//! An element is identified with its vector of values, one per atom. Because
//! every atom has strictly positive weight, two elements at `d_K` distance
//! zero are equal vectors, so there is no separate quotient by null sets.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::formula::{free_vars, Formula, Rel, Term};
use crate::measure::{Event, MeasureError, Partition, Refinement};
use crate::rational::{format_fraction, int, Rational};
use crate::theory::qe::{dnf, Nnf};
use crate::theory::{qe, Assignment, Theory, TheoryError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RandError {
    #[error("element `{name}` has {got} values but the partition has {expected} atoms")]
    LengthMismatch { name: String, expected: usize, got: usize },
    #[error("value out of domain: element `{name}` at atom {atom}")]
    Domain { name: String, atom: usize },
    #[error("duplicate element name `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("free variable `{0}` is not bound to an element")]
    Unbound(String),
    #[error("{op} is only defined for {needs}, not {got}")]
    WrongTheory { op: &'static str, needs: &'static str, got: String },
    #[error("characteristic function needs elements that differ on every atom")]
    NotEverywhereDistinct,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// A step function: one model value per atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RandElem(Vec<Rational>);

impl RandElem {
    pub fn new(values: Vec<Rational>) -> Self {
        RandElem(values)
    }

    pub fn constant(value: Rational, atoms: usize) -> Self {
        RandElem(vec![value; atoms])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, atom: usize) -> &Rational {
        &self.0[atom]
    }

    fn same_len(&self, other: &RandElem) -> Result<(), RandError> {
        if self.len() != other.len() {
            return Err(MeasureError::PartitionMismatch(self.len(), other.len()).into());
        }
        Ok(())
    }

    /// Where the two elements take the same value.
    pub fn agreement(&self, other: &RandElem) -> Result<Event, RandError> {
        self.same_len(other)?;
        Ok(Event::from_predicate(self.len(), |i| self.0[i] == other.0[i]))
    }
}

impl fmt::Display for RandElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&format_fraction(v))?;
        }
        f.write_str(")")
    }
}

/// Value on `e`, `b` off it.
pub fn glue(a: &RandElem, b: &RandElem, e: &Event) -> Result<RandElem, RandError> {
    a.same_len(b)?;
    if e.universe() != a.len() {
        return Err(MeasureError::PartitionMismatch(e.universe(), a.len()).into());
    }
    Ok(RandElem(
        (0..a.len())
            .map(|i| if e.contains(i) { a.0[i].clone() } else { b.0[i].clone() })
            .collect(),
    ))
}

/// The characteristic function of `e` with respect to `a` and `b`, which
/// must differ on every atom.
pub fn char_fn(e: &Event, a: &RandElem, b: &RandElem) -> Result<RandElem, RandError> {
    if !a.agreement(b)?.is_bottom() {
        return Err(RandError::NotEverywhereDistinct);
    }
    glue(a, b, e)
}

pub type Binding<'a> = HashMap<String, &'a RandElem>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Randomization {
    theory: Theory,
    partition: Partition,
    elements: IndexMap<String, RandElem>,
}

impl Randomization {
    pub fn new(
        theory: Theory,
        partition: Partition,
        elements: impl IntoIterator<Item = (String, RandElem)>,
    ) -> Result<Self, RandError> {
        let mut r = Randomization {
            theory,
            partition,
            elements: IndexMap::new(),
        };
        for (name, e) in elements {
            r.insert(name, e)?;
        }
        Ok(r)
    }

    /// Adds a named element after validating length and domain.
    pub fn insert(&mut self, name: String, e: RandElem) -> Result<(), RandError> {
        if self.elements.contains_key(&name) {
            return Err(RandError::DuplicateElement(name));
        }
        self.validate(&name, &e)?;
        self.elements.insert(name, e);
        Ok(())
    }

    fn validate(&self, name: &str, e: &RandElem) -> Result<(), RandError> {
        if e.len() != self.partition.len() {
            return Err(RandError::LengthMismatch {
                name: name.to_owned(),
                expected: self.partition.len(),
                got: e.len(),
            });
        }
        if let Some(atom) = e.0.iter().position(|v| !self.theory.in_domain(v)) {
            return Err(RandError::Domain {
                name: name.to_owned(),
                atom,
            });
        }
        Ok(())
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn atoms(&self) -> usize {
        self.partition.len()
    }

    pub fn elements(&self) -> &IndexMap<String, RandElem> {
        &self.elements
    }

    pub fn element(&self, name: &str) -> Result<&RandElem, RandError> {
        self.elements
            .get(name)
            .ok_or_else(|| RandError::UnknownElement(name.to_owned()))
    }

    /// First name under which `e` is stored, if any.
    pub fn name_of(&self, e: &RandElem) -> Option<&str> {
        self.elements
            .iter()
            .find(|(_, v)| *v == e)
            .map(|(k, _)| k.as_str())
    }

    /// Binds each `(variable, element name)` pair.
    pub fn bind<'a>(&'a self, pairs: &[(&str, &str)]) -> Result<Binding<'a>, RandError> {
        pairs
            .iter()
            .map(|(v, name)| Ok(((*v).to_owned(), self.element(name)?)))
            .collect()
    }

    /// Binds every free variable of `f` to the element of the same name.
    pub fn bind_by_name<'a>(&'a self, f: &Formula) -> Result<Binding<'a>, RandError> {
        free_vars(f)
            .into_iter()
            .map(|v| {
                let e = self.element(&v)?;
                Ok((v, e))
            })
            .collect()
    }

    fn assignment_at(&self, vars: &[String], binding: &Binding<'_>, atom: usize) -> Assignment {
        vars.iter()
            .map(|v| (v.clone(), binding[v].0[atom].clone()))
            .collect()
    }

    fn check_binding(&self, f: &Formula, binding: &Binding<'_>) -> Result<Vec<String>, RandError> {
        let vars = free_vars(f);
        for v in &vars {
            let e = binding.get(v).ok_or_else(|| RandError::Unbound(v.clone()))?;
            if e.len() != self.atoms() {
                return Err(MeasureError::PartitionMismatch(e.len(), self.atoms()).into());
            }
        }
        Ok(vars)
    }

    /// The event `{ w : M |= f(binding(w)) }`.
    pub fn eval_event(&self, f: &Formula, binding: &Binding<'_>) -> Result<Event, RandError> {
        let vars = self.check_binding(f, binding)?;
        let reduced = if self.theory.is_dlo() { qe(f) } else { f.clone() };
        let mut members = Vec::new();
        for atom in 0..self.atoms() {
            let assign = self.assignment_at(&vars, binding, atom);
            let holds = if self.theory.is_dlo() {
                self.theory.eval_qf(&reduced, &assign)?
            } else {
                self.theory.eval(&reduced, &assign)?
            };
            if holds {
                members.push(atom);
            }
        }
        Ok(Event::from_indices(self.atoms(), members))
    }

    /// [`Self::eval_event`] with free variables bound by name.
    pub fn eval_named(&self, f: &Formula) -> Result<Event, RandError> {
        let binding = self.bind_by_name(f)?;
        self.eval_event(f, &binding)
    }

    pub fn mu(&self, e: &Event) -> Rational {
        self.partition.mu(e)
    }

    /// `mu [[a != b]]`.
    pub fn d_k(&self, a: &RandElem, b: &RandElem) -> Result<Rational, RandError> {
        let agree = a.agreement(b)?;
        if agree.universe() != self.atoms() {
            return Err(MeasureError::PartitionMismatch(agree.universe(), self.atoms()).into());
        }
        Ok(self.mu(&agree.complement()))
    }

    fn require_dlo(&self, op: &'static str) -> Result<(), RandError> {
        if !self.theory.is_dlo() {
            return Err(RandError::WrongTheory {
                op,
                needs: "DLO",
                got: self.theory.signature().to_string(),
            });
        }
        Ok(())
    }

    /// `x` where `a < b`, `y` elsewhere.
    pub fn ell(&self, a: &RandElem, b: &RandElem, x: &RandElem, y: &RandElem) -> Result<RandElem, RandError> {
        self.require_dlo("ell")?;
        a.same_len(b)?;
        let less = Event::from_predicate(a.len(), |i| a.0[i] < b.0[i]);
        glue(x, y, &less)
    }

    pub fn min_elem(&self, a: &RandElem, b: &RandElem) -> Result<RandElem, RandError> {
        self.require_dlo("min")?;
        a.same_len(b)?;
        Ok(RandElem(a.0.iter().zip(&b.0).map(|(x, y)| x.min(y).clone()).collect()))
    }

    pub fn max_elem(&self, a: &RandElem, b: &RandElem) -> Result<RandElem, RandError> {
        self.require_dlo("max")?;
        a.same_len(b)?;
        Ok(RandElem(a.0.iter().zip(&b.0).map(|(x, y)| x.max(y).clone()).collect()))
    }

    /// An element `w` with `[[theta(w, ...)]] = [[exists var. theta]]`.
    ///
    /// On each atom where `exists var. theta` holds, DLO picks the forced
    /// value under an equality, else the midpoint of the tightest open
    /// interval, else one below the least upper bound or one above the
    /// greatest lower bound; constraints are read off the first satisfied
    /// disjunct of the formula's DNF. The finite theory picks the least
    /// satisfying element. Elsewhere the value is 0.
    pub fn witness(&self, theta: &Formula, var: &str, binding: &Binding<'_>) -> Result<RandElem, RandError> {
        let mut binding = binding.clone();
        binding.remove(var);
        let exists = Formula::exists(var, theta.clone());
        let vars = self.check_binding(&exists, &binding)?;
        let mut values = Vec::with_capacity(self.atoms());
        if self.theory.is_dlo() {
            let reduced = qe(theta);
            let cases = dnf(&Nnf::from_formula(&reduced, true));
            for atom in 0..self.atoms() {
                let assign = self.assignment_at(&vars, &binding, atom);
                let chosen = cases.iter().find_map(|conj| pick_in_conj(conj, var, &assign));
                values.push(chosen.unwrap_or_else(|| self.theory.default_value()));
            }
        } else {
            let n = self.theory.domain_size().unwrap_or(0);
            for atom in 0..self.atoms() {
                let mut assign = self.assignment_at(&vars, &binding, atom);
                let mut chosen = None;
                for k in 0..n {
                    assign.insert(var.to_owned(), int(k as i64));
                    if self.theory.eval(theta, &assign)? {
                        chosen = Some(int(k as i64));
                        break;
                    }
                }
                values.push(chosen.unwrap_or_else(|| self.theory.default_value()));
            }
        }
        Ok(RandElem(values))
    }

    /// Splits `atom` into `k` equal pieces and copies every element's value
    /// onto the pieces.
    pub fn refine(&self, atom: usize, k: usize) -> Result<(Randomization, Refinement), RandError> {
        let (partition, map) = self.partition.refine(atom, k)?;
        let elements = self
            .elements
            .iter()
            .map(|(n, e)| (n.clone(), RandElem(map.transport_values(&e.0))))
            .collect();
        Ok((
            Randomization {
                theory: self.theory,
                partition,
                elements,
            },
            map,
        ))
    }

    pub fn transport(&self, map: &Refinement, e: &RandElem) -> RandElem {
        RandElem(map.transport_values(&e.0))
    }
}

/// A value for `var` satisfying every literal of `conj` under `assign`, using
/// the deterministic selection rule, or `None` if the conjunction fails.
fn pick_in_conj(conj: &crate::theory::qe::Conj, var: &str, assign: &Assignment) -> Option<Rational> {
    let value = |t: &Term| -> Rational {
        match t {
            Term::Var(v) => assign[v].clone(),
            Term::Const(k) => int(*k as i64),
        }
    };
    let mut forced: Option<Rational> = None;
    let mut lower: Option<Rational> = None;
    let mut upper: Option<Rational> = None;
    for lit in conj {
        let (l_is, r_is) = (lit.lhs.as_var() == Some(var), lit.rhs.as_var() == Some(var));
        match (l_is, r_is, lit.rel) {
            (false, false, rel) => {
                let (a, b) = (value(&lit.lhs), value(&lit.rhs));
                let ok = match rel {
                    Rel::Lt => a < b,
                    Rel::Eq => a == b,
                };
                if !ok {
                    return None;
                }
            }
            (true, false, Rel::Eq) | (false, true, Rel::Eq) => {
                let other = if l_is { value(&lit.rhs) } else { value(&lit.lhs) };
                match &forced {
                    Some(f) if *f != other => return None,
                    _ => forced = Some(other),
                }
            }
            (true, false, Rel::Lt) => {
                let h = value(&lit.rhs);
                upper = Some(match upper {
                    Some(u) if u <= h => u,
                    _ => h,
                });
            }
            (false, true, Rel::Lt) => {
                let l = value(&lit.lhs);
                lower = Some(match lower {
                    Some(x) if x >= l => x,
                    _ => l,
                });
            }
            // normalized literals never relate a variable to itself
            (true, true, _) => return None,
        }
    }
    if let Some(f) = forced {
        let above = lower.as_ref().is_none_or(|l| *l < f);
        let below = upper.as_ref().is_none_or(|u| f < *u);
        return (above && below).then_some(f);
    }
    match (lower, upper) {
        (Some(l), Some(u)) => (l < u).then(|| (l + u) / int(2)),
        (None, Some(u)) => Some(u - int(1)),
        (Some(l), None) => Some(l + int(1)),
        (None, None) => Some(int(0)),
    }
}
