//! Definable closure over a finite parameter set.
//!
//! Everything is computed from the *types* the parameter tuple realizes on
//! the atoms of the partition. The events `[[psi(a)]]` for isolating `psi`
//! are the atoms of the algebra of first-order definable events; since that
//! algebra is finite it is already closed in the event metric and under
//! countable unions, so the definable events coincide with it.
//!
//! Elements are decided several independent ways so they can be checked
//! against each other:
//!
//! * [`is_definable`]: pointwise definable, and adding `b` to the parameters
//!   defines no new events;
//! * [`is_definable_dlo`]: on every type of the parameters `b` agrees with one
//!   of them (DLO only);
//! * [`is_definable_isolating`]: every positive-measure type of `(b, a)` has
//!   the same event as its projection `exists u`;
//! * [`tdcl_check`]: a partition of the whole space into definable events on
//!   each of which `b` is defined by a functional formula;
//! * membership in [`dcl_enumerate`] or [`fdcl_enumerate`].
//!
//! Algebraic closure coincides with definable closure in this setting, so
//! there is no separate `acl`.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::formula::{Formula, Rel, Term};
use crate::measure::{Event, EventAlgebra, MeasureError};
use crate::randvar::{Binding, RandElem, RandError, Randomization};
use crate::theory::numbered_vars;

pub type ElemSet = BTreeSet<RandElem>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element `{0}` listed twice in the parameter set")]
    DuplicateParam(String),
    #[error("{0} is only defined for DLO")]
    DloOnly(&'static str),
    #[error(transparent)]
    Rand(#[from] RandError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// An ordered parameter tuple, optionally carrying element names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    names: Vec<String>,
    elems: Vec<RandElem>,
}

impl Params {
    pub fn from_names<S: AsRef<str>>(r: &Randomization, names: &[S]) -> Result<Self, ClosureError> {
        let mut seen = HashSet::new();
        let mut elems = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !seen.insert(n) {
                return Err(ClosureError::DuplicateParam(n.to_owned()));
            }
            let e = r
                .element(n)
                .map_err(|_| ClosureError::UnknownElement(n.to_owned()))?;
            elems.push(e.clone());
        }
        Ok(Params {
            names: names.iter().map(|n| n.as_ref().to_owned()).collect(),
            elems,
        })
    }

    /// Anonymous parameters, named `p1..pn`.
    pub fn from_elems(elems: impl IntoIterator<Item = RandElem>) -> Self {
        let elems: Vec<RandElem> = elems.into_iter().collect();
        Params {
            names: numbered_vars("p", elems.len()),
            elems,
        }
    }

    pub fn empty() -> Self {
        Params {
            names: Vec::new(),
            elems: Vec::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elems(&self) -> &[RandElem] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// The tuple extended by `b` at the end.
    pub fn with(&self, name: &str, b: &RandElem) -> Params {
        let mut p = self.clone();
        p.names.push(name.to_owned());
        p.elems.push(b.clone());
        p
    }

    fn binding<'a>(&'a self, vars: &[String]) -> Binding<'a> {
        vars.iter().cloned().zip(self.elems.iter()).collect()
    }
}

fn check_lengths(r: &Randomization, params: &Params) -> Result<(), ClosureError> {
    for e in params.elems.iter() {
        if e.len() != r.atoms() {
            return Err(MeasureError::PartitionMismatch(e.len(), r.atoms()).into());
        }
    }
    Ok(())
}

/// The types realized by the parameters: each isolating formula that holds
/// somewhere, with its event.
#[derive(Clone, Debug)]
pub struct TypeTable {
    vars: Vec<String>,
    types: Vec<(Formula, Event)>,
}

impl TypeTable {
    pub fn new(r: &Randomization, params: &Params) -> Result<Self, ClosureError> {
        check_lengths(r, params)?;
        let vars = numbered_vars("v", params.len());
        let mut formulas: Vec<Formula> = Vec::new();
        for atom in 0..r.atoms() {
            let values: Vec<_> = params.elems.iter().map(|e| e.at(atom).clone()).collect();
            let psi = r.theory().type_formula(&values, &vars);
            if !formulas.contains(&psi) {
                formulas.push(psi);
            }
        }
        let binding = params.binding(&vars);
        let mut types = Vec::with_capacity(formulas.len());
        for psi in formulas {
            let event = r.eval_event(&psi, &binding)?;
            types.push((psi, event));
        }
        Ok(TypeTable { vars, types })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// `(isolating formula, nonempty event)` pairs, pairwise disjoint and
    /// covering the space.
    pub fn types(&self) -> &[(Formula, Event)] {
        &self.types
    }
}

/// The algebra of events first-order definable over the parameters.
pub fn fdcl_b(r: &Randomization, params: &Params) -> Result<EventAlgebra, ClosureError> {
    let table = TypeTable::new(r, params)?;
    let events: Vec<Event> = table.types.into_iter().map(|(_, e)| e).collect();
    Ok(EventAlgebra::generated(r.atoms(), &events)?)
}

/// [`fdcl_b`] generated from every isolating formula rather than only the
/// realized ones. Exponential in the number of parameters.
pub fn fdcl_b_exhaustive(r: &Randomization, params: &Params) -> Result<EventAlgebra, ClosureError> {
    check_lengths(r, params)?;
    let vars = numbered_vars("v", params.len());
    let binding = params.binding(&vars);
    let events = r
        .theory()
        .isolating_formulas(params.len())
        .iter()
        .map(|psi| r.eval_event(psi, &binding))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EventAlgebra::generated(r.atoms(), &events)?)
}

/// Definable events. A finite algebra of definable events is its own metric
/// and sigma closure, so this is [`fdcl_b`].
pub fn dcl_b(r: &Randomization, params: &Params) -> Result<EventAlgebra, ClosureError> {
    fdcl_b(r, params)
}

/// Atoms where `b`'s value is definable from the parameters' values.
pub fn pointwise_definable_event(
    r: &Randomization,
    b: &RandElem,
    params: &Params,
) -> Result<Event, ClosureError> {
    check_lengths(r, &params.with("b", b))?;
    Ok(Event::from_predicate(r.atoms(), |atom| {
        let tuple: Vec<_> = params.elems.iter().map(|e| e.at(atom).clone()).collect();
        r.theory().dcl_in_model(b.at(atom), &tuple)
    }))
}

pub fn is_pointwise_definable(r: &Randomization, b: &RandElem, params: &Params) -> Result<bool, ClosureError> {
    Ok(pointwise_definable_event(r, b, params)?.is_top())
}

/// Terms a functional formula can pin `u` to on a single type: a parameter
/// variable under DLO, a constant under the finite theory.
fn candidate_terms(r: &Randomization, vars: &[String]) -> Vec<Term> {
    match r.theory().domain_size() {
        None => vars.iter().cloned().map(Term::Var).collect(),
        Some(k) => (0..k).map(Term::Const).collect(),
    }
}

const U: &str = "u";

/// Decides first-order definability of one element on events.
///
/// A functional formula `phi(u, v)` restricted to a complete type `psi(v)`
/// either is inconsistent or pins `u` to a single term, so `[[phi(b, a)]]`
/// meets each type event `P` in either nothing or `P & [[b = t]]`.
pub struct Definer<'r> {
    r: &'r Randomization,
    table: TypeTable,
    // per term, the event [[b = t]]
    agreement: Vec<(Term, Event)>,
}

impl<'r> Definer<'r> {
    pub fn new(r: &'r Randomization, b: &RandElem, params: &Params) -> Result<Self, ClosureError> {
        let table = TypeTable::new(r, params)?;
        check_lengths(r, &params.with("b", b))?;
        let mut binding = params.binding(&table.vars);
        binding.insert(U.to_owned(), b);
        let agreement = candidate_terms(r, &table.vars)
            .into_iter()
            .map(|t| {
                let eq = Formula::Atom(Term::var(U), Rel::Eq, t.clone());
                Ok((t, r.eval_event(&eq, &binding)?))
            })
            .collect::<Result<Vec<_>, RandError>>()?;
        Ok(Definer { r, table, agreement })
    }

    pub fn table(&self) -> &TypeTable {
        &self.table
    }

    /// A functional formula `phi(u, v1..vn)` with `[[phi(b, a)]] = e`, if one
    /// exists. The formula is a disjunction of `psi & u = t` over types.
    pub fn definition(&self, e: &Event) -> Result<Option<Formula>, ClosureError> {
        if e.universe() != self.r.atoms() {
            return Err(MeasureError::PartitionMismatch(e.universe(), self.r.atoms()).into());
        }
        let mut pieces = Vec::new();
        for (psi, p) in &self.table.types {
            let wanted = e.meet(p)?;
            if wanted.is_bottom() {
                continue;
            }
            let mut found = None;
            for (t, agree) in &self.agreement {
                if agree.meet(p)? == wanted {
                    found = Some(t.clone());
                    break;
                }
            }
            match found {
                Some(t) => pieces.push(pin(psi, t)),
                None => return Ok(None),
            }
        }
        Ok(Some(Formula::disj(pieces)))
    }

    pub fn definable_on(&self, e: &Event) -> Result<bool, ClosureError> {
        Ok(self.definition(e)?.is_some())
    }
}

fn pin(psi: &Formula, t: Term) -> Formula {
    let eq = Formula::Atom(Term::var(U), Rel::Eq, t);
    match psi {
        Formula::True => eq,
        _ => Formula::and(psi.clone(), eq),
    }
}

/// Whether `b` is first-order definable on `e` over the parameters.
pub fn fo_definable_on(r: &Randomization, b: &RandElem, e: &Event, params: &Params) -> Result<bool, ClosureError> {
    Definer::new(r, b, params)?.definable_on(e)
}

/// The witnessing functional formula for [`fo_definable_on`], in the
/// variables `u` (for `b`) and `v1..vn` (for the parameters).
pub fn functional_definition(
    r: &Randomization,
    b: &RandElem,
    e: &Event,
    params: &Params,
) -> Result<Option<Formula>, ClosureError> {
    Definer::new(r, b, params)?.definition(e)
}

/// Pointwise definable, and the events definable over the parameters with
/// `b` added are already definable over the parameters.
pub fn is_definable(r: &Randomization, b: &RandElem, params: &Params) -> Result<bool, ClosureError> {
    if !is_pointwise_definable(r, b, params)? {
        return Ok(false);
    }
    let extended = fdcl_b(r, &params.with("b", b))?;
    Ok(extended.is_subalgebra_of(&dcl_b(r, params)?))
}

/// DLO criterion: on every type of the parameters, `b` equals one of them.
pub fn is_definable_dlo(r: &Randomization, b: &RandElem, params: &Params) -> Result<bool, ClosureError> {
    if !r.theory().is_dlo() {
        return Err(ClosureError::DloOnly("the order-type definability criterion"));
    }
    let table = TypeTable::new(r, params)?;
    let mut binding = params.binding(&table.vars);
    binding.insert(U.to_owned(), b);
    let agreement = table
        .vars
        .iter()
        .map(|v| r.eval_event(&Formula::eq(U, v.clone()), &binding))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(table
        .types
        .iter()
        .all(|(_, p)| agreement.iter().any(|agree| p.is_subset(agree))))
}

/// Criterion through the isolating formulas of `(b, a)`: `b` is pointwise
/// definable and every type `phi(u, v)` with `[[phi(b, a)]]` nonempty has
/// `[[phi(b, a)]] = [[exists u. phi(u, a)]]`.
pub fn is_definable_isolating(r: &Randomization, b: &RandElem, params: &Params) -> Result<bool, ClosureError> {
    if !is_pointwise_definable(r, b, params)? {
        return Ok(false);
    }
    let vars = numbered_vars("v", params.len());
    let mut all_vars = vec![U.to_owned()];
    all_vars.extend(vars.iter().cloned());
    let mut binding = params.binding(&vars);
    binding.insert(U.to_owned(), b);
    let mut seen = Vec::new();
    for atom in 0..r.atoms() {
        let mut values = vec![b.at(atom).clone()];
        values.extend(params.elems.iter().map(|e| e.at(atom).clone()));
        let phi = r.theory().type_formula(&values, &all_vars);
        if seen.contains(&phi) {
            continue;
        }
        let here = r.eval_event(&phi, &binding)?;
        let projected = r.eval_event(&Formula::exists(U, phi.clone()), &binding)?;
        if here != projected {
            return Ok(false);
        }
        seen.push(phi);
    }
    Ok(true)
}

/// Searches for pairwise disjoint definable events covering the space, on
/// each of which `b` is first-order definable. Returns the family found.
///
/// Definable events are unions of atoms of [`dcl_b`], so the search runs
/// over set partitions of those atoms.
pub fn tdcl_check(r: &Randomization, b: &RandElem, params: &Params) -> Result<Option<Vec<Event>>, ClosureError> {
    let atoms = dcl_b(r, params)?.atoms().to_vec();
    let definer = Definer::new(r, b, params)?;

    fn search(
        atoms: &[Event],
        next: usize,
        blocks: &mut Vec<Event>,
        definer: &Definer<'_>,
    ) -> Result<bool, ClosureError> {
        if next == atoms.len() {
            return Ok(true);
        }
        let atom = &atoms[next];
        if definer.definable_on(atom)? {
            blocks.push(atom.clone());
            if search(atoms, next + 1, blocks, definer)? {
                return Ok(true);
            }
            blocks.pop();
        }
        for i in 0..blocks.len() {
            let merged = blocks[i].join(atom)?;
            if definer.definable_on(&merged)? {
                let saved = std::mem::replace(&mut blocks[i], merged);
                if search(atoms, next + 1, blocks, definer)? {
                    return Ok(true);
                }
                blocks[i] = saved;
            }
        }
        Ok(false)
    }

    let mut blocks = Vec::new();
    if search(&atoms, 0, &mut blocks, &definer)? {
        Ok(Some(blocks))
    } else {
        Ok(None)
    }
}

/// All elements of the definable closure.
///
/// DLO: every element that on each definable atom agrees with some
/// parameter. Finite theory: every element constant on each definable atom.
pub fn dcl_enumerate(r: &Randomization, params: &Params) -> Result<ElemSet, ClosureError> {
    let atoms = dcl_b(r, params)?;
    // per atom, the distinct restrictions available
    let mut options: Vec<(Vec<usize>, Vec<Vec<crate::rational::Rational>>)> = Vec::new();
    for d in atoms.atoms() {
        let mut choices: Vec<Vec<_>> = Vec::new();
        match r.theory().domain_size() {
            None => {
                for a in params.elems() {
                    let piece: Vec<_> = d.members().iter().map(|&i| a.at(i).clone()).collect();
                    if !choices.contains(&piece) {
                        choices.push(piece);
                    }
                }
            }
            Some(k) => {
                for j in 0..k {
                    choices.push(vec![r.theory().constant(j); d.members().len()]);
                }
            }
        }
        options.push((d.members().to_vec(), choices));
    }
    let mut out = ElemSet::new();
    if options.iter().any(|(_, c)| c.is_empty()) {
        return Ok(out);
    }
    let mut digits = vec![0usize; options.len()];
    loop {
        let mut values = vec![r.theory().default_value(); r.atoms()];
        for ((members, choices), &k) in options.iter().zip(&digits) {
            for (&i, v) in members.iter().zip(&choices[k]) {
                values[i] = v.clone();
            }
        }
        out.insert(RandElem::new(values));
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < options[pos].1.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Elements first-order definable over the parameters: every `b` for which
/// some functional `phi` gives `[[forall u. phi(u, a) <-> u = b]] = top`.
///
/// Candidate formulas are disjunctions over the realized types of
/// `psi & u = t`; `b` is obtained as a witness for `u` and then checked.
pub fn fdcl_enumerate(r: &Randomization, params: &Params) -> Result<ElemSet, ClosureError> {
    let table = TypeTable::new(r, params)?;
    let terms = candidate_terms(r, &table.vars);
    let mut out = ElemSet::new();
    if terms.is_empty() {
        return Ok(out);
    }
    let binding = params.binding(&table.vars);
    let w = "w";
    let mut digits = vec![0usize; table.types.len()];
    loop {
        let phi = Formula::disj(
            table
                .types
                .iter()
                .zip(&digits)
                .map(|((psi, _), &k)| pin(psi, terms[k].clone())),
        );
        let b = r.witness(&phi, U, &binding)?;
        let defines = Formula::forall(U, Formula::iff(phi, Formula::eq(U, w)));
        let mut with_b = binding.clone();
        with_b.insert(w.to_owned(), &b);
        if r.eval_event(&defines, &with_b)?.is_top() {
            out.insert(b);
        }
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < terms.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Closure of the parameters under `ell(a, b, x, y)`, which is `x` where
/// `a < b` and `y` elsewhere. DLO only.
///
/// Values are interned per atom in sorted order, so codes compare like the
/// values they stand for. The fixpoint is computed semi-naively: each round
/// only combines tuples involving something produced in the previous round.
pub fn lcl(r: &Randomization, params: &Params) -> Result<ElemSet, ClosureError> {
    if !r.theory().is_dlo() {
        return Err(ClosureError::DloOnly("lcl"));
    }
    check_lengths(r, params)?;
    let m = r.atoms();
    let tables: Vec<Vec<crate::rational::Rational>> = (0..m)
        .map(|i| {
            let mut vs: Vec<_> = params.elems().iter().map(|e| e.at(i).clone()).collect();
            vs.sort();
            vs.dedup();
            vs
        })
        .collect();
    let encode = |e: &RandElem| -> Vec<u32> {
        (0..m)
            .map(|i| tables[i].binary_search(e.at(i)).expect("interned value") as u32)
            .collect()
    };

    let mut elems: Vec<Vec<u32>> = Vec::new();
    let mut elem_index: HashMap<Vec<u32>, usize> = HashMap::new();
    for e in params.elems() {
        let code = encode(e);
        if !elem_index.contains_key(&code) {
            elem_index.insert(code.clone(), elems.len());
            elems.push(code);
        }
    }
    let mut events: Vec<Vec<bool>> = Vec::new();
    let mut event_set: HashSet<Vec<bool>> = HashSet::new();
    let mut done_elems = 0;
    let mut done_events = 0;

    let glue = |x: &[u32], y: &[u32], e: &[bool]| -> Vec<u32> {
        (0..m).map(|i| if e[i] { x[i] } else { y[i] }).collect()
    };

    while done_elems < elems.len() {
        let n = elems.len();
        // events [[a < b]] from pairs touching a new element
        for a in 0..n {
            let b_from = if a >= done_elems { 0 } else { done_elems };
            for b in b_from..n {
                for (p, q) in [(a, b), (b, a)] {
                    let ev: Vec<bool> = (0..m).map(|i| elems[p][i] < elems[q][i]).collect();
                    if event_set.insert(ev.clone()) {
                        events.push(ev);
                    }
                }
            }
        }
        let mut fresh: Vec<Vec<u32>> = Vec::new();
        let mut push = |code: Vec<u32>, fresh: &mut Vec<Vec<u32>>| {
            if !elem_index.contains_key(&code) {
                elem_index.insert(code.clone(), n + fresh.len());
                fresh.push(code);
            }
        };
        for (k, ev) in events.iter().enumerate() {
            let new_event = k >= done_events;
            for x in 0..n {
                let y_from = if new_event || x >= done_elems { 0 } else { done_elems };
                for y in y_from..n {
                    push(glue(&elems[x], &elems[y], ev), &mut fresh);
                }
            }
        }
        done_events = events.len();
        done_elems = n;
        elems.extend(fresh);
    }

    Ok(elems
        .iter()
        .map(|code| {
            RandElem::new(
                code.iter()
                    .enumerate()
                    .map(|(i, &c)| tables[i][c as usize].clone())
                    .collect(),
            )
        })
        .collect())
}
