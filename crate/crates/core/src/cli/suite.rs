//! The invariant suite: cross-checks of the closure operators and structural
//! properties of the event and element metrics, run on one randomization.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::fuzz;
use crate::closure::{
    dcl_b, dcl_enumerate, fdcl_b, fdcl_b_exhaustive, fdcl_enumerate, is_definable, is_definable_dlo,
    is_definable_isolating, is_pointwise_definable, lcl, tdcl_check, ClosureError, ElemSet, Params,
};
use crate::formula::Formula;
use crate::measure::Event;
use crate::randvar::{char_fn, glue, Binding, RandElem, Randomization};
use crate::theory::numbered_vars;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
}

/// Pass counts per named check, plus a description of each failure.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: BTreeMap<String, Tally>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn record(&mut self, check: &str, ok: bool, detail: impl FnOnce() -> String) {
        let t = self.checks.entry(check.to_owned()).or_default();
        t.total += 1;
        if ok {
            t.passed += 1;
        } else {
            self.failures.push(format!("{check}: {}", detail()));
        }
    }

    fn error(&mut self, check: &str, e: ClosureError) {
        self.record(check, false, || format!("error: {e}"));
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: Report) {
        for (k, t) in other.checks {
            let mine = self.checks.entry(k).or_default();
            mine.passed += t.passed;
            mine.total += t.total;
        }
        self.failures.extend(other.failures);
    }

    pub fn tally(&self, check: &str) -> Tally {
        self.checks.get(check).copied().unwrap_or_default()
    }
}

/// Sample sizes for the randomized structural checks.
#[derive(Clone, Copy, Debug)]
pub struct Sizes {
    pub formula_pairs: usize,
    pub witnesses: usize,
    pub events: usize,
    pub adversarial: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes {
            formula_pairs: 20,
            witnesses: 20,
            events: 6,
            adversarial: 2,
        }
    }
}

pub const LCL: &str = "lcl equals dcl";
pub const FDCL: &str = "fdcl equals dcl";
pub const ALGEBRAS: &str = "dclB equals fdclB";
pub const NO_PARAMS: &str = "fdclB over nothing is trivial";
pub const DECIDERS: &str = "deciders agree";
pub const ADVERSARIAL: &str = "deciders reject perturbed elements";
pub const POINTWISE: &str = "dcl members are pointwise definable";
pub const IDEMPOTENT: &str = "dcl is idempotent";
pub const MONOTONE: &str = "dcl is monotone";
pub const SIZE_BOUND: &str = "dcl size bound";
pub const OPERATIONS: &str = "dcl closed under min, max, ell";
pub const D_B_METRIC: &str = "d_B metric axioms";
pub const D_K_METRIC: &str = "d_K metric axioms";
pub const ADDITIVITY: &str = "mu additivity";
pub const HOMOMORPHISM: &str = "event map is a Boolean homomorphism";
pub const VALIDITY: &str = "valid formulas hold everywhere";
pub const GLUE: &str = "glue and char_fn postconditions";
pub const WITNESS: &str = "witness postcondition";
pub const REFINE: &str = "refine preserves mu, d_B, d_K";

fn show(r: &Randomization, params: &Params) -> String {
    let p: Vec<String> = params.elems().iter().map(|e| e.to_string()).collect();
    format!("weights [{}], A = [{}]", join_weights(r), p.join(", "))
}

fn join_weights(r: &Randomization) -> String {
    r.partition()
        .weights()
        .iter()
        .map(crate::rational::format_fraction)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Verdicts of every decider on one element, in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub algebra: bool,
    pub order_types: Option<bool>,
    pub isolating: bool,
    pub partition: bool,
    pub enumeration: bool,
}

impl Verdicts {
    pub fn compute(r: &Randomization, b: &RandElem, params: &Params, dcl: &ElemSet) -> Result<Self, ClosureError> {
        Ok(Verdicts {
            algebra: is_definable(r, b, params)?,
            order_types: if r.theory().is_dlo() {
                Some(is_definable_dlo(r, b, params)?)
            } else {
                None
            },
            isolating: is_definable_isolating(r, b, params)?,
            partition: tdcl_check(r, b, params)?.is_some(),
            enumeration: dcl.contains(b),
        })
    }

    pub fn named(&self) -> Vec<(&'static str, bool)> {
        let mut v = vec![("algebra", self.algebra)];
        if let Some(o) = self.order_types {
            v.push(("order-types", o));
        }
        v.push(("isolating", self.isolating));
        v.push(("partition", self.partition));
        v.push(("enumeration", self.enumeration));
        v
    }

    pub fn agree(&self) -> bool {
        let v = self.named();
        v.iter().all(|(_, x)| *x == v[0].1)
    }
}

/// Elements that differ from a member of `dcl` (or from a constant) on one
/// atom and are not in `dcl`. The replacement value is another parameter's
/// value at that atom when that already leaves `dcl`, else a fresh value.
pub fn perturbations(
    r: &Randomization,
    params: &Params,
    dcl: &ElemSet,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<RandElem> {
    let m = r.atoms();
    let base: Vec<RandElem> = if dcl.is_empty() {
        vec![RandElem::constant(r.theory().default_value(), m)]
    } else {
        dcl.iter().cloned().collect()
    };
    let mut out = Vec::new();
    for _ in 0..count * 8 {
        if out.len() == count {
            break;
        }
        let b = base.choose(rng).expect("nonempty");
        let atom = rng.gen_range(0..m);
        let mut values = b.values().to_vec();
        let swaps: Vec<_> = params
            .elems()
            .iter()
            .map(|a| a.at(atom).clone())
            .filter(|v| *v != values[atom])
            .collect();
        values[atom] = match (swaps.choose(rng), rng.gen_bool(0.7)) {
            (Some(v), true) => v.clone(),
            _ => fuzz::value(rng, r.theory()),
        };
        let c = RandElem::new(values);
        if !dcl.contains(&c) && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Cross-checks of the closure operators over one parameter tuple.
pub fn closure_checks(r: &Randomization, params: &Params, rng: &mut ChaCha8Rng, sizes: Sizes, report: &mut Report) {
    if let Err(e) = closure_checks_inner(r, params, rng, sizes, report) {
        report.error("closure operators", e);
    }
}

fn closure_checks_inner(
    r: &Randomization,
    params: &Params,
    rng: &mut ChaCha8Rng,
    sizes: Sizes,
    report: &mut Report,
) -> Result<(), ClosureError> {
    let dlo = r.theory().is_dlo();
    let dcl = dcl_enumerate(r, params)?;
    let ctx = || show(r, params);

    if dlo {
        let l = lcl(r, params)?;
        report.record(LCL, l == dcl, || format!("{}: lcl has {}, dcl has {}", ctx(), l.len(), dcl.len()));
    }
    let f = fdcl_enumerate(r, params)?;
    report.record(FDCL, f == dcl, || format!("{}: fdcl has {}, dcl has {}", ctx(), f.len(), dcl.len()));

    let alg = fdcl_b(r, params)?;
    let mut same = dcl_b(r, params)? == alg;
    if params.len() <= 3 {
        same &= fdcl_b_exhaustive(r, params)? == alg;
    }
    report.record(ALGEBRAS, same, ctx);

    let trivial = fdcl_b(r, &Params::empty())?;
    report.record(NO_PARAMS, trivial.atoms() == [Event::top(r.atoms())], ctx);

    let mut candidates: Vec<RandElem> = dcl.iter().cloned().collect();
    for e in r.elements().values() {
        if !candidates.contains(e) {
            candidates.push(e.clone());
        }
    }
    for b in &candidates {
        let v = Verdicts::compute(r, b, params, &dcl)?;
        report.record(DECIDERS, v.agree(), || format!("{}: b = {b}, {v:?}", ctx()));
    }
    for b in perturbations(r, params, &dcl, rng, sizes.adversarial) {
        let v = Verdicts::compute(r, &b, params, &dcl)?;
        report.record(ADVERSARIAL, v.agree() && !v.algebra, || format!("{}: b = {b}, {v:?}", ctx()));
    }

    for b in &dcl {
        let ok = is_pointwise_definable(r, b, params)?;
        report.record(POINTWISE, ok, || format!("{}: b = {b}", ctx()));
    }

    let again = dcl_enumerate(r, &Params::from_elems(dcl.iter().cloned()))?;
    report.record(IDEMPOTENT, again == dcl, ctx);

    let mut monotone = params.elems().iter().all(|a| dcl.contains(a));
    for skip in 0..params.len() {
        let sub = Params::from_elems(
            params
                .elems()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, e)| e.clone()),
        );
        monotone &= dcl_enumerate(r, &sub)?.is_subset(&dcl);
    }
    let extra = fuzz::element(rng, r.theory(), r.atoms());
    let wider = dcl_enumerate(r, &Params::from_elems(params.elems().iter().cloned().chain([extra])))?;
    monotone &= dcl.is_subset(&wider);
    report.record(MONOTONE, monotone, ctx);

    let base = match r.theory().domain_size() {
        None => params.len(),
        Some(n) => n,
    };
    let bound = (base as u128).checked_pow(alg.atoms().len() as u32);
    report.record(
        SIZE_BOUND,
        bound.is_none_or(|b| dcl.len() as u128 <= b),
        || format!("{}: {} > {base}^{}", ctx(), dcl.len(), alg.atoms().len()),
    );

    if dlo {
        let a = params.elems();
        let mut ok = true;
        for x in a {
            for y in a {
                ok &= dcl.contains(&r.min_elem(x, y)?) && dcl.contains(&r.max_elem(x, y)?);
                for u in a {
                    for w in a {
                        ok &= dcl.contains(&r.ell(x, y, u, w)?);
                    }
                }
            }
        }
        report.record(OPERATIONS, ok, ctx);
    }
    Ok(())
}

fn metric_axioms<T>(items: &[T], d: impl Fn(&T, &T) -> crate::rational::Rational, eq: impl Fn(&T, &T) -> bool) -> bool {
    for x in items {
        for y in items {
            let dxy = d(x, y);
            if dxy < crate::rational::Rational::zero() || dxy != d(y, x) || (dxy.is_zero() != eq(x, y)) {
                return false;
            }
            for z in items {
                if d(x, z) > &dxy + d(y, z) {
                    return false;
                }
            }
        }
    }
    true
}

/// Structural checks on random events, elements and formulas over `r`.
pub fn structure_checks(r: &Randomization, rng: &mut ChaCha8Rng, sizes: Sizes, report: &mut Report) {
    if let Err(e) = structure_checks_inner(r, rng, sizes, report) {
        report.error("structure", e);
    }
}

fn structure_checks_inner(
    r: &Randomization,
    rng: &mut ChaCha8Rng,
    sizes: Sizes,
    report: &mut Report,
) -> Result<(), ClosureError> {
    let m = r.atoms();
    let p = r.partition();
    let theory = r.theory();

    let mut events: Vec<Event> = (0..sizes.events).map(|_| fuzz::event(rng, m)).collect();
    events.push(Event::top(m));
    events.push(Event::bottom(m));
    report.record(
        D_B_METRIC,
        metric_axioms(&events, |x, y| p.d_b(x, y).expect("same universe"), |x, y| x == y),
        || join_weights(r),
    );
    let mut additive = true;
    for x in &events {
        for y in &events {
            let lhs = p.mu(&x.join(y)?) + p.mu(&x.meet(y)?);
            additive &= lhs == p.mu(x) + p.mu(y);
        }
    }
    additive &= p.mu(&Event::top(m)).is_one() && p.mu(&Event::bottom(m)).is_zero();
    report.record(ADDITIVITY, additive, || join_weights(r));

    let mut elems: Vec<RandElem> = r.elements().values().cloned().collect();
    while elems.len() < sizes.events {
        elems.push(fuzz::element(rng, theory, m));
    }
    report.record(
        D_K_METRIC,
        metric_axioms(&elems, |x, y| r.d_k(x, y).expect("same length"), |x, y| x == y),
        || join_weights(r),
    );

    let vars = numbered_vars("v", 3);
    let bound: Vec<RandElem> = (0..3).map(|_| fuzz::element(rng, theory, m)).collect();
    let binding: Binding<'_> = vars.iter().cloned().zip(bound.iter()).collect();
    let sig = theory.signature();
    for _ in 0..sizes.formula_pairs {
        let f = fuzz::formula(rng, sig, &vars, 2);
        let g = fuzz::formula(rng, sig, &vars, 2);
        let (ef, eg) = (r.eval_event(&f, &binding)?, r.eval_event(&g, &binding)?);
        let ok = r.eval_event(&Formula::and(f.clone(), g.clone()), &binding)? == ef.meet(&eg)?
            && r.eval_event(&Formula::or(f.clone(), g.clone()), &binding)? == ef.join(&eg)?
            && r.eval_event(&Formula::not(f.clone()), &binding)? == ef.complement();
        report.record(HOMOMORPHISM, ok, || format!("{}: f = {f}, g = {g}", join_weights(r)));

        let valid = Formula::or(f.clone(), Formula::not(f.clone()));
        let mut ok = theory.is_valid(&valid) && r.eval_event(&valid, &binding)?.is_top();
        if theory.is_valid(&f) {
            ok &= ef.is_top();
        }
        report.record(VALIDITY, ok, || format!("{}: f = {f}", join_weights(r)));
    }

    let (x, y) = (&bound[0], &bound[1]);
    let (lo, hi) = (
        RandElem::constant(theory.constant(0), m),
        RandElem::constant(theory.constant(1), m),
    );
    for e in &events {
        let g = glue(x, y, e)?;
        let ok = e.is_subset(&g.agreement(x)?)
            && e.complement().is_subset(&g.agreement(y)?)
            && (0..m).all(|i| g.at(i) == if e.contains(i) { x.at(i) } else { y.at(i) });
        let c = char_fn(e, &hi, &lo)?;
        let ok = ok && c.agreement(&hi)? == *e && c.agreement(&lo)? == e.complement();
        report.record(GLUE, ok, || format!("{}: e = {}", join_weights(r), e.display(p)));
    }

    for _ in 0..sizes.witnesses {
        let mut scope = vars.clone();
        scope.push("u".to_owned());
        let theta = fuzz::formula(rng, sig, &scope, 2);
        let w = r.witness(&theta, "u", &binding)?;
        let target = r.eval_event(&Formula::exists("u", theta.clone()), &binding)?;
        let mut with_w = binding.clone();
        with_w.insert("u".to_owned(), &w);
        let got = r.eval_event(&theta, &with_w)?;
        report.record(WITNESS, got == target, || format!("{}: theta = {theta}, w = {w}", join_weights(r)));
    }

    let atom = rng.gen_range(0..m);
    let k = rng.gen_range(2..=3);
    let (refined, map) = r.refine(atom, k)?;
    let q = refined.partition();
    let mut ok = true;
    for e in &events {
        ok &= q.mu(&map.transport_event(e)) == p.mu(e);
        for f in &events {
            ok &= q.d_b(&map.transport_event(e), &map.transport_event(f))? == p.d_b(e, f)?;
        }
    }
    for a in &elems {
        for b in &elems {
            ok &= refined.d_k(&r.transport(&map, a), &r.transport(&map, b))? == r.d_k(a, b)?;
        }
    }
    report.record(REFINE, ok, || format!("{}: split atom {atom} into {k}", join_weights(r)));
    Ok(())
}

/// Every suite check on a file: closure checks over each parameter tuple of
/// up to three named elements, and the structural checks.
pub fn check_randomization(r: &Randomization, seed: u64) -> Report {
    let mut rng = fuzz::rng(seed);
    let mut report = Report::default();
    let names: Vec<&String> = r.elements().keys().collect();
    let mut tuples: Vec<Vec<&String>> = vec![vec![]];
    for size in 1..=names.len().min(3) {
        tuples.extend(combinations(&names, size));
    }
    for t in tuples {
        let params = Params::from_names(r, &t).expect("names come from the file");
        closure_checks(r, &params, &mut rng, Sizes::default(), &mut report);
    }
    structure_checks(r, &mut rng, Sizes::default(), &mut report);
    report
}

fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x.clone());
            out.push(rest);
        }
    }
    out
}

/// Outcome of a fuzz run.
#[derive(Clone, Debug, Serialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    pub report: Report,
}

/// Generates `count` instances from `seed` and runs every check on each.
pub fn fuzz(seed: u64, count: usize) -> FuzzSummary {
    let mut rng = fuzz::rng(seed);
    let mut passed = 0;
    let mut total = Report::default();
    for _ in 0..count {
        let inst = fuzz::instance(&mut rng, fuzz::TheoryChoice::Mixed);
        let mut report = Report::default();
        let sizes = Sizes {
            formula_pairs: 5,
            witnesses: 5,
            ..Sizes::default()
        };
        closure_checks(&inst.r, &inst.params, &mut rng, sizes, &mut report);
        structure_checks(&inst.r, &mut rng, sizes, &mut report);
        if report.passed() {
            passed += 1;
        }
        total.merge(report);
    }
    FuzzSummary {
        seed,
        count,
        passed,
        report: total,
    }
}
