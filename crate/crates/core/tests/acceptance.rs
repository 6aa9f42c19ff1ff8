//! Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails. Every comparison is exact; there are no tolerances.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use randdcl::cli::file;
use randdcl::cli::fuzz::{self, Instance, TheoryChoice};
use randdcl::cli::suite::{self, perturbations, Report, Sizes, Verdicts};
use randdcl::closure::{
    dcl_b, dcl_enumerate, fdcl_b, fdcl_b_exhaustive, fdcl_enumerate, is_definable, is_pointwise_definable, lcl,
    ElemSet, Params,
};
use randdcl::formula::Signature;
use randdcl::measure::Event;
use randdcl::randvar::{RandElem, Randomization};
use randdcl::theory::{eval_direct, numbered_vars, qe, Theory};

const CORPUS_SEED: u64 = 20_240_601;
const CORPUS_SIZE: usize = 200;
const ADVERSARIAL_MIN: usize = 50;
const QE_SEED: u64 = 99;
const QE_FORMULAS: usize = 500;
const QE_ASSIGNMENTS: usize = 50;
const HOMOMORPHISM_PAIRS: usize = 300;
const WITNESSES: usize = 200;

struct Line {
    pass: bool,
    text: String,
}

fn line(pass: bool, text: impl Into<String>) -> Line {
    Line { pass, text: text.into() }
}

fn names(r: &Randomization, xs: &[&str]) -> Params {
    Params::from_names(r, xs).expect("names exist")
}

fn set(r: &Randomization, xs: &[&str]) -> ElemSet {
    xs.iter().map(|n| r.element(n).unwrap().clone()).collect()
}

fn exchange_failure() -> Line {
    let r = file::parse(include_str!("../data/r0_full.json")).unwrap();
    let ab = dcl_enumerate(&r, &names(&r, &["a", "b"])).unwrap();
    let ac = dcl_enumerate(&r, &names(&r, &["a", "c"])).unwrap();
    let a = dcl_enumerate(&r, &names(&r, &["a"])).unwrap();
    let b_def = is_definable(&r, r.element("b").unwrap(), &names(&r, &["a", "c"])).unwrap();
    let pass = ab == set(&r, &["a", "b", "c", "d"]) && ac == set(&r, &["a", "c"]) && a == set(&r, &["a"]) && !b_def;
    line(
        pass,
        format!(
            "exchange failure on R0: |dcl(a,b)| = {}, |dcl(a,c)| = {}, |dcl(a)| = {}, b definable over a,c: {b_def}",
            ab.len(),
            ac.len(),
            a.len()
        ),
    )
}

fn lcl_equals_dcl(corpus: &[Instance]) -> Line {
    let ok = corpus
        .iter()
        .filter(|i| lcl(&i.r, &i.params).unwrap() == dcl_enumerate(&i.r, &i.params).unwrap())
        .count();
    line(ok == corpus.len(), format!("lcl = dcl on {ok}/{} DLO instances", corpus.len()))
}

fn categorical_consequences(corpus: &[Instance]) -> Line {
    let mut fdcl_ok = 0;
    let mut alg_ok = 0;
    for i in corpus {
        let dcl = dcl_enumerate(&i.r, &i.params).unwrap();
        if fdcl_enumerate(&i.r, &i.params).unwrap() == dcl {
            fdcl_ok += 1;
        }
        let alg = fdcl_b(&i.r, &i.params).unwrap();
        if dcl_b(&i.r, &i.params).unwrap() == alg && fdcl_b_exhaustive(&i.r, &i.params).unwrap() == alg {
            alg_ok += 1;
        }
    }
    let n = corpus.len();
    line(
        fdcl_ok == n && alg_ok == n,
        format!("fdcl = dcl on {fdcl_ok}/{n}, dclB = fdclB on {alg_ok}/{n}"),
    )
}

fn decider_agreement(corpus: &[Instance]) -> Line {
    let mut rng = fuzz::rng(CORPUS_SEED ^ 0xadd);
    let (mut agree, mut total, mut adversarial, mut rejected) = (0, 0, 0, 0);
    for i in corpus {
        let dcl = dcl_enumerate(&i.r, &i.params).unwrap();
        let mut candidates: Vec<(RandElem, bool)> = dcl.iter().map(|e| (e.clone(), false)).collect();
        for e in i.r.elements().values() {
            if !dcl.contains(e) {
                candidates.push((e.clone(), false));
            }
        }
        for e in perturbations(&i.r, &i.params, &dcl, &mut rng, 1) {
            candidates.push((e, true));
        }
        for (b, perturbed) in candidates {
            let v = Verdicts::compute(&i.r, &b, &i.params, &dcl).unwrap();
            total += 1;
            if v.agree() {
                agree += 1;
            }
            if perturbed {
                adversarial += 1;
                if v.agree() && !v.algebra {
                    rejected += 1;
                }
            }
        }
    }
    line(
        agree == total && adversarial >= ADVERSARIAL_MIN && rejected == adversarial,
        format!("deciders agree on {agree}/{total} triples; {rejected}/{adversarial} perturbed elements rejected by all"),
    )
}

fn qe_oracle() -> Line {
    let mut rng = fuzz::rng(QE_SEED);
    let theory = Theory::dlo();
    let vars = numbered_vars("v", 3);
    let (mut quantifier_free, mut agree, mut deep) = (0, 0, 0);
    for _ in 0..QE_FORMULAS {
        let f = fuzz::formula(&mut rng, Signature::Dlo, &vars, 3);
        if f.quantifier_depth() == 3 {
            deep += 1;
        }
        let g = qe(&f);
        if g.is_quantifier_free() {
            quantifier_free += 1;
        }
        let mut all = true;
        for _ in 0..QE_ASSIGNMENTS {
            let sigma = fuzz::assignment(&mut rng, &theory, &vars);
            all &= theory.eval_qf(&g, &sigma).ok() == Some(eval_direct(&f, &sigma).unwrap());
        }
        if all {
            agree += 1;
        }
    }
    line(
        agree == QE_FORMULAS && quantifier_free == QE_FORMULAS,
        format!(
            "qe agrees with direct evaluation on {agree}/{QE_FORMULAS} formulas x {QE_ASSIGNMENTS} assignments, \
             quantifier-free {quantifier_free}/{QE_FORMULAS}, {deep} of depth 3"
        ),
    )
}

fn no_parameter_events(corpus: &[Instance]) -> Line {
    let ok = corpus
        .iter()
        .filter(|i| fdcl_b(&i.r, &Params::empty()).unwrap().atoms() == [Event::top(i.r.atoms())])
        .count();
    line(ok == corpus.len(), format!("fdclB over nothing is {{top, bottom}} on {ok}/{}", corpus.len()))
}

fn pointwise_gap() -> Line {
    let r = file::parse(include_str!("../data/f0.json")).unwrap();
    let b = r.element("b").unwrap();
    let none = Params::empty();
    let pointwise = is_pointwise_definable(&r, b, &none).unwrap();
    let definable = is_definable(&r, b, &none).unwrap();
    let dcl = dcl_enumerate(&r, &none).unwrap();
    let mut constants_ok = true;
    for k in 0..2 {
        let c = RandElem::constant(r.theory().constant(k), r.atoms());
        let v = Verdicts::compute(&r, &c, &none, &dcl).unwrap();
        constants_ok &= v.agree() && v.algebra;
    }
    line(
        pointwise && !definable && constants_ok,
        format!("F0: b pointwise definable {pointwise}, definable {definable}, constants definable {constants_ok}"),
    )
}

fn structural(corpus: &[Instance], fe: &[Instance]) -> Line {
    let mut rng = fuzz::rng(CORPUS_SEED ^ 0x5ec);
    let mut report = Report::default();
    let instances: Vec<&Instance> = corpus.iter().take(75).chain(fe.iter().take(25)).collect();
    let per = |total: usize| total.div_ceil(instances.len());
    let sizes = Sizes {
        formula_pairs: per(HOMOMORPHISM_PAIRS),
        witnesses: per(WITNESSES),
        ..Sizes::default()
    };
    for i in &instances {
        suite::structure_checks(&i.r, &mut rng, sizes, &mut report);
    }
    let hom = report.tally(suite::HOMOMORPHISM).total;
    let wit = report.tally(suite::WITNESS).total;
    let counts: Vec<String> = report
        .checks
        .iter()
        .map(|(k, t)| format!("{k} {}/{}", t.passed, t.total))
        .collect();
    line(
        report.passed() && hom >= HOMOMORPHISM_PAIRS && wit >= WITNESSES,
        format!("structural suite: {}", counts.join("; ")),
    )
}

fn idempotence_monotonicity(corpus: &[Instance]) -> Line {
    let mut rng = fuzz::rng(CORPUS_SEED ^ 0x1de);
    let (mut idem, mut mono) = (0, 0);
    for i in corpus {
        let dcl = dcl_enumerate(&i.r, &i.params).unwrap();
        if dcl_enumerate(&i.r, &Params::from_elems(dcl.iter().cloned())).unwrap() == dcl {
            idem += 1;
        }
        let elems = i.params.elems();
        let mut ok = elems.iter().all(|a| dcl.contains(a));
        for mask in 0..(1u32 << elems.len()) {
            let sub = Params::from_elems((0..elems.len()).filter(|k| mask >> k & 1 == 1).map(|k| elems[k].clone()));
            ok &= dcl_enumerate(&i.r, &sub).unwrap().is_subset(&dcl);
        }
        let extra = fuzz::element(&mut rng, i.r.theory(), i.r.atoms());
        let wider = Params::from_elems(elems.iter().cloned().chain([extra]));
        ok &= dcl.is_subset(&dcl_enumerate(&i.r, &wider).unwrap());
        if ok {
            mono += 1;
        }
    }
    let n = corpus.len();
    line(idem == n && mono == n, format!("idempotent on {idem}/{n}, monotone on {mono}/{n}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus = fuzz::corpus(CORPUS_SEED, CORPUS_SIZE, TheoryChoice::Dlo);
    let fe = fuzz::corpus(CORPUS_SEED + 1, 100, TheoryChoice::FiniteEnum);
    let both: Vec<Instance> = corpus.iter().chain(&fe).cloned().collect();
    let sizes: BTreeSet<usize> = corpus.iter().map(|i| i.params.len()).collect();
    println!(
        "corpus: {} DLO instances (|A| in {:?}), {} finite-theory instances, seed {CORPUS_SEED}",
        corpus.len(),
        sizes,
        fe.len()
    );

    let lines = [
        exchange_failure(),
        lcl_equals_dcl(&corpus),
        categorical_consequences(&both),
        decider_agreement(&both),
        qe_oracle(),
        no_parameter_events(&both),
        pointwise_gap(),
        structural(&corpus, &fe),
        idempotence_monotonicity(&both),
    ];

    let mut failed = 0;
    for (id, l) in lines.iter().enumerate() {
        let tag = if l.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {}", id + 1, l.text);
        if !l.pass {
            failed += 1;
        }
    }
    println!(
        "{}/{} criteria passed in {:.1}s",
        lines.len() - failed,
        lines.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
