use proptest::prelude::*;
use randdcl::cli::fuzz::{self, TheoryChoice};
use randdcl::cli::suite::{self, perturbations, Report, Sizes, Verdicts};
use randdcl::closure::{dcl_enumerate, fdcl_b, functional_definition, Params};
use randdcl::theory::numbered_vars;

fn choice(dlo: bool) -> TheoryChoice {
    if dlo {
        TheoryChoice::Dlo
    } else {
        TheoryChoice::FiniteEnum
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_suite_holds(seed in any::<u64>(), dlo in any::<bool>()) {
        let mut rng = fuzz::rng(seed);
        let inst = fuzz::instance(&mut rng, choice(dlo));
        let mut report = Report::default();
        suite::closure_checks(&inst.r, &inst.params, &mut rng, Sizes::default(), &mut report);
        prop_assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn structure_suite_holds(seed in any::<u64>(), dlo in any::<bool>()) {
        let mut rng = fuzz::rng(seed);
        let inst = fuzz::instance(&mut rng, choice(dlo));
        let mut report = Report::default();
        let sizes = Sizes { formula_pairs: 4, witnesses: 4, ..Sizes::default() };
        suite::structure_checks(&inst.r, &mut rng, sizes, &mut report);
        prop_assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn perturbed_elements_are_rejected(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let inst = fuzz::instance(&mut rng, TheoryChoice::Dlo);
        let dcl = dcl_enumerate(&inst.r, &inst.params).unwrap();
        for b in perturbations(&inst.r, &inst.params, &dcl, &mut rng, 3) {
            let v = Verdicts::compute(&inst.r, &b, &inst.params, &dcl).unwrap();
            prop_assert!(v.agree() && !v.algebra, "b = {b}: {v:?}");
        }
    }

    /// Every definable event of a closure member has a functional formula
    /// whose event is exactly that event.
    #[test]
    fn definitions_are_functional(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let inst = fuzz::instance(&mut rng, TheoryChoice::Mixed);
        let (r, params) = (&inst.r, &inst.params);
        let vars = numbered_vars("v", params.len());
        let alg = fdcl_b(r, params).unwrap();
        for b in dcl_enumerate(r, params).unwrap().iter().take(4) {
            for e in alg.events().into_iter().take(8) {
                let phi = functional_definition(r, b, &e, params).unwrap();
                let phi = phi.expect("closure members are definable on every definable event");
                prop_assert!(r.theory().is_functional(&phi, "u"), "{}", phi);
                let mut binding: randdcl::randvar::Binding<'_> =
                    vars.iter().cloned().zip(params.elems().iter()).collect();
                binding.insert("u".to_owned(), b);
                prop_assert_eq!(r.eval_event(&phi, &binding).unwrap(), e);
            }
        }
    }

    #[test]
    fn empty_parameters_define_only_trivial_events(seed in any::<u64>(), dlo in any::<bool>()) {
        let mut rng = fuzz::rng(seed);
        let inst = fuzz::instance(&mut rng, choice(dlo));
        let alg = fdcl_b(&inst.r, &Params::empty()).unwrap();
        prop_assert_eq!(alg.size(), 2);
    }
}
