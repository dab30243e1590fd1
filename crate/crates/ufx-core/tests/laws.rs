//! Sampled algebraic laws at the scales the modules promise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use ufx_core::formula::FreeNames;
use ufx_core::sample::{self, FormulaSpec, SampleSpec, WitnessKind};
use ufx_core::{
    beta_extend, classify_map, evaluate, lemma3_symbolic, map_profile, model_from_json,
    model_to_json, pair_image_membership, parse_model, serialize_model, BetaMode, Classification,
    EPSet, Formula, Kleene, MapWitness, PairOrder, PairingCode, SymbolicUF, Term,
};

#[test]
fn identity_classifies_as_isomorphism_on_sampled_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..30 {
        let m = sample::sized_model(&mut rng, &SampleSpec::default(), 5);
        let w = MapWitness::identity(&m);
        assert_eq!(classify_map(&w).unwrap(), Classification::Isomorphism);
    }
}

#[test]
fn model_round_trips_through_both_formats() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..50 {
        let m = sample::sized_model(&mut rng, &SampleSpec::default(), 5);
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
        assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
    }
}

/// Literal and fast extensions agree exactly on 200 sampled models with
/// universes up to six points and symbol arities up to two.
#[test]
fn extension_modes_agree_on_two_hundred_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let spec = SampleSpec::default();
    for round in 0..200 {
        let m = sample::sized_model(&mut rng, &spec, 6);
        let literal = beta_extend(&m, BetaMode::Literal)
            .unwrap_or_else(|e| panic!("literal extension failed on round {round}: {e}"));
        let fast = beta_extend(&m, BetaMode::Fast).unwrap();
        assert_eq!(literal, fast, "round {round}");
        assert_eq!(literal.to_text(), fast.to_text(), "round {round}");
    }
}

/// An independently written evaluator for the classical fragment, kept as
/// an oracle. It resolves terms and connectives directly and refuses
/// ultrafilter quantifiers.
fn naive_classical_eval(m: &ufx_core::Model, f: &Formula, env: &BTreeMap<String, usize>) -> bool {
    fn term(m: &ufx_core::Model, t: &Term, env: &BTreeMap<String, usize>) -> usize {
        match t {
            Term::Var(v) => env[v],
            Term::App { func, args } => {
                let vals: Vec<usize> = args.iter().map(|a| term(m, a, env)).collect();
                m.value(func, &vals).expect("total function")
            }
        }
    }
    match f {
        Formula::Equal(a, b) => term(m, a, env) == term(m, b, env),
        Formula::Pred { pred, args } => {
            let vals: Vec<usize> = args.iter().map(|a| term(m, a, env)).collect();
            m.holds(pred, &vals)
        }
        Formula::Not(x) => !naive_classical_eval(m, x, env),
        Formula::And(a, b) => naive_classical_eval(m, a, env) && naive_classical_eval(m, b, env),
        Formula::Or(a, b) => naive_classical_eval(m, a, env) || naive_classical_eval(m, b, env),
        Formula::Implies(a, b) => {
            !naive_classical_eval(m, a, env) || naive_classical_eval(m, b, env)
        }
        Formula::Forall { var, body } => (0..m.size()).all(|i| {
            let mut env2 = env.clone();
            env2.insert(var.clone(), i);
            naive_classical_eval(m, body, &env2)
        }),
        Formula::Exists { var, body } => (0..m.size()).any(|i| {
            let mut env2 = env.clone();
            env2.insert(var.clone(), i);
            naive_classical_eval(m, body, &env2)
        }),
        Formula::UfQuant { .. } => panic!("classical oracle got an ultrafilter quantifier"),
    }
}

#[test]
fn classical_fragment_agrees_with_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let spec = SampleSpec::default();
    let fspec = FormulaSpec {
        classical_only: true,
        ..FormulaSpec::default()
    };
    for _ in 0..300 {
        let m = sample::sized_model(&mut rng, &spec, 4);
        let f = sample::formula(&mut rng, m.vocab(), &fspec);
        let a = sample::assignment_for(&mut rng, &f, m.size());
        let ours = evaluate(&m, &f, &a).unwrap();
        assert_eq!(ours, naive_classical_eval(&m, &f, &a.vars));
    }
}

#[test]
fn witness_profiles_survive_lifting_on_sampled_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for i in 0..60 {
        let kind = match i % 3 {
            0 => WitnessKind::Homomorphism,
            1 => WitnessKind::Epimorphism,
            _ => WitnessKind::Embedding,
        };
        let w = sample::hom_witness(&mut rng, &SampleSpec::default(), kind, 4);
        let report = ufx_core::lift_check(&w).unwrap();
        assert!(
            report.pass,
            "{:?}: {} -> {}",
            kind, report.source, report.lifted
        );
        assert!(map_profile(&w).unwrap().homomorphism);
    }
}

#[test]
fn epset_algebra_matches_enumeration_to_ten_thousand() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..100 {
        let a = sample::epset(&mut rng);
        let b = sample::epset(&mut rng);
        let union = a.union(&b);
        let inter = a.intersect(&b);
        let minus = a.minus(&b);
        let comp = a.complement();
        for x in 0..=10_000u64 {
            assert_eq!(union.contains(x), a.contains(x) || b.contains(x));
            assert_eq!(inter.contains(x), a.contains(x) && b.contains(x));
            assert_eq!(minus.contains(x), a.contains(x) && !b.contains(x));
            assert_eq!(comp.contains(x), !a.contains(x));
        }
    }
}

#[test]
fn measure_is_monotone_and_decisive_on_the_concentration_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..150 {
        let a = sample::coinfinite_split(&mut rng);
        let d = SymbolicUF::frechet(a.clone()).unwrap();
        let s = sample::epset(&mut rng);
        let t = s.union(&sample::epset(&mut rng));
        // monotone: s is a subset of t
        if d.measure(&s) == Kleene::True {
            assert_eq!(d.measure(&t), Kleene::True);
        }
        if d.measure(&t) == Kleene::False {
            assert_eq!(d.measure(&s), Kleene::False);
        }
        // decisive exactly when one side of the split is finite
        let expected_unknown = a.intersect(&s).is_infinite() && a.minus(&s).is_infinite();
        assert_eq!(d.measure(&s) == Kleene::Unknown, expected_unknown);
    }
}

/// Swapping either the ultrafilter pair or the order flag flips a decided
/// verdict; swapping both preserves it.
#[test]
fn pair_image_symmetries_hold_on_sampled_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let code = PairingCode::default();
    for _ in 0..60 {
        let a1 = sample::coinfinite_split(&mut rng);
        let a2 = a1.complement();
        let d1 = SymbolicUF::frechet(a1.clone()).unwrap();
        let d2 = SymbolicUF::frechet(a2.clone()).unwrap();
        let base = pair_image_membership(&a1, &a2, PairOrder::FirstLess, &d1, &d2, &code).unwrap();
        let flip_order =
            pair_image_membership(&a1, &a2, PairOrder::SecondLess, &d1, &d2, &code).unwrap();
        let flip_ufs =
            pair_image_membership(&a1, &a2, PairOrder::FirstLess, &d2, &d1, &code).unwrap();
        let flip_both =
            pair_image_membership(&a1, &a2, PairOrder::SecondLess, &d2, &d1, &code).unwrap();
        assert_ne!(base, Kleene::Unknown, "partitions are decided");
        assert_eq!(flip_order, !base);
        assert_eq!(flip_ufs, !base);
        assert_eq!(flip_both, base);
    }
}

#[test]
fn symbolic_partition_reports_are_consistent_with_pair_symmetries() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for _ in 0..25 {
        let a1 = sample::coinfinite_split(&mut rng);
        let report = lemma3_symbolic(&a1).unwrap();
        assert!(report.extensions_differ, "{a1}");
        assert_eq!(report.b1_in_f12, !report.b2_in_f12);
        assert_eq!(report.b2_in_f21, !report.b1_in_f21);
    }
}

#[test]
fn free_name_reporting_matches_assignment_requirements() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    for _ in 0..100 {
        let m = sample::sized_model(&mut rng, &SampleSpec::default(), 3);
        let f = sample::formula(&mut rng, m.vocab(), &FormulaSpec::default());
        let FreeNames { vars, ufs } = f.free_names();
        let full = sample::assignment_for(&mut rng, &f, m.size());
        assert_eq!(
            full.vars.keys().cloned().collect::<Vec<_>>(),
            vars.iter().cloned().collect::<Vec<_>>()
        );
        assert_eq!(
            full.ufs.keys().cloned().collect::<Vec<_>>(),
            ufs.iter().cloned().collect::<Vec<_>>()
        );
        assert!(evaluate(&m, &f, &full).is_ok());
    }
}

#[test]
fn beta_universe_matches_point_count_and_embedding_separates() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for _ in 0..40 {
        let m = sample::sized_model(&mut rng, &SampleSpec::default(), 5);
        let beta = beta_extend(&m, BetaMode::Fast).unwrap();
        assert_eq!(beta.universe().len(), m.size());
        let j = ufx_core::natural_embedding(&m).unwrap();
        for a in 0..m.size() {
            for b in 0..m.size() {
                assert_eq!(a == b, j.apply(a) == j.apply(b));
            }
        }
    }
}

#[test]
fn frechet_class_membership_is_invariant_under_finite_edits() {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    for _ in 0..80 {
        let a = sample::coinfinite_split(&mut rng);
        let d = SymbolicUF::frechet(a).unwrap();
        let s = sample::epset(&mut rng);
        let edited = s
            .union(&EPSet::finite([rng.gen_range(0..50u64)]))
            .minus(&EPSet::finite([rng.gen_range(0..50u64)]));
        assert_eq!(d.measure(&s), d.measure(&edited));
    }
}
