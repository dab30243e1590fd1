//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line (visible with `--nocapture`) and enforcing its
//! runtime budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};
use ufx_core::sample::{self, FormulaSpec, SampleSpec, WitnessKind};
use ufx_core::{
    beta_extend, build_m1, classify_map, cut_segments, evaluate, formula_phi, formula_psi,
    lemma3_finite, lemma3_symbolic, lift_check, map_profile, natural_embedding,
    truncation_inner_check, Assignment, BetaMode, Classification, FiniteUltrafilter, Formula,
    Kleene, Model, PairOrder, PairingCode, StrictOrder, UfMode,
};

fn report(criterion: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion} ({name}): {tag} [{detail}; {elapsed:.2?}]");
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

fn budget(criterion: u32, elapsed: Duration, max: Duration) {
    assert!(
        elapsed < max,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2?} > {max:.2?}"
    );
}

/// The seeded model sample shared by criteria 1 and 2: 200 models with at
/// most 5 points and symbol arities at most 2.
fn embedding_sample() -> Vec<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
    let spec = SampleSpec::default();
    (0..200)
        .map(|_| sample::sized_model(&mut rng, &spec, 5))
        .collect()
}

#[test]
fn criterion_1_embedding_theorem_finite_scale() {
    let start = Instant::now();
    let models = embedding_sample();
    for (i, m) in models.iter().enumerate() {
        let j = natural_embedding(m).unwrap();
        assert_eq!(
            classify_map(&j).unwrap(),
            Classification::Isomorphism,
            "model {i}"
        );
        let beta = beta_extend(m, BetaMode::Fast).unwrap();
        assert!(beta.extended().validate().is_empty(), "model {i}");
    }
    let elapsed = start.elapsed();
    budget(1, elapsed, Duration::from_secs(10));
    report(
        1,
        "embedding theorem, finite scale",
        true,
        &format!("{} models, all isomorphic and valid", models.len()),
        elapsed,
    );
}

#[test]
fn criterion_2_definition_conformance_literal_vs_fast() {
    let start = Instant::now();
    let models = embedding_sample();
    let mut checked = 0;
    for (i, m) in models.iter().enumerate() {
        if m.size() > 6 {
            continue;
        }
        // Literal mode hard-fails internally unless the defining condition
        // picks exactly one ultrafilter per argument tuple.
        let literal = beta_extend(m, BetaMode::Literal)
            .unwrap_or_else(|e| panic!("uniqueness or evaluation failure on model {i}: {e}"));
        let fast = beta_extend(m, BetaMode::Fast).unwrap();
        assert_eq!(literal, fast, "model {i}");
        assert_eq!(
            literal.to_text().into_bytes(),
            fast.to_text().into_bytes(),
            "model {i} serializations differ"
        );
        checked += 1;
    }
    assert!(checked >= 200, "sample too small: {checked}");
    let elapsed = start.elapsed();
    budget(2, elapsed, Duration::from_secs(60));
    report(
        2,
        "definition conformance, literal vs fast",
        true,
        &format!("{checked} models byte-identical, unique extension values"),
        elapsed,
    );
}

#[test]
fn criterion_3_extension_theorem_lifts() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003);
    let spec = SampleSpec::default();
    let mut checked = 0;
    let mut round = 0;
    while checked < 200 {
        let kind = match round % 3 {
            0 => WitnessKind::Homomorphism,
            1 => WitnessKind::Epimorphism,
            _ => WitnessKind::Embedding,
        };
        round += 1;
        let w = sample::hom_witness(&mut rng, &spec, kind, 4);
        // filter: only witnesses that actually satisfy some notion
        if !map_profile(&w).unwrap().homomorphism {
            continue;
        }
        let report = lift_check(&w).unwrap();
        assert!(
            report.pass,
            "witness {round}: {} lifted to {}",
            report.source, report.lifted
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    budget(3, elapsed, Duration::from_secs(30));
    report(
        3,
        "extension theorem on sampled witnesses",
        true,
        &format!("{checked} witnesses lift at full strength"),
        elapsed,
    );
}

#[test]
fn criterion_4_quantifier_laws() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let spec = SampleSpec::default();
    let fspec = FormulaSpec::default();
    let rounds = 500;
    for round in 0..rounds {
        let m = sample::sized_model(&mut rng, &spec, 4);
        let f = sample::formula(&mut rng, m.vocab(), &fspec);
        let assignment = sample::assignment_for(&mut rng, &f, m.size());
        let names = f.free_names();
        let var = names
            .vars
            .iter()
            .next()
            .cloned()
            .unwrap_or_else(|| "v0".into());
        let point = rng.gen_range(0..m.size());

        let mut outer = assignment.clone();
        outer.vars.remove(&var);
        outer.ufs.insert(
            "qp".into(),
            FiniteUltrafilter::new(m.size(), point).unwrap(),
        );
        let mut direct = assignment.clone();
        direct.vars.insert(var.clone(), point);

        let forall = Formula::ufquant(UfMode::Forall, "qp", var.clone(), f.clone());
        let exists = Formula::ufquant(UfMode::Exists, "qp", var.clone(), f.clone());
        let reduced = evaluate(&m, &f, &direct).unwrap();
        let quantified = evaluate(&m, &forall, &outer).unwrap();
        assert_eq!(reduced, quantified, "principal reduction, round {round}");
        assert_eq!(
            evaluate(&m, &exists, &outer).unwrap(),
            quantified,
            "self-duality, round {round}"
        );
    }
    let elapsed = start.elapsed();
    report(
        4,
        "principal reduction and self-duality",
        true,
        &format!("{rounds} sampled triples, zero counterexamples"),
        elapsed,
    );
}

#[test]
fn criterion_5_pair_image_disjointness_exhaustive() {
    let start = Instant::now();
    for k in [4usize, 5] {
        let m1 = build_m1(k).unwrap();
        let base: Vec<usize> = m1.num_base.iter().copied().collect();
        let mut count = 0;
        for mask in 1..(1usize << k) - 1 {
            let a1: BTreeSet<usize> = base
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &x)| x)
                .collect();
            let rep = lemma3_finite(&m1, &a1).unwrap();
            assert!(rep.disjoint, "k={k}, partition {a1:?}");
            count += 1;
        }
        assert_eq!(count, (1 << k) - 2);
    }
    // the order-sensitive mutant must be caught
    let mut mutant = build_m1(4).unwrap();
    ufx_core::suite::inject_asymmetric_pairing(&mut mutant);
    let base: Vec<usize> = mutant.num_base.iter().copied().collect();
    let caught = (1usize..(1 << 4) - 1).any(|mask| {
        let a1: BTreeSet<usize> = base
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &x)| x)
            .collect();
        !lemma3_finite(&mutant, &a1).unwrap().disjoint
    });
    assert!(caught, "asymmetric mutant slipped through");
    let elapsed = start.elapsed();
    budget(5, elapsed, Duration::from_secs(5));
    report(
        5,
        "pair-image disjointness, exhaustive",
        true,
        "k=4 and k=5 exhaustive, mutant caught",
        elapsed,
    );
}

#[test]
fn criterion_6_symbolic_verdicts_with_truncation_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    let code = PairingCode::default();
    let partitions = 50;
    for round in 0..partitions {
        let a1 = sample::coinfinite_split(&mut rng);
        let rep = lemma3_symbolic(&a1).unwrap();
        assert_eq!(rep.b1_in_f12, Kleene::True, "round {round}: {a1}");
        assert_eq!(rep.b2_in_f12, Kleene::False, "round {round}: {a1}");
        assert_eq!(rep.b2_in_f21, Kleene::True, "round {round}: {a1}");
        assert_eq!(rep.b1_in_f21, Kleene::False, "round {round}: {a1}");
        assert!(rep.extensions_differ);
        for order in [PairOrder::FirstLess, PairOrder::SecondLess] {
            for bound in [1u64 << 7, 1 << 10, 1 << 13] {
                let check = truncation_inner_check(&rep.a1, &rep.a2, order, &code, bound).unwrap();
                assert!(
                    check.ok,
                    "round {round}: oracle mismatch at bound {bound}, order {order:?}, {:?}",
                    check.mismatch
                );
            }
        }
    }
    let elapsed = start.elapsed();
    budget(6, elapsed, Duration::from_secs(20));
    report(
        6,
        "symbolic pair-image verdicts vs truncation oracle",
        true,
        &format!("{partitions} partitions, oracle exact at 2^7, 2^10, 2^13"),
        elapsed,
    );
}

#[test]
fn criterion_7_principal_cuts() {
    let start = Instant::now();
    let mut cases = 0;
    for n in 1..=6usize {
        // one representative linear order per size, scrambled
        let mut ranking: Vec<usize> = (0..n).rev().collect();
        ranking.rotate_left(n / 2);
        let order = StrictOrder::from_ranking(&ranking).unwrap();
        for x in 0..n {
            let d = FiniteUltrafilter::new(n, x).unwrap();
            let cut = cut_segments(&order, &d).unwrap();
            let meet: BTreeSet<usize> = cut.initial.intersection(&cut.terminal).copied().collect();
            assert_eq!(meet, BTreeSet::from([x]), "n={n}, witness {x}");
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        7,
        "principal cut segments",
        true,
        &format!("{cases} cuts meet exactly in their witness"),
        elapsed,
    );
}

#[test]
fn criterion_8_suite_shadows() {
    let start = Instant::now();
    let psi = formula_psi();
    for k in [2usize, 3, 4] {
        let m1 = build_m1(k).unwrap();
        assert!(
            evaluate(&m1.model, &psi, &Assignment::new()).unwrap(),
            "separation sentence fails on the base, k={k}"
        );
        let beta = beta_extend(&m1.model, BetaMode::Fast).unwrap();
        assert!(
            evaluate(beta.extended(), &psi, &Assignment::new()).unwrap(),
            "separation sentence fails on the extension, k={k}"
        );
    }
    // the symmetry probe holds exactly on the set sort
    let m1 = build_m1(4).unwrap();
    let phi2 = formula_phi(2);
    for x in 0..m1.model.size() {
        let holds = evaluate(&m1.model, &phi2, &Assignment::new().with_var("x", x)).unwrap();
        assert_eq!(holds, m1.set_region.contains(&x), "x={x}");
    }
    // principal membership images match the membership rows
    for &a in &m1.num_base {
        let d = FiniteUltrafilter::new(m1.model.size(), a).unwrap();
        let g = ufx_core::compute_g(&m1.model, &d).unwrap();
        let expected: BTreeSet<usize> = m1
            .set_region
            .clone()
            .filter(|&b| m1.model.holds("R1", &[a, b]))
            .collect();
        assert_eq!(g, expected, "point {a}");
    }
    // the deviation ledger lists exactly the three documented deviations
    assert_eq!(m1.deviations.len(), 3);
    assert!(m1.deviations[0].contains("injective only on the designated"));
    assert!(m1.deviations[1].contains("colexicographic"));
    assert!(m1.deviations[2].contains("cross-region"));
    let elapsed = start.elapsed();
    budget(8, elapsed, Duration::from_secs(60));
    report(
        8,
        "truncation shadows",
        true,
        "separation, symmetry, membership images, and ledger all check",
        elapsed,
    );
}

#[test]
fn criterion_9_suite_is_byte_reproducible() {
    let start = Instant::now();
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_ufx"))
            .args(["paper", "suite", "--seed", "42"])
            .env_remove("UFX_SEED")
            .output()
            .expect("suite binary runs")
    };
    let first = run();
    let second = run();
    assert!(first.status.success(), "suite run failed: {first:?}");
    assert_eq!(first.stdout, second.stdout, "stdout differs between runs");
    assert_eq!(first.stderr, second.stderr);
    assert!(!first.stdout.is_empty());
    let elapsed = start.elapsed();
    report(
        9,
        "suite determinism",
        true,
        "two runs of `paper suite --seed 42` are byte-identical",
        elapsed,
    );
}
