//! The two-sorted pairing structure and its verification suite.
//!
//! [`build_m1`] constructs a finite truncation of a structure with a number
//! sort and a set sort: membership relates the two, each sort carries a
//! linear order, and a binary operation pairs elements within each sort,
//! injectively on designated bases. The formulas [`formula_phi`] and
//! [`formula_psi`] probe symmetry of the pairing and separation of points
//! by sets. [`lemma3_finite`] and [`lemma3_symbolic`] check the
//! disjointness and membership facts about order-filtered pair images, the
//! first by exhaustion in a truncation, the second exactly over symbolic
//! ultrafilter classes with a finite-truncation oracle cross-checking the
//! inner sets. [`run_suite`] bundles everything, plus seeded conformance
//! batteries for the extension operator, into one reproducible report.

use crate::beta::{
    beta_extend, natural_embedding, pushforward, BetaError, BetaMode, FiniteUltrafilter,
};
use crate::epset::{EPSet, EPSetError};
use crate::formula::{evaluate, Assignment, EvalError, Formula, Term, UfMode};
use crate::kleene::Kleene;
use crate::model::{classify_map, Classification, Model, ModelError, Vocabulary};
use crate::sample::{self, FormulaSpec, SampleSpec, WitnessKind};
use crate::symbolic::{pair_image_membership, PairOrder, PairingCode, SymbolicError, SymbolicUF};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("k must lie in 1..=6, got {0}")]
    KOutOfRange(usize),
    #[error("model does not have the expected shape: missing or misdeclared `{0}`")]
    NotTauShaped(String),
    #[error("the ultrafilter is not concentrated on the number sort")]
    NotConcentrated,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("not a strict linear order: {0}")]
    OrderNotLinear(String),
    #[error("order is over {order} points but the ultrafilter lives on {ultrafilter}")]
    OrderMismatch { order: usize, ultrafilter: usize },
    #[error("universe of size {size} exceeds the subset-mask limit of {max}")]
    UniverseTooLarge { size: usize, max: usize },
    #[error("ultrafilter lives on {got} points, expected {expected}")]
    WrongUniverse { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    EPSet(#[from] EPSetError),
}

const MASK_MAX: usize = 128;

fn mask_of(points: impl IntoIterator<Item = usize>) -> u128 {
    points.into_iter().fold(0u128, |m, p| m | (1u128 << p))
}

/// The signature of the pairing structure: sort predicates `P1`, `P2`,
/// membership `R1`, order `R2`, and the pairing operation `F`.
pub fn tau_vocabulary() -> Vocabulary {
    Vocabulary::new(
        vec![
            ("P1".into(), 1),
            ("P2".into(), 1),
            ("R1".into(), 2),
            ("R2".into(), 2),
        ],
        vec![("F".into(), 2)],
    )
    .expect("fixed signature is well formed")
}

/// A finite truncation of the two-sorted pairing structure.
///
/// The number region holds the base numbers `0..k` followed by carrier
/// slack for their pair codes; the set region encodes the powerset of the
/// base. `P1` holds exactly on the base numbers and `P2` on the whole set
/// region; the slack codes carry neither sort predicate, since membership
/// can only relate base numbers to sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedM1 {
    pub k: usize,
    pub model: Model,
    pub num_base: BTreeSet<usize>,
    pub set_base: BTreeSet<usize>,
    pub num_region: std::ops::Range<usize>,
    pub set_region: std::ops::Range<usize>,
    pub deviations: Vec<String>,
}

impl TruncatedM1 {
    /// The universe element encoding the subset with the given bitmask.
    pub fn set_element(&self, mask: usize) -> usize {
        self.set_region.start + mask
    }

    /// The subset bitmask of a set-region element.
    pub fn subset_mask(&self, element: usize) -> Option<usize> {
        self.set_region
            .contains(&element)
            .then(|| element - self.set_region.start)
    }
}

fn pair_code(a: usize, b: usize) -> usize {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hi * (hi + 1) / 2 + lo
}

/// Builds the truncation at base size `k` (valid for `1 <= k <= 6`).
///
/// The deviation report lists the three ways the truncation differs from
/// the untruncatable original; [`run_suite`] passes it through verbatim.
pub fn build_m1(k: usize) -> Result<TruncatedM1, SuiteError> {
    if !(1..=6).contains(&k) {
        return Err(SuiteError::KOutOfRange(k));
    }
    let num_count = k * (k + 1) / 2;
    let set_count = 1usize << k;
    let n = num_count + set_count;
    let mut model = Model::new(tau_vocabulary(), n)?;
    let set_start = num_count;

    for a in 0..k {
        model.add_tuple("P1", vec![a])?;
    }
    for s in 0..set_count {
        model.add_tuple("P2", vec![set_start + s])?;
    }
    for a in 0..k {
        for s in 0..set_count {
            if s & (1 << a) != 0 {
                model.add_tuple("R1", vec![a, set_start + s])?;
            }
        }
    }
    // Each region is ordered by its encoding; the set region encoding is
    // the colexicographic order on subsets. Cross-region pairs are false.
    for a in 0..num_count {
        for b in (a + 1)..num_count {
            model.add_tuple("R2", vec![a, b])?;
        }
    }
    for s in 0..set_count {
        for t in (s + 1)..set_count {
            model.add_tuple("R2", vec![set_start + s, set_start + t])?;
        }
    }
    for a in 0..n {
        for b in 0..n {
            let value = match (a < set_start, b < set_start) {
                (true, true) => {
                    if a < k && b < k {
                        pair_code(a, b)
                    } else {
                        a.min(b)
                    }
                }
                (false, false) => {
                    let union = (a - set_start) | (b - set_start);
                    set_start + union
                }
                _ => a,
            };
            model.set_value("F", vec![a, b], value)?;
        }
    }

    let deviations = vec![
        "pairing is injective only on the designated number and set bases; a finite carrier cannot be closed under unordered pairing".to_string(),
        "the order on the set region is the colexicographic order and has endpoints; no finite linear order is endpoint-free".to_string(),
        "cross-region order pairs are fixed to false and cross-region pairing defaults to its first argument".to_string(),
    ];

    Ok(TruncatedM1 {
        k,
        model,
        num_base: (0..k).collect(),
        set_base: (0..k).map(|i| set_start + (1 << i)).collect(),
        num_region: 0..num_count,
        set_region: set_start..n,
        deviations,
    })
}

/// Test mutant: make the pairing on the number base order sensitive (and
/// thereby non-injective on unordered pairs). The symmetry probe and the
/// pair-image disjointness check must both catch this.
pub fn inject_asymmetric_pairing(m1: &mut TruncatedM1) {
    for a in 0..m1.k {
        for b in 0..m1.k {
            if a != b {
                m1.model.set_value("F", vec![a, b], a).unwrap();
            }
        }
    }
}

fn phi_body(i: usize, subject: &str, inner: &str) -> Formula {
    assert!(i == 1 || i == 2, "sort index must be 1 or 2");
    let p = format!("P{i}");
    let pred = |var: &str| Formula::Pred {
        pred: p.clone(),
        args: vec![Term::Var(var.into())],
    };
    let app = |x: &str, y: &str| Term::App {
        func: "F".into(),
        args: vec![Term::Var(x.into()), Term::Var(y.into())],
    };
    Formula::and(
        pred(subject),
        Formula::forall(
            inner,
            Formula::implies(
                pred(inner),
                Formula::Equal(app(subject, inner), app(inner, subject)),
            ),
        ),
    )
}

/// `P_i(x) & forall y (P_i(y) -> F(x,y) = F(y,x))`: the subject commutes
/// with everything in its sort.
pub fn formula_phi(i: usize) -> Formula {
    phi_body(i, "x", "y")
}

/// The separation sentence: any two distinct points of the number sort are
/// separated, via membership, by a set that commutes within its sort.
pub fn formula_psi() -> Formula {
    let p1 = |var: &str| Formula::Pred {
        pred: "P1".into(),
        args: vec![Term::Var(var.into())],
    };
    let r1 = |x: &str, y: &str| Formula::Pred {
        pred: "R1".into(),
        args: vec![Term::Var(x.into()), Term::Var(y.into())],
    };
    let antecedent = Formula::and(
        Formula::and(p1("x1"), p1("x2")),
        Formula::not(Formula::Equal(
            Term::Var("x1".into()),
            Term::Var("x2".into()),
        )),
    );
    let witness = Formula::and(
        Formula::and(phi_body(2, "y", "z"), r1("x1", "y")),
        Formula::not(r1("x2", "y")),
    );
    Formula::forall(
        "x1",
        Formula::forall(
            "x2",
            Formula::implies(antecedent, Formula::exists("y", witness)),
        ),
    )
}

/// The set of set-sort elements whose membership row belongs to `d`:
/// `{b in P2 : {a in P1 : R1(a,b)} in d}`. Requires `d` concentrated on
/// the number sort.
pub fn compute_g(m: &Model, d: &FiniteUltrafilter) -> Result<BTreeSet<usize>, SuiteError> {
    for (name, arity) in [("P1", 1), ("P2", 1), ("R1", 2)] {
        let ok = m.vocab().predicate(name).is_some_and(|s| s.arity == arity);
        if !ok {
            return Err(SuiteError::NotTauShaped(name.into()));
        }
    }
    if m.size() > MASK_MAX {
        return Err(SuiteError::UniverseTooLarge {
            size: m.size(),
            max: MASK_MAX,
        });
    }
    if d.universe_size() != m.size() {
        return Err(SuiteError::WrongUniverse {
            expected: m.size(),
            got: d.universe_size(),
        });
    }
    let p1: Vec<usize> = m.relation("P1").unwrap().iter().map(|t| t[0]).collect();
    if !d.contains(mask_of(p1.iter().copied())) {
        return Err(SuiteError::NotConcentrated);
    }
    let mut out = BTreeSet::new();
    for tuple in m.relation("P2").unwrap() {
        let b = tuple[0];
        let row = mask_of(p1.iter().copied().filter(|&a| m.holds("R1", &[a, b])));
        if d.contains(row) {
            out.insert(b);
        }
    }
    Ok(out)
}

/// Order-filtered pair images of a base partition, and their disjointness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3FiniteReport {
    pub b1: BTreeSet<usize>,
    pub b2: BTreeSet<usize>,
    pub disjoint: bool,
}

/// For a partition of the number base into `a1` and its complement, builds
/// `B1 = {F(n1,n2) : n1 in a1, n2 in a2, n1 < n2}` and `B2` with the order
/// reversed, and reports whether they are disjoint. Disjointness is forced
/// by unordered injectivity of the pairing on the base.
pub fn lemma3_finite(
    m1: &TruncatedM1,
    a1: &BTreeSet<usize>,
) -> Result<Lemma3FiniteReport, SuiteError> {
    if a1.is_empty() {
        return Err(SuiteError::InvalidPartition("A1 is empty".into()));
    }
    if !a1.is_subset(&m1.num_base) {
        return Err(SuiteError::InvalidPartition(
            "A1 must be a subset of the number base".into(),
        ));
    }
    let a2: BTreeSet<usize> = m1.num_base.difference(a1).copied().collect();
    if a2.is_empty() {
        return Err(SuiteError::InvalidPartition(
            "A1 must be a proper subset of the number base".into(),
        ));
    }
    let mut b1 = BTreeSet::new();
    let mut b2 = BTreeSet::new();
    for &n1 in a1 {
        for &n2 in &a2 {
            let value = m1
                .model
                .value("F", &[n1, n2])
                .ok_or_else(|| SuiteError::NotTauShaped("F".into()))?;
            if m1.model.holds("R2", &[n1, n2]) {
                b1.insert(value);
            }
            if m1.model.holds("R2", &[n2, n1]) {
                b2.insert(value);
            }
        }
    }
    let disjoint = b1.intersection(&b2).next().is_none();
    Ok(Lemma3FiniteReport { b1, b2, disjoint })
}

/// The four membership verdicts certifying that the two extension values
/// of the pairing differ on a partition class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3SymbolicReport {
    pub a1: EPSet,
    pub a2: EPSet,
    pub b1_in_f12: Kleene,
    pub b2_in_f12: Kleene,
    pub b2_in_f21: Kleene,
    pub b1_in_f21: Kleene,
    pub extensions_differ: bool,
}

/// With `d1` the class concentrated on `a1` and `d2` on its complement,
/// certifies `B1 in F(d1,d2)`, `B2 not in F(d1,d2)`, `B2 in F(d2,d1)`,
/// `B1 not in F(d2,d1)`; all four verdicts hold for every pair of
/// ultrafilters in the classes, so the two extension values differ.
pub fn lemma3_symbolic(a1: &EPSet) -> Result<Lemma3SymbolicReport, SymbolicError> {
    let a2 = a1.complement();
    if !a1.is_infinite() || !a2.is_infinite() {
        return Err(SymbolicError::DegeneratePartition);
    }
    let d1 = SymbolicUF::frechet(a1.clone())?;
    let d2 = SymbolicUF::frechet(a2.clone())?;
    let code = PairingCode::default();
    let b1_in_f12 = pair_image_membership(a1, &a2, PairOrder::FirstLess, &d1, &d2, &code)?;
    let b2_in_f12 = pair_image_membership(a1, &a2, PairOrder::SecondLess, &d1, &d2, &code)?;
    let b2_in_f21 = pair_image_membership(a1, &a2, PairOrder::SecondLess, &d2, &d1, &code)?;
    let b1_in_f21 = pair_image_membership(a1, &a2, PairOrder::FirstLess, &d2, &d1, &code)?;
    let extensions_differ = b1_in_f12 == Kleene::True
        && b2_in_f12 == Kleene::False
        && b2_in_f21 == Kleene::True
        && b1_in_f21 == Kleene::False;
    Ok(Lemma3SymbolicReport {
        a1: a1.clone(),
        a2,
        b1_in_f12,
        b2_in_f12,
        b2_in_f21,
        b1_in_f21,
        extensions_differ,
    })
}

/// Result of checking the symbolic inner sets against a truncation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub bound: u64,
    pub ok: bool,
    pub pairs: u64,
    pub mismatch: Option<(u64, u64)>,
}

struct BitVec {
    words: Vec<u64>,
}

impl BitVec {
    fn zeros(len: u64) -> Self {
        BitVec {
            words: vec![0u64; len.div_ceil(64) as usize],
        }
    }

    fn set(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1u64 << (i % 64);
    }

    fn get(&self, i: u64) -> bool {
        self.words[(i / 64) as usize] & (1u64 << (i % 64)) != 0
    }
}

fn membership_bits(s: &EPSet, bound: u64) -> BitVec {
    let mut bits = BitVec::zeros(bound);
    for x in s.iter_below(bound) {
        bits.set(x);
    }
    bits
}

/// Brute-force oracle: builds the pair image `B` from codes of qualifying
/// pairs below `bound` and verifies that, for every `n1 < bound`, the set
/// `{n2 < bound : code(n1,n2) in B}` coincides with the inner set predicted
/// by [`predicted_inner_set`]. For the default triangular code and large
/// bounds the scan walks the code space once (each code names one unordered
/// pair) and closes the argument by counting; smaller bounds use the full
/// quadratic scan.
pub fn truncation_inner_check(
    a1: &EPSet,
    a2: &EPSet,
    order: PairOrder,
    pairing: &PairingCode,
    bound: u64,
) -> Result<TruncationReport, SymbolicError> {
    if let Some(witness) = a1.intersect(a2).min_element() {
        return Err(SymbolicError::NotDisjoint { witness });
    }
    let bits1 = membership_bits(a1, bound);
    let bits2 = membership_bits(a2, bound);
    let qualifies = |x: u64, y: u64| match order {
        PairOrder::FirstLess => x < y,
        PairOrder::SecondLess => y < x,
    };
    // Closed form of the predicted inner set; tests pin it to
    // `predicted_inner_set(..).contains(..)`.
    let predicted = |n1: u64, n2: u64| {
        if bits1.get(n1) {
            bits2.get(n2) && qualifies(n1, n2)
        } else if bits2.get(n1) {
            bits1.get(n2) && qualifies(n2, n1)
        } else {
            false
        }
    };

    let members1: Vec<u64> = a1.iter_below(bound).collect();
    let members2: Vec<u64> = a2.iter_below(bound).collect();

    let triangular_fast = matches!(pairing, PairingCode::CantorUnordered { offset: 0 });
    if triangular_fast && bound > 1024 {
        let max_code = pairing.encode(bound - 1, bound - 1);
        let mut codes = BitVec::zeros(max_code + 1);
        let mut pairs = 0u64;
        // The triangular code of a qualifying pair is its row base
        // max(max+1)/2 plus min, so each row can be filled with one add
        // per member below the row index.
        match order {
            PairOrder::FirstLess => {
                for &y in &members2 {
                    let row = y * (y + 1) / 2;
                    let cut = members1.partition_point(|&x| x < y);
                    for &x in &members1[..cut] {
                        codes.set(row + x);
                    }
                    pairs += cut as u64;
                }
            }
            PairOrder::SecondLess => {
                for &x in &members1 {
                    let row = x * (x + 1) / 2;
                    let cut = members2.partition_point(|&y| y < x);
                    for &y in &members2[..cut] {
                        codes.set(row + y);
                    }
                    pairs += cut as u64;
                }
            }
        }
        // Walk the code space row by row (code c in row hi names the
        // unordered pair (c - row_start, hi)), skipping zero words.
        let mut actual_pairs = 0u64;
        for hi in 0..bound {
            let row_start = hi * (hi + 1) / 2;
            let end = row_start + hi;
            let mut c = row_start;
            while c <= end {
                let bit = c % 64;
                let word = codes.words[(c / 64) as usize] >> bit;
                if word == 0 {
                    c += 64 - bit;
                    continue;
                }
                c += u64::from(word.trailing_zeros());
                if c > end {
                    break;
                }
                let lo = c - row_start;
                if lo == hi || !predicted(lo, hi) || !predicted(hi, lo) {
                    return Ok(TruncationReport {
                        bound,
                        ok: false,
                        pairs,
                        mismatch: Some((lo, hi)),
                    });
                }
                actual_pairs += 2;
                c += 1;
            }
        }
        // Every actual pair is predicted; matching totals force equality.
        let mut count1 = vec![0u64; bound as usize + 1];
        let mut count2 = vec![0u64; bound as usize + 1];
        for i in 0..bound {
            count1[i as usize + 1] = count1[i as usize] + u64::from(bits1.get(i));
            count2[i as usize + 1] = count2[i as usize] + u64::from(bits2.get(i));
        }
        let mut predicted_total = 0u64;
        for n1 in 0..bound {
            predicted_total += if bits1.get(n1) {
                match order {
                    PairOrder::FirstLess => count2[bound as usize] - count2[n1 as usize + 1],
                    PairOrder::SecondLess => count2[n1 as usize],
                }
            } else if bits2.get(n1) {
                match order {
                    PairOrder::FirstLess => count1[n1 as usize],
                    PairOrder::SecondLess => count1[bound as usize] - count1[n1 as usize + 1],
                }
            } else {
                0
            };
        }
        let ok = actual_pairs == predicted_total;
        return Ok(TruncationReport {
            bound,
            ok,
            pairs,
            mismatch: None,
        });
    }

    // Full quadratic scan. Triangular codes get a dense bitset; arbitrary
    // codes fall back to a hash set.
    enum Codes {
        Bits(BitVec),
        Hash(std::collections::HashSet<u64>),
    }
    let mut codes = if matches!(pairing, PairingCode::CantorUnordered { .. }) {
        Codes::Bits(BitVec::zeros(pairing.encode(bound - 1, bound - 1) + 1))
    } else {
        Codes::Hash(std::collections::HashSet::new())
    };
    let mut pairs = 0u64;
    for &x in &members1 {
        for &y in &members2 {
            if qualifies(x, y) {
                match &mut codes {
                    Codes::Bits(bits) => bits.set(pairing.encode(x, y)),
                    Codes::Hash(set) => {
                        set.insert(pairing.encode(x, y));
                    }
                }
                pairs += 1;
            }
        }
    }
    let member = |c: u64| match &codes {
        Codes::Bits(bits) => c < bits.words.len() as u64 * 64 && bits.get(c),
        Codes::Hash(set) => set.contains(&c),
    };
    for n1 in 0..bound {
        for n2 in 0..bound {
            let actual = member(pairing.encode(n1, n2));
            if actual != predicted(n1, n2) {
                return Ok(TruncationReport {
                    bound,
                    ok: false,
                    pairs,
                    mismatch: Some((n1, n2)),
                });
            }
        }
    }
    Ok(TruncationReport {
        bound,
        ok: true,
        pairs,
        mismatch: None,
    })
}

/// A strict linear order on `0..size`, validated on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictOrder {
    size: usize,
    less: Vec<bool>,
}

impl StrictOrder {
    pub fn from_pairs(size: usize, pairs: &[(usize, usize)]) -> Result<Self, SuiteError> {
        let mut less = vec![false; size * size];
        for &(a, b) in pairs {
            if a >= size || b >= size {
                return Err(SuiteError::OrderNotLinear(format!(
                    "pair ({a},{b}) out of range"
                )));
            }
            less[a * size + b] = true;
        }
        let order = StrictOrder { size, less };
        order.validate()?;
        Ok(order)
    }

    /// The order in which `ranking[0] < ranking[1] < ...`.
    pub fn from_ranking(ranking: &[usize]) -> Result<Self, SuiteError> {
        let size = ranking.len();
        let mut seen = vec![false; size];
        for &x in ranking {
            if x >= size || seen[x] {
                return Err(SuiteError::OrderNotLinear(
                    "ranking is not a permutation".into(),
                ));
            }
            seen[x] = true;
        }
        let mut pairs = Vec::new();
        for i in 0..size {
            for j in (i + 1)..size {
                pairs.push((ranking[i], ranking[j]));
            }
        }
        StrictOrder::from_pairs(size, &pairs)
    }

    fn validate(&self) -> Result<(), SuiteError> {
        let n = self.size;
        for a in 0..n {
            if self.lt(a, a) {
                return Err(SuiteError::OrderNotLinear(format!("{a} < {a}")));
            }
            for b in 0..n {
                if a != b && self.lt(a, b) == self.lt(b, a) {
                    return Err(SuiteError::OrderNotLinear(format!(
                        "exactly one of {a} < {b}, {b} < {a} must hold"
                    )));
                }
                for c in 0..n {
                    if self.lt(a, b) && self.lt(b, c) && !self.lt(a, c) {
                        return Err(SuiteError::OrderNotLinear(format!(
                            "transitivity fails on ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.less[a * self.size + b]
    }

    /// Elements in ascending order.
    pub fn ascending(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.size).collect();
        out.sort_by_key(|&x| (0..self.size).filter(|&y| self.lt(y, x)).count());
        out
    }
}

/// An initial and a final segment determined by an ultrafilter on a
/// linearly ordered set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPair {
    pub initial: BTreeSet<usize>,
    pub terminal: BTreeSet<usize>,
}

/// Intersects all initial segments belonging to `d` and all final segments
/// belonging to `d`. For a principal ultrafilter the two segments meet in
/// exactly the witness point.
pub fn cut_segments(order: &StrictOrder, d: &FiniteUltrafilter) -> Result<CutPair, SuiteError> {
    if order.size() != d.universe_size() {
        return Err(SuiteError::OrderMismatch {
            order: order.size(),
            ultrafilter: d.universe_size(),
        });
    }
    if order.size() > MASK_MAX {
        return Err(SuiteError::UniverseTooLarge {
            size: order.size(),
            max: MASK_MAX,
        });
    }
    let asc = order.ascending();
    let n = order.size();
    let full = mask_of(0..n);
    let mut initial_mask = full;
    let mut terminal_mask = full;
    for i in 0..=n {
        let prefix = mask_of(asc[..i].iter().copied());
        if d.contains(prefix) {
            initial_mask &= prefix;
        }
        let suffix = mask_of(asc[i..].iter().copied());
        if d.contains(suffix) {
            terminal_mask &= suffix;
        }
    }
    let unpack = |mask: u128| (0..n).filter(|&i| mask & (1u128 << i) != 0).collect();
    Ok(CutPair {
        initial: unpack(initial_mask),
        terminal: unpack(terminal_mask),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutantMode {
    None,
    AsymmetricPairing,
}

impl std::fmt::Display for MutantMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MutantMode::None => write!(f, "none"),
            MutantMode::AsymmetricPairing => write!(f, "asymmetric-pairing"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub k: usize,
    pub seed: u64,
    pub mutant: MutantMode,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            k: 4,
            seed: 42,
            mutant: MutantMode::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Schema version of the structured report formats.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub k: usize,
    pub seed: u64,
    pub mutant: String,
    pub deviations: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

impl SuiteReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "schema: {}", self.schema_version);
        let _ = writeln!(
            out,
            "suite: k={} seed={} mutant={}",
            self.k, self.seed, self.mutant
        );
        let _ = writeln!(out, "deviations:");
        for d in &self.deviations {
            let _ = writeln!(out, "  - {d}");
        }
        let _ = writeln!(out, "checks:");
        for c in &self.checks {
            let tag = if c.pass { "pass" } else { "FAIL" };
            let _ = writeln!(out, "  [{tag}] {}: {}", c.name, c.detail);
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        if failed == 0 {
            let _ = writeln!(out, "result: all-pass");
        } else {
            let _ = writeln!(out, "result: {failed} failed");
        }
        out
    }
}

fn run_check(name: &str, body: impl FnOnce() -> Result<(bool, String), SuiteError>) -> CheckResult {
    match body() {
        Ok((pass, detail)) => CheckResult {
            name: name.into(),
            pass,
            detail,
        },
        Err(e) => CheckResult {
            name: name.into(),
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn suite_m1(cfg: &SuiteConfig, k: usize) -> Result<TruncatedM1, SuiteError> {
    let mut m1 = build_m1(k)?;
    if cfg.mutant == MutantMode::AsymmetricPairing {
        inject_asymmetric_pairing(&mut m1);
    }
    Ok(m1)
}

fn check_rng(cfg: &SuiteConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(salt.wrapping_mul(0x9E3779B97F4A7C15)))
}

fn check_m1_valid(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    for k in 1..=cfg.k {
        let m1 = suite_m1(cfg, k)?;
        let violations = m1.model.validate();
        if !violations.is_empty() {
            return Ok((false, format!("k={k}: {}", violations[0])));
        }
    }
    Ok((true, format!("k=1..={} all valid", cfg.k)))
}

fn check_phi_characterization(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let m1 = suite_m1(cfg, cfg.k)?;
    let beta = beta_extend(&m1.model, BetaMode::Fast)?;
    let phis = [(1usize, formula_phi(1)), (2, formula_phi(2))];
    for idx in 0..beta.extended().size() {
        let witness = beta.universe()[idx].witness();
        for (i, phi) in &phis {
            let holds = evaluate(beta.extended(), phi, &Assignment::new().with_var("x", idx))?;
            let expected = match i {
                1 => m1.num_base.contains(&witness),
                _ => m1.set_region.contains(&witness),
            };
            if holds != expected {
                return Ok((
                    false,
                    format!("phi{i} at ultrafilter of point {witness}: got {holds}, expected {expected}"),
                ));
            }
        }
    }
    // Pairwise shadow: the extension value of the pairing commutes with
    // principal arguments within each sort.
    let sorts: [Vec<usize>; 2] = [
        m1.num_base.iter().copied().collect(),
        m1.set_region.clone().collect(),
    ];
    for sort in &sorts {
        for &d_idx in sort {
            for &a_idx in sort {
                let left = beta.extended().value("F", &[d_idx, a_idx]);
                let right = beta.extended().value("F", &[a_idx, d_idx]);
                if left != right {
                    return Ok((
                        false,
                        format!("pairing does not commute at ({d_idx},{a_idx}) in the extension"),
                    ));
                }
            }
        }
    }
    Ok((true, format!("both sorts characterized at k={}", cfg.k)))
}

fn check_psi_shadow(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let psi = formula_psi();
    let mut checked = 0;
    for k in 2..=cfg.k {
        let m1 = suite_m1(cfg, k)?;
        if !evaluate(&m1.model, &psi, &Assignment::new())? {
            return Ok((
                false,
                format!("separation sentence fails on the base at k={k}"),
            ));
        }
        let beta = beta_extend(&m1.model, BetaMode::Fast)?;
        if !evaluate(beta.extended(), &psi, &Assignment::new())? {
            return Ok((
                false,
                format!("separation sentence fails on the extension at k={k}"),
            ));
        }
        checked += 1;
    }
    Ok((
        true,
        format!("holds on base and extension for {checked} sizes"),
    ))
}

fn check_g_principal(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let m1 = suite_m1(cfg, cfg.k)?;
    let n = m1.model.size();
    let mut images = Vec::new();
    for &a in &m1.num_base {
        let d = FiniteUltrafilter::new(n, a)?;
        let g = compute_g(&m1.model, &d)?;
        let expected: BTreeSet<usize> = m1
            .set_region
            .clone()
            .filter(|&b| m1.model.holds("R1", &[a, b]))
            .collect();
        if g != expected {
            return Ok((
                false,
                format!("image at point {a} differs from its membership row"),
            ));
        }
        images.push(g);
    }
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            if images[i] == images[j] {
                return Ok((false, format!("points {i} and {j} have equal images")));
            }
        }
    }
    Ok((
        true,
        format!("{} principal images match and separate", images.len()),
    ))
}

fn check_lemma3_finite(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let m1 = suite_m1(cfg, cfg.k)?;
    let base: Vec<usize> = m1.num_base.iter().copied().collect();
    let mut partitions = 0;
    for mask in 1..((1usize << base.len()) - 1).max(1) {
        let a1: BTreeSet<usize> = base
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &x)| x)
            .collect();
        if a1.is_empty() || a1.len() == base.len() {
            continue;
        }
        let report = lemma3_finite(&m1, &a1)?;
        partitions += 1;
        if !report.disjoint {
            return Ok((false, format!("images overlap for partition {a1:?}")));
        }
    }
    Ok((
        true,
        format!("{partitions} partitions disjoint at k={}", cfg.k),
    ))
}

fn check_lemma3_symbolic(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 6);
    let mut partitions = vec![EPSet::evens(), EPSet::residue_class(3, 0)?];
    for _ in 0..3 {
        partitions.push(sample::coinfinite_split(&mut rng));
    }
    let code = PairingCode::default();
    for a1 in &partitions {
        let report = lemma3_symbolic(a1)?;
        if !report.extensions_differ {
            return Ok((false, format!("verdicts incomplete for {a1}")));
        }
        for order in [PairOrder::FirstLess, PairOrder::SecondLess] {
            for bound in [128u64, 1024] {
                let check = truncation_inner_check(&report.a1, &report.a2, order, &code, bound)?;
                if !check.ok {
                    return Ok((
                        false,
                        format!("truncation oracle disagrees for {a1} at bound {bound}"),
                    ));
                }
            }
        }
    }
    Ok((
        true,
        format!(
            "{} partitions certified and cross-checked",
            partitions.len()
        ),
    ))
}

fn check_cut_segments(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 7);
    let mut cases = 0;
    for n in 1..=6 {
        let mut ranking: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        ranking.shuffle(&mut rng);
        let order = StrictOrder::from_ranking(&ranking)?;
        for x in 0..n {
            let d = FiniteUltrafilter::new(n, x)?;
            let cut = cut_segments(&order, &d)?;
            let meet: BTreeSet<usize> = cut.initial.intersection(&cut.terminal).copied().collect();
            if meet != BTreeSet::from([x]) {
                return Ok((
                    false,
                    format!("cut at point {x} of a {n}-point order is {meet:?}"),
                ));
            }
            cases += 1;
        }
    }
    Ok((
        true,
        format!("{cases} principal cuts meet in their witness"),
    ))
}

fn check_beta_embedding(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 1);
    let spec = SampleSpec::default();
    let rounds = 30;
    for _ in 0..rounds {
        let m = sample::sized_model(&mut rng, &spec, 5);
        let j = natural_embedding(&m)?;
        if classify_map(&j)? != Classification::Isomorphism {
            return Ok((false, "embedding is not an isomorphism".into()));
        }
        let beta = beta_extend(&m, BetaMode::Fast)?;
        if !beta.extended().validate().is_empty() {
            return Ok((false, "extension fails validation".into()));
        }
    }
    Ok((true, format!("{rounds} models embed isomorphically")))
}

fn check_beta_mode_agreement(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 2);
    let spec = SampleSpec::default();
    let rounds = 30;
    for _ in 0..rounds {
        let m = sample::sized_model(&mut rng, &spec, 6);
        let literal = beta_extend(&m, BetaMode::Literal)?;
        let fast = beta_extend(&m, BetaMode::Fast)?;
        if literal != fast || literal.to_text() != fast.to_text() {
            return Ok((false, "literal and fast extensions differ".into()));
        }
    }
    Ok((true, format!("{rounds} models agree byte for byte")))
}

fn check_beta_lift(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 3);
    let spec = SampleSpec::default();
    let rounds = 30;
    for i in 0..rounds {
        let kind = match i % 3 {
            0 => WitnessKind::Homomorphism,
            1 => WitnessKind::Epimorphism,
            _ => WitnessKind::Embedding,
        };
        let w = sample::hom_witness(&mut rng, &spec, kind, 4);
        let report = crate::beta::lift_check(&w)?;
        if !report.pass {
            return Ok((
                false,
                format!("lift weakens {} to {}", report.source, report.lifted),
            ));
        }
    }
    Ok((true, format!("{rounds} witnesses lift at full strength")))
}

fn check_beta_naturality(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 4);
    let spec = SampleSpec::default();
    let rounds = 30;
    for _ in 0..rounds {
        let w = sample::hom_witness(&mut rng, &spec, WitnessKind::Homomorphism, 4);
        for a in 0..w.source().size() {
            let j_a = FiniteUltrafilter::new(w.source().size(), a)?;
            let image = pushforward(&w, &j_a);
            let expected = FiniteUltrafilter::new(w.target().size(), w.apply(a))?;
            if image != expected {
                return Ok((false, format!("pushforward of the point {a} is off")));
            }
        }
    }
    Ok((
        true,
        format!("{rounds} witnesses commute with the embeddings"),
    ))
}

fn check_quantifier_laws(cfg: &SuiteConfig) -> Result<(bool, String), SuiteError> {
    let mut rng = check_rng(cfg, 5);
    let spec = SampleSpec::default();
    let fspec = FormulaSpec::default();
    let rounds = 120;
    for _ in 0..rounds {
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
        outer
            .ufs
            .insert("qp".into(), FiniteUltrafilter::new(m.size(), point)?);
        let forall = Formula::ufquant(UfMode::Forall, "qp", var.clone(), f.clone());
        let exists = Formula::ufquant(UfMode::Exists, "qp", var.clone(), f.clone());

        let mut direct = assignment.clone();
        direct.vars.insert(var.clone(), point);

        let reduced = evaluate(&m, &f, &direct)?;
        let quantified = evaluate(&m, &forall, &outer)?;
        if reduced != quantified {
            return Ok((false, "principal reduction fails".into()));
        }
        if evaluate(&m, &exists, &outer)? != quantified {
            return Ok((false, "self-duality fails".into()));
        }
    }
    Ok((true, format!("{rounds} sampled instances of both laws")))
}

/// Runs every check with the given configuration. The report is fully
/// deterministic in the configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    if !(1..=6).contains(&cfg.k) {
        return Err(SuiteError::KOutOfRange(cfg.k));
    }
    let m1 = build_m1(cfg.k)?;
    let checks = vec![
        run_check("m1-valid", || check_m1_valid(cfg)),
        run_check("phi-characterization", || check_phi_characterization(cfg)),
        run_check("psi-shadow", || check_psi_shadow(cfg)),
        run_check("g-principal", || check_g_principal(cfg)),
        run_check("lemma3-finite", || check_lemma3_finite(cfg)),
        run_check("lemma3-symbolic", || check_lemma3_symbolic(cfg)),
        run_check("cut-segments", || check_cut_segments(cfg)),
        run_check("beta-embedding", || check_beta_embedding(cfg)),
        run_check("beta-mode-agreement", || check_beta_mode_agreement(cfg)),
        run_check("beta-lift", || check_beta_lift(cfg)),
        run_check("beta-naturality", || check_beta_naturality(cfg)),
        run_check("quantifier-laws", || check_quantifier_laws(cfg)),
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        schema_version: REPORT_SCHEMA_VERSION,
        k: cfg.k,
        seed: cfg.seed,
        mutant: cfg.mutant.to_string(),
        deviations: m1.deviations,
        checks,
        all_pass,
    })
}
