//! Ultrafilters on finite universes and the extension operator.
//!
//! On a finite universe every ultrafilter is principal, so the extension of
//! a finite model is isomorphic to the model itself; this module computes
//! the extension both ways. `Literal` mode evaluates the defining nested
//! ultrafilter-quantified conditions through the formula evaluator and, for
//! functions, searches for the unique ultrafilter whose membership matches
//! the quantified condition on every subset of the universe. `Fast` mode
//! maps base tuples through the principal embedding. The two must agree
//! exactly, which the test batteries check.

use crate::format::serialize_model_with_names;
use crate::formula::{evaluate, Assignment, EvalError, Formula, Term, UfMode};
use crate::model::{
    classify_map, index_tuples, map_profile, Classification, MapWitness, Model, ModelError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BetaError {
    #[error("there are no ultrafilters on an empty universe")]
    EmptyUniverse,
    #[error("universe of size {size} exceeds the ultrafilter limit of {max}")]
    UniverseTooLarge { size: usize, max: usize },
    #[error("principal witness {point} out of range for universe of size {size}")]
    WitnessOutOfRange { point: usize, size: usize },
    #[error("literal mode is limited to universes of size {max}, got {size}")]
    LiteralSizeExceeded { size: usize, max: usize },
    #[error("no unique extension value for {symbol} at {args:?}: {candidates} candidates")]
    ExtensionNotUnique {
        symbol: String,
        args: Vec<usize>,
        candidates: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Ultrafilters are held as 128-bit subset masks, capping the universe size.
pub const ULTRAFILTER_UNIVERSE_MAX: usize = 128;

/// Largest universe accepted by literal-mode extension; the function clause
/// enumerates all `2^n` subsets per argument tuple.
pub const LITERAL_SIZE_MAX: usize = 12;

/// An ultrafilter on the finite universe `0..size`.
///
/// The principal witness is stored for constant-time fast paths, but the
/// definitional interface is [`FiniteUltrafilter::contains`]: membership of
/// a subset given as a bitmask. On a finite universe the two views coincide
/// and the tests check that no other maximal proper filter exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FiniteUltrafilter {
    size: usize,
    point: usize,
}

impl FiniteUltrafilter {
    pub fn new(size: usize, point: usize) -> Result<Self, BetaError> {
        if size == 0 {
            return Err(BetaError::EmptyUniverse);
        }
        if size > ULTRAFILTER_UNIVERSE_MAX {
            return Err(BetaError::UniverseTooLarge {
                size,
                max: ULTRAFILTER_UNIVERSE_MAX,
            });
        }
        if point >= size {
            return Err(BetaError::WitnessOutOfRange { point, size });
        }
        Ok(FiniteUltrafilter { size, point })
    }

    pub fn universe_size(&self) -> usize {
        self.size
    }

    /// The point this ultrafilter concentrates on.
    pub fn witness(&self) -> usize {
        self.point
    }

    /// Membership test: bit `i` of `subset` encodes whether `i` belongs to
    /// the queried set.
    pub fn contains(&self, subset: u128) -> bool {
        subset & (1u128 << self.point) != 0
    }
}

/// All ultrafilters on `0..n`: exactly the `n` principal ones.
pub fn enumerate_ultrafilters(n: usize) -> Result<Vec<FiniteUltrafilter>, BetaError> {
    if n == 0 {
        return Err(BetaError::EmptyUniverse);
    }
    (0..n).map(|p| FiniteUltrafilter::new(n, p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaMode {
    Literal,
    Fast,
}

/// A model whose universe is the set of ultrafilters on a base model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaModel {
    base: Model,
    universe: Vec<FiniteUltrafilter>,
    extended: Model,
}

impl BetaModel {
    pub fn base(&self) -> &Model {
        &self.base
    }

    pub fn universe(&self) -> &[FiniteUltrafilter] {
        &self.universe
    }

    /// The extended structure, a plain model whose point `i` stands for
    /// `universe()[i]`.
    pub fn extended(&self) -> &Model {
        &self.extended
    }

    pub fn index_of(&self, d: &FiniteUltrafilter) -> Option<usize> {
        self.universe.iter().position(|u| u == d)
    }

    /// Text form of the extended model with points named `u0`, `u1`, ...
    pub fn to_text(&self) -> String {
        let names: Vec<String> = (0..self.universe.len()).map(|i| format!("u{i}")).collect();
        serialize_model_with_names(&self.extended, &names)
    }
}

/// Computes the extension of `m` to its ultrafilter universe.
pub fn beta_extend(m: &Model, mode: BetaMode) -> Result<BetaModel, BetaError> {
    let universe = enumerate_ultrafilters(m.size())?;
    let extended = match mode {
        BetaMode::Literal => literal_extend(m, &universe)?,
        BetaMode::Fast => fast_extend(m, &universe)?,
    };
    Ok(BetaModel {
        base: m.clone(),
        universe,
        extended,
    })
}

fn fast_extend(m: &Model, universe: &[FiniteUltrafilter]) -> Result<Model, BetaError> {
    // Principal pushforward: the tuple of witnesses determines everything.
    let j = |a: usize| universe.iter().position(|u| u.witness() == a).unwrap();
    let mut ext = Model::new(m.vocab().clone(), universe.len())?;
    for sym in m.vocab().predicates() {
        for tuple in m.relation(&sym.name).unwrap() {
            let mapped: Vec<usize> = tuple.iter().map(|&a| j(a)).collect();
            ext.add_tuple(&sym.name, mapped)?;
        }
    }
    for sym in m.vocab().functions() {
        for (args, &v) in m.function(&sym.name).unwrap() {
            let mapped: Vec<usize> = args.iter().map(|&a| j(a)).collect();
            ext.set_value(&sym.name, mapped, j(v))?;
        }
    }
    Ok(ext)
}

/// Builds `Uforall[d1] x1 ... Uforall[dk] xk (inner)`.
fn nested_ufquant(arity: usize, inner: Formula) -> Formula {
    let mut f = inner;
    for i in (0..arity).rev() {
        f = Formula::ufquant(UfMode::Forall, param_name(i), var_name(i), f);
    }
    f
}

fn var_name(i: usize) -> String {
    format!("x{i}")
}

fn param_name(i: usize) -> String {
    format!("d{i}")
}

fn arg_vars(arity: usize) -> Vec<Term> {
    (0..arity).map(|i| Term::Var(var_name(i))).collect()
}

fn uf_assignment(universe: &[FiniteUltrafilter], args: &[usize]) -> Assignment {
    let mut a = Assignment::new();
    for (i, &idx) in args.iter().enumerate() {
        a.ufs.insert(param_name(i), universe[idx]);
    }
    a
}

fn literal_extend(m: &Model, universe: &[FiniteUltrafilter]) -> Result<Model, BetaError> {
    let n = m.size();
    if n > LITERAL_SIZE_MAX {
        return Err(BetaError::LiteralSizeExceeded {
            size: n,
            max: LITERAL_SIZE_MAX,
        });
    }
    let mut ext = Model::new(m.vocab().clone(), universe.len())?;

    for sym in m.vocab().predicates() {
        let formula = nested_ufquant(
            sym.arity,
            Formula::Pred {
                pred: sym.name.clone(),
                args: arg_vars(sym.arity),
            },
        );
        for args in index_tuples(universe.len(), sym.arity) {
            let assignment = uf_assignment(universe, &args);
            if evaluate(m, &formula, &assignment)? {
                ext.add_tuple(&sym.name, args)?;
            }
        }
    }

    if m.vocab().functions().is_empty() {
        return Ok(ext);
    }

    // A scratch predicate interprets each candidate subset A so that the
    // condition "F(x1,...,xk) in A" is an ordinary formula.
    let mut marker = String::from("__member");
    while m.vocab().predicate(&marker).is_some() || m.vocab().function(&marker).is_some() {
        marker.push('_');
    }
    let vocab2 = m.vocab().with_predicate(&marker, 1)?;
    let mut scratch = Model::new(vocab2, n)?;
    for sym in m.vocab().predicates() {
        scratch.set_relation(&sym.name, m.relation(&sym.name).unwrap().clone())?;
    }
    for sym in m.vocab().functions() {
        for (args, &v) in m.function(&sym.name).unwrap() {
            scratch.set_value(&sym.name, args.clone(), v)?;
        }
    }

    let subsets = 1usize << n;
    for sym in m.vocab().functions() {
        let formula = nested_ufquant(
            sym.arity,
            Formula::Pred {
                pred: marker.clone(),
                args: vec![Term::App {
                    func: sym.name.clone(),
                    args: arg_vars(sym.arity),
                }],
            },
        );
        for args in index_tuples(universe.len(), sym.arity) {
            let assignment = uf_assignment(universe, &args);
            // membership profile of the would-be value ultrafilter
            let mut profile = vec![false; subsets];
            for (mask, slot) in profile.iter_mut().enumerate() {
                let tuples = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| vec![i])
                    .collect();
                scratch.set_relation(&marker, tuples)?;
                *slot = evaluate(&scratch, &formula, &assignment)?;
            }
            let candidates: Vec<usize> = universe
                .iter()
                .enumerate()
                .filter(|(_, d)| (0..subsets).all(|mask| d.contains(mask as u128) == profile[mask]))
                .map(|(i, _)| i)
                .collect();
            match candidates.as_slice() {
                [unique] => ext.set_value(&sym.name, args, *unique)?,
                other => {
                    return Err(BetaError::ExtensionNotUnique {
                        symbol: sym.name.clone(),
                        args,
                        candidates: other.len(),
                    })
                }
            }
        }
    }
    Ok(ext)
}

/// The principal embedding of a model into its extension: each point goes
/// to the ultrafilter concentrated on it.
pub fn natural_embedding(m: &Model) -> Result<MapWitness, BetaError> {
    let beta = beta_extend(m, BetaMode::Fast)?;
    let map = (0..m.size())
        .map(|a| {
            beta.universe()
                .iter()
                .position(|u| u.witness() == a)
                .unwrap()
        })
        .collect();
    Ok(MapWitness::new(m.clone(), beta.extended().clone(), map)?)
}

/// The continuous extension of a point map to ultrafilter spaces:
/// the image ultrafilter contains `A` exactly when the source contains the
/// preimage of `A`.
pub fn pushforward(h: &MapWitness, d: &FiniteUltrafilter) -> FiniteUltrafilter {
    assert_eq!(
        d.universe_size(),
        h.source().size(),
        "ultrafilter lives on the wrong universe"
    );
    FiniteUltrafilter::new(h.target().size(), h.apply(d.witness()))
        .expect("target universe is nonempty and within bounds")
}

/// Membership of the pushforward computed through preimages only; used to
/// cross-check [`pushforward`] against its defining property.
pub fn pushforward_contains(h: &MapWitness, d: &FiniteUltrafilter, subset: u128) -> bool {
    let mut preimage = 0u128;
    for (i, &v) in h.map().iter().enumerate() {
        if subset & (1u128 << v) != 0 {
            preimage |= 1u128 << i;
        }
    }
    d.contains(preimage)
}

/// Outcome of lifting a witness to the extensions of its endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftReport {
    pub source: Classification,
    pub lifted: Classification,
    pub pass: bool,
    pub note: Option<String>,
}

/// Lifts `w` to a map between the extensions and checks that every notion
/// the source map satisfies (homomorphism, epimorphism, isomorphic
/// embedding) is satisfied by the lift.
pub fn lift_check(w: &MapWitness) -> Result<LiftReport, BetaError> {
    let source_profile = map_profile(w)?;
    let source = classify_map(w)?;

    let beta_src = beta_extend(w.source(), BetaMode::Fast)?;
    let beta_tgt = beta_extend(w.target(), BetaMode::Fast)?;
    let lifted_map: Vec<usize> = beta_src
        .universe()
        .iter()
        .map(|d| {
            let image = pushforward(w, d);
            beta_tgt
                .index_of(&image)
                .expect("pushforward stays in the target universe")
        })
        .collect();
    let lifted_witness = MapWitness::new(
        beta_src.extended().clone(),
        beta_tgt.extended().clone(),
        lifted_map,
    )?;
    let lifted_profile = map_profile(&lifted_witness)?;
    let lifted = lifted_witness_class(&lifted_profile);

    if !source_profile.homomorphism {
        return Ok(LiftReport {
            source,
            lifted,
            pass: true,
            note: Some("precondition unmet: source map is not a homomorphism".into()),
        });
    }
    let pass = (!source_profile.homomorphism || lifted_profile.homomorphism)
        && (!source_profile.epimorphism || lifted_profile.epimorphism)
        && (!source_profile.embedding || lifted_profile.embedding);
    Ok(LiftReport {
        source,
        lifted,
        pass,
        note: None,
    })
}

fn lifted_witness_class(profile: &crate::model::MapProfile) -> Classification {
    profile.strongest()
}
