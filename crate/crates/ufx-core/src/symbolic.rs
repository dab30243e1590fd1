//! Finitely presented ultrafilter classes on the naturals.
//!
//! A [`SymbolicUF`] is either a principal ultrafilter or the class of all
//! non-principal ultrafilters concentrated on an infinite eventually
//! periodic set. Membership questions about the class are answered with a
//! [`Kleene`] value: `True` and `False` are verdicts valid for every
//! ultrafilter in the class, `Unknown` means members of the class disagree
//! or the certificate cannot decide.
//!
//! On top of the measure sits an exact decision procedure for two-level
//! quantifier statements whose inner set is an eventually periodic set cut
//! at the outer variable, and a reduction of pair-image membership
//! questions to that procedure.

use crate::epset::{EPSet, EPSetError};
use crate::kleene::Kleene;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("the concentration set must be infinite")]
    NotInfinite,
    #[error("sets must be disjoint, but both contain {witness}")]
    NotDisjoint { witness: u64 },
    #[error("both the set and its complement must be infinite")]
    DegeneratePartition,
    #[error("pairing code is not injective: {0}")]
    BadPairing(String),
    #[error(transparent)]
    EPSet(#[from] EPSetError),
    #[error("cannot parse `{text}` as an ultrafilter: {msg}")]
    Parse { text: String, msg: String },
}

/// A principal ultrafilter or a class of non-principal ones concentrated on
/// an infinite eventually periodic set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolicUF {
    Principal(u64),
    FrechetOn(EPSet),
}

impl SymbolicUF {
    /// The class of non-principal ultrafilters containing `a` and every set
    /// that includes all but finitely many elements of `a`.
    pub fn frechet(a: EPSet) -> Result<Self, SymbolicError> {
        if !a.is_infinite() {
            return Err(SymbolicError::NotInfinite);
        }
        Ok(SymbolicUF::FrechetOn(a))
    }

    /// Class-wide membership of `s`.
    ///
    /// For a principal ultrafilter this is the point test. For the class
    /// concentrated on `a`: `True` when `a \ s` is finite (every member
    /// contains `s`), `False` when `a n s` is finite (no member does), and
    /// `Unknown` exactly when both sides are infinite, where two members of
    /// the class disagree.
    pub fn measure(&self, s: &EPSet) -> Kleene {
        match self {
            SymbolicUF::Principal(n) => s.contains(*n).into(),
            SymbolicUF::FrechetOn(a) => {
                if a.minus(s).is_finite() {
                    Kleene::True
                } else if a.intersect(s).is_finite() {
                    Kleene::False
                } else {
                    Kleene::Unknown
                }
            }
        }
    }

    /// Parses `principal:N` or `frechet:ep(...)`.
    pub fn parse(text: &str) -> Result<Self, SymbolicError> {
        let err = |msg: &str| SymbolicError::Parse {
            text: text.to_string(),
            msg: msg.to_string(),
        };
        let trimmed = text.trim();
        if let Some(rest) = trimmed.strip_prefix("principal:") {
            let n = rest
                .trim()
                .parse::<u64>()
                .map_err(|_| err("expected a point after `principal:`"))?;
            return Ok(SymbolicUF::Principal(n));
        }
        if let Some(rest) = trimmed.strip_prefix("frechet:") {
            let set = EPSet::parse(rest.trim())?;
            return SymbolicUF::frechet(set);
        }
        Err(err("expected `principal:N` or `frechet:ep(...)`"))
    }
}

impl fmt::Display for SymbolicUF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicUF::Principal(n) => write!(f, "principal:{n}"),
            SymbolicUF::FrechetOn(a) => write!(f, "frechet:{a}"),
        }
    }
}

/// How the inner set depends on the outer quantified variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterConstraint {
    /// The inner set is the base set itself.
    None,
    /// `base n {x : x > n1}` for outer value `n1`.
    GreaterThanOuter,
    /// `base n {x : x < n1}` for outer value `n1`.
    LessThanOuter,
}

/// A family of inner sets `n1 -> fam(n1)` in closed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamFamily {
    pub base: EPSet,
    pub constraint: OuterConstraint,
}

impl ParamFamily {
    pub fn new(base: EPSet, constraint: OuterConstraint) -> Self {
        ParamFamily { base, constraint }
    }

    /// The concrete inner set at outer value `n1`.
    pub fn at(&self, n1: u64) -> EPSet {
        match self.constraint {
            OuterConstraint::None => self.base.clone(),
            OuterConstraint::GreaterThanOuter => self.base.cut_above(n1),
            OuterConstraint::LessThanOuter => self.base.cut_below(n1),
        }
    }
}

/// The regions of outer values where the inner decision is true and where
/// it is unknown, computed analytically from the closed forms.
fn inner_regions(d2: &SymbolicUF, fam: &ParamFamily) -> (EPSet, EPSet) {
    let everywhere = EPSet::naturals();
    let nowhere = EPSet::empty();
    match (d2, fam.constraint) {
        (SymbolicUF::Principal(m), OuterConstraint::None) => {
            if fam.base.contains(*m) {
                (everywhere, nowhere)
            } else {
                (nowhere.clone(), nowhere)
            }
        }
        (SymbolicUF::Principal(m), OuterConstraint::GreaterThanOuter) => {
            // m lies in base n (n1, inf) exactly for n1 < m.
            if fam.base.contains(*m) {
                (EPSet::naturals().cut_below(*m), nowhere)
            } else {
                (nowhere.clone(), nowhere)
            }
        }
        (SymbolicUF::Principal(m), OuterConstraint::LessThanOuter) => {
            if fam.base.contains(*m) {
                (EPSet::naturals().cut_above(*m), nowhere)
            } else {
                (nowhere.clone(), nowhere)
            }
        }
        (SymbolicUF::FrechetOn(_), OuterConstraint::None)
        | (SymbolicUF::FrechetOn(_), OuterConstraint::GreaterThanOuter) => {
            // Removing an initial segment never changes the measure on a
            // class of non-principal ultrafilters, so the decision is the
            // constant measure(d2, base).
            match d2.measure(&fam.base) {
                Kleene::True => (everywhere, nowhere),
                Kleene::False => (nowhere.clone(), nowhere),
                Kleene::Unknown => (nowhere, everywhere),
            }
        }
        (SymbolicUF::FrechetOn(_), OuterConstraint::LessThanOuter) => {
            // The inner set is finite for every n1 and the class is
            // non-principal, so the inner decision is false everywhere.
            (nowhere.clone(), nowhere)
        }
    }
}

/// Decides the two-level statement: for `d1`-most `n1` in `outer_domain`,
/// `fam(n1)` belongs to `d2`.
///
/// The inner decision, as a function of the outer value, is eventually
/// constant with an analytically computable change point. The outer measure
/// is then applied to the true region; the verdict degrades to `Unknown`
/// only when inner unknowns land on a region relevant to `d1`.
pub fn eval_two_level(
    d1: &SymbolicUF,
    d2: &SymbolicUF,
    fam: &ParamFamily,
    outer_domain: &EPSet,
) -> Kleene {
    let (true_region, unknown_region) = inner_regions(d2, fam);
    let definite = outer_domain.intersect(&true_region);
    let lo = d1.measure(&definite);
    if lo == Kleene::True {
        return Kleene::True;
    }
    let possible = definite.union(&outer_domain.intersect(&unknown_region));
    let hi = d1.measure(&possible);
    if hi == Kleene::False {
        return Kleene::False;
    }
    Kleene::Unknown
}

/// Which factor of a mixed pair must be the smaller one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOrder {
    FirstLess,
    SecondLess,
}

/// A total injection from unordered pairs of naturals into the naturals.
#[derive(Clone)]
pub enum PairingCode {
    /// `max (max+1) / 2 + min + offset`, the triangular enumeration of
    /// unordered pairs.
    CantorUnordered {
        offset: u64,
    },
    Custom(Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>),
}

impl fmt::Debug for PairingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingCode::CantorUnordered { offset } => {
                write!(f, "CantorUnordered {{ offset: {offset} }}")
            }
            PairingCode::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Default for PairingCode {
    fn default() -> Self {
        PairingCode::CantorUnordered { offset: 0 }
    }
}

impl PairingCode {
    pub fn encode(&self, a: u64, b: u64) -> u64 {
        match self {
            PairingCode::CantorUnordered { offset } => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                hi * (hi + 1) / 2 + lo + offset
            }
            PairingCode::Custom(f) => f(a, b),
        }
    }

    /// Inverts the triangular code; `None` for custom codes or codes below
    /// the offset.
    pub fn decode(&self, code: u64) -> Option<(u64, u64)> {
        match self {
            PairingCode::CantorUnordered { offset } => {
                let c = code.checked_sub(*offset)?;
                let mut hi = integer_sqrt(2 * c);
                while hi * (hi + 1) / 2 > c {
                    hi -= 1;
                }
                while (hi + 1) * (hi + 2) / 2 <= c {
                    hi += 1;
                }
                let lo = c - hi * (hi + 1) / 2;
                if lo > hi {
                    return None;
                }
                Some((lo, hi))
            }
            PairingCode::Custom(_) => None,
        }
    }

    /// Checks injectivity on unordered pairs drawn from `[0, bound)`.
    pub fn check_injective_below(&self, bound: u64) -> Result<(), SymbolicError> {
        let mut seen = std::collections::HashMap::new();
        for a in 0..bound {
            for b in a..bound {
                let code = self.encode(a, b);
                if let Some(&(x, y)) = seen.get(&code) {
                    return Err(SymbolicError::BadPairing(format!(
                        "{{{a},{b}}} and {{{x},{y}}} both code to {code}"
                    )));
                }
                seen.insert(code, (a, b));
                // unordered: both orders must agree
                if self.encode(b, a) != code {
                    return Err(SymbolicError::BadPairing(format!(
                        "code is order sensitive at ({a},{b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn integer_sqrt(x: u64) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > x) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= x) {
        r += 1;
    }
    r
}

/// For a pair image `B = {code(a1, a2) : a1 in A1, a2 in A2, ordered}` and
/// an outer value `n1`, the set `{n2 : code(n1, n2) in B}` dictated by
/// unordered injectivity and disjointness of `A1`, `A2`.
pub fn predicted_inner_set(a1: &EPSet, a2: &EPSet, order: PairOrder, n1: u64) -> EPSet {
    if a1.contains(n1) {
        match order {
            PairOrder::FirstLess => a2.cut_above(n1),
            PairOrder::SecondLess => a2.cut_below(n1),
        }
    } else if a2.contains(n1) {
        match order {
            PairOrder::FirstLess => a1.cut_below(n1),
            PairOrder::SecondLess => a1.cut_above(n1),
        }
    } else {
        EPSet::empty()
    }
}

/// Decides whether the pair image `B` (as above) belongs to the extension
/// value at `(d1, d2)`, i.e. whether for `d1`-most `n1`, `d2`-most `n2`
/// satisfy `code(n1, n2) in B`.
///
/// By injectivity the inner set is a cut of `A2` when `n1` lands in `A1`, a
/// cut of `A1` when it lands in `A2`, and empty otherwise; the outer
/// quantifier splits over that partition into two [`eval_two_level`] calls.
pub fn pair_image_membership(
    a1: &EPSet,
    a2: &EPSet,
    order: PairOrder,
    d1: &SymbolicUF,
    d2: &SymbolicUF,
    pairing: &PairingCode,
) -> Result<Kleene, SymbolicError> {
    let overlap = a1.intersect(a2);
    if let Some(witness) = overlap.min_element() {
        return Err(SymbolicError::NotDisjoint { witness });
    }
    pairing.check_injective_below(64)?;
    let (on_a1, on_a2) = match order {
        PairOrder::FirstLess => (
            OuterConstraint::GreaterThanOuter,
            OuterConstraint::LessThanOuter,
        ),
        PairOrder::SecondLess => (
            OuterConstraint::LessThanOuter,
            OuterConstraint::GreaterThanOuter,
        ),
    };
    let t1 = eval_two_level(d1, d2, &ParamFamily::new(a2.clone(), on_a1), a1);
    let t2 = eval_two_level(d1, d2, &ParamFamily::new(a1.clone(), on_a2), a2);
    // The outer domains partition the naturals (the remainder contributes an
    // empty inner set), so an ultrafilter accepts the union exactly when it
    // accepts one part.
    Ok(t1 | t2)
}
