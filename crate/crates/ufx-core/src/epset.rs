//! Eventually periodic subsets of the naturals.
//!
//! A set is described by a finite prefix below a threshold and, from the
//! threshold on, by a set of residues modulo a period. These sets form a
//! Boolean algebra that is closed under the threshold cuts used by the
//! symbolic layer, and every operation here is exact.
//!
//! Values are kept canonical (minimal period, then minimal threshold), so
//! structural equality is extensional equality.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EPSetError {
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("prefix element {element} not below threshold {threshold}")]
    PrefixOutOfRange { element: u64, threshold: u64 },
    #[error("residue {residue} not below period {period}")]
    ResidueOutOfRange { residue: u64, period: u64 },
    #[error("cannot parse `{text}` as an eventually periodic set: {msg}")]
    Parse { text: String, msg: String },
}

/// An eventually periodic subset of the naturals, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EPSet {
    threshold: u64,
    prefix: BTreeSet<u64>,
    period: u64,
    residues: BTreeSet<u64>,
}

impl EPSet {
    /// Builds a set from raw data and canonicalizes it.
    pub fn new(
        threshold: u64,
        prefix: impl IntoIterator<Item = u64>,
        period: u64,
        residues: impl IntoIterator<Item = u64>,
    ) -> Result<Self, EPSetError> {
        if period == 0 {
            return Err(EPSetError::ZeroPeriod);
        }
        let prefix: BTreeSet<u64> = prefix.into_iter().collect();
        if let Some(&e) = prefix.iter().find(|&&e| e >= threshold) {
            return Err(EPSetError::PrefixOutOfRange {
                element: e,
                threshold,
            });
        }
        let residues: BTreeSet<u64> = residues.into_iter().collect();
        if let Some(&r) = residues.iter().find(|&&r| r >= period) {
            return Err(EPSetError::ResidueOutOfRange { residue: r, period });
        }
        Ok(Self::canonical(threshold, prefix, period, residues))
    }

    fn canonical(
        mut threshold: u64,
        mut prefix: BTreeSet<u64>,
        period: u64,
        residues: BTreeSet<u64>,
    ) -> Self {
        // Minimal period first: the least divisor under which the residue
        // pattern is shift invariant.
        let mut best = period;
        for d in 1..=period {
            if !period.is_multiple_of(d) {
                continue;
            }
            if (0..period).all(|r| residues.contains(&r) == residues.contains(&((r + d) % period)))
            {
                best = d;
                break;
            }
        }
        let period = best;
        let residues: BTreeSet<u64> = residues.into_iter().filter(|&r| r < period).collect();
        // Then shrink the threshold wherever the prefix already agrees with
        // the periodic tail.
        while threshold > 0 {
            let x = threshold - 1;
            if prefix.contains(&x) == residues.contains(&(x % period)) {
                prefix.remove(&x);
                threshold = x;
            } else {
                break;
            }
        }
        EPSet {
            threshold,
            prefix,
            period,
            residues,
        }
    }

    pub fn empty() -> Self {
        EPSet {
            threshold: 0,
            prefix: BTreeSet::new(),
            period: 1,
            residues: BTreeSet::new(),
        }
    }

    pub fn naturals() -> Self {
        EPSet {
            threshold: 0,
            prefix: BTreeSet::new(),
            period: 1,
            residues: [0].into_iter().collect(),
        }
    }

    /// The residue class `{x : x = r (mod p)}`.
    pub fn residue_class(period: u64, residue: u64) -> Result<Self, EPSetError> {
        if period == 0 {
            return Err(EPSetError::ZeroPeriod);
        }
        EPSet::new(0, [], period, [residue % period])
    }

    pub fn evens() -> Self {
        Self::residue_class(2, 0).unwrap()
    }

    pub fn odds() -> Self {
        Self::residue_class(2, 1).unwrap()
    }

    pub fn finite(elements: impl IntoIterator<Item = u64>) -> Self {
        let prefix: BTreeSet<u64> = elements.into_iter().collect();
        let threshold = prefix.iter().next_back().map_or(0, |&m| m + 1);
        Self::canonical(threshold, prefix, 1, BTreeSet::new())
    }

    pub fn contains(&self, x: u64) -> bool {
        if x < self.threshold {
            self.prefix.contains(&x)
        } else {
            self.residues.contains(&(x % self.period))
        }
    }

    /// Infinite exactly when the periodic tail is nonempty.
    pub fn is_infinite(&self) -> bool {
        !self.residues.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.residues.is_empty()
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    fn combine(&self, other: &EPSet, f: impl Fn(bool, bool) -> bool) -> EPSet {
        let threshold = self.threshold.max(other.threshold);
        let period = lcm(self.period, other.period);
        let prefix: BTreeSet<u64> = (0..threshold)
            .filter(|&x| f(self.contains(x), other.contains(x)))
            .collect();
        // For x at or above the joint threshold, membership on both sides
        // depends only on x mod the joint period.
        let residues: BTreeSet<u64> = (0..period)
            .filter(|&r| {
                f(
                    self.residues.contains(&(r % self.period)),
                    other.residues.contains(&(r % other.period)),
                )
            })
            .collect();
        EPSet::canonical(threshold, prefix, period, residues)
    }

    pub fn union(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn minus(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> EPSet {
        let prefix = (0..self.threshold)
            .filter(|&x| !self.prefix.contains(&x))
            .collect();
        let residues = (0..self.period)
            .filter(|r| !self.residues.contains(r))
            .collect();
        EPSet::canonical(self.threshold, prefix, self.period, residues)
    }

    /// `{x in self : x > n}`.
    pub fn cut_above(&self, n: u64) -> EPSet {
        let threshold = self.threshold.max(n.saturating_add(1));
        let prefix = (0..threshold)
            .filter(|&x| x > n && self.contains(x))
            .collect();
        EPSet::canonical(threshold, prefix, self.period, self.residues.clone())
    }

    /// `{x in self : x < n}`; always finite.
    pub fn cut_below(&self, n: u64) -> EPSet {
        let prefix: BTreeSet<u64> = (0..n).filter(|&x| self.contains(x)).collect();
        EPSet::canonical(n, prefix, 1, BTreeSet::new())
    }

    /// Ascending members strictly below `bound`.
    pub fn iter_below(&self, bound: u64) -> impl Iterator<Item = u64> + '_ {
        (0..bound).filter(move |&x| self.contains(x))
    }

    pub fn min_element(&self) -> Option<u64> {
        if let Some(&p) = self.prefix.iter().next() {
            return Some(p);
        }
        if self.residues.is_empty() {
            return None;
        }
        (self.threshold..).find(|&x| self.residues.contains(&(x % self.period)))
    }

    /// Parses the literal form `ep(N; prefix; p; residues)`, for example
    /// `ep(0; ; 2; 0)` for the even numbers.
    pub fn parse(text: &str) -> Result<Self, EPSetError> {
        let err = |msg: &str| EPSetError::Parse {
            text: text.to_string(),
            msg: msg.to_string(),
        };
        let inner = text
            .trim()
            .strip_prefix("ep(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err("expected `ep(N; prefix; p; residues)`"))?;
        let parts: Vec<&str> = inner.split(';').collect();
        if parts.len() != 4 {
            return Err(err("expected four `;`-separated fields"));
        }
        let number = |s: &str| -> Result<u64, EPSetError> {
            s.trim()
                .parse::<u64>()
                .map_err(|_| err(&format!("`{}` is not a number", s.trim())))
        };
        let list = |s: &str| -> Result<Vec<u64>, EPSetError> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',').map(number).collect()
        };
        EPSet::new(
            number(parts[0])?,
            list(parts[1])?,
            number(parts[2])?,
            list(parts[3])?,
        )
    }
}

impl fmt::Display for EPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |set: &BTreeSet<u64>| {
            set.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "ep({}; {}; {}; {})",
            self.threshold,
            join(&self.prefix),
            self.period,
            join(&self.residues)
        )
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
