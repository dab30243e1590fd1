//! Strong three-valued logic values.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A truth value that may be undetermined.
///
/// `Unknown` marks statements on which the ultrafilters of a symbolic class
/// genuinely disagree, or for which the certificate at hand is insufficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kleene {
    False,
    True,
    Unknown,
}

impl From<bool> for Kleene {
    fn from(b: bool) -> Self {
        if b {
            Kleene::True
        } else {
            Kleene::False
        }
    }
}

impl Kleene {
    /// Resolves to a bool, reading `Unknown` as the supplied default.
    pub fn to_bool(self, unknown: bool) -> bool {
        match self {
            Kleene::True => true,
            Kleene::False => false,
            Kleene::Unknown => unknown,
        }
    }

    pub fn is_true(self) -> bool {
        self == Kleene::True
    }

    pub fn is_false(self) -> bool {
        self == Kleene::False
    }
}

impl std::ops::Not for Kleene {
    type Output = Self;

    fn not(self) -> Self {
        match self {
            Kleene::True => Kleene::False,
            Kleene::False => Kleene::True,
            Kleene::Unknown => Kleene::Unknown,
        }
    }
}

impl std::ops::BitAnd for Kleene {
    type Output = Self;

    fn bitand(self, other: Self) -> Self {
        if self == Kleene::False || other == Kleene::False {
            return Kleene::False;
        }
        if self == Kleene::Unknown || other == Kleene::Unknown {
            return Kleene::Unknown;
        }
        Kleene::True
    }
}

impl std::ops::BitOr for Kleene {
    type Output = Self;

    fn bitor(self, other: Self) -> Self {
        if self == Kleene::True || other == Kleene::True {
            return Kleene::True;
        }
        if self == Kleene::Unknown || other == Kleene::Unknown {
            return Kleene::Unknown;
        }
        Kleene::False
    }
}

impl fmt::Display for Kleene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kleene::True => write!(f, "true"),
            Kleene::False => write!(f, "false"),
            Kleene::Unknown => write!(f, "unknown"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Kleene::*;

    const ALL: [Kleene; 3] = [False, True, Unknown];

    #[test]
    fn de_morgan_holds() {
        for a in ALL {
            for b in ALL {
                assert_eq!(!(a & b), !a | !b);
                assert_eq!(!(a | b), !a & !b);
            }
        }
    }

    #[test]
    fn unknown_absorbs_only_where_undecided() {
        assert_eq!(Unknown & False, False);
        assert_eq!(Unknown | True, True);
        assert_eq!(Unknown & True, Unknown);
        assert_eq!(Unknown | False, Unknown);
        assert_eq!(!Unknown, Unknown);
    }
}
