use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of an equivalence test.
///
/// `Distinguished` is always certified: some necessary condition failed.
/// `ConsistentAtHorizon` only says that no checked identity was violated up to
/// the configured word length; it is never a proof of equivalence. `Equivalent`
/// is reserved for runs whose horizon reached the completeness ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    ConsistentAtHorizon,
    Distinguished,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Equivalent => "equivalent",
            Verdict::ConsistentAtHorizon => "consistent-at-horizon",
            Verdict::Distinguished => "distinguished",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Process exit code used by the command-line front-end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Equivalent | Verdict::ConsistentAtHorizon => 0,
            Verdict::Distinguished => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn is_distinguished(self) -> bool {
        self == Verdict::Distinguished
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
