//! Structured outcomes of the 2- and 3-party equivalence batteries.

use serde::{Deserialize, Serialize};

use crate::specht::{IdentityReport, HORIZON_NOTE};
use crate::verdict::Verdict;

/// Frobenius norms of matching tensors on the two sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(1, lhs)`.
    pub residual: f64,
    pub passed: bool,
}

pub fn norm_check(label: &str, lhs: f64, rhs: f64, tol: f64) -> NormCheck {
    let residual = (lhs - rhs).abs() / lhs.abs().max(1.0);
    NormCheck { label: label.to_string(), lhs, rhs, residual, passed: residual <= tol }
}

/// "`‖T_x‖` agrees or `‖T_y‖` agrees".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCondition {
    pub either: String,
    pub or: String,
    pub satisfied: bool,
}

/// A scalar LU invariant compared across the two sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Both magnitudes exceed the tolerance, so the comparison means something.
    pub comparable: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpgradeOutcome {
    /// The quasi-LU battery implies LU equivalence for these inputs.
    Granted,
    /// An LU invariant differs: the states are not LU equivalent.
    Denied,
    /// The qubit hypotheses do not hold, so no conclusion about LU.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpgradeReport {
    pub outcome: UpgradeOutcome,
    pub reason: String,
    pub determinants: Vec<ScalarCheck>,
    pub signs: Vec<ScalarCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramCheck {
    pub label: String,
    pub size: usize,
    pub rank: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `sigma_max / sigma_min`, infinite when singular.
    pub condition_number: f64,
    pub invertible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramCondition {
    pub checks: Vec<GramCheck>,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub check: String,
    pub verdict: Verdict,
    pub reason: String,
    pub dims: Vec<usize>,
    pub horizon: usize,
    pub tol: f64,
    pub norms: Vec<NormCheck>,
    pub norm_conditions: Vec<NormCondition>,
    /// Labels of tensors that vanish on either side.
    pub degenerate: Vec<String>,
    pub identities: Vec<IdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gram: Option<GramCondition>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partial_trace: Option<Box<EquivalenceReport>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upgrade: Option<UpgradeReport>,
    pub notes: Vec<String>,
    pub horizon_note: String,
}

impl EquivalenceReport {
    pub(crate) fn new(check: &str, dims: Vec<usize>, horizon: usize, tol: f64) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::Inconclusive,
            reason: String::new(),
            dims,
            horizon,
            tol,
            norms: Vec::new(),
            norm_conditions: Vec::new(),
            degenerate: Vec::new(),
            identities: Vec::new(),
            gram: None,
            partial_trace: None,
            upgrade: None,
            notes: Vec::new(),
            horizon_note: HORIZON_NOTE.to_string(),
        }
    }

    pub fn failed_norms(&self) -> impl Iterator<Item = &NormCheck> {
        self.norms.iter().filter(|n| !n.passed)
    }

    /// Shortest violated word across the identity checks of this report.
    pub fn first_violation_len(&self) -> Option<usize> {
        self.identities.iter().filter_map(|r| r.first_violation.as_ref().map(|v| v.len())).min()
    }

    /// True when some check, here or in the partial-trace sub-report, failed.
    pub fn any_failure(&self) -> bool {
        self.failed_norms().next().is_some()
            || self.identities.iter().any(|r| r.is_distinguished())
            || self.partial_trace.as_ref().is_some_and(|p| p.any_failure())
            || self.upgrade.as_ref().is_some_and(|u| u.outcome == UpgradeOutcome::Denied)
    }

    pub fn lu_granted(&self) -> bool {
        self.upgrade.as_ref().is_some_and(|u| u.outcome == UpgradeOutcome::Granted)
    }
}

pub(crate) fn describe_norm_failure(n: &NormCheck) -> String {
    format!("norm of {} differs ({:.12e} vs {:.12e})", n.label, n.lhs, n.rhs)
}

pub(crate) fn describe_identity_failure(r: &IdentityReport) -> String {
    match &r.first_violation {
        Some(v) => format!(
            "{} trace identity fails at word [{}] of length {} ({:.12e} vs {:.12e})",
            r.criterion,
            v.word_text,
            v.len(),
            v.lhs,
            v.rhs
        ),
        None => format!("{} trace identities hold", r.criterion),
    }
}

/// Relative comparison used for scalar invariants.
pub(crate) fn scalar_check(label: &str, lhs: f64, rhs: f64, tol: f64) -> ScalarCheck {
    let comparable = lhs.abs() > tol && rhs.abs() > tol;
    let passed = (lhs - rhs).abs() <= tol * lhs.abs().max(1.0);
    ScalarCheck { label: label.to_string(), lhs, rhs, comparable, passed }
}
