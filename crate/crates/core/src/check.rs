use serde::{Deserialize, Serialize};

/// Outcome of one named check, with the residual that decided it and a
/// human-readable witness when it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn pass(name: &str, residual: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            residual,
            witness: None,
        }
    }

    pub fn fail(name: &str, residual: f64, witness: String) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            residual,
            witness: Some(witness),
        }
    }

    /// Pass iff `residual <= tol`; the witness is only kept on failure.
    pub fn within(name: &str, residual: f64, tol: f64, witness: Option<String>) -> Self {
        if residual <= tol {
            Self::pass(name, residual)
        } else {
            Self::fail(name, residual, witness.unwrap_or_default())
        }
    }
}

pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn find<'a>(checks: &'a [CheckResult], name: &str) -> Option<&'a CheckResult> {
    checks.iter().find(|c| c.name == name)
}
