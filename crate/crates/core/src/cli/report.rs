//! Command reports. A report carries every residual, not only verdicts,
//! and contains nothing run-dependent, so equal inputs give byte-identical
//! output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::check::CheckResult;
use crate::error::Error;
use crate::numerics::TolerancePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: Status,
    /// `None` for infinite residuals, which JSON cannot carry.
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEcho {
    pub rank_tol_factor: Option<f64>,
    pub psd_tol: f64,
    pub verify_tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    pub status: Status,
    pub checks: Vec<CheckEntry>,
    pub values: BTreeMap<String, Value>,
    pub policy: PolicyEcho,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Report {
    pub fn new(command: Vec<String>, pol: &TolerancePolicy) -> Self {
        Self {
            command,
            status: Status::Pass,
            checks: Vec::new(),
            values: BTreeMap::new(),
            policy: PolicyEcho {
                rank_tol_factor: pol.rank_tol_factor,
                psd_tol: pol.psd_tol,
                verify_tol: pol.verify_tol,
                seed: pol.seed,
            },
            error: None,
        }
    }

    pub fn check(&mut self, c: &CheckResult) {
        self.checks.push(CheckEntry {
            name: c.name.clone(),
            status: if c.passed { Status::Pass } else { Status::Fail },
            residual: finite(c.residual),
            witness: c.witness.clone(),
        });
    }

    pub fn checks<'a>(&mut self, cs: impl IntoIterator<Item = &'a CheckResult>) {
        for c in cs {
            self.check(c);
        }
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    pub fn real(&mut self, key: &str, x: f64) {
        self.values
            .insert(key.to_string(), finite(x).map(Value::from).unwrap_or(Value::Null));
    }

    /// A mathematical failure reported by an operation, as a failed check.
    pub fn failure(&mut self, name: &str, e: &Error) {
        self.checks.push(CheckEntry {
            name: name.to_string(),
            status: Status::Fail,
            residual: None,
            witness: Some(e.to_string()),
        });
    }

    pub fn fail_with_error(&mut self, e: &Error) {
        self.status = Status::Error;
        self.error = Some(e.to_string());
    }

    /// Sets the overall status from the checks unless an error was recorded.
    pub fn finish(mut self) -> Self {
        if self.status != Status::Error {
            self.status = if self.checks.iter().all(|c| c.status == Status::Pass) {
                Status::Pass
            } else {
                Status::Fail
            };
        }
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command.join(" "));
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            let residual = c
                .residual
                .map(|r| format!("{r:.3e}"))
                .unwrap_or_else(|| "inf".into());
            out.push_str(&format!("{tag:5} {} (residual {residual})", c.name));
            if let Some(w) = &c.witness {
                if c.status != Status::Pass {
                    out.push_str(&format!(": {w}"));
                }
            }
            out.push('\n');
        }
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        let p = &self.policy;
        out.push_str(&format!(
            "policy: rank={} psd={:e} verify={:e} seed={}\n",
            p.rank_tol_factor.map(|f| format!("{f:e}")).unwrap_or_else(|| "auto".into()),
            p.psd_tol,
            p.verify_tol,
            p.seed
        ));
        out.push_str(&format!(
            "status: {}\n",
            match self.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Error => "error",
            }
        ));
        out
    }
}
