//! Instance files and persisted reports.
//!
//! Instances come in two forms:
//!
//! ```text
//! 3
//! 0,1,2
//! 1,0,3
//! 2,3,0
//! ```
//!
//! or `{"n": 3, "edges": [{"i": 1, "j": 2, "w": "1/1"}, ...]}`. Entries are
//! `p/q` or integers on input and always `p/q` on output.

use serde::{Deserialize, Serialize};

use crate::certificate::{verify_chain, ChainCertificate};
use crate::checkers::{replay, CheckBudget, Verdict};
use crate::clusterers::FunctionSpec;
use crate::counterexamples::{verify_violation_report, ViolationReport};
use crate::distance::{validate_distance, DistanceFunction};
use crate::error::{Error, Result};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceForm {
    Dense,
    EdgeList,
}

pub fn parse_instance(text: &str) -> Result<DistanceFunction> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()));
    }
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty instance file".into()))?;
    let n: usize = header.parse().map_err(|_| {
        Error::Parse(format!(
            "first line must be the point count, got {header:?}"
        ))
    })?;
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(str::parse::<Weight>)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    validate_distance(&rows, n)
}

pub fn serialize_instance(d: &DistanceFunction, form: InstanceForm) -> String {
    match form {
        InstanceForm::Dense => {
            let mut out = format!("{}\n", d.n());
            for row in d.to_matrix() {
                let cells: Vec<String> = row.iter().map(Weight::to_wire).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        InstanceForm::EdgeList => {
            let mut out = serde_json::to_string(d).expect("instance serializes");
            out.push('\n');
            out
        }
    }
}

pub fn read_instance(path: &std::path::Path) -> Result<DistanceFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub budget: Option<CheckBudget>,
    pub verdicts: Vec<Verdict>,
    /// Checks that raised an error instead of producing a verdict.
    #[serde(default)]
    pub errors: Vec<String>,
    pub table: Option<String>,
    /// Table cells differing from the expected pattern, as `function/property`.
    #[serde(default)]
    pub drift: Vec<String>,
    pub chain: Option<ChainCertificate>,
    pub violation: Option<ViolationReport>,
}

impl ReportFile {
    pub fn new(command: impl Into<String>) -> Self {
        ReportFile {
            format_version: REPORT_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            seed: None,
            budget: None,
            verdicts: Vec::new(),
            errors: Vec::new(),
            table: None,
            drift: Vec::new(),
            chain: None,
            violation: None,
        }
    }

    pub fn any_falsified(&self) -> bool {
        self.verdicts.iter().any(Verdict::is_falsified)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: ReportFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if report.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported report version {}",
                report.format_version
            )));
        }
        Ok(report)
    }
}

/// Re-executes everything a report records. Returns one message per failure.
pub fn replay_report(report: &ReportFile) -> std::result::Result<(), Vec<String>> {
    let mut failures = Vec::new();
    for v in &report.verdicts {
        let outcome = v
            .function
            .parse::<FunctionSpec>()
            .and_then(|spec| spec.handle())
            .map_err(|e| e.to_string())
            .and_then(|f| replay(v, f.as_ref()));
        if let Err(e) = outcome {
            failures.push(format!("{} / {}: {e}", v.function, v.property));
        }
    }
    if let Some(chain) = &report.chain {
        let check = verify_chain(chain);
        if !check.valid {
            failures.push(format!(
                "chain step {}: {}",
                check.failing_step.unwrap_or(0),
                check.reason.unwrap_or_default()
            ));
        }
    }
    if let Some(violation) = &report.violation {
        if let Err(e) = verify_violation_report(violation) {
            failures.push(format!("violation report: {e}"));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "3\n0,1,2\n1,0,3\n2,3,0\n";

    #[test]
    fn dense_round_trip() {
        let d = parse_instance(TRIANGLE).unwrap();
        assert_eq!(d.get(2, 3), Weight::from(3));
        let text = serialize_instance(&d, InstanceForm::Dense);
        assert_eq!(text, "3\n0/1,1/1,2/1\n1/1,0/1,3/1\n2/1,3/1,0/1\n");
        assert_eq!(parse_instance(&text).unwrap(), d);
    }

    #[test]
    fn edge_list_round_trip() {
        let d = parse_instance(r#"{"n": 3, "edges": [{"i": 1, "j": 2, "w": 1}, {"i": 1, "j": 3, "w": "4/2"}, {"i": 2, "j": 3, "w": "3"}]}"#)
            .unwrap();
        assert_eq!(d, parse_instance(TRIANGLE).unwrap());
        let text = serialize_instance(&d, InstanceForm::EdgeList);
        assert!(text.contains(r#""w":"2/1""#));
        assert_eq!(parse_instance(&text).unwrap(), d);
    }

    #[test]
    fn malformed_instances() {
        for text in [
            "",
            "x\n",
            "3\n0,1\n1,0\n",
            "2\n0,1.5\n1.5,0\n",
            "2\n0,1\n2,0\n",
            "2\n0,0\n0,0\n",
            r#"{"n": 3, "edges": []}"#,
        ] {
            assert!(parse_instance(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn report_round_trip() {
        let mut r = ReportFile::new("check");
        r.seed = Some(4);
        let back = ReportFile::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(replay_report(&back), Ok(()));
        let mut old = serde_json::to_value(&r).unwrap();
        old["format_version"] = 99.into();
        assert!(ReportFile::from_json(&old.to_string()).is_err());
    }
}
