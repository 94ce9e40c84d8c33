//! The verification report: one record per check, stable order, stable
//! float formatting.

use std::fmt::Write as _;

use crate::dual::sig12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip(String),
}

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    /// Witness or margin; empty when there is nothing to say.
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub meta: Vec<(String, String)>,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn meta_f64(&mut self, key: &str, value: f64) {
        self.meta.push((key.to_string(), sig12(value)));
    }

    pub fn record(&mut self, name: &str, status: CheckStatus, detail: impl Into<String>) {
        self.records.push(CheckRecord {
            name: name.to_string(),
            status,
            detail: detail.into(),
        });
    }

    pub fn pass(&mut self, name: &str, detail: impl Into<String>) {
        self.record(name, CheckStatus::Pass, detail);
    }

    pub fn fail(&mut self, name: &str, detail: impl Into<String>) {
        self.record(name, CheckStatus::Fail, detail);
    }

    pub fn skip(&mut self, name: &str, reason: &str) {
        self.record(name, CheckStatus::Skip(reason.to_string()), "");
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.record(
            name,
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        );
    }

    /// True iff at least one non-skipped check failed.
    pub fn failed(&self) -> bool {
        self.records
            .iter()
            .any(|r| matches!(r.status, CheckStatus::Fail))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# anisotropic voronoi verification report\n");
        for (k, v) in &self.meta {
            writeln!(out, "meta {} = {}", k, v).unwrap();
        }
        for r in &self.records {
            let status = match &r.status {
                CheckStatus::Pass => "pass".to_string(),
                CheckStatus::Fail => "fail".to_string(),
                CheckStatus::Skip(reason) => format!("skip({})", reason),
            };
            if r.detail.is_empty() {
                writeln!(out, "check {}: {}", r.name, status).unwrap();
            } else {
                writeln!(out, "check {}: {} | {}", r.name, status, r.detail).unwrap();
            }
        }
        let verdict = if self.failed() { "FAIL" } else { "PASS" };
        writeln!(out, "verdict {}", verdict).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_text_is_stable() {
        let mut r = VerificationReport::default();
        r.meta("seed", "7");
        r.meta_f64("gamma", 2.0);
        r.pass("orphans", "0 orphan components");
        r.fail("ece", "face 3 contains site 9");
        r.skip("boundary-hull", "colinear sites");
        let text = r.to_text();
        assert_eq!(
            text,
            "# anisotropic voronoi verification report\n\
             meta seed = 7\n\
             meta gamma = 2\n\
             check orphans: pass | 0 orphan components\n\
             check ece: fail | face 3 contains site 9\n\
             check boundary-hull: skip(colinear sites)\n\
             verdict FAIL\n"
        );
        assert!(r.failed());
    }

    #[test]
    fn skips_do_not_fail() {
        let mut r = VerificationReport::default();
        r.pass("a", "");
        r.skip("b", "why");
        assert!(!r.failed());
        assert!(r.to_text().ends_with("verdict PASS\n"));
    }
}
