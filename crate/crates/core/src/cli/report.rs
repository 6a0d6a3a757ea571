use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ExperimentConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Verdict {
        Verdict {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// What every subcommand writes. Field order and map order are fixed, so equal seeds give
/// byte-identical reports.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub claim: String,
    pub config: ExperimentConfig,
    pub records: Vec<serde_json::Value>,
    pub verdicts: Vec<Verdict>,
    pub fitted: BTreeMap<String, f64>,
    pub error: Option<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(experiment: &str, claim: &str, config: &ExperimentConfig) -> Report {
        Report {
            experiment: experiment.to_string(),
            claim: claim.to_string(),
            config: config.clone(),
            records: Vec::new(),
            verdicts: Vec::new(),
            fitted: BTreeMap::new(),
            error: None,
            pass: false,
        }
    }

    pub fn record<T: Serialize>(&mut self, r: &T) {
        // every record type serializes to a plain object; a failure here is a bug in the type
        self.records
            .push(serde_json::to_value(r).expect("record serializes"));
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict::new(name, pass, detail));
    }

    /// Non-finite values have no JSON form and are stored as +-1e308.
    pub fn fit(&mut self, name: &str, v: f64) {
        let v = if v.is_nan() {
            0.0
        } else {
            v.clamp(-1e308, 1e308)
        };
        self.fitted.insert(name.to_string(), v);
    }

    /// Sets `pass` from the verdicts; a report with an error or no verdicts fails.
    pub fn finish(mut self) -> Report {
        self.pass = self.error.is_none()
            && !self.verdicts.is_empty()
            && self.verdicts.iter().all(|v| v.pass);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
