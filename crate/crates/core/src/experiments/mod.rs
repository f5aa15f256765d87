//! Named, seed-reproducible experiments binding the simulators to
//! quantitative expectations, with CSV data and SVG plots per run.
//!
//! An expectation failure is data, not an error: the run completes, the
//! outputs land on disk, and the report carries the failed check.

mod defs;
mod plot;

pub use plot::{emit_plot, format_slope, AxesSpec, Series};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where an expectation's target number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A value the source model states outright.
    Paper,
    /// Derived independently (closed forms, refinement studies, pilots).
    Derived,
    /// An internal consistency property.
    Property,
}

/// Comparison semantics for an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|measured − target| ≤ tolerance`
    Within,
    /// `measured ≥ target`
    AtLeast,
    /// `measured > target`
    GreaterThan,
}

/// One declared expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedValue {
    pub quantity: String,
    pub target: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub check: Check,
}

impl ExpectedValue {
    pub fn within(quantity: &str, target: f64, tolerance: f64, provenance: Provenance) -> Self {
        Self { quantity: quantity.into(), target, tolerance, provenance, check: Check::Within }
    }

    pub fn at_least(quantity: &str, target: f64, provenance: Provenance) -> Self {
        Self { quantity: quantity.into(), target, tolerance: 0.0, provenance, check: Check::AtLeast }
    }

    pub fn greater_than(quantity: &str, target: f64, provenance: Provenance) -> Self {
        Self { quantity: quantity.into(), target, tolerance: 0.0, provenance, check: Check::GreaterThan }
    }

    pub fn evaluate(&self, measured: f64) -> ExpectationOutcome {
        let passed = match self.check {
            Check::Within => (measured - self.target).abs() <= self.tolerance,
            Check::AtLeast => measured >= self.target,
            Check::GreaterThan => measured > self.target,
        };
        ExpectationOutcome {
            quantity: self.quantity.clone(),
            measured,
            target: self.target,
            tolerance: self.tolerance,
            provenance: self.provenance,
            passed,
        }
    }
}

/// A measured expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub quantity: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub passed: bool,
}

impl ExpectationOutcome {
    /// `quantity measured target tolerance pass` line for the report file.
    pub fn report_line(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.quantity,
            self.measured,
            self.target,
            self.tolerance,
            if self.passed { "pass" } else { "fail" }
        )
    }
}

/// An experiment's declared interface: parameters and expectations.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub description: String,
    pub parameters: serde_json::Value,
    pub expected: Vec<ExpectedValue>,
    pub seed_base: u64,
}

/// Result of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub started: String,
    pub finished: String,
    pub outcomes: Vec<ExpectationOutcome>,
    pub outputs: Vec<PathBuf>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn report_text(&self) -> String {
        let mut s = String::new();
        for o in &self.outcomes {
            s.push_str(&o.report_line());
            s.push('\n');
        }
        s
    }
}

/// What an experiment body hands back.
pub struct RunOutput {
    pub outcomes: Vec<ExpectationOutcome>,
    pub outputs: Vec<PathBuf>,
}

pub(crate) struct ExperimentDef {
    pub name: &'static str,
    pub description: &'static str,
    pub seed_base: u64,
    pub default_params: fn() -> serde_json::Value,
    pub expected: fn() -> Vec<ExpectedValue>,
    pub run: fn(&serde_json::Value, u64, &Path) -> Result<RunOutput>,
}

fn find(name: &str) -> Result<&'static ExperimentDef> {
    defs::registry()
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// Registered experiment names and one-line descriptions, alphabetical.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    defs::registry().iter().map(|d| (d.name, d.description)).collect()
}

/// Declared interface of one experiment.
pub fn experiment_spec(name: &str) -> Result<ExperimentSpec> {
    let def = find(name)?;
    Ok(ExperimentSpec {
        name: def.name.into(),
        description: def.description.into(),
        parameters: (def.default_params)(),
        expected: (def.expected)(),
        seed_base: def.seed_base,
    })
}

/// Apply one `dotted.path = value` override to a parameter tree.
///
/// Every path segment must already exist, and the leaf's JSON type must
/// match; unknown keys and type mismatches are configuration errors.
pub fn apply_override(
    params: &mut serde_json::Value,
    path: &str,
    value: serde_json::Value,
) -> Result<()> {
    let mut node = params;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("{} is not a parameter table", segments[..i].join(".")))
        })?;
        let entry = obj
            .get_mut(*seg)
            .ok_or_else(|| Error::Config(format!("unknown parameter {}", segments[..=i].join("."))))?;
        if i + 1 == segments.len() {
            let compatible = match (&*entry, &value) {
                (serde_json::Value::Number(_), serde_json::Value::Number(_)) => true,
                (serde_json::Value::Bool(_), serde_json::Value::Bool(_)) => true,
                (serde_json::Value::String(_), serde_json::Value::String(_)) => true,
                (serde_json::Value::Array(_), serde_json::Value::Array(_)) => true,
                _ => false,
            };
            if !compatible {
                return Err(Error::Config(format!(
                    "parameter {path} expects a value like {entry}, got {value}"
                )));
            }
            *entry = value;
            return Ok(());
        }
        node = entry;
    }
    unreachable!("empty override path");
}

/// Run a registered experiment.
///
/// `overrides` are `dotted.path = value` edits on the default parameter
/// tree; `seed` replaces the registered seed base. CSV and SVG outputs land
/// under `<output_dir>/<name>/` along with a `report` file holding one
/// `quantity measured target tolerance pass` line per expectation. Reruns
/// with the same seed produce byte-identical CSVs.
pub fn run_experiment(
    name: &str,
    overrides: &[(String, serde_json::Value)],
    seed: Option<u64>,
    output_dir: &Path,
) -> Result<ExperimentReport> {
    let def = find(name)?;
    let mut params = (def.default_params)();
    for (path, value) in overrides {
        apply_override(&mut params, path, value.clone())?;
    }
    let seed = seed.unwrap_or(def.seed_base);
    let exp_dir = output_dir.join(name);
    std::fs::create_dir_all(&exp_dir)?;

    let started = chrono::Utc::now().to_rfc3339();
    let out = (def.run)(&params, seed, &exp_dir)?;
    let finished = chrono::Utc::now().to_rfc3339();

    let passed = out.outcomes.iter().all(|o| o.passed);
    let report = ExperimentReport {
        name: name.to_string(),
        started,
        finished,
        outcomes: out.outcomes,
        outputs: out.outputs,
        passed,
    };
    std::fs::write(exp_dir.join("report"), report.report_text())?;
    Ok(report)
}

/// The effective parameter tree after overrides, for echoing back to users.
pub fn effective_params(
    name: &str,
    overrides: &[(String, serde_json::Value)],
) -> Result<serde_json::Value> {
    let def = find(name)?;
    let mut params = (def.default_params)();
    for (path, value) in overrides {
        apply_override(&mut params, path, value.clone())?;
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn registry_is_alphabetical_and_complete() {
        let names: Vec<&str> = list_experiments().iter().map(|(n, _)| *n).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        assert_eq!(names, sorted);
        for required in
            ["immune-exponents", "immune-des", "ant-percapita", "smallworld-densify", "growth-asymptote"]
        {
            assert!(names.contains(&required), "missing {required}");
        }
        // repeated calls identical
        assert_eq!(list_experiments(), list_experiments());
    }

    #[test]
    fn every_expectation_is_tagged() {
        for (name, _) in list_experiments() {
            let spec = experiment_spec(name).unwrap();
            assert!(!spec.expected.is_empty(), "{name} declares no expectations");
            for e in &spec.expected {
                // the provenance enum is total; spot-check serialization tags
                let tag = serde_json::to_string(&e.provenance).unwrap();
                assert!(["\"paper\"", "\"derived\"", "\"property\""].contains(&tag.as_str()));
            }
        }
    }

    #[test]
    fn unknown_experiment_is_a_lookup_error() {
        let err = run_experiment("nonexistent", &[], None, Path::new("/tmp")).unwrap_err();
        assert!(matches!(err, Error::UnknownExperiment(_)));
    }

    #[test]
    fn overrides_validate_paths_and_types() {
        let mut params = json!({"a": 1.0, "nested": {"b": 2.0}, "flag": true});
        apply_override(&mut params, "a", json!(3.5)).unwrap();
        apply_override(&mut params, "nested.b", json!(4.0)).unwrap();
        assert_eq!(params["a"], json!(3.5));
        assert_eq!(params["nested"]["b"], json!(4.0));

        assert!(apply_override(&mut params, "missing", json!(1)).is_err());
        assert!(apply_override(&mut params, "nested.missing", json!(1)).is_err());
        assert!(apply_override(&mut params, "a", json!("bogus")).is_err());
        assert!(apply_override(&mut params, "flag", json!(3)).is_err());
    }

    #[test]
    fn outcome_lines_and_checks() {
        let within = ExpectedValue::within("slope", 0.75, 0.01, Provenance::Paper);
        assert!(within.evaluate(0.755).passed);
        assert!(!within.evaluate(0.77).passed);
        let at_least = ExpectedValue::at_least("r2", 0.95, Provenance::Derived);
        assert!(at_least.evaluate(0.95).passed);
        assert!(!at_least.evaluate(0.94).passed);
        let gt = ExpectedValue::greater_than("gap", 0.0, Provenance::Property);
        assert!(!gt.evaluate(0.0).passed);
        assert!(gt.evaluate(0.1).passed);

        let line = within.evaluate(0.755).report_line();
        assert_eq!(line, "slope 0.755 0.75 0.01 pass");
    }

    #[test]
    fn report_round_trips_through_serde() {
        let report = ExperimentReport {
            name: "demo".into(),
            started: "2026-01-01T00:00:00Z".into(),
            finished: "2026-01-01T00:00:01Z".into(),
            outcomes: vec![
                ExpectedValue::within("x", 1.0, 0.1, Provenance::Derived).evaluate(1.05)
            ],
            outputs: vec![PathBuf::from("demo/data.csv")],
            passed: true,
        };
        let json = serde_json::to_string(&report).unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }
}
