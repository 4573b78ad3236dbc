//! JSON filter files.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use protodesign::designer::{Design, DesignStatus};
use protodesign::interference::BasisFamily;
use protodesign::PrototypeFilter;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::failure::{CliResult, Failure};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
}

/// Solver diagnostics stored with a designed filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredReport {
    pub status: DesignStatus,
    pub objective: f64,
    pub kkt_residual: f64,
    pub max_constraint_violation: f64,
    pub line_search_value: f64,
    pub iterations: usize,
    pub raw_norm: f64,
    pub max_abs_epsilon: f64,
    pub unimodal_sweep: bool,
    pub line_search_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterFile {
    pub schema_version: u32,
    pub label: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L_p")]
    pub len: usize,
    /// Basis the coefficients refer to; absent for sample-only filters.
    #[serde(default)]
    pub family: Option<BasisFamily>,
    #[serde(default)]
    pub basis_params: Option<BasisParams>,
    #[serde(default, serialize_with = "exact_floats")]
    pub coefficients: Vec<f64>,
    #[serde(serialize_with = "exact_floats")]
    pub samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_report: Option<StoredReport>,
}

/// Writes each value with 17 significant digits so reading it back is exact.
fn exact_floats<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        if !v.is_finite() {
            return Err(serde::ser::Error::custom(format!("non-finite value {v}")));
        }
        let raw = RawValue::from_string(format!("{v:.16e}")).map_err(serde::ser::Error::custom)?;
        seq.serialize_element(&raw)?;
    }
    seq.end()
}

impl FilterFile {
    pub fn from_filter(filter: &PrototypeFilter) -> Self {
        FilterFile {
            schema_version: SCHEMA_VERSION,
            label: filter.label().to_string(),
            k: filter.k(),
            m: filter.m(),
            len: filter.len(),
            family: None,
            basis_params: None,
            coefficients: Vec::new(),
            samples: filter.samples().to_vec(),
            zeta_star: None,
            solve_report: None,
        }
    }

    pub fn from_design(design: &Design, n: usize, omega_s: Option<f64>) -> Self {
        let r = &design.report;
        FilterFile {
            family: Some(design.coefficients.family),
            basis_params: Some(BasisParams { n, omega_s }),
            coefficients: design.coefficients.c.clone(),
            zeta_star: Some(design.coefficients.zeta),
            solve_report: Some(StoredReport {
                status: r.status,
                objective: r.objective,
                kkt_residual: r.kkt_residual,
                max_constraint_violation: r.max_constraint_violation,
                line_search_value: r.line_search_value,
                iterations: r.iterations,
                raw_norm: design.raw_norm,
                max_abs_epsilon: design.max_abs_epsilon,
                unimodal_sweep: design.line_search.unimodal,
                line_search_evaluations: design.line_search.evaluations,
            }),
            ..FilterFile::from_filter(&design.filter)
        }
    }

    /// Checks the header against the samples and builds the filter.
    pub fn to_filter(&self) -> anyhow::Result<PrototypeFilter> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(anyhow!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.samples.len() != self.len {
            return Err(anyhow!("L_p = {} but {} samples given", self.len, self.samples.len()));
        }
        Ok(PrototypeFilter::new(self.samples.clone(), self.k, self.m, self.label.clone())?)
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(Failure::input)?;
        Self::parse(&text).with_context(|| format!("invalid filter file {}", path.display())).map_err(Failure::input)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let json = self.to_json().map_err(Failure::input)?;
        fs::write(path, json).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_round_trip_bitwise() {
        let samples: Vec<f64> = (0..129).map(|i| ((i as f64) * 0.731).sin() / 7.0 + 1e-300 * i as f64).collect();
        let f = PrototypeFilter::new(samples.clone(), 4, 32, "x").unwrap();
        let back = FilterFile::parse(&FilterFile::from_filter(&f).to_json().unwrap()).unwrap();
        for (a, b) in samples.iter().zip(&back.samples) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_filter().unwrap().samples(), f.samples());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let f = PrototypeFilter::centered_impulse(4, 32).unwrap();
        let mut file = FilterFile::from_filter(&f);
        file.len = 128;
        assert!(file.to_filter().is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = FilterFile::parse("{\n  \"schema_version\": 1,\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
