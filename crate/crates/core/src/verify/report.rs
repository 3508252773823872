use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;

/// How the pass flag is derived from the records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TolerancePolicy {
    /// Every record's `lhs` (an absolute difference) is below `tol`.
    MaxAbsBelow { tol: f64 },
    /// Per series, the maximum ratio at each level is finite and the
    /// relative change between consecutive levels stays below `max_drift`.
    StableDrift { max_drift: f64 },
    /// Measurements only; always passes.
    ReportOnly,
}

impl fmt::Display for TolerancePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TolerancePolicy::MaxAbsBelow { tol } => write!(f, "max_abs<{tol}"),
            TolerancePolicy::StableDrift { max_drift } => write!(f, "drift<{max_drift}"),
            TolerancePolicy::ReportOnly => f.write_str("report_only"),
        }
    }
}

/// Seeds `base, base+1, ..., base+count-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub base: u64,
    pub count: usize,
}

impl SeedSet {
    pub const DEFAULT_BASE: u64 = 0x5EED;

    pub fn new(base: u64, count: usize) -> Self {
        Self { base, count }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.count as u64).map(move |i| self.base.wrapping_add(i))
    }
}

impl Default for SeedSet {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BASE, 50)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub p: Option<f64>,
    pub weights: Option<String>,
    /// The swept level: `N` for kernel bounds, `N0` for the integral
    /// lemmas, the support level `N'` for atom suites.
    pub levels: Vec<usize>,
    pub seeds: Option<SeedSet>,
    pub n_max: Vec<usize>,
    /// Diagnostics that do not enter the verdict.
    pub notes: BTreeMap<String, String>,
}

/// One measured case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: String,
    /// The measured quantity this case contributes to.
    pub series: String,
    pub level: usize,
    #[serde(with = "float")]
    pub lhs: f64,
    #[serde(with = "float")]
    pub rhs: f64,
    #[serde(with = "float")]
    pub ratio: f64,
}

impl CaseRecord {
    pub fn new(
        case_id: impl Into<String>,
        series: impl Into<String>,
        level: usize,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        Self {
            case_id: case_id.into(),
            series: series.into(),
            level,
            lhs,
            rhs,
            ratio: lhs / rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(with = "float")]
    pub max_ratio: f64,
    /// Largest ratio at the highest level of the sweep.
    #[serde(with = "float")]
    pub estimated_constant: f64,
    /// Largest relative change between consecutive levels, over all series.
    #[serde(with = "float")]
    pub drift: f64,
    pub pass: bool,
    pub tolerance: TolerancePolicy,
}

impl Summary {
    /// Derives the summary from the records alone.
    pub fn evaluate(records: &[CaseRecord], tolerance: TolerancePolicy) -> Self {
        let max_ratio = records
            .iter()
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, nan_max);
        let top = records.iter().map(|r| r.level).max();
        let estimated_constant = records
            .iter()
            .filter(|r| Some(r.level) == top)
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, nan_max);
        let drift = drift(records);
        let pass = match tolerance {
            TolerancePolicy::MaxAbsBelow { tol } => records.iter().all(|r| r.lhs.abs() < tol),
            TolerancePolicy::StableDrift { max_drift } => {
                records.iter().all(|r| r.ratio.is_finite()) && drift < max_drift
            }
            TolerancePolicy::ReportOnly => true,
        };
        Self {
            max_ratio,
            estimated_constant,
            drift,
            pass,
            tolerance,
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Per series: maximum ratio at each level, then the largest
/// `|r_{i+1} - r_i| / r_i` over consecutive levels. NaN if some ratio is
/// not finite.
pub fn drift(records: &[CaseRecord]) -> f64 {
    let mut series: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in records {
        let slot = series
            .entry(r.series.as_str())
            .or_default()
            .entry(r.level)
            .or_insert(f64::NEG_INFINITY);
        *slot = nan_max(*slot, r.ratio);
    }
    let mut worst = 0.0f64;
    for levels in series.values() {
        let maxima: Vec<f64> = levels.values().copied().collect();
        if maxima.iter().any(|v| !v.is_finite()) {
            return f64::NAN;
        }
        for pair in maxima.windows(2) {
            let d = if pair[0] == pair[1] {
                0.0
            } else {
                (pair[1] - pair[0]).abs() / pair[0].abs()
            };
            worst = nan_max(worst, d);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub spec: String,
    pub parameters: Parameters,
    pub records: Vec<CaseRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(
        suite: impl Into<String>,
        spec: impl Into<String>,
        parameters: Parameters,
        records: Vec<CaseRecord>,
        tolerance: TolerancePolicy,
    ) -> Self {
        let summary = Summary::evaluate(&records, tolerance);
        Self {
            suite: suite.into(),
            spec: spec.into(),
            parameters,
            records,
            summary,
        }
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    /// Recomputes the summary from the records.
    pub fn is_consistent(&self) -> bool {
        let again = Summary::evaluate(&self.records, self.summary.tolerance);
        again.pass == self.summary.pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "suite",
    "spec",
    "p",
    "weights",
    "tolerance",
    "case_id",
    "series",
    "level",
    "lhs",
    "rhs",
    "ratio",
];

/// Writes the report. The CSV form has one header row and one row per
/// record; report-level fields are repeated on every row.
pub fn emit_report<W: Write>(
    report: &VerificationReport,
    format: ReportFormat,
    sink: W,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink).map_err(csv::Error::from)?;
            Ok(())
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(CSV_HEADER)?;
            let p = report
                .parameters
                .p
                .map(|p| p.to_string())
                .unwrap_or_default();
            let weights = report.parameters.weights.clone().unwrap_or_default();
            let tolerance = report.summary.tolerance.to_string();
            for r in &report.records {
                w.write_record([
                    report.suite.as_str(),
                    report.spec.as_str(),
                    &p,
                    &weights,
                    &tolerance,
                    &r.case_id,
                    &r.series,
                    &r.level.to_string(),
                    &r.lhs.to_string(),
                    &r.rhs.to_string(),
                    &r.ratio.to_string(),
                ])?;
            }
            w.flush().map_err(csv::Error::from)?;
            Ok(())
        }
    }
}

/// Non-finite floats are written as the strings `inf`, `-inf` and `NaN` so
/// that JSON reports round-trip.
mod float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
