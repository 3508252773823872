//! Numerical verification harness.
//!
//! Every suite returns a [`VerificationReport`] whose pass flag is derived
//! from its records and its declared [`TolerancePolicy`] alone. The
//! inequalities being checked assert the existence of constants, not their
//! values, so most verdicts are stability judgments: the measured constant
//! must settle as the discretization is refined.

mod lemmas;
mod report;
mod theorems;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use lemmas::{
    verify_integral_bounds, verify_kernel_bounds, verify_lemma2, verify_lemma2_with, verify_lemma5,
    verify_lemma5aaa, verify_lemma5aaa_decreasing, IntegralKernel, DOMINATED_FLOOR,
    DOMINATION_FLOOR, INTEGRAL_DEPTH, KERNEL_DRIFT, LEMMA2_TOLERANCE,
};
pub use report::{
    drift, emit_report, CaseRecord, Parameters, ReportFormat, SeedSet, Summary, TolerancePolicy,
    VerificationReport, CSV_HEADER,
};
pub use theorems::{explore_unboundedness, verify_theorem, AtomSweep, Theorem, THEOREM_DRIFT};

use crate::error::{out_of_range, Error, Result};
use crate::group::GroupSpec;
use crate::kernels::ClosedForm;
use crate::summability::WeightKind;

/// Every suite the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma2,
    /// The closed form with a shifted index; must fail.
    Lemma2Corrupted,
    KernelBounds,
    Lemma5,
    Lemma5aaa,
    /// Tail-kernel sweep with decreasing weights; report-only.
    Lemma5aaaDecreasing,
    Theorem1a,
    Theorem1b,
    Theorem2,
    /// Growth curve of the unweighted maximal operator; report-only.
    Explore,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Lemma2,
        Suite::Lemma2Corrupted,
        Suite::KernelBounds,
        Suite::Lemma5,
        Suite::Lemma5aaa,
        Suite::Lemma5aaaDecreasing,
        Suite::Theorem1a,
        Suite::Theorem1b,
        Suite::Theorem2,
        Suite::Explore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma2 => "lemma2",
            Suite::Lemma2Corrupted => "lemma2-corrupted",
            Suite::KernelBounds => "kernel-bounds",
            Suite::Lemma5 => "lemma5",
            Suite::Lemma5aaa => "lemma5aaa",
            Suite::Lemma5aaaDecreasing => "lemma5aaa-decreasing",
            Suite::Theorem1a => "theorem1a",
            Suite::Theorem1b => "theorem1b",
            Suite::Theorem2 => "theorem2",
            Suite::Explore => "explore",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Lemma2 => "closed form of K_{M_j} against the summed kernel",
            Suite::Lemma2Corrupted => "negative control: closed form with a shifted index",
            Suite::KernelBounds => "domination constants of K_n and F_n, L1 norm of K_n",
            Suite::Lemma5 => "integral of |F_n| over the support interval, off the interval",
            Suite::Lemma5aaa => "the same integral for the tail kernel",
            Suite::Lemma5aaaDecreasing => "tail-kernel sweep with decreasing weights (report-only)",
            Suite::Theorem1a => "strong summability sum over atoms, 0 < p < 1/2",
            Suite::Theorem1b => "normalized logarithmic strong means over atoms, p = 1/2",
            Suite::Theorem2 => "weighted maximal operator over atoms, 0 < p <= 1/2",
            Suite::Explore => "weak-L_p growth of the unweighted maximal operator (report-only)",
        }
    }

    /// Suites whose verdict is always pass.
    pub fn is_report_only(self) -> bool {
        matches!(self, Suite::Lemma5aaaDecreasing | Suite::Explore)
    }

    /// Suites that run once per exponent `p`.
    pub fn uses_p(self) -> bool {
        matches!(
            self,
            Suite::Theorem1a | Suite::Theorem1b | Suite::Theorem2 | Suite::Explore
        )
    }

    /// Checks that `p` is admissible for this suite.
    pub fn check_p(self, p: f64) -> Result<()> {
        match self {
            Suite::Theorem1a => Theorem::T1a.check_p(p),
            Suite::Theorem1b => Theorem::T1b.check_p(p),
            Suite::Theorem2 => Theorem::T2.check_p(p),
            Suite::Explore if !(p > 0.0 && p < 0.5) => {
                Err(out_of_range("p", p, "in (0, 1/2) for explore"))
            }
            _ => Ok(()),
        }
    }

    /// Exponents used when none are given.
    pub fn default_p(self) -> Vec<f64> {
        match self {
            Suite::Theorem1a => vec![0.25, 1.0 / 3.0],
            Suite::Theorem1b => vec![0.5],
            Suite::Theorem2 => vec![0.25, 0.5],
            Suite::Explore => vec![1.0 / 3.0],
            _ => vec![],
        }
    }

    /// The swept levels used when none are given, for a group of level `n`:
    /// `N-1, N` for the kernel bounds, `N0` with `N0 + 3 <= N` for the
    /// integral lemmas, `N'` in `2..=4` below `N` for atom suites.
    pub fn default_levels(self, n: usize) -> Vec<usize> {
        match self {
            Suite::Lemma2 | Suite::Lemma2Corrupted => vec![n],
            Suite::KernelBounds => (n.saturating_sub(1).max(1)..=n).collect(),
            Suite::Lemma5 | Suite::Lemma5aaa | Suite::Lemma5aaaDecreasing => {
                let top = n.saturating_sub(INTEGRAL_DEPTH);
                (top.saturating_sub(2).max(1)..=top).collect()
            }
            Suite::Theorem1a | Suite::Theorem1b | Suite::Theorem2 => {
                (2..=4).filter(|&l| l < n).collect()
            }
            Suite::Explore => (1..n).collect(),
        }
    }

    fn default_drift(self) -> f64 {
        match self {
            Suite::Theorem1a | Suite::Theorem1b | Suite::Theorem2 => THEOREM_DRIFT,
            _ => KERNEL_DRIFT,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Everything needed to run any suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Radices and level `N`.
    pub spec: Arc<GroupSpec>,
    pub weights: WeightKind,
    /// Empty means the suite's default exponents.
    pub p: Vec<f64>,
    /// Empty means the suite's default levels.
    pub levels: Vec<usize>,
    pub seeds: SeedSet,
    /// Empty means `[M_N]`.
    pub n_max: Vec<usize>,
    /// `None` means 10% for kernel suites and 15% for atom suites.
    pub max_drift: Option<f64>,
}

impl SuiteConfig {
    pub fn new(spec: Arc<GroupSpec>) -> Self {
        Self {
            spec,
            weights: WeightKind::Constant,
            p: vec![],
            levels: vec![],
            seeds: SeedSet::default(),
            n_max: vec![],
            max_drift: None,
        }
    }

    fn exponents(&self, suite: Suite) -> Vec<f64> {
        if self.p.is_empty() {
            suite.default_p()
        } else {
            self.p.clone()
        }
    }

    fn levels(&self, suite: Suite) -> Vec<usize> {
        if self.levels.is_empty() {
            suite.default_levels(self.spec.level())
        } else {
            self.levels.clone()
        }
    }

    /// Rejects exponents the suite cannot take, before anything runs.
    pub fn validate(&self, suite: Suite) -> Result<()> {
        if suite.uses_p() {
            for &p in &self.exponents(suite) {
                suite.check_p(p)?;
            }
        }
        if self.levels(suite).is_empty() {
            return Err(out_of_range(
                "level",
                self.spec.level(),
                format!("large enough to leave a level to sweep for {suite}"),
            ));
        }
        Ok(())
    }
}

/// Runs one suite; suites that take `p` produce one report per exponent.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    config.validate(suite)?;
    let drift = config.max_drift.unwrap_or_else(|| suite.default_drift());
    let levels = config.levels(suite);
    let spec = &config.spec;
    let sweep = || AtomSweep {
        spec: spec.clone(),
        weights: config.weights.clone(),
        support_levels: levels.clone(),
        seeds: config.seeds,
        n_max: config.n_max.clone(),
    };
    let per_p = |f: &dyn Fn(f64) -> Result<VerificationReport>| -> Result<Vec<VerificationReport>> {
        config.exponents(suite).into_iter().map(f).collect()
    };
    match suite {
        Suite::Lemma2 => Ok(vec![verify_lemma2(spec)?]),
        Suite::Lemma2Corrupted => Ok(vec![verify_lemma2_with(spec, ClosedForm::ShiftedIndex)?]),
        Suite::KernelBounds => Ok(vec![verify_kernel_bounds(
            spec,
            &config.weights,
            &levels,
            drift,
        )?]),
        Suite::Lemma5 => Ok(vec![verify_lemma5(spec, &config.weights, &levels, drift)?]),
        Suite::Lemma5aaa => Ok(vec![verify_lemma5aaa(
            spec,
            &config.weights,
            &levels,
            drift,
        )?]),
        Suite::Lemma5aaaDecreasing => Ok(vec![verify_lemma5aaa_decreasing(spec, &levels)?]),
        Suite::Theorem1a => per_p(&|p| verify_theorem(Theorem::T1a, p, &sweep(), drift)),
        Suite::Theorem1b => per_p(&|p| verify_theorem(Theorem::T1b, p, &sweep(), drift)),
        Suite::Theorem2 => per_p(&|p| verify_theorem(Theorem::T2, p, &sweep(), drift)),
        Suite::Explore => per_p(&|p| explore_unboundedness(p, &sweep())),
    }
}
