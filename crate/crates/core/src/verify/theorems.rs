//! Atom sweeps for the strong summability inequalities and the weighted
//! maximal operator.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{CaseRecord, Parameters, SeedSet, TolerancePolicy, VerificationReport};
use crate::error::{out_of_range, Error, Result};
use crate::group::GroupSpec;
use crate::spaces::{
    hardy_quasinorm_of, lp_quasinorm, make_atom, strong_sum_1a, strong_sum_1b, weak_lp_quasinorm,
};
use crate::summability::{
    regularity_bound, unweighted_maximal, weighted_maximal, WeightKind, WeightSequence,
};

pub const THEOREM_DRIFT: f64 = 0.15;

/// Which inequality an atom sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// `sum_k ||t_k a||_p^p / k^{2-2p} <= c ||a||_{H_p}^p`, `0 < p < 1/2`.
    T1a,
    /// `(1/log n) sum_{k<=n} ||t_k a||_{1/2}^{1/2} / k <= c ||a||_{H_{1/2}}^{1/2}`.
    T1b,
    /// `||sup_n |t_n a| / w_p(n)||_p^p <= c ||a||_{H_p}^p`, `0 < p <= 1/2`.
    T2,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::T1a => "theorem1a",
            Theorem::T1b => "theorem1b",
            Theorem::T2 => "theorem2",
        }
    }

    /// Rejects exponents outside the theorem's range.
    pub fn check_p(self, p: f64) -> Result<()> {
        let ok = match self {
            Theorem::T1a => p > 0.0 && p < 0.5,
            Theorem::T1b => p == 0.5,
            Theorem::T2 => p > 0.0 && p <= 0.5,
        };
        if ok {
            return Ok(());
        }
        let expected = match self {
            Theorem::T1a => "in (0, 1/2) for theorem1a",
            Theorem::T1b => "= 1/2 for theorem1b",
            Theorem::T2 => "in (0, 1/2] for theorem2",
        };
        Err(out_of_range("p", p, expected))
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("theorem") {
            "1a" => Ok(Theorem::T1a),
            "1b" => Ok(Theorem::T1b),
            "2" => Ok(Theorem::T2),
            other => Err(Error::Parse(format!(
                "unknown theorem {other:?} (expected 1a, 1b or 2)"
            ))),
        }
    }
}

/// Inputs of an atom sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSweep {
    /// Radices and group level `N`.
    pub spec: Arc<GroupSpec>,
    pub weights: WeightKind,
    /// Support levels `N'`, each `< N`.
    pub support_levels: Vec<usize>,
    pub seeds: SeedSet,
    /// Truncation points of the sup or sum over `n`; each gets its own
    /// series. Empty means `[M_N]`.
    pub n_max: Vec<usize>,
}

impl AtomSweep {
    fn n_max_list(&self) -> Vec<usize> {
        if self.n_max.is_empty() {
            vec![self.spec.size()]
        } else {
            self.n_max.clone()
        }
    }

    fn check(&self) -> Result<()> {
        for &level in &self.support_levels {
            if level == 0 || level >= self.spec.level() {
                return Err(out_of_range(
                    "support level",
                    level,
                    format!("in 1..{}", self.spec.level()),
                ));
            }
        }
        if self.n_max_list().iter().any(|&n| n < 2) {
            return Err(out_of_range("n_max", 0, ">= 2"));
        }
        Ok(())
    }

    fn parameters(&self, p: f64) -> Parameters {
        Parameters {
            p: Some(p),
            weights: Some(self.weights.to_string()),
            levels: self.support_levels.clone(),
            seeds: Some(self.seeds),
            n_max: self.n_max_list(),
            ..Parameters::default()
        }
    }

    /// `(level, seed)` pairs in report order.
    fn cases(&self) -> Vec<(usize, u64)> {
        self.support_levels
            .iter()
            .flat_map(|&l| self.seeds.iter().map(move |s| (l, s)))
            .collect()
    }
}

/// For every atom of the sweep, the theorem's left-hand side over
/// `||a||_{H_p}^p`. Records are grouped into one series per `n_max`; the
/// verdict asks the maximum ratio to drift by less than `max_drift` from
/// one support level to the next.
pub fn verify_theorem(
    theorem: Theorem,
    p: f64,
    sweep: &AtomSweep,
    max_drift: f64,
) -> Result<VerificationReport> {
    theorem.check_p(p)?;
    sweep.check()?;
    let n_max_list = sweep.n_max_list();
    let top = *n_max_list.iter().max().expect("non-empty");
    let w = WeightSequence::new(sweep.weights.clone(), top)?;
    if !w.is_non_decreasing() {
        return Err(Error::InvalidWeights(
            "weights must be non-decreasing".into(),
        ));
    }
    let mut params = sweep.parameters(p);
    if theorem == Theorem::T1b {
        params.notes.insert(
            "regularity_bound".into(),
            regularity_bound(&w, top).to_string(),
        );
    }

    let rows: Vec<Vec<CaseRecord>> = sweep
        .cases()
        .into_par_iter()
        .map(|(level, seed)| -> Result<Vec<CaseRecord>> {
            let atom = make_atom(&sweep.spec, level, p, seed)?;
            if atom.is_degenerate() {
                return Ok(Vec::new());
            }
            let rhs = hardy_quasinorm_of(atom.function(), p)?.powf(p);
            let s = atom.spectrum();
            n_max_list
                .iter()
                .map(|&n_max| {
                    let lhs = match theorem {
                        Theorem::T1a => strong_sum_1a(&s, p, &w, n_max)?,
                        Theorem::T1b => strong_sum_1b(&s, &w, n_max)?,
                        Theorem::T2 => {
                            lp_quasinorm(&weighted_maximal(&s, p, n_max, &w)?, p)?.powf(p)
                        }
                    };
                    Ok(CaseRecord::new(
                        format!("N'={level}:seed={seed}:nmax={n_max}"),
                        format!("nmax={n_max}"),
                        level,
                        lhs,
                        rhs,
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new(
        theorem.name(),
        sweep.spec.describe(),
        params,
        rows.into_iter().flatten().collect(),
        TolerancePolicy::StableDrift { max_drift },
    ))
}

/// Report-only growth curves for `0 < p < 1/2`: per support level, the
/// largest `||t^* a||_{weak-L_p} / ||a||_{H_p}` over the seeded atoms for
/// the plain maximal operator `t^* = sup_n |t_n|` (series `unweighted`) and
/// the same quotient for the weighted maximal operator (series `weighted`).
pub fn explore_unboundedness(p: f64, sweep: &AtomSweep) -> Result<VerificationReport> {
    if !(p > 0.0 && p < 0.5) {
        return Err(out_of_range("p", p, "in (0, 1/2)"));
    }
    sweep.check()?;
    let n_max = *sweep.n_max_list().iter().max().expect("non-empty");
    let w = WeightSequence::new(sweep.weights.clone(), n_max)?;
    if !w.is_non_decreasing() {
        return Err(Error::InvalidWeights(
            "weights must be non-decreasing".into(),
        ));
    }
    // (level, seed, plain, weighted, hp)
    type Row = (usize, u64, f64, f64, f64);
    let rows: Vec<Option<Row>> = sweep
        .cases()
        .into_par_iter()
        .map(|(level, seed)| -> Result<_> {
            let atom = make_atom(&sweep.spec, level, p, seed)?;
            if atom.is_degenerate() {
                return Ok(None);
            }
            let s = atom.spectrum();
            let hp = hardy_quasinorm_of(atom.function(), p)?;
            let plain = weak_lp_quasinorm(&unweighted_maximal(&s, n_max, &w)?, p)?;
            let weighted = weak_lp_quasinorm(&weighted_maximal(&s, p, n_max, &w)?, p)?;
            Ok(Some((level, seed, plain, weighted, hp)))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for &level in &sweep.support_levels {
        for (series, pick) in [("unweighted", 0usize), ("weighted", 1)] {
            let best = rows
                .iter()
                .flatten()
                .filter(|r| r.0 == level)
                .map(|r| (if pick == 0 { r.2 } else { r.3 }, r.4, r.1))
                .fold(None, |acc: Option<(f64, f64, u64)>, b| match acc {
                    Some(a) if a.0 / a.1 >= b.0 / b.1 => Some(a),
                    _ => Some(b),
                });
            if let Some((lhs, rhs, seed)) = best {
                records.push(CaseRecord::new(
                    format!("N'={level}:{series}@seed={seed}"),
                    series,
                    level,
                    lhs,
                    rhs,
                ));
            }
        }
    }
    let mut params = sweep.parameters(p);
    params.n_max = vec![n_max];
    Ok(VerificationReport::new(
        "explore",
        sweep.spec.describe(),
        params,
        records,
        TolerancePolicy::ReportOnly,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(level: usize, support: Vec<usize>, count: usize) -> AtomSweep {
        AtomSweep {
            spec: Arc::new(GroupSpec::dyadic(level).unwrap()),
            weights: WeightKind::Constant,
            support_levels: support,
            seeds: SeedSet::new(SeedSet::DEFAULT_BASE, count),
            n_max: vec![],
        }
    }

    #[test]
    fn theorem_exponent_ranges() {
        assert!(Theorem::T1a.check_p(0.25).is_ok());
        assert!(Theorem::T1a.check_p(0.5).is_err());
        assert!(Theorem::T1b.check_p(0.5).is_ok());
        assert!(Theorem::T1b.check_p(0.25).is_err());
        assert!(Theorem::T2.check_p(0.5).is_ok());
        assert!(Theorem::T2.check_p(0.6).is_err());
        assert_eq!("theorem1a".parse::<Theorem>().unwrap(), Theorem::T1a);
        assert_eq!("2".parse::<Theorem>().unwrap(), Theorem::T2);
    }

    #[test]
    fn theorem_sweep_shape() {
        let s = sweep(5, vec![1, 2], 3);
        for (t, p) in [
            (Theorem::T1a, 0.25),
            (Theorem::T1b, 0.5),
            (Theorem::T2, 0.5),
        ] {
            let r = verify_theorem(t, p, &s, THEOREM_DRIFT).unwrap();
            assert_eq!(r.records.len(), 6);
            assert!(r
                .records
                .iter()
                .all(|c| c.ratio.is_finite() && c.ratio > 0.0));
            assert!(r.is_consistent());
        }
        assert!(verify_theorem(Theorem::T2, 0.75, &s, THEOREM_DRIFT).is_err());
        assert!(verify_theorem(Theorem::T2, 0.5, &sweep(5, vec![5], 1), THEOREM_DRIFT).is_err());
    }

    #[test]
    fn explore_emits_both_series() {
        let s = sweep(5, vec![2], 2);
        let r = explore_unboundedness(1.0 / 3.0, &s).unwrap();
        assert_eq!(r.records.len(), 2);
        assert!(r.pass());
        assert!(explore_unboundedness(0.5, &s).is_err());
    }
}
