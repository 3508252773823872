//! `L_p`, weak-`L_p` and martingale Hardy quasi-norms of cylinder functions,
//! and `p`-atoms.
//!
//! Cylinder functions are simple functions, so every quasi-norm here is
//! computed exactly from the cell values. The Hardy quasi-norm is
//! `||f*||_p` with `f* = max_{0<=n<=N} |S_{M_n} f|`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::group::GroupSpec;
use crate::spectral::{
    forward_transform, inverse_transform, CylinderFunction, Spectrum, ROUNDING_FLOOR,
};
use crate::summability::{norlund_means, WeightSequence};

/// Relative tolerance for the atom conditions.
pub const ATOM_TOLERANCE: f64 = 1e-12;

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(out_of_range("p", p, "> 0"));
    }
    Ok(())
}

/// `(integral |f|^p)^{1/p}` from pointwise moduli.
pub fn lp_quasinorm_of(abs: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    let mean = abs.iter().map(|v| v.powf(p)).sum::<f64>() / abs.len() as f64;
    Ok(mean.powf(1.0 / p))
}

pub fn lp_quasinorm(f: &CylinderFunction, p: f64) -> Result<f64> {
    lp_quasinorm_of(&f.abs(), p)
}

/// `sup_lambda lambda * mu(|f| > lambda)^{1/p}`, attained in the limit at
/// one of the values of `|f|`.
pub fn weak_lp_quasinorm_of(abs: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    let mut sorted = abs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total = sorted.len() as f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        // include every cell with |f| >= v
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        best = best.max(v * (j as f64 / total).powf(1.0 / p));
        i = j;
    }
    Ok(best)
}

pub fn weak_lp_quasinorm(f: &CylinderFunction, p: f64) -> Result<f64> {
    weak_lp_quasinorm_of(&f.abs(), p)
}

/// `S_{M_n} f` for every `n = 0..=N`, each being the average of `f` over
/// level-`n` cylinders. Averages below [`ROUNDING_FLOOR`] times `max |f|`
/// are returned as zero; the last entry is `f` itself.
pub fn martingale(f: &CylinderFunction) -> Vec<CylinderFunction> {
    let spec = f.spec();
    let size = spec.size();
    let floor = ROUNDING_FLOOR * f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    (0..=spec.level())
        .map(|n| {
            if n == spec.level() {
                return f.clone();
            }
            let mn = spec.m(n);
            let count = (size / mn) as f64;
            let mut sums = vec![Complex64::new(0.0, 0.0); mn];
            for (x, &v) in f.values().iter().enumerate() {
                sums[x % mn] += v;
            }
            for s in sums.iter_mut() {
                *s /= count;
                if s.norm() <= floor {
                    *s = Complex64::new(0.0, 0.0);
                }
            }
            let values = (0..size).map(|x| sums[x % mn]).collect();
            CylinderFunction::from_parts_unchecked(spec.clone(), values)
        })
        .collect()
}

/// `f* = max_n |S_{M_n} f|`, pointwise.
pub fn maximal_function(s: &Spectrum) -> CylinderFunction {
    maximal_function_of(&inverse_transform(s))
}

pub fn maximal_function_of(f: &CylinderFunction) -> CylinderFunction {
    let mut best = vec![0.0f64; f.len()];
    for level in martingale(f) {
        for (b, v) in best.iter_mut().zip(level.values()) {
            *b = b.max(v.norm());
        }
    }
    CylinderFunction::from_parts_unchecked(
        f.spec().clone(),
        best.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// `||f||_{H_p} = ||f*||_p` for `0 < p <= 1`.
pub fn hardy_quasinorm(s: &Spectrum, p: f64) -> Result<f64> {
    hardy_quasinorm_of(&inverse_transform(s), p)
}

pub fn hardy_quasinorm_of(f: &CylinderFunction, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(out_of_range("p", p, "in (0, 1]"));
    }
    lp_quasinorm(&maximal_function_of(f), p)
}

/// The three quasi-norms of one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiNormReport {
    pub p: f64,
    pub lp: f64,
    pub weak_lp: f64,
    pub hp: f64,
}

pub fn quasi_norm_report(f: &CylinderFunction, p: f64) -> Result<QuasiNormReport> {
    Ok(QuasiNormReport {
        p,
        lp: lp_quasinorm(f, p)?,
        weak_lp: weak_lp_quasinorm(f, p)?,
        hp: hardy_quasinorm_of(f, p)?,
    })
}

/// A `p`-atom supported on `I_{support_level}(0)`: mean zero, vanishing
/// outside the interval, and `||a||_inf <= M_{support_level}^{1/p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    function: CylinderFunction,
    p: f64,
    support_level: usize,
    degenerate: bool,
}

impl Atom {
    /// Validates the atom conditions.
    ///
    /// The mean and sup-norm checks are relative to the largest admissible
    /// value `M^{1/p}`, since atoms with small `p` have very large entries.
    pub fn new(function: CylinderFunction, p: f64, support_level: usize) -> Result<Self> {
        let spec = function.spec().clone();
        if !(p > 0.0 && p <= 1.0) {
            return Err(out_of_range("p", p, "in (0, 1]"));
        }
        if support_level > spec.level() {
            return Err(out_of_range(
                "support_level",
                support_level,
                format!("<= {}", spec.level()),
            ));
        }
        let mj = spec.m(support_level);
        let bound = (mj as f64).powf(1.0 / p);
        let values = function.values();
        if let Some(x) = (0..values.len()).find(|&x| x % mj != 0 && values[x].norm() != 0.0) {
            return Err(Error::InvalidAtom(format!(
                "non-zero value at cell {x} outside I_{support_level}"
            )));
        }
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup > bound * (1.0 + ATOM_TOLERANCE) {
            return Err(Error::InvalidAtom(format!(
                "sup norm {sup} exceeds M^(1/p) = {bound}"
            )));
        }
        let integral = values.iter().sum::<Complex64>() / spec.size() as f64;
        let mean_tolerance = ATOM_TOLERANCE * bound.max(1.0) / mj as f64;
        if integral.norm() > mean_tolerance {
            return Err(Error::InvalidAtom(format!(
                "integral over the support is {integral}, expected 0"
            )));
        }
        Ok(Self {
            degenerate: sup == 0.0,
            function,
            p,
            support_level,
        })
    }

    pub fn function(&self) -> &CylinderFunction {
        &self.function
    }

    /// The transform with coefficients below rounding level, relative to
    /// `M^{1/p}`, set to zero. This makes `a^(k) = 0` for `k < M_{N'}` exact,
    /// so the means `t_k a`, `k <= M_{N'}`, vanish identically instead of
    /// carrying noise that small exponents would amplify.
    pub fn spectrum(&self) -> Spectrum {
        let floor = ATOM_TOLERANCE * self.sup_bound();
        let coeffs = forward_transform(&self.function)
            .into_coeffs()
            .into_iter()
            .map(|c| {
                if c.norm() <= floor {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect();
        Spectrum::from_parts_unchecked(self.function.spec().clone(), coeffs)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn support_level(&self) -> usize {
        self.support_level
    }

    /// `true` for the zero atom, which is all a single-cell support admits.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `M^{1/p}`, the sup-norm bound.
    pub fn sup_bound(&self) -> f64 {
        (self.function.spec().m(self.support_level) as f64).powf(1.0 / self.p)
    }
}

/// Draws a real atom on `I_{support_level}(0)` from `seed`.
///
/// Values on the level-`N` cells of the support are uniform on `[-1, 1]`,
/// projected to mean zero and rescaled so that the sup-norm equals
/// `M^{1/p}`. If the support is a single cell the zero atom is returned.
pub fn make_atom(spec: &Arc<GroupSpec>, support_level: usize, p: f64, seed: u64) -> Result<Atom> {
    if support_level == 0 || support_level > spec.level() {
        return Err(out_of_range(
            "support_level",
            support_level,
            format!("in 1..={}", spec.level()),
        ));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(out_of_range("p", p, "in (0, 1]"));
    }
    let mj = spec.m(support_level);
    let cells = spec.size() / mj;
    let mut values = vec![Complex64::new(0.0, 0.0); spec.size()];
    if cells > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = loop {
            let mut draw: Vec<f64> = (0..cells).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mean = draw.iter().sum::<f64>() / cells as f64;
            draw.iter_mut().for_each(|v| *v -= mean);
            let sup = draw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if sup > 1e-6 {
                let bound = (mj as f64).powf(1.0 / p);
                draw.iter_mut().for_each(|v| *v *= bound / sup);
                break draw;
            }
        };
        for (i, v) in draw.into_iter().enumerate() {
            values[i * mj] = Complex64::new(v, 0.0);
        }
    }
    Atom::new(
        CylinderFunction::from_parts_unchecked(spec.clone(), values),
        p,
        support_level,
    )
}

/// `sum_{k=1}^{n_max} ||t_k f||_p^p / k^{2-2p}` for `0 < p < 1/2`.
pub fn strong_sum_1a(s: &Spectrum, p: f64, w: &WeightSequence, n_max: usize) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(out_of_range("p", p, "in (0, 1/2)"));
    }
    let mut total = 0.0;
    for (k, mean) in norlund_means(s, w, n_max)? {
        let norm = lp_quasinorm(&mean, p)?;
        total += norm.powf(p) / (k as f64).powf(2.0 - 2.0 * p);
    }
    Ok(total)
}

/// `(1 / log n_max) sum_{k=1}^{n_max} ||t_k f||_{1/2}^{1/2} / k`.
pub fn strong_sum_1b(s: &Spectrum, w: &WeightSequence, n_max: usize) -> Result<f64> {
    if n_max < 2 {
        return Err(out_of_range("n_max", n_max, ">= 2"));
    }
    let mut total = 0.0;
    for (k, mean) in norlund_means(s, w, n_max)? {
        total += lp_quasinorm(&mean, 0.5)?.sqrt() / k as f64;
    }
    Ok(total / (n_max as f64).log2())
}
