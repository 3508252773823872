//! Nörlund summability: weight sequences, the means `t_n`, and the
//! (weighted) maximal operators built from them.
//!
//! With weights `q_0, q_1, ...` and `Q_n = q_0 + ... + q_{n-1}`,
//!
//! ```text
//! t_n f = (1 / Q_n) * sum_{k=1}^{n} q_{n-k} S_k f
//! ```
//!
//! Collecting the coefficient of each character gives the multiplier form
//! `t_n f = sum_{j<n} (Q_{n-j} / Q_n) f^(j) psi_j`, which is what the sweep
//! routines use. [`norlund_mean`] evaluates the defining sum directly.
//!
//! All logarithms are base 2.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::group::GroupSpec;
use crate::spectral::{character_values, CylinderFunction, Spectrum};

/// Which family a weight sequence belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightKind {
    /// `q_k = 1`; the Fejér means.
    Constant,
    /// `q_k = log^(beta)(k^alpha)`, the iterated-logarithm family.
    LogFamily { alpha: f64, beta: u32 },
    /// User-supplied weights.
    Custom { q: Vec<f64> },
}

impl WeightKind {
    /// Parses `const`, `log:a=<alpha>,b=<beta>` or `custom:<path>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "const" || s == "constant" {
            return Ok(WeightKind::Constant);
        }
        if let Some(rest) = s.strip_prefix("log:") {
            let mut alpha = None;
            let mut beta = None;
            for item in rest.split(',') {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
                match key.trim() {
                    "a" => {
                        alpha = Some(value.trim().parse::<f64>().map_err(|_| {
                            Error::Parse(format!("alpha {value:?} is not a number"))
                        })?)
                    }
                    "b" => {
                        beta = Some(value.trim().parse::<u32>().map_err(|_| {
                            Error::Parse(format!("beta {value:?} is not a positive integer"))
                        })?)
                    }
                    other => return Err(Error::Parse(format!("unknown log parameter {other:?}"))),
                }
            }
            let alpha = alpha.ok_or_else(|| Error::Parse("missing a=<alpha>".into()))?;
            let beta = beta.ok_or_else(|| Error::Parse("missing b=<beta>".into()))?;
            return Ok(WeightKind::LogFamily { alpha, beta });
        }
        if let Some(path) = s.strip_prefix("custom:") {
            return Ok(WeightKind::Custom {
                q: read_weight_file(Path::new(path))?,
            });
        }
        Err(Error::Parse(format!(
            "unknown weight family {s:?} (expected const, log:a=..,b=.. or custom:<path>)"
        )))
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Constant => f.write_str("const"),
            WeightKind::LogFamily { alpha, beta } => write!(f, "log:a={alpha},b={beta}"),
            WeightKind::Custom { q } => write!(f, "custom[{}]", q.len()),
        }
    }
}

/// Reads one weight per line; blank lines and `#` comments are skipped.
pub fn read_weight_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| {
            let t = line.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, line)| {
            line.trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!(
                    "{}:{}: {:?} is not a number",
                    path.display(),
                    i + 1,
                    line
                ))
            })
        })
        .collect()
}

/// Nörlund weights `q_0..q_{n_max-1}` with cumulative sums `Q_0..Q_{n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSequence {
    kind: WeightKind,
    q: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WeightSequence {
    /// Builds `n_max` weights of the given family.
    ///
    /// The logarithmic family is regularized as
    /// `q_k = log^(beta)(max(k, k0)^alpha)` where `k0` is the smallest
    /// integer for which the iterated logarithm is at least 1; this keeps
    /// `q_0 > 0` and the sequence non-decreasing.
    pub fn new(kind: WeightKind, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(out_of_range("n_max", 0, ">= 1"));
        }
        let q = match &kind {
            WeightKind::Constant => vec![1.0; n_max],
            WeightKind::LogFamily { alpha, beta } => log_family(*alpha, *beta, n_max)?,
            WeightKind::Custom { q } => {
                if q.len() < n_max {
                    return Err(Error::InvalidWeights(format!(
                        "{} custom weights supplied, {} required",
                        q.len(),
                        n_max
                    )));
                }
                q[..n_max].to_vec()
            }
        };
        validate_weights(&q)?;
        Ok(Self::from_parts(kind, q))
    }

    pub fn constant(n_max: usize) -> Result<Self> {
        Self::new(WeightKind::Constant, n_max)
    }

    pub fn log_family(alpha: f64, beta: u32, n_max: usize) -> Result<Self> {
        Self::new(WeightKind::LogFamily { alpha, beta }, n_max)
    }

    pub fn custom(q: Vec<f64>) -> Result<Self> {
        let n = q.len();
        Self::new(WeightKind::Custom { q }, n)
    }

    /// Builds weights without the monotonicity check; only positivity of
    /// `q_0` and finiteness are enforced. Used to run suites on weights that
    /// violate the standing hypothesis.
    pub fn unvalidated(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(out_of_range("n_max", 0, ">= 1"));
        }
        if let Some(i) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidWeights(format!("q_{i} is not finite")));
        }
        if q[0] <= 0.0 || q.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidWeights(
                "weights must be non-negative with q_0 > 0".into(),
            ));
        }
        Ok(Self::from_parts(WeightKind::Custom { q: q.clone() }, q))
    }

    fn from_parts(kind: WeightKind, q: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(q.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for &v in &q {
            acc += v;
            cumulative.push(acc);
        }
        Self {
            kind,
            q,
            cumulative,
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        self.kind.to_string()
    }

    /// Largest `n` for which `Q_n` (and hence `t_n`) is available.
    pub fn n_max(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self, k: usize) -> f64 {
        self.q[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.q
    }

    /// `Q_n = q_0 + ... + q_{n-1}`.
    pub fn cumulative(&self, n: usize) -> f64 {
        self.cumulative[n]
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.q.windows(2).all(|w| w[0] <= w[1])
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max() {
            return Err(out_of_range("n", n, format!("in 1..={}", self.n_max())));
        }
        Ok(())
    }
}

fn validate_weights(q: &[f64]) -> Result<()> {
    if let Some(i) = q.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidWeights(format!("q_{i} is not finite")));
    }
    if q[0] <= 0.0 {
        return Err(Error::InvalidWeights(format!(
            "q_0 = {} must be positive",
            q[0]
        )));
    }
    if let Some(i) = q.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::InvalidWeights(format!(
            "weights must be non-decreasing: q_{} = {} > q_{} = {}",
            i,
            q[i],
            i + 1,
            q[i + 1]
        )));
    }
    Ok(())
}

/// `log2` applied `depth` times.
pub fn iterated_log2(x: f64, depth: u32) -> f64 {
    (0..depth).fold(x, |v, _| v.log2())
}

fn log_family(alpha: f64, beta: u32, n_max: usize) -> Result<Vec<f64>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidWeights(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    if beta == 0 {
        return Err(Error::InvalidWeights("beta must be at least 1".into()));
    }
    // log^(beta)(y) >= 1 iff y >= T_beta, with T_1 = 2, T_{b+1} = 2^{T_b}.
    let mut threshold = 2.0f64;
    for _ in 1..beta {
        threshold = threshold.exp2();
    }
    let start = threshold.powf(1.0 / alpha).ceil();
    if !start.is_finite() || start > 1e15 {
        return Err(Error::InvalidWeights(format!(
            "log:a={alpha},b={beta} has no usable starting index"
        )));
    }
    // value at k, computed as alpha*log2(k) first to avoid overflow
    let value = |k: f64| iterated_log2(alpha * k.log2(), beta - 1);
    let mut k0 = start.max(1.0);
    while k0 > 1.0 && value(k0 - 1.0) >= 1.0 {
        k0 -= 1.0;
    }
    while value(k0) < 1.0 {
        k0 += 1.0;
    }
    Ok((0..n_max).map(|k| value((k as f64).max(k0))).collect())
}

/// `q_{n-1} / Q_n`; regular methods drive this to zero.
pub fn regularity_ratio(w: &WeightSequence, n: usize) -> Result<f64> {
    w.check_n(n)?;
    Ok(w.q(n - 1) / w.cumulative(n))
}

/// `max_{2<=n<=n_max} n * q_{n-1} / Q_n`: finite values indicate the
/// `q_{n-1}/Q_n = O(1/n)` condition at desk scale.
pub fn regularity_bound(w: &WeightSequence, n_max: usize) -> f64 {
    (2..=n_max.min(w.n_max()))
        .map(|n| n as f64 * w.q(n - 1) / w.cumulative(n))
        .fold(0.0, f64::max)
}

/// Multiplier `Q_{n-j} / Q_n` for `j < n`: `t_n f` is the inverse transform
/// of the coefficients scaled by it.
pub fn norlund_multiplier(n: usize, w: &WeightSequence) -> Result<Vec<f64>> {
    w.check_n(n)?;
    let qn = w.cumulative(n);
    Ok((0..n).map(|j| w.cumulative(n - j) / qn).collect())
}

/// The partial sums `S_0 f, ..., S_{n_max} f`, built by adding one
/// character at a time.
#[derive(Debug, Clone)]
pub struct PartialSumTable {
    spec: Arc<GroupSpec>,
    sums: Vec<Vec<Complex64>>,
}

impl PartialSumTable {
    pub fn new(s: &Spectrum, n_max: usize) -> Result<Self> {
        let spec = s.spec().clone();
        if n_max > spec.size() {
            return Err(out_of_range("n", n_max, format!("<= {}", spec.size())));
        }
        let mut sums = Vec::with_capacity(n_max + 1);
        let mut current = vec![Complex64::new(0.0, 0.0); spec.size()];
        sums.push(current.clone());
        for k in 0..n_max {
            let c = s.coeffs()[k];
            if c != Complex64::new(0.0, 0.0) {
                let psi = character_values(k, &spec)?;
                current.iter_mut().zip(&psi).for_each(|(v, p)| *v += c * p);
            }
            sums.push(current.clone());
        }
        Ok(Self { spec, sums })
    }

    pub fn n_max(&self) -> usize {
        self.sums.len() - 1
    }

    pub fn partial_sum(&self, k: usize) -> &[Complex64] {
        &self.sums[k]
    }

    /// `(1/Q_n) sum_{k=1}^n q_{n-k} S_k f`.
    pub fn norlund_mean(&self, n: usize, w: &WeightSequence) -> Result<CylinderFunction> {
        w.check_n(n)?;
        if n > self.n_max() {
            return Err(out_of_range("n", n, format!("<= {}", self.n_max())));
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.spec.size()];
        for k in 1..=n {
            let weight = w.q(n - k);
            acc.iter_mut()
                .zip(&self.sums[k])
                .for_each(|(a, &v)| *a += weight * v);
        }
        let qn = w.cumulative(n);
        acc.iter_mut().for_each(|a| *a /= qn);
        Ok(CylinderFunction::from_parts_unchecked(
            self.spec.clone(),
            acc,
        ))
    }
}

/// The Nörlund mean `t_n f`, evaluated from its defining sum of partial sums.
pub fn norlund_mean(s: &Spectrum, n: usize, w: &WeightSequence) -> Result<CylinderFunction> {
    if n == 0 || n > s.len() {
        return Err(out_of_range("n", n, format!("in 1..={}", s.len())));
    }
    PartialSumTable::new(s, n)?.norlund_mean(n, w)
}

/// The Fejér mean `sigma_n f`: the Nörlund mean with unit weights.
pub fn fejer_mean(s: &Spectrum, n: usize) -> Result<CylinderFunction> {
    let w = WeightSequence::constant(n.max(1))?;
    norlund_mean(s, n, &w)
}

/// `t_n f` through the multiplier form. Unlike [`norlund_mean`], `n` may
/// exceed `M_N` as long as the weights reach it; for such `n` the partial
/// sums `S_k f`, `k >= M_N`, all equal `f`.
pub fn norlund_mean_spectral(
    s: &Spectrum,
    n: usize,
    w: &WeightSequence,
) -> Result<CylinderFunction> {
    Ok(s.synthesize_with(&norlund_multiplier(n, w)?))
}

/// Iterates `(n, t_n f)` for `n = 1..=n_max` via the multiplier form.
/// Values below [`Spectrum::rounding_floor`] are flushed to zero, so means
/// that vanish at a cell do so exactly.
pub fn norlund_means<'a>(
    s: &'a Spectrum,
    w: &'a WeightSequence,
    n_max: usize,
) -> Result<impl Iterator<Item = (usize, CylinderFunction)> + 'a> {
    if n_max == 0 || n_max > w.n_max() {
        return Err(out_of_range(
            "n_max",
            n_max,
            format!("in 1..={}", w.n_max()),
        ));
    }
    let floor = s.rounding_floor();
    Ok((1..=n_max).map(move |n| {
        let mean = norlund_mean_spectral(s, n, w).expect("n checked against weights");
        (n, mean.flush_below(floor))
    }))
}

/// The weight `(n+1)^{1/p-2} log^{2[1/2+p]}(n+1)` of the weighted maximal
/// operator, for `0 < p <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximalWeight {
    p: f64,
    power: f64,
    log_power: i32,
}

impl MaximalWeight {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(out_of_range("p", p, "in (0, 1/2]"));
        }
        Ok(Self {
            p,
            power: 1.0 / p - 2.0,
            log_power: 2 * (0.5 + p).floor() as i32,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, n: usize) -> f64 {
        let x = (n + 1) as f64;
        let power = if self.power == 0.0 {
            1.0
        } else {
            x.powf(self.power)
        };
        power * x.log2().powi(self.log_power)
    }
}

fn pointwise_max_over_means(
    s: &Spectrum,
    w: &WeightSequence,
    n_max: usize,
    scale: impl Fn(usize) -> f64,
) -> Result<CylinderFunction> {
    let mut best = vec![0.0f64; s.len()];
    for (n, mean) in norlund_means(s, w, n_max)? {
        let factor = scale(n);
        for (b, v) in best.iter_mut().zip(mean.values()) {
            let candidate = v.norm() * factor;
            if candidate > *b {
                *b = candidate;
            }
        }
    }
    Ok(CylinderFunction::from_parts_unchecked(
        s.spec().clone(),
        best.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    ))
}

/// `sup_{1<=n<=n_max} |t_n f| / w_p(n)` pointwise.
pub fn weighted_maximal(
    s: &Spectrum,
    p: f64,
    n_max: usize,
    w: &WeightSequence,
) -> Result<CylinderFunction> {
    let weight = MaximalWeight::new(p)?;
    pointwise_max_over_means(s, w, n_max, |n| 1.0 / weight.eval(n))
}

/// `sup_{1<=n<=n_max} |t_n f|` pointwise.
pub fn unweighted_maximal(
    s: &Spectrum,
    n_max: usize,
    w: &WeightSequence,
) -> Result<CylinderFunction> {
    pointwise_max_over_means(s, w, n_max, |_| 1.0)
}
