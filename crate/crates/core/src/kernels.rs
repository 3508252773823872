//! Dirichlet, Fejér and Nörlund kernels.
//!
//! `D_n = sum_{k<n} psi_k`, `K_n = (1/n) sum_{k=1}^n D_k` and the Nörlund
//! kernel `F_n = (1/Q_n) sum_{k=1}^n q_{n-k} D_k`, whose convolution with `f`
//! is `t_n f`. Kernels are materialized as full level-`N` vectors.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::group::GroupSpec;
use crate::spectral::{character_values, CylinderFunction, Spectrum};
use crate::summability::{norlund_multiplier, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Dirichlet,
    Fejer,
    Norlund,
    Tail,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Dirichlet => "dirichlet",
            KernelKind::Fejer => "fejer",
            KernelKind::Norlund => "norlund",
            KernelKind::Tail => "tail",
        })
    }
}

/// A kernel together with its kind and index.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFunction {
    pub kind: KernelKind,
    pub n: usize,
    pub function: CylinderFunction,
}

impl KernelFunction {
    pub fn values(&self) -> &[Complex64] {
        self.function.values()
    }
}

fn check_n(n: usize, spec: &GroupSpec) -> Result<()> {
    if n == 0 || n > spec.size() {
        return Err(out_of_range("n", n, format!("in 1..={}", spec.size())));
    }
    Ok(())
}

fn check_weights(n: usize, w: &WeightSequence) -> Result<()> {
    if n > w.n_max() {
        return Err(Error::InvalidWeights(format!(
            "weights reach n = {}, kernel needs n = {}",
            w.n_max(),
            n
        )));
    }
    Ok(())
}

/// Streams `(n, D_n, K_n)` for `n = 1, 2, ...` by adding one character per
/// step; `K_n = ((n-1) K_{n-1} + D_n) / n`.
pub struct KernelSweep {
    spec: Arc<GroupSpec>,
    n: usize,
    dirichlet: Vec<Complex64>,
    fejer_sum: Vec<Complex64>,
}

impl KernelSweep {
    pub fn new(spec: Arc<GroupSpec>) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); spec.size()];
        Self {
            spec,
            n: 0,
            dirichlet: zeros.clone(),
            fejer_sum: zeros,
        }
    }

    /// Index of the kernels currently held (0 before the first step).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Advances to `n + 1`. Returns `false` once `n = M_N`.
    pub fn step(&mut self) -> bool {
        if self.n >= self.spec.size() {
            return false;
        }
        let psi = character_values(self.n, &self.spec).expect("n < M_N");
        for ((d, s), p) in self.dirichlet.iter_mut().zip(&mut self.fejer_sum).zip(&psi) {
            *d += p;
            *s += *d;
        }
        self.n += 1;
        true
    }

    pub fn dirichlet(&self) -> &[Complex64] {
        &self.dirichlet
    }

    /// `n K_n = D_1 + ... + D_n`.
    pub fn fejer_sum(&self) -> &[Complex64] {
        &self.fejer_sum
    }

    pub fn fejer(&self) -> Vec<Complex64> {
        let n = self.n as f64;
        self.fejer_sum.iter().map(|v| v / n).collect()
    }
}

/// `D_1, ..., D_{n_max}` and `K_1, ..., K_{n_max}` held in memory.
pub struct KernelTable {
    spec: Arc<GroupSpec>,
    dirichlet: Vec<Vec<Complex64>>,
    fejer: Vec<Vec<Complex64>>,
}

impl KernelTable {
    pub fn new(spec: Arc<GroupSpec>, n_max: usize) -> Result<Self> {
        check_n(n_max, &spec)?;
        let mut sweep = KernelSweep::new(spec.clone());
        let mut dirichlet = Vec::with_capacity(n_max);
        let mut fejer = Vec::with_capacity(n_max);
        while sweep.n() < n_max && sweep.step() {
            dirichlet.push(sweep.dirichlet().to_vec());
            fejer.push(sweep.fejer());
        }
        Ok(Self {
            spec,
            dirichlet,
            fejer,
        })
    }

    pub fn n_max(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn dirichlet(&self, n: usize) -> &[Complex64] {
        &self.dirichlet[n - 1]
    }

    pub fn fejer(&self, n: usize) -> &[Complex64] {
        &self.fejer[n - 1]
    }

    fn check(&self, n: usize, w: &WeightSequence) -> Result<()> {
        if n == 0 || n > self.n_max() {
            return Err(out_of_range("n", n, format!("in 1..={}", self.n_max())));
        }
        check_weights(n, w)
    }

    /// `F_n` from its definition as a weighted sum of Dirichlet kernels.
    pub fn norlund(&self, n: usize, w: &WeightSequence) -> Result<KernelFunction> {
        self.check(n, w)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.spec.size()];
        for k in 1..=n {
            let q = w.q(n - k);
            acc.iter_mut()
                .zip(self.dirichlet(k))
                .for_each(|(a, &d)| *a += q * d);
        }
        let qn = w.cumulative(n);
        acc.iter_mut().for_each(|a| *a /= qn);
        Ok(self.wrap(KernelKind::Norlund, n, acc))
    }

    /// `F_n` through summation by parts over Fejér kernels:
    /// `(1/Q_n) (sum_{j=1}^{n-1} (q_{n-j} - q_{n-j-1}) j K_j + q_0 n K_n)`.
    pub fn norlund_abel(&self, n: usize, w: &WeightSequence) -> Result<KernelFunction> {
        self.check(n, w)?;
        let mut acc: Vec<Complex64> = self
            .fejer(n)
            .iter()
            .map(|&v| v * (w.q(0) * n as f64))
            .collect();
        for j in 1..n {
            let c = (w.q(n - j) - w.q(n - j - 1)) * j as f64;
            if c != 0.0 {
                acc.iter_mut()
                    .zip(self.fejer(j))
                    .for_each(|(a, &k)| *a += c * k);
            }
        }
        let qn = w.cumulative(n);
        acc.iter_mut().for_each(|a| *a /= qn);
        Ok(self.wrap(KernelKind::Norlund, n, acc))
    }

    /// `(1/Q_n) sum_{j=M_{n0}}^{n} q_{n-j} D_j`.
    pub fn tail(&self, n: usize, n0: usize, w: &WeightSequence) -> Result<KernelFunction> {
        self.check(n, w)?;
        let start = check_tail(n, n0, &self.spec)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.spec.size()];
        for j in start..=n {
            let q = w.q(n - j);
            acc.iter_mut()
                .zip(self.dirichlet(j))
                .for_each(|(a, &d)| *a += q * d);
        }
        let qn = w.cumulative(n);
        acc.iter_mut().for_each(|a| *a /= qn);
        Ok(self.wrap(KernelKind::Tail, n, acc))
    }

    fn wrap(&self, kind: KernelKind, n: usize, values: Vec<Complex64>) -> KernelFunction {
        KernelFunction {
            kind,
            n,
            function: CylinderFunction::from_parts_unchecked(self.spec.clone(), values),
        }
    }
}

fn check_tail(n: usize, n0: usize, spec: &GroupSpec) -> Result<usize> {
    if n0 >= spec.level() {
        return Err(out_of_range("n0", n0, format!("< {}", spec.level())));
    }
    let start = spec.m(n0);
    if n < start || n > spec.size() {
        return Err(out_of_range(
            "n",
            n,
            format!("in {}..={}", start, spec.size()),
        ));
    }
    Ok(start)
}

/// `D_n` as the pointwise sum of the first `n` characters.
pub fn dirichlet_kernel(n: usize, spec: &Arc<GroupSpec>) -> Result<KernelFunction> {
    check_n(n, spec)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); spec.size()];
    for k in 0..n {
        let psi = character_values(k, spec)?;
        acc.iter_mut().zip(&psi).for_each(|(a, p)| *a += p);
    }
    Ok(KernelFunction {
        kind: KernelKind::Dirichlet,
        n,
        function: CylinderFunction::from_parts_unchecked(spec.clone(), acc),
    })
}

/// `K_n`, the arithmetic mean of `D_1..D_n`.
pub fn fejer_kernel(n: usize, spec: &Arc<GroupSpec>) -> Result<KernelFunction> {
    check_n(n, spec)?;
    let mut sweep = KernelSweep::new(spec.clone());
    while sweep.n() < n {
        sweep.step();
    }
    Ok(KernelFunction {
        kind: KernelKind::Fejer,
        n,
        function: CylinderFunction::from_parts_unchecked(spec.clone(), sweep.fejer()),
    })
}

/// Which closed form [`fejer_kernel_closed_with`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedForm {
    #[default]
    Exact,
    /// Uses `M_{t+1}` in place of `M_t` off the interval. Wrong on purpose;
    /// verification suites must reject it.
    ShiftedIndex,
}

/// `K_{M_j}` from its closed form:
///
/// * `(M_j + 1) / 2` on `I_j`;
/// * `M_t / (1 - r_t(x))` when `x` lies in `I_t \ I_{t+1}` for some `t < j`
///   and `x - x_t e_t` lies in `I_j`;
/// * `0` elsewhere.
pub fn fejer_kernel_closed(j: usize, spec: &Arc<GroupSpec>) -> Result<KernelFunction> {
    fejer_kernel_closed_with(j, spec, ClosedForm::Exact)
}

pub fn fejer_kernel_closed_with(
    j: usize,
    spec: &Arc<GroupSpec>,
    form: ClosedForm,
) -> Result<KernelFunction> {
    if j > spec.level() {
        return Err(out_of_range("j", j, format!("<= {}", spec.level())));
    }
    let mj = spec.m(j);
    let values = (0..spec.size())
        .map(|x| {
            if x % mj == 0 {
                return Complex64::new((mj as f64 + 1.0) / 2.0, 0.0);
            }
            // t: first non-zero digit, necessarily < j
            let mut rest = x;
            let mut t = 0;
            while rest % spec.radix(t) == 0 {
                rest /= spec.radix(t);
                t += 1;
            }
            let xt = rest % spec.radix(t);
            // x - x_t e_t in I_j  <=>  digits t+1..j-1 vanish
            let above = rest / spec.radix(t);
            let higher_block = spec.m(j) / spec.m(t + 1);
            if !above.is_multiple_of(higher_block) {
                return Complex64::new(0.0, 0.0);
            }
            let scale = match form {
                ClosedForm::Exact => spec.m(t),
                ClosedForm::ShiftedIndex => spec.m(t + 1),
            } as f64;
            let r = Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * xt as f64 / spec.radix(t) as f64,
            );
            scale / (Complex64::new(1.0, 0.0) - r)
        })
        .collect();
    Ok(KernelFunction {
        kind: KernelKind::Fejer,
        n: mj,
        function: CylinderFunction::from_parts_unchecked(spec.clone(), values),
    })
}

/// `F_n = (1/Q_n) sum_{k=1}^n q_{n-k} D_k`.
pub fn norlund_kernel(
    n: usize,
    w: &WeightSequence,
    spec: &Arc<GroupSpec>,
) -> Result<KernelFunction> {
    check_n(n, spec)?;
    check_weights(n, w)?;
    KernelTable::new(spec.clone(), n)?.norlund(n, w)
}

/// `F_n` from the Abel-transformed sum over Fejér kernels.
pub fn norlund_kernel_abel(
    n: usize,
    w: &WeightSequence,
    spec: &Arc<GroupSpec>,
) -> Result<KernelFunction> {
    check_n(n, spec)?;
    check_weights(n, w)?;
    KernelTable::new(spec.clone(), n)?.norlund_abel(n, w)
}

/// `(1/Q_n) sum_{j=M_{n0}}^{n} q_{n-j} D_j` for `M_{n0} <= n <= M_N`.
pub fn tail_kernel(
    n: usize,
    n0: usize,
    w: &WeightSequence,
    spec: &Arc<GroupSpec>,
) -> Result<KernelFunction> {
    check_tail(n, n0, spec)?;
    check_weights(n, w)?;
    KernelTable::new(spec.clone(), n)?.tail(n, n0, w)
}

/// `F_n` via its spectral multiplier `Q_{n-j}/Q_n`.
pub fn norlund_kernel_spectral(
    n: usize,
    w: &WeightSequence,
    spec: &Arc<GroupSpec>,
) -> Result<KernelFunction> {
    check_n(n, spec)?;
    check_weights(n, w)?;
    let ones =
        Spectrum::from_parts_unchecked(spec.clone(), vec![Complex64::new(1.0, 0.0); spec.size()]);
    Ok(KernelFunction {
        kind: KernelKind::Norlund,
        n,
        function: ones.synthesize_with(&norlund_multiplier(n, w)?),
    })
}

/// The tail kernel via its multiplier: `Q_{n-M_{n0}+1}/Q_n` below `M_{n0}`
/// and `Q_{n-j}/Q_n` from `M_{n0}` on.
pub fn tail_kernel_spectral(
    n: usize,
    n0: usize,
    w: &WeightSequence,
    spec: &Arc<GroupSpec>,
) -> Result<KernelFunction> {
    let start = check_tail(n, n0, spec)?;
    check_weights(n, w)?;
    let qn = w.cumulative(n);
    let multiplier: Vec<f64> = (0..n)
        .map(|j| w.cumulative(n + 1 - start.max(j + 1)) / qn)
        .collect();
    let ones =
        Spectrum::from_parts_unchecked(spec.clone(), vec![Complex64::new(1.0, 0.0); spec.size()]);
    Ok(KernelFunction {
        kind: KernelKind::Tail,
        n,
        function: ones.synthesize_with(&multiplier),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::haar_integrate;

    fn spec(radices: &[usize]) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::new(radices, radices.len()).unwrap())
    }

    #[test]
    fn dirichlet_basics() {
        let g = spec(&[2, 3, 2]);
        let d1 = dirichlet_kernel(1, &g).unwrap();
        assert!(d1.values().iter().all(|v| (v - 1.0).norm() < 1e-14));
        for n in 1..=g.size() {
            let d = dirichlet_kernel(n, &g).unwrap();
            assert!((d.values()[0] - n as f64).norm() < 1e-12);
        }
        // D_{M_j} = M_j on I_j, 0 elsewhere
        for j in 0..=g.level() {
            let d = dirichlet_kernel(g.m(j), &g).unwrap();
            for x in 0..g.size() {
                let expected = if x % g.m(j) == 0 { g.m(j) as f64 } else { 0.0 };
                assert!((d.values()[x] - expected).norm() < 1e-12);
            }
        }
        assert!(dirichlet_kernel(0, &g).is_err());
        assert!(dirichlet_kernel(g.size() + 1, &g).is_err());
    }

    #[test]
    fn closed_form_matches_sum() {
        for radices in [&[2, 2, 2, 2][..], &[2, 3, 4], &[3, 3, 2], &[5, 2, 3]] {
            let g = spec(radices);
            for j in 0..=g.level() {
                let closed = fejer_kernel_closed(j, &g).unwrap();
                let summed = fejer_kernel(g.m(j), &g).unwrap();
                let d = closed.function.max_abs_diff(&summed.function);
                assert!(d < 1e-10, "{radices:?} j={j}: {d}");
            }
        }
    }

    #[test]
    fn closed_form_cases() {
        let g = spec(&[2, 2]);
        let k4 = fejer_kernel_closed(2, &g).unwrap();
        // index = x_0 + 2 x_1
        assert!((k4.values()[0] - 2.5).norm() < 1e-14);
        assert!((k4.values()[1] - 0.5).norm() < 1e-14);
        assert!((k4.values()[2] - 1.0).norm() < 1e-14);
        assert!(k4.values()[3].norm() < 1e-14);
        let bad = fejer_kernel_closed_with(2, &g, ClosedForm::ShiftedIndex).unwrap();
        assert!(bad.function.max_abs_diff(&k4.function) > 0.1);
        assert!(fejer_kernel_closed(3, &g).is_err());
    }

    #[test]
    fn fejer_k1_and_integral() {
        let g = spec(&[3, 2, 2]);
        let k1 = fejer_kernel(1, &g).unwrap();
        assert!(k1.values().iter().all(|v| (v - 1.0).norm() < 1e-14));
        for n in 1..=g.size() {
            let k = fejer_kernel(n, &g).unwrap();
            assert!((haar_integrate(&k.function) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn norlund_routes_agree() {
        let g = spec(&[2, 3, 2, 2]);
        let weights = [
            WeightSequence::constant(g.size()).unwrap(),
            WeightSequence::log_family(1.0, 1, g.size()).unwrap(),
            WeightSequence::log_family(2.0, 2, g.size()).unwrap(),
        ];
        let table = KernelTable::new(g.clone(), g.size()).unwrap();
        for w in &weights {
            for n in 1..=g.size() {
                let a = table.norlund(n, w).unwrap();
                let b = table.norlund_abel(n, w).unwrap();
                let c = norlund_kernel_spectral(n, w, &g).unwrap();
                assert!(a.function.max_abs_diff(&b.function) < 1e-9);
                assert!(a.function.max_abs_diff(&c.function) < 1e-10);
                let expected_at_zero: f64 =
                    (1..=n).map(|k| w.q(n - k) * k as f64).sum::<f64>() / w.cumulative(n);
                assert!((a.values()[0] - expected_at_zero).norm() < 1e-10);
                assert!((haar_integrate(&a.function) - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_weights_give_fejer() {
        let g = spec(&[2, 2, 3]);
        let w = WeightSequence::constant(g.size()).unwrap();
        for n in 1..=g.size() {
            let f = norlund_kernel(n, &w, &g).unwrap();
            let k = fejer_kernel(n, &g).unwrap();
            assert!(f.function.max_abs_diff(&k.function) < 1e-12);
            let a = norlund_kernel_abel(n, &w, &g).unwrap();
            assert!(a.function.max_abs_diff(&k.function) < 1e-12);
        }
    }

    #[test]
    fn abel_reproduces_cumulative_sum() {
        let w = WeightSequence::log_family(1.5, 2, 100).unwrap();
        for n in 1..=100 {
            let lhs: f64 = (1..n)
                .map(|j| (w.q(n - j) - w.q(n - j - 1)) * j as f64)
                .sum::<f64>()
                + w.q(0) * n as f64;
            assert!((lhs - w.cumulative(n)).abs() < 1e-9 * w.cumulative(n));
        }
    }

    #[test]
    fn tail_kernels() {
        let g = spec(&[2, 2, 3, 2]);
        let w = WeightSequence::log_family(1.0, 1, g.size()).unwrap();
        let table = KernelTable::new(g.clone(), g.size()).unwrap();
        // n0 = 0 covers the whole sum
        for n in 1..=g.size() {
            let t = table.tail(n, 0, &w).unwrap();
            let f = table.norlund(n, &w).unwrap();
            assert!(t.function.max_abs_diff(&f.function) < 1e-12);
        }
        for n0 in 0..g.level() {
            let start = g.m(n0);
            let single = table.tail(start, n0, &w).unwrap();
            let d = table.dirichlet(start);
            for (v, dv) in single.values().iter().zip(d) {
                assert!((v - dv * w.q(0) / w.cumulative(start)).norm() < 1e-12);
            }
            for n in start..=g.size() {
                let a = table.tail(n, n0, &w).unwrap();
                let b = tail_kernel_spectral(n, n0, &w, &g).unwrap();
                assert!(
                    a.function.max_abs_diff(&b.function) < 1e-10,
                    "n0={n0} n={n}"
                );
            }
        }
        assert!(tail_kernel(1, 1, &w, &g).is_err());
        assert!(tail_kernel(24, 4, &w, &g).is_err());
    }
}
