//! Vilenkin characters and the Vilenkin-Fourier transform on level-`N`
//! cylinder functions.
//!
//! Coefficients are stored in natural frequency order, so the partial sum
//! `S_n f` is the inverse transform of the first `n` coefficients.
//!
//! The fast transform exploits `psi_n(x) = prod_k exp(2 pi i n_k x_k / m_k)`:
//! it is a sequence of `N` direct DFTs of sizes `m_0, ..., m_{N-1}`, each run
//! along the digit axis of stride `M_k`. Radices are bounded, so every axis
//! costs `O(M_N * m_k)`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{out_of_range, Error, Result};
use crate::group::{GroupSpec, Point};

/// A function on `G_m` that is constant on level-`N` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    spec: Arc<GroupSpec>,
    values: Vec<Complex64>,
}

impl CylinderFunction {
    /// Rejects wrong lengths and non-finite values.
    pub fn new(spec: Arc<GroupSpec>, values: Vec<Complex64>) -> Result<Self> {
        check_values(&spec, &values)?;
        Ok(Self { spec, values })
    }

    pub fn from_real(spec: Arc<GroupSpec>, values: &[f64]) -> Result<Self> {
        Self::new(
            spec,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn from_fn(spec: Arc<GroupSpec>, f: impl FnMut(usize) -> Complex64) -> Result<Self> {
        let values = (0..spec.size()).map(f).collect();
        Self::new(spec, values)
    }

    pub fn zeros(spec: Arc<GroupSpec>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); spec.size()];
        Self { spec, values }
    }

    pub fn constant(spec: Arc<GroupSpec>, c: Complex64) -> Self {
        let values = vec![c; spec.size()];
        Self { spec, values }
    }

    /// The indicator of `I_j(0)`.
    pub fn indicator_interval(spec: Arc<GroupSpec>, j: usize) -> Result<Self> {
        if j > spec.level() {
            return Err(out_of_range("j", j, format!("<= {}", spec.level())));
        }
        let mj = spec.m(j);
        Self::from_fn(spec, |x| {
            if x % mj == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// The character `psi_n` as a cylinder function.
    pub fn character(spec: Arc<GroupSpec>, n: usize) -> Result<Self> {
        let values = character_values(n, &spec)?;
        Ok(Self { spec, values })
    }

    pub(crate) fn from_parts_unchecked(spec: Arc<GroupSpec>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), spec.size());
        Self { spec, values }
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise moduli.
    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Result<Self> {
        same_spec(&self.spec, &other.spec)?;
        Ok(Self {
            spec: self.spec.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + c * b)
                .collect(),
        })
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }

    /// Sets values with modulus at most `floor` to zero.
    pub fn flush_below(mut self, floor: f64) -> Self {
        for v in self.values.iter_mut().filter(|v| v.norm() <= floor) {
            *v = Complex64::new(0.0, 0.0);
        }
        self
    }
}

/// The `M_N` Vilenkin-Fourier coefficients of a cylinder function.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    spec: Arc<GroupSpec>,
    coeffs: Vec<Complex64>,
}

/// Computed values below this fraction of their natural scale are rounding
/// noise and may be set to zero. For `p < 1` the quasi-norms are not
/// continuous at zero: a residue of `1e-15` contributes `1e-15^p`, about
/// `2e-4` at `p = 1/4`, where an exact zero contributes nothing.
pub const ROUNDING_FLOOR: f64 = 1e-12;

impl Spectrum {
    pub fn new(spec: Arc<GroupSpec>, coeffs: Vec<Complex64>) -> Result<Self> {
        check_values(&spec, &coeffs)?;
        Ok(Self { spec, coeffs })
    }

    /// The spectrum with a single unit coefficient at `n`.
    pub fn delta(spec: Arc<GroupSpec>, n: usize) -> Result<Self> {
        if n >= spec.size() {
            return Err(out_of_range("n", n, format!("< {}", spec.size())));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); spec.size()];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Ok(Self { spec, coeffs })
    }

    pub(crate) fn from_parts_unchecked(spec: Arc<GroupSpec>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), spec.size());
        Self { spec, coeffs }
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.coeffs, &other.coeffs)
    }

    /// [`ROUNDING_FLOOR`] times `sum_k |c_k|`, which bounds every partial
    /// sum and every mean of them.
    pub fn rounding_floor(&self) -> f64 {
        ROUNDING_FLOOR * self.coeffs.iter().map(|c| c.norm()).sum::<f64>()
    }

    /// The inverse transform of `multiplier[j] * coeffs[j]`; entries beyond
    /// the multiplier's length are treated as zero.
    pub fn synthesize_with(&self, multiplier: &[f64]) -> CylinderFunction {
        let mut data: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| match multiplier.get(j) {
                Some(&w) if w != 0.0 => c * w,
                _ => Complex64::new(0.0, 0.0),
            })
            .collect();
        axis_transforms(&mut data, &self.spec, 1.0);
        CylinderFunction::from_parts_unchecked(self.spec.clone(), data)
    }
}

fn check_values(spec: &GroupSpec, values: &[Complex64]) -> Result<()> {
    if values.len() != spec.size() {
        return Err(Error::LengthMismatch {
            expected: spec.size(),
            actual: values.len(),
        });
    }
    if let Some(i) = values
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

pub(crate) fn same_spec(a: &Arc<GroupSpec>, b: &Arc<GroupSpec>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::SpecMismatch)
    }
}

pub(crate) fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `exp(2 pi i * num / den)` with the numerator reduced exactly.
fn root_of_unity(num: u128, den: u128) -> Complex64 {
    let r = (num % den) as f64 / den as f64;
    Complex64::from_polar(1.0, TAU * r)
}

/// The generalized Rademacher function `r_k(x) = exp(2 pi i x_k / m_k)`.
pub fn rademacher(k: usize, x: &Point, spec: &GroupSpec) -> Result<Complex64> {
    if k >= spec.level() {
        return Err(out_of_range("k", k, format!("< {}", spec.level())));
    }
    spec.index_of(x)?;
    Ok(root_of_unity(x.digit(k) as u128, spec.radix(k) as u128))
}

/// The Vilenkin character `psi_n(x) = prod_k r_k(x)^{n_k}`.
pub fn character(n: usize, x: &Point, spec: &GroupSpec) -> Result<Complex64> {
    let nd = spec.index_to_digits(n)?;
    spec.index_of(x)?;
    Ok(character_phase(&nd, x.digits(), spec))
}

fn character_phase(n_digits: &[usize], x_digits: &[usize], spec: &GroupSpec) -> Complex64 {
    // phase = sum_k n_k x_k / m_k = (sum_k n_k x_k M_N / m_k) / M_N
    let total = spec.size() as u128;
    let mut num: u128 = 0;
    for k in 0..spec.level() {
        let scale = total / spec.radix(k) as u128;
        num = (num + (n_digits[k] * x_digits[k]) as u128 * scale) % total;
    }
    root_of_unity(num, total)
}

/// Phase numerators `sum_k n_k x_k M_N / m_k mod M_N` of `psi_n` on every
/// cell, built block by block over the digits of `x`.
fn character_phases(n: usize, spec: &GroupSpec) -> Result<Vec<u128>> {
    let nd = spec.index_to_digits(n)?;
    let total = spec.size() as u128;
    let mut phases = vec![0u128; spec.size()];
    for (k, &digit) in nd.iter().enumerate() {
        let step = (digit as u128 * (total / spec.radix(k) as u128)) % total;
        let block = spec.m(k);
        for d in 1..spec.radix(k) {
            let shift = (d as u128 * step) % total;
            for i in 0..block {
                phases[d * block + i] = (phases[i] + shift) % total;
            }
        }
    }
    Ok(phases)
}

/// `psi_n` evaluated on every cell.
pub fn character_values(n: usize, spec: &GroupSpec) -> Result<Vec<Complex64>> {
    let total = spec.size() as u128;
    Ok(character_phases(n, spec)?
        .into_iter()
        .map(|num| root_of_unity(num, total))
        .collect())
}

/// Coefficients by direct integration against every character, `O(M_N^2)`.
pub fn naive_transform(f: &CylinderFunction) -> Spectrum {
    let spec = f.spec();
    let total = spec.size() as u128;
    let roots: Vec<Complex64> = (0..total).map(|r| root_of_unity(r, total)).collect();
    let size = spec.size() as f64;
    let coeffs = (0..spec.size())
        .map(|n| {
            let phases = character_phases(n, spec).expect("n < M_N");
            f.values()
                .iter()
                .zip(&phases)
                .map(|(&v, &r)| v * roots[r as usize].conj())
                .sum::<Complex64>()
                / size
        })
        .collect();
    Spectrum::from_parts_unchecked(spec.clone(), coeffs)
}

/// Fast forward transform, `O(M_N * sum_k m_k)`.
pub fn forward_transform(f: &CylinderFunction) -> Spectrum {
    let spec = f.spec().clone();
    let mut data = f.values().to_vec();
    axis_transforms(&mut data, &spec, -1.0);
    let scale = 1.0 / spec.size() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    Spectrum::from_parts_unchecked(spec, data)
}

/// `f(x) = sum_n coeffs[n] psi_n(x)`.
pub fn inverse_transform(s: &Spectrum) -> CylinderFunction {
    let mut data = s.coeffs().to_vec();
    axis_transforms(&mut data, s.spec(), 1.0);
    CylinderFunction::from_parts_unchecked(s.spec().clone(), data)
}

/// Applies the size-`m_k` DFT along every digit axis in turn. `sign` is the
/// sign of the exponent; no normalization is applied.
fn axis_transforms(data: &mut [Complex64], spec: &GroupSpec, sign: f64) {
    let mut scratch = Vec::new();
    for k in 0..spec.level() {
        let m = spec.radix(k);
        let stride = spec.m(k);
        let block = stride * m;
        let twiddles: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, sign * TAU * j as f64 / m as f64))
            .collect();
        scratch.resize(block, Complex64::new(0.0, 0.0));
        for chunk in data.chunks_exact_mut(block) {
            for (out_digit, out) in scratch.chunks_exact_mut(stride).enumerate() {
                out.copy_from_slice(&chunk[..stride]);
                for in_digit in 1..m {
                    let w = twiddles[(out_digit * in_digit) % m];
                    let src = &chunk[in_digit * stride..(in_digit + 1) * stride];
                    for (o, &v) in out.iter_mut().zip(src) {
                        *o += w * v;
                    }
                }
            }
            chunk.copy_from_slice(&scratch);
        }
    }
}

/// `S_n f = sum_{k<n} f^(k) psi_k`.
pub fn partial_sum(s: &Spectrum, n: usize) -> Result<CylinderFunction> {
    if n > s.len() {
        return Err(out_of_range("n", n, format!("<= {}", s.len())));
    }
    let mut coeffs = s.coeffs().to_vec();
    coeffs[n..]
        .iter_mut()
        .for_each(|c| *c = Complex64::new(0.0, 0.0));
    Ok(inverse_transform(&Spectrum::from_parts_unchecked(
        s.spec().clone(),
        coeffs,
    )))
}

/// Group convolution `h(x) = integral f(t) g(x - t) dmu(t)`, computed as the
/// inverse transform of `f^ * g^`.
pub fn convolve(f: &CylinderFunction, g: &CylinderFunction) -> Result<CylinderFunction> {
    same_spec(f.spec(), g.spec())?;
    let fs = forward_transform(f);
    let gs = forward_transform(g);
    let coeffs = fs
        .coeffs()
        .iter()
        .zip(gs.coeffs())
        .map(|(a, b)| a * b)
        .collect();
    Ok(inverse_transform(&Spectrum::from_parts_unchecked(
        f.spec().clone(),
        coeffs,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::haar_integrate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(radices: &[usize]) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::new(radices, radices.len()).unwrap())
    }

    fn random_function(spec: &Arc<GroupSpec>, rng: &mut ChaCha8Rng) -> CylinderFunction {
        CylinderFunction::from_fn(spec.clone(), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap()
    }

    #[test]
    fn rademacher_values() {
        let g = spec(&[2, 3]);
        let x = g.point_from_digits(vec![1, 1]).unwrap();
        assert!((rademacher(0, &x, &g).unwrap() + 1.0).norm() < 1e-15);
        let expected = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((rademacher(1, &x, &g).unwrap() - expected).norm() < 1e-15);
        let z = g.zero_point();
        assert!((rademacher(1, &z, &g).unwrap() - 1.0).norm() < 1e-15);
        assert!(rademacher(2, &x, &g).is_err());
    }

    #[test]
    fn character_values_match_definition() {
        let g = spec(&[2, 2, 2]);
        let x = g.point_from_digits(vec![1, 1, 0]).unwrap();
        assert!((character(3, &x, &g).unwrap() - 1.0).norm() < 1e-14);
        let g = spec(&[2, 3]);
        let x = g.point_from_digits(vec![1, 2]).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * TAU / 3.0);
        assert!((character(2, &x, &g).unwrap() - expected).norm() < 1e-14);
        for n in 0..g.size() {
            for xi in 0..g.size() {
                let p = g.point(xi).unwrap();
                let mut prod = Complex64::new(1.0, 0.0);
                let nd = g.index_to_digits(n).unwrap();
                for (k, &d) in nd.iter().enumerate() {
                    prod *= rademacher(k, &p, &g).unwrap().powu(d as u32);
                }
                let v = character(n, &p, &g).unwrap();
                assert!((v - prod).norm() < 1e-13);
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn orthogonality() {
        let g = spec(&[3, 2, 4]);
        for a in 0..g.size() {
            for b in 0..g.size() {
                let pa = CylinderFunction::character(g.clone(), a).unwrap();
                let pb = CylinderFunction::character(g.clone(), b).unwrap();
                let prod: Vec<Complex64> = pa
                    .values()
                    .iter()
                    .zip(pb.values())
                    .map(|(x, y)| x * y.conj())
                    .collect();
                let ip = haar_integrate(&CylinderFunction::new(g.clone(), prod).unwrap());
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn naive_basics() {
        let g = spec(&[2, 3, 2]);
        let one = CylinderFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        let s = naive_transform(&one);
        assert!((s.coeffs()[0] - 1.0).norm() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
        let ind = CylinderFunction::indicator_interval(g.clone(), 1).unwrap();
        assert!((naive_transform(&ind).coeffs()[0] - 0.5).norm() < 1e-14);
        for j in 0..g.size() {
            let s = naive_transform(&CylinderFunction::character(g.clone(), j).unwrap());
            let d = Spectrum::delta(g.clone(), j).unwrap();
            assert!(s.max_abs_diff(&d) < 1e-13);
        }
    }

    #[test]
    fn fast_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for radices in [
            &[2, 2, 2, 2, 2][..],
            &[2, 3, 4],
            &[5, 5],
            &[3, 2, 3, 2],
            &[7],
        ] {
            let g = spec(radices);
            for _ in 0..5 {
                let f = random_function(&g, &mut rng);
                let d = forward_transform(&f).max_abs_diff(&naive_transform(&f));
                assert!(d < 1e-12, "{radices:?}: {d}");
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = spec(&[2, 3, 4, 3, 2]);
        let f = random_function(&g, &mut rng);
        let s = forward_transform(&f);
        assert!(inverse_transform(&s).max_abs_diff(&f) < 1e-12);
        let energy: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
        let l2: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / g.size() as f64;
        assert!((energy - l2).abs() < 1e-12);
    }

    #[test]
    fn inverse_edge_cases() {
        let g = spec(&[2, 3]);
        let zero = Spectrum::new(g.clone(), vec![Complex64::new(0.0, 0.0); 6]).unwrap();
        assert!(inverse_transform(&zero)
            .values()
            .iter()
            .all(|v| v.norm() == 0.0));
        let psi = inverse_transform(&Spectrum::delta(g.clone(), 4).unwrap());
        let direct = CylinderFunction::character(g, 4).unwrap();
        assert!(psi.max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn partial_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = spec(&[2, 3, 2]);
        let f = random_function(&g, &mut rng);
        let s = forward_transform(&f);
        assert!(partial_sum(&s, 0)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.norm() == 0.0));
        assert!(partial_sum(&s, g.size()).unwrap().max_abs_diff(&f) < 1e-12);
        assert!(partial_sum(&s, g.size() + 1).is_err());
        // S_{M_j} f is the average over level-j cylinders (index classes mod M_j)
        for j in 0..=g.level() {
            let mj = g.m(j);
            let sj = partial_sum(&s, mj).unwrap();
            for x in 0..g.size() {
                let members: Vec<usize> = (0..g.size()).filter(|y| y % mj == x % mj).collect();
                let avg = members.iter().map(|&y| f.values()[y]).sum::<Complex64>()
                    / members.len() as f64;
                assert!((sj.values()[x] - avg).norm() < 1e-12);
            }
        }
    }

    fn convolve_direct(f: &CylinderFunction, g: &CylinderFunction) -> CylinderFunction {
        let spec = f.spec();
        let n = spec.size();
        CylinderFunction::from_fn(spec.clone(), |x| {
            (0..n)
                .map(|t| f.values()[t] * g.values()[spec.sub_index(x, t)])
                .sum::<Complex64>()
                / n as f64
        })
        .unwrap()
    }

    #[test]
    fn convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = spec(&[3, 2, 2]);
        let f = random_function(&g, &mut rng);
        let h = random_function(&g, &mut rng);
        let fast = convolve(&f, &h).unwrap();
        assert!(fast.max_abs_diff(&convolve_direct(&f, &h)) < 1e-12);
        assert!(fast.max_abs_diff(&convolve(&h, &f).unwrap()) < 1e-12);
        let delta = CylinderFunction::from_fn(g.clone(), |x| {
            Complex64::new(if x == 0 { g.size() as f64 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(convolve(&f, &delta).unwrap().max_abs_diff(&f) < 1e-12);
        let other = CylinderFunction::zeros(spec(&[2, 2]));
        assert!(matches!(convolve(&f, &other), Err(Error::SpecMismatch)));
    }

    #[test]
    fn rejects_bad_values() {
        let g = spec(&[2, 2]);
        assert!(matches!(
            CylinderFunction::from_real(g.clone(), &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            CylinderFunction::from_real(g, &[1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(1))
        ));
    }
}
