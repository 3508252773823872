//! Mixed-radix arithmetic on the level-`N` truncation of a bounded Vilenkin
//! group.
//!
//! A point `x = (x_0, ..., x_{N-1})` with `0 <= x_k < m_k` is identified with
//! the cell index `sum_k x_k * M_k`, where `M_0 = 1` and `M_{k+1} = m_k M_k`.
//! The same encoding is used for frequencies, so a single bijection serves
//! both points and character indices. Every cell carries Haar measure
//! `1 / M_N`.
//!
//! The interval `I_j = I_j(0)` is the set of points whose first `j` digits
//! vanish; in index space this is exactly the set of multiples of `M_j`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::spectral::CylinderFunction;

/// Largest radix accepted. Bounded Vilenkin groups require `sup m_k < inf`.
pub const MAX_RADIX: usize = 64;

/// The radix sequence `m_0..m_{N-1}` and its cumulative products.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupSpecRepr", into = "GroupSpecRepr")]
pub struct GroupSpec {
    radices: Vec<usize>,
    cumprod: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GroupSpecRepr {
    radices: Vec<usize>,
}

impl TryFrom<GroupSpecRepr> for GroupSpec {
    type Error = Error;

    fn try_from(repr: GroupSpecRepr) -> Result<Self> {
        let level = repr.radices.len();
        GroupSpec::new(&repr.radices, level)
    }
}

impl From<GroupSpec> for GroupSpecRepr {
    fn from(spec: GroupSpec) -> Self {
        GroupSpecRepr {
            radices: spec.radices,
        }
    }
}

impl GroupSpec {
    /// Builds the level-`level` group from the first `level` entries of
    /// `radices`. Extra radices are ignored.
    pub fn new(radices: &[usize], level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        if radices.len() < level {
            return Err(Error::LevelTooLarge {
                level,
                supplied: radices.len(),
            });
        }
        let radices = radices[..level].to_vec();
        let mut cumprod = Vec::with_capacity(level + 1);
        cumprod.push(1usize);
        for (position, &radix) in radices.iter().enumerate() {
            if !(2..=MAX_RADIX).contains(&radix) {
                return Err(Error::InvalidRadix {
                    position,
                    radix,
                    max: MAX_RADIX,
                });
            }
            let next = cumprod[position]
                .checked_mul(radix)
                .ok_or(Error::Overflow)?;
            cumprod.push(next);
        }
        Ok(Self { radices, cumprod })
    }

    /// Parses a comma-separated radix list such as `"2,3,4,2"`. When `level`
    /// is `None` the whole list is used.
    pub fn parse(radix_list: &str, level: Option<usize>) -> Result<Self> {
        let radices = parse_radix_list(radix_list)?;
        let level = level.unwrap_or(radices.len());
        Self::new(&radices, level)
    }

    /// The dyadic (Walsh-Paley) group of the given level.
    pub fn dyadic(level: usize) -> Result<Self> {
        Self::new(&vec![2; level], level)
    }

    /// The same group cut down to a smaller level.
    pub fn truncate(&self, level: usize) -> Result<Self> {
        if level > self.level() {
            return Err(out_of_range("level", level, format!("<= {}", self.level())));
        }
        Self::new(&self.radices, level)
    }

    pub fn level(&self) -> usize {
        self.radices.len()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn radix(&self, k: usize) -> usize {
        self.radices[k]
    }

    /// `M_0, ..., M_N`.
    pub fn cumprod(&self) -> &[usize] {
        &self.cumprod
    }

    /// `M_j` for `0 <= j <= N`.
    pub fn m(&self, j: usize) -> usize {
        self.cumprod[j]
    }

    /// Number of level-`N` cells, `M_N`.
    pub fn size(&self) -> usize {
        self.cumprod[self.level()]
    }

    pub fn max_radix(&self) -> usize {
        self.radices.iter().copied().max().unwrap_or(2)
    }

    /// Short human-readable description, e.g. `m=2,3,4;N=3`.
    pub fn describe(&self) -> String {
        format!("m={};N={}", self, self.level())
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.size() {
            return Err(out_of_range("index", n, format!("< {}", self.size())));
        }
        Ok(())
    }

    /// Mixed-radix digits of `n`, least significant first.
    pub fn index_to_digits(&self, n: usize) -> Result<Vec<usize>> {
        self.check_index(n)?;
        let mut rest = n;
        Ok(self
            .radices
            .iter()
            .map(|&m| {
                let d = rest % m;
                rest /= m;
                d
            })
            .collect())
    }

    pub fn digits_to_index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.level() {
            return Err(Error::LengthMismatch {
                expected: self.level(),
                actual: digits.len(),
            });
        }
        let mut index = 0;
        for (position, (&digit, &radix)) in digits.iter().zip(&self.radices).enumerate() {
            if digit >= radix {
                return Err(Error::InvalidDigit {
                    position,
                    digit,
                    radix,
                });
            }
            index += digit * self.cumprod[position];
        }
        Ok(index)
    }

    /// The point whose cell index is `index`.
    pub fn point(&self, index: usize) -> Result<Point> {
        Ok(Point {
            digits: self.index_to_digits(index)?,
        })
    }

    pub fn point_from_digits(&self, digits: Vec<usize>) -> Result<Point> {
        self.digits_to_index(&digits)?;
        Ok(Point { digits })
    }

    pub fn zero_point(&self) -> Point {
        Point {
            digits: vec![0; self.level()],
        }
    }

    pub fn index_of(&self, point: &Point) -> Result<usize> {
        self.digits_to_index(&point.digits)
    }

    /// Group subtraction `x - t`, coordinatewise modulo `m_k`.
    pub fn point_sub(&self, x: &Point, t: &Point) -> Result<Point> {
        self.digits_to_index(&x.digits)?;
        self.digits_to_index(&t.digits)?;
        let digits = x
            .digits
            .iter()
            .zip(&t.digits)
            .zip(&self.radices)
            .map(|((&a, &b), &m)| (a + m - b) % m)
            .collect();
        Ok(Point { digits })
    }

    /// Group addition `x + t`.
    pub fn point_add(&self, x: &Point, t: &Point) -> Result<Point> {
        let neg = self.point_sub(&self.zero_point(), t)?;
        self.point_sub(x, &neg)
    }

    /// `x - t` on cell indices. Both indices must be `< M_N`.
    pub fn sub_index(&self, x: usize, t: usize) -> usize {
        debug_assert!(x < self.size() && t < self.size());
        let (mut x, mut t) = (x, t);
        let mut out = 0;
        for (k, &m) in self.radices.iter().enumerate() {
            let d = (x % m + m - t % m) % m;
            out += d * self.cumprod[k];
            x /= m;
            t /= m;
        }
        out
    }

    /// `|n|`: the largest `j` with `n_j != 0`, i.e. the unique `j` with
    /// `M_j <= n < M_{j+1}`. `n = M_N` is accepted and maps to `N`.
    pub fn leading_index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.size() {
            return Err(out_of_range("n", n, format!("in 1..={}", self.size())));
        }
        Ok(self.cumprod.iter().rposition(|&mj| mj <= n).unwrap_or(0))
    }

    /// Whether the level-`N` cell `index` lies in `I_j(0)`.
    pub fn in_interval(&self, j: usize, index: usize) -> bool {
        index.is_multiple_of(self.cumprod[j])
    }

    /// The decomposition of the complement of `I_N` into the cells
    /// `I_N^{k,l}`.
    pub fn annulus_partition(&self) -> Vec<AnnulusCell> {
        self.annulus_partition_at(self.level())
            .expect("own level is always admissible")
    }

    /// The decomposition of the complement of `I_level` into the cells
    /// `I_level^{k,l}`, `0 <= k < l <= level`, with members listed as
    /// level-`N` cell indices.
    ///
    /// A point belongs to `I_level^{k,l}` when `k` is the position of its
    /// first non-zero digit and `l` the position of the next one among
    /// `k+1..level`, or `l = level` when digits `k+1..level-1` all vanish.
    pub fn annulus_partition_at(&self, level: usize) -> Result<Vec<AnnulusCell>> {
        if level == 0 || level > self.level() {
            return Err(out_of_range(
                "level",
                level,
                format!("in 1..={}", self.level()),
            ));
        }
        let mut cells: Vec<AnnulusCell> = (0..level)
            .flat_map(|k| {
                (k + 1..=level).map(move |l| AnnulusCell {
                    k,
                    l,
                    members: Vec::new(),
                })
            })
            .collect();
        let slot = |k: usize, l: usize| -> usize {
            // cells are laid out by k, each k owning level - k entries
            (0..k).map(|i| level - i).sum::<usize>() + (l - k - 1)
        };
        for index in 0..self.size() {
            let mut rest = index;
            let mut first = None;
            let mut second = None;
            for (pos, &m) in self.radices[..level].iter().enumerate() {
                let d = rest % m;
                rest /= m;
                if d != 0 {
                    if first.is_none() {
                        first = Some(pos);
                    } else {
                        second = Some(pos);
                        break;
                    }
                }
            }
            if let Some(k) = first {
                let l = second.unwrap_or(level);
                cells[slot(k, l)].members.push(index);
            }
        }
        Ok(cells)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.radices.iter().map(|m| m.to_string()).collect();
        f.write_str(&list.join(","))
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, None)
    }
}

/// Parses `"2,3,4"` into radices without validating them.
pub fn parse_radix_list(radix_list: &str) -> Result<Vec<usize>> {
    let trimmed = radix_list.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty radix list".into()));
    }
    trimmed
        .split(',')
        .enumerate()
        .map(|(i, item)| {
            item.trim().parse::<usize>().map_err(|_| {
                Error::Parse(format!(
                    "radix #{} ({:?}) is not an integer",
                    i,
                    item.trim()
                ))
            })
        })
        .collect()
}

/// A point of the truncated group, stored as its digit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    digits: Vec<usize>,
}

impl Point {
    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn digit(&self, k: usize) -> usize {
        self.digits[k]
    }
}

/// One cell `I_N^{k,l}` of the annulus decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnulusCell {
    pub k: usize,
    pub l: usize,
    /// Level-`N` cell indices, ascending.
    pub members: Vec<usize>,
}

/// Haar integral of a cylinder function: the mean of its cell values.
pub fn haar_integrate(f: &CylinderFunction) -> Complex64 {
    let values = f.values();
    values.iter().sum::<Complex64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn cumulative_products() {
        let g = GroupSpec::new(&[2, 2, 2], 3).unwrap();
        assert_eq!(g.cumprod(), &[1, 2, 4, 8]);
        let g = GroupSpec::new(&[2, 3, 4], 3).unwrap();
        assert_eq!(g.cumprod(), &[1, 2, 6, 24]);
        assert_eq!(g.size(), 24);
    }

    #[test]
    fn rejects_bad_groups() {
        assert!(matches!(
            GroupSpec::new(&[1, 2], 2),
            Err(Error::InvalidRadix { position: 0, .. })
        ));
        assert!(matches!(
            GroupSpec::new(&[2, 2], 3),
            Err(Error::LevelTooLarge { .. })
        ));
        assert!(matches!(GroupSpec::new(&[2], 0), Err(Error::ZeroLevel)));
        assert!(GroupSpec::new(&[MAX_RADIX + 1], 1).is_err());
        let huge = vec![64usize; 200];
        assert!(matches!(GroupSpec::new(&huge, 200), Err(Error::Overflow)));
    }

    #[test]
    fn parse_list() {
        let g = GroupSpec::parse("2, 3,4,2", None).unwrap();
        assert_eq!(g.radices(), &[2, 3, 4, 2]);
        let g = GroupSpec::parse("2,3,4,2", Some(2)).unwrap();
        assert_eq!(g.size(), 6);
        assert!(GroupSpec::parse("2,x", None).is_err());
        assert!(GroupSpec::parse("", None).is_err());
    }

    #[test]
    fn digits() {
        let g = GroupSpec::new(&[2, 3, 4], 3).unwrap();
        assert_eq!(g.index_to_digits(5).unwrap(), vec![1, 2, 0]);
        assert_eq!(g.index_to_digits(0).unwrap(), vec![0, 0, 0]);
        assert_eq!(g.index_to_digits(23).unwrap(), vec![1, 2, 3]);
        assert!(g.index_to_digits(24).is_err());
        for n in [0, 5, 23] {
            let d = g.index_to_digits(n).unwrap();
            assert_eq!(g.digits_to_index(&d).unwrap(), n);
        }
        assert!(matches!(
            g.digits_to_index(&[0, 3, 0]),
            Err(Error::InvalidDigit { position: 1, .. })
        ));
    }

    #[test]
    fn subtraction() {
        let g = GroupSpec::new(&[2, 3], 2).unwrap();
        let x = g.point_from_digits(vec![1, 2]).unwrap();
        let t = g.point_from_digits(vec![0, 1]).unwrap();
        assert_eq!(g.point_sub(&x, &t).unwrap().digits(), &[1, 1]);
        let zero = g.zero_point();
        let t = g.point_from_digits(vec![1, 2]).unwrap();
        assert_eq!(g.point_sub(&zero, &t).unwrap().digits(), &[1, 1]);
        assert_eq!(g.point_sub(&x, &x).unwrap(), zero);
    }

    #[test]
    fn group_axioms_exhaustive() {
        for radices in [
            vec![2, 3],
            vec![2, 2, 2],
            vec![4, 4],
            vec![3, 5, 2],
            vec![2, 3, 2, 3],
        ] {
            let g = GroupSpec::new(&radices, radices.len()).unwrap();
            assert!(g.size() <= 64);
            let pts: Vec<Point> = (0..g.size()).map(|i| g.point(i).unwrap()).collect();
            for a in &pts {
                let na = g.point_sub(&g.zero_point(), a).unwrap();
                assert_eq!(g.point_add(a, &na).unwrap(), g.zero_point());
                for b in &pts {
                    let ia = g.index_of(a).unwrap();
                    let ib = g.index_of(b).unwrap();
                    let d = g.point_sub(a, b).unwrap();
                    assert_eq!(g.sub_index(ia, ib), g.index_of(&d).unwrap());
                    assert_eq!(g.point_add(a, b).unwrap(), g.point_add(b, a).unwrap());
                    for c in &pts {
                        let l = g.point_add(&g.point_add(a, b).unwrap(), c).unwrap();
                        let r = g.point_add(a, &g.point_add(b, c).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn leading() {
        let g = GroupSpec::new(&[2, 3, 4], 3).unwrap();
        assert_eq!(g.leading_index(1).unwrap(), 0);
        assert_eq!(g.leading_index(7).unwrap(), 2);
        for k in 0..=3 {
            assert_eq!(g.leading_index(g.m(k)).unwrap(), k);
        }
        assert!(g.leading_index(0).is_err());
        assert!(g.leading_index(25).is_err());
        // agrees with the digit definition
        for n in 1..24 {
            let d = g.index_to_digits(n).unwrap();
            let top = d.iter().rposition(|&x| x != 0).unwrap();
            assert_eq!(g.leading_index(n).unwrap(), top);
        }
    }

    #[test]
    fn partition_small_dyadic() {
        let g = GroupSpec::dyadic(2).unwrap();
        let cells = g.annulus_partition();
        let find = |k, l| cells.iter().find(|c| c.k == k && c.l == l).unwrap();
        // index = x_0 + 2 x_1
        assert_eq!(find(0, 1).members, vec![3]);
        assert_eq!(find(0, 2).members, vec![1]);
        assert_eq!(find(1, 2).members, vec![2]);
        assert_eq!(cells.iter().map(|c| c.members.len()).sum::<usize>(), 3);
        assert!(cells.iter().all(|c| c.k < c.l));
    }

    fn partition_is_cover(g: &GroupSpec, level: usize) {
        let cells = g.annulus_partition_at(level).unwrap();
        let mut seen = BTreeSet::new();
        for c in &cells {
            assert!(c.k < c.l && c.l <= level);
            for &x in &c.members {
                assert!(seen.insert(x), "cell {x} appears twice");
                let d = g.index_to_digits(x).unwrap();
                assert!(d[..c.k].iter().all(|&v| v == 0));
                assert_ne!(d[c.k], 0);
                assert!(d[c.k + 1..c.l].iter().all(|&v| v == 0));
                if c.l < level {
                    assert_ne!(d[c.l], 0);
                }
            }
        }
        let complement: BTreeSet<usize> = (0..g.size())
            .filter(|&x| !g.in_interval(level, x))
            .collect();
        assert_eq!(seen, complement);
    }

    #[test]
    fn partition_covers_complement() {
        for radices in [
            vec![2, 2, 2, 2],
            vec![3, 2, 4],
            vec![5, 5],
            vec![2, 3, 2, 3, 2],
        ] {
            let g = GroupSpec::new(&radices, radices.len()).unwrap();
            for level in 1..=g.level() {
                partition_is_cover(&g, level);
            }
            assert_eq!(
                g.annulus_partition()
                    .iter()
                    .map(|c| c.members.len())
                    .sum::<usize>(),
                g.size() - 1
            );
        }
    }

    #[test]
    fn haar_measure() {
        let g = std::sync::Arc::new(GroupSpec::new(&[2, 3], 2).unwrap());
        let one = CylinderFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        assert!((haar_integrate(&one) - 1.0).norm() < 1e-15);
        let ind = CylinderFunction::indicator_interval(g, 1).unwrap();
        assert!((haar_integrate(&ind) - 0.5).norm() < 1e-15);
    }
}
