//! Design parameters, admissibility, columns of `V_{v,k}`, pair indexing and
//! the `Z` map.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{param, Result};

/// Largest `v` accepted by operations that enumerate columns or build `d x d`
/// matrices (`d <= 66`).
pub const MAX_V: u32 = 12;

/// Rows `v`, column weight `k`, column count `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DesignParams {
    pub v: u32,
    pub k: u32,
    pub t: u64,
}

impl DesignParams {
    pub fn new(v: u32, k: u32, t: u64) -> Result<Self> {
        check_vk(v, k)?;
        Ok(Self { v, k, t })
    }

    pub fn derive(&self) -> DerivedParams {
        derive_params(self)
    }
}

/// Exact derived quantities; nothing here is rounded.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub d: usize,
    pub r: BigRational,
    pub lambda: BigRational,
    pub admissible: bool,
}

impl DerivedParams {
    pub fn r_is_integer(&self) -> bool {
        self.r.is_integer()
    }

    pub fn lambda_is_integer(&self) -> bool {
        self.lambda.is_integer()
    }

    /// `λ` as an integer when integral and small enough.
    pub fn lambda_u64(&self) -> Option<u64> {
        if self.lambda.is_integer() {
            self.lambda.to_integer().to_u64()
        } else {
            None
        }
    }

    pub fn r_u64(&self) -> Option<u64> {
        if self.r.is_integer() {
            self.r.to_integer().to_u64()
        } else {
            None
        }
    }
}

/// Validates `v >= 2` and `1 <= k <= v - 1`.
pub fn check_vk(v: u32, k: u32) -> Result<()> {
    if v < 2 {
        return param(format!("v must be at least 2, got {v}"));
    }
    if k < 1 || k >= v {
        return param(format!("k must satisfy 1 <= k <= v-1, got k={k}, v={v}"));
    }
    Ok(())
}

/// As [`check_vk`], plus the `v <= 12` cap for exhaustive work.
pub fn check_exhaustive(v: u32, k: u32) -> Result<()> {
    check_vk(v, k)?;
    if v > MAX_V {
        return param(format!("v = {v} exceeds the supported maximum {MAX_V}"));
    }
    Ok(())
}

pub fn pair_count(v: u32) -> usize {
    (v as usize) * (v as usize - 1) / 2
}

pub fn derive_params(p: &DesignParams) -> DerivedParams {
    let v = BigInt::from(p.v);
    let k = BigInt::from(p.k);
    let t = BigInt::from(p.t);
    let r = BigRational::new(&t * &k, v.clone());
    let lambda = BigRational::new(&t * &k * (&k - 1), &v * (&v - 1));
    let admissible = r.is_integer() && lambda.is_integer();
    DerivedParams {
        d: pair_count(p.v),
        r,
        lambda,
        admissible,
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(n, k)` in machine width; callers keep `n` small.
pub fn binomial_u64(n: u64, k: u64) -> u64 {
    binomial(n, k).to_u64().expect("binomial fits in u64")
}

/// `ln C(n, k)`, accurate for any size.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    crate::scalar::ln_bigint(&binomial(n, k).into())
}

/// `C_j = C(k, j) / C(v, j)`; zero for `j > k`.
pub fn c_coeff(v: u32, k: u32, j: u32) -> Result<BigRational> {
    check_vk(v, k)?;
    if j < 1 || j > v {
        return param(format!("j must satisfy 1 <= j <= v, got j={j}, v={v}"));
    }
    Ok(BigRational::new(
        BigInt::from(binomial(k.into(), j.into())),
        BigInt::from(binomial(v.into(), j.into())),
    ))
}

/// Unordered pair `{a, b}` of rows, 1-based, with its lexicographic rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairIndex {
    pub a: u32,
    pub b: u32,
    pub rank: usize,
}

/// Lexicographic rank of `{a, b}` (1-based rows, `a < b`).
pub fn pair_rank(v: u32, a: u32, b: u32) -> Result<usize> {
    if !(1 <= a && a < b && b <= v) {
        return param(format!("pair ({a},{b}) invalid for v={v}"));
    }
    Ok(rank0(v as usize, (a - 1) as usize, (b - 1) as usize))
}

/// Inverse of [`pair_rank`].
pub fn pair_unrank(v: u32, rank: usize) -> Result<PairIndex> {
    let d = pair_count(v);
    if rank >= d {
        return param(format!("pair rank {rank} out of range for d={d}"));
    }
    let n = v as usize;
    let mut start = 0;
    for a in 0..n - 1 {
        let row = n - 1 - a;
        if rank < start + row {
            let b = a + 1 + (rank - start);
            return Ok(PairIndex {
                a: a as u32 + 1,
                b: b as u32 + 1,
                rank,
            });
        }
        start += row;
    }
    unreachable!("rank checked against d")
}

/// Zero-based rank of zero-based rows `i < j`.
pub(crate) fn rank0(v: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < v);
    i * (2 * v - i - 1) / 2 + (j - i - 1)
}

/// All pairs as zero-based `(i, j)` in rank order.
pub fn pairs0(v: u32) -> Vec<(usize, usize)> {
    let n = v as usize;
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// A weight-`k` 0/1 column of length `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnVector {
    pub bits: Vec<u8>,
}

impl ColumnVector {
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    /// Zero-based indices of the 1 entries.
    pub fn support(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i] == 1).collect()
    }

    /// Ranks of the pairs covered by this column, ascending.
    pub fn pair_support(&self) -> Vec<usize> {
        let s = self.support();
        let v = self.bits.len();
        let mut out = Vec::with_capacity(s.len() * s.len().saturating_sub(1) / 2);
        for (x, &i) in s.iter().enumerate() {
            for &j in &s[x + 1..] {
                out.push(rank0(v, i, j));
            }
        }
        out
    }
}

/// Integer vector of length `d` indexed by pair rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
}

/// All of `V_{v,k}`: `C(v,k)` columns, ordered by support set in lexicographic
/// order (so bitwise descending; `(1,1,0,0)` comes first for `(4,2)`).
pub fn enumerate_columns(v: u32, k: u32) -> Result<Vec<ColumnVector>> {
    check_exhaustive(v, k)?;
    let n = v as usize;
    let k = k as usize;
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut bits = vec![0u8; n];
        for &i in &idx {
            bits[i] = 1;
        }
        out.push(ColumnVector { bits });
        // next combination
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for q in pos..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(out)
}

/// `Z(y)`: coordinate `{i,j}` is `y_i y_j`.
pub fn z_map(y: &ColumnVector) -> LatticePoint {
    let v = y.bits.len();
    let mut coords = vec![0i64; v * (v - 1) / 2];
    for r in y.pair_support() {
        coords[r] = 1;
    }
    LatticePoint { coords }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn derive_examples() {
        let d = DesignParams::new(4, 2, 6).unwrap().derive();
        assert_eq!(
            (d.d, d.r_u64(), d.lambda_u64(), d.admissible),
            (6, Some(3), Some(1), true)
        );

        let d = DesignParams::new(6, 3, 5).unwrap().derive();
        assert_eq!(d.r, ratio(5, 2));
        assert!(!d.admissible);

        let d = DesignParams::new(22, 7, 22).unwrap().derive();
        assert_eq!(
            (d.r_u64(), d.lambda_u64(), d.admissible),
            (Some(7), Some(2), true)
        );
    }

    #[test]
    fn rejects_bad_vk() {
        assert!(DesignParams::new(1, 1, 0).is_err());
        assert!(DesignParams::new(4, 0, 1).is_err());
        assert!(DesignParams::new(4, 4, 1).is_err());
        assert!(enumerate_columns(13, 2).is_err());
    }

    #[test]
    fn columns() {
        let c = enumerate_columns(4, 2).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c[0].bits, vec![1, 1, 0, 0]);
        assert_eq!(enumerate_columns(5, 3).unwrap().len(), 10);
        let c = enumerate_columns(4, 3).unwrap();
        assert_eq!(c.len(), 4);
        let mut missing: Vec<usize> = c
            .iter()
            .map(|y| y.bits.iter().position(|&b| b == 0).unwrap())
            .collect();
        missing.sort();
        assert_eq!(missing, vec![0, 1, 2, 3]);
    }

    #[test]
    fn z_examples() {
        let z = z_map(&ColumnVector {
            bits: vec![1, 1, 0, 0],
        });
        assert_eq!(z.coords, vec![1, 0, 0, 0, 0, 0]);
        let z = z_map(&ColumnVector {
            bits: vec![1, 0, 1, 1],
        });
        // pairs: 12 13 14 23 24 34
        assert_eq!(z.coords, vec![0, 1, 1, 0, 0, 1]);
        for y in enumerate_columns(5, 3).unwrap() {
            assert_eq!(z_map(&y).coords.iter().sum::<i64>(), 3);
        }
    }

    #[test]
    fn c_coeff_examples() {
        assert_eq!(c_coeff(4, 2, 2).unwrap(), ratio(1, 6));
        assert_eq!(c_coeff(5, 3, 3).unwrap(), ratio(1, 10));
        assert_eq!(c_coeff(5, 3, 4).unwrap(), ratio(0, 1));
        assert!(c_coeff(5, 3, 0).is_err());
        assert!(c_coeff(5, 3, 6).is_err());
    }

    #[test]
    fn pair_rank_round_trip() {
        for v in 2..=12 {
            for r in 0..pair_count(v) {
                let p = pair_unrank(v, r).unwrap();
                assert_eq!(pair_rank(v, p.a, p.b).unwrap(), r);
            }
        }
        assert_eq!(pair_rank(5, 1, 2).unwrap(), 0);
        assert_eq!(pair_rank(5, 4, 5).unwrap(), 9);
        assert!(pair_rank(5, 2, 2).is_err());
    }

    #[test]
    fn column_sum_and_complement() {
        for (v, k) in [(5u32, 3u32), (6, 2), (7, 4)] {
            let cols = enumerate_columns(v, k).unwrap();
            let mut sum = vec![0i64; pair_count(v)];
            for y in &cols {
                for (s, z) in sum.iter_mut().zip(z_map(y).coords) {
                    *s += z;
                }
            }
            let expect = binomial_u64(u64::from(v) - 2, u64::from(k) - 2) as i64;
            assert!(sum.iter().all(|&s| s == expect));

            let mut comp: Vec<_> = cols.iter().map(ColumnVector::complement).collect();
            let mut other = enumerate_columns(v, v - k).unwrap();
            comp.sort();
            other.sort();
            assert_eq!(comp, other);
        }
    }

    #[test]
    fn relations_hold() {
        for (v, k) in [(4u32, 2u32), (5, 3), (7, 3), (9, 3)] {
            for t in 0..40u64 {
                let d = DesignParams::new(v, k, t).unwrap().derive();
                if !d.admissible {
                    continue;
                }
                assert_eq!(ratio(t as i64 * k as i64, 1), &d.r * ratio(v as i64, 1));
                assert_eq!(&d.r * ratio(k as i64 - 1, 1), &d.lambda * ratio(v as i64 - 1, 1));
            }
        }
    }
}
