//! Exact scalars, q-special functions, multi-indices and sector bases.
//!
//! Every quantity in the crate is an exact [`Scalar`] (an arbitrary precision
//! rational, always kept in lowest terms by `num-rational`). The q-Pochhammer
//! symbol, q-binomial and the bilinear exponent `phi` live here together with
//! the multi-index and sector types shared by the other modules.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Index};
use std::str::FromStr;

/// Exact rational number. Reduced after every arithmetic operation.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn rat(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or an integer string. Floats are rejected.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let t = s.trim();
    if t.contains(['.', 'e', 'E']) {
        return Err(Error::Parse(format!(
            "'{s}' is not an exact rational (use p/q)"
        )));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("'{s}': zero denominator")));
        }
        Ok(Scalar::new(n, d))
    } else {
        let n = BigInt::from_str(t).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
        Ok(Scalar::from_integer(n))
    }
}

/// Float image of an exact value, for reporting only.
pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range: scale down both
        let n = x.numer();
        let d = x.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `q^e` for any integer `e`, with `0^0 = 1`.
///
/// Panics on `0^e` with `e < 0`.
pub fn qpow(q: &Scalar, e: i64) -> Scalar {
    if e == 0 {
        return Scalar::one();
    }
    if q.is_zero() {
        assert!(e > 0, "zero raised to a negative power");
        return Scalar::zero();
    }
    let p = num_traits::pow(q.clone(), e.unsigned_abs() as usize);
    if e > 0 {
        p
    } else {
        p.recip()
    }
}

/// `prod_{j=0}^{m-1} (1 - z * base^j)`.
pub fn qpoch_base(z: &Scalar, base: &Scalar, m: u32) -> Scalar {
    let mut acc = Scalar::one();
    let mut zb = z.clone();
    for _ in 0..m {
        acc *= Scalar::one() - &zb;
        if acc.is_zero() {
            return acc;
        }
        zb *= base;
    }
    acc
}

/// q-Pochhammer symbol `(z; q)_m`.
pub fn qpoch(z: &Scalar, m: u32, q: &Scalar) -> Scalar {
    qpoch_base(z, q, m)
}

/// q-binomial coefficient; zero unless `0 <= k <= m`.
///
/// At `q = 1` this returns the ordinary binomial coefficient. Other roots of
/// unity are outside the supported parameter range.
pub fn qbinom(m: u32, k: i64, q: &Scalar) -> Scalar {
    if k < 0 || k > m as i64 {
        return Scalar::zero();
    }
    let k = k as u32;
    let k = k.min(m - k);
    if q.is_one() {
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * BigInt::from(m - i) / BigInt::from(i + 1);
        }
        return Scalar::from_integer(acc);
    }
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    for i in 1..=k {
        num *= Scalar::one() - qpow(q, (m - k + i) as i64);
        den *= Scalar::one() - qpow(q, i as i64);
    }
    num / den
}

/// `sum_{i<j} beta_i gamma_j` over signed arrays.
///
/// Accepts `gamma.len() == beta.len()` or `gamma.len() == beta.len() + 1`.
pub fn phi_signed(beta: &[i64], gamma: &[i64]) -> Result<i64> {
    if gamma.len() != beta.len() && gamma.len() != beta.len() + 1 {
        return Err(Error::LengthMismatch(format!(
            "phi needs |gamma| in {{|beta|, |beta|+1}}, got {} and {}",
            beta.len(),
            gamma.len()
        )));
    }
    let mut tail: i64 = gamma.iter().sum();
    let mut acc = 0;
    for (i, b) in beta.iter().enumerate() {
        tail -= gamma[i];
        acc += b * tail;
    }
    Ok(acc)
}

/// Local occupation `(alpha_1, ..., alpha_n)` by species.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit vector `e_i` (0-based species index).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|alpha|`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn signed(&self) -> Vec<i64> {
        self.0.iter().map(|&a| a as i64).collect()
    }

    /// Partial order: `self <= other` iff `other - self` is entrywise nonnegative.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Entrywise difference as signed integers.
    pub fn diff(&self, other: &MultiIndex) -> Vec<i64> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    /// Drops the first entry.
    pub fn bar(&self) -> Result<MultiIndex> {
        if self.0.is_empty() {
            return Err(Error::EmptyIndex);
        }
        Ok(MultiIndex(self.0[1..].to_vec()))
    }

    /// Drops the last entry.
    pub fn underline(&self) -> Result<MultiIndex> {
        if self.0.is_empty() {
            return Err(Error::EmptyIndex);
        }
        Ok(MultiIndex(self.0[..self.0.len() - 1].to_vec()))
    }

    /// Tail sum `alpha_{i+1} + ... + alpha_n` for `1 <= i <= n-1` (1-based).
    pub fn alpha_plus(&self, i: usize) -> Result<u32> {
        let n = self.len();
        if i == 0 || i + 1 > n {
            return Err(Error::IndexOutOfRange(format!(
                "alpha_plus index {i} outside 1..={}",
                n.saturating_sub(1)
            )));
        }
        Ok(self.0[i..].iter().sum())
    }

    /// All `gamma` with `0 <= gamma <= self`, in lexicographic order.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.len())];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=a).map(move |v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// All multi-indices of length `n` with `|alpha| = total`.
    pub fn with_total(n: usize, total: u32) -> Vec<MultiIndex> {
        compositions(total, n).into_iter().map(MultiIndex).collect()
    }

    /// All multi-indices of length `n` with `|alpha| <= max_total`.
    pub fn up_to_total(n: usize, max_total: u32) -> Vec<MultiIndex> {
        (0..=max_total)
            .flat_map(|t| MultiIndex::with_total(n, t))
            .collect()
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), rhs.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Index<usize> for MultiIndex {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `phi(beta, gamma) = sum_{i<j} beta_i gamma_j`.
pub fn phi_exp(beta: &MultiIndex, gamma: &MultiIndex) -> Result<i64> {
    phi_signed(&beta.signed(), &gamma.signed())
}

/// `(drop_first, drop_last)`.
pub fn bar_underline(alpha: &MultiIndex) -> Result<(MultiIndex, MultiIndex)> {
    Ok((alpha.bar()?, alpha.underline()?))
}

pub fn alpha_plus(alpha: &MultiIndex, i: usize) -> Result<u32> {
    alpha.alpha_plus(i)
}

/// Weak compositions of `total` into `parts` nonnegative parts, lexicographic.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A configuration `(sigma_1, ..., sigma_L)` of the periodic chain.
pub type SectorState = Vec<MultiIndex>;

/// Ordered basis of the sector with fixed species content.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    sites: usize,
    content: MultiIndex,
    states: Vec<SectorState>,
    index: HashMap<SectorState, usize>,
}

impl SectorBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn content(&self) -> &MultiIndex {
        &self.content
    }

    pub fn states(&self) -> &[SectorState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn position(&self, state: &[MultiIndex]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Every species count is at least one.
    pub fn is_basic(&self) -> bool {
        self.content.entries().iter().all(|&m| m >= 1)
    }

    /// `prod_a C(m_a + L - 1, L - 1)`.
    pub fn expected_size(&self) -> usize {
        self.content
            .entries()
            .iter()
            .map(|&m| binomial(m as usize + self.sites - 1, self.sites - 1))
            .product()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Human label of a sector state in multiset notation, e.g. `"0|123"` style
/// is avoided in favour of explicit tuples: `"(0,0,0);(1,1,1)"`.
pub fn state_label(state: &[MultiIndex]) -> String {
    state
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// All `L`-tuples of local states summing to `content`, sorted
/// lexicographically by their concatenated entries.
pub fn enumerate_sector(n: usize, sites: usize, content: &MultiIndex) -> Result<SectorBasis> {
    if n == 0 || sites == 0 {
        return Err(Error::InvalidParameter(format!(
            "sector needs n >= 1 and L >= 1 (got n={n}, L={sites})"
        )));
    }
    if content.len() != n {
        return Err(Error::LengthMismatch(format!(
            "content {content} has length {}, expected n={n}",
            content.len()
        )));
    }
    // per species: how its m_a particles are spread over the sites
    let spreads: Vec<Vec<Vec<u32>>> = content
        .entries()
        .iter()
        .map(|&m| compositions(m, sites))
        .collect();
    let mut states: Vec<SectorState> = vec![vec![MultiIndex::zeros(n); sites]];
    for (a, spread) in spreads.iter().enumerate() {
        let mut next = Vec::with_capacity(states.len() * spread.len());
        for s in &states {
            for comp in spread {
                let mut t = s.clone();
                for (site, &c) in comp.iter().enumerate() {
                    t[site].0[a] = c;
                }
                next.push(t);
            }
        }
        states = next;
    }
    states.sort_by(|x, y| {
        let fx = x.iter().flat_map(|m| m.0.iter());
        let fy = y.iter().flat_map(|m| m.0.iter());
        fx.cmp(fy)
    });
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(SectorBasis {
        n,
        sites,
        content: content.clone(),
        states,
        index,
    })
}

/// Sign-aware check used by regime validation.
pub fn in_open_unit(x: &Scalar) -> bool {
    x.is_positive() && x < &Scalar::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpoch_examples() {
        assert_eq!(qpoch(&rat(7, 3), 0, &rat(1, 5)), int(1));
        assert_eq!(qpoch(&rat(1, 2), 2, &rat(1, 2)), rat(3, 8));
        assert_eq!(qpoch(&int(1), 3, &rat(2, 9)), int(0));
    }

    #[test]
    fn qbinom_examples() {
        let q = rat(1, 3);
        assert_eq!(qbinom(2, 3, &q), int(0));
        assert_eq!(qbinom(2, -1, &q), int(0));
        assert_eq!(qbinom(5, 0, &q), int(1));
        assert_eq!(qbinom(2, 1, &rat(1, 2)), rat(3, 2));
        assert_eq!(qbinom(6, 2, &int(1)), int(15));
    }

    #[test]
    fn qbinom_at_q_zero() {
        // (0;0)_m = 1 so every q-binomial in range is 1
        for m in 0..6 {
            for k in 0..=m as i64 {
                assert_eq!(qbinom(m, k, &int(0)), int(1));
            }
        }
    }

    #[test]
    fn phi_examples() {
        let a = MultiIndex::from([1, 0]);
        let b = MultiIndex::from([0, 1]);
        assert_eq!(phi_exp(&a, &b).unwrap(), 1);
        assert_eq!(
            phi_exp(&MultiIndex::from([3, 1, 4]), &MultiIndex::zeros(3)).unwrap(),
            0
        );
        assert_eq!(
            phi_exp(&MultiIndex::from([1, 2, 3]), &MultiIndex::from([4, 5, 6])).unwrap(),
            23
        );
    }

    #[test]
    fn phi_extended_shape() {
        // beta in Z^1, gamma in Z^2: only beta_1 gamma_2
        assert_eq!(phi_signed(&[2], &[5, 3]).unwrap(), 6);
        assert!(phi_signed(&[1, 2], &[1]).is_err());
        assert!(phi_signed(&[1], &[1, 2, 3]).is_err());
    }

    #[test]
    fn bar_underline_examples() {
        let (b, u) = bar_underline(&MultiIndex::from([5])).unwrap();
        assert!(b.is_empty() && u.is_empty());
        let (b, u) = bar_underline(&MultiIndex::from([1, 2, 3])).unwrap();
        assert_eq!(b, MultiIndex::from([2, 3]));
        assert_eq!(u, MultiIndex::from([1, 2]));
        let (b, u) = bar_underline(&MultiIndex::from([0, 7])).unwrap();
        assert_eq!(b, MultiIndex::from([7]));
        assert_eq!(u, MultiIndex::from([0]));
        assert_eq!(
            bar_underline(&MultiIndex::new(vec![])).unwrap_err(),
            Error::EmptyIndex
        );
    }

    #[test]
    fn alpha_plus_examples() {
        let a = MultiIndex::from([1, 0, 1]);
        assert_eq!(alpha_plus(&a, 1).unwrap(), 1);
        assert_eq!(alpha_plus(&a, 2).unwrap(), 1);
        let b = MultiIndex::from([4, 2, 9, 7]);
        assert_eq!(alpha_plus(&b, 3).unwrap(), 7);
        assert!(alpha_plus(&a, 0).is_err());
        assert!(alpha_plus(&a, 3).is_err());
    }

    #[test]
    fn sector_examples() {
        let s = enumerate_sector(1, 2, &MultiIndex::from([1])).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s
            .position(&[MultiIndex::from([1]), MultiIndex::from([0])])
            .is_some());
        assert!(s
            .position(&[MultiIndex::from([0]), MultiIndex::from([1])])
            .is_some());
        let s = enumerate_sector(3, 2, &MultiIndex::from([1, 1, 1])).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(
            s.states()[0],
            vec![MultiIndex::zeros(3), MultiIndex::from([1, 1, 1])]
        );
        let s = enumerate_sector(2, 2, &MultiIndex::from([1, 1])).unwrap();
        assert_eq!(s.len(), 4);
        assert!(enumerate_sector(2, 2, &MultiIndex::from([1, 1, 1])).is_err());
    }

    #[test]
    fn below_enumerates_box() {
        let b = MultiIndex::from([2, 1]).below();
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(|g| g.le(&MultiIndex::from([2, 1]))));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_scalar("3/8").unwrap(), rat(3, 8));
        assert_eq!(parse_scalar("-2").unwrap(), int(-2));
        assert_eq!(parse_scalar(" 6/4 ").unwrap(), rat(3, 2));
        assert!(parse_scalar("0.5").is_err());
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
    }

    #[test]
    fn qpow_signs() {
        assert_eq!(qpow(&rat(2, 3), -2), rat(9, 4));
        assert_eq!(qpow(&int(0), 0), int(1));
        assert_eq!(qpow(&int(0), 3), int(0));
    }
}
