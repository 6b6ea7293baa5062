//! Truncated q-boson Fock spaces and sparse operators on them.
//!
//! A [`SlotLayout`] names the tensor slots `(i, j)`, `1 <= i <= j <= n-1`,
//! in the order `(1,1), (1,2), (2,2), (1,3), ...` and fixes a per-slot cutoff
//! `D`. Basis states are occupation tuples with every entry in `0..=D`,
//! encoded in mixed radix `D + 1` with slot 0 least significant.
//!
//! On each slot `b|m> = |m+1>` (and `b|D> = 0`), `c|m> = (1-q^m)|m-1>`,
//! `k|m> = q^m|m>`. Identities that move occupations near the cutoff are only
//! exact on a truncation-safe sub-block, see [`SparseOperator::safe_block`].

use crate::error::{Error, Result};
use crate::qkernel::{qpoch, qpow, Scalar};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Slot label `(i, j)`.
pub type Slot = (usize, usize);

/// Occupation tuple, one entry per slot.
pub type Occupation = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotLayout {
    n: usize,
    slots: Vec<Slot>,
    cutoff: usize,
}

impl SlotLayout {
    /// The `n(n-1)/2` slots of the rank-`n` construction.
    pub fn triangular(n: usize, cutoff: usize) -> Self {
        let mut slots = Vec::new();
        for j in 1..n {
            for i in 1..=j {
                slots.push((i, j));
            }
        }
        SlotLayout { n, slots, cutoff }
    }

    /// `count` independent slots labelled `(1,1), (2,2), ...`.
    pub fn independent(count: usize, cutoff: usize) -> Self {
        SlotLayout {
            n: count + 1,
            slots: (1..=count).map(|i| (i, i)).collect(),
            cutoff,
        }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        SlotLayout {
            cutoff,
            ..self.clone()
        }
    }

    /// Number of basis states `(D + 1)^slots`.
    pub fn dim(&self) -> usize {
        (self.cutoff + 1).pow(self.slots.len() as u32)
    }

    pub fn slot_index(&self, slot: Slot) -> Result<usize> {
        self.slots
            .iter()
            .position(|&s| s == slot)
            .ok_or(Error::UnknownSlot(slot.0, slot.1))
    }

    fn radix(&self) -> u32 {
        self.cutoff as u32 + 1
    }

    fn stride(&self, slot: usize) -> u32 {
        self.radix().pow(slot as u32)
    }

    pub fn encode(&self, occ: &[u8]) -> u32 {
        occ.iter()
            .rev()
            .fold(0u32, |acc, &m| acc * self.radix() + m as u32)
    }

    pub fn decode(&self, state: u32) -> Occupation {
        let r = self.radix();
        let mut s = state;
        (0..self.slots.len())
            .map(|_| {
                let m = (s % r) as u8;
                s /= r;
                m
            })
            .collect()
    }

    pub fn occupation(&self, state: u32, slot: usize) -> u32 {
        (state / self.stride(slot)) % self.radix()
    }

    pub fn max_occupation(&self, state: u32) -> u32 {
        let r = self.radix();
        let mut s = state;
        let mut best = 0;
        for _ in 0..self.slots.len() {
            best = best.max(s % r);
            s /= r;
        }
        best
    }
}

/// Generator kind on a single slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    B,
    C,
    K,
}

/// Matrix elements of a truncated operator restricted to a sub-block,
/// keyed by `(input, output)` occupation tuples.
pub type OccBlock = BTreeMap<(Occupation, Occupation), Scalar>;

/// Linear operator on the truncated tensor Fock space.
///
/// Stored by columns: `cols[s]` lists `(output, coefficient)` for input state
/// `s`, sorted by output with no stored zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseOperator {
    layout: SlotLayout,
    cols: Vec<Vec<(u32, Scalar)>>,
}

impl SparseOperator {
    pub fn zero(layout: &SlotLayout) -> Self {
        SparseOperator {
            layout: layout.clone(),
            cols: vec![Vec::new(); layout.dim()],
        }
    }

    pub fn identity(layout: &SlotLayout) -> Self {
        SparseOperator::scalar(layout, Scalar::one())
    }

    pub fn scalar(layout: &SlotLayout, s: Scalar) -> Self {
        if s.is_zero() {
            return SparseOperator::zero(layout);
        }
        SparseOperator {
            layout: layout.clone(),
            cols: (0..layout.dim() as u32)
                .map(|i| vec![(i, s.clone())])
                .collect(),
        }
    }

    /// Builds an operator mapping each basis state to at most one basis state.
    fn from_map(layout: &SlotLayout, mut f: impl FnMut(u32) -> Option<(u32, Scalar)>) -> Self {
        SparseOperator {
            layout: layout.clone(),
            cols: (0..layout.dim() as u32)
                .map(|s| match f(s) {
                    Some((o, v)) if !v.is_zero() => vec![(o, v)],
                    _ => Vec::new(),
                })
                .collect(),
        }
    }

    pub fn layout(&self) -> &SlotLayout {
        &self.layout
    }

    pub fn column(&self, input: u32) -> &[(u32, Scalar)] {
        &self.cols[input as usize]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    /// `<output| X |input>`.
    pub fn entry(&self, output: &[u8], input: &[u8]) -> Scalar {
        let o = self.layout.encode(output);
        let col = &self.cols[self.layout.encode(input) as usize];
        match col.binary_search_by_key(&o, |(r, _)| *r) {
            Ok(i) => col[i].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    /// `self * rhs` (rhs applied first). Panics if the layouts differ.
    pub fn mul(&self, rhs: &SparseOperator) -> SparseOperator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        let dim = self.layout.dim();
        let mut acc: Vec<Option<Scalar>> = vec![None; dim];
        let mut touched: Vec<u32> = Vec::new();
        let cols = rhs
            .cols
            .iter()
            .map(|col| {
                for (mid, w) in col {
                    for (out, v) in &self.cols[*mid as usize] {
                        let slot = &mut acc[*out as usize];
                        match slot {
                            Some(x) => *x += w * v,
                            None => {
                                *slot = Some(w * v);
                                touched.push(*out);
                            }
                        }
                    }
                }
                touched.sort_unstable();
                let col: Vec<(u32, Scalar)> = touched
                    .drain(..)
                    .filter_map(|o| {
                        let v = acc[o as usize].take().expect("touched entry");
                        (!v.is_zero()).then_some((o, v))
                    })
                    .collect();
                col
            })
            .collect();
        SparseOperator {
            layout: self.layout.clone(),
            cols,
        }
    }

    fn combine(&self, rhs: &SparseOperator, sign: bool) -> SparseOperator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        let cols = self
            .cols
            .iter()
            .zip(&rhs.cols)
            .map(|(a, b)| {
                let mut m: BTreeMap<u32, Scalar> = a.iter().cloned().collect();
                for (o, v) in b {
                    let e = m.entry(*o).or_insert_with(Scalar::zero);
                    if sign {
                        *e += v;
                    } else {
                        *e -= v;
                    }
                }
                m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        SparseOperator {
            layout: self.layout.clone(),
            cols,
        }
    }

    pub fn add(&self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, true)
    }

    pub fn sub(&self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, false)
    }

    pub fn scale(&self, s: &Scalar) -> SparseOperator {
        if s.is_zero() {
            return SparseOperator::zero(&self.layout);
        }
        SparseOperator {
            layout: self.layout.clone(),
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|(o, v)| (*o, v * s)).collect())
                .collect(),
        }
    }

    /// Adds `s * rhs` in place.
    pub fn add_scaled(&mut self, rhs: &SparseOperator, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        *self = self.add(&rhs.scale(s));
    }

    pub fn pow(&self, k: u32) -> SparseOperator {
        let mut acc = SparseOperator::identity(&self.layout);
        for _ in 0..k {
            acc = self.mul(&acc);
        }
        acc
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &SparseOperator) -> SparseOperator {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut cols: Vec<Vec<(u32, Scalar)>> = vec![Vec::new(); self.cols.len()];
        for (s, col) in self.cols.iter().enumerate() {
            for (o, v) in col {
                cols[*o as usize].push((s as u32, v.clone()));
            }
        }
        SparseOperator {
            layout: self.layout.clone(),
            cols,
        }
    }

    /// Keeps only the columns whose input has every slot `<= max_occ`.
    pub fn restrict_inputs(&self, max_occ: u32) -> SparseOperator {
        SparseOperator {
            layout: self.layout.clone(),
            cols: self
                .cols
                .iter()
                .enumerate()
                .map(|(s, c)| {
                    if self.layout.max_occupation(s as u32) <= max_occ {
                        c.clone()
                    } else {
                        Vec::new()
                    }
                })
                .collect(),
        }
    }

    /// Keeps only outputs with every slot `<= max_occ`.
    pub fn restrict_outputs(&self, max_occ: u32) -> SparseOperator {
        SparseOperator {
            layout: self.layout.clone(),
            cols: self
                .cols
                .iter()
                .map(|c| {
                    c.iter()
                        .filter(|(o, _)| self.layout.max_occupation(*o) <= max_occ)
                        .cloned()
                        .collect()
                })
                .collect(),
        }
    }

    /// Nonzero elements with input and output occupations `<= d_safe` in
    /// every slot, keyed by occupation tuples so that blocks computed at
    /// different cutoffs can be compared directly.
    pub fn safe_block(&self, d_safe: u32) -> OccBlock {
        self.block_where(
            |l, s| l.max_occupation(s) <= d_safe,
            |l, s| l.max_occupation(s) <= d_safe,
        )
    }

    /// Elements with inputs `<= in_max` (outputs unrestricted).
    pub fn input_block(&self, in_max: u32) -> OccBlock {
        self.block_where(|l, s| l.max_occupation(s) <= in_max, |_, _| true)
    }

    fn block_where(
        &self,
        keep_in: impl Fn(&SlotLayout, u32) -> bool,
        keep_out: impl Fn(&SlotLayout, u32) -> bool,
    ) -> OccBlock {
        let l = &self.layout;
        let mut out = OccBlock::new();
        for (s, col) in self.cols.iter().enumerate() {
            if !keep_in(l, s as u32) {
                continue;
            }
            for (o, v) in col {
                if keep_out(l, *o) {
                    out.insert((l.decode(s as u32), l.decode(*o)), v.clone());
                }
            }
        }
        out
    }

    /// Lifts an operator on the first slots of `big` to all of `big`,
    /// acting as the identity on the remaining slots.
    pub fn embed_prefix(&self, big: &SlotLayout) -> Result<SparseOperator> {
        let k = self.layout.num_slots();
        if big.cutoff() != self.layout.cutoff() || big.slots()[..k] != *self.layout.slots() {
            return Err(Error::LayoutMismatch);
        }
        let block = self.layout.dim() as u32;
        let cols = (0..big.dim() as u32)
            .map(|s| {
                let (prefix, suffix) = (s % block, s / block);
                self.cols[prefix as usize]
                    .iter()
                    .map(|(o, v)| (o + suffix * block, v.clone()))
                    .collect()
            })
            .collect();
        Ok(SparseOperator {
            layout: big.clone(),
            cols,
        })
    }

    /// Conjugation by the diagonal operator `prod_slots w_slot^{m_slot}`:
    /// element `(out, in)` is multiplied by `prod w^{out - in}`.
    pub fn conjugate_diagonal(&self, weights: &[Scalar]) -> SparseOperator {
        let l = &self.layout;
        let cols = self
            .cols
            .iter()
            .enumerate()
            .map(|(s, col)| {
                col.iter()
                    .map(|(o, v)| {
                        let mut f = v.clone();
                        for (slot, w) in weights.iter().enumerate() {
                            let e =
                                l.occupation(*o, slot) as i64 - l.occupation(s as u32, slot) as i64;
                            if e != 0 {
                                f *= qpow(w, e);
                            }
                        }
                        (*o, f)
                    })
                    .collect()
            })
            .collect();
        SparseOperator {
            layout: l.clone(),
            cols,
        }
    }
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "SparseOperator {:?} nnz={}",
            self.layout.slots,
            self.nnz()
        )?;
        for (s, col) in self.cols.iter().enumerate() {
            for (o, v) in col {
                writeln!(
                    f,
                    "  {:?} -> {:?}: {}",
                    self.layout.decode(s as u32),
                    self.layout.decode(*o),
                    v
                )?;
            }
        }
        Ok(())
    }
}

/// A single generator acting on `slot`, identity elsewhere.
pub fn generator(
    layout: &SlotLayout,
    slot: Slot,
    kind: Generator,
    q: &Scalar,
) -> Result<SparseOperator> {
    let idx = layout.slot_index(slot)?;
    let stride = layout.stride(idx);
    let d = layout.cutoff() as u32;
    let levels: Vec<Scalar> = (0..=d).map(|m| qpow(q, m as i64)).collect();
    Ok(SparseOperator::from_map(layout, |s| {
        let m = layout.occupation(s, idx);
        match kind {
            Generator::B => (m < d).then(|| (s + stride, Scalar::one())),
            Generator::C => (m > 0).then(|| (s - stride, Scalar::one() - &levels[m as usize])),
            Generator::K => Some((s, levels[m as usize].clone())),
        }
    }))
}

/// Ordered product of generator powers, leftmost applied last.
pub fn monomial(
    layout: &SlotLayout,
    q: &Scalar,
    factors: &[(Slot, Generator, u32)],
) -> Result<SparseOperator> {
    let mut acc = SparseOperator::identity(layout);
    for &(slot, kind, power) in factors.iter().rev() {
        if power == 0 {
            continue;
        }
        let g = generator(layout, slot, kind, q)?;
        acc = g.pow(power).mul(&acc);
    }
    Ok(acc)
}

/// Operator product `ops[0] * ops[1] * ... ` (the last one applied first).
pub fn compose(ops: &[&SparseOperator]) -> Result<SparseOperator> {
    let Some(last) = ops.last() else {
        return Err(Error::InvalidParameter(
            "compose needs at least one operator".into(),
        ));
    };
    if ops.iter().any(|o| o.layout != last.layout) {
        return Err(Error::LayoutMismatch);
    }
    let mut acc = (*last).clone();
    for op in ops.iter().rev().skip(1) {
        acc = op.mul(&acc);
    }
    Ok(acc)
}

/// Series for `(z X)_inf` or, with `inverted`, `1 / (z X)_inf`:
///
/// * `(zX)_inf = sum_m (-z)^m q^{m(m-1)/2} X^m / (q)_m`
/// * `1/(zX)_inf = sum_m z^m X^m / (q)_m`
///
/// The sum stops once `X^m` vanishes on the truncated space; if it is still
/// nonzero after `degree_bound` terms a truncation failure is returned.
pub fn op_pochhammer(
    x: &SparseOperator,
    z: &Scalar,
    q: &Scalar,
    inverted: bool,
    degree_bound: usize,
) -> Result<SparseOperator> {
    let layout = x.layout();
    let mut acc = SparseOperator::zero(layout);
    let mut term = SparseOperator::identity(layout);
    let mut zq_m = Scalar::one();
    for m in 0..=degree_bound {
        if term.is_zero() {
            return Ok(acc);
        }
        let mut coeff = &zq_m / qpoch(q, m as u32, q);
        if !inverted {
            coeff *= qpow(q, (m * m.saturating_sub(1) / 2) as i64);
            if m % 2 == 1 {
                coeff = -coeff;
            }
        }
        acc = acc.add(&term.scale(&coeff));
        term = x.mul(&term);
        zq_m *= z;
    }
    if term.is_zero() {
        Ok(acc)
    } else {
        Err(Error::TruncationFailure(degree_bound))
    }
}

/// Exact partial trace over the truncated space.
///
/// With the pairing `<m|m'> = delta (q)_m` the weighted sum
/// `sum_m <m|X|m> / (q)_m` reduces to the sum of diagonal coefficients.
pub fn fock_trace(x: &SparseOperator) -> Scalar {
    let mut acc = Scalar::zero();
    for (s, col) in x.cols.iter().enumerate() {
        if let Ok(i) = col.binary_search_by_key(&(s as u32), |(o, _)| *o) {
            acc += &col[i].1;
        }
    }
    acc
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &SparseOperator, b: &SparseOperator) -> Scalar {
    assert_eq!(a.layout, b.layout, "operator layouts differ");
    let mut acc = Scalar::zero();
    for (i, col) in b.cols.iter().enumerate() {
        let mut diag = Scalar::zero();
        for (j, v) in col {
            let acol = &a.cols[*j as usize];
            if let Ok(k) = acol.binary_search_by_key(&(i as u32), |(o, _)| *o) {
                diag += &acol[k].1 * v;
            }
        }
        acc += diag;
    }
    acc
}

/// First key where two sub-blocks disagree (missing entries count as zero).
pub fn block_difference(a: &OccBlock, b: &OccBlock) -> Option<String> {
    let zero = Scalar::zero();
    for (k, v) in a {
        let w = b.get(k).unwrap_or(&zero);
        if v != w {
            return Some(format!("<{:?}|.|{:?}>: {} vs {}", k.1, k.0, v, w));
        }
    }
    for (k, w) in b {
        if !a.contains_key(k) {
            return Some(format!("<{:?}|.|{:?}>: 0 vs {}", k.1, k.0, w));
        }
    }
    None
}

/// Default truncation-safe bound `floor(D / 2)`.
pub fn default_safe(cutoff: usize) -> u32 {
    (cutoff / 2) as u32
}
