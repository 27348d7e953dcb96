//! Blocks of sites as bitmasks, and the signed Möbius / zeta transforms over
//! the lattice of subsets of `Ω = {1..N}`.
//!
//! Bit `i` of a mask stands for site `i + 1`: sites are 1-indexed in every
//! file and in `Display`, 0-indexed in the bits.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::LatticeValue;

/// Largest system size any table may have (`2^20` doubles is 8 MiB).
pub const MAX_SITES: usize = 20;

/// A block of sites of an `n_sites` system.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u32,
    n_sites: u8,
}

impl SubsetMask {
    pub fn new(bits: u32, n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        if u64::from(bits) >= 1u64 << n_sites {
            return Err(Error::input(format!(
                "mask {bits:#b} does not fit in {n_sites} sites"
            )));
        }
        Ok(Self {
            bits,
            n_sites: n_sites as u8,
        })
    }

    /// Builds a mask from 1-indexed site labels.
    pub fn from_sites(sites: &[usize], n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        let mut bits = 0u32;
        for &s in sites {
            if s == 0 || s > n_sites {
                return Err(Error::input(format!(
                    "site {s} outside 1..={n_sites}"
                )));
            }
            bits |= 1 << (s - 1);
        }
        Self::new(bits, n_sites)
    }

    pub fn empty(n_sites: usize) -> Result<Self> {
        Self::new(0, n_sites)
    }

    pub fn full(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Self::new(full_bits(n_sites), n_sites)
    }

    /// Unchecked constructor for internal loops over `0..2^n`.
    #[inline]
    pub(crate) fn raw(bits: u32, n_sites: usize) -> Self {
        debug_assert!(n_sites <= MAX_SITES && u64::from(bits) < 1u64 << n_sites);
        Self {
            bits,
            n_sites: n_sites as u8,
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn index(self) -> usize {
        self.bits as usize
    }

    #[inline]
    pub fn n_sites(self) -> usize {
        self.n_sites as usize
    }

    /// Number of sites in the block (the number of legs of its hyperlink).
    #[inline]
    pub fn rank(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn complement(self) -> Self {
        Self {
            bits: full_bits(self.n_sites()) ^ self.bits,
            n_sites: self.n_sites,
        }
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn is_full(self) -> bool {
        self.bits == full_bits(self.n_sites())
    }

    /// Neither empty nor the whole system.
    #[inline]
    pub fn is_proper(self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    /// 0-indexed site membership.
    #[inline]
    pub fn contains(self, site: usize) -> bool {
        site < self.n_sites() && self.bits >> site & 1 == 1
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: Self) -> bool {
        self.bits & other.bits == 0
    }

    #[inline]
    pub fn intersects(self, other: Self) -> bool {
        !self.is_disjoint(other)
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        Self {
            bits: self.bits | other.bits,
            n_sites: self.n_sites.max(other.n_sites),
        }
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        Self {
            bits: self.bits & other.bits,
            n_sites: self.n_sites.max(other.n_sites),
        }
    }

    /// 0-indexed sites in increasing order.
    pub fn sites(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n_sites()).filter(move |&i| bits >> i & 1 == 1)
    }

    /// All sub-blocks `B ⊆ self`, including `∅` and `self`.
    pub fn subsets(self) -> Subsets {
        Subsets {
            of: self.bits,
            next: Some(self.bits),
            n_sites: self.n_sites(),
        }
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.n_sites)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.sites().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        f.write_str("}")
    }
}

/// Iterator over sub-masks in decreasing bit order (`(s - 1) & of`).
#[derive(Clone, Debug)]
pub struct Subsets {
    of: u32,
    next: Option<u32>,
    n_sites: usize,
}

impl Iterator for Subsets {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.of)
        };
        Some(SubsetMask::raw(cur, self.n_sites))
    }
}

#[inline]
pub(crate) fn full_bits(n_sites: usize) -> u32 {
    ((1u64 << n_sites) - 1) as u32
}

pub(crate) fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::input(format!(
            "number of sites {n_sites} outside 1..={MAX_SITES}"
        )));
    }
    Ok(())
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Checks that the listed blocks are pairwise disjoint.
pub fn ensure_disjoint(blocks: &[SubsetMask]) -> Result<()> {
    let mut seen = 0u32;
    for b in blocks {
        if seen & b.bits != 0 {
            return Err(Error::input(format!("block {b} overlaps another block")));
        }
        seen |= b.bits;
    }
    Ok(())
}

/// `I ∈ B_1 : B_2 : … : B_K`: the block lies inside the union of the listed
/// disjoint blocks and has at least one leg in each of them.
pub fn crosses(block: SubsetMask, blocks: &[SubsetMask]) -> Result<bool> {
    ensure_disjoint(blocks)?;
    Ok(crosses_unchecked(block.bits, blocks))
}

#[inline]
pub(crate) fn crosses_unchecked(bits: u32, blocks: &[SubsetMask]) -> bool {
    let union = blocks.iter().fold(0u32, |acc, b| acc | b.bits);
    bits & !union == 0 && blocks.iter().all(|b| bits & b.bits != 0)
}

/// Replaces `values` by its signed Möbius transform,
/// `g(A) = Σ_{B⊆A} (-1)^{|A|-|B|} f(B)`, with one sweep per bit.
///
/// Panics if the length is not a power of two.
pub fn signed_moebius_in_place<T: LatticeValue>(values: &mut [T]) {
    sweep(values, |lo, hi| *hi -= lo.clone());
}

/// Replaces `values` by its zeta transform, `f(B) = Σ_{A⊆B} g(A)`.
///
/// Panics if the length is not a power of two.
pub fn zeta_in_place<T: LatticeValue>(values: &mut [T]) {
    sweep(values, |lo, hi| *hi += lo.clone());
}

fn sweep<T>(values: &mut [T], mut op: impl FnMut(&T, &mut T)) {
    let len = values.len();
    assert!(
        len.is_power_of_two(),
        "lattice table length {len} is not a power of two"
    );
    let mut half = 1;
    while half < len {
        for chunk in values.chunks_exact_mut(2 * half) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (l, h) in lo.iter().zip(hi.iter_mut()) {
                op(l, h);
            }
        }
        half *= 2;
    }
}

/// A value for every block of an `N`-site system, indexed by mask bits.
///
/// Entropy tables and hyperlink tables share this layout; both vanish at
/// the empty block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeTable<T> {
    n_sites: usize,
    values: Vec<T>,
}

impl<T> LatticeTable<T> {
    pub fn from_values(n_sites: usize, values: Vec<T>) -> Result<Self> {
        check_sites(n_sites)?;
        if values.len() != 1 << n_sites {
            return Err(Error::input(format!(
                "table for {n_sites} sites needs {} entries, got {}",
                1usize << n_sites,
                values.len()
            )));
        }
        Ok(Self { n_sites, values })
    }

    pub fn from_fn(n_sites: usize, f: impl FnMut(SubsetMask) -> T) -> Result<Self> {
        check_sites(n_sites)?;
        let values = (0..1u32 << n_sites)
            .map(|b| SubsetMask::raw(b, n_sites))
            .map(f)
            .collect();
        Ok(Self { n_sites, values })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, mask: SubsetMask) -> &T {
        &self.values[mask.index()]
    }

    /// Every mask of this table's system, in index order.
    pub fn masks(&self) -> impl Iterator<Item = SubsetMask> {
        let n = self.n_sites;
        (0..1u32 << n).map(move |b| SubsetMask::raw(b, n))
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::raw(full_bits(self.n_sites), self.n_sites)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> LatticeTable<U> {
        LatticeTable {
            n_sites: self.n_sites,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> LatticeTable<T> {
    #[inline]
    pub fn at(&self, mask: SubsetMask) -> T {
        self.values[mask.index()]
    }

    #[inline]
    pub fn at_bits(&self, bits: u32) -> T {
        self.values[bits as usize]
    }
}

impl<T: LatticeValue> LatticeTable<T> {
    /// Signed Möbius transform on a copy.
    pub fn signed_moebius(&self) -> Self {
        let mut out = self.clone();
        signed_moebius_in_place(&mut out.values);
        out
    }

    /// Zeta transform on a copy; inverse of [`Self::signed_moebius`].
    pub fn zeta(&self) -> Self {
        let mut out = self.clone();
        zeta_in_place(&mut out.values);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(sites: &[usize], n: usize) -> SubsetMask {
        SubsetMask::from_sites(sites, n).unwrap()
    }

    #[test]
    fn crosses_examples() {
        let blocks = [m(&[1, 2], 5), m(&[3, 4], 5)];
        assert!(crosses(m(&[1, 3], 5), &blocks).unwrap());
        assert!(!crosses(m(&[1, 2], 5), &blocks).unwrap());
        assert!(!crosses(m(&[1, 3, 5], 5), &blocks).unwrap());
    }

    #[test]
    fn crosses_rejects_overlap() {
        let blocks = [m(&[1, 2], 4), m(&[2, 3], 4)];
        assert!(matches!(
            crosses(m(&[1, 3], 4), &blocks),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn mask_validation() {
        assert!(SubsetMask::new(0b100, 2).is_err());
        assert!(SubsetMask::new(0, 0).is_err());
        assert!(SubsetMask::new(0, 21).is_err());
        assert!(SubsetMask::from_sites(&[0], 3).is_err());
        assert!(SubsetMask::from_sites(&[4], 3).is_err());
        assert_eq!(m(&[1, 3], 3).bits(), 0b101);
        assert_eq!(m(&[1, 3], 3).to_string(), "{1,3}");
        assert_eq!(m(&[1, 3], 3).complement(), m(&[2], 3));
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let a = m(&[1, 3, 4], 5);
        let subs: Vec<u32> = a.subsets().map(|s| s.bits()).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|&s| s & !a.bits() == 0));
        let e = SubsetMask::empty(3).unwrap();
        assert_eq!(e.subsets().count(), 1);
    }

    #[test]
    fn moebius_single_site() {
        let s = 0.37;
        let t = LatticeTable::from_values(1, vec![0.0, s]).unwrap();
        assert_eq!(t.signed_moebius().values(), &[0.0, s]);
    }

    #[test]
    fn moebius_bell_pair() {
        let l = std::f64::consts::LN_2;
        let t = LatticeTable::from_values(2, vec![0.0, l, l, 0.0]).unwrap();
        assert_eq!(t.signed_moebius().values(), &[0.0, l, l, -2.0 * l]);
    }

    #[test]
    fn zeta_hand_expansion() {
        let (a, b, c) = (0.3, -1.25, 2.5);
        let t = LatticeTable::from_values(2, vec![0.0, a, b, c]).unwrap();
        assert_eq!(t.zeta().values(), &[0.0, a, b, a + b + c]);
    }

    #[test]
    fn integer_tables_invert_exactly() {
        let vals: Vec<i64> = (0..64).map(|i| (i * 37 % 11) - 5).collect();
        let t = LatticeTable::from_values(6, vals).unwrap();
        assert_eq!(t.signed_moebius().zeta(), t);
    }

    #[test]
    fn table_length_checked() {
        assert!(LatticeTable::from_values(3, vec![0.0; 7]).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(3, 4), 0);
    }
}
