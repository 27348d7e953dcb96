//! Entanglement hyperlinks and the identities built on them.
//!
//! The hyperlink of a block `I` is the signed inclusion–exclusion sum
//! `J_I = Σ_{A⊆I} (-1)^{|I|-|A|} S_A`, i.e. the signed Möbius transform of
//! the entropy table. `J_i = S_i`, `J_ij = S_ij - S_i - S_j = -I(i,j)`.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::lattice::{crosses_unchecked, ensure_disjoint, LatticeTable, SubsetMask};
use crate::legfactors::LegFactorTable;
use crate::scalar::Real;

pub use crate::entropy::KERNEL_TOL;

/// Tolerance ladder: algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance ladder: end-to-end reconstructions.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// `|J_I|` above which a hyperlink counts as non-zero in sign statistics.
pub const NONZERO_TOL: f64 = 1e-9;

/// Hyperlink values `J_I` for every block.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperlinkTable<T>(LatticeTable<T>);

impl<T> Deref for HyperlinkTable<T> {
    type Target = LatticeTable<T>;

    fn deref(&self) -> &LatticeTable<T> {
        &self.0
    }
}

impl<T: Real> HyperlinkTable<T> {
    /// Wraps raw hyperlink values (e.g. read from a file).
    pub fn from_table(table: LatticeTable<T>) -> Result<Self> {
        if table.values()[0] != T::zero() {
            return Err(Error::input("hyperlink of the empty block must be 0"));
        }
        Ok(Self(table))
    }

    pub fn table(&self) -> &LatticeTable<T> {
        &self.0
    }

    pub fn into_table(self) -> LatticeTable<T> {
        self.0
    }

    /// Entropies recovered by the zeta transform.
    pub fn entropies(&self) -> LatticeTable<T> {
        self.0.zeta()
    }

    /// `Σ_I J_I`, which equals `S_Ω` and vanishes for pure states.
    pub fn total(&self) -> T {
        self.0.values().iter().copied().sum()
    }

    /// `J_Ω`, the highest-rank hyperlink.
    pub fn top(&self) -> T {
        self.0.at(self.0.full_mask())
    }

    fn check_mask(&self, a: SubsetMask) -> Result<()> {
        if a.n_sites() != self.n_sites() {
            return Err(Error::input(format!(
                "block {a} does not belong to a {}-site system",
                self.n_sites()
            )));
        }
        Ok(())
    }

    fn check_pure(&self) -> Result<()> {
        let total = self.total();
        let scale = self
            .0
            .values()
            .iter()
            .fold(T::one(), |m, &x| m.max(x.abs()));
        if (total.abs() / scale) > T::lit(RECONSTRUCTION_TOL) {
            return Err(Error::Precondition(format!(
                "hyperlinks sum to {total}; the table does not come from a pure state"
            )));
        }
        Ok(())
    }
}

/// `J = signed Möbius transform of S`.
pub fn ehl_table<T: Real>(entropies: &LatticeTable<T>) -> HyperlinkTable<T> {
    HyperlinkTable(entropies.signed_moebius())
}

fn same_system<T>(s: &LatticeTable<T>, masks: &[SubsetMask]) -> Result<()> {
    for m in masks {
        if m.n_sites() != s.n_sites() {
            return Err(Error::input(format!(
                "block {m} does not belong to a {}-site system",
                s.n_sites()
            )));
        }
    }
    Ok(())
}

/// `I(A,B) = S_A + S_B - S_{A∪B}` for disjoint blocks.
pub fn mutual_information<T: Real>(s: &LatticeTable<T>, a: SubsetMask, b: SubsetMask) -> Result<T> {
    same_system(s, &[a, b])?;
    if a.intersects(b) {
        return Err(Error::input(format!("blocks {a} and {b} overlap")));
    }
    Ok(s.at(a) + s.at(b) - s.at(a.union(b)))
}

/// Conditional hyperlink `J_{I|J} = Σ_{A⊆I} (-1)^{|I|-|A|} (S_{A∪J} - S_J)`.
pub fn conditional_ehl<T: Real>(s: &LatticeTable<T>, i: SubsetMask, j: SubsetMask) -> Result<T> {
    same_system(s, &[i, j])?;
    if i.intersects(j) {
        return Err(Error::input(format!("blocks {i} and {j} overlap")));
    }
    let sj = s.at(j);
    let top = i.rank();
    Ok(i.subsets()
        .map(|a| {
            let term = s.at(a.union(j)) - sj;
            if (top - a.rank()) % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum())
}

/// Builds `J_I` by adding the sites of `order` one at a time through
/// `J_{I∪i} = J_{I|i} - J_I`, starting from `J_{i_1} = S_{i_1}`.
///
/// `order` lists distinct 0-indexed sites; the result must not depend on
/// the order chosen.
pub fn ehl_by_growth<T: Real>(s: &LatticeTable<T>, order: &[usize]) -> Result<T> {
    let n = s.n_sites();
    let (&first, rest) = order
        .split_first()
        .ok_or_else(|| Error::input("growth order must contain at least one site"))?;
    let single = |site: usize| -> Result<SubsetMask> {
        if site >= n {
            return Err(Error::input(format!("site index {site} out of range")));
        }
        Ok(SubsetMask::raw(1 << site, n))
    };
    let mut grown = single(first)?;
    let mut value = s.at(grown);
    for &site in rest {
        let next = single(site)?;
        if grown.intersects(next) {
            return Err(Error::input(format!("site {} repeated in growth order", site + 1)));
        }
        value = conditional_ehl(s, grown, next)? - value;
        grown = grown.union(next);
    }
    Ok(value)
}

/// `S_A` as the sum of every hyperlink contained in `A`.
pub fn bulk_reconstruct<T: Real>(j: &HyperlinkTable<T>, a: SubsetMask) -> Result<T> {
    j.check_mask(a)?;
    Ok(a.subsets().map(|i| j.at(i)).sum())
}

/// `S_A = -½ Σ_{I ∈ A:Ā} J_I`; requires a pure-state table.
pub fn edge_reconstruct<T: Real>(j: &HyperlinkTable<T>, a: SubsetMask) -> Result<T> {
    j.check_mask(a)?;
    if !a.is_proper() {
        return Err(Error::input(format!(
            "edge reconstruction needs a non-trivial block, got {a}"
        )));
    }
    j.check_pure()?;
    Ok(-T::lit(0.5) * crossing_sum(j, a, |_| true))
}

/// Sum of `J_I` over blocks crossing the `A:Ā` boundary that pass `keep`.
fn crossing_sum<T: Real>(j: &HyperlinkTable<T>, a: SubsetMask, keep: impl Fn(SubsetMask) -> bool) -> T {
    let inside = a.bits();
    let outside = a.complement().bits();
    j.masks()
        .filter(|i| i.bits() & inside != 0 && i.bits() & outside != 0)
        .filter(|&i| keep(i))
        .map(|i| j.at(i))
        .sum()
}

/// Partial edge sum `S_A(ℓ) = -½ Σ_{I∈A:Ā, |I|≤ℓ} J_I`.
///
/// `ell ≥ N` gives the exact edge reconstruction; `ell < 2` gives 0.
pub fn partial_sum<T: Real>(j: &HyperlinkTable<T>, a: SubsetMask, ell: usize) -> T {
    -T::lit(0.5) * crossing_sum(j, a, |i| i.rank() <= ell)
}

/// Even-legged reconstruction `S_A = Σ_{|I| even} Λ_{|I|,|I∩A|} J_I`.
pub fn even_legged_reconstruct<T: Real>(
    j: &HyperlinkTable<T>,
    a: SubsetMask,
    legs: &LegFactorTable,
) -> Result<T> {
    j.check_mask(a)?;
    let n = j.n_sites();
    // Group the crossing even-rank hyperlinks by (rank, legs inside) first.
    let mut groups = vec![vec![T::zero(); n + 1]; n + 1];
    for i in j.masks() {
        let rank = i.rank();
        if rank == 0 || rank % 2 == 1 {
            continue;
        }
        let p = i.intersection(a).rank();
        if p == 0 || p == rank {
            continue;
        }
        groups[rank][p] += j.at(i);
    }
    let mut total = T::zero();
    for (rank, row) in groups.iter().enumerate() {
        for (p, &g) in row.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            let lambda = legs.get(rank, p).ok_or_else(|| {
                Error::input(format!("leg-factor table has no entry for rank {rank}, p={p}"))
            })?;
            total += T::lit(*lambda.numer() as f64) / T::lit(*lambda.denom() as f64) * g;
        }
    }
    Ok(total)
}

/// Disjoint blocks `A_1 … A_K`, `K ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseGraining {
    blocks: Vec<SubsetMask>,
}

impl CoarseGraining {
    pub fn new(blocks: Vec<SubsetMask>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::input("a coarse-graining needs at least two blocks"));
        }
        let n = blocks[0].n_sites();
        if blocks.iter().any(|b| b.n_sites() != n) {
            return Err(Error::input("coarse-graining blocks come from different systems"));
        }
        ensure_disjoint(&blocks)?;
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[SubsetMask] {
        &self.blocks
    }

    pub fn union(&self) -> SubsetMask {
        self.blocks
            .iter()
            .copied()
            .reduce(SubsetMask::union)
            .expect("at least two blocks")
    }
}

/// Definition path: `Σ_{B⊆{1..K}} (-1)^{K-|B|} S(∪_{k∈B} A_k)`.
pub fn coarse_grained_definition<T: Real>(s: &LatticeTable<T>, cg: &CoarseGraining) -> Result<T> {
    same_system(s, cg.blocks())?;
    let k = cg.blocks.len();
    let mut total = T::zero();
    for choice in 0u32..1 << k {
        let union = cg
            .blocks
            .iter()
            .enumerate()
            .filter(|(idx, _)| choice >> idx & 1 == 1)
            .fold(0u32, |acc, (_, b)| acc | b.bits());
        let term = s.at_bits(union);
        if (k - choice.count_ones() as usize) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Fine-grained path: `Σ_{I ∈ A_1:…:A_K} J_I`.
pub fn coarse_grained_fine_sum<T: Real>(j: &HyperlinkTable<T>, cg: &CoarseGraining) -> Result<T> {
    same_system(j, cg.blocks())?;
    Ok(cg
        .union()
        .subsets()
        .filter(|i| crosses_unchecked(i.bits(), cg.blocks()))
        .map(|i| j.at(i))
        .sum())
}

/// Both evaluations of a coarse-grained hyperlink.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseGrainedEhl<T> {
    pub definition: T,
    /// `None` in fast mode.
    pub fine_sum: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Definition path only.
    Fast,
    /// Definition and fine-grained paths.
    Verify,
}

pub fn coarse_grained_ehl<T: Real>(
    s: &LatticeTable<T>,
    j: &HyperlinkTable<T>,
    cg: &CoarseGraining,
    mode: EvalMode,
) -> Result<CoarseGrainedEhl<T>> {
    let definition = coarse_grained_definition(s, cg)?;
    let fine_sum = match mode {
        EvalMode::Fast => None,
        EvalMode::Verify => Some(coarse_grained_fine_sum(j, cg)?),
    };
    Ok(CoarseGrainedEhl {
        definition,
        fine_sum,
    })
}

/// Both sides of the three-party monogamy relation
/// `I(i,j) + I(i,k) ≤ I(i,jk)`, together with `J_ijk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monogamy<T> {
    pub ehl: T,
    pub pairwise: T,
    pub joint: T,
}

impl<T: Real> Monogamy<T> {
    /// `J_ijk ≤ 0` with the given slack.
    pub fn ehl_negative(&self, slack: T) -> bool {
        self.ehl <= slack
    }

    /// `I(i,j) + I(i,k) ≤ I(i,jk)` with the given slack.
    pub fn relation_holds(&self, slack: T) -> bool {
        self.pairwise <= self.joint + slack
    }
}

/// Sites are 0-indexed and distinct.
pub fn monogamy<T: Real>(s: &LatticeTable<T>, i: usize, j: usize, k: usize) -> Result<Monogamy<T>> {
    let n = s.n_sites();
    if i == j || j == k || i == k || i.max(j).max(k) >= n {
        return Err(Error::input("monogamy needs three distinct sites"));
    }
    let site = |x: usize| SubsetMask::raw(1 << x, n);
    let (a, b, c) = (site(i), site(j), site(k));
    Ok(Monogamy {
        ehl: ehl_table(s).at(a.union(b).union(c)),
        pairwise: mutual_information(s, a, b)? + mutual_information(s, a, c)?,
        joint: mutual_information(s, a, b.union(c))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pure::{build_named_state, random_state, Family};
    use std::f64::consts::LN_2;

    fn mask(sites: &[usize], n: usize) -> SubsetMask {
        SubsetMask::from_sites(sites, n).unwrap()
    }

    fn table(family: Family, n: usize) -> LatticeTable<f64> {
        build_named_state::<f64>(family, n, Some(1))
            .unwrap()
            .entropy_table()
            .unwrap()
    }

    #[test]
    fn rank_two_is_minus_mutual_information() {
        let s = random_state::<f64>(5, 3).unwrap().entropy_table().unwrap();
        let j = ehl_table(&s);
        for a in 0..5 {
            for b in a + 1..5 {
                let i = mask(&[a + 1, b + 1], 5);
                let mi = mutual_information(&s, mask(&[a + 1], 5), mask(&[b + 1], 5)).unwrap();
                assert!((j.at(i) + mi).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ghz_hyperlinks() {
        let j3 = ehl_table(&table(Family::Ghz, 3));
        assert!(j3.top().abs() < 1e-14);
        // GHZ_4: every proper block has S = ln 2; Σ_A (-1)^{4-|A|} S_A over
        // the 14 proper blocks is ln2·(-4 + 6 - 4) = -2 ln 2.
        let j4 = ehl_table(&table(Family::Ghz, 4));
        assert!((j4.top() + 2.0 * LN_2).abs() < 1e-14);
    }

    #[test]
    fn bell_pair_reconstructions() {
        let s = table(Family::BellPairs, 2);
        let j = ehl_table(&s);
        let a = mask(&[1], 2);
        assert!((edge_reconstruct(&j, a).unwrap() - LN_2).abs() < 1e-14);
        assert!((bulk_reconstruct(&j, a).unwrap() - LN_2).abs() < 1e-14);
        assert!((mutual_information(&s, a, a.complement()).unwrap() - 2.0 * LN_2).abs() < 1e-14);
    }

    #[test]
    fn ghz4_edge_reconstruction() {
        let j = ehl_table(&table(Family::Ghz, 4));
        let v = edge_reconstruct(&j, mask(&[1, 2], 4)).unwrap();
        assert!((v - LN_2).abs() < 1e-14);
    }

    #[test]
    fn edge_reconstruct_rejects_mixed_tables() {
        let s = LatticeTable::from_values(2, vec![0.0, 0.3, 0.3, 0.5]).unwrap();
        let j = ehl_table(&s);
        assert!(matches!(
            edge_reconstruct(&j, mask(&[1], 2)),
            Err(Error::Precondition(_))
        ));
        let pure = ehl_table(&table(Family::BellPairs, 2));
        assert!(edge_reconstruct(&pure, SubsetMask::empty(2).unwrap()).is_err());
    }

    #[test]
    fn conditional_on_empty_is_plain_hyperlink() {
        let s = random_state::<f64>(4, 8).unwrap().entropy_table().unwrap();
        let j = ehl_table(&s);
        let e = SubsetMask::empty(4).unwrap();
        for i in s.masks() {
            assert!((conditional_ehl(&s, i, e).unwrap() - j.at(i)).abs() < 1e-14);
        }
        assert!(conditional_ehl(&s, mask(&[1, 2], 4), mask(&[2], 4)).is_err());
    }

    #[test]
    fn growth_requires_distinct_sites() {
        let s = random_state::<f64>(3, 2).unwrap().entropy_table().unwrap();
        assert!(ehl_by_growth(&s, &[0, 0]).is_err());
        assert!(ehl_by_growth(&s, &[]).is_err());
        assert!(ehl_by_growth(&s, &[3]).is_err());
    }

    #[test]
    fn coarse_graining_two_blocks() {
        let s = random_state::<f64>(5, 4).unwrap().entropy_table().unwrap();
        let j = ehl_table(&s);
        let (a, b) = (mask(&[1, 2], 5), mask(&[4], 5));
        let cg = CoarseGraining::new(vec![a, b]).unwrap();
        let v = coarse_grained_ehl(&s, &j, &cg, EvalMode::Verify).unwrap();
        let expected = s.at(a.union(b)) - s.at(a) - s.at(b);
        assert!((v.definition - expected).abs() < 1e-14);
        assert!((v.fine_sum.unwrap() - expected).abs() < 1e-12);
        let fast = coarse_grained_ehl(&s, &j, &cg, EvalMode::Fast).unwrap();
        assert_eq!(fast.fine_sum, None);

        // B = Ā: minus the crossing sum is I(A, Ā)
        let cg = CoarseGraining::new(vec![a, a.complement()]).unwrap();
        let fine = coarse_grained_fine_sum(&j, &cg).unwrap();
        let mi = mutual_information(&s, a, a.complement()).unwrap();
        assert!((fine + mi).abs() < 1e-12);
    }

    #[test]
    fn coarse_graining_validation() {
        assert!(CoarseGraining::new(vec![mask(&[1], 3)]).is_err());
        assert!(CoarseGraining::new(vec![mask(&[1, 2], 3), mask(&[2], 3)]).is_err());
    }

    #[test]
    fn partial_sum_limits() {
        let s = random_state::<f64>(6, 9).unwrap().entropy_table().unwrap();
        let j = ehl_table(&s);
        let a = mask(&[1, 3, 4], 6);
        assert!((partial_sum(&j, a, 6) - s.at(a)).abs() < 1e-12);
        // ℓ = 2 is the link approximation Σ_{i∈A, k∉A} ½ I(i,k)
        let mut links = 0.0;
        for i in a.sites() {
            for k in a.complement().sites() {
                let (mi, mk) = (SubsetMask::raw(1 << i, 6), SubsetMask::raw(1 << k, 6));
                links += 0.5 * mutual_information(&s, mi, mk).unwrap();
            }
        }
        assert!((partial_sum(&j, a, 2) - links).abs() < 1e-13);
        assert_eq!(partial_sum(&j, a, 1), 0.0);
    }

    #[test]
    fn monogamy_sides() {
        let s = random_state::<f64>(4, 6).unwrap().entropy_table().unwrap();
        let m = monogamy(&s, 0, 1, 2).unwrap();
        assert!((m.joint - m.pairwise + m.ehl).abs() < 1e-13);
        assert!(monogamy(&s, 0, 0, 2).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let s = build_named_state::<f32>(Family::Ghz, 4, None)
            .unwrap()
            .entropy_table()
            .unwrap();
        let j = ehl_table(&s);
        assert!((j.top() + 2.0 * std::f32::consts::LN_2).abs() < 1e-5);
    }
}
