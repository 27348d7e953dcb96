//! Dense pure states and their block entropies.
//!
//! Basis ordering: site 1 is the most significant digit of the
//! computational-basis index, so for qubits the amplitude of
//! `|s_1 s_2 … s_N⟩` sits at index `Σ s_i 2^(N-i)`.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{spectrum_entropy, Spectrum};
use crate::error::{Error, Result};
use crate::lattice::{check_sites, LatticeTable, SubsetMask};
use crate::linalg::{hermitian_eigenvalues, DenseMatrix};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Largest system a dense state may be built for.
pub const MAX_STATE_SITES: usize = 14;
/// Largest system a full dense entropy table is computed for.
pub const MAX_TABLE_SITES: usize = 12;
/// Normalization slack accepted for states.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    n_sites: usize,
    local_dim: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> PureState<T> {
    /// Wraps amplitudes after checking length and normalization.
    pub fn new(n_sites: usize, local_dim: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_sites(n_sites)?;
        if n_sites > MAX_STATE_SITES {
            return Err(Error::input(format!(
                "dense states are limited to {MAX_STATE_SITES} sites"
            )));
        }
        if local_dim != 2 {
            return Err(Error::input(format!(
                "local dimension {local_dim} unsupported: only qubits (d=2) are implemented"
            )));
        }
        let expected = local_dim.pow(n_sites as u32);
        if amplitudes.len() != expected {
            return Err(Error::input(format!(
                "state of {n_sites} sites needs {expected} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let tol = T::lit(NORM_TOL).max(T::resolution() * T::from_usize(expected).unwrap());
        if !((norm - T::one()).abs() <= tol) {
            return Err(Error::input(format!(
                "state norm² is {norm}, not 1 within {tol}"
            )));
        }
        Ok(Self {
            n_sites,
            local_dim,
            amplitudes,
        })
    }

    /// Normalizes arbitrary (non-zero) amplitudes first.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::input("cannot normalize a zero or non-finite vector"));
        }
        for a in &mut amplitudes {
            *a = *a / norm;
        }
        Self::new(n_sites, 2, amplitudes)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Basis-index bit carrying site `site` (0-indexed).
    #[inline]
    fn site_bit(&self, site: usize) -> usize {
        self.n_sites - 1 - site
    }

    /// Tensor product `self ⊗ other`; the sites of `other` follow.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n_sites + other.n_sites;
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Self::normalized(n, amps)
    }

    /// Eigenvalues of the reduced density matrix of `block`.
    ///
    /// Works on the smaller side of the cut: the amplitudes are reshaped
    /// into a `2^b × 2^(N-b)` matrix `M` whose rows are indexed by the
    /// smaller block, and the spectrum of `M·M†` is returned. The nonzero
    /// spectra of both sides coincide for a pure state.
    pub fn reduced_spectrum(&self, block: SubsetMask) -> Result<Spectrum<T>> {
        if block.n_sites() != self.n_sites {
            return Err(Error::input(format!(
                "block {block} belongs to a {}-site system, state has {}",
                block.n_sites(),
                self.n_sites
            )));
        }
        let side = if block.rank() * 2 <= self.n_sites {
            block
        } else {
            block.complement()
        };
        if side.is_empty() {
            return Ok(Spectrum::new(vec![T::one()]));
        }
        let gram = self.gram_matrix(side);
        hermitian_eigenvalues(&gram)
    }

    /// `M·M†` with rows of `M` indexed by the sites of `rows`.
    fn gram_matrix(&self, rows: SubsetMask) -> DenseMatrix<Complex<T>> {
        let row_sites: Vec<usize> = rows.sites().map(|s| self.site_bit(s)).collect();
        let col_sites: Vec<usize> = rows.complement().sites().map(|s| self.site_bit(s)).collect();
        let n_rows = 1usize << row_sites.len();
        let n_cols = 1usize << col_sites.len();
        let mut m = vec![Complex::<T>::zero(); n_rows * n_cols];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let r = gather(idx, &row_sites);
            let c = gather(idx, &col_sites);
            m[r * n_cols + c] = *amp;
        }
        let mut gram = DenseMatrix::zeros(n_rows);
        for a in 0..n_rows {
            let ra = &m[a * n_cols..(a + 1) * n_cols];
            for b in a..n_rows {
                let rb = &m[b * n_cols..(b + 1) * n_cols];
                let mut acc = Complex::<T>::zero();
                for (x, y) in ra.iter().zip(rb) {
                    acc = acc + *x * y.conj();
                }
                gram[(a, b)] = acc;
                gram[(b, a)] = acc.conj();
            }
        }
        gram
    }

    /// Von Neumann entropy of `block` in nats.
    pub fn block_entropy(&self, block: SubsetMask) -> Result<T> {
        spectrum_entropy(&self.reduced_spectrum(block)?)
    }

    /// Entropy of every block.
    ///
    /// Only blocks on the small side of their cut (rank below `N/2`, or
    /// rank `N/2` with the lower mask) are diagonalized; the rest are
    /// mirrored from their complements, so `S_∅ = S_Ω = 0` exactly.
    pub fn entropy_table(&self) -> Result<LatticeTable<T>> {
        if self.n_sites > MAX_TABLE_SITES {
            return Err(Error::input(format!(
                "dense entropy tables are limited to {MAX_TABLE_SITES} sites"
            )));
        }
        mirrored_table(self.n_sites, |mask| self.block_entropy(mask))
    }

    /// Reads the JSON state format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        file.into_state()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StateFile::from_state(self))?)
    }
}

/// Packs the bits of `idx` at the given positions (most significant first).
#[inline]
fn gather(idx: usize, bits: &[usize]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (idx >> b & 1))
}

/// Masks computed directly by the mirror rule: the smaller side of each
/// cut, ties broken towards the lower mask. `∅` is included.
pub fn canonical_masks(n_sites: usize) -> impl Iterator<Item = SubsetMask> {
    let full = crate::lattice::full_bits(n_sites);
    (0..=full)
        .filter(move |&b| {
            let r = b.count_ones() as usize;
            2 * r < n_sites || (2 * r == n_sites && b < full ^ b)
        })
        .map(move |b| SubsetMask::raw(b, n_sites))
}

/// Fills a table from `entropy` on canonical masks and mirrors the rest.
pub(crate) fn mirrored_table<T: Real>(
    n_sites: usize,
    entropy: impl Fn(SubsetMask) -> Result<T> + Sync,
) -> Result<LatticeTable<T>> {
    check_sites(n_sites)?;
    let masks: Vec<SubsetMask> = canonical_masks(n_sites).collect();
    let computed: Vec<(SubsetMask, T)> = masks
        .par_iter()
        .map(|&m| {
            let s = if m.is_empty() { T::zero() } else { entropy(m)? };
            Ok((m, s))
        })
        .collect::<Result<_>>()?;
    let mut values = vec![T::zero(); 1 << n_sites];
    for (m, s) in computed {
        values[m.index()] = s;
        values[m.complement().index()] = s;
    }
    LatticeTable::from_values(n_sites, values)
}

/// Named state families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Seeded random single-site tensor product.
    Product,
    /// Maximally entangled pairs on sites (1,2), (3,4), …
    BellPairs,
    Ghz,
    W,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Family::Product),
            "bell-pairs" | "vbs" => Ok(Family::BellPairs),
            "ghz" => Ok(Family::Ghz),
            "w" => Ok(Family::W),
            other => Err(Error::input(format!("unknown state family '{other}'"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Product => "product",
            Family::BellPairs => "bell-pairs",
            Family::Ghz => "ghz",
            Family::W => "w",
        })
    }
}

pub fn build_named_state<T: Real>(family: Family, n: usize, seed: Option<u64>) -> Result<PureState<T>> {
    check_sites(n)?;
    if n > MAX_STATE_SITES {
        return Err(Error::input(format!(
            "dense states are limited to {MAX_STATE_SITES} sites"
        )));
    }
    let dim = 1usize << n;
    let c = |x: f64| Complex::new(T::lit(x), T::zero());
    let mut amps = vec![Complex::<T>::zero(); dim];
    match family {
        Family::Ghz => {
            amps[0] = c(1.0);
            amps[dim - 1] = c(1.0);
        }
        Family::W => {
            for site in 0..n {
                amps[1 << site] = c(1.0);
            }
        }
        Family::BellPairs => {
            if n % 2 != 0 {
                return Err(Error::input(format!(
                    "bell-pairs needs an even number of sites, got {n}"
                )));
            }
            // (|00⟩ + |11⟩)/√2 on each pair: the basis index of every
            // surviving configuration has equal bits within each pair.
            for (idx, amp) in amps.iter_mut().enumerate() {
                if (0..n / 2).all(|p| (idx >> (2 * p) & 1) == (idx >> (2 * p + 1) & 1)) {
                    *amp = c(1.0);
                }
            }
        }
        Family::Product => {
            let mut rng = SplitMix64::new(seed.unwrap_or(0));
            amps = vec![c(1.0)];
            for _ in 0..n {
                let local = random_amplitudes::<T>(&mut rng, 2);
                let mut next = Vec::with_capacity(amps.len() * 2);
                for a in &amps {
                    for b in &local {
                        next.push(a * b);
                    }
                }
                amps = next;
            }
        }
    }
    PureState::normalized(n, amps)
}

/// Haar-like random state: independent standard complex Gaussian
/// amplitudes from the seeded generator, normalized.
pub fn random_state<T: Real>(n: usize, seed: u64) -> Result<PureState<T>> {
    check_sites(n)?;
    if n > MAX_STATE_SITES {
        return Err(Error::input(format!(
            "dense states are limited to {MAX_STATE_SITES} sites"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    PureState::normalized(n, random_amplitudes(&mut rng, 1 << n))
}

fn random_amplitudes<T: Real>(rng: &mut SplitMix64, len: usize) -> Vec<Complex<T>> {
    (0..len)
        .map(|_| {
            let (re, im) = rng.gaussian_pair();
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect()
}

/// On-disk state: amplitudes in basis order, split into real and
/// imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub d: usize,
    pub amps_re: Vec<f64>,
    pub amps_im: Vec<f64>,
}

impl StateFile {
    pub fn into_state<T: Real>(self) -> Result<PureState<T>> {
        if self.amps_re.len() != self.amps_im.len() {
            return Err(Error::input("amps_re and amps_im differ in length"));
        }
        let amps = self
            .amps_re
            .iter()
            .zip(&self.amps_im)
            .map(|(&re, &im)| Complex::new(T::lit(re), T::lit(im)))
            .collect();
        PureState::new(self.n, self.d, amps)
    }

    pub fn from_state<T: Real>(state: &PureState<T>) -> Self {
        Self {
            n: state.n_sites,
            d: state.local_dim,
            amps_re: state.amplitudes.iter().map(|a| a.re.as_f64()).collect(),
            amps_im: state.amplitudes.iter().map(|a| a.im.as_f64()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn mask(sites: &[usize], n: usize) -> SubsetMask {
        SubsetMask::from_sites(sites, n).unwrap()
    }

    #[test]
    fn ghz_amplitudes() {
        let s = build_named_state::<f64>(Family::Ghz, 3, None).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[7].re - h).abs() < 1e-15);
        assert!(s.amplitudes()[1..7].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn site_one_is_most_significant() {
        // |100⟩ on three sites: only site 1 is occupied.
        let mut amps = vec![Complex::new(0.0f64, 0.0); 8];
        amps[0b100] = Complex::new(1.0, 0.0);
        let s = PureState::new(3, 2, amps).unwrap();
        // Product state, but check the reshape puts site 1 in the right row.
        let spec = s.reduced_spectrum(mask(&[1], 3)).unwrap();
        assert_eq!(spec.values().len(), 2);
        assert!((spec.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_is_unentangled() {
        let s = build_named_state::<f64>(Family::Product, 4, Some(3)).unwrap();
        let t = s.entropy_table().unwrap();
        assert!(t.values().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn bell_pairs_entropies() {
        let s = build_named_state::<f64>(Family::BellPairs, 4, None).unwrap();
        assert!((s.block_entropy(mask(&[1], 4)).unwrap() - LN_2).abs() < 1e-14);
        assert!(s.block_entropy(mask(&[1, 2], 4)).unwrap().abs() < 1e-14);
        assert!((s.block_entropy(mask(&[2, 3], 4)).unwrap() - 2.0 * LN_2).abs() < 1e-14);
        assert!(matches!(
            build_named_state::<f64>(Family::BellPairs, 5, None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn w3_single_site_entropy() {
        let s = build_named_state::<f64>(Family::W, 3, None).unwrap();
        let expected = -(1.0 / 3.0f64) * (1.0 / 3.0f64).ln() - (2.0 / 3.0) * (2.0 / 3.0f64).ln();
        assert!((expected - 0.636_514_168_294_813_4).abs() < 1e-12);
        assert!((s.block_entropy(mask(&[1], 3)).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn trivial_blocks_have_unit_spectrum() {
        let s = random_state::<f64>(5, 1).unwrap();
        let e = s.reduced_spectrum(SubsetMask::empty(5).unwrap()).unwrap();
        assert_eq!(e.values(), &[1.0]);
        let f = s.reduced_spectrum(SubsetMask::full(5).unwrap()).unwrap();
        assert_eq!(f.values(), &[1.0]);
    }

    #[test]
    fn random_state_is_reproducible() {
        let a = random_state::<f64>(6, 99).unwrap();
        let b = random_state::<f64>(6, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_state::<f64>(6, 100).unwrap());
    }

    #[test]
    fn purity_symmetry() {
        let s = random_state::<f64>(6, 5).unwrap();
        for m in 0..64u32 {
            let a = SubsetMask::new(m, 6).unwrap();
            let sa = s.block_entropy(a).unwrap();
            let sb = s.block_entropy(a.complement()).unwrap();
            assert!((sa - sb).abs() < 1e-12, "{a}: {sa} vs {sb}");
        }
    }

    #[test]
    fn canonical_mask_count() {
        for n in 1..=10 {
            assert_eq!(canonical_masks(n).count(), 1 << (n - 1), "n={n}");
        }
    }

    #[test]
    fn rejects_unnormalized_and_wrong_length() {
        let amps = vec![Complex::new(1.0, 0.0); 4];
        assert!(PureState::new(2, 2, amps).is_err());
        let amps = vec![Complex::new(1.0, 0.0); 3];
        assert!(PureState::new(2, 2, amps).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = random_state::<f64>(3, 11).unwrap();
        let back = PureState::<f64>::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        let bad = r#"{"n":1,"d":2,"amps_re":[1.0,1.0],"amps_im":[0.0,0.0]}"#;
        assert!(PureState::<f64>::from_json(bad).is_err());
    }
}
