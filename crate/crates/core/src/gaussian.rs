//! Ground states of free-fermion hopping chains
//! `H = -Σ t_i (c†_i c_{i+1} + h.c.)` and their block entropies from the
//! two-point correlation matrix.

use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, KERNEL_TOL};
use crate::error::{Error, Result};
use crate::lattice::{check_sites, LatticeTable, SubsetMask};
use crate::linalg::{sym_eigen, sym_eigenvalues, DenseMatrix};
use crate::pure::mirrored_table;
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Minimum single-particle gap at the Fermi level.
pub const GAP_TOL: f64 = 1e-9;
/// Accepted distance of block occupations from `[0, 1]`.
pub const OCCUPATION_TOL: f64 = 1e-10;
/// Projector check `‖C² - C‖_max`.
pub const PROJECTOR_TOL: f64 = 1e-9;
/// Mirror cross-check tolerance on sampled large-side blocks.
pub const MIRROR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::input(format!("unknown boundary condition '{other}'"))),
        }
    }
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }
}

/// How the hopping amplitudes are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum HoppingFamily {
    /// `t_i = t0 (1 - (-1)^i δ)`, `i = 1, 2, …`
    Dimerized { delta: f64 },
    /// `t_i = t0 u_i`, `u_i` uniform in `[0, 1)` from the seeded generator.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoppingChain {
    pub n_sites: usize,
    pub t0: f64,
    pub boundary: Boundary,
    pub family: HoppingFamily,
}

impl HoppingChain {
    pub fn dimerized(n_sites: usize, delta: f64) -> Self {
        Self {
            n_sites,
            t0: 1.0,
            boundary: Boundary::Open,
            family: HoppingFamily::Dimerized { delta },
        }
    }

    pub fn random(n_sites: usize, seed: u64) -> Self {
        Self {
            n_sites,
            t0: 1.0,
            boundary: Boundary::Open,
            family: HoppingFamily::Random { seed },
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Number of bonds: `N - 1` open, `N` periodic.
    pub fn n_bonds(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n_sites.saturating_sub(1),
            Boundary::Periodic => self.n_sites,
        }
    }
}

/// Hopping amplitudes `t_1 … t_bonds` of a chain.
pub fn build_hoppings<T: Real>(chain: &HoppingChain) -> Result<Vec<T>> {
    check_sites(chain.n_sites)?;
    if chain.n_sites < 2 {
        return Err(Error::input("a hopping chain needs at least 2 sites"));
    }
    if !(chain.t0 >= 0.0) || !chain.t0.is_finite() {
        return Err(Error::input(format!("t0 must be finite and ≥ 0, got {}", chain.t0)));
    }
    let bonds = chain.n_bonds();
    let t = match chain.family {
        HoppingFamily::Dimerized { delta } => {
            if !(delta.abs() <= 1.0) {
                return Err(Error::input(format!("|δ| must be ≤ 1, got {delta}")));
            }
            (1..=bonds)
                .map(|i| {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    chain.t0 * (1.0 - sign * delta)
                })
                .collect::<Vec<_>>()
        }
        HoppingFamily::Random { seed } => {
            let mut rng = SplitMix64::new(seed);
            (0..bonds).map(|_| chain.t0 * rng.uniform()).collect()
        }
    };
    Ok(t.into_iter().map(T::lit).collect())
}

/// Single-particle hopping matrix: `T_{i,i+1} = T_{i+1,i} = -t_i`, with
/// the corner bond `t_N` coupling sites `N` and `1` when periodic.
pub fn hopping_matrix<T: Real>(t: &[T], boundary: Boundary) -> Result<DenseMatrix<T>> {
    let n = match boundary {
        Boundary::Open => t.len() + 1,
        Boundary::Periodic => t.len(),
    };
    check_sites(n)?;
    if n < 2 {
        return Err(Error::input("a hopping chain needs at least 2 sites"));
    }
    if t.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
        return Err(Error::input("hoppings must be finite and ≥ 0"));
    }
    let mut h = DenseMatrix::zeros(n);
    for (i, &ti) in t.iter().enumerate() {
        let j = (i + 1) % n;
        h[(i, j)] -= ti;
        h[(j, i)] -= ti;
    }
    Ok(h)
}

/// Slater-determinant ground state, held through its correlation matrix
/// `C_ij = ⟨c†_i c_j⟩`.
#[derive(Clone, Debug)]
pub struct GaussianGroundState<T> {
    correlation: DenseMatrix<T>,
    /// Occupied single-particle orbitals, each of length `N`.
    orbitals: Vec<Vec<T>>,
    n_occupied: usize,
}

impl<T: Real> GaussianGroundState<T> {
    pub fn n_sites(&self) -> usize {
        self.correlation.dim()
    }

    pub fn n_occupied(&self) -> usize {
        self.n_occupied
    }

    pub fn correlation(&self) -> &DenseMatrix<T> {
        &self.correlation
    }

    /// Occupied orbitals `φ_k`, each a length-`N` vector.
    pub fn orbitals(&self) -> &[Vec<T>] {
        &self.orbitals
    }

    /// Occupations `ν_k` of the block: eigenvalues of `C` restricted to it.
    pub fn block_occupations(&self, block: SubsetMask) -> Result<Vec<T>> {
        if block.n_sites() != self.n_sites() {
            return Err(Error::input(format!(
                "block {block} does not match a {}-site chain",
                self.n_sites()
            )));
        }
        if block.is_empty() {
            return Ok(Vec::new());
        }
        let idx: Vec<usize> = block.sites().collect();
        let sub = self.correlation.principal(&idx);
        let occ = sym_eigenvalues(&sub)?.into_values();
        let tol = T::lit(OCCUPATION_TOL);
        if let Some(&bad) = occ.iter().find(|&&v| !(v >= -tol && v <= T::one() + tol)) {
            return Err(Error::NumericDomain(format!(
                "block {block} occupation {bad} outside [0, 1]"
            )));
        }
        Ok(occ)
    }

    /// `S_A = Σ_k h(ν_k)` with `h` the binary entropy.
    pub fn block_entropy(&self, block: SubsetMask) -> Result<T> {
        let tol = T::lit(KERNEL_TOL).max(T::resolution());
        self.block_occupations(block)?
            .into_iter()
            .map(|v| binary_entropy(v.max(T::zero()).min(T::one()), tol))
            .sum()
    }

    /// Entropy of every block, diagonalizing only the small side of each
    /// cut. `mirror_samples` large-side blocks are also diagonalized and
    /// compared with their mirrored value.
    pub fn entropy_table_with(&self, mirror_samples: usize) -> Result<LatticeTable<T>> {
        let table = mirrored_table(self.n_sites(), |m| self.block_entropy(m))?;
        let n = self.n_sites();
        let full = (1u64 << n) as usize;
        if mirror_samples > 0 {
            let large: Vec<SubsetMask> = crate::pure::canonical_masks(n)
                .map(|m| m.complement())
                .filter(|m| !m.is_full())
                .collect();
            let stride = (large.len() / mirror_samples).max(1);
            for &m in large.iter().step_by(stride).take(mirror_samples) {
                let direct = self.block_entropy(m)?;
                let mirrored = table.at(m);
                if (direct - mirrored).abs() > T::lit(MIRROR_TOL) {
                    return Err(Error::MirrorMismatch {
                        mask: m.bits(),
                        direct: direct.as_f64(),
                        mirrored: mirrored.as_f64(),
                    });
                }
            }
        }
        debug_assert_eq!(table.len(), full);
        Ok(table)
    }

    /// [`Self::entropy_table_with`] with 8 mirror samples.
    pub fn entropy_table(&self) -> Result<LatticeTable<T>> {
        self.entropy_table_with(8)
    }
}

/// Diagonalizes the hopping matrix and fills the `filling` lowest modes.
pub fn ground_correlation<T: Real>(
    t: &[T],
    boundary: Boundary,
    filling: usize,
) -> Result<GaussianGroundState<T>> {
    let h = hopping_matrix(t, boundary)?;
    let n = h.dim();
    if filling > n {
        return Err(Error::input(format!("filling {filling} exceeds {n} sites")));
    }
    let eig = sym_eigen(&h)?;
    if filling > 0 && filling < n {
        let below = eig.values[filling - 1];
        let above = eig.values[filling];
        if (above - below).abs() <= T::lit(GAP_TOL) {
            return Err(Error::DegenerateFermiLevel {
                below: below.as_f64(),
                above: above.as_f64(),
                gap_tol: GAP_TOL,
            });
        }
    }
    let orbitals: Vec<Vec<T>> = (0..filling)
        .map(|k| (0..n).map(|i| eig.vectors[(i, k)]).collect())
        .collect();
    let correlation = DenseMatrix::from_fn(n, |i, j| orbitals.iter().map(|phi| phi[i] * phi[j]).sum());

    let c2 = correlation.matmul(&correlation);
    let proj_err = c2.max_abs_diff(&correlation);
    if proj_err > T::lit(PROJECTOR_TOL) {
        return Err(Error::NumericDomain(format!(
            "correlation matrix is not a projector (‖C²-C‖ = {proj_err})"
        )));
    }
    Ok(GaussianGroundState {
        correlation,
        orbitals,
        n_occupied: filling,
    })
}

/// Model description accepted on disk and on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub bc: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filling: Option<usize>,
}

fn default_t0() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Dimerized,
    RandomHopping,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Dimerized => "dimerized",
            ModelKind::RandomHopping => "random-hopping",
        }
    }
}

impl ModelSpec {
    pub fn dimerized(n: usize, delta: f64) -> Self {
        Self {
            model: ModelKind::Dimerized,
            n,
            delta: Some(delta),
            t0: 1.0,
            seed: None,
            bc: Boundary::Open,
            filling: None,
        }
    }

    pub fn random_hopping(n: usize, seed: u64) -> Self {
        Self {
            model: ModelKind::RandomHopping,
            n,
            delta: None,
            t0: 1.0,
            seed: Some(seed),
            bc: Boundary::Open,
            filling: None,
        }
    }

    pub fn with_boundary(mut self, bc: Boundary) -> Self {
        self.bc = bc;
        self
    }

    pub fn chain(&self) -> Result<HoppingChain> {
        let family = match self.model {
            ModelKind::Dimerized => HoppingFamily::Dimerized {
                delta: self
                    .delta
                    .ok_or_else(|| Error::input("dimerized model needs a delta"))?,
            },
            ModelKind::RandomHopping => HoppingFamily::Random {
                seed: self
                    .seed
                    .ok_or_else(|| Error::input("random-hopping model needs a seed"))?,
            },
        };
        Ok(HoppingChain {
            n_sites: self.n,
            t0: self.t0,
            boundary: self.bc,
            family,
        })
    }

    /// Filling used when none is given: `⌊N/2⌋`.
    pub fn resolved_filling(&self) -> usize {
        self.filling.unwrap_or(self.n / 2)
    }

    pub fn ground_state<T: Real>(&self) -> Result<GaussianGroundState<T>> {
        let t = build_hoppings::<T>(&self.chain()?)?;
        ground_correlation(&t, self.bc, self.resolved_filling())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
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
    fn uniform_chain_hoppings() {
        let t: Vec<f64> = build_hoppings(&HoppingChain::dimerized(6, 0.0).with_t0(1.5)).unwrap();
        assert_eq!(t, vec![1.5; 5]);
    }

    #[test]
    fn fully_dimerized_hoppings() {
        let t: Vec<f64> = build_hoppings(&HoppingChain::dimerized(6, 1.0)).unwrap();
        assert_eq!(t, vec![2.0, 0.0, 2.0, 0.0, 2.0]);
        let p: Vec<f64> =
            build_hoppings(&HoppingChain::dimerized(6, 1.0).with_boundary(Boundary::Periodic)).unwrap();
        assert_eq!(p, vec![2.0, 0.0, 2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn delta_out_of_range() {
        assert!(matches!(
            build_hoppings::<f64>(&HoppingChain::dimerized(4, 1.5)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn random_hoppings_reproducible() {
        let a: Vec<f64> = build_hoppings(&HoppingChain::random(8, 17)).unwrap();
        let b: Vec<f64> = build_hoppings(&HoppingChain::random(8, 17)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn two_site_dimer_correlation() {
        // T = [[0,-1],[-1,0]]: bonding orbital (1,1)/√2 at energy -1.
        let g = ground_correlation(&[1.0f64], Boundary::Open, 1).unwrap();
        let c = g.correlation();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[(i, j)] - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn half_filled_uniform_chain_has_half_occupations() {
        let g = ModelSpec::dimerized(8, 0.0).ground_state::<f64>().unwrap();
        for i in 0..8 {
            assert!((g.correlation()[(i, i)] - 0.5).abs() < 1e-12);
        }
        let trace: f64 = (0..8).map(|i| g.correlation()[(i, i)]).sum();
        assert!((trace - 4.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_fermi_level_is_an_error() {
        // Periodic uniform ring with N = 4 has a degenerate zero-energy pair.
        let spec = ModelSpec::dimerized(4, 0.0).with_boundary(Boundary::Periodic);
        assert!(matches!(
            spec.ground_state::<f64>(),
            Err(Error::DegenerateFermiLevel { .. })
        ));
        // Open δ = -1 chain leaves two isolated edge sites at zero energy.
        assert!(matches!(
            ModelSpec::dimerized(6, -1.0).ground_state::<f64>(),
            Err(Error::DegenerateFermiLevel { .. })
        ));
    }

    #[test]
    fn dimer_chain_block_entropies() {
        let g = ModelSpec::dimerized(6, 1.0).ground_state::<f64>().unwrap();
        assert!(g.block_entropy(mask(&[1, 2], 6)).unwrap().abs() < 1e-14);
        assert!((g.block_entropy(mask(&[1], 6)).unwrap() - LN_2).abs() < 1e-14);
        assert_eq!(g.block_entropy(SubsetMask::empty(6).unwrap()).unwrap(), 0.0);
        let t = g.entropy_table().unwrap();
        for m in t.masks() {
            // blocks made of whole dimers are unentangled
            if (0..3).all(|p| m.contains(2 * p) == m.contains(2 * p + 1)) {
                assert!(t.at(m).abs() < 1e-12, "{m}");
            }
        }
    }

    #[test]
    fn filling_out_of_range() {
        assert!(ground_correlation(&[1.0f64, 1.0], Boundary::Open, 4).is_err());
    }

    #[test]
    fn model_spec_json() {
        let spec = ModelSpec::from_json(r#"{"model":"random-hopping","n":6,"t0":1.0,"seed":3,"bc":"periodic"}"#)
            .unwrap();
        assert_eq!(spec.model, ModelKind::RandomHopping);
        assert_eq!(spec.bc, Boundary::Periodic);
        assert_eq!(spec.resolved_filling(), 3);
        let spec = ModelSpec::from_json(r#"{"model":"dimerized","n":4,"delta":0.5}"#).unwrap();
        assert_eq!(spec.t0, 1.0);
        assert_eq!(spec.bc, Boundary::Open);
        assert!(ModelSpec::from_json(r#"{"model":"ising","n":4}"#).is_err());
    }
}
