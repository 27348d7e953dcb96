//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use ehl_core::{GaussianGroundState, PureState, SplitMix64, SubsetMask};
use num_complex::Complex64;

/// `g(A) = Σ_{B⊆A} (-1)^{|A|-|B|} f(B)` by a double loop over all pairs.
pub fn brute_moebius(f: &[f64]) -> Vec<f64> {
    let len = f.len();
    (0..len)
        .map(|a| {
            (0..len)
                .filter(|&b| b & !a == 0)
                .map(|b| {
                    let sign = if (a.count_ones() - b.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * f[b]
                })
                .sum()
        })
        .collect()
}

/// `f(B) = Σ_{A⊆B} g(A)` by a double loop.
pub fn brute_zeta(g: &[f64]) -> Vec<f64> {
    let len = g.len();
    (0..len)
        .map(|b| (0..len).filter(|&a| a & !b == 0).map(|a| g[a]).sum())
        .collect()
}

pub fn random_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut v: Vec<f64> = (0..1usize << n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
    v[0] = 0.0;
    v
}

/// Number of eigenvalues of the symmetric `m` below `x`, from the signs of
/// the pivots of an unpivoted `LDLᵀ` of `m - x·1` (Sylvester's inertia).
pub fn count_below(m: &[Vec<f64>], x: f64) -> usize {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut d = a[k][k];
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let l = a[i][k] / d;
            for j in k + 1..n {
                a[i][j] -= l * a[k][j];
            }
        }
    }
    negatives
}

/// All eigenvalues (ascending) by bisection on the inertia count.
pub fn bisection_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let radius = (0..n)
        .map(|i| m[i][i].abs() + (0..n).filter(|&j| j != i).map(|j| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(m, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn random_symmetric(n: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = 2.0 * rng.uniform() - 1.0;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Orthogonal matrix as a product of random plane rotations.
pub fn random_orthogonal(n: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..4 * n * n {
        let p = (rng.next_u64() % n as u64) as usize;
        let r = (rng.next_u64() % n as u64) as usize;
        if p == r {
            continue;
        }
        let theta = std::f64::consts::TAU * rng.uniform();
        let (s, c) = theta.sin_cos();
        for row in q.iter_mut() {
            let (a, b) = (row[p], row[r]);
            row[p] = c * a - s * b;
            row[r] = s * a + c * b;
        }
    }
    q
}

/// Reduced density matrix of `block` by explicitly tracing out the rest.
/// Site 1 is the most significant basis digit.
pub fn reduced_density(state: &PureState<f64>, block: SubsetMask) -> Vec<Vec<Complex64>> {
    let n = state.n_sites();
    let amps = state.amplitudes();
    let inside: Vec<usize> = block.sites().collect();
    let digit = |idx: usize, site: usize| idx >> (n - 1 - site) & 1;
    let label = |idx: usize| inside.iter().fold(0, |acc, &s| acc << 1 | digit(idx, s));
    let rest_mask: usize = (0..n)
        .filter(|s| !block.contains(*s))
        .fold(0, |acc, s| acc | 1 << (n - 1 - s));
    let dim = 1usize << inside.len();
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for x in 0..amps.len() {
        for y in 0..amps.len() {
            if x & rest_mask == y & rest_mask {
                rho[label(x)][label(y)] += amps[x] * amps[y].conj();
            }
        }
    }
    rho
}

/// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix;
/// every eigenvalue appears twice.
pub fn real_embedding(h: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let d = h.len();
    let mut m = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            m[i][j] = h[i][j].re;
            m[i + d][j + d] = h[i][j].re;
            m[i][j + d] = -h[i][j].im;
            m[i + d][j] = h[i][j].im;
        }
    }
    m
}

pub fn von_neumann(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 1e-14)
        .map(|&p| -p * p.ln())
        .sum()
}

pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .expect("non-empty");
        if a[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= l * a[k][j];
            }
        }
    }
    det
}

/// Slater determinant of the occupied orbitals as a dense state, with the
/// fermion modes taken in the order `modes` (mode `modes[0]` becomes the
/// first tensor factor). Amplitude of an occupation pattern is the
/// determinant of the orbital rows of the occupied modes in that order.
pub fn slater_state(gs: &GaussianGroundState<f64>, modes: &[usize]) -> PureState<f64> {
    let n = gs.n_sites();
    let orbitals = gs.orbitals();
    let occ = gs.n_occupied();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (idx, amp) in amps.iter_mut().enumerate() {
        if idx.count_ones() as usize != occ {
            continue;
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .filter(|&pos| idx >> (n - 1 - pos) & 1 == 1)
            .map(|pos| orbitals.iter().map(|phi| phi[modes[pos]]).collect())
            .collect();
        *amp = Complex64::new(if occ == 0 { 1.0 } else { determinant(rows) }, 0.0);
    }
    PureState::new(n, 2, amps).expect("Slater state is normalized")
}

/// Entropy of every block from explicit Slater states: for each block the
/// modes are reordered block-first, so the block is a contiguous prefix of
/// the Jordan–Wigner string and its reduced state is local.
pub fn slater_entropy_table(gs: &GaussianGroundState<f64>) -> Vec<f64> {
    let n = gs.n_sites();
    (0..1u32 << n)
        .map(|bits| {
            let block = SubsetMask::new(bits, n).unwrap();
            if block.is_empty() || block.is_full() {
                return 0.0;
            }
            let mut modes: Vec<usize> = block.sites().collect();
            modes.extend((0..n).filter(|s| !block.contains(*s)));
            let state = slater_state(gs, &modes);
            let prefix = SubsetMask::from_sites(&(1..=block.rank()).collect::<Vec<_>>(), n).unwrap();
            let rho = reduced_density(&state, prefix);
            let doubled = ehl_core::linalg::sym_eigenvalues(
                &ehl_core::DenseMatrix::from_rows(real_embedding(&rho)).unwrap(),
            )
            .unwrap();
            // Each eigenvalue of ρ appears twice in the embedding.
            von_neumann(doubled.values()) / 2.0
        })
        .collect()
}

/// Integer linear combination of block entropies `Σ c_A S_A`, keyed by mask.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm(pub BTreeMap<u32, i64>);

impl LinearForm {
    pub fn add(&mut self, mask: u32, c: i64) {
        if mask == 0 || c == 0 {
            return;
        }
        let e = self.0.entry(mask).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&mask);
        }
    }

    /// `J_I` written out over the entropies of its sub-blocks.
    pub fn hyperlink(i: u32) -> Self {
        let mut f = LinearForm::default();
        let mut sub = i;
        loop {
            let sign = if (i.count_ones() - sub.count_ones()) % 2 == 0 { 1 } else { -1 };
            f.add(sub, sign);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & i;
        }
        f
    }

    /// Rewrites every `S_B` with `S_B = S_{B∩A} + S_{B∩Ā}` (a factorized cut
    /// at `A`), then drops `S_A` and `S_Ā`, which vanish there.
    pub fn factorize(&self, a: u32, full: u32) -> Self {
        let abar = full & !a;
        let mut out = LinearForm::default();
        for (&b, &c) in &self.0 {
            out.add(b & a, c);
            out.add(b & abar, c);
        }
        out.0.remove(&a);
        out.0.remove(&abar);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}
