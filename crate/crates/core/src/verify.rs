//! Executable checks of the exact hyperlink identities on a given state.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::ehl::{
    bulk_reconstruct, coarse_grained_ehl, edge_reconstruct, ehl_by_growth, ehl_table,
    even_legged_reconstruct, mutual_information, CoarseGraining, EvalMode, HyperlinkTable,
    IDENTITY_TOL, RECONSTRUCTION_TOL,
};
use crate::error::{Error, Result};
use crate::gaussian::{ModelKind, ModelSpec};
use crate::lattice::{LatticeTable, SubsetMask};
use crate::legfactors::LegFactorTable;
use crate::pure::{build_named_state, canonical_masks, random_state, Family, PureState, MAX_TABLE_SITES};
use crate::rng::SplitMix64;

/// Outcome of one identity check. `passed` holds exactly when
/// `max_residual ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub details: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64, details: Vec<String>) -> Self {
        Self {
            name: name.into(),
            passed: max_residual <= tolerance,
            max_residual,
            tolerance,
            details,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: max residual {:.3e} (tol {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.tolerance
        )?;
        for d in &self.details {
            write!(f, "; {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub state: String,
    pub n: usize,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Purity, `Σ J = 0`, odd-`N` top hyperlink, inversion, monogamy identity,
    /// rank-2 sign.
    Identities,
    /// Bulk, edge and (with leg-factors) even-legged reconstruction.
    Reconstruction,
    /// Vanishing across zero-entropy cuts; rank ≥ 3 vanishing for dimer states.
    Factorization,
    CoarseGraining,
    Growth,
    /// Single-site and pair relations of half-filled chains.
    Gaussian,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identities" => Suite::Identities,
            "reconstruction" => Suite::Reconstruction,
            "factorization" => Suite::Factorization,
            "coarse-graining" => Suite::CoarseGraining,
            "growth" => Suite::Growth,
            "gaussian" => Suite::Gaussian,
            "all" => Suite::All,
            other => return Err(Error::input(format!("unknown suite '{other}'"))),
        })
    }
}

/// Where the entropy table of a check run comes from.
#[derive(Clone, Debug)]
pub enum StateSpec {
    Pure {
        label: String,
        state: PureState<f64>,
        /// Known to be a product of singlets and unentangled sites.
        valence_bond: bool,
    },
    Gaussian(ModelSpec),
}

impl StateSpec {
    pub fn named(family: Family, n: usize, seed: Option<u64>) -> Result<Self> {
        Ok(StateSpec::Pure {
            label: format!("{family}-{n}"),
            state: build_named_state(family, n, seed)?,
            valence_bond: matches!(family, Family::BellPairs | Family::Product),
        })
    }

    pub fn random(n: usize, seed: u64) -> Result<Self> {
        Ok(StateSpec::Pure {
            label: format!("random-{n}-seed{seed}"),
            state: random_state(n, seed)?,
            valence_bond: false,
        })
    }

    /// Tensor product of two independent random states, factorized at the
    /// cut between sites `left` and `left + 1`.
    pub fn product(left: usize, right: usize, seed: u64) -> Result<Self> {
        let a = random_state(left, SplitMix64::derive(seed, 0).next_u64())?;
        let b = random_state(right, SplitMix64::derive(seed, 1).next_u64())?;
        Ok(StateSpec::Pure {
            label: format!("product-{left}x{right}-seed{seed}"),
            state: a.tensor(&b)?,
            valence_bond: false,
        })
    }

    pub fn from_state(label: impl Into<String>, state: PureState<f64>) -> Self {
        StateSpec::Pure {
            label: label.into(),
            state,
            valence_bond: false,
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::Pure { label, .. } => label.clone(),
            StateSpec::Gaussian(m) => model_label(m),
        }
    }
}

pub(crate) fn model_label(m: &ModelSpec) -> String {
    let mut label = format!("{}-{}-{}", m.model.label(), m.n, m.bc.as_str());
    match m.model {
        ModelKind::Dimerized => label.push_str(&format!("-delta{}", m.delta.unwrap_or(0.0))),
        ModelKind::RandomHopping => label.push_str(&format!("-seed{}", m.seed.unwrap_or(0))),
    }
    label
}

/// Tables of a state ready to be checked.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub label: String,
    pub entropies: LatticeTable<f64>,
    pub ehl: HyperlinkTable<f64>,
    pub valence_bond: bool,
    /// Half-filled chain on a bipartite lattice (`S_i = ln 2` applies).
    pub half_filled_bipartite: bool,
}

impl PreparedState {
    pub fn n_sites(&self) -> usize {
        self.entropies.n_sites()
    }

    pub fn from_tables(label: impl Into<String>, entropies: LatticeTable<f64>) -> Self {
        let ehl = ehl_table(&entropies);
        Self {
            label: label.into(),
            entropies,
            ehl,
            valence_bond: false,
            half_filled_bipartite: false,
        }
    }
}

pub fn prepare(spec: &StateSpec) -> Result<PreparedState> {
    match spec {
        StateSpec::Pure {
            label,
            state,
            valence_bond,
        } => {
            let mut p = PreparedState::from_tables(label.clone(), state.entropy_table()?);
            p.valence_bond = *valence_bond;
            Ok(p)
        }
        StateSpec::Gaussian(m) => {
            if m.n > MAX_TABLE_SITES {
                return Err(Error::input(format!(
                    "checks are limited to N ≤ {MAX_TABLE_SITES}, got {}",
                    m.n
                )));
            }
            let gs = m.ground_state::<f64>()?;
            let mut p = PreparedState::from_tables(model_label(m), gs.entropy_table()?);
            p.valence_bond = m.model == ModelKind::Dimerized && m.delta.map(f64::abs) == Some(1.0);
            p.half_filled_bipartite = m.n % 2 == 0 && m.resolved_filling() * 2 == m.n;
            Ok(p)
        }
    }
}

/// Tolerances and extra inputs of a check run.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub identity_tol: f64,
    pub reconstruction_tol: f64,
    /// Seed of the random coarse-grainings and growth orders.
    pub seed: u64,
    pub legs: Option<LegFactorTable>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            identity_tol: IDENTITY_TOL,
            reconstruction_tol: RECONSTRUCTION_TOL,
            seed: 0,
            legs: None,
        }
    }
}

pub fn run_checks(suite: Suite, spec: &StateSpec, opts: &CheckOptions) -> Result<SuiteReport> {
    let state = prepare(spec)?;
    check_prepared(suite, &state, opts)
}

pub fn check_prepared(suite: Suite, st: &PreparedState, opts: &CheckOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    if suite.includes(Suite::Identities) {
        checks.extend(identity_checks(st, opts)?);
    }
    if suite.includes(Suite::Reconstruction) {
        checks.extend(reconstruction_checks(st, opts)?);
    }
    if suite.includes(Suite::Factorization) {
        checks.extend(factorization_checks(st, opts));
    }
    if suite.includes(Suite::CoarseGraining) {
        checks.push(coarse_graining_check(st, opts)?);
    }
    if suite.includes(Suite::Growth) {
        checks.push(growth_check(st, opts)?);
    }
    if suite.includes(Suite::Gaussian) && st.half_filled_bipartite {
        checks.extend(gaussian_checks(st, opts));
    }
    Ok(SuiteReport {
        state: st.label.clone(),
        n: st.n_sites(),
        checks,
    })
}

fn identity_checks(st: &PreparedState, opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    let s = &st.entropies;
    let j = &st.ehl;
    let n = st.n_sites();
    let tol = opts.identity_tol;
    let mut out = Vec::new();

    let purity = s
        .masks()
        .map(|a| (s.at(a) - s.at(a.complement())).abs())
        .fold(0.0, f64::max);
    out.push(CheckReport::new("purity-symmetry", purity, tol, vec![]));
    out.push(CheckReport::new("ehl-sum-zero", j.total().abs(), tol, vec![]));

    let back = j.entropies();
    let inversion = s
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(CheckReport::new("zeta-inverts-moebius", inversion, tol, vec![]));

    if n % 2 == 1 {
        out.push(CheckReport::new(
            "top-ehl-zero-odd-n",
            j.top().abs(),
            tol,
            vec![format!("J_Omega = {:e}", j.top())],
        ));
    }

    let pairs: Vec<SubsetMask> = j.masks().filter(|m| m.rank() == 2).collect();
    if !pairs.is_empty() {
        let worst = pairs.iter().map(|&m| j.at(m)).fold(f64::NEG_INFINITY, f64::max);
        out.push(CheckReport::new(
            "rank2-nonpositive",
            worst.max(0.0),
            tol,
            vec![format!("largest rank-2 value {worst:e}")],
        ));
    }

    if n >= 3 {
        let site = |x: usize| SubsetMask::raw(1 << x, n);
        let mut worst = 0.0f64;
        for triple in j.masks().filter(|m| m.rank() == 3) {
            let sites: Vec<usize> = triple.sites().collect();
            for c in 0..3 {
                let i = site(sites[c]);
                let a = site(sites[(c + 1) % 3]);
                let b = site(sites[(c + 2) % 3]);
                let rhs = mutual_information(s, i, a.union(b))?
                    - mutual_information(s, i, a)?
                    - mutual_information(s, i, b)?;
                worst = worst.max((j.at(triple) + rhs).abs());
            }
        }
        out.push(CheckReport::new("monogamy-identity", worst, tol, vec![]));
    }
    Ok(out)
}

fn reconstruction_checks(st: &PreparedState, opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    let s = &st.entropies;
    let j = &st.ehl;
    let tol = opts.identity_tol;
    let mut bulk = 0.0f64;
    let mut edge = 0.0f64;
    for a in s.masks() {
        bulk = bulk.max((bulk_reconstruct(j, a)? - s.at(a)).abs());
        if a.is_proper() {
            edge = edge.max((edge_reconstruct(j, a)? - s.at(a)).abs());
        }
    }
    let mut out = vec![
        CheckReport::new("bulk-reconstruction", bulk, tol, vec![]),
        CheckReport::new("edge-reconstruction", edge, tol, vec![]),
    ];
    if let Some(legs) = &opts.legs {
        let n = st.n_sites();
        if legs.max_complete_rank() >= n - n % 2 {
            let mut worst = 0.0f64;
            for a in s.masks().filter(|a| a.is_proper()) {
                worst = worst.max((even_legged_reconstruct(j, a, legs)? - s.at(a)).abs());
            }
            out.push(CheckReport::new(
                "even-legged-reconstruction",
                worst,
                opts.reconstruction_tol,
                vec![],
            ));
        } else {
            out.push(CheckReport::new(
                "even-legged-reconstruction",
                f64::INFINITY,
                opts.reconstruction_tol,
                vec![format!(
                    "leg-factors cover rank ≤ {}, N = {n} needs rank {}",
                    legs.max_complete_rank(),
                    n - n % 2
                )],
            ));
        }
    }
    Ok(out)
}

fn factorization_checks(st: &PreparedState, opts: &CheckOptions) -> Vec<CheckReport> {
    let s = &st.entropies;
    let j = &st.ehl;
    let n = st.n_sites();
    let tol = opts.identity_tol;
    let cuts: Vec<SubsetMask> = canonical_masks(n)
        .filter(|a| a.is_proper() && s.at(*a).abs() <= tol)
        .collect();
    let mut crossing = 0.0f64;
    let mut additivity = 0.0f64;
    for &a in &cuts {
        let inside = a.bits();
        let outside = a.complement().bits();
        for i in j.masks() {
            if i.bits() & inside != 0 && i.bits() & outside != 0 {
                crossing = crossing.max(j.at(i).abs());
            }
            // S_B = S_{B∩A} + S_{B∩Ā} across a factorized cut.
            let split = s.at_bits(i.bits() & inside) + s.at_bits(i.bits() & outside);
            additivity = additivity.max((s.at(i) - split).abs());
        }
    }
    let detail = vec![format!("{} zero-entropy cuts", cuts.len())];
    let mut out = vec![
        CheckReport::new("factorized-cut-crossing-ehl", crossing, tol, detail.clone()),
        CheckReport::new("factorized-cut-additivity", additivity, tol, detail),
    ];
    if st.valence_bond {
        let worst = j
            .masks()
            .filter(|m| m.rank() >= 3)
            .map(|m| j.at(m).abs())
            .fold(0.0, f64::max);
        out.push(CheckReport::new("valence-bond-higher-rank", worst, tol, vec![]));
    }
    out
}

const COARSE_TRIALS: usize = 24;

fn coarse_graining_check(st: &PreparedState, opts: &CheckOptions) -> Result<CheckReport> {
    let n = st.n_sites();
    if n < 2 {
        return Ok(CheckReport::new("coarse-graining", 0.0, opts.identity_tol, vec![
            "no coarse-graining of a single site".into(),
        ]));
    }
    let mut rng = SplitMix64::derive(opts.seed, 0xC0A5);
    let mut worst = 0.0f64;
    let mut families = 0usize;
    // B = complement of A first, then random families with unused sites.
    let mut candidates: Vec<Vec<SubsetMask>> = Vec::new();
    let first = SubsetMask::raw(1, n);
    candidates.push(vec![first, first.complement()]);
    while candidates.len() < COARSE_TRIALS {
        let k = 2 + (rng.next_u64() % (n.min(4) as u64 - 1)) as usize;
        let mut bits = vec![0u32; k];
        for site in 0..n {
            let label = (rng.next_u64() % (k as u64 + 1)) as usize;
            if label < k {
                bits[label] |= 1 << site;
            }
        }
        if bits.iter().all(|&b| b != 0) {
            candidates.push(bits.into_iter().map(|b| SubsetMask::raw(b, n)).collect());
        }
    }
    for blocks in candidates {
        let cg = CoarseGraining::new(blocks)?;
        let both = coarse_grained_ehl(&st.entropies, &st.ehl, &cg, EvalMode::Verify)?;
        let fine = both.fine_sum.expect("verify mode");
        worst = worst.max((both.definition - fine).abs());
        families += 1;
    }
    Ok(CheckReport::new(
        "coarse-graining",
        worst,
        opts.identity_tol,
        vec![format!("{families} families")],
    ))
}

fn growth_check(st: &PreparedState, opts: &CheckOptions) -> Result<CheckReport> {
    let mut rng = SplitMix64::derive(opts.seed, 0x6A0);
    let mut worst = 0.0f64;
    let mut blocks = 0usize;
    for i in st.ehl.masks().filter(|m| m.rank() >= 2) {
        let mut order: Vec<usize> = i.sites().collect();
        worst = worst.max((ehl_by_growth(&st.entropies, &order)? - st.ehl.at(i)).abs());
        for k in (1..order.len()).rev() {
            let r = (rng.next_u64() % (k as u64 + 1)) as usize;
            order.swap(k, r);
        }
        worst = worst.max((ehl_by_growth(&st.entropies, &order)? - st.ehl.at(i)).abs());
        blocks += 1;
    }
    Ok(CheckReport::new(
        "growth-order-independence",
        worst,
        opts.identity_tol,
        vec![format!("{blocks} blocks, two orders each")],
    ))
}

fn gaussian_checks(st: &PreparedState, opts: &CheckOptions) -> Vec<CheckReport> {
    let s = &st.entropies;
    let j = &st.ehl;
    let tol = opts.reconstruction_tol;
    let single = s
        .masks()
        .filter(|m| m.rank() == 1)
        .map(|m| (s.at(m) - LN_2).abs().max((j.at(m) - LN_2).abs()))
        .fold(0.0, f64::max);
    let pair = s
        .masks()
        .filter(|m| m.rank() == 2)
        .map(|m| (j.at(m) - (s.at(m) - 2.0 * LN_2)).abs())
        .fold(0.0, f64::max);
    vec![
        CheckReport::new("single-site-ln2", single, tol, vec![]),
        CheckReport::new("pair-relation-2ln2", pair, tol, vec![]),
    ]
}
