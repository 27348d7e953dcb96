//! Scatter datasets over free-fermion chains: factorization scans, the
//! entropy/hyperlink envelope, sign statistics and partial-sum correlations.
//!
//! All values are in nats; [`write_csv`] converts to bits on request.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::ehl::{ehl_table, HyperlinkTable, NONZERO_TOL};
use crate::error::{Error, Result};
use crate::gaussian::{Boundary, ModelKind, ModelSpec};
use crate::io::{Unit, TOOL};
use crate::lattice::{LatticeTable, SubsetMask};
use crate::pure::canonical_masks;
use crate::rng::SplitMix64;

/// Values at or below this are treated as exact zeros in log–log statistics.
pub const EXACT_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fact1,
    Fact2,
    Monogamy,
    Signs,
    Rofell,
}

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fact1,
        Figure::Fact2,
        Figure::Monogamy,
        Figure::Signs,
        Figure::Rofell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fact1 => "fact1",
            Figure::Fact2 => "fact2",
            Figure::Monogamy => "monogamy",
            Figure::Signs => "signs",
            Figure::Rofell => "rofell",
        }
    }

    pub fn header(self) -> &'static str {
        match self {
            Figure::Fact1 => "model,n,delta_or_seed,s_min,abs_j_omega",
            Figure::Fact2 => "model,n,block_mask,rank,i_min,j_value",
            Figure::Monogamy => "model,n,block_mask,rank,s_value,j_value",
            Figure::Signs => "model,n,rank,n_nonzero,n_positive,fraction",
            Figure::Rofell => "model,n,ell,r_full,r_cutoff",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::input(format!("unknown figure '{s}'")))
    }
}

/// The chains an experiment runs over.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub deltas: Vec<f64>,
    /// Random-hopping chains per size.
    pub random_samples: usize,
    pub seed: u64,
    pub bc: Boundary,
}

/// `count` evenly spaced points from -1 to 1.
pub fn delta_sweep(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|k| (2.0 * k as f64 - (count - 1) as f64) / (count - 1) as f64)
            .collect(),
    }
}

impl ExperimentConfig {
    pub fn default_for(fig: Figure, seed: u64) -> Self {
        let (sizes, deltas, random_samples) = match fig {
            Figure::Fact1 => (vec![4, 6, 8], delta_sweep(41), 200),
            Figure::Fact2 | Figure::Monogamy => (vec![8], vec![0.0, 0.5, 0.8], 1),
            Figure::Signs | Figure::Rofell => (vec![10], vec![0.0, 0.5, 0.8], 1),
        };
        Self {
            sizes,
            deltas,
            random_samples,
            seed,
            bc: Boundary::Open,
        }
    }

    /// Seed of the `k`-th random chain.
    pub fn chain_seed(&self, k: usize) -> u64 {
        SplitMix64::derive(self.seed, k as u64).next_u64()
    }

    /// Dimerized chains first (by size, then δ), then random chains.
    pub fn models(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for &n in &self.sizes {
            for &d in &self.deltas {
                out.push(ModelSpec::dimerized(n, d).with_boundary(self.bc));
            }
        }
        for &n in &self.sizes {
            for k in 0..self.random_samples {
                out.push(ModelSpec::random_hopping(n, self.chain_seed(k)).with_boundary(self.bc));
            }
        }
        out
    }
}

fn kind_tag(m: &ModelSpec) -> String {
    match m.bc {
        Boundary::Open => m.model.label().to_string(),
        Boundary::Periodic => format!("{}:periodic", m.model.label()),
    }
}

/// Model column for datasets without a separate parameter column.
pub fn state_tag(m: &ModelSpec) -> String {
    format!("{}:{}", kind_tag(m), parameter(m))
}

fn parameter(m: &ModelSpec) -> String {
    match m.model {
        ModelKind::Dimerized => format!("delta={}", m.delta.unwrap_or(0.0)),
        ModelKind::RandomHopping => format!("seed={}", m.seed.unwrap_or(0)),
    }
}

/// Tables of one chain. Mirrored blocks are never evaluated twice.
#[derive(Clone, Debug)]
pub struct ChainTables {
    pub model: ModelSpec,
    pub entropies: LatticeTable<f64>,
    pub ehl: HyperlinkTable<f64>,
}

pub fn chain_tables(model: &ModelSpec) -> Result<ChainTables> {
    let entropies = model.ground_state::<f64>()?.entropy_table_with(0)?;
    let ehl = ehl_table(&entropies);
    Ok(ChainTables {
        model: model.clone(),
        entropies,
        ehl,
    })
}

/// Chains whose ground state is not unique are skipped and named.
#[derive(Clone, Debug)]
pub struct ChainSet {
    pub chains: Vec<ChainTables>,
    pub skipped: Vec<String>,
}

pub fn build_chains(models: &[ModelSpec]) -> Result<ChainSet> {
    let results: Vec<Result<Option<ChainTables>>> = models
        .par_iter()
        .map(|m| match chain_tables(m) {
            Ok(t) => Ok(Some(t)),
            Err(Error::DegenerateFermiLevel { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut chains = Vec::new();
    let mut skipped = Vec::new();
    for (m, r) in models.iter().zip(results) {
        match r? {
            Some(t) => chains.push(t),
            None => skipped.push(format!("{} n={}", state_tag(m), m.n)),
        }
    }
    Ok(ChainSet { chains, skipped })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fact1Row {
    pub model: String,
    pub n: usize,
    pub delta_or_seed: String,
    pub s_min: f64,
    pub abs_j_omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fact2Row {
    pub model: String,
    pub n: usize,
    pub block_mask: u32,
    pub rank: usize,
    pub i_min: f64,
    pub j_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonogamyRow {
    pub model: String,
    pub n: usize,
    pub block_mask: u32,
    pub rank: usize,
    pub s_value: f64,
    pub j_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignRow {
    pub model: String,
    pub n: usize,
    pub rank: usize,
    pub n_nonzero: usize,
    pub n_positive: usize,
    /// `None` when no hyperlink of this rank is non-zero.
    pub fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RofellRow {
    pub model: String,
    pub n: usize,
    pub ell: usize,
    pub r_full: Option<f64>,
    pub r_cutoff: Option<f64>,
}

/// Smallest entropy over non-trivial blocks.
pub fn s_min(s: &LatticeTable<f64>) -> f64 {
    canonical_masks(s.n_sites())
        .filter(|a| a.is_proper())
        .map(|a| s.at(a))
        .fold(f64::INFINITY, f64::min)
}

/// `min I(I₁, I₂)` over the `2^(|I|-1) - 1` splits of `I` into two
/// non-empty parts, with the number of splits visited.
pub fn min_split_information(s: &LatticeTable<f64>, i: SubsetMask) -> (f64, usize) {
    let bits = i.bits();
    if i.rank() < 2 {
        return (f64::INFINITY, 0);
    }
    let lowest = bits & bits.wrapping_neg();
    let rest = bits ^ lowest;
    let total = s.at_bits(bits);
    let mut best = f64::INFINITY;
    let mut count = 0;
    // Parts holding the lowest site, all but the whole block.
    let mut sub = rest;
    loop {
        let part = sub | lowest;
        if part != bits {
            let other = bits ^ part;
            best = best.min(s.at_bits(part) + s.at_bits(other) - total);
            count += 1;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    (best, count)
}

/// Per-rank counts of positive among non-zero hyperlinks, ranks `1..=N`.
pub fn sign_fractions(j: &HyperlinkTable<f64>) -> Vec<(usize, usize, usize, Option<f64>)> {
    let n = j.n_sites();
    let mut nonzero = vec![0usize; n + 1];
    let mut positive = vec![0usize; n + 1];
    for m in j.masks() {
        let v = j.at(m);
        if v.abs() > NONZERO_TOL {
            nonzero[m.rank()] += 1;
            if v > NONZERO_TOL {
                positive[m.rank()] += 1;
            }
        }
    }
    (1..=n)
        .map(|k| {
            let frac = (nonzero[k] > 0).then(|| positive[k] as f64 / nonzero[k] as f64);
            (k, nonzero[k], positive[k], frac)
        })
        .collect()
}

/// Pearson correlation; `None` if either series has no spread.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let scale_x = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
    let scale_y = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
    if sxx <= 1e-24 * scale_x || syy <= 1e-24 * scale_y {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `S_A(ℓ)` for `ℓ = 0..=N`, from crossing sums bucketed by rank.
pub fn partial_sums_by_ell(j: &HyperlinkTable<f64>, a: SubsetMask) -> Vec<f64> {
    let n = j.n_sites();
    let inside = a.bits();
    let outside = a.complement().bits();
    let mut by_rank = vec![0.0; n + 1];
    for i in j.masks() {
        if i.bits() & inside != 0 && i.bits() & outside != 0 {
            by_rank[i.rank()] += j.at(i);
        }
    }
    let mut acc = 0.0;
    by_rank
        .into_iter()
        .map(|v| {
            acc += v;
            -0.5 * acc
        })
        .collect()
}

/// `r(ℓ)` for `ℓ = 2..=N` between `S_A(ℓ)` and `S_A` over non-trivial
/// blocks; with `cutoff`, only blocks with `3 ≤ |A| ≤ N-3`.
pub fn r_of_ell(s: &LatticeTable<f64>, j: &HyperlinkTable<f64>, cutoff: bool) -> Vec<(usize, Option<f64>)> {
    let n = s.n_sites();
    let blocks: Vec<SubsetMask> = s
        .masks()
        .filter(|a| a.is_proper())
        .filter(|a| !cutoff || (a.rank() >= 3 && a.rank() + 3 <= n))
        .collect();
    let exact: Vec<f64> = blocks.iter().map(|&a| s.at(a)).collect();
    let partial: Vec<Vec<f64>> = blocks.par_iter().map(|&a| partial_sums_by_ell(j, a)).collect();
    (2..=n)
        .map(|ell| {
            let x: Vec<f64> = partial.iter().map(|p| p[ell]).collect();
            (ell, pearson(&x, &exact))
        })
        .collect()
}

pub fn fact1_rows(set: &ChainSet) -> Vec<Fact1Row> {
    set.chains
        .iter()
        .map(|c| Fact1Row {
            model: kind_tag(&c.model),
            n: c.model.n,
            delta_or_seed: match c.model.model {
                ModelKind::Dimerized => format!("{}", c.model.delta.unwrap_or(0.0)),
                ModelKind::RandomHopping => format!("{}", c.model.seed.unwrap_or(0)),
            },
            s_min: s_min(&c.entropies),
            abs_j_omega: c.ehl.top().abs(),
        })
        .collect()
}

pub fn fact2_rows(set: &ChainSet) -> Vec<Fact2Row> {
    set.chains
        .par_iter()
        .flat_map_iter(|c| {
            let tag = state_tag(&c.model);
            c.ehl
                .masks()
                .filter(|i| i.rank() >= 3)
                .map(|i| Fact2Row {
                    model: tag.clone(),
                    n: c.model.n,
                    block_mask: i.bits(),
                    rank: i.rank(),
                    i_min: min_split_information(&c.entropies, i).0,
                    j_value: c.ehl.at(i),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn monogamy_rows(set: &ChainSet) -> Vec<MonogamyRow> {
    set.chains
        .iter()
        .flat_map(|c| {
            let tag = state_tag(&c.model);
            c.ehl.masks().filter(|i| !i.is_empty()).map(move |i| MonogamyRow {
                model: tag.clone(),
                n: c.model.n,
                block_mask: i.bits(),
                rank: i.rank(),
                s_value: c.entropies.at(i),
                j_value: c.ehl.at(i),
            })
        })
        .collect()
}

pub fn sign_rows(set: &ChainSet) -> Vec<SignRow> {
    set.chains
        .iter()
        .flat_map(|c| {
            let tag = state_tag(&c.model);
            sign_fractions(&c.ehl)
                .into_iter()
                .map(move |(rank, n_nonzero, n_positive, fraction)| SignRow {
                    model: tag.clone(),
                    n: c.model.n,
                    rank,
                    n_nonzero,
                    n_positive,
                    fraction,
                })
        })
        .collect()
}

pub fn rofell_rows(set: &ChainSet) -> Vec<RofellRow> {
    set.chains
        .iter()
        .flat_map(|c| {
            let tag = state_tag(&c.model);
            let full = r_of_ell(&c.entropies, &c.ehl, false);
            let cut = r_of_ell(&c.entropies, &c.ehl, true);
            full.into_iter()
                .zip(cut)
                .map(|((ell, r_full), (_, r_cutoff))| RofellRow {
                    model: tag.clone(),
                    n: c.model.n,
                    ell,
                    r_full,
                    r_cutoff,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Rows of any dataset, in emission order.
#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Fact1(Vec<Fact1Row>),
    Fact2(Vec<Fact2Row>),
    Monogamy(Vec<MonogamyRow>),
    Signs(Vec<SignRow>),
    Rofell(Vec<RofellRow>),
}

impl Dataset {
    pub fn figure(&self) -> Figure {
        match self {
            Dataset::Fact1(_) => Figure::Fact1,
            Dataset::Fact2(_) => Figure::Fact2,
            Dataset::Monogamy(_) => Figure::Monogamy,
            Dataset::Signs(_) => Figure::Signs,
            Dataset::Rofell(_) => Figure::Rofell,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Fact1(r) => r.len(),
            Dataset::Fact2(r) => r.len(),
            Dataset::Monogamy(r) => r.len(),
            Dataset::Signs(r) => r.len(),
            Dataset::Rofell(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A dataset with the chains it came from and its summary statistics.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub dataset: Dataset,
    pub skipped: Vec<String>,
    pub summary: Vec<(String, String)>,
}

pub fn run_experiment(fig: Figure, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    if config.sizes.iter().any(|&n| n < 2 || n > crate::pure::MAX_TABLE_SITES) {
        return Err(Error::input(format!(
            "experiment sizes must lie in 2..={}",
            crate::pure::MAX_TABLE_SITES
        )));
    }
    let set = build_chains(&config.models())?;
    let dataset = match fig {
        Figure::Fact1 => Dataset::Fact1(fact1_rows(&set)),
        Figure::Fact2 => Dataset::Fact2(fact2_rows(&set)),
        Figure::Monogamy => Dataset::Monogamy(monogamy_rows(&set)),
        Figure::Signs => Dataset::Signs(sign_rows(&set)),
        Figure::Rofell => Dataset::Rofell(rofell_rows(&set)),
    };
    let mut summary = vec![
        ("rows".to_string(), dataset.len().to_string()),
        ("chains".to_string(), set.chains.len().to_string()),
        ("skipped_degenerate".to_string(), set.skipped.len().to_string()),
    ];
    summary.extend(summarize(&dataset));
    Ok(ExperimentOutput {
        config: config.clone(),
        dataset,
        skipped: set.skipped,
        summary,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_else(|| "undefined".into())
}

/// Pearson correlation of `ln x` against `ln y` over pairs with both
/// values above [`EXACT_ZERO_TOL`].
pub fn log_log_pearson(pairs: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs
        .filter(|&(a, b)| a > EXACT_ZERO_TOL && b > EXACT_ZERO_TOL)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    pearson(&x, &y)
}

pub fn summarize(data: &Dataset) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match data {
        Dataset::Fact1(rows) => {
            let dimer = rows.iter().filter(|r| r.model.starts_with("dimerized"));
            out.push((
                "loglog_pearson_dimerized".into(),
                fmt_opt(log_log_pearson(dimer.map(|r| (r.s_min, r.abs_j_omega)))),
            ));
            out.push((
                "loglog_pearson_random".into(),
                fmt_opt(log_log_pearson(
                    rows.iter()
                        .filter(|r| r.model.starts_with("random"))
                        .map(|r| (r.s_min, r.abs_j_omega)),
                )),
            ));
            let exact = rows
                .iter()
                .filter(|r| r.s_min <= EXACT_ZERO_TOL)
                .map(|r| r.abs_j_omega)
                .fold(0.0, f64::max);
            out.push(("max_abs_j_omega_at_zero_s_min".into(), format!("{exact:e}")));
        }
        Dataset::Fact2(rows) => {
            let min_x = rows.iter().map(|r| r.i_min).fold(f64::INFINITY, f64::min);
            out.push(("min_i_min".into(), format!("{min_x:e}")));
            out.push((
                "loglog_pearson".into(),
                fmt_opt(log_log_pearson(rows.iter().map(|r| (r.i_min, r.j_value.abs())))),
            ));
        }
        Dataset::Monogamy(rows) => {
            let single = rows
                .iter()
                .filter(|r| r.rank == 1)
                .map(|r| (r.s_value - LN_2).abs().max((r.j_value - LN_2).abs()))
                .fold(0.0, f64::max);
            let pair = rows
                .iter()
                .filter(|r| r.rank == 2)
                .map(|r| (r.j_value - (r.s_value - 2.0 * LN_2)).abs())
                .fold(0.0, f64::max);
            let max_j = rows.iter().map(|r| r.j_value.abs()).fold(0.0, f64::max);
            let above = rows.iter().filter(|r| r.j_value.abs() > 2.0 * LN_2 + 1e-9).count();
            out.push(("max_single_site_deviation".into(), format!("{single:e}")));
            out.push(("max_pair_relation_deviation".into(), format!("{pair:e}")));
            out.push(("max_abs_j".into(), format!("{max_j}")));
            out.push(("rows_above_2ln2".into(), above.to_string()));
        }
        Dataset::Signs(rows) => {
            for k in [2, 3] {
                let worst = rows
                    .iter()
                    .filter(|r| r.rank == k)
                    .filter_map(|r| r.fraction)
                    .fold(0.0, f64::max);
                out.push((format!("max_positive_fraction_rank{k}"), format!("{worst}")));
            }
        }
        Dataset::Rofell(rows) => {
            let worst = rows
                .iter()
                .filter(|r| r.ell == r.n)
                .map(|r| r.r_full.map_or(f64::INFINITY, |v| (v - 1.0).abs()))
                .fold(0.0, f64::max);
            out.push(("max_abs_r_full_minus_one_at_ell_n".into(), format!("{worst:e}")));
        }
    }
    out
}

fn entropic(x: f64, unit: Unit) -> String {
    format!("{}", unit.from_nats(x))
}

fn optional(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

/// CSV text: a leading `#` provenance line, the header row, then the rows.
/// Undefined values are empty fields; entropic columns are in `unit`.
pub fn write_csv(out: &ExperimentOutput, unit: Unit) -> Result<String> {
    let fig = out.dataset.figure();
    let config = serde_json::to_string(&out.config)?;
    let mut text = String::new();
    writeln!(
        text,
        "# tool={TOOL} figure={} seed={} unit={unit} config={config}",
        fig.name(),
        out.config.seed
    )
    .expect("string write");
    text.push_str(fig.header());
    text.push('\n');
    let mut line = |fields: Vec<String>| {
        text.push_str(&fields.join(","));
        text.push('\n');
    };
    match &out.dataset {
        Dataset::Fact1(rows) => rows.iter().for_each(|r| {
            line(vec![
                r.model.clone(),
                r.n.to_string(),
                r.delta_or_seed.clone(),
                entropic(r.s_min, unit),
                entropic(r.abs_j_omega, unit),
            ])
        }),
        Dataset::Fact2(rows) => rows.iter().for_each(|r| {
            line(vec![
                r.model.clone(),
                r.n.to_string(),
                r.block_mask.to_string(),
                r.rank.to_string(),
                entropic(r.i_min, unit),
                entropic(r.j_value, unit),
            ])
        }),
        Dataset::Monogamy(rows) => rows.iter().for_each(|r| {
            line(vec![
                r.model.clone(),
                r.n.to_string(),
                r.block_mask.to_string(),
                r.rank.to_string(),
                entropic(r.s_value, unit),
                entropic(r.j_value, unit),
            ])
        }),
        Dataset::Signs(rows) => rows.iter().for_each(|r| {
            line(vec![
                r.model.clone(),
                r.n.to_string(),
                r.rank.to_string(),
                r.n_nonzero.to_string(),
                r.n_positive.to_string(),
                optional(r.fraction),
            ])
        }),
        Dataset::Rofell(rows) => rows.iter().for_each(|r| {
            line(vec![
                r.model.clone(),
                r.n.to_string(),
                r.ell.to_string(),
                optional(r.r_full),
                optional(r.r_cutoff),
            ])
        }),
    }
    Ok(text)
}
