//! Entanglement hyperlinks: inclusion–exclusion transforms of subsystem
//! entropy tables, with pure-state and free-fermion entropy sources.
//!
//! Blocks are bit masks with bit 0 for site 1. Tables hold one value per
//! block, indexed by mask. The numeric core is generic over [`Real`]; the
//! aliases below fix it to `f64` or `f32`.
//!
//! ```
//! use ehl_core::{ehl_table, random_state, SubsetMask};
//!
//! let s = random_state::<f64>(4, 1).unwrap().entropy_table().unwrap();
//! let j = ehl_table(&s);
//! let a = SubsetMask::from_sites(&[1, 3], 4).unwrap();
//! let edge = ehl_core::edge_reconstruct(&j, a).unwrap();
//! assert!((edge - s.at(a)).abs() < 1e-10);
//! ```

pub mod ehl;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod io;
pub mod lattice;
pub mod legfactors;
pub mod linalg;
pub mod pure;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use ehl::{
    bulk_reconstruct, coarse_grained_ehl, conditional_ehl, edge_reconstruct, ehl_by_growth,
    ehl_table, even_legged_reconstruct, monogamy, mutual_information, partial_sum, CoarseGraining,
    EvalMode, HyperlinkTable,
};
pub use entropy::{binary_entropy, spectrum_entropy, Spectrum};
pub use error::{Error, Result};
pub use gaussian::{Boundary, GaussianGroundState, ModelKind, ModelSpec};
pub use lattice::{crosses, LatticeTable, SubsetMask};
pub use legfactors::{solve_leg_factors, verify_count_identity, LegFactorTable};
pub use linalg::DenseMatrix;
pub use pure::{build_named_state, random_state, Family, PureState};
pub use rng::SplitMix64;
pub use scalar::Real;

pub type EntropyTable = LatticeTable<f64>;
pub type EhlTable = HyperlinkTable<f64>;
pub type State = PureState<f64>;
pub type GroundState = GaussianGroundState<f64>;

pub type EntropyTableF32 = LatticeTable<f32>;
pub type EhlTableF32 = HyperlinkTable<f32>;
pub type StateF32 = PureState<f32>;
pub type GroundStateF32 = GaussianGroundState<f32>;
