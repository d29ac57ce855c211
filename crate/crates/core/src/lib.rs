//! Universal sums of generalized m-gonal numbers.
//!
//! - [`polygonal`]: values P_m(x), bounded representation sets and truants
//! - [`escalator`]: escalator trees and empirical γ_m
//! - [`lattice`]: the form ↔ shifted-lattice dictionary and exact counts r(h, X)
//! - [`localdensity`]: exact local densities, residue-count oracles and case bounds
//! - [`constructions`]: forms missing exactly one value, and γ_m ≥ m − 4 witnesses
//! - [`cli`]: the `mgonal` command-line front end

pub mod arith;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod escalator;
pub mod lattice;
pub mod localdensity;
pub mod polygonal;

pub use error::{Error, Result};
pub use escalator::{build_tree, EscalatorTree, GammaEstimate, TreeConfig};
pub use lattice::{h_of_ell, lattice_from_form, representation_count, ShiftedDiagonalLattice};
pub use localdensity::{local_density, Density, DensityMethod, JordanDecomposition};
pub use polygonal::{
    polygonal_value, represented_set, truant, PolygonalForm, RepresentationSet, Truant,
};
