//! Worst-case optimality of linear contracts on binary signal spaces.
//!
//! A tabular contract pays `w(x)` for each vertex `x` of `{0,1}^d`. The upper
//! hull of its lifted graph yields affine contracts that dominate it, one of
//! which induces an action inside its own contact hull. Dropping that affine
//! contract's offset gives a linear contract whose worst-case payoff over all
//! compatible signal distributions is at least that of `w`.

pub mod hull;
pub mod selfowned;
pub mod tabular;
pub mod worstcase;

pub use hull::{
    concave_envelope, hull_distance, triangulation_coverage, triangulation_coverage_seeded, upper_facets,
    validity_epsilon, AffineContractFacet,
};
pub use selfowned::{affine_best_response, find_self_owned, improve_to_linear, HyperplaneSource, SelfOwnedHyperplane};
pub use tabular::{bitstring, vertex, TabularContract};
pub use worstcase::{payoff_range, worst_case_payoff, CompatibleFamily, PayoffRange};
