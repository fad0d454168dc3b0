//! Harmonic analysis over finite fields F_q^d and the distance-quotient
//! problem: given E ⊆ F_q^d, which ratios a/b of distances in
//! Δ(E) = {||x − y|| : x, y ∈ E} are realized?
//!
//! The crate is layered bottom-up:
//!
//! - [`field`]: F_{p^ℓ} for odd p, with discrete-log and trace tables.
//! - [`characters`]: the additive character χ, the quadratic character η,
//!   the weight λ and the Gauss sum G.
//! - [`geometry`]: the grid F_q^d, the norm `Σ x_i²`, sphere tables.
//! - [`fourier`]: the normalized transform and the sphere identities.
//! - [`distance`]: point sets, the pair-count profile ν, distance and
//!   quotient sets, theorem checkers and the subfield construction.
//! - [`pointset`]: the text format for point sets.
//! - [`harness`]: verification sweeps and seeded experiments behind the CLI.

pub mod characters;
pub mod distance;
pub mod error;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod harness;
pub mod numeric;
pub mod pointset;
mod poly;
pub mod rng;

pub use characters::CharacterCtx;
pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElement, FieldSpec};
pub use fourier::{GridFunction, SphereHats};
pub use geometry::{GridDomain, SphereTable};
