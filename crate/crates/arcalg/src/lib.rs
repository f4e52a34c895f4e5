//! Extended Khovanov arc algebras `K_m^n`, their Koszul duals, reduction
//! systems on path algebras and bigraded Hochschild cohomology.
//!
//! The crate is organised bottom-up:
//!
//! * [`combinatorics`]: weights, cup matchings, circles and heights.
//! * [`arc_algebra`]: the diagram basis of `K_m^n` and surgery multiplication.
//! * [`presentation`]: the graph `Γ_m^n`, the quiver `Q_m^n`, quadratic relations and `ρ`.
//! * [`rewrite`]: a generic reduction-system engine on path algebras.
//! * [`koszul`]: the Koszul dual relations, the reduction system `R̄_m^n` and KL polynomials.
//! * [`hochschild`]: cochains, cocycle and coboundary systems and `HH²_q`.

pub mod arc_algebra;
pub mod combinatorics;
pub mod error;
pub mod hochschild;
pub mod koszul;
pub mod linalg;
pub mod presentation;
pub mod rewrite;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Q;
