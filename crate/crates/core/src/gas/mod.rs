//! Gas-side physics: pressure law, friction, box scheme and node coupling.

pub mod constants;
pub mod coupling;
pub mod friction;
pub mod scheme;

pub use constants::GasConstants;
pub use coupling::{bernoulli_invariant, coupling_residual, CouplingKind, EndState};
pub use friction::{friction_lambda, reynolds, PipeFriction, RE_MIN};
pub use scheme::{box_scheme_residual, flux, source, PipeState};
