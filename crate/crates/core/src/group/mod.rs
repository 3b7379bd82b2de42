//! SU(2) group arithmetic, Euler coordinates, Haar quadrature and Taylor
//! monomials at the identity.

mod element;
mod quadrature;
pub mod taylor;

pub use element::{Axis, GroupElement};
pub use quadrature::{haar_integrate, quadrature_grid, shared_grid, GridFile, QuadratureGrid};
pub use taylor::{multi_indices, MultiIndex, TaylorBasis};
