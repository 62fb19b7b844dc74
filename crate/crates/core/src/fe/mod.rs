//! Reference elements, affine maps, degree-of-freedom maps and quadrature.

mod basis;
mod dofmap;
mod geometry;
mod quadrature;

pub use basis::{cr_reference_basis, p0_reference_basis, p1_reference_basis, ElementKind, ReferenceBasis};
pub use dofmap::{DofMap, SpaceKind};
pub use geometry::{element_map, ElementMap};
pub use quadrature::{edge_quadrature, triangle_quadrature, EdgeRule, QuadratureRule, MAX_EDGE_DEGREE, MAX_TRIANGLE_DEGREE};

/// Spatial dimension. Lemma-type identities carry the factor `DIM + 1`.
pub const DIM: usize = 2;

/// Volume quadrature degree used for loads and error norms unless overridden.
pub const DEFAULT_VOLUME_DEGREE: usize = 6;
/// Edge quadrature degree used for boundary edge means unless overridden.
pub const DEFAULT_EDGE_DEGREE: usize = 7;
