use nalgebra::{Point2, Vector2};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Nonconforming P1, one edge-mean degree of freedom per edge.
    CrouzeixRaviart,
    /// Continuous P1 with vertex values.
    Lagrange1,
    /// Piecewise constants.
    Constant,
}

/// Shape functions on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Local numbering: P1 function `k` belongs to vertex `k`; CR function `k` belongs
/// to the edge opposite vertex `k` and equals `1 - 2 λ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceBasis {
    kind: ElementKind,
}

pub fn cr_reference_basis() -> ReferenceBasis {
    ReferenceBasis { kind: ElementKind::CrouzeixRaviart }
}

pub fn p1_reference_basis() -> ReferenceBasis {
    ReferenceBasis { kind: ElementKind::Lagrange1 }
}

pub fn p0_reference_basis() -> ReferenceBasis {
    ReferenceBasis { kind: ElementKind::Constant }
}

/// Barycentric coordinates of a reference point.
pub(crate) fn barycentric<T: Real>(p: &Point2<T>) -> [T; 3] {
    [T::one() - p.x - p.y, p.x, p.y]
}

/// Reference gradients of the barycentric coordinates.
pub(crate) fn barycentric_gradients<T: Real>() -> [Vector2<T>; 3] {
    [
        Vector2::new(-T::one(), -T::one()),
        Vector2::new(T::one(), T::zero()),
        Vector2::new(T::zero(), T::one()),
    ]
}

impl ReferenceBasis {
    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        match self.kind {
            ElementKind::Constant => 1,
            _ => 3,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values<T: Real>(&self, p: &Point2<T>) -> Vec<T> {
        let lambda = barycentric(p);
        let two = T::lit(2.0);
        match self.kind {
            ElementKind::Lagrange1 => lambda.to_vec(),
            ElementKind::CrouzeixRaviart => lambda.iter().map(|&l| T::one() - two * l).collect(),
            ElementKind::Constant => vec![T::one()],
        }
    }

    pub fn gradients<T: Real>(&self, _p: &Point2<T>) -> Vec<Vector2<T>> {
        let g = barycentric_gradients::<T>();
        match self.kind {
            ElementKind::Lagrange1 => g.to_vec(),
            ElementKind::CrouzeixRaviart => g.iter().map(|v| v * T::lit(-2.0)).collect(),
            ElementKind::Constant => vec![Vector2::zeros()],
        }
    }
}
