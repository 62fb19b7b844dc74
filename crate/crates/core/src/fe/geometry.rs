use nalgebra::{Matrix2, Point2, Vector2};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Affine map `x = origin + J ξ` from the reference triangle onto a physical one.
#[derive(Debug, Clone, Copy)]
pub struct ElementMap<T: Real> {
    pub origin: Point2<T>,
    pub jacobian: Matrix2<T>,
    pub det: T,
    /// `J^{-T}`, maps reference gradients to physical gradients.
    pub inverse_transpose: Matrix2<T>,
}

pub fn element_map<T: Real>(mesh: &Mesh<T>, t: usize) -> Result<ElementMap<T>> {
    if t >= mesh.n_triangles() {
        return Err(Error::IndexOutOfRange { what: "triangle", index: t, len: mesh.n_triangles() });
    }
    ElementMap::from_points(&mesh.triangle_points(t)).map_err(|e| match e {
        Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { triangle: t, area },
        other => other,
    })
}

impl<T: Real> ElementMap<T> {
    pub fn from_points(p: &[Point2<T>; 3]) -> Result<Self> {
        let jacobian = Matrix2::from_columns(&[p[1] - p[0], p[2] - p[0]]);
        let det = jacobian.determinant();
        if det <= T::zero() {
            return Err(Error::DegenerateTriangle { triangle: 0, area: (det * T::lit(0.5)).as_f64() });
        }
        let inv = Matrix2::new(jacobian.m22, -jacobian.m12, -jacobian.m21, jacobian.m11) / det;
        Ok(Self { origin: p[0], jacobian, det, inverse_transpose: inv.transpose() })
    }

    pub fn area(&self) -> T {
        self.det * T::lit(0.5)
    }

    pub fn map(&self, reference: &Point2<T>) -> Point2<T> {
        self.origin + self.jacobian * reference.coords
    }

    pub fn physical_gradient(&self, reference_gradient: &Vector2<T>) -> Vector2<T> {
        self.inverse_transpose * reference_gradient
    }

    /// Physical gradients of the barycentric coordinates (constant on the element).
    pub fn barycentric_gradients(&self) -> [Vector2<T>; 3] {
        super::basis::barycentric_gradients::<T>().map(|g| self.physical_gradient(&g))
    }
}
