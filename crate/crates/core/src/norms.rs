//! Discretization error functionals.

use nalgebra::{Matrix2, Point2};

use crate::assembly::DiscreteField;
use crate::error::Result;
use crate::fe::{element_map, triangle_quadrature, SpaceKind};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// `|u - u_h|_{1,h}`: square root of `Σ_T ∫_T ‖∇u - ∇u_h‖_F²`, with the exact
/// gradient evaluated at the quadrature points.
pub fn broken_h1_seminorm_error<T: Real, G>(
    mesh: &Mesh<T>,
    u_h: &DiscreteField<T>,
    grad_u: G,
    degree: usize,
) -> Result<T>
where
    G: Fn(&Point2<T>) -> Matrix2<T>,
{
    u_h.expect_space(SpaceKind::CrVector)?;
    let rule = triangle_quadrature::<T>(degree)?;
    let mut total = T::zero();
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t)?;
        let gh = u_h.cr_gradient(mesh, &map, t);
        total += map.det * rule.integrate_reference(|r| (grad_u(&map.map(&r)) - gh).norm_squared());
    }
    Ok(total.sqrt())
}

/// `‖p - p_h‖_{0}` for a P1 field.
pub fn l2_error<T: Real, P>(mesh: &Mesh<T>, p_h: &DiscreteField<T>, p: P, degree: usize) -> Result<T>
where
    P: Fn(&Point2<T>) -> T,
{
    p_h.expect_space(SpaceKind::P1Scalar)?;
    let rule = triangle_quadrature::<T>(degree)?;
    let mut total = T::zero();
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t)?;
        for (lambda, &w) in rule.points.iter().zip(&rule.weights) {
            let x = map.map(&Point2::new(lambda[1], lambda[2]));
            let d = p(&x) - p_h.p1_value(mesh, t, lambda);
            total += w * map.det * d * d;
        }
    }
    Ok(total.sqrt())
}

/// `|v_h|_{1,h}` of a CR field.
pub fn broken_h1_seminorm<T: Real>(mesh: &Mesh<T>, v_h: &DiscreteField<T>) -> Result<T> {
    v_h.expect_space(SpaceKind::CrVector)?;
    let mut total = T::zero();
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t)?;
        total += map.area() * v_h.cr_gradient(mesh, &map, t).norm_squared();
    }
    Ok(total.sqrt())
}
