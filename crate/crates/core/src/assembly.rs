//! Global assembly of the Stokes blocks on CR velocity x P1 pressure.
//!
//! Element matrices use constant gradients, so stiffness, divergence and mass
//! entries are closed-form; only the load and boundary data need quadrature.

use nalgebra::{DVector, Matrix2, Matrix3, Point2, SMatrix, Vector2};
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};
use crate::fe::{edge_quadrature, element_map, triangle_quadrature, DofMap, ElementMap, SpaceKind};
use crate::fe::{DEFAULT_EDGE_DEGREE, DEFAULT_VOLUME_DEGREE};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Coefficient vector tagged with the space it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField<T: Real> {
    space: SpaceKind,
    coefficients: DVector<T>,
}

pub fn space_dimension<T: Real>(mesh: &Mesh<T>, space: SpaceKind) -> usize {
    match space {
        SpaceKind::CrVector => 2 * mesh.n_edges(),
        SpaceKind::P1Scalar => mesh.n_vertices(),
        SpaceKind::P0Scalar => mesh.n_triangles(),
    }
}

impl<T: Real> DiscreteField<T> {
    pub fn new(mesh: &Mesh<T>, space: SpaceKind, coefficients: DVector<T>) -> Result<Self> {
        let expected = space_dimension(mesh, space);
        if coefficients.len() != expected {
            return Err(Error::LengthMismatch { expected, found: coefficients.len() });
        }
        Ok(Self { space, coefficients })
    }

    pub(crate) fn from_parts(space: SpaceKind, coefficients: DVector<T>) -> Self {
        Self { space, coefficients }
    }

    pub fn zeros(mesh: &Mesh<T>, space: SpaceKind) -> Self {
        Self { space, coefficients: DVector::zeros(space_dimension(mesh, space)) }
    }

    pub fn space(&self) -> SpaceKind {
        self.space
    }

    pub fn coefficients(&self) -> &DVector<T> {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> DVector<T> {
        self.coefficients
    }

    pub fn expect_space(&self, space: SpaceKind) -> Result<()> {
        if self.space != space {
            return Err(Error::SpaceMismatch { expected: space, found: self.space });
        }
        Ok(())
    }

    /// Gradient of a CR velocity on triangle `t`; row `c` is the gradient of component `c`.
    pub fn cr_gradient(&self, mesh: &Mesh<T>, map: &ElementMap<T>, t: usize) -> Matrix2<T> {
        debug_assert_eq!(self.space, SpaceKind::CrVector);
        let grads = cr_gradients(map);
        let edges = mesh.triangle_edges(t);
        let ne = mesh.n_edges();
        let mut g = Matrix2::zeros();
        for c in 0..2 {
            let row = edges
                .iter()
                .zip(&grads)
                .fold(Vector2::zeros(), |acc, (&e, gk)| acc + gk * self.coefficients[c * ne + e]);
            g.set_row(c, &row.transpose());
        }
        g
    }

    /// Value of a CR velocity on triangle `t` at barycentric coordinates `lambda`.
    pub fn cr_value(&self, mesh: &Mesh<T>, t: usize, lambda: &[T; 3]) -> Vector2<T> {
        let edges = mesh.triangle_edges(t);
        let ne = mesh.n_edges();
        let two = T::lit(2.0);
        let mut v = Vector2::zeros();
        for k in 0..3 {
            let psi = T::one() - two * lambda[k];
            for c in 0..2 {
                v[c] += psi * self.coefficients[c * ne + edges[k]];
            }
        }
        v
    }

    /// Value of a P1 field on triangle `t` at barycentric coordinates `lambda`.
    pub fn p1_value(&self, mesh: &Mesh<T>, t: usize, lambda: &[T; 3]) -> T {
        debug_assert_eq!(self.space, SpaceKind::P1Scalar);
        let tri = mesh.triangles()[t];
        (0..3).fold(T::zero(), |acc, k| acc + lambda[k] * self.coefficients[tri[k]])
    }
}

/// Physical CR gradients on an element, `∇ψ_k = -2 ∇λ_k`.
pub fn cr_gradients<T: Real>(map: &ElementMap<T>) -> [Vector2<T>; 3] {
    map.barycentric_gradients().map(|g| g * T::lit(-2.0))
}

/// Scalar CR stiffness `ν ∫_T ∇ψ_j · ∇ψ_k`.
pub fn cr_local_stiffness<T: Real>(map: &ElementMap<T>, nu: T) -> Matrix3<T> {
    let g = cr_gradients(map);
    let scale = nu * map.area();
    Matrix3::from_fn(|j, k| scale * g[j].dot(&g[k]))
}

/// CR mass `∫_T ψ_j ψ_k = |T|/3 δ_jk`.
pub fn cr_local_mass<T: Real>(area: T) -> Matrix3<T> {
    Matrix3::identity() * (area / T::lit(3.0))
}

/// P1 mass `∫_T λ_j λ_k = |T|/12 (1 + δ_jk)`.
pub fn p1_local_mass<T: Real>(area: T) -> Matrix3<T> {
    Matrix3::from_fn(|j, k| if j == k { area / T::lit(6.0) } else { area / T::lit(12.0) })
}

/// Local divergence coupling: row `i` is the P1 function of vertex `i`, column
/// `3 c + k` is component `c` of CR function `k`. Entry `∂_c ψ_k |T| / 3`.
pub fn local_divergence<T: Real>(map: &ElementMap<T>) -> SMatrix<T, 3, 6> {
    let g = cr_gradients(map);
    let third = map.area() / T::lit(3.0);
    SMatrix::from_fn(|_, col| g[col % 3][col / 3] * third)
}

fn coo_to_csc<T: Real>(coo: &CooMatrix<T>) -> CscMatrix<T> {
    CscMatrix::from(coo)
}

/// Full vector CR stiffness `a(u, v)` over all `2 E` DOFs (no boundary conditions).
pub fn assemble_stiffness<T: Real>(mesh: &Mesh<T>, nu: T) -> CscMatrix<T> {
    let n = 2 * mesh.n_edges();
    let ne = mesh.n_edges();
    let mut coo = CooMatrix::new(n, n);
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t).expect("mesh triangles are valid");
        let local = cr_local_stiffness(&map, nu);
        let edges = mesh.triangle_edges(t);
        for c in 0..2 {
            for j in 0..3 {
                for k in 0..3 {
                    coo.push(c * ne + edges[j], c * ne + edges[k], local[(j, k)]);
                }
            }
        }
    }
    coo_to_csc(&coo)
}

/// Full vector CR mass matrix over all `2 E` DOFs.
pub fn assemble_cr_mass<T: Real>(mesh: &Mesh<T>) -> CscMatrix<T> {
    let n = 2 * mesh.n_edges();
    let ne = mesh.n_edges();
    let mut coo = CooMatrix::new(n, n);
    for t in 0..mesh.n_triangles() {
        let m = cr_local_mass(mesh.area(t))[(0, 0)];
        for c in 0..2 {
            for &e in &mesh.triangle_edges(t) {
                coo.push(c * ne + e, c * ne + e, m);
            }
        }
    }
    coo_to_csc(&coo)
}

/// `b(v, q)` for CR velocities against P1 pressures, `V x 2E`.
pub fn assemble_divergence<T: Real>(mesh: &Mesh<T>) -> CscMatrix<T> {
    let ne = mesh.n_edges();
    let mut coo = CooMatrix::new(mesh.n_vertices(), 2 * ne);
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t).expect("mesh triangles are valid");
        let local = local_divergence(&map);
        let tri = mesh.triangles()[t];
        let edges = mesh.triangle_edges(t);
        for (i, &v) in tri.iter().enumerate() {
            for c in 0..2 {
                for (k, &e) in edges.iter().enumerate() {
                    coo.push(v, c * ne + e, local[(i, 3 * c + k)]);
                }
            }
        }
    }
    coo_to_csc(&coo)
}

/// `b(v, q)` for CR velocities against piecewise constants, `T x 2E`.
pub fn assemble_p0_divergence<T: Real>(mesh: &Mesh<T>) -> CscMatrix<T> {
    let ne = mesh.n_edges();
    let mut coo = CooMatrix::new(mesh.n_triangles(), 2 * ne);
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t).expect("mesh triangles are valid");
        let g = cr_gradients(&map);
        for (k, &e) in mesh.triangle_edges(t).iter().enumerate() {
            for (c, &gc) in g[k].iter().enumerate() {
                coo.push(t, c * ne + e, gc * map.area());
            }
        }
    }
    coo_to_csc(&coo)
}

/// Piecewise-constant mass (diagonal element areas) and its mean vector.
pub fn assemble_p0_mass<T: Real>(mesh: &Mesh<T>) -> (CscMatrix<T>, DVector<T>) {
    let n = mesh.n_triangles();
    let mut coo = CooMatrix::new(n, n);
    let mut mean = DVector::zeros(n);
    for t in 0..n {
        coo.push(t, t, mesh.area(t));
        mean[t] = mesh.area(t);
    }
    (coo_to_csc(&coo), mean)
}

/// P1 mass matrix and the mean vector `w_i = ∫ φ_i`.
pub fn assemble_pressure_mass<T: Real>(mesh: &Mesh<T>) -> (CscMatrix<T>, DVector<T>) {
    let n = mesh.n_vertices();
    let mut coo = CooMatrix::new(n, n);
    let mut mean = DVector::zeros(n);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.area(t);
        let local = p1_local_mass(area);
        for j in 0..3 {
            mean[tri[j]] += area / T::lit(3.0);
            for k in 0..3 {
                coo.push(tri[j], tri[k], local[(j, k)]);
            }
        }
    }
    (coo_to_csc(&coo), mean)
}

/// Load `ℓ(ψ) = ∫ f · ψ` over all `2 E` CR DOFs.
pub fn assemble_load<T: Real, F>(mesh: &Mesh<T>, f: F, degree: usize) -> Result<DVector<T>>
where
    F: Fn(&Point2<T>) -> Vector2<T>,
{
    let rule = triangle_quadrature::<T>(degree)?;
    let ne = mesh.n_edges();
    let mut load = DVector::zeros(2 * ne);
    let two = T::lit(2.0);
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t)?;
        let edges = mesh.triangle_edges(t);
        for (lambda, &w) in rule.points.iter().zip(&rule.weights) {
            let x = map.map(&Point2::new(lambda[1], lambda[2]));
            let fx = f(&x) * (w * map.det);
            for k in 0..3 {
                let psi = T::one() - two * lambda[k];
                for c in 0..2 {
                    load[c * ne + edges[k]] += fx[c] * psi;
                }
            }
        }
    }
    Ok(load)
}

/// CR interpolant by edge means on every edge.
pub fn interpolate_cr<T: Real, G>(mesh: &Mesh<T>, g: G, degree: usize) -> Result<DiscreteField<T>>
where
    G: Fn(&Point2<T>) -> Vector2<T>,
{
    let rule = edge_quadrature::<T>(degree)?;
    let ne = mesh.n_edges();
    let mut coeffs = DVector::zeros(2 * ne);
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        for c in 0..2 {
            coeffs[c * ne + e] = rule.mean(&pa, &pb, |x| g(&x)[c]);
        }
    }
    DiscreteField::new(mesh, SpaceKind::CrVector, coeffs)
}

/// Edge means of `g` on boundary edges; interior DOFs are zero.
pub fn interpolate_boundary<T: Real, G>(mesh: &Mesh<T>, g: G, degree: usize) -> Result<DiscreteField<T>>
where
    G: Fn(&Point2<T>) -> Vector2<T>,
{
    let rule = edge_quadrature::<T>(degree)?;
    let ne = mesh.n_edges();
    let mut coeffs = DVector::zeros(2 * ne);
    for (e, edge) in mesh.edges().iter().enumerate().filter(|(_, e)| e.boundary) {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        for c in 0..2 {
            coeffs[c * ne + e] = rule.mean(&pa, &pb, |x| g(&x)[c]);
        }
    }
    DiscreteField::new(mesh, SpaceKind::CrVector, coeffs)
}

/// Nodal P1 interpolant.
pub fn interpolate_p1<T: Real, P>(mesh: &Mesh<T>, p: P) -> DiscreteField<T>
where
    P: Fn(&Point2<T>) -> T,
{
    let coeffs = DVector::from_iterator(mesh.n_vertices(), mesh.vertices().iter().map(p));
    DiscreteField { space: SpaceKind::P1Scalar, coefficients: coeffs }
}

/// Quadrature degrees for loads (volume) and boundary edge means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureDegrees {
    pub volume: usize,
    pub edge: usize,
}

impl Default for QuadratureDegrees {
    fn default() -> Self {
        Self { volume: DEFAULT_VOLUME_DEGREE, edge: DEFAULT_EDGE_DEGREE }
    }
}

/// Saddle-point blocks after eliminating the boundary velocity DOFs.
///
/// Velocity unknowns are the free CR DOFs (compact numbering from [`DofMap`]);
/// pressure unknowns are all vertices.
#[derive(Debug, Clone)]
pub struct SparseSystem<T: Real> {
    pub dofs: DofMap,
    /// `a(·,·)` on free DOFs.
    pub a: CscMatrix<T>,
    /// `b(·,·)`, pressures by free velocity DOFs.
    pub b: CscMatrix<T>,
    pub mass_p: CscMatrix<T>,
    /// `w_i = ∫ φ_i`.
    pub mean: DVector<T>,
    /// `ℓ(ψ) - a(u_g, ψ)` on free DOFs.
    pub load: DVector<T>,
    /// `-b(u_g, φ_i)`.
    pub div_rhs: DVector<T>,
    /// Full CR vector carrying the Dirichlet edge means (zero on free DOFs).
    pub boundary_values: DVector<T>,
    pub nu: T,
    /// Zero-mean pressures annihilated by `Bᵀ`, orthonormal in the `M_p` inner
    /// product. See [`pressure_kernel_modes`].
    pub pressure_modes: Vec<DVector<T>>,
}

/// Splits a matrix with full CR columns into its free-column block and the
/// product of its boundary columns with `boundary_values`.
fn split_columns<T: Real>(
    full: &CscMatrix<T>,
    dofs: &DofMap,
    row_map: impl Fn(usize) -> Option<usize>,
    n_rows: usize,
    boundary_values: &DVector<T>,
) -> (CscMatrix<T>, DVector<T>) {
    let mut coo = CooMatrix::new(n_rows, dofs.n_free());
    let mut lifted = DVector::zeros(n_rows);
    for (i, j, &v) in full.triplet_iter() {
        let Some(row) = row_map(i) else { continue };
        match dofs.free_index(j) {
            Some(col) => coo.push(row, col, v),
            None => lifted[row] += v * boundary_values[j],
        }
    }
    (CscMatrix::from(&coo), lifted)
}

/// Assembles the reduced Stokes system for viscosity `nu`, body force `f` and
/// Dirichlet velocity `g` (imposed through boundary edge means).
pub fn assemble_system<T: Real, F, G>(
    mesh: &Mesh<T>,
    nu: T,
    f: F,
    g: G,
    degrees: QuadratureDegrees,
) -> Result<SparseSystem<T>>
where
    F: Fn(&Point2<T>) -> Vector2<T>,
    G: Fn(&Point2<T>) -> Vector2<T>,
{
    let dofs = DofMap::new(mesh, SpaceKind::CrVector);
    let boundary_values = interpolate_boundary(mesh, g, degrees.edge)?.into_coefficients();
    let full_a = assemble_stiffness(mesh, nu);
    let full_b = assemble_divergence(mesh);
    let full_load = assemble_load(mesh, f, degrees.volume)?;

    let (a, a_lift) = split_columns(&full_a, &dofs, |i| dofs.free_index(i), dofs.n_free(), &boundary_values);
    let (b, b_lift) = split_columns(&full_b, &dofs, Some, mesh.n_vertices(), &boundary_values);
    let load = DVector::from_iterator(
        dofs.n_free(),
        dofs.free_dofs().iter().zip(a_lift.iter()).map(|(&d, &l)| full_load[d] - l),
    );
    let (mass_p, mean) = assemble_pressure_mass(mesh);
    let pressure_modes = pressure_kernel_modes(mesh, &b, &mass_p, &mean);
    Ok(SparseSystem { dofs, a, b, mass_p, mean, load, div_rhs: -b_lift, boundary_values, nu, pressure_modes })
}

/// Non-constant pressures that no interior CR velocity can see.
///
/// `b(v, q)` only depends on the vertex sums of `q` on each triangle, so when the
/// vertices admit a colouring with all three colours on every triangle, each
/// colour indicator has vertex sum 1 everywhere and pairs with `div_h v` exactly
/// like the constant `1/3` does. Two zero-mean combinations of the indicators
/// then lie in the kernel of `Bᵀ` (`b` given by its free columns). The modes are
/// checked against `b` before being returned and are `M_p`-orthonormalized.
pub fn pressure_kernel_modes<T: Real>(
    mesh: &Mesh<T>,
    b: &CscMatrix<T>,
    mass_p: &CscMatrix<T>,
    mean: &DVector<T>,
) -> Vec<DVector<T>> {
    let Some(colour) = mesh.vertex_three_colouring() else { return Vec::new() };
    let scale = b.values().iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let limit = T::lit(1e3) * T::default_epsilon() * scale.max(T::one());
    let bt = b.transpose();
    let total = mean.sum();
    let mut modes: Vec<DVector<T>> = Vec::with_capacity(2);
    for c in 0..2u8 {
        let mut z = DVector::from_iterator(colour.len(), colour.iter().map(|&k| if k == c { T::one() } else { T::zero() }));
        let shift = mean.dot(&z) / total;
        z.add_scalar_mut(-shift);
        if (&bt * &z).amax() > limit {
            return Vec::new();
        }
        for prev in &modes {
            let overlap = prev.dot(&(mass_p * &z));
            z.axpy(-overlap, prev, T::one());
        }
        let norm = z.dot(&(mass_p * &z)).sqrt();
        modes.push(z / norm);
    }
    modes
}

impl<T: Real> SparseSystem<T> {
    pub fn n_velocity(&self) -> usize {
        self.dofs.n_free()
    }

    pub fn n_pressure(&self) -> usize {
        self.mean.len()
    }

    /// Scatters free velocity values into a full CR vector holding the boundary data.
    pub fn expand_velocity(&self, free: &DVector<T>) -> DVector<T> {
        let mut full = self.boundary_values.clone();
        for (&dof, &v) in self.dofs.free_dofs().iter().zip(free.iter()) {
            full[dof] = v;
        }
        full
    }

    /// Restricts a full CR vector to the free DOFs.
    pub fn restrict_velocity(&self, full: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(self.dofs.n_free(), self.dofs.free_dofs().iter().map(|&d| full[d]))
    }
}
