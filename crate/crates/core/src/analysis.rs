//! Numerical checks of the stability theory for the CR/P1 pair.
//!
//! * [`apply_ih`] maps a continuous P1 function `Σ q_i φ_i` to the piecewise
//!   constant `Σ q_i χ_i`, `χ_i` the indicator of the vertex patch of `i`.
//! * [`check_lemma1`] compares `(d+1) ∫ div_h v q` with `∫ div_h v I_h q`.
//! * [`check_lemma2`] samples `‖I_h q‖ / ‖q‖` over random zero-mean pressures.
//! * [`infsup_constant`] computes the discrete inf-sup constant from a dense
//!   generalized eigenproblem.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::CscMatrix;
use rand::Rng;

use crate::assembly::{
    assemble_cr_mass, assemble_divergence, assemble_p0_divergence, assemble_p0_mass, assemble_pressure_mass,
    assemble_stiffness, DiscreteField,
};
use crate::error::{Error, Result};
use crate::fe::{element_map, triangle_quadrature, DofMap, SpaceKind, DIM};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Largest pressure dimension accepted by [`infsup_constant`].
pub const INFSUP_PRESSURE_CAP: usize = 3000;

/// Relative eigenvalue threshold separating a numerical kernel from the rest of the spectrum.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementPair {
    /// Crouzeix-Raviart velocity, continuous P1 pressure.
    CrP1,
    /// Crouzeix-Raviart velocity, piecewise constant pressure.
    CrP0,
}

impl fmt::Display for ElementPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CrP1 => "CR/P1",
            Self::CrP0 => "CR/P0",
        })
    }
}

/// Velocity norm in the denominator of the inf-sup quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityNorm {
    /// `‖v‖_{1,h}`: broken stiffness plus mass.
    BrokenFull,
    /// `|v|_{1,h}`: broken stiffness only.
    BrokenSemi,
}

impl fmt::Display for VelocityNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BrokenFull => "broken-h1-norm",
            Self::BrokenSemi => "broken-h1-seminorm",
        })
    }
}

#[derive(Debug, Clone)]
pub struct InfSupReport<T: Real> {
    pub level: usize,
    pub pair: ElementPair,
    pub n_u: usize,
    pub n_p: usize,
    pub beta_h: T,
    /// Smallest eigenvalue on the zero-mean pressures; `beta_h = sqrt(spectrum_floor)`,
    /// with round-off negatives read as zero.
    pub spectrum_floor: T,
    pub norm_convention: VelocityNorm,
    /// Eigenvalues below [`KERNEL_TOLERANCE`] times the largest one: zero-mean
    /// pressures invisible to every velocity.
    pub kernel_dimension: usize,
    /// Square root of the smallest eigenvalue above that threshold.
    pub beta_h_off_kernel: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub relative_gap: T,
}

impl<T: Real> LemmaCheck<T> {
    pub fn new(lhs: T, rhs: T) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(T::lit(1e-30));
        Self { lhs, rhs, relative_gap: (lhs - rhs).abs() / scale }
    }
}

/// `I_h q`: on each triangle, the sum of `q` over its vertices.
pub fn apply_ih<T: Real>(mesh: &Mesh<T>, q: &DiscreteField<T>) -> Result<DiscreteField<T>> {
    q.expect_space(SpaceKind::P1Scalar)?;
    let c = q.coefficients();
    let values = DVector::from_iterator(
        mesh.n_triangles(),
        mesh.triangles().iter().map(|&[a, b, v]| c[a] + c[b] + c[v]),
    );
    DiscreteField::new(mesh, SpaceKind::P0Scalar, values)
}

/// `div_h v` as a piecewise constant.
pub fn broken_divergence<T: Real>(mesh: &Mesh<T>, v: &DiscreteField<T>) -> Result<DiscreteField<T>> {
    v.expect_space(SpaceKind::CrVector)?;
    let mut div = DVector::zeros(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let map = element_map(mesh, t)?;
        div[t] = v.cr_gradient(mesh, &map, t).trace();
    }
    DiscreteField::new(mesh, SpaceKind::P0Scalar, div)
}

/// Left side `(d+1) ∫ div_h v q` by quadrature of the piecewise linear
/// integrand; right side `∫ div_h v I_h q` as a sum of element constants.
pub fn check_lemma1<T: Real>(mesh: &Mesh<T>, v: &DiscreteField<T>, q: &DiscreteField<T>) -> Result<LemmaCheck<T>> {
    q.expect_space(SpaceKind::P1Scalar)?;
    let div = broken_divergence(mesh, v)?;
    let ih = apply_ih(mesh, q)?;
    let rule = triangle_quadrature::<T>(1)?;
    let mut lhs = T::zero();
    let mut rhs = T::zero();
    for t in 0..mesh.n_triangles() {
        let d = div.coefficients()[t];
        let det = element_map(mesh, t)?.det;
        let integral = rule
            .points
            .iter()
            .zip(&rule.weights)
            .fold(T::zero(), |acc, (l, &w)| acc + w * q.p1_value(mesh, t, l));
        lhs += d * det * integral;
        rhs += d * mesh.area(t) * ih.coefficients()[t];
    }
    Ok(LemmaCheck::new(T::from_usize_lossy(DIM + 1) * lhs, rhs))
}

/// Random CR velocity with uniform(-1, 1) interior coefficients and zero boundary DOFs.
pub fn random_velocity<T: Real, R: Rng + ?Sized>(mesh: &Mesh<T>, rng: &mut R) -> DiscreteField<T> {
    let dofs = DofMap::new(mesh, SpaceKind::CrVector);
    let coeffs = DVector::from_iterator(
        dofs.len(),
        (0..dofs.len()).map(|d| if dofs.is_boundary(d) { T::zero() } else { T::lit(rng.random_range(-1.0..1.0)) }),
    );
    DiscreteField::from_parts(SpaceKind::CrVector, coeffs)
}

/// Random P1 pressure with uniform(-1, 1) coefficients projected to zero mean.
pub fn random_pressure<T: Real, R: Rng + ?Sized>(mesh: &Mesh<T>, mean: &DVector<T>, rng: &mut R) -> DiscreteField<T> {
    let mut q = DVector::from_iterator(mesh.n_vertices(), (0..mesh.n_vertices()).map(|_| T::lit(rng.random_range(-1.0..1.0))));
    // w·1 = |Ω|, so subtracting (w·q / w·1) removes the mean exactly
    let shift = mean.dot(&q) / mean.sum();
    q.add_scalar_mut(-shift);
    DiscreteField::from_parts(SpaceKind::P1Scalar, q)
}

/// `‖I_h q‖₀ / ‖q‖₀`, the numerator exact on piecewise constants, the denominator via the P1 mass.
pub fn ih_norm_ratio<T: Real>(mesh: &Mesh<T>, mass_p: &CscMatrix<T>, q: &DiscreteField<T>) -> Result<T> {
    let ih = apply_ih(mesh, q)?;
    let num = (0..mesh.n_triangles()).fold(T::zero(), |acc, t| {
        let c = ih.coefficients()[t];
        acc + mesh.area(t) * c * c
    });
    let c = q.coefficients();
    let den = c.dot(&(mass_p * c));
    Ok((num / den).sqrt())
}

/// Observed `[min, max]` of `‖I_h q‖₀ / ‖q‖₀` over random zero-mean pressures.
pub fn check_lemma2<T: Real, R: Rng + ?Sized>(mesh: &Mesh<T>, samples: usize, rng: &mut R) -> Result<(T, T)> {
    let samples = samples.max(1);
    let (mass_p, mean) = assemble_pressure_mass(mesh);
    let mut lo = T::max_value().expect("bounded real");
    let mut hi = T::zero();
    for _ in 0..samples {
        let q = random_pressure(mesh, &mean, rng);
        let ratio = ih_norm_ratio(mesh, &mass_p, &q)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

fn restrict_square<T: Real>(full: &CscMatrix<T>, dofs: &DofMap) -> CscMatrix<T> {
    let mut coo = nalgebra_sparse::CooMatrix::new(dofs.n_free(), dofs.n_free());
    for (i, j, &v) in full.triplet_iter() {
        if let (Some(r), Some(c)) = (dofs.free_index(i), dofs.free_index(j)) {
            coo.push(r, c, v);
        }
    }
    CscMatrix::from(&coo)
}

fn restrict_columns<T: Real>(full: &CscMatrix<T>, dofs: &DofMap) -> CscMatrix<T> {
    let mut coo = nalgebra_sparse::CooMatrix::new(full.nrows(), dofs.n_free());
    for (i, j, &v) in full.triplet_iter() {
        if let Some(c) = dofs.free_index(j) {
            coo.push(i, c, v);
        }
    }
    CscMatrix::from(&coo)
}

/// Velocity norm matrix on the interior CR DOFs.
pub fn velocity_norm_matrix<T: Real>(mesh: &Mesh<T>, norm: VelocityNorm) -> CscMatrix<T> {
    let dofs = DofMap::new(mesh, SpaceKind::CrVector);
    let stiffness = assemble_stiffness(mesh, T::one());
    let full = match norm {
        VelocityNorm::BrokenSemi => stiffness,
        VelocityNorm::BrokenFull => &stiffness + &assemble_cr_mass(mesh),
    };
    restrict_square(&full, &dofs)
}

/// Discrete inf-sup constant with the broken `H¹` norm on the velocity.
pub fn infsup_constant<T: Real>(mesh: &Mesh<T>, pair: ElementPair) -> Result<InfSupReport<T>> {
    infsup_constant_with(mesh, pair, VelocityNorm::BrokenFull)
}

/// Smallest eigenvalue of `(B N⁻¹ Bᵀ) q = λ M q` over `wᵀ q = 0`.
///
/// The zero-mean subspace is parametrized by `q = Z y` with
/// `Z e_i = e_i - (w_i / w_last) e_last`, which leaves a positive definite pencil.
pub fn infsup_constant_with<T: Real>(mesh: &Mesh<T>, pair: ElementPair, norm: VelocityNorm) -> Result<InfSupReport<T>> {
    let (b_full, mass, mean) = match pair {
        ElementPair::CrP1 => {
            let (m, w) = assemble_pressure_mass(mesh);
            (assemble_divergence(mesh), m, w)
        }
        ElementPair::CrP0 => {
            let (m, w) = assemble_p0_mass(mesh);
            (assemble_p0_divergence(mesh), m, w)
        }
    };
    let n_p = mean.len();
    if n_p > INFSUP_PRESSURE_CAP {
        return Err(Error::DimensionCap { size: n_p, cap: INFSUP_PRESSURE_CAP });
    }
    let dofs = DofMap::new(mesh, SpaceKind::CrVector);
    let n_mat = velocity_norm_matrix(mesh, norm);
    let b = restrict_columns(&b_full, &dofs);
    let chol = CscCholesky::factor(&n_mat).map_err(|e| Error::Eigen(format!("velocity norm matrix: {e}")))?;
    let bt = DMatrix::from(&b.transpose());
    let s = &b * chol.solve(&bt);
    let s = (&s + s.transpose()) * T::lit(0.5);
    let m = DMatrix::from(&mass);

    let last = n_p - 1;
    let mut z = DMatrix::zeros(n_p, last);
    for i in 0..last {
        z[(i, i)] = T::one();
        z[(last, i)] = -mean[i] / mean[last];
    }
    let s_red = z.transpose() * &s * &z;
    let m_red = z.transpose() * &m * &z;
    let spectrum = generalized_eigenvalues(s_red, m_red)?;
    let floor = spectrum[0];
    let top = spectrum[spectrum.len() - 1];
    let threshold = T::lit(KERNEL_TOLERANCE) * top.abs();
    let kernel_dimension = spectrum.iter().take_while(|&&l| l <= threshold).count();
    let off_kernel = spectrum.get(kernel_dimension).copied().unwrap_or_else(T::zero);
    Ok(InfSupReport {
        level: mesh.level(),
        pair,
        n_u: dofs.n_free(),
        n_p,
        beta_h: floor.max(T::zero()).sqrt(),
        spectrum_floor: floor,
        norm_convention: norm,
        kernel_dimension,
        beta_h_off_kernel: off_kernel.sqrt(),
    })
}

/// Eigenvalues of `S y = λ M y` in ascending order, `M` symmetric positive definite.
fn generalized_eigenvalues<T: Real>(s: DMatrix<T>, m: DMatrix<T>) -> Result<Vec<T>> {
    let n = s.nrows();
    if n == 0 {
        return Err(Error::Eigen("empty zero-mean pressure space".into()));
    }
    let l = m.cholesky().ok_or_else(|| Error::Eigen("pressure mass not positive definite".into()))?.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Eigen("singular mass factor".into()))?;
    let c = &l_inv * s * l_inv.transpose();
    let c = (&c + c.transpose()) * T::lit(0.5);
    let eig = c.symmetric_eigen();
    let mut values: Vec<T> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::interpolate_p1;
    use crate::mesh::build_unit_square;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ih_of_constant_and_hat() {
        let mesh = build_unit_square::<f64>(1);
        let c = interpolate_p1(&mesh, |_| 2.5);
        let ih = apply_ih(&mesh, &c).unwrap();
        assert!(ih.coefficients().iter().all(|&v| v == 7.5));
        let i = 7;
        let mut hat = DVector::zeros(mesh.n_vertices());
        hat[i] = 1.0;
        let hat = DiscreteField::new(&mesh, SpaceKind::P1Scalar, hat).unwrap();
        let chi = apply_ih(&mesh, &hat).unwrap();
        let patch = mesh.vertex_patch(i).unwrap().triangles;
        for t in 0..mesh.n_triangles() {
            assert_eq!(chi.coefficients()[t], if patch.contains(&t) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn ih_of_x_on_level_zero() {
        let mesh = build_unit_square::<f64>(0);
        let q = interpolate_p1(&mesh, |p| p.x);
        let ih = apply_ih(&mesh, &q).unwrap();
        // triangle (0,0), (0.5,0), (0.5,0.5) is the first one of cell (0,0)
        assert_eq!(mesh.triangles()[0], [0, 1, 4]);
        assert_eq!(ih.coefficients()[0], 1.0);
    }

    #[test]
    fn lemma1_trivial_cases() {
        let mesh = build_unit_square::<f64>(1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let constant_v = crate::assembly::interpolate_cr(&mesh, |_| nalgebra::Vector2::new(1.0, 2.0), 7).unwrap();
        let q = interpolate_p1(&mesh, |p| p.x * 3.0 - p.y);
        let check = check_lemma1(&mesh, &constant_v, &q).unwrap();
        assert!(check.lhs.abs() < 1e-14 && check.rhs.abs() < 1e-14);

        let v = random_velocity(&mesh, &mut rng);
        let c = 1.7;
        let q = interpolate_p1(&mesh, |_| c);
        let check = check_lemma1(&mesh, &v, &q).unwrap();
        let div = broken_divergence(&mesh, &v).unwrap();
        let oracle: f64 = (0..mesh.n_triangles()).map(|t| mesh.area(t) * div.coefficients()[t]).sum::<f64>() * 3.0 * c;
        // zero boundary DOFs make both sides vanish up to round-off, so compare absolutely
        assert!((check.lhs - oracle).abs() <= 1e-13);
        assert!((check.lhs - check.rhs).abs() <= 1e-13);
    }

    #[test]
    fn lemma2_hat_ratio_matches_patch_area() {
        let mesh = build_unit_square::<f64>(0);
        let (m, _) = assemble_pressure_mass(&mesh);
        let i = 4;
        let mut hat = DVector::zeros(9);
        hat[i] = 1.0;
        let q = DiscreteField::new(&mesh, SpaceKind::P1Scalar, hat).unwrap();
        let ratio = ih_norm_ratio(&mesh, &m, &q).unwrap();
        let patch_area: f64 = mesh.vertex_patch(i).unwrap().triangles.iter().map(|&t| mesh.area(t)).sum();
        // ‖φ_i‖² = Σ_{T ∋ i} |T| / 6
        let hat_norm = (patch_area / 6.0).sqrt();
        assert!((ratio - patch_area.sqrt() / hat_norm).abs() < 1e-12);
        let c = interpolate_p1(&mesh, |_| 1.0);
        assert!((ih_norm_ratio(&mesh, &m, &c).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_pressures_have_zero_mean() {
        let mesh = build_unit_square::<f64>(2);
        let (_, w) = assemble_pressure_mass(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let q = random_pressure(&mesh, &w, &mut rng);
            assert!(w.dot(q.coefficients()).abs() < 1e-15);
        }
    }

    #[test]
    fn infsup_cr_p0_positive_on_coarse_meshes() {
        for level in 0..=1 {
            let mesh = build_unit_square::<f64>(level);
            let full = infsup_constant(&mesh, ElementPair::CrP0).unwrap();
            let semi = infsup_constant_with(&mesh, ElementPair::CrP0, VelocityNorm::BrokenSemi).unwrap();
            assert!(full.beta_h > 0.1);
            assert_eq!(full.kernel_dimension, 0);
            assert_eq!(full.beta_h, full.beta_h_off_kernel);
            assert!((full.beta_h * full.beta_h - full.spectrum_floor).abs() < 1e-14);
            // a larger velocity norm can only shrink the quotient
            assert!(full.beta_h <= semi.beta_h + 1e-12);
        }
    }

    #[test]
    fn infsup_cr_p1_sees_the_colour_modes() {
        for level in 0..=1 {
            let mesh = build_unit_square::<f64>(level);
            let r = infsup_constant(&mesh, ElementPair::CrP1).unwrap();
            assert_eq!(r.kernel_dimension, 2);
            assert!(r.beta_h < 1e-6);
            assert!(r.beta_h_off_kernel > 0.1);
        }
    }

    #[test]
    fn colour_mode_vanishes_under_ih() {
        let mesh = build_unit_square::<f64>(1);
        let colour = mesh.vertex_three_colouring().unwrap();
        let (m, w) = assemble_pressure_mass(&mesh);
        // the three colour classes carry equal mass, one third of the domain each
        for k in 0..3u8 {
            let mass: f64 = (0..colour.len()).filter(|&v| colour[v] == k).map(|v| w[v]).sum();
            assert!((mass - 1.0 / 3.0).abs() < 1e-14);
        }
        let q = DVector::from_iterator(colour.len(), colour.iter().map(|&c| [1.0, -1.0, 0.0][c as usize]));
        let q = DiscreteField::new(&mesh, SpaceKind::P1Scalar, q).unwrap();
        assert!(w.dot(q.coefficients()).abs() < 1e-15);
        assert_eq!(apply_ih(&mesh, &q).unwrap().coefficients().amax(), 0.0);
        assert_eq!(ih_norm_ratio(&mesh, &m, &q).unwrap(), 0.0);
    }

    #[test]
    fn infsup_dimension_cap() {
        let mesh = build_unit_square::<f64>(5);
        assert!(matches!(
            infsup_constant(&mesh, ElementPair::CrP1),
            Err(Error::DimensionCap { size: 4225, cap: INFSUP_PRESSURE_CAP })
        ));
    }
}
