//! Solution of the constrained saddle-point system
//!
//! ```text
//! [ A   Bᵀ  0 ] [u]   [ℓ]
//! [ B   0   C ] [π] = [g]
//! [ 0   Cᵀ  0 ] [λ]   [0]
//! ```
//!
//! where the first column of `C` is the pressure mean vector `w`. Any further
//! columns are `M_p z` for the kernel modes `z` of [`SparseSystem::pressure_modes`],
//! which pick the pressure `M_p`-orthogonal to those modes. The body force
//! convention `f = -ν Δu + ∇p` makes `π = -p`; [`SaddleSolution::p`] holds `p`.
//!
//! Both strategies eliminate the velocity with a sparse Cholesky factorization of
//! `A`. The direct path then factors the bordered Schur complement densely; the
//! iterative path runs preconditioned CG on the Schur complement.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::CscMatrix;

use crate::assembly::{DiscreteField, SparseSystem};
use crate::error::{Error, Result};
use crate::fe::SpaceKind;
use crate::scalar::Real;

/// Largest pressure dimension handled by the dense Schur path under [`SolveStrategy::Auto`].
pub const DIRECT_PRESSURE_CAP: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SolveStrategy {
    /// Dense bordered Schur complement below [`DIRECT_PRESSURE_CAP`], CG above.
    #[default]
    Auto,
    Direct,
    SchurCg { tolerance: f64, max_iterations: usize },
}

pub const CG_DEFAULT: SolveStrategy = SolveStrategy::SchurCg { tolerance: 1e-13, max_iterations: 2000 };

#[derive(Debug, Clone)]
pub struct SaddleSolution<T: Real> {
    /// Full CR velocity, boundary DOFs included.
    pub u: DiscreteField<T>,
    /// P1 pressure with zero mean.
    pub p: DiscreteField<T>,
    /// Multiplier of the zero-mean constraint.
    pub multiplier: T,
    /// Multipliers of the kernel-mode constraints, one per pressure mode.
    pub mode_multipliers: Vec<T>,
    /// Relative residual of the full constrained system.
    pub residual_norm: T,
}

/// Cholesky factorization of the velocity block plus the coupling, enough to apply
/// `A⁻¹` and the Schur complement `B A⁻¹ Bᵀ`.
pub struct StokesFactorization<'a, T: Real> {
    cholesky: CscCholesky<T>,
    b: &'a CscMatrix<T>,
    bt: CscMatrix<T>,
}

impl<'a, T: Real> StokesFactorization<'a, T> {
    pub fn new(a: &CscMatrix<T>, b: &'a CscMatrix<T>) -> Result<Self> {
        let cholesky = CscCholesky::factor(a).map_err(|e| Error::Singular(format!("velocity block: {e}")))?;
        Ok(Self { cholesky, b, bt: b.transpose() })
    }

    pub fn solve_velocity(&self, rhs: &DVector<T>) -> DVector<T> {
        let x = self.cholesky.solve(rhs);
        x.column(0).into_owned()
    }

    /// `B A⁻¹ Bᵀ q`.
    pub fn schur_apply(&self, q: &DVector<T>) -> DVector<T> {
        let btq = &self.bt * q;
        self.b * self.solve_velocity(&btq)
    }

    /// Dense `B A⁻¹ Bᵀ`, symmetrized.
    pub fn schur_matrix(&self) -> DMatrix<T> {
        let bt_dense = DMatrix::from(&self.bt);
        let x = self.cholesky.solve(&bt_dense);
        let s = self.b * x;
        (&s + s.transpose()) * T::lit(0.5)
    }
}

/// `B A⁻¹ Bᵀ q` for a system's blocks.
pub fn schur_apply<T: Real>(sys: &SparseSystem<T>, q: &DVector<T>) -> Result<DVector<T>> {
    Ok(StokesFactorization::new(&sys.a, &sys.b)?.schur_apply(q))
}

/// Pressure kernel basis `K = [1, z_1, ...]` and constraint block `C = M_p K`,
/// with `w` itself as the first column of `C`.
fn constraint_blocks<T: Real>(sys: &SparseSystem<T>) -> (DMatrix<T>, DMatrix<T>) {
    let n = sys.n_pressure();
    let m = 1 + sys.pressure_modes.len();
    let mut k = DMatrix::zeros(n, m);
    let mut c = DMatrix::zeros(n, m);
    k.column_mut(0).fill(T::one());
    c.column_mut(0).copy_from(&sys.mean);
    for (j, z) in sys.pressure_modes.iter().enumerate() {
        k.column_mut(j + 1).copy_from(z);
        c.column_mut(j + 1).copy_from(&(&sys.mass_p * z));
    }
    (k, c)
}

pub fn solve_stokes<T: Real>(sys: &SparseSystem<T>) -> Result<SaddleSolution<T>> {
    solve_stokes_with(sys, SolveStrategy::Auto)
}

pub fn solve_stokes_with<T: Real>(sys: &SparseSystem<T>, strategy: SolveStrategy) -> Result<SaddleSolution<T>> {
    let fact = StokesFactorization::new(&sys.a, &sys.b)?;
    let n_p = sys.n_pressure();
    let strategy = match strategy {
        SolveStrategy::Auto if n_p <= DIRECT_PRESSURE_CAP => SolveStrategy::Direct,
        SolveStrategy::Auto => CG_DEFAULT,
        s => s,
    };
    let (k, c) = constraint_blocks(sys);

    // Eliminate u: (B A⁻¹ Bᵀ) π - C λ = B A⁻¹ ℓ - g =: r
    let a_inv_load = fact.solve_velocity(&sys.load);
    let r = &sys.b * &a_inv_load - &sys.div_rhs;

    let (pi, lambda) = match strategy {
        SolveStrategy::Direct => bordered_direct(&fact, &c, &r)?,
        SolveStrategy::SchurCg { tolerance, max_iterations } => {
            schur_cg(&fact, sys, &k, &c, &r, T::lit(tolerance), max_iterations)?
        }
        SolveStrategy::Auto => unreachable!(),
    };

    let u_free = &a_inv_load - fact.solve_velocity(&(&fact.bt * &pi));
    let residual_norm = kkt_residual(sys, &c, &u_free, &pi, &lambda);
    let limit = T::default_epsilon().sqrt();
    if residual_norm > limit {
        return Err(Error::Singular(format!("residual {:e} after solve", residual_norm.as_f64())));
    }
    Ok(SaddleSolution {
        u: DiscreteField::from_parts(SpaceKind::CrVector, sys.expand_velocity(&u_free)),
        p: DiscreteField::from_parts(SpaceKind::P1Scalar, -pi),
        multiplier: lambda[0],
        mode_multipliers: lambda.iter().skip(1).copied().collect(),
        residual_norm,
    })
}

fn bordered_direct<T: Real>(
    fact: &StokesFactorization<'_, T>,
    c: &DMatrix<T>,
    r: &DVector<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    let n = r.len();
    let m = c.ncols();
    let s = fact.schur_matrix();
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&s);
    k.view_mut((0, n), (n, m)).copy_from(&-c);
    k.view_mut((n, 0), (m, n)).copy_from(&-c.transpose());
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(r);
    let x = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("bordered Schur complement".into()))?;
    Ok((x.rows(0, n).into_owned(), x.rows(n, m).into_owned()))
}

/// Preconditioned CG on `S π = r + C λ`, which is consistent once `λ` removes the
/// components of `r` along the kernel basis `K` of `S`.
fn schur_cg<T: Real>(
    fact: &StokesFactorization<'_, T>,
    sys: &SparseSystem<T>,
    k: &DMatrix<T>,
    c: &DMatrix<T>,
    r: &DVector<T>,
    tolerance: T,
    max_iterations: usize,
) -> Result<(DVector<T>, DVector<T>)> {
    let n = r.len();
    let kc = k.transpose() * c;
    let kc_lu = kc.clone().lu();
    let lambda = -kc_lu
        .solve(&(k.transpose() * r))
        .ok_or_else(|| Error::Singular("pressure constraint block".into()))?;
    let rhs = r + c * &lambda;
    let diag: DVector<T> = DVector::from_iterator(n, (0..n).map(|i| {
        sys.mass_p.get_entry(i, i).map(|e| e.into_value()).unwrap_or_else(T::one)
    }));
    let kk_lu = (k.transpose() * k).lu();
    let project = |v: &mut DVector<T>| {
        if let Some(coef) = kk_lu.solve(&(k.transpose() * &*v)) {
            *v -= k * coef;
        }
    };

    let rhs_norm = rhs.norm();
    let mut x = DVector::zeros(n);
    if rhs_norm == T::zero() {
        return Ok((x, lambda));
    }
    let mut res = rhs.clone();
    project(&mut res);
    let mut z = res.component_div(&diag);
    let mut dir = z.clone();
    let mut rz = res.dot(&z);
    let mut iterations = 0;
    while iterations < max_iterations {
        if res.norm() <= tolerance * rhs_norm {
            break;
        }
        let sd = fact.schur_apply(&dir);
        let alpha = rz / dir.dot(&sd);
        x.axpy(alpha, &dir, T::one());
        res.axpy(-alpha, &sd, T::one());
        project(&mut res);
        z = res.component_div(&diag);
        let rz_new = res.dot(&z);
        dir = &z + &dir * (rz_new / rz);
        rz = rz_new;
        iterations += 1;
    }
    let rel = res.norm() / rhs_norm;
    if rel > tolerance {
        return Err(Error::ToleranceNotMet { residual: rel.as_f64(), iterations, tolerance: tolerance.as_f64() });
    }
    // shift along the kernel so that Cᵀ x = 0
    let ck_lu = kc.transpose().lu();
    if let Some(coef) = ck_lu.solve(&(c.transpose() * &x)) {
        x -= k * coef;
    }
    Ok((x, lambda))
}

/// `‖K z - rhs‖ / ‖rhs‖` for the full constrained system (absolute if the data vanish).
fn kkt_residual<T: Real>(sys: &SparseSystem<T>, c: &DMatrix<T>, u: &DVector<T>, pi: &DVector<T>, lambda: &DVector<T>) -> T {
    let r1 = &sys.a * u + sys.b.transpose() * pi - &sys.load;
    let r2 = &sys.b * u + c * lambda - &sys.div_rhs;
    let r3 = c.transpose() * pi;
    let num = (r1.norm_squared() + r2.norm_squared() + r3.norm_squared()).sqrt();
    let den = (sys.load.norm_squared() + sys.div_rhs.norm_squared()).sqrt();
    if den > T::zero() {
        num / den
    } else {
        num
    }
}
