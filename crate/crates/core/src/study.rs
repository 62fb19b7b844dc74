//! Level sweeps: convergence tables, inf-sup constants and lemma statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{check_lemma1, check_lemma2, infsup_constant_with, random_pressure, random_velocity};
use crate::analysis::{ElementPair, InfSupReport, VelocityNorm};
use crate::assembly::{assemble_pressure_mass, assemble_system, QuadratureDegrees};
use crate::error::Result;
use crate::mesh::build_unit_square;
use crate::norms::{broken_h1_seminorm_error, l2_error};
use crate::scalar::Real;
use crate::solutions::{ManufacturedSolution, SolutionKind};
use crate::solver::{solve_stokes_with, SolveStrategy};

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord<T: Real> {
    pub level: usize,
    pub n_elements: usize,
    pub h: T,
    pub err_u_h1_broken: T,
    /// `log2(err(L-1) / err(L))`; absent on the first row.
    pub rate_u: Option<T>,
    pub err_p_l2: T,
    pub rate_p: Option<T>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub solution: SolutionKind,
    /// Overrides the example's viscosity; pressure and force scale along with it.
    pub nu: Option<f64>,
    pub max_level: usize,
    pub degrees: QuadratureDegrees,
    pub strategy: SolveStrategy,
}

impl ConvergenceConfig {
    pub fn new(solution: SolutionKind, max_level: usize) -> Self {
        Self { solution, nu: None, max_level, degrees: QuadratureDegrees::default(), strategy: SolveStrategy::Auto }
    }
}

pub fn observed_rate<T: Real>(coarse: T, fine: T) -> T {
    (coarse / fine).ln() / T::lit(2f64.ln())
}

/// Solves on levels `0..=max_level`, handing each finished row to `on_record`
/// before moving on to the next level.
pub fn run_convergence_with<T: Real, F>(cfg: &ConvergenceConfig, mut on_record: F) -> Result<Vec<ErrorRecord<T>>>
where
    F: FnMut(&ErrorRecord<T>),
{
    let mut exact = ManufacturedSolution::<T>::new(cfg.solution);
    if let Some(nu) = cfg.nu {
        exact = exact.with_viscosity(T::lit(nu));
    }
    let mut records: Vec<ErrorRecord<T>> = Vec::with_capacity(cfg.max_level + 1);
    for level in 0..=cfg.max_level {
        let mesh = build_unit_square::<T>(level);
        let sys = assemble_system(&mesh, exact.nu(), |x| exact.f(x), |x| exact.u(x), cfg.degrees)?;
        let sol = solve_stokes_with(&sys, cfg.strategy)?;
        let err_u = broken_h1_seminorm_error(&mesh, &sol.u, |x| exact.grad_u(x), cfg.degrees.volume)?;
        let err_p = l2_error(&mesh, &sol.p, |x| exact.p(x), cfg.degrees.volume)?;
        let prev = records.last();
        let record = ErrorRecord {
            level,
            n_elements: mesh.n_triangles(),
            h: mesh.h(),
            err_u_h1_broken: err_u,
            rate_u: prev.map(|r| observed_rate(r.err_u_h1_broken, err_u)),
            err_p_l2: err_p,
            rate_p: prev.map(|r| observed_rate(r.err_p_l2, err_p)),
        };
        on_record(&record);
        records.push(record);
    }
    Ok(records)
}

pub fn run_convergence<T: Real>(cfg: &ConvergenceConfig) -> Result<Vec<ErrorRecord<T>>> {
    run_convergence_with(cfg, |_| {})
}

/// Inf-sup constants for every pair on levels `min_level..=max_level`, ordered by pair then level.
pub fn run_infsup<T: Real>(
    min_level: usize,
    max_level: usize,
    pairs: &[ElementPair],
    norm: VelocityNorm,
) -> Result<Vec<InfSupReport<T>>> {
    run_infsup_with(min_level, max_level, pairs, norm, |_| {})
}

/// [`run_infsup`], handing each report to `on_report` as soon as it is computed.
pub fn run_infsup_with<T: Real, F>(
    min_level: usize,
    max_level: usize,
    pairs: &[ElementPair],
    norm: VelocityNorm,
    mut on_report: F,
) -> Result<Vec<InfSupReport<T>>>
where
    F: FnMut(&InfSupReport<T>),
{
    let mut out = Vec::new();
    for &pair in pairs {
        for level in min_level..=max_level {
            let report = infsup_constant_with(&build_unit_square::<T>(level), pair, norm)?;
            on_report(&report);
            out.push(report);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LemmaConfig {
    pub min_level: usize,
    pub max_level: usize,
    pub seed: u64,
    /// Random `(v, q)` pairs per level for the divergence identity.
    pub identity_pairs: usize,
    /// Random pressures per level for the norm ratio.
    pub ratio_samples: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self { min_level: 0, max_level: 3, seed: 20_240_601, identity_pairs: 50, ratio_samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaLevel<T: Real> {
    pub level: usize,
    pub identity_pairs: usize,
    pub max_identity_gap: T,
    pub ratio_samples: usize,
    pub ratio_min: T,
    pub ratio_max: T,
}

/// Divergence identity gaps and `I_h` norm-ratio intervals per level.
///
/// Each level draws from its own stream seeded by `(seed, level)`, so a level's
/// numbers do not depend on which other levels are run.
pub fn run_lemmas<T: Real>(cfg: &LemmaConfig) -> Result<Vec<LemmaLevel<T>>> {
    run_lemmas_with(cfg, |_| {})
}

/// [`run_lemmas`], handing each level to `on_level` as soon as it is done.
pub fn run_lemmas_with<T: Real, F>(cfg: &LemmaConfig, mut on_level: F) -> Result<Vec<LemmaLevel<T>>>
where
    F: FnMut(&LemmaLevel<T>),
{
    let mut out = Vec::new();
    for level in cfg.min_level..=cfg.max_level {
        let mesh = build_unit_square::<T>(level);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(level as u64);
        let (_, mean) = assemble_pressure_mass(&mesh);
        let mut max_gap = T::zero();
        for _ in 0..cfg.identity_pairs {
            let v = random_velocity(&mesh, &mut rng);
            let q = random_pressure(&mesh, &mean, &mut rng);
            max_gap = max_gap.max(check_lemma1(&mesh, &v, &q)?.relative_gap);
        }
        let (lo, hi) = check_lemma2(&mesh, cfg.ratio_samples, &mut rng)?;
        let record = LemmaLevel {
            level,
            identity_pairs: cfg.identity_pairs,
            max_identity_gap: max_gap,
            ratio_samples: cfg.ratio_samples,
            ratio_min: lo,
            ratio_max: hi,
        };
        on_level(&record);
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_halving_is_one() {
        assert!((observed_rate(0.4f64, 0.2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lemma_levels_are_independent_of_range() {
        let all = run_lemmas::<f64>(&LemmaConfig { max_level: 1, identity_pairs: 3, ratio_samples: 5, ..Default::default() })
            .unwrap();
        let one = run_lemmas::<f64>(&LemmaConfig {
            min_level: 1,
            max_level: 1,
            identity_pairs: 3,
            ratio_samples: 5,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(all[1], one[0]);
    }

    #[test]
    fn empty_infsup_range() {
        let r = run_infsup::<f64>(1, 0, &[ElementPair::CrP1], VelocityNorm::BrokenFull).unwrap();
        assert!(r.is_empty());
    }
}
