//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Point2, SMatrix, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crstokes::analysis::{check_lemma1, infsup_constant, random_pressure, random_velocity, ElementPair};
use crstokes::assembly::{
    assemble_pressure_mass, assemble_system, cr_local_stiffness, local_divergence, p1_local_mass, QuadratureDegrees,
};
use crstokes::fe::{triangle_quadrature, ElementMap};
use crstokes::mesh::build_unit_square;
use crstokes::norms::{broken_h1_seminorm_error, l2_error};
use crstokes::solutions::{ManufacturedSolution, SolutionKind};
use crstokes::solver::solve_stokes;
use crstokes::study::{run_convergence, run_lemmas, ConvergenceConfig, ErrorRecord, LemmaConfig};

const SEED: u64 = 20_240_601;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn within(observed: f64, expected: f64, abs_tol: f64) -> bool {
    (observed - expected).abs() <= abs_tol
}

fn fmt_list(values: impl IntoIterator<Item = f64>, precision: usize) -> String {
    let parts: Vec<String> = values.into_iter().map(|v| format!("{v:.precision$e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_rates(values: impl IntoIterator<Item = f64>) -> String {
    let parts: Vec<String> = values.into_iter().map(|v| format!("{v:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn lemma1_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for level in 0..=3 {
        let mesh = build_unit_square::<f64>(level);
        let (_, mean) = assemble_pressure_mass(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(level as u64);
        for _ in 0..50 {
            let v = random_velocity(&mesh, &mut rng);
            let q = random_pressure(&mesh, &mean, &mut rng);
            worst = worst.max(check_lemma1(&mesh, &v, &q).expect("lemma check").relative_gap);
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        id: 1,
        name: "divergence identity 3*int(div_h v q) = int(div_h v I_h q)",
        pass: worst <= 1e-12 && elapsed < Duration::from_secs(10),
        detail: format!("max relative gap {worst:.3e} over 4x50 pairs (<= 1e-12), {elapsed:.2?} (< 10 s)"),
    }
}

struct Reference {
    velocity_errors: [f64; 5],
    velocity_rates: [f64; 4],
    pressure_rates: [f64; 4],
}

const EXAMPLE1_REFERENCE: Reference = Reference {
    velocity_errors: [2.53070e-1, 1.32989e-1, 6.78573e-2, 3.42262e-2, 1.71804e-2],
    velocity_rates: [0.93, 0.97, 0.99, 0.99],
    pressure_rates: [1.54, 1.56, 1.56, 1.55],
};

const EXAMPLE2_REFERENCE: Reference = Reference {
    velocity_errors: [4.85293, 2.57400, 1.31776, 6.65496e-1, 3.34230e-1],
    velocity_rates: [0.91, 0.97, 0.99, 0.99],
    pressure_rates: [1.47, 1.51, 1.52, 1.51],
};

fn table_check(id: u32, name: &'static str, records: &[ErrorRecord<f64>], elapsed: Duration, table: &Reference) -> Outcome {
    let err_u: Vec<f64> = records.iter().map(|r| r.err_u_h1_broken).collect();
    let rate_u: Vec<f64> = records.iter().skip(1).map(|r| r.rate_u.unwrap()).collect();
    let rate_p: Vec<f64> = records.iter().skip(1).map(|r| r.rate_p.unwrap()).collect();
    let errors_ok = err_u.iter().zip(&table.velocity_errors).all(|(o, e)| ((o - e) / e).abs() <= 0.15);
    let rate_u_ok = rate_u.iter().zip(&table.velocity_rates).all(|(o, e)| within(*o, *e, 0.05));
    let rate_p_ok = rate_p.iter().zip(&table.pressure_rates).all(|(o, e)| within(*o, *e, 0.1));
    let time_ok = elapsed < Duration::from_secs(120);
    let ratios = err_u.iter().zip(&table.velocity_errors).map(|(o, e)| o / e);
    Outcome {
        id,
        name,
        pass: errors_ok && rate_u_ok && rate_p_ok && time_ok,
        detail: format!(
            "velocity errors {} vs reference {} (ratio {}, within 15%: {}); velocity rates {} (+-0.05: {}); \
             pressure rates {} vs {} (+-0.1: {}); {:.2?} (< 120 s)",
            fmt_list(err_u.iter().copied(), 5),
            fmt_list(table.velocity_errors, 5),
            fmt_rates(ratios),
            errors_ok,
            fmt_rates(rate_u.iter().copied()),
            rate_u_ok,
            fmt_rates(rate_p.iter().copied()),
            fmt_rates(table.pressure_rates),
            rate_p_ok,
            elapsed
        ),
    }
}

fn convergence(kind: SolutionKind) -> (Vec<ErrorRecord<f64>>, Duration) {
    let start = Instant::now();
    let records = run_convergence::<f64>(&ConvergenceConfig::new(kind, 4)).expect("convergence run");
    (records, start.elapsed())
}

fn superconvergence(runs: &[(&str, &[ErrorRecord<f64>])]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, records) in runs {
        let last = records.last().expect("records");
        let (ru, rp) = (last.rate_u.unwrap(), last.rate_p.unwrap());
        let ok = (1.4..=1.6).contains(&rp) && (0.95..=1.05).contains(&ru);
        pass &= ok;
        parts.push(format!("{label}: pressure rate {rp:.4} in [1.4, 1.6], velocity rate {ru:.4} in [0.95, 1.05] -> {ok}"));
    }
    Outcome { id: 4, name: "pressure super-convergence between levels 3 and 4", pass, detail: parts.join("; ") }
}

fn infsup_witness() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for pair in [ElementPair::CrP1, ElementPair::CrP0] {
        let reports: Vec<_> = (0..=3)
            .map(|level| infsup_constant(&build_unit_square::<f64>(level), pair).expect("inf-sup"))
            .collect();
        let positive = reports.iter().all(|r| r.beta_h > 0.0 && r.kernel_dimension == 0);
        let no_decay = reports[3].beta_h >= 0.5 * reports[0].beta_h;
        pass &= positive && no_decay;
        parts.push(format!(
            "{pair}: beta_h {} (floors {}), numerical kernel dims {:?}, beta off kernel {}, positive {positive}, \
             level3 >= 0.5 level0 {no_decay}",
            fmt_list(reports.iter().map(|r| r.beta_h), 3),
            fmt_list(reports.iter().map(|r| r.spectrum_floor), 2),
            reports.iter().map(|r| r.kernel_dimension).collect::<Vec<_>>(),
            fmt_list(reports.iter().map(|r| r.beta_h_off_kernel), 3),
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    parts.push(format!("{elapsed:.2?} (< 60 s)"));
    Outcome { id: 5, name: "inf-sup witness for CR/P1 and CR/P0, levels 0-3", pass, detail: parts.join("; ") }
}

fn lemma2_stability() -> Outcome {
    let levels = run_lemmas::<f64>(&LemmaConfig { seed: SEED, ..LemmaConfig::default() }).expect("lemma run");
    let mut pass = true;
    let mut contained = true;
    let mut changes = Vec::new();
    for w in levels.windows(2) {
        let lo = (w[1].ratio_min / w[0].ratio_min - 1.0).abs();
        let hi = (w[1].ratio_max / w[0].ratio_max - 1.0).abs();
        pass &= lo < 0.25 && hi < 0.25;
        contained &= w[1].ratio_min >= w[0].ratio_min / 1.25 && w[1].ratio_max <= 1.25 * w[0].ratio_max;
        changes.push(format!("{}->{}: {:.1}%/{:.1}%", w[0].level, w[1].level, 100.0 * lo, 100.0 * hi));
    }
    let intervals: Vec<String> =
        levels.iter().map(|l| format!("L{} [{:.4}, {:.4}]", l.level, l.ratio_min, l.ratio_max)).collect();
    Outcome {
        id: 6,
        name: "norm ratio |I_h q|/|q| interval stable across levels 0-3",
        pass,
        detail: format!(
            "{}; min/max changes {} (< 25%); each interval inside the 1.25x widened previous one: {contained}",
            intervals.join(", "),
            changes.join(", ")
        ),
    }
}

fn patch_test() -> Outcome {
    let exact = ManufacturedSolution::<f64>::new(SolutionKind::PatchLinear);
    let degrees = QuadratureDegrees::default();
    let mut worst_u = 0.0f64;
    let mut worst_p = 0.0f64;
    for level in 0..=3 {
        let mesh = build_unit_square::<f64>(level);
        let sys = assemble_system(&mesh, exact.nu(), |x| exact.f(x), |x| exact.u(x), degrees).expect("assembly");
        let sol = solve_stokes(&sys).expect("solve");
        worst_u = worst_u.max(broken_h1_seminorm_error(&mesh, &sol.u, |x| exact.grad_u(x), degrees.volume).unwrap());
        worst_p = worst_p.max(l2_error(&mesh, &sol.p, |x| exact.p(x), degrees.volume).unwrap());
    }
    Outcome {
        id: 7,
        name: "linear patch test, levels 0-3",
        pass: worst_u <= 1e-10 && worst_p <= 1e-9,
        detail: format!("max velocity error {worst_u:.3e} (<= 1e-10), max pressure error {worst_p:.3e} (<= 1e-9)"),
    }
}

/// Affine function through three (point, value) pairs: coefficients `(a, b, c)` of `a + b x + c y`.
fn affine_through(points: &[Point2<f64>; 3], values: [f64; 3]) -> Vector3<f64> {
    let m = Matrix3::from_fn(|i, j| match j {
        0 => 1.0,
        1 => points[i].x,
        _ => points[i].y,
    });
    m.lu().solve(&Vector3::from(values)).expect("non-degenerate triangle")
}

fn eval_affine(c: &Vector3<f64>, p: &Point2<f64>) -> f64 {
    c[0] + c[1] * p.x + c[2] * p.y
}

fn rel_gap<const R: usize, const C: usize>(a: &SMatrix<f64, R, C>, oracle: &SMatrix<f64, R, C>) -> f64 {
    (a - oracle).amax() / oracle.amax()
}

fn local_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let rule = triangle_quadrature::<f64>(10).expect("rule");
    let mut worst = [0.0f64; 3];
    let mut count = 0;
    while count < 10 {
        let mut p: [Point2<f64>; 3] =
            std::array::from_fn(|_| Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let signed = 0.5 * ((p[1] - p[0]).perp(&(p[2] - p[0])));
        if signed.abs() < 1e-2 {
            continue;
        }
        if signed < 0.0 {
            p.swap(1, 2);
        }
        count += 1;
        let map = ElementMap::from_points(&p).expect("map");
        let mid: [Point2<f64>; 3] = std::array::from_fn(|k| nalgebra::center(&p[(k + 1) % 3], &p[(k + 2) % 3]));
        let hats: Vec<Vector3<f64>> =
            (0..3).map(|i| affine_through(&p, std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))).collect();
        let crs: Vec<Vector3<f64>> =
            (0..3).map(|k| affine_through(&mid, std::array::from_fn(|j| if k == j { 1.0 } else { 0.0 }))).collect();
        let integrate = |f: &dyn Fn(&Point2<f64>) -> f64| {
            rule.reference_points().zip(&rule.weights).map(|(r, &w)| w * map.det * f(&map.map(&r))).sum::<f64>()
        };
        let grad = |c: &Vector3<f64>| Vector2::new(c[1], c[2]);
        let stiffness = Matrix3::from_fn(|j, k| integrate(&|_| grad(&crs[j]).dot(&grad(&crs[k]))));
        let mass = Matrix3::from_fn(|j, k| integrate(&|x| eval_affine(&hats[j], x) * eval_affine(&hats[k], x)));
        let div = SMatrix::<f64, 3, 6>::from_fn(|i, col| {
            let g = grad(&crs[col % 3])[col / 3];
            integrate(&|x| eval_affine(&hats[i], x) * g)
        });
        worst[0] = worst[0].max(rel_gap(&cr_local_stiffness(&map, 1.0), &stiffness));
        worst[1] = worst[1].max(rel_gap(&p1_local_mass(map.area()), &mass));
        worst[2] = worst[2].max(rel_gap(&local_divergence(&map), &div));
    }
    Outcome {
        id: 8,
        name: "local matrices vs degree-10 quadrature oracles on 10 random triangles",
        pass: worst.iter().all(|&w| w <= 1e-12),
        detail: format!(
            "max relative gaps: CR stiffness {:.2e}, P1 mass {:.2e}, divergence {:.2e} (<= 1e-12)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn main() -> ExitCode {
    let (ex1, t1) = convergence(SolutionKind::Example1);
    let (ex2, t2) = convergence(SolutionKind::Example2);
    let outcomes = [
        lemma1_identity(),
        table_check(2, "example 1 convergence table, levels 0-4", &ex1, t1, &EXAMPLE1_REFERENCE),
        table_check(3, "example 2 convergence table, levels 0-4", &ex2, t2, &EXAMPLE2_REFERENCE),
        superconvergence(&[("example 1", &ex1), ("example 2", &ex2)]),
        infsup_witness(),
        lemma2_stability(),
        patch_test(),
        local_oracles(),
    ];
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {} | {}", o.id, o.name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {} failed", outcomes.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
