//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::sync::Arc;

use fenchel_duo::diagnostics::{default_alpha_grid, fit_trace, probe_curvature, RateColumn};
use fenchel_duo::duality::{check_bach_equivalence, check_hybrid_symmetry};
use fenchel_duo::engine::{run_gcs, run_gmd, run_hybrid, RunOptions, RunOutput};
use fenchel_duo::ledger::{GapMode, WeightMode, WeightState};
use fenchel_duo::library::*;
use fenchel_duo::linalg::{self, LinearMap};
use fenchel_duo::oracle::Problem;
use fenchel_duo::step::{golden_section, linesearch, PowerSegment, Segment, StepRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const IDENTITY_TOL: f64 = 1e-8;
const EQUIVALENCE_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;
const SANDWICH_LOW: f64 = 1e-9;
const SANDWICH_HIGH: f64 = 1e-8;
const GRID_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-10;

struct Gate {
    failures: usize,
    sandwich_runs: Vec<(String, RunOutput<f64>)>,
}

impl Gate {
    fn report(&mut self, id: u32, title: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {title}: {detail}");
        if !pass {
            self.failures += 1;
        }
    }

    fn keep(&mut self, name: impl Into<String>, run: &RunOutput<f64>) {
        self.sandwich_runs.push((name.into(), run.clone()));
    }
}

fn quad_simplex() -> Problem<f64> {
    make_quadratic_simplex(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], 2).unwrap()
}

const ENTROPY_C: [f64; 3] = [0.2, 0.5, 0.3];

fn entropy_lse() -> Problem<f64> {
    make_entropy_lse(
        3,
        LinearMap::identity(3),
        Arc::new(QuadraticF::squared_distance(ENTROPY_C.to_vec())),
    )
    .unwrap()
}

fn random_a() -> Problem<f64> {
    make_quadratic_set(
        QuadraticF::squared_distance(vec![0.3, -0.5, 1.0, 0.2, -0.1]),
        SetKind::Simplex(3),
        random_gaussian_map(5, 3, 7).unwrap(),
    )
    .unwrap()
}

fn opts(k_max: usize) -> RunOptions<f64> {
    RunOptions {
        k_max,
        full_history: true,
        check_fenchel_young: true,
        ..RunOptions::default()
    }
}

fn healthy(run: &RunOutput<f64>, k_max: usize) -> bool {
    run.error.is_none() && run.trace.len() == k_max
}

fn max_residual(run: &RunOutput<f64>) -> f64 {
    run.trace
        .iter()
        .map(|r| r.residual.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn identity_suite(gate: &mut Gate) {
    let k_max = 500;
    let problems = [
        ("quadratic-simplex", quad_simplex()),
        ("entropy-lse", entropy_lse()),
        ("random-A 5x3", random_a()),
    ];
    let rules = [StepRule::FixedHarmonic, StepRule::exact_default()];
    let mut worst = 0.0f64;
    let mut green = 0;
    let mut combos = Vec::new();
    for (name, p) in &problems {
        let x0 = linalg::unit(p.n(), 0);
        let u0 = p.f_gradient(&p.map().apply(&x0)).unwrap();
        let v0 = vec![0.0; p.m()];
        let mut per = [0.0f64; 3];
        let mut ok = true;
        for rule in &rules {
            let runs = [
                run_gcs(p, &x0, rule, &opts(k_max)),
                run_gmd(p, &v0, rule, &opts(k_max)),
                run_hybrid(p, &x0, &u0, rule, &opts(k_max)),
            ];
            for (i, run) in runs.iter().enumerate() {
                ok &= healthy(run, k_max);
                per[i] = per[i].max(max_residual(run));
                gate.keep(
                    format!("{name}/{}/{}", run.algorithm.name(), rule.name()),
                    run,
                );
            }
        }
        for r in per {
            if ok && r <= IDENTITY_TOL {
                green += 1;
            }
            worst = worst.max(r);
        }
        combos.push(format!(
            "{name}: gcs {:.1e}, gmd {:.1e}, hybrid {:.1e}",
            per[0], per[1], per[2]
        ));
    }
    gate.report(
        1,
        "identity residuals, k <= 500",
        green == 9,
        format!(
            "{green}/9 green, worst {worst:.2e} (tol {IDENTITY_TOL:e}); {}",
            combos.join("; ")
        ),
    );
}

fn bach(gate: &mut Gate) {
    let rule = StepRule::FixedHarmonic;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, p) in [
        ("identity A", quad_simplex()),
        ("random 5x3 A", random_a()),
        ("entropy", entropy_lse()),
    ] {
        match check_bach_equivalence(&p, &linalg::unit(p.n(), 0), &rule, 50) {
            Ok(d) => {
                pass &= d.max() <= EQUIVALENCE_TOL && d.steps == 50;
                parts.push(format!("{name} {:.1e}", d.max()));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} error {e}"));
            }
        }
    }
    gate.report(2, "Bach equivalence, 50 iterations", pass, parts.join(", "));
}

fn symmetry(gate: &mut Gate) {
    let rule = StepRule::FixedHarmonic;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, p) in [
        ("quadratic-simplex", quad_simplex()),
        ("entropy-lse", entropy_lse()),
    ] {
        let x0 = linalg::unit(p.n(), 0);
        let u0 = linalg::unit(p.m(), 0);
        match check_hybrid_symmetry(&p, &x0, &u0, &rule, 30) {
            Ok(d) => {
                pass &= d.max() <= EQUIVALENCE_TOL && d.gap_bounds <= EQUIVALENCE_TOL;
                parts.push(format!("{name} {:.1e} (gap {:.1e})", d.max(), d.gap_bounds));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} error {e}"));
            }
        }
    }
    gate.report(3, "hybrid symmetry, 30 iterations", pass, parts.join(", "));
}

fn vertex_sampler(n: usize) -> impl FnMut(&mut ChaCha8Rng) -> Vec<f64> {
    move |rng| linalg::unit(n, rng.random_range(0..n))
}

fn harmonic_bound(gate: &mut Gate) {
    let p = quad_simplex();
    let c = probe_curvature(&p, 2.0, 64, &default_alpha_grid(), 1, vertex_sampler(2))
        .unwrap()
        .c_hat;
    let k_max = 1000;
    let run = run_gcs(&p, &[1.0, 0.0], &StepRule::FixedHarmonic, &opts(k_max));
    let violations = run
        .trace
        .iter()
        .filter(|r| r.true_gap > 2.0 * c / (r.k as f64 + 2.0))
        .count();
    let row2 = &run.trace[1];
    let spot = (row2.true_gap - 2.0 / 9.0).abs() < 1e-15
        && (row2.gap_bound - 7.0 / 9.0).abs() < 1e-15
        && row2.gap_bound <= 2.0 * c / 4.0;
    gate.keep("harmonic quadratic-simplex", &run);
    gate.report(
        4,
        "harmonic-step bound 2C/(k+2)",
        healthy(&run, k_max) && (c - 2.0).abs() < 1e-12 && violations == 0 && spot,
        format!(
            "C probed {c}, {violations} violations over {k_max} iterations, k=2: true {:.6} <= bound {:.6} <= {}",
            row2.true_gap,
            row2.gap_bound,
            2.0 * c / 4.0
        ),
    );
}

fn line_search_bounds(gate: &mut Gate) {
    let k_max = 1000;
    let rule = StepRule::exact_default();
    let gamma = 2.0f64;
    let bound = |c: f64, k: usize| c * (gamma / (k as f64 + gamma)).powf(gamma - 1.0);
    let count = |run: &RunOutput<f64>, c: f64| {
        run.trace
            .iter()
            .filter(|r| r.true_gap > bound(c, r.k))
            .count()
    };
    let q = quad_simplex();
    let gcs = run_gcs(&q, &[1.0, 0.0], &rule, &opts(k_max));
    let e = entropy_lse();
    let gmd = run_gmd(&e, &[0.0; 3], &rule, &opts(k_max));
    let x0 = linalg::unit(3, 0);
    let u0 = e.f_gradient(&x0).unwrap();
    let hyb = run_hybrid(&e, &x0, &u0, &rule, &opts(k_max));
    // C = diam² of the simplex for ½‖·‖²; C* = 1 bounds the lse Hessian
    // along differences of two simplex points.
    let (c, c_star) = (2.0, 1.0);
    let v = [count(&gcs, c), count(&gmd, c_star), count(&hyb, c + c_star)];
    // Monotone bound under exact search.
    let monotone = [&gcs, &gmd, &hyb].iter().all(|run| {
        run.trace
            .windows(2)
            .all(|w| w[1].gap_bound <= w[0].gap_bound + 1e-15)
    });
    for (name, run) in [
        ("ls gcs", &gcs),
        ("ls gmd entropy", &gmd),
        ("ls hybrid entropy", &hyb),
    ] {
        gate.keep(name, run);
    }
    gate.report(
        5,
        "exact line search bound C(γ/(k+γ))^(γ-1)",
        [&gcs, &gmd, &hyb].iter().all(|r| healthy(r, k_max)) && v == [0, 0, 0] && monotone,
        format!(
            "violations: gcs/quadratic-simplex {} (C=2), gmd/entropy {} (C*=1), hybrid/entropy {} (C+C*=3); gap bounds non-increasing: {monotone}",
            v[0], v[1], v[2]
        ),
    );
}

fn rate_fits(gate: &mut Gate) {
    let k_max = 1000;
    let rule = StepRule::exact_default();
    let q = run_gcs(&quad_simplex(), &[1.0, 0.0], &rule, &opts(k_max));
    let holder = make_holder_power_set(
        HolderPowerF::centered(1.5, vec![1.0 / 3.0; 3]).unwrap(),
        SetKind::Simplex(3),
    )
    .unwrap();
    let h = run_gcs(&holder, &[1.0, 0.0, 0.0], &rule, &opts(k_max));
    gate.keep("rate quadratic-simplex", &q);
    gate.keep("rate holder", &h);
    let fq = fit_trace(&q.trace, RateColumn::GapBound, 10);
    let fh = fit_trace(&h.trace, RateColumn::GapBound, 10);
    let (sq, sh) = match (&fq, &fh) {
        (Ok(a), Ok(b)) => (a.exponent, b.exponent),
        _ => (f64::NAN, f64::NAN),
    };
    gate.report(
        6,
        "log-log slope of the gap bound under exact search",
        (-1.15..=-0.90).contains(&sq) && (-0.65..=-0.35).contains(&sh),
        format!(
            "quadratic-simplex {sq:.4} in [-1.15, -0.90]; holder p=1.5 {sh:.4} in [-0.65, -0.35]"
        ),
    );
}

fn weights(gate: &mut Gate) {
    let k_max = 1000;
    let run = run_gcs(
        &quad_simplex(),
        &[1.0, 0.0],
        &StepRule::exact_default(),
        &RunOptions {
            k_max,
            ..RunOptions::default()
        },
    );
    let ls_alphas: Vec<f64> = run.trace.iter().map(|r| r.alpha).collect();
    let harmonic: Vec<f64> = (0..k_max)
        .map(fenchel_duo::step::step_fixed_harmonic)
        .collect();
    let mut worst = 0.0f64;
    let mut negative = 0;
    for alphas in [&harmonic, &ls_alphas] {
        let mut w = WeightState::new(WeightMode::FullHistory);
        for &a in alphas.iter() {
            w.update(a).unwrap();
            let row = w.lambda_row(w.k()).unwrap();
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
            negative += row.iter().filter(|&&l| l < 0.0).count();
        }
    }
    gate.report(
        7,
        "λ rows are probability vectors, k <= 1000",
        worst <= WEIGHT_TOL && negative == 0 && ls_alphas.len() == k_max,
        format!("max |Σλ - 1| = {worst:.2e}, {negative} negative entries"),
    );
}

fn sharpened(gate: &mut Gate) {
    let e = entropy_lse();
    let o = RunOptions {
        mode: GapMode::Sharpened,
        ..opts(500)
    };
    let run = run_gcs(&e, &[1.0, 0.0, 0.0], &StepRule::FixedHarmonic, &o);
    let mut above = 0;
    let mut strict = 0;
    for r in &run.trace {
        match r.bound_sharpened {
            Some(s) if s <= r.bound_plain => {
                if s < r.bound_plain {
                    strict += 1;
                }
            }
            _ => above += 1,
        }
    }
    gate.keep("sharpened entropy", &run);
    gate.report(
        10,
        "sharpened gap <= plain gap on entropy-lse",
        healthy(&run, 500) && above == 0 && strict >= 1,
        format!("{above} iterations above plain, {strict} strictly below"),
    );
}

struct NoSlope(PowerSegment<f64>);

impl Segment<f64> for NoSlope {
    fn gap(&self) -> f64 {
        self.0.gap
    }
    fn increment(&self, a: f64) -> fenchel_duo::Result<Option<f64>> {
        self.0.increment(a)
    }
}

fn line_search_optimality(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut worst_golden, mut worst_search) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let seg = PowerSegment {
            gap: rng.random_range(0.0..5.0),
            coeff: rng.random_range(0.005..5.0),
            power: 2.0,
        };
        let phi = |a: f64| seg.phi(a).unwrap().unwrap();
        let grid = (0..10_000)
            .map(|i| phi(i as f64 / 9_999.0))
            .fold(f64::INFINITY, f64::min);
        let (g, _) = golden_section(|a| seg.phi(a), 0.0, 1.0, 1e-10, 200).unwrap();
        let ls = linesearch(&seg, 1e-10, 200).unwrap().alpha;
        let gs = linesearch(&NoSlope(seg), 1e-10, 200).unwrap().alpha;
        worst_golden = worst_golden.max(phi(g) - grid).max(phi(gs) - grid);
        worst_search = worst_search.max(phi(ls) - grid);
    }
    let closed = PowerSegment::<f64> {
        gap: 1.0,
        coeff: 1.0,
        power: 2.0,
    };
    let a = linesearch(&closed, 1e-10, 200).unwrap().alpha;
    gate.report(
        9,
        "line search against a 10^4-point grid",
        worst_golden <= GRID_TOL && worst_search <= GRID_TOL && (a - 0.5).abs() <= CLOSED_FORM_TOL,
        format!(
            "golden excess {worst_golden:.1e}, derivative search excess {worst_search:.1e} (tol {GRID_TOL:e}); G=1, d²=2 gives α* = {a} (|α*-1/2| = {:.1e})",
            (a - 0.5).abs()
        ),
    );
}

fn sandwich(gate: &mut Gate) {
    let mut rows = 0;
    let mut bad = Vec::new();
    for (name, run) in &gate.sandwich_runs {
        for r in &run.trace {
            rows += 1;
            if !(r.true_gap >= -SANDWICH_LOW && r.true_gap <= r.gap_bound + SANDWICH_HIGH) {
                bad.push(format!("{name} k={}", r.k));
            }
        }
    }
    let detail = format!(
        "{} runs, {rows} rows, {} violations{}",
        gate.sandwich_runs.len(),
        bad.len(),
        bad.first()
            .map(|b| format!(" (first: {b})"))
            .unwrap_or_default()
    );
    let pass = bad.is_empty() && rows > 0;
    gate.report(
        8,
        "-1e-9 <= true gap <= bound + 1e-8 on every suite run",
        pass,
        detail,
    );
}

fn main() -> ExitCode {
    let mut gate = Gate {
        failures: 0,
        sandwich_runs: Vec::new(),
    };
    identity_suite(&mut gate);
    bach(&mut gate);
    symmetry(&mut gate);
    harmonic_bound(&mut gate);
    line_search_bounds(&mut gate);
    rate_fits(&mut gate);
    weights(&mut gate);
    sandwich(&mut gate);
    line_search_optimality(&mut gate);
    sharpened(&mut gate);
    if gate.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failures);
        ExitCode::FAILURE
    }
}
