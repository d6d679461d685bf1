//! The five subcommands as library functions returning reports.

use std::path::{Path, PathBuf};
use std::thread;

use fenchel_duo::diagnostics::{fit_trace, log_alpha_grid, probe_curvature, RateColumn, RateFit};
use fenchel_duo::duality::{
    check_bach_equivalence, check_hybrid_symmetry, check_mirror_equivalence,
};
use fenchel_duo::engine::{run_gcs, run_gmd, run_hybrid, Algorithm, RunOptions};
use fenchel_duo::ledger::{AggregatePolicy, GapMode};
use fenchel_duo::library::sample_gaussian;
use fenchel_duo::oracle::fenchel_young_tol;
use fenchel_duo::step::StepPolicy;
use fenchel_duo::{linalg, Error, Problem, RunOutput, StepRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    AlgorithmName, ColumnName, ModeName, PolicyName, RuleName, RuleSpec, RunConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_float, trace_csv, write_file, write_json, RunSummary};
use crate::problem::{build_problem, starts, Starts};

/// Tolerance on relative identity residuals.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Tolerance on iterate deviation between equivalent runs.
pub const EQUIVALENCE_TOL: f64 = 1e-12;
/// Slack on `-low <= true gap <= bound + high`.
pub const SANDWICH_LOW: f64 = 1e-9;
pub const SANDWICH_HIGH: f64 = 1e-8;
const FENCHEL_YOUNG_PROBES: usize = 200;

pub fn algorithm(name: AlgorithmName) -> Algorithm {
    match name {
        AlgorithmName::Gcs => Algorithm::Gcs,
        AlgorithmName::Gmd => Algorithm::Gmd,
        AlgorithmName::Hybrid => Algorithm::Hybrid,
    }
}

pub fn step_rule(spec: &RuleSpec) -> CliResult<StepRule> {
    let rule = match spec.name {
        RuleName::FixedHarmonic => StepRule::FixedHarmonic,
        RuleName::OpenLoop => StepRule::OpenLoop {
            gamma: spec.gamma.unwrap_or(2.0),
        },
        RuleName::ExactLs => {
            let StepRule::ExactLineSearch { tol, max_iters } = StepRule::exact_default() else {
                unreachable!()
            };
            StepRule::ExactLineSearch {
                tol: spec.tol.unwrap_or(tol),
                max_iters: spec.max_iters.unwrap_or(max_iters),
            }
        }
        RuleName::ApproxGamma => {
            let StepRule::ApproxGamma {
                delta,
                tol,
                gamma_max,
            } = StepRule::approx_default()
            else {
                unreachable!()
            };
            StepRule::ApproxGamma {
                delta: spec.delta.unwrap_or(delta),
                tol: spec.tol.unwrap_or(tol),
                gamma_max: spec.gamma.unwrap_or(gamma_max),
            }
        }
    };
    rule.validate().map_err(CliError::building)?;
    Ok(rule)
}

pub fn run_options(cfg: &RunConfig) -> RunOptions<f64> {
    let defaults = RunOptions::<f64>::default();
    RunOptions {
        k_max: cfg.k_max,
        epsilon: cfg.epsilon,
        policy: match cfg.policy {
            PolicyName::Avg => AggregatePolicy::Average,
            PolicyName::Best => AggregatePolicy::Best,
        },
        mode: match cfg.mode {
            ModeName::Plain => GapMode::Plain,
            ModeName::Sharp => GapMode::Sharpened,
        },
        full_history: cfg.full_history,
        check_fenchel_young: cfg
            .check_fenchel_young
            .unwrap_or(defaults.check_fenchel_young),
        timing: cfg.timing,
    }
}

/// A config turned into oracles, start points and options.
pub struct Prepared {
    pub config: RunConfig,
    pub problem: Problem,
    pub starts: Starts,
    pub rule: StepRule,
    pub options: RunOptions<f64>,
}

pub fn prepare(config: RunConfig) -> CliResult<Prepared> {
    config.validate()?;
    let rule = step_rule(&config.rule)?;
    let problem = build_problem(&config.problem, config.seed)?;
    let starts = starts(&config, &problem)?;
    let options = run_options(&config);
    Ok(Prepared {
        config,
        problem,
        starts,
        rule,
        options,
    })
}

pub fn execute(
    algorithm: Algorithm,
    problem: &Problem,
    starts: &Starts,
    rule: &dyn StepPolicy<f64>,
    opts: &RunOptions<f64>,
) -> RunOutput {
    match algorithm {
        Algorithm::Gcs => run_gcs(problem, &starts.x0, rule, opts),
        Algorithm::Gmd => run_gmd(problem, &starts.v0, rule, opts),
        Algorithm::Hybrid => run_hybrid(problem, &starts.x0, &starts.u0, rule, opts),
    }
}

impl Prepared {
    pub fn execute(&self) -> RunOutput {
        let out = execute(
            algorithm(self.config.algorithm),
            &self.problem,
            &self.starts,
            &self.rule,
            &self.options,
        );
        for w in &out.warnings {
            log::warn!("{w}");
        }
        out
    }

    fn summary(&self, run: &RunOutput) -> RunSummary {
        let mode = match self.config.mode {
            ModeName::Plain => "plain",
            ModeName::Sharp => "sharp",
        };
        let policy = match self.config.policy {
            PolicyName::Avg => "avg",
            PolicyName::Best => "best",
        };
        RunSummary::new(run, mode, policy, self.config.seed)
    }

    /// Writes the trace and summary; an oracle failure is reported after
    /// the partial trace is on disk.
    pub fn write_run(&self, run: &RunOutput) -> CliResult<RunSummary> {
        write_file(&self.config.trace_path(), &trace_csv(&run.trace))?;
        let summary = self.summary(run);
        write_json(&self.config.summary_path(), &summary)?;
        match &run.error {
            Some(e) => Err(CliError::Oracle(e.clone())),
            None => Ok(summary),
        }
    }
}

pub fn cmd_run(config: RunConfig) -> CliResult<RunSummary> {
    let prepared = prepare(config)?;
    let run = prepared.execute();
    log::info!(
        "{} / {}: {} rows",
        run.algorithm.name(),
        run.rule,
        run.trace.len()
    );
    prepared.write_run(&run)
}

/// One named check of the verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    /// Worst observed value: a residual, a deviation or a violation.
    pub value: f64,
    pub tol: f64,
    pub detail: String,
    /// Set when the check could not be evaluated.
    pub error: Option<Error>,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.value <= self.tol
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => write!(f, "{tag} {}: {e}", self.name),
            None => write!(
                f,
                "{tag} {} {:.3e} (tol {:.0e}){}",
                self.name,
                self.value,
                self.tol,
                if self.detail.is_empty() {
                    String::new()
                } else {
                    format!(" {}", self.detail)
                }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckLine::passed)
    }

    pub fn failures(&self) -> Vec<&CheckLine> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, tol: f64, r: fenchel_duo::Result<(f64, String)>) {
        let (value, detail, error) = match r {
            Ok((v, d)) => (v, d, None),
            Err(e) => (f64::INFINITY, String::new(), Some(e)),
        };
        self.checks.push(CheckLine {
            name: name.into(),
            value,
            tol,
            detail,
            error,
        });
    }
}

/// Primal points: `∂h*` of random covectors and their pairwise mixtures.
pub fn primal_sampler(problem: &Problem) -> impl FnMut(&mut ChaCha8Rng) -> Vec<f64> + '_ {
    move |rng| {
        let n = problem.n();
        let draw = |rng: &mut ChaCha8Rng| {
            let w = linalg::scale(
                &sample_gaussian(n, rng),
                10f64.powi(rng.random_range(-1..=1)),
            );
            problem
                .h_conjugate_gradient(&w)
                .unwrap_or_else(|_| vec![0.0; n])
        };
        let a = draw(rng);
        if rng.random_bool(0.5) {
            a
        } else {
            let b = draw(rng);
            linalg::lerp(&a, &b, rng.random::<f64>())
        }
    }
}

fn fenchel_young_probes(problem: &Problem, seed: u64) -> [fenchel_duo::Result<(f64, String)>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = primal_sampler(problem);
    let (mut worst_f, mut worst_h) = (0.0f64, 0.0f64);
    let mut err_f = None;
    let mut err_h = None;
    for _ in 0..FENCHEL_YOUNG_PROBES {
        let y = problem.map().apply(&sample(&mut rng));
        match problem.fenchel_young_f(&y) {
            Ok(r) => worst_f = worst_f.max(r),
            Err(e) => {
                err_f.get_or_insert(e);
            }
        }
        let scale = 10f64.powi(rng.random_range(-1..=1));
        let w = linalg::scale(&sample_gaussian(problem.n(), &mut rng), scale);
        match problem.fenchel_young_h(&w) {
            Ok(r) => worst_h = worst_h.max(r),
            Err(e) => {
                err_h.get_or_insert(e);
            }
        }
    }
    let detail = format!("over {FENCHEL_YOUNG_PROBES} probes");
    [
        err_f.map_or_else(|| Ok((worst_f, detail.clone())), Err),
        err_h.map_or_else(|| Ok((worst_h, detail)), Err),
    ]
}

fn identity_and_sandwich(run: &RunOutput) -> [fenchel_duo::Result<(f64, String)>; 2] {
    if let Some(e) = &run.error {
        return [Err(e.clone()), Err(e.clone())];
    }
    let rows = run.trace.len();
    let residual = run
        .trace
        .iter()
        .map(|r| r.residual.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let violation = run
        .trace
        .iter()
        .map(|r| {
            let low = -SANDWICH_LOW - r.true_gap;
            let high = r.true_gap - r.gap_bound - SANDWICH_HIGH;
            low.max(high).max(0.0)
        })
        .fold(0.0, f64::max);
    let bad = run
        .trace
        .iter()
        .filter(|r| !(r.true_gap >= -SANDWICH_LOW && r.true_gap <= r.gap_bound + SANDWICH_HIGH))
        .count();
    [
        Ok((residual, format!("over {rows} rows"))),
        Ok((violation, format!("{bad} of {rows} rows violate"))),
    ]
}

/// The full identity suite on one problem: Fenchel-Young probes, the exact
/// identity of each method, the gap sandwich and the three equivalences.
/// Equivalence checks need an open-loop rule and fall back to the harmonic
/// schedule when `rule` is adaptive.
pub fn verify_problem(
    problem: &Problem,
    starts: &Starts,
    rule: &dyn StepPolicy<f64>,
    k_max: usize,
    seed: u64,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    let [fy_f, fy_h] = fenchel_young_probes(problem, seed);
    let tol = fenchel_young_tol::<f64>();
    report.push("fenchel_young_f", tol, fy_f);
    report.push("fenchel_young_h", tol, fy_h);

    let opts = RunOptions {
        k_max,
        full_history: true,
        check_fenchel_young: false,
        ..RunOptions::default()
    };
    let harmonic = StepRule::FixedHarmonic;
    let open_rule: &dyn StepPolicy<f64> = if rule.is_open_loop() {
        rule
    } else {
        log::info!(
            "equivalence checks use fixed_harmonic in place of {}",
            rule.name()
        );
        &harmonic
    };
    let opts = &opts;
    let (runs, deviations) = thread::scope(|s| {
        let runs: Vec<_> = [Algorithm::Gcs, Algorithm::Gmd, Algorithm::Hybrid]
            .into_iter()
            .map(|alg| s.spawn(move || (alg, execute(alg, problem, starts, rule, opts))))
            .collect();
        let bach = s.spawn(|| check_bach_equivalence(problem, &starts.x0, open_rule, k_max));
        let mirror = s.spawn(|| check_mirror_equivalence(problem, &starts.v0, open_rule, k_max));
        let sym =
            s.spawn(|| check_hybrid_symmetry(problem, &starts.x0, &starts.u0, open_rule, k_max));
        let runs: Vec<_> = runs
            .into_iter()
            .map(|h| h.join().expect("run thread"))
            .collect();
        let devs = [
            ("bach_equivalence", bach.join().expect("check thread")),
            ("mirror_equivalence", mirror.join().expect("check thread")),
            ("hybrid_symmetry", sym.join().expect("check thread")),
        ];
        (runs, devs)
    });
    for (alg, run) in &runs {
        let [identity, sandwich] = identity_and_sandwich(run);
        report.push(&format!("identity_{}", alg.name()), IDENTITY_TOL, identity);
        report.push(&format!("sandwich_{}", alg.name()), 0.0, sandwich);
    }
    for (name, dev) in deviations {
        let r = dev.map(|d| {
            let detail = format!("over {} steps, gap bounds {:.1e}", d.steps, d.gap_bounds);
            (d.max().max(d.gap_bounds), detail)
        });
        report.push(name, EQUIVALENCE_TOL, r);
    }
    report
}

pub fn cmd_verify(config: RunConfig) -> CliResult<VerifyReport> {
    let p = prepare(config)?;
    Ok(verify_problem(
        &p.problem,
        &p.starts,
        &p.rule,
        p.config.k_max,
        p.config.seed,
    ))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ProbeReport {
    pub gamma: f64,
    pub c_hat: f64,
    pub samples: usize,
    pub skipped: usize,
    pub witness_x: Option<Vec<f64>>,
    pub witness_v: Option<Vec<f64>>,
    pub witness_alpha: Option<f64>,
    pub seed: u64,
}

pub fn cmd_probe(config: RunConfig) -> CliResult<ProbeReport> {
    let p = prepare(config)?;
    let spec = &p.config.probe;
    let grid = log_alpha_grid(spec.grid_points, -4.0);
    let est = probe_curvature(
        &p.problem,
        spec.gamma,
        spec.samples,
        &grid,
        p.config.seed,
        primal_sampler(&p.problem),
    )
    .map_err(|e| match e {
        Error::Range(m) => CliError::Config(m),
        other => CliError::Oracle(other),
    })?;
    let (wx, wv, wa) = match est.witness {
        Some((x, v, a)) => (Some(x), Some(v), Some(a)),
        None => (None, None, None),
    };
    let report = ProbeReport {
        gamma: est.gamma,
        c_hat: est.c_hat,
        samples: est.samples,
        skipped: est.skipped,
        witness_x: wx,
        witness_v: wv,
        witness_alpha: wa,
        seed: p.config.seed,
    };
    write_json(&p.config.out_dir().join("probe.json"), &report)?;
    Ok(report)
}

fn rate_column(c: ColumnName) -> RateColumn {
    match c {
        ColumnName::GapBound => RateColumn::GapBound,
        ColumnName::TrueGap => RateColumn::TrueGap,
    }
}

fn column_name(c: ColumnName) -> &'static str {
    match c {
        ColumnName::GapBound => "gap_bound",
        ColumnName::TrueGap => "true_gap",
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateReport {
    pub algorithm: String,
    pub rule: String,
    pub column: String,
    pub k_min: usize,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

fn fit_error(e: Error) -> CliError {
    match e {
        Error::Fit(m) => CliError::Config(m),
        other => CliError::Oracle(other),
    }
}

pub fn cmd_rate(config: RunConfig) -> CliResult<RateReport> {
    let p = prepare(config)?;
    let run = p.execute();
    p.write_run(&run)?;
    let spec = &p.config.rate;
    let fit = fit_trace(&run.trace, rate_column(spec.column), spec.k_min).map_err(fit_error)?;
    let report = RateReport {
        algorithm: run.algorithm.name().into(),
        rule: run.rule.clone(),
        column: column_name(spec.column).into(),
        k_min: spec.k_min,
        exponent: fit.exponent,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: fit.points,
    };
    write_json(&p.config.out_dir().join("rate.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompareEntry {
    pub label: String,
    pub algorithm: String,
    pub rule: String,
    pub iterations: usize,
    pub final_gap_bound: Option<f64>,
    pub final_true_gap: Option<f64>,
    pub exponent_gap_bound: Option<f64>,
    pub exponent_true_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompareReport {
    pub entries: Vec<CompareEntry>,
}

fn fit_or_log(run: &RunOutput, label: &str, column: RateColumn, k_min: usize) -> Option<f64> {
    fit_trace(&run.trace, column, k_min)
        .map(|f: RateFit<f64>| f.exponent)
        .map_err(|e| log::warn!("{label}: {e}"))
        .ok()
}

fn compare_csv(labels: &[String], runs: &[RunOutput]) -> String {
    let mut out = String::from("k");
    for l in labels {
        out.push_str(&format!(",{l}_gap_bound,{l}_true_gap"));
    }
    out.push('\n');
    let rows = runs.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    for i in 0..rows {
        out.push_str(&(i + 1).to_string());
        for run in runs {
            match run.trace.get(i) {
                Some(r) => out.push_str(&format!(
                    ",{},{}",
                    fmt_float(r.gap_bound),
                    fmt_float(r.true_gap)
                )),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

/// Runs every config concurrently on a common problem shape and writes
/// `compare.csv` (gaps aligned by `k`) and `compare.json` (rate exponents)
/// into `out_dir`.
pub fn cmd_compare(configs: Vec<RunConfig>, out_dir: &Path) -> CliResult<CompareReport> {
    if configs.len() < 2 {
        return Err(CliError::Usage(format!(
            "compare needs at least 2 configs, got {}",
            configs.len()
        )));
    }
    let prepared = configs
        .into_iter()
        .map(prepare)
        .collect::<CliResult<Vec<_>>>()?;
    let shape = |p: &Prepared| (p.problem.n(), p.problem.m());
    if let Some(p) = prepared.iter().find(|p| shape(p) != shape(&prepared[0])) {
        let (n0, m0) = shape(&prepared[0]);
        let (n, m) = shape(p);
        return Err(CliError::Config(format!(
            "dimension mismatch: compared problems are {n0}x{m0} and {n}x{m}"
        )));
    }
    let runs: Vec<RunOutput> = thread::scope(|s| {
        let handles: Vec<_> = prepared.iter().map(|p| s.spawn(|| p.execute())).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("compare thread"))
            .collect()
    });
    let labels: Vec<String> = prepared
        .iter()
        .enumerate()
        .map(|(i, p)| {
            format!(
                "c{i}_{}_{}",
                algorithm(p.config.algorithm).name(),
                p.config.rule_name()
            )
        })
        .collect();
    let entries = prepared
        .iter()
        .zip(&runs)
        .zip(&labels)
        .map(|((p, run), label)| {
            let k_min = p.config.rate.k_min;
            let last = run.last();
            CompareEntry {
                label: label.clone(),
                algorithm: run.algorithm.name().into(),
                rule: run.rule.clone(),
                iterations: run.trace.len(),
                final_gap_bound: last.map(|r| r.gap_bound),
                final_true_gap: last.map(|r| r.true_gap),
                exponent_gap_bound: fit_or_log(run, label, RateColumn::GapBound, k_min),
                exponent_true_gap: fit_or_log(run, label, RateColumn::TrueGap, k_min),
                error: run.error.as_ref().map(|e| e.to_string()),
            }
        })
        .collect();
    let report = CompareReport { entries };
    write_file(&out_dir.join("compare.csv"), &compare_csv(&labels, &runs))?;
    write_json(&out_dir.join("compare.json"), &report)?;
    if let Some(e) = runs.iter().find_map(|r| r.error.clone()) {
        return Err(CliError::Oracle(e));
    }
    Ok(report)
}

/// Output directory for `compare`: the override, else the first config's.
pub fn compare_dir(configs: &[RunConfig], out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| configs.first().map(RunConfig::out_dir))
        .unwrap_or_else(|| PathBuf::from("out"))
}
