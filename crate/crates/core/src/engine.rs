//! The three methods on `min_x f(Ax) + h(x)`, sharing one iteration core.
//!
//! Every run records, per iteration, the step size, primal and dual values
//! of the current certificate pair, the recursive gap bound and the true
//! duality gap. A run that hits an oracle failure keeps the rows it already
//! produced and reports the error alongside them.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::ledger::{
    residual_gcs, residual_gmd, residual_hybrid, Aggregate, AggregatePolicy, GapKind, GapMode,
    GapState, StepData, WeightMode, WeightState,
};
use crate::linalg;
use crate::oracle::Problem;
use crate::scalar::Scalar;
use crate::step::{outside_domain, Segment, StepPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Generalized conditional subgradient.
    Gcs,
    /// Generalized mirror descent.
    Gmd,
    /// Primal-dual hybrid.
    Hybrid,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gcs => "gcs",
            Algorithm::Gmd => "gmd",
            Algorithm::Hybrid => "hybrid",
        }
    }

    pub fn gap_kind(&self) -> GapKind {
        match self {
            Algorithm::Gcs => GapKind::Cg,
            Algorithm::Gmd => GapKind::Md,
            Algorithm::Hybrid => GapKind::Hyb,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions<T> {
    pub k_max: usize,
    /// Stop as soon as the gap bound drops below this value.
    pub epsilon: Option<T>,
    pub policy: AggregatePolicy,
    pub mode: GapMode,
    /// Keep every iterate and fill the identity residual column.
    pub full_history: bool,
    /// Verify Fenchel-Young equality at every oracle output.
    pub check_fenchel_young: bool,
    /// Record wall-clock time per row; rows carry `0` otherwise so traces
    /// stay byte-identical across runs.
    pub timing: bool,
}

impl<T> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions {
            k_max: 100,
            epsilon: None,
            policy: AggregatePolicy::Average,
            mode: GapMode::Plain,
            full_history: false,
            check_fenchel_young: cfg!(debug_assertions),
            timing: false,
        }
    }
}

/// One row of a run, describing the state after `k` updates.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub k: usize,
    /// The step `α_{k-1}` that produced this row.
    pub alpha: T,
    /// `γ_{k-1}` when the approximate-γ rule chose the step.
    pub gamma: Option<T>,
    /// `f(A p) + h(p)` at the primal certificate, `+inf` if infeasible.
    pub primal: T,
    /// `-f*(u) - h*(-A* u)` at the dual certificate, `-inf` if infeasible.
    pub dual: T,
    /// The bound used for stopping: plain or sharpened per the run mode.
    pub gap_bound: T,
    pub bound_plain: T,
    pub bound_sharpened: Option<T>,
    /// `primal - dual`.
    pub true_gap: T,
    /// Relative residual of the method's exact identity (full-history runs).
    pub residual: Option<T>,
    pub t_ms: f64,
}

/// Stored iterates of a full-history run. Point sequences carry `K + 1`
/// entries; oracle outputs and steps carry `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum History<T> {
    Gcs {
        xs: Vec<Vec<T>>,
        us: Vec<Vec<T>>,
        ss: Vec<Vec<T>>,
        alphas: Vec<T>,
    },
    Gmd {
        vs: Vec<Vec<T>>,
        ys: Vec<Vec<T>>,
        zs: Vec<Vec<T>>,
        alphas: Vec<T>,
    },
    Hybrid {
        xs: Vec<Vec<T>>,
        us: Vec<Vec<T>>,
        ss: Vec<Vec<T>>,
        zs: Vec<Vec<T>>,
        alphas: Vec<T>,
    },
}

impl<T: Scalar> History<T> {
    fn new(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Gcs => History::Gcs {
                xs: vec![],
                us: vec![],
                ss: vec![],
                alphas: vec![],
            },
            Algorithm::Gmd => History::Gmd {
                vs: vec![],
                ys: vec![],
                zs: vec![],
                alphas: vec![],
            },
            Algorithm::Hybrid => History::Hybrid {
                xs: vec![],
                us: vec![],
                ss: vec![],
                zs: vec![],
                alphas: vec![],
            },
        }
    }

    pub fn alphas(&self) -> &[T] {
        match self {
            History::Gcs { alphas, .. }
            | History::Gmd { alphas, .. }
            | History::Hybrid { alphas, .. } => alphas,
        }
    }

    /// Relative identity residuals for `k = 1..=K`.
    pub fn residuals(&self, problem: &Problem<T>) -> Result<Vec<T>> {
        let res = match self {
            History::Gcs { xs, us, ss, alphas } => residual_gcs(problem, xs, us, ss, alphas)?,
            History::Gmd { vs, ys, zs, alphas } => residual_gmd(problem, vs, ys, zs, alphas)?,
            History::Hybrid {
                xs,
                us,
                ss,
                zs,
                alphas,
            } => residual_hybrid(problem, xs, us, ss, zs, alphas)?,
        };
        Ok(res.iter().map(|r| r.relative()).collect())
    }
}

/// Final iterate of a run. For mirror descent, `cert = A* v` is the
/// covector with `y = ∂h*(cert)`, i.e. the stand-in for `∂h(y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum IterateState<T> {
    Gcs { k: usize, x: Vec<T> },
    Gmd { k: usize, v: Vec<T>, cert: Vec<T> },
    Hybrid { k: usize, x: Vec<T>, u: Vec<T> },
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub algorithm: Algorithm,
    pub rule: String,
    pub trace: Vec<TraceRecord<T>>,
    pub history: Option<History<T>>,
    /// The failure that ended the run early, if any.
    pub error: Option<Error>,
    pub warnings: Vec<String>,
    pub state: Option<IterateState<T>>,
    /// Primal certificate of the last row: `x_k`, or `ŷ_k` for mirror descent.
    pub primal_point: Option<Vec<T>>,
    /// Dual certificate of the last row: `û_k`, `-v_k` or `u_k`.
    pub dual_point: Option<Vec<T>>,
    /// Set when the gap bound reached `epsilon` before `k_max`.
    pub converged: bool,
}

impl<T: Scalar> RunOutput<T> {
    pub fn last(&self) -> Option<&TraceRecord<T>> {
        self.trace.last()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Plain-mode derivative data along `p + α d` for `∇f∘A` or `∂h*∘A*`.
struct Ray<T> {
    base: Vec<T>,
    dir: Vec<T>,
    grad0: Vec<T>,
}

impl<T: Scalar> Ray<T> {
    fn slope(&self, alpha: T, grad: impl Fn(&[T]) -> Result<Vec<T>>) -> Result<Option<T>> {
        let p: Vec<T> = self
            .base
            .iter()
            .zip(&self.dir)
            .map(|(&b, &d)| b + alpha * d)
            .collect();
        Ok(
            outside_domain(grad(&p))?
                .map(|g| linalg::dot(&linalg::sub(&g, &self.grad0), &self.dir)),
        )
    }
}

struct GapSegment<'a, T: Scalar> {
    problem: &'a Problem<T>,
    data: StepData<'a, T>,
    mode: GapMode,
    gap: T,
    primal_ray: Option<Ray<T>>,
    dual_ray: Option<Ray<T>>,
}

impl<'a, T: Scalar> GapSegment<'a, T> {
    fn new(
        problem: &'a Problem<T>,
        data: StepData<'a, T>,
        mode: GapMode,
        gap: T,
        grad_ax: &[T],
        cert_y: &[T],
    ) -> Self {
        let map = problem.map();
        let (mut primal_ray, mut dual_ray) = (None, None);
        if mode == GapMode::Plain {
            let primal = |x: &[T], s: &[T]| Ray {
                base: map.apply(x),
                dir: map.apply(&linalg::sub(s, x)),
                grad0: grad_ax.to_vec(),
            };
            let dual = |v: &[T], z: &[T]| Ray {
                base: map.adjoint(v),
                dir: map.adjoint(&linalg::sub(&linalg::neg(z), v)),
                grad0: cert_y.to_vec(),
            };
            match data {
                StepData::Cg { x, s } => primal_ray = Some(primal(x, s)),
                StepData::Md { v, z } => dual_ray = Some(dual(v, z)),
                StepData::Hyb { x, s, u, z } => {
                    primal_ray = Some(primal(x, s));
                    dual_ray = Some(dual(&linalg::neg(u), z));
                }
            }
        }
        GapSegment {
            problem,
            data,
            mode,
            gap,
            primal_ray,
            dual_ray,
        }
    }
}

impl<T: Scalar> Segment<T> for GapSegment<'_, T> {
    fn gap(&self) -> T {
        self.gap
    }

    fn increment(&self, alpha: T) -> Result<Option<T>> {
        let inc = match outside_domain(self.data.increment(self.problem, alpha))? {
            Some(inc) => inc,
            None => return Ok(None),
        };
        match self.mode {
            GapMode::Plain => Ok(Some(inc.plain)),
            GapMode::Sharpened => outside_domain(inc.sharpened()),
        }
    }

    fn increment_slope(&self, alpha: T) -> Option<Result<Option<T>>> {
        if self.primal_ray.is_none() && self.dual_ray.is_none() {
            return None;
        }
        let eval = || -> Result<Option<T>> {
            let mut total = T::zero();
            if let Some(ray) = &self.primal_ray {
                match ray.slope(alpha, |y| self.problem.f_gradient(y))? {
                    Some(d) => total += d,
                    None => return Ok(None),
                }
            }
            if let Some(ray) = &self.dual_ray {
                match ray.slope(alpha, |w| self.problem.h_conjugate_gradient(w))? {
                    Some(d) => total += d,
                    None => return Ok(None),
                }
            }
            Ok(Some(total))
        };
        Some(eval())
    }
}

/// Bookkeeping shared by the three loops.
struct Core<'a, T: Scalar> {
    problem: &'a Problem<T>,
    rule: &'a dyn StepPolicy<T>,
    opts: &'a RunOptions<T>,
    weights: WeightState<T>,
    gap: GapState<T>,
    out: RunOutput<T>,
    start: Instant,
}

impl<'a, T: Scalar> Core<'a, T> {
    fn new(
        algorithm: Algorithm,
        problem: &'a Problem<T>,
        rule: &'a dyn StepPolicy<T>,
        opts: &'a RunOptions<T>,
    ) -> Self {
        let mode = if opts.full_history {
            WeightMode::FullHistory
        } else {
            WeightMode::Streaming
        };
        Core {
            problem,
            rule,
            opts,
            weights: WeightState::new(mode),
            gap: GapState::new(algorithm.gap_kind()),
            out: RunOutput {
                algorithm,
                rule: rule.name(),
                trace: Vec::new(),
                history: opts.full_history.then(|| History::new(algorithm)),
                error: None,
                warnings: Vec::new(),
                state: None,
                primal_point: None,
                dual_point: None,
                converged: false,
            },
            start: Instant::now(),
        }
    }

    /// Chooses `α_k`, then folds the step into the gap and the weights.
    fn step(
        &mut self,
        k: usize,
        data: StepData<'_, T>,
        grad_ax: &[T],
        cert_y: &[T],
    ) -> Result<(T, Option<T>)> {
        let gap = if k == 0 {
            T::zero()
        } else {
            self.gap.value(self.opts.mode)?
        };
        let segment = GapSegment::new(self.problem, data, self.opts.mode, gap, grad_ax, cert_y);
        let choice = self.rule.select(k, &segment)?;
        let alpha = choice.alpha;
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::Range(format!(
                "rule {} emitted α_{k} = {alpha}",
                self.rule.name()
            )));
        }
        if let Some(w) = choice.warning {
            self.out.warnings.push(format!("k = {k}: {w}"));
        }
        self.gap.advance(self.problem, data, alpha)?;
        self.weights.update(alpha)?;
        Ok((alpha, choice.gamma))
    }

    /// Appends the row for the state after `k` updates; returns whether to stop.
    fn record(
        &mut self,
        k: usize,
        step: (T, Option<T>),
        primal: ExtReal<T>,
        dual_residual: ExtReal<T>,
    ) -> Result<bool> {
        let bound_plain = self.gap.plain()?;
        let bound_sharpened = self.gap.sharpened().ok();
        let gap_bound = self.gap.value(self.opts.mode)?;
        let primal_f = primal.to_float();
        let dual_f = -dual_residual.to_float();
        let t_ms = if self.opts.timing {
            self.start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        self.out.trace.push(TraceRecord {
            k,
            alpha: step.0,
            gamma: step.1,
            primal: primal_f,
            dual: dual_f,
            gap_bound,
            bound_plain,
            bound_sharpened,
            true_gap: (primal + dual_residual).to_float(),
            residual: None,
            t_ms,
        });
        let stop = self.opts.epsilon.is_some_and(|eps| gap_bound < eps);
        if stop {
            self.out.converged = true;
        }
        Ok(stop)
    }

    fn check_fy(&self, y: &[T], w: &[T]) -> Result<()> {
        if self.opts.check_fenchel_young {
            self.problem.assert_fenchel_young(y, w)
        } else {
            Ok(())
        }
    }

    fn finish(mut self, result: Result<()>) -> RunOutput<T> {
        if let Err(e) = result {
            self.out.error = Some(e);
        }
        if let Some(history) = &self.out.history {
            if !history.alphas().is_empty() {
                match history.residuals(self.problem) {
                    Ok(res) => {
                        for (row, r) in self.out.trace.iter_mut().zip(res) {
                            row.residual = Some(r);
                        }
                    }
                    Err(e) => self
                        .out
                        .warnings
                        .push(format!("identity residuals unavailable: {e}")),
                }
            }
        }
        self.out
    }
}

fn check_start<T: Scalar>(what: &'static str, p: &[T], dim: usize) -> Result<()> {
    Error::check_dim(what, dim, p.len())?;
    if !linalg::all_finite(p) {
        return Err(Error::domain(what, "non-finite coordinate"));
    }
    Ok(())
}

/// Generalized conditional subgradient from `x0 ∈ dom(∂f∘A)`:
///
/// ```text
/// u_k = ∂f(A x_k),  s_k = ∂h*(-A* u_k),  x_{k+1} = (1-α_k) x_k + α_k s_k
/// ```
///
/// The dual certificate is `û_k` (average or best per `opts.policy`).
pub fn run_gcs<T: Scalar>(
    problem: &Problem<T>,
    x0: &[T],
    rule: &dyn StepPolicy<T>,
    opts: &RunOptions<T>,
) -> RunOutput<T> {
    let mut core = Core::new(Algorithm::Gcs, problem, rule, opts);
    let mut agg = Aggregate::new(opts.policy);
    let mut x = x0.to_vec();
    let result = (|| -> Result<()> {
        check_start("x0", x0, problem.n())?;
        let map = problem.map();
        if let Some(History::Gcs { xs, .. }) = &mut core.out.history {
            xs.push(x.clone());
        }
        for k in 0..opts.k_max {
            let ax = map.apply(&x);
            let u = problem.f_gradient(&ax)?;
            let w = linalg::neg(&map.adjoint(&u));
            let s = problem.h_conjugate_gradient(&w)?;
            core.check_fy(&ax, &w)?;
            let step = core.step(k, StepData::Cg { x: &x, s: &s }, &u, &[])?;
            let alpha = step.0;
            agg.push(&u, alpha, problem.dual_residual_value(&u)?);
            let x_next = linalg::lerp(&x, &s, alpha);
            if let Some(History::Gcs { xs, us, ss, alphas }) = &mut core.out.history {
                xs.push(x_next.clone());
                us.push(u.clone());
                ss.push(s.clone());
                alphas.push(alpha);
            }
            x = x_next;
            let u_hat = agg
                .point()
                .expect("aggregate is non-empty after a push")
                .to_vec();
            let primal = problem.primal_value(&x)?;
            let dual = problem.dual_residual_value(&u_hat)?;
            core.out.primal_point = Some(x.clone());
            core.out.dual_point = Some(u_hat);
            core.out.state = Some(IterateState::Gcs {
                k: k + 1,
                x: x.clone(),
            });
            if core.record(k + 1, step, primal, dual)? {
                break;
            }
        }
        Ok(())
    })();
    core.finish(result)
}

/// Generalized mirror descent from `v0 ∈ dom(∂h*∘A*)`:
///
/// ```text
/// y_k = ∂h*(A* v_k),  z_k = ∂f(A y_k),  v_{k+1} = (1-α_k) v_k - α_k z_k
/// ```
///
/// The certificates are `ŷ_k` (primal) and `-v_k` (dual).
pub fn run_gmd<T: Scalar>(
    problem: &Problem<T>,
    v0: &[T],
    rule: &dyn StepPolicy<T>,
    opts: &RunOptions<T>,
) -> RunOutput<T> {
    let mut core = Core::new(Algorithm::Gmd, problem, rule, opts);
    let mut agg = Aggregate::new(opts.policy);
    let mut v = v0.to_vec();
    let result = (|| -> Result<()> {
        check_start("v0", v0, problem.m())?;
        let map = problem.map();
        if let Some(History::Gmd { vs, .. }) = &mut core.out.history {
            vs.push(v.clone());
        }
        for k in 0..opts.k_max {
            let w = map.adjoint(&v);
            let y = problem.h_conjugate_gradient(&w)?;
            let ay = map.apply(&y);
            let z = problem.f_gradient(&ay)?;
            core.check_fy(&ay, &w)?;
            let step = core.step(k, StepData::Md { v: &v, z: &z }, &[], &y)?;
            let alpha = step.0;
            agg.push(&y, alpha, problem.primal_value(&y)?);
            let v_next = linalg::lerp(&v, &linalg::neg(&z), alpha);
            if let Some(History::Gmd { vs, ys, zs, alphas }) = &mut core.out.history {
                vs.push(v_next.clone());
                ys.push(y.clone());
                zs.push(z.clone());
                alphas.push(alpha);
            }
            v = v_next;
            let y_hat = agg
                .point()
                .expect("aggregate is non-empty after a push")
                .to_vec();
            let u = linalg::neg(&v);
            let primal = problem.primal_value(&y_hat)?;
            let dual = problem.dual_residual_value(&u)?;
            core.out.primal_point = Some(y_hat);
            core.out.dual_point = Some(u);
            core.out.state = Some(IterateState::Gmd {
                k: k + 1,
                cert: map.adjoint(&v),
                v: v.clone(),
            });
            if core.record(k + 1, step, primal, dual)? {
                break;
            }
        }
        Ok(())
    })();
    core.finish(result)
}

/// Primal-dual hybrid from `x0 ∈ dom(∂f∘A)`, `u0 ∈ -dom(∂h*∘A*)`:
///
/// ```text
/// (s_k, z_k) = (∂h*(-A* u_k), ∂f(A x_k)),  (x, u)_{k+1} = (1-α_k)(x, u)_k + α_k (s, z)_k
/// ```
pub fn run_hybrid<T: Scalar>(
    problem: &Problem<T>,
    x0: &[T],
    u0: &[T],
    rule: &dyn StepPolicy<T>,
    opts: &RunOptions<T>,
) -> RunOutput<T> {
    let mut core = Core::new(Algorithm::Hybrid, problem, rule, opts);
    let mut x = x0.to_vec();
    let mut u = u0.to_vec();
    let result = (|| -> Result<()> {
        check_start("x0", x0, problem.n())?;
        check_start("u0", u0, problem.m())?;
        let map = problem.map();
        if let Some(History::Hybrid { xs, us, .. }) = &mut core.out.history {
            xs.push(x.clone());
            us.push(u.clone());
        }
        for k in 0..opts.k_max {
            let (s, z) = problem.dual_pair_step(&x, &u)?;
            core.check_fy(&map.apply(&x), &linalg::neg(&map.adjoint(&u)))?;
            let data = StepData::Hyb {
                x: &x,
                s: &s,
                u: &u,
                z: &z,
            };
            let step = core.step(k, data, &z, &s)?;
            let alpha = step.0;
            let x_next = linalg::lerp(&x, &s, alpha);
            let u_next = linalg::lerp(&u, &z, alpha);
            if let Some(History::Hybrid {
                xs,
                us,
                ss,
                zs,
                alphas,
            }) = &mut core.out.history
            {
                xs.push(x_next.clone());
                us.push(u_next.clone());
                ss.push(s.clone());
                zs.push(z.clone());
                alphas.push(alpha);
            }
            x = x_next;
            u = u_next;
            let primal = problem.primal_value(&x)?;
            let dual = problem.dual_residual_value(&u)?;
            core.out.primal_point = Some(x.clone());
            core.out.dual_point = Some(u.clone());
            core.out.state = Some(IterateState::Hybrid {
                k: k + 1,
                x: x.clone(),
                u: u.clone(),
            });
            if core.record(k + 1, step, primal, dual)? {
                break;
            }
        }
        Ok(())
    })();
    core.finish(result)
}
