//! The Fenchel dual as a problem of the same shape, and executable checks
//! of the correspondences between runs on the primal and on the dual.
//!
//! With `f̃(y) = f(-y)`, the dual of `min_x f(Ax) + h(x)` is
//!
//! ```text
//! min_v h*(A* v) + f̃*(v),    f̃*(v) = f*(-v)
//! ```
//!
//! so `h*` takes the objective role, `f̃*` the regularizer role and `A*`
//! the linear map.

use std::sync::Arc;
use std::thread;

use crate::engine::{run_gcs, run_gmd, run_hybrid, History, RunOptions, RunOutput};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg;
use crate::oracle::{Objective, Problem, Regularizer};
use crate::scalar::Scalar;
use crate::step::StepPolicy;

/// `h*` in the objective role: `∂F = ∂h*`, `F* = h`.
pub struct DualObjective<T: Scalar> {
    h: Arc<dyn Regularizer<T>>,
}

impl<T: Scalar> Objective<T> for DualObjective<T> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value(&self, w: &[T]) -> ExtReal<T> {
        self.h.conjugate(w)
    }

    fn gradient(&self, w: &[T]) -> Result<Vec<T>> {
        self.h.conjugate_gradient(w)
    }

    fn conjugate(&self, x: &[T]) -> ExtReal<T> {
        self.h.value(x)
    }

    fn bregman(&self, y: &[T], x: &[T]) -> Option<Result<T>> {
        self.h.conjugate_bregman(y, x)
    }

    fn describe(&self) -> String {
        format!("({})*", self.h.describe())
    }
}

/// `f̃*(v) = f*(-v)` in the regularizer role: `H*(y) = f(-y)`, `∂H*(y) = -∂f(-y)`.
pub struct DualRegularizer<T: Scalar> {
    f: Arc<dyn Objective<T>>,
}

impl<T: Scalar> Regularizer<T> for DualRegularizer<T> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, v: &[T]) -> ExtReal<T> {
        self.f.conjugate(&linalg::neg(v))
    }

    fn conjugate(&self, y: &[T]) -> ExtReal<T> {
        self.f.value(&linalg::neg(y))
    }

    fn conjugate_gradient(&self, y: &[T]) -> Result<Vec<T>> {
        Ok(linalg::neg(&self.f.gradient(&linalg::neg(y))?))
    }

    fn conjugate_bregman(&self, v: &[T], u: &[T]) -> Option<Result<T>> {
        self.f.bregman(&linalg::neg(v), &linalg::neg(u))
    }

    fn describe(&self) -> String {
        format!("({})~*", self.f.describe())
    }
}

/// The dual problem `(h*, f̃*, A*)`.
pub fn dualize<T: Scalar>(problem: &Problem<T>) -> Result<Problem<T>> {
    Problem::new(
        Arc::new(DualObjective {
            h: problem.regularizer().clone(),
        }),
        Arc::new(DualRegularizer {
            f: problem.objective().clone(),
        }),
        problem.map().transpose(),
    )
}

/// Largest coordinate deviation between two runs under a sign map, split by iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation<T> {
    pub iterates: T,
    pub oracle_points: T,
    /// Deviation between the two runs' gap bounds, relative to `1 + |bound|`.
    pub gap_bounds: T,
    pub steps: usize,
}

impl<T: Scalar> Deviation<T> {
    fn new(steps: usize) -> Self {
        Deviation {
            iterates: T::zero(),
            oracle_points: T::zero(),
            gap_bounds: T::zero(),
            steps,
        }
    }

    pub fn max(&self) -> T {
        self.iterates.max(self.oracle_points)
    }

    fn points(&mut self, a: &[Vec<T>], b: &[Vec<T>], sign: T, oracle: bool) -> Result<()> {
        if a.len() != b.len() {
            return Err(Error::State(format!(
                "compared runs have different lengths ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        for (p, q) in a.iter().zip(b) {
            Error::check_dim("compared iterates", p.len(), q.len())?;
            let d = p
                .iter()
                .zip(q)
                .map(|(&x, &y)| (x - sign * y).abs())
                .fold(T::zero(), T::max);
            if oracle {
                self.oracle_points = self.oracle_points.max(d);
            } else {
                self.iterates = self.iterates.max(d);
            }
        }
        Ok(())
    }

    fn bounds(&mut self, a: &RunOutput<T>, b: &RunOutput<T>) {
        for (ra, rb) in a.trace.iter().zip(&b.trace) {
            let d = (ra.bound_plain - rb.bound_plain).abs() / (T::one() + ra.bound_plain.abs());
            self.gap_bounds = self.gap_bounds.max(d);
        }
    }
}

fn require_open_loop<T: Scalar>(rule: &dyn StepPolicy<T>) -> Result<()> {
    if rule.is_open_loop() {
        Ok(())
    } else {
        Err(Error::State(format!(
            "equivalence checks need an open-loop schedule; `{}` may break ties differently on the two sides",
            rule.name()
        )))
    }
}

fn full_opts<T: Scalar>(k_max: usize) -> RunOptions<T> {
    RunOptions {
        k_max,
        full_history: true,
        check_fenchel_young: false,
        ..RunOptions::default()
    }
}

fn both<T: Scalar>(
    a: impl FnOnce() -> RunOutput<T> + Send,
    b: impl FnOnce() -> RunOutput<T> + Send,
) -> Result<(RunOutput<T>, RunOutput<T>)> {
    let (ra, rb) = thread::scope(|scope| {
        let ha = scope.spawn(a);
        let rb = b();
        (ha.join().expect("primal run panicked"), rb)
    });
    let ra = ra.into_result()?;
    let rb = rb.into_result()?;
    if ra.trace.len() != rb.trace.len() {
        return Err(Error::State(
            "compared runs stopped at different iterations".into(),
        ));
    }
    Ok((ra, rb))
}

/// Runs the conditional subgradient method on `problem` from `x0` and mirror
/// descent on its dual from `-x0`; the iterates must satisfy
/// `(v, y, z) = (-x, -u, s)` step by step.
pub fn check_bach_equivalence<T: Scalar>(
    problem: &Problem<T>,
    x0: &[T],
    rule: &dyn StepPolicy<T>,
    k_max: usize,
) -> Result<Deviation<T>> {
    require_open_loop(rule)?;
    let dual = dualize(problem)?;
    let opts = full_opts(k_max);
    let v0 = linalg::neg(x0);
    let (p, d) = both(
        || run_gcs(problem, x0, rule, &opts),
        || run_gmd(&dual, &v0, rule, &opts),
    )?;
    let mut dev = Deviation::new(p.trace.len());
    match (&p.history, &d.history) {
        (Some(History::Gcs { xs, us, ss, .. }), Some(History::Gmd { vs, ys, zs, .. })) => {
            dev.points(vs, xs, -T::one(), false)?;
            dev.points(ys, us, -T::one(), true)?;
            dev.points(zs, ss, T::one(), true)?;
        }
        _ => return Err(Error::State("runs did not keep their histories".into())),
    }
    dev.bounds(&p, &d);
    Ok(dev)
}

/// The converse direction: mirror descent on `problem` from `v0` against the
/// conditional subgradient method on its dual from `v0`, with
/// `(x', u', s') = (v, y, -z)`.
pub fn check_mirror_equivalence<T: Scalar>(
    problem: &Problem<T>,
    v0: &[T],
    rule: &dyn StepPolicy<T>,
    k_max: usize,
) -> Result<Deviation<T>> {
    require_open_loop(rule)?;
    let dual = dualize(problem)?;
    let opts = full_opts(k_max);
    let (p, d) = both(
        || run_gmd(problem, v0, rule, &opts),
        || run_gcs(&dual, v0, rule, &opts),
    )?;
    let mut dev = Deviation::new(p.trace.len());
    match (&p.history, &d.history) {
        (Some(History::Gmd { vs, ys, zs, .. }), Some(History::Gcs { xs, us, ss, .. })) => {
            dev.points(xs, vs, T::one(), false)?;
            dev.points(us, ys, T::one(), true)?;
            dev.points(ss, zs, -T::one(), true)?;
        }
        _ => return Err(Error::State("runs did not keep their histories".into())),
    }
    dev.bounds(&p, &d);
    Ok(dev)
}

/// Runs the hybrid on `problem` from `(x0, u0)` and on its dual from
/// `(-u0, x0)`; the iterates must satisfy `(x', u', s', z') = (-u, x, -z, s)`
/// and both runs see the same duality gap.
pub fn check_hybrid_symmetry<T: Scalar>(
    problem: &Problem<T>,
    x0: &[T],
    u0: &[T],
    rule: &dyn StepPolicy<T>,
    k_max: usize,
) -> Result<Deviation<T>> {
    require_open_loop(rule)?;
    let dual = dualize(problem)?;
    let opts = full_opts(k_max);
    let x0d = linalg::neg(u0);
    let (p, d) = both(
        || run_hybrid(problem, x0, u0, rule, &opts),
        || run_hybrid(&dual, &x0d, x0, rule, &opts),
    )?;
    let mut dev = Deviation::new(p.trace.len());
    match (&p.history, &d.history) {
        (
            Some(History::Hybrid { xs, us, ss, zs, .. }),
            Some(History::Hybrid {
                xs: xd,
                us: ud,
                ss: sd,
                zs: zd,
                ..
            }),
        ) => {
            dev.points(xd, us, -T::one(), false)?;
            dev.points(ud, xs, T::one(), false)?;
            dev.points(sd, zs, -T::one(), true)?;
            dev.points(zd, ss, T::one(), true)?;
        }
        _ => return Err(Error::State("runs did not keep their histories".into())),
    }
    dev.bounds(&p, &d);
    for (ra, rb) in p.trace.iter().zip(&d.trace) {
        let g = (ra.true_gap - rb.true_gap).abs() / (T::one() + ra.true_gap.abs());
        dev.gap_bounds = dev.gap_bounds.max(g);
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{
        make_entropy_lse, make_quadratic_simplex, random_gaussian_map, QuadraticF,
    };
    use crate::linalg::LinearMap;
    use crate::step::StepRule;

    fn quad_simplex() -> Problem<f64> {
        make_quadratic_simplex(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], 2).unwrap()
    }

    #[test]
    fn dual_roles_of_quadratic_simplex() {
        let d = dualize(&quad_simplex()).unwrap();
        let w = [0.3, -0.7];
        assert_eq!(d.f_value(&w).unwrap(), ExtReal::Finite(0.3));
        assert_eq!(d.f_gradient(&w).unwrap(), vec![1.0, 0.0]);
        let hv = d.h_value(&[1.0, -2.0]).unwrap().finite().unwrap();
        assert!((hv - 2.5).abs() < 1e-15);
    }

    #[test]
    fn double_dual_is_the_reflected_primal() {
        use rand::SeedableRng;
        let f = Arc::new(QuadraticF::squared_distance(vec![0.2, 0.5, 0.3]));
        let p = make_entropy_lse(3, LinearMap::identity(3), f).unwrap();
        let dd = dualize(&dualize(&p).unwrap()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x: Vec<f64> = crate::library::sample_simplex(3, &mut rng);
            let a = p.primal_value(&x).unwrap().finite().unwrap();
            let b = dd.primal_value(&linalg::neg(&x)).unwrap().finite().unwrap();
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn bach_on_identity_and_general_maps() {
        let rule = StepRule::FixedHarmonic;
        let dev = check_bach_equivalence(&quad_simplex(), &[1.0, 0.0], &rule, 50).unwrap();
        assert!(dev.max() <= 1e-12, "{dev:?}");
        let a = random_gaussian_map(3, 2, 11).unwrap();
        let f = QuadraticF::squared_distance(vec![0.5, -0.2, 0.1]);
        let p =
            crate::library::make_quadratic_set(f, crate::library::SetKind::Simplex(2), a).unwrap();
        let dev = check_bach_equivalence(&p, &[1.0, 0.0], &rule, 20).unwrap();
        assert!(dev.max() <= 1e-12, "{dev:?}");
        assert!(dev.gap_bounds <= 1e-12);
    }

    #[test]
    fn line_search_rules_are_refused() {
        let rule = StepRule::<f64>::exact_default();
        let err = check_bach_equivalence(&quad_simplex(), &[1.0, 0.0], &rule, 5).unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn hybrid_symmetry_on_quadratic_simplex() {
        let rule = StepRule::FixedHarmonic;
        let dev =
            check_hybrid_symmetry(&quad_simplex(), &[1.0, 0.0], &[1.0, 0.0], &rule, 30).unwrap();
        assert!(dev.max() <= 1e-12, "{dev:?}");
        assert!(dev.gap_bounds <= 1e-12);
    }
}
