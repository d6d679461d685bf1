use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg;
use crate::oracle::Problem;
use crate::scalar::Scalar;

/// `𝒟_{f∘A,h}(x, s, α) = D_f(A x_α, A x) + h(x_α) - (1-α) h(x) - α h(s)`
/// with `x_α = (1-α) x + α s`.
///
/// Bounded above by the plain Bregman term by convexity of `h`. A zero
/// weight drops its `h` term, so `h(x)` may be infinite when `α = 1`.
pub fn script_d_primal<T: Scalar>(problem: &Problem<T>, x: &[T], s: &[T], alpha: T) -> Result<T> {
    primal_increment(problem, x, s, alpha).and_then(|inc| inc.sharpened())
}

/// `𝒟_{h*∘A*, f̃*}(v, -z, α) = D_{h*}(A* v_α, A* v) + f*(-v_α) - (1-α) f*(-v) - α f*(z)`
/// with `v_α = (1-α) v - α z`.
pub fn script_d_dual<T: Scalar>(problem: &Problem<T>, v: &[T], z: &[T], alpha: T) -> Result<T> {
    dual_increment(problem, v, z, alpha).and_then(|inc| inc.sharpened())
}

/// The plain Bregman increment of one step and its sharpened counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment<T> {
    pub plain: T,
    /// `Err` text when an `h`/`f*` term needed by the sharpened form is infinite.
    pub sharp: std::result::Result<T, &'static str>,
}

impl<T: Scalar> Increment<T> {
    pub fn sharpened(&self) -> Result<T> {
        self.sharp
            .map_err(|what| Error::InfiniteValue(what.to_string()))
    }

    fn combine(self, other: Self) -> Self {
        Increment {
            plain: self.plain + other.plain,
            sharp: match (self.sharp, other.sharp) {
                (Ok(a), Ok(b)) => Ok(a + b),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
        }
    }
}

/// `ext(x_α) - (1-α) ext(x) - α ext(s)` for extended values.
fn chord_defect<T: Scalar>(
    at: ExtReal<T>,
    left: ExtReal<T>,
    right: ExtReal<T>,
    alpha: T,
) -> Option<T> {
    let at = at.finite()?;
    let left = left.scale(T::one() - alpha).finite()?;
    let right = right.scale(alpha).finite()?;
    Some(at - left - right)
}

pub(crate) fn primal_increment<T: Scalar>(
    problem: &Problem<T>,
    x: &[T],
    s: &[T],
    alpha: T,
) -> Result<Increment<T>> {
    let x_next = linalg::lerp(x, s, alpha);
    let map = problem.map();
    let plain = problem.bregman_f(&map.apply(&x_next), &map.apply(x))?;
    let sharp = chord_defect(
        problem.h_value(&x_next)?,
        problem.h_value(x)?,
        problem.h_value(s)?,
        alpha,
    )
    .map(|defect| plain + defect)
    .ok_or("h term of the sharpened primal increment");
    Ok(Increment { plain, sharp })
}

pub(crate) fn dual_increment<T: Scalar>(
    problem: &Problem<T>,
    v: &[T],
    z: &[T],
    alpha: T,
) -> Result<Increment<T>> {
    let v_next = linalg::lerp(v, &linalg::neg(z), alpha);
    let map = problem.map();
    let plain = problem.bregman_hconj(&map.adjoint(&v_next), &map.adjoint(v))?;
    let sharp = chord_defect(
        problem.f_conjugate(&linalg::neg(&v_next))?,
        problem.f_conjugate(&linalg::neg(v))?,
        problem.f_conjugate(z)?,
        alpha,
    )
    .map(|defect| plain + defect)
    .ok_or("f* term of the sharpened dual increment");
    Ok(Increment { plain, sharp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    /// Conditional subgradient: `CGgap`.
    Cg,
    /// Mirror descent: `MDgap`.
    Md,
    /// Primal-dual hybrid: `HYBgap`.
    Hyb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    Plain,
    Sharpened,
}

/// The iterate data one step of each recursion consumes.
#[derive(Debug, Clone, Copy)]
pub enum StepData<'a, T> {
    /// Current primal iterate and oracle point `s_k = ∂h*(-A* u_k)`.
    Cg { x: &'a [T], s: &'a [T] },
    /// Current dual iterate and `z_k = ∂f(A y_k)`.
    Md { v: &'a [T], z: &'a [T] },
    Hyb {
        x: &'a [T],
        s: &'a [T],
        u: &'a [T],
        z: &'a [T],
    },
}

impl<'a, T: Scalar> StepData<'a, T> {
    pub fn kind(&self) -> GapKind {
        match self {
            StepData::Cg { .. } => GapKind::Cg,
            StepData::Md { .. } => GapKind::Md,
            StepData::Hyb { .. } => GapKind::Hyb,
        }
    }

    /// The increment this step adds to its gap recursion.
    pub fn increment(&self, problem: &Problem<T>, alpha: T) -> Result<Increment<T>> {
        match *self {
            StepData::Cg { x, s } => primal_increment(problem, x, s, alpha),
            StepData::Md { v, z } => dual_increment(problem, v, z, alpha),
            StepData::Hyb { x, s, u, z } => Ok(primal_increment(problem, x, s, alpha)?
                .combine(dual_increment(problem, &linalg::neg(u), z, alpha)?)),
        }
    }
}

/// Running `CGgap`/`MDgap`/`HYBgap`, plain and sharpened side by side:
///
/// ```text
/// gap_{k+1} = (1 - α_k) gap_k + increment_k
/// ```
///
/// The first update must use `α_0 = 1`, which makes it the base case.
#[derive(Debug, Clone)]
pub struct GapState<T> {
    kind: GapKind,
    k: usize,
    plain: T,
    sharpened: Option<T>,
}

impl<T: Scalar> GapState<T> {
    pub fn new(kind: GapKind) -> Self {
        GapState {
            kind,
            k: 0,
            plain: T::zero(),
            sharpened: Some(T::zero()),
        }
    }

    pub fn kind(&self) -> GapKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn push(&mut self, alpha: T, inc: Increment<T>) -> Result<()> {
        if self.k == 0 && alpha != T::one() {
            return Err(Error::State(format!(
                "gap recursion needs a unit first step, got α_0 = {alpha}"
            )));
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::Range(format!("step size {alpha} not in [0, 1]")));
        }
        let keep = T::one() - alpha;
        self.plain = keep * self.plain + inc.plain;
        self.sharpened = match (self.sharpened, inc.sharp) {
            (Some(g), Ok(d)) => Some(keep * g + d),
            _ => None,
        };
        self.k += 1;
        Ok(())
    }

    /// Computes the step's increment from `data` and folds it in.
    pub fn advance(
        &mut self,
        problem: &Problem<T>,
        data: StepData<'_, T>,
        alpha: T,
    ) -> Result<Increment<T>> {
        if data.kind() != self.kind {
            return Err(Error::State(format!(
                "{:?} step data fed to a {:?} gap",
                data.kind(),
                self.kind
            )));
        }
        let inc = data.increment(problem, alpha)?;
        self.push(alpha, inc)?;
        Ok(inc)
    }

    pub fn plain(&self) -> Result<T> {
        self.ensure_started()?;
        Ok(self.plain)
    }

    pub fn sharpened(&self) -> Result<T> {
        self.ensure_started()?;
        self.sharpened
            .ok_or_else(|| Error::InfiniteValue("sharpened gap term".into()))
    }

    pub fn value(&self, mode: GapMode) -> Result<T> {
        match mode {
            GapMode::Plain => self.plain(),
            GapMode::Sharpened => self.sharpened(),
        }
    }

    fn ensure_started(&self) -> Result<()> {
        if self.k == 0 {
            Err(Error::State("gap read before its base case".into()))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::library::{make_entropy_lse, make_quadratic_simplex, QuadraticF};
    use crate::linalg::LinearMap;

    fn quad_simplex() -> Problem<f64> {
        make_quadratic_simplex(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], 2).unwrap()
    }

    fn entropy_quad() -> Problem<f64> {
        make_entropy_lse(2, LinearMap::identity(2), Arc::new(QuadraticF::identity(2))).unwrap()
    }

    #[test]
    fn script_d_primal_on_simplex_edge() {
        let p = quad_simplex();
        let (e1, e2) = ([1.0, 0.0], [0.0, 1.0]);
        assert!((script_d_primal(&p, &e1, &e2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(script_d_primal(&p, &e1, &e2, 0.0).unwrap(), 0.0);
        assert!((script_d_primal(&p, &e1, &e2, 0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn script_d_primal_tolerates_infeasible_start_at_unit_step() {
        let p = quad_simplex();
        let d = script_d_primal(&p, &[0.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert!(script_d_primal(&p, &[0.0, 0.0], &[0.0, 1.0], 0.5).is_err());
    }

    #[test]
    fn script_d_dual_values() {
        let p = entropy_quad();
        assert_eq!(
            script_d_dual(&p, &[0.0, 0.0], &[0.0, 0.0], 0.3).unwrap(),
            0.0
        );
        assert_eq!(
            script_d_dual(&p, &[1.0, 0.0], &[0.0, 0.0], 0.0).unwrap(),
            0.0
        );
        let d = script_d_dual(&p, &[1.0, 0.0], &[0.0, 0.0], 1.0).unwrap();
        assert!((d - 0.110944071671727).abs() < 1e-13, "{d}");
    }

    #[test]
    fn sharpened_never_exceeds_plain() {
        let p = entropy_quad();
        for &a in &[0.1, 0.4, 0.8] {
            let inc = dual_increment(&p, &[0.3, -1.2], &[0.5, 0.1], a).unwrap();
            assert!(inc.sharpened().unwrap() <= inc.plain + 1e-15);
        }
    }

    #[test]
    fn cg_gap_harmonic_run() {
        let p = quad_simplex();
        let mut g = GapState::new(GapKind::Cg);
        assert!(g.plain().is_err());
        let (e1, e2) = (vec![1.0, 0.0], vec![0.0, 1.0]);
        g.advance(&p, StepData::Cg { x: &e1, s: &e2 }, 1.0).unwrap();
        assert!((g.plain().unwrap() - 1.0).abs() < 1e-15);
        let x1 = e2.clone();
        g.advance(&p, StepData::Cg { x: &x1, s: &e1 }, 2.0 / 3.0)
            .unwrap();
        assert!((g.plain().unwrap() - 7.0 / 9.0).abs() < 1e-15);
        assert!((g.sharpened().unwrap() - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn zero_step_keeps_gap() {
        let p = quad_simplex();
        let mut g = GapState::new(GapKind::Cg);
        let (e1, e2) = (vec![1.0, 0.0], vec![0.0, 1.0]);
        g.advance(&p, StepData::Cg { x: &e1, s: &e2 }, 1.0).unwrap();
        g.advance(&p, StepData::Cg { x: &e2, s: &e1 }, 0.0).unwrap();
        assert_eq!(g.plain().unwrap(), 1.0);
    }

    #[test]
    fn non_unit_first_step_is_a_state_error() {
        let p = quad_simplex();
        let mut g = GapState::new(GapKind::Cg);
        let (e1, e2) = (vec![1.0, 0.0], vec![0.0, 1.0]);
        let err = g
            .advance(&p, StepData::Cg { x: &e1, s: &e2 }, 0.5)
            .unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn mismatched_step_data_rejected() {
        let p = quad_simplex();
        let mut g = GapState::new(GapKind::Md);
        let e1 = vec![1.0, 0.0];
        assert!(g.advance(&p, StepData::Cg { x: &e1, s: &e1 }, 1.0).is_err());
    }
}
