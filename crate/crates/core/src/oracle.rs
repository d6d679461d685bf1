//! Oracle contracts for `min_x f(Ax) + h(x)` and the quantities built
//! directly on them: Bregman distances, the dual pair step and the
//! duality gap.
//!
//! `f` only has to expose a subgradient selection and `h` only a
//! selection from the subdifferential of its conjugate. Domain
//! membership is never represented symbolically: a point is in the domain
//! when the oracle returns a finite value or succeeds.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg::{self, LinearMap};
use crate::scalar::Scalar;

/// Oracle bundle for the smooth-role function `f: Y -> R ∪ {+inf}`.
///
/// Implementations must be pure: no hidden mutable state.
pub trait Objective<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, y: &[T]) -> ExtReal<T>;

    /// A fixed selection from `∂f(y)`; errors outside `dom ∂f`.
    fn gradient(&self, y: &[T]) -> Result<Vec<T>>;

    /// Fenchel conjugate `f*(u)`.
    fn conjugate(&self, u: &[T]) -> ExtReal<T>;

    /// Closed-form `D_f(y, x)`, when one is cheaper or more accurate than
    /// the default built from values and gradients.
    fn bregman(&self, _y: &[T], _x: &[T]) -> Option<Result<T>> {
        None
    }

    fn describe(&self) -> String;
}

/// Oracle bundle for the regularizer role `h: X -> R ∪ {+inf}`.
///
/// The only subgradient this role needs is a selection from `∂h*`, i.e. a
/// linear minimization oracle when `h` is an indicator.
pub trait Regularizer<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> ExtReal<T>;

    /// Fenchel conjugate `h*(u)`.
    fn conjugate(&self, u: &[T]) -> ExtReal<T>;

    /// A fixed selection from `∂h*(u) = argmax_x {<u, x> - h(x)}`.
    fn conjugate_gradient(&self, u: &[T]) -> Result<Vec<T>>;

    /// Closed-form `D_{h*}(v, u)` override.
    fn conjugate_bregman(&self, _v: &[T], _u: &[T]) -> Option<Result<T>> {
        None
    }

    fn describe(&self) -> String;
}

/// Relative tolerance used for Fenchel-Young equality checks.
pub fn fenchel_young_tol<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(1e3))
}

/// `value - base - <slope, step>` with rounding-level negatives flushed to zero.
fn bregman_from_parts<T: Scalar>(value: T, base: T, slope: &[T], step: &[T]) -> T {
    let lin = linalg::dot(slope, step);
    let d = value - base - lin;
    let scale = value.abs() + base.abs() + lin.abs();
    if d < T::zero() && -d <= T::lit(64.0) * T::epsilon() * scale {
        T::zero()
    } else {
        d
    }
}

fn check_point<T: Scalar>(context: &'static str, p: &[T], dim: usize) -> Result<()> {
    Error::check_dim(context, dim, p.len())?;
    if !linalg::all_finite(p) {
        return Err(Error::domain(context, "non-finite coordinate"));
    }
    Ok(())
}

/// A problem instance `min_x f(Ax) + h(x)`: `x` lives in `X = R^n`, `Ax` in `Y = R^m`.
#[derive(Clone)]
pub struct Problem<T: Scalar> {
    f: Arc<dyn Objective<T>>,
    h: Arc<dyn Regularizer<T>>,
    map: LinearMap<T>,
}

impl<T: Scalar> fmt::Debug for Problem<T> {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("Problem")
            .field("f", &self.f.describe())
            .field("h", &self.h.describe())
            .field("n", &self.n())
            .field("m", &self.m())
            .finish()
    }
}

impl<T: Scalar> Problem<T> {
    pub fn new(
        f: Arc<dyn Objective<T>>,
        h: Arc<dyn Regularizer<T>>,
        map: LinearMap<T>,
    ) -> Result<Self> {
        Error::check_dim("f dimension vs codomain of A", map.codomain_dim(), f.dim())?;
        Error::check_dim("h dimension vs domain of A", map.domain_dim(), h.dim())?;
        Ok(Problem { f, h, map })
    }

    pub fn n(&self) -> usize {
        self.map.domain_dim()
    }

    pub fn m(&self) -> usize {
        self.map.codomain_dim()
    }

    pub fn map(&self) -> &LinearMap<T> {
        &self.map
    }

    pub fn objective(&self) -> &Arc<dyn Objective<T>> {
        &self.f
    }

    pub fn regularizer(&self) -> &Arc<dyn Regularizer<T>> {
        &self.h
    }

    pub fn describe(&self) -> String {
        format!(
            "f = {}, h = {}, A = {}",
            self.f.describe(),
            self.h.describe(),
            if self.map.is_identity() {
                "I".to_string()
            } else {
                format!("{}x{} dense", self.m(), self.n())
            }
        )
    }

    pub fn f_value(&self, y: &[T]) -> Result<ExtReal<T>> {
        check_point("f", y, self.m())?;
        Ok(self.f.value(y))
    }

    pub fn f_gradient(&self, y: &[T]) -> Result<Vec<T>> {
        check_point("∂f", y, self.m())?;
        let g = self.f.gradient(y)?;
        if !linalg::all_finite(&g) {
            return Err(Error::domain("∂f", "non-finite subgradient"));
        }
        Ok(g)
    }

    pub fn f_conjugate(&self, u: &[T]) -> Result<ExtReal<T>> {
        check_point("f*", u, self.m())?;
        Ok(self.f.conjugate(u))
    }

    pub fn h_value(&self, x: &[T]) -> Result<ExtReal<T>> {
        check_point("h", x, self.n())?;
        Ok(self.h.value(x))
    }

    pub fn h_conjugate(&self, w: &[T]) -> Result<ExtReal<T>> {
        check_point("h*", w, self.n())?;
        Ok(self.h.conjugate(w))
    }

    pub fn h_conjugate_gradient(&self, w: &[T]) -> Result<Vec<T>> {
        check_point("∂h*", w, self.n())?;
        let s = self.h.conjugate_gradient(w)?;
        if !linalg::all_finite(&s) {
            return Err(Error::domain("∂h*", "non-finite output"));
        }
        Ok(s)
    }

    /// `D_f(y, x) = f(y) - f(x) - <∂f(x), y - x>` on `Y`.
    pub fn bregman_f(&self, y: &[T], x: &[T]) -> Result<T> {
        check_point("D_f", y, self.m())?;
        check_point("D_f", x, self.m())?;
        if let Some(d) = self.f.bregman(y, x) {
            return d;
        }
        let fy = self.f.value(y).expect_finite("f(y) in D_f(y, x)")?;
        let fx = self
            .f
            .value(x)
            .finite()
            .ok_or_else(|| Error::domain("D_f", "f(x) is infinite"))?;
        let g = self.f_gradient(x)?;
        Ok(bregman_from_parts(fy, fx, &g, &linalg::sub(y, x)))
    }

    /// `D_{h*}(v, u) = h*(v) - h*(u) - <v - u, ∂h*(u)>` on `X*`.
    pub fn bregman_hconj(&self, v: &[T], u: &[T]) -> Result<T> {
        check_point("D_h*", v, self.n())?;
        check_point("D_h*", u, self.n())?;
        if let Some(d) = self.h.conjugate_bregman(v, u) {
            return d;
        }
        let hv = self.h.conjugate(v).expect_finite("h*(v) in D_h*(v, u)")?;
        let hu = self
            .h
            .conjugate(u)
            .finite()
            .ok_or_else(|| Error::domain("D_h*", "h*(u) is infinite"))?;
        let s = self.h_conjugate_gradient(u)?;
        Ok(bregman_from_parts(hv, hu, &s, &linalg::sub(v, u)))
    }

    /// `D_h(y, x)` for `x = ∂h*(cert)`, i.e. with `cert` standing in for `∂h(x)`.
    pub fn bregman_h(&self, y: &[T], x: &[T], cert: &[T]) -> Result<T> {
        check_point("D_h", cert, self.n())?;
        let hy = self.h_value(y)?.expect_finite("h(y) in D_h(y, x)")?;
        let hx = self.h_value(x)?.expect_finite("h(x) in D_h(y, x)")?;
        Ok(bregman_from_parts(hy, hx, cert, &linalg::sub(y, x)))
    }

    /// `D_{f*}(v, u)` for `u = ∂f(cert)`, i.e. with `cert` standing in for `∂f*(u)`.
    pub fn bregman_fconj(&self, v: &[T], u: &[T], cert: &[T]) -> Result<T> {
        check_point("D_f*", cert, self.m())?;
        let fv = self.f_conjugate(v)?.expect_finite("f*(v) in D_f*(v, u)")?;
        let fu = self.f_conjugate(u)?.expect_finite("f*(u) in D_f*(v, u)")?;
        Ok(bregman_from_parts(fv, fu, cert, &linalg::sub(v, u)))
    }

    /// `(x, u) -> (∂h*(-A* u), ∂f(A x))`.
    pub fn dual_pair_step(&self, x: &[T], u: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        check_point("dual pair step (x)", x, self.n())?;
        check_point("dual pair step (u)", u, self.m())?;
        let s = self.h_conjugate_gradient(&linalg::neg(&self.map.adjoint(u)))?;
        let z = self.f_gradient(&self.map.apply(x))?;
        Ok((s, z))
    }

    /// `f(Ax) + h(x)`.
    pub fn primal_value(&self, x: &[T]) -> Result<ExtReal<T>> {
        Ok(self.f_value(&self.map.apply(x))? + self.h_value(x)?)
    }

    /// `f*(u) + h*(-A* u)`, the negated dual objective.
    pub fn dual_residual_value(&self, u: &[T]) -> Result<ExtReal<T>> {
        Ok(self.f_conjugate(u)? + self.h_conjugate(&linalg::neg(&self.map.adjoint(u)))?)
    }

    /// `f(Ax) + h(x) + f*(u) + h*(-A* u)`; nonnegative by weak duality.
    pub fn duality_gap(&self, x: &[T], u: &[T]) -> Result<T> {
        let ax = self.map.apply(x);
        let terms = [
            ("f(Ax)", self.f_value(&ax)?),
            ("h(x)", self.h_value(x)?),
            ("f*(u)", self.f_conjugate(u)?),
            (
                "h*(-A*u)",
                self.h_conjugate(&linalg::neg(&self.map.adjoint(u)))?,
            ),
        ];
        let mut total = T::zero();
        for (name, t) in terms {
            total += t.expect_finite(&format!("{name} in duality gap"))?;
        }
        Ok(total)
    }

    /// Relative residual of `f(y) + f*(∂f(y)) = <∂f(y), y>`.
    pub fn fenchel_young_f(&self, y: &[T]) -> Result<T> {
        let g = self.f_gradient(y)?;
        let fy = self.f_value(y)?.expect_finite("f(y) in Fenchel-Young")?;
        let fc = self
            .f_conjugate(&g)?
            .expect_finite("f*(∂f(y)) in Fenchel-Young")?;
        let ip = linalg::dot(&g, y);
        Ok((fy + fc - ip).abs() / (T::one() + fy.abs() + fc.abs() + ip.abs()))
    }

    /// Relative residual of `h*(w) + h(∂h*(w)) = <w, ∂h*(w)>`.
    pub fn fenchel_young_h(&self, w: &[T]) -> Result<T> {
        let s = self.h_conjugate_gradient(w)?;
        let hc = self
            .h_conjugate(w)?
            .expect_finite("h*(w) in Fenchel-Young")?;
        let hs = self
            .h_value(&s)?
            .expect_finite("h(∂h*(w)) in Fenchel-Young")?;
        let ip = linalg::dot(w, &s);
        Ok((hc + hs - ip).abs() / (T::one() + hc.abs() + hs.abs() + ip.abs()))
    }

    /// Errors with [`Error::FenchelYoung`] when either equality is violated.
    pub fn assert_fenchel_young(&self, y: &[T], w: &[T]) -> Result<()> {
        let tol = fenchel_young_tol::<T>();
        let rf = self.fenchel_young_f(y)?;
        if rf > tol {
            return Err(Error::FenchelYoung {
                oracle: "f",
                residual: rf.to_f64_lossy(),
            });
        }
        let rh = self.fenchel_young_h(w)?;
        if rh > tol {
            return Err(Error::FenchelYoung {
                oracle: "h",
                residual: rh.to_f64_lossy(),
            });
        }
        Ok(())
    }
}
