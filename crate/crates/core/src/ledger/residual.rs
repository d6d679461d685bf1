//! Exact identities between the iterates and the gap sums, evaluated from a
//! stored run. The weights are recomputed from the step sizes by the product
//! formula rather than taken from the streaming recursion.

// Loops index several parallel sequences by the same `k` and `i` as the
// identities they evaluate.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::ledger::gaps::{dual_increment, primal_increment};
use crate::linalg;
use crate::oracle::Problem;
use crate::scalar::Scalar;

/// Absolute residual of one identity at iteration `k` and the magnitude of its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    pub k: usize,
    pub abs: T,
    pub scale: T,
}

impl<T: Scalar> Residual<T> {
    pub fn relative(&self) -> T {
        self.abs / (T::one() + self.scale)
    }
}

/// `λ^k_i = α_i Π_{i<j<k} (1 - α_j)` and `μ^k_i = Π_{i<j<k} (1 - α_j)` for `i < k`.
pub fn weights_by_product<T: Scalar>(alphas: &[T], k: usize) -> (Vec<T>, Vec<T>) {
    let mut lam = vec![T::zero(); k];
    let mut mu = vec![T::zero(); k];
    let mut tail = T::one();
    for i in (0..k).rev() {
        mu[i] = tail;
        lam[i] = alphas[i] * tail;
        tail *= T::one() - alphas[i];
    }
    (lam, mu)
}

fn require_unit_start<T: Scalar>(alphas: &[T]) -> Result<()> {
    match alphas.first() {
        Some(&a) if a == T::one() => Ok(()),
        Some(&a) => Err(Error::State(format!(
            "identities hold only for α_0 = 1, got α_0 = {a}"
        ))),
        None => Err(Error::State("identity check on an empty run".into())),
    }
}

fn finite<T: Scalar>(v: ExtReal<T>, what: &str) -> Result<T> {
    v.expect_finite(what)
}

struct Sum<T> {
    total: T,
    scale: T,
}

impl<T: Scalar> Sum<T> {
    fn new() -> Self {
        Sum {
            total: T::zero(),
            scale: T::zero(),
        }
    }

    fn add(&mut self, t: T) {
        self.total += t;
        self.scale += t.abs();
    }

    fn finish(self, k: usize) -> Residual<T> {
        Residual {
            k,
            abs: self.total.abs(),
            scale: self.scale,
        }
    }
}

fn check_lengths(context: &'static str, steps: usize, lens: &[usize]) -> Result<()> {
    for &len in lens {
        if len < steps {
            return Err(Error::Dimension {
                context,
                expected: steps,
                got: len,
            });
        }
    }
    Ok(())
}

/// For the conditional subgradient method, at every `k = 1..=K`:
///
/// ```text
/// Σ_i λ^k_i (f*(u_i) + h*(-A* u_i)) - Σ_i μ^k_i 𝒟(x_i, s_i, α_i) + f(A x_k) + h(x_k) = 0
/// ```
///
/// `xs` holds `x_0..x_K`, the other slices hold indices `0..K`.
pub fn residual_gcs<T: Scalar>(
    problem: &Problem<T>,
    xs: &[Vec<T>],
    us: &[Vec<T>],
    ss: &[Vec<T>],
    alphas: &[T],
) -> Result<Vec<Residual<T>>> {
    require_unit_start(alphas)?;
    let steps = alphas.len();
    check_lengths(
        "conditional subgradient history",
        steps,
        &[us.len(), ss.len()],
    )?;
    check_lengths("conditional subgradient history", steps + 1, &[xs.len()])?;
    let mut duals = Vec::with_capacity(steps);
    let mut script = Vec::with_capacity(steps);
    for i in 0..steps {
        duals.push(finite(
            problem.dual_residual_value(&us[i])?,
            "dual value of u_i",
        )?);
        script.push(primal_increment(problem, &xs[i], &ss[i], alphas[i])?.sharpened()?);
    }
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (lam, mu) = weights_by_product(alphas, k);
        let mut sum = Sum::new();
        for i in 0..k {
            sum.add(lam[i] * duals[i]);
            sum.add(-mu[i] * script[i]);
        }
        sum.add(finite(
            problem.primal_value(&xs[k])?,
            "primal value of x_k",
        )?);
        out.push(sum.finish(k));
    }
    Ok(out)
}

/// For mirror descent, at every `k = 1..=K`:
///
/// ```text
/// Σ_i λ^k_i (f(A y_i) + h(y_i)) - Σ_i μ^k_i 𝒟*(v_i, -z_i, α_i) + f*(-v_k) + h*(A* v_k) = 0
/// ```
///
/// `vs` holds `v_0..v_K`, the other slices hold indices `0..K`.
pub fn residual_gmd<T: Scalar>(
    problem: &Problem<T>,
    vs: &[Vec<T>],
    ys: &[Vec<T>],
    zs: &[Vec<T>],
    alphas: &[T],
) -> Result<Vec<Residual<T>>> {
    require_unit_start(alphas)?;
    let steps = alphas.len();
    check_lengths("mirror descent history", steps, &[ys.len(), zs.len()])?;
    check_lengths("mirror descent history", steps + 1, &[vs.len()])?;
    let mut primals = Vec::with_capacity(steps);
    let mut script = Vec::with_capacity(steps);
    for i in 0..steps {
        primals.push(finite(
            problem.primal_value(&ys[i])?,
            "primal value of y_i",
        )?);
        script.push(dual_increment(problem, &vs[i], &zs[i], alphas[i])?.sharpened()?);
    }
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (lam, mu) = weights_by_product(alphas, k);
        let mut sum = Sum::new();
        for i in 0..k {
            sum.add(lam[i] * primals[i]);
            sum.add(-mu[i] * script[i]);
        }
        let v = &vs[k];
        sum.add(finite(problem.f_conjugate(&linalg::neg(v))?, "f*(-v_k)")?);
        sum.add(finite(
            problem.h_conjugate(&problem.map().adjoint(v))?,
            "h*(A* v_k)",
        )?);
        out.push(sum.finish(k));
    }
    Ok(out)
}

/// For the primal-dual hybrid, at every `k = 1..=K`:
///
/// ```text
/// gap(x_k, u_k) = Σ_i μ^k_i (𝒟(x_i, s_i, α_i) + 𝒟*(-u_i, -z_i, α_i))
/// ```
///
/// `xs`, `us` hold `0..=K`, `ss`, `zs` hold `0..K`.
pub fn residual_hybrid<T: Scalar>(
    problem: &Problem<T>,
    xs: &[Vec<T>],
    us: &[Vec<T>],
    ss: &[Vec<T>],
    zs: &[Vec<T>],
    alphas: &[T],
) -> Result<Vec<Residual<T>>> {
    require_unit_start(alphas)?;
    let steps = alphas.len();
    check_lengths("hybrid history", steps, &[ss.len(), zs.len()])?;
    check_lengths("hybrid history", steps + 1, &[xs.len(), us.len()])?;
    let mut script = Vec::with_capacity(steps);
    for i in 0..steps {
        let p = primal_increment(problem, &xs[i], &ss[i], alphas[i])?.sharpened()?;
        let d = dual_increment(problem, &linalg::neg(&us[i]), &zs[i], alphas[i])?.sharpened()?;
        script.push((p, d));
    }
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (_, mu) = weights_by_product(alphas, k);
        let mut sum = Sum::new();
        for i in 0..k {
            sum.add(-mu[i] * script[i].0);
            sum.add(-mu[i] * script[i].1);
        }
        sum.add(problem.duality_gap(&xs[k], &us[k])?);
        out.push(sum.finish(k));
    }
    Ok(out)
}
