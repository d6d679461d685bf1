//! Log-sum-exp and negative entropy on the simplex: a conjugate pair.

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::oracle::{Objective, Regularizer};
use crate::scalar::Scalar;

/// `log Σ exp(u_i)`, shifted by the max entry.
pub fn log_sum_exp<T: Scalar>(u: &[T]) -> T {
    let m = u.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let s: T = u.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// `exp(u_i) / Σ exp(u_j)`, normalised explicitly.
pub fn softmax<T: Scalar>(u: &[T]) -> Vec<T> {
    let m = u.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let e: Vec<T> = u.iter().map(|&x| (x - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `Σ x_i ln x_i` on the simplex, `+inf` off it.
pub fn negative_entropy<T: Scalar>(x: &[T]) -> ExtReal<T> {
    let tol = T::membership_tol();
    let sum: T = x.iter().copied().sum();
    if (sum - T::one()).abs() > tol * T::from_count(x.len().max(1)) {
        return ExtReal::PosInf;
    }
    let mut total = T::zero();
    for &xi in x {
        if xi < -tol {
            return ExtReal::PosInf;
        }
        if xi > T::zero() {
            total += xi * xi.ln();
        }
    }
    ExtReal::Finite(total)
}

/// `h(x) = Σ x_i ln x_i + δ_simplex(x)`, so `h* = log-sum-exp` and `∂h* = softmax`.
///
/// `dom ∂h*` is all of `X*`.
#[derive(Debug, Clone)]
pub struct NegEntropyH {
    n: usize,
}

impl NegEntropyH {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Construction("entropy simplex needs n >= 2".into()));
        }
        Ok(NegEntropyH { n })
    }
}

impl<T: Scalar> Regularizer<T> for NegEntropyH {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[T]) -> ExtReal<T> {
        negative_entropy(x)
    }

    fn conjugate(&self, u: &[T]) -> ExtReal<T> {
        ExtReal::from_float(log_sum_exp(u))
    }

    fn conjugate_gradient(&self, u: &[T]) -> Result<Vec<T>> {
        Ok(softmax(u))
    }

    fn describe(&self) -> String {
        format!("neg-entropy(n={})", self.n)
    }
}

/// `f(y) = log Σ exp(y_i)` with `f*` the negative entropy on the simplex.
#[derive(Debug, Clone)]
pub struct LogSumExpF {
    n: usize,
}

impl LogSumExpF {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("log-sum-exp of dimension 0".into()));
        }
        Ok(LogSumExpF { n })
    }
}

impl<T: Scalar> Objective<T> for LogSumExpF {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[T]) -> ExtReal<T> {
        ExtReal::from_float(log_sum_exp(y))
    }

    fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        Ok(softmax(y))
    }

    fn conjugate(&self, u: &[T]) -> ExtReal<T> {
        negative_entropy(u)
    }

    fn describe(&self) -> String {
        format!("log-sum-exp(n={})", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use proptest::prelude::*;

    #[test]
    fn softmax_of_zero_is_uniform() {
        assert_eq!(softmax(&[0.0_f64, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn lse_at_ones() {
        let v = log_sum_exp(&[1.0_f64, 1.0]);
        assert!((v - (1.0 + 2.0_f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn lse_is_overflow_safe() {
        let v = log_sum_exp(&[1000.0_f64, 1000.0]);
        assert!((v - (1000.0 + 2.0_f64.ln())).abs() < 1e-12);
        let p = softmax(&[1000.0_f64, -1000.0]);
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn fenchel_young_at_interior_point() {
        // h(softmax(u)) + lse(u) - <u, softmax(u)> for u = (1, -1); exact value 0.
        let u = [1.0_f64, -1.0];
        let s = softmax(&u);
        let r = negative_entropy(&s).finite().unwrap() + log_sum_exp(&u) - dot(&u, &s);
        assert!(r.abs() < 1e-15, "{r}");
    }

    #[test]
    fn off_simplex_entropy_is_infinite() {
        assert_eq!(negative_entropy(&[0.7_f64, 0.7]), ExtReal::PosInf);
        assert_eq!(negative_entropy(&[1.5_f64, -0.5]), ExtReal::PosInf);
        assert_eq!(negative_entropy(&[1.0_f64, 0.0]), ExtReal::Finite(0.0));
    }

    proptest! {
        #[test]
        fn softmax_is_a_positive_distribution(u in prop::collection::vec(-30.0f64..30.0, 2..8)) {
            let p = softmax(&u);
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|&x| x > 0.0));
        }
    }
}
