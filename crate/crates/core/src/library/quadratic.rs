use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg;
use crate::oracle::Objective;
use crate::scalar::Scalar;

/// `f(y) = ½ yᵀQy + bᵀy` with `Q` symmetric positive semidefinite.
///
/// The conjugate is `½ (u-b)ᵀ Q⁺ (u-b)` on `b + range(Q)` and `+inf`
/// elsewhere, evaluated through an eigendecomposition computed once.
#[derive(Debug, Clone)]
pub struct QuadraticF<T> {
    n: usize,
    q: Vec<T>,
    b: Vec<T>,
    eigvals: Vec<T>,
    /// Column-major eigenvectors, `n x n`.
    eigvecs: Vec<T>,
    rank_tol: T,
}

impl<T: Scalar> QuadraticF<T> {
    pub fn new(q_rows: &[Vec<T>], b: Vec<T>) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::Construction("quadratic of dimension 0".into()));
        }
        if q_rows.len() != n || q_rows.iter().any(|r| r.len() != n) {
            return Err(Error::Construction(format!("Q must be {n}x{n}")));
        }
        let q: Vec<T> = q_rows.concat();
        if !linalg::all_finite(&q) || !linalg::all_finite(&b) {
            return Err(Error::Construction(
                "non-finite quadratic coefficients".into(),
            ));
        }
        for i in 0..n {
            for j in 0..i {
                if q[i * n + j] != q[j * n + i] {
                    return Err(Error::Construction(format!(
                        "Q is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| q[i * n + j].to_f64_lossy());
        let eig = SymmetricEigen::new(m);
        let min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-12 {
            return Err(Error::Construction(format!(
                "Q is indefinite (smallest eigenvalue {min:e})"
            )));
        }
        let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let eigvals = eig
            .eigenvalues
            .iter()
            .map(|&l| T::lit(l.max(0.0)))
            .collect();
        let eigvecs = eig.eigenvectors.iter().map(|&v| T::lit(v)).collect();
        Ok(QuadraticF {
            n,
            q,
            b,
            eigvals,
            eigvecs,
            rank_tol: T::lit(1e-12 * max.max(1.0)),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::squared_distance(vec![T::zero(); n])
    }

    /// `½‖y‖² - cᵀy`, i.e. `½‖y - c‖²` up to a constant.
    pub fn squared_distance(c: Vec<T>) -> Self {
        let n = c.len();
        let rows: Vec<Vec<T>> = (0..n).map(|i| linalg::unit(n, i)).collect();
        Self::new(&rows, linalg::neg(&c)).expect("identity Hessian is PSD")
    }

    fn q_apply(&self, y: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| linalg::dot(&self.q[i * self.n..(i + 1) * self.n], y))
            .collect()
    }
}

impl<T: Scalar> Objective<T> for QuadraticF<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[T]) -> ExtReal<T> {
        let half = T::lit(0.5);
        ExtReal::from_float(half * linalg::dot(y, &self.q_apply(y)) + linalg::dot(&self.b, y))
    }

    fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        Ok(linalg::add(&self.q_apply(y), &self.b))
    }

    fn conjugate(&self, u: &[T]) -> ExtReal<T> {
        let w = linalg::sub(u, &self.b);
        let slack = T::membership_tol() * (T::one() + linalg::norm_inf(&w));
        let mut total = T::zero();
        for k in 0..self.n {
            let v = &self.eigvecs[k * self.n..(k + 1) * self.n];
            let c = linalg::dot(v, &w);
            let lam = self.eigvals[k];
            if lam > self.rank_tol {
                total += c * c / lam;
            } else if c.abs() > slack {
                return ExtReal::PosInf;
            }
        }
        ExtReal::from_float(T::lit(0.5) * total)
    }

    fn bregman(&self, y: &[T], x: &[T]) -> Option<Result<T>> {
        let d = linalg::sub(y, x);
        Some(Ok(T::lit(0.5) * linalg::dot(&d, &self.q_apply(&d))))
    }

    fn describe(&self) -> String {
        format!("quadratic(n={})", self.n)
    }
}
