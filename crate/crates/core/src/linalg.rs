//! Dense vectors as slices, and the linear map `A` with its adjoint.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn neg<T: Scalar>(a: &[T]) -> Vec<T> {
    a.iter().map(|&x| -x).collect()
}

pub fn scale<T: Scalar>(a: &[T], c: T) -> Vec<T> {
    a.iter().map(|&x| c * x).collect()
}

/// `(1 - alpha) * a + alpha * b`.
pub fn lerp<T: Scalar>(a: &[T], b: &[T], alpha: T) -> Vec<T> {
    let beta = T::one() - alpha;
    a.iter()
        .zip(b)
        .map(|(&x, &y)| beta * x + alpha * y)
        .collect()
}

pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub fn norm2_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub fn all_finite<T: Scalar>(a: &[T]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax<T: Scalar>(a: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in a.iter().enumerate().skip(1) {
        if x > a[best] {
            best = i;
        }
    }
    best
}

pub fn unit<T: Scalar>(n: usize, i: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[i] = T::one();
    e
}

/// A linear map `A: X -> Y` with `dim X = cols` and `dim Y = rows`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap<T> {
    Identity(usize),
    /// Row-major `rows x cols` matrix.
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<T>,
    },
}

impl<T: Scalar> LinearMap<T> {
    pub fn identity(n: usize) -> Self {
        LinearMap::Identity(n)
    }

    pub fn dense(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        Error::check_dim("dense matrix data", rows * cols, data.len())?;
        if rows == 0 || cols == 0 {
            return Err(Error::Construction(
                "linear map with a zero dimension".into(),
            ));
        }
        if !all_finite(&data) {
            return Err(Error::Construction(
                "linear map has non-finite entries".into(),
            ));
        }
        Ok(LinearMap::Dense { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Construction("ragged matrix rows".into()));
        }
        Self::dense(m, n, rows.concat())
    }

    /// Dimension of the domain `X`.
    pub fn domain_dim(&self) -> usize {
        match self {
            LinearMap::Identity(n) => *n,
            LinearMap::Dense { cols, .. } => *cols,
        }
    }

    /// Dimension of the codomain `Y`.
    pub fn codomain_dim(&self) -> usize {
        match self {
            LinearMap::Identity(n) => *n,
            LinearMap::Dense { rows, .. } => *rows,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, LinearMap::Identity(_))
    }

    /// `x -> A x`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        match self {
            LinearMap::Identity(_) => x.to_vec(),
            LinearMap::Dense { rows, cols, data } => {
                debug_assert_eq!(x.len(), *cols);
                (0..*rows)
                    .map(|i| dot(&data[i * cols..(i + 1) * cols], x))
                    .collect()
            }
        }
    }

    /// `u -> A* u`.
    pub fn adjoint(&self, u: &[T]) -> Vec<T> {
        match self {
            LinearMap::Identity(_) => u.to_vec(),
            LinearMap::Dense { rows, cols, data } => {
                debug_assert_eq!(u.len(), *rows);
                let mut out = vec![T::zero(); *cols];
                for (i, &ui) in u.iter().enumerate() {
                    for (o, &a) in out.iter_mut().zip(&data[i * cols..(i + 1) * cols]) {
                        *o += a * ui;
                    }
                }
                out
            }
        }
    }

    /// The adjoint as a map in its own right.
    pub fn transpose(&self) -> Self {
        match self {
            LinearMap::Identity(n) => LinearMap::Identity(*n),
            LinearMap::Dense { rows, cols, data } => {
                let mut t = vec![T::zero(); data.len()];
                for i in 0..*rows {
                    for j in 0..*cols {
                        t[j * rows + i] = data[i * cols + j];
                    }
                }
                LinearMap::Dense {
                    rows: *cols,
                    cols: *rows,
                    data: t,
                }
            }
        }
    }

    /// Row-major entries (materialises the identity).
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        let (m, n) = (self.codomain_dim(), self.domain_dim());
        (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| match self {
                        LinearMap::Identity(_) => {
                            if i == j {
                                T::one()
                            } else {
                                T::zero()
                            }
                        }
                        LinearMap::Dense { cols, data, .. } => data[i * cols + j],
                    })
                    .collect()
            })
            .collect()
    }
}
