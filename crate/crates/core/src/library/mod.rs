//! Ready-made problems with closed-form conjugates.
//!
//! Indicator regularizers give the classical conditional-gradient setting;
//! the entropy regularizer gives the mirror-descent geometry.

mod entropy;
mod holder;
mod indicator;
mod quadratic;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

pub use entropy::{log_sum_exp, negative_entropy, softmax, LogSumExpF, NegEntropyH};
pub use holder::HolderPowerF;
pub use indicator::{IndicatorH, SetKind};
pub use quadratic::QuadraticF;

use crate::error::Result;
use crate::linalg::LinearMap;
use crate::oracle::{Objective, Problem};
use crate::scalar::Scalar;

/// `½xᵀQx + bᵀx` over the simplex in `R^n`, `A = I`.
pub fn make_quadratic_simplex<T: Scalar>(q: &[Vec<T>], b: Vec<T>, n: usize) -> Result<Problem<T>> {
    crate::error::Error::check_dim("quadratic-simplex b", n, b.len())?;
    let f = QuadraticF::new(q, b)?;
    Problem::new(
        Arc::new(f),
        Arc::new(IndicatorH::simplex(n)),
        LinearMap::identity(n),
    )
}

/// `½yᵀQy + bᵀy` composed with `map`, over an arbitrary library set.
pub fn make_quadratic_set<T: Scalar>(
    f: QuadraticF<T>,
    set: SetKind<T>,
    map: LinearMap<T>,
) -> Result<Problem<T>> {
    Problem::new(Arc::new(f), Arc::new(IndicatorH::new(set)?), map)
}

/// Negative entropy on the simplex in `R^n` as `h` (so `h* = lse`), composed
/// with a caller-chosen `f` on the codomain of `map`.
pub fn make_entropy_lse<T: Scalar>(
    n: usize,
    map: LinearMap<T>,
    f: Arc<dyn Objective<T>>,
) -> Result<Problem<T>> {
    Problem::new(f, Arc::new(NegEntropyH::new(n)?), map)
}

/// `(1/p) Σ|x_i|^p` over the simplex, `A = I`.
pub fn make_holder_power_simplex<T: Scalar>(p: T, n: usize) -> Result<Problem<T>> {
    make_holder_power_set(HolderPowerF::new(p, n)?, SetKind::Simplex(n))
}

pub fn make_holder_power_set<T: Scalar>(f: HolderPowerF<T>, set: SetKind<T>) -> Result<Problem<T>> {
    let n = f.dim();
    Problem::new(
        Arc::new(f),
        Arc::new(IndicatorH::new(set)?),
        LinearMap::identity(n),
    )
}

/// `rows x cols` matrix with i.i.d. `N(0, 1/rows)` entries from a seeded stream.
pub fn random_gaussian_map<T: Scalar>(rows: usize, cols: usize, seed: u64) -> Result<LinearMap<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (rows as f64).sqrt().recip();
    let data = (0..rows * cols)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            T::lit(g * scale)
        })
        .collect();
    LinearMap::dense(rows, cols, data)
}

/// Uniform point of the simplex (normalised exponentials).
pub fn sample_simplex<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| T::lit(x / s)).collect()
}

/// Standard normal vector.
pub fn sample_gaussian<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            T::lit(g)
        })
        .collect()
}
