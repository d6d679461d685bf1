//! Empirical curvature probes and convergence-rate fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::TraceRecord;
use crate::error::{Error, Result};
use crate::library::sample_gaussian;
use crate::linalg;
use crate::oracle::Problem;
use crate::scalar::Scalar;

/// Lower estimate of the relative `γ`-curvature constant:
/// `C_hat = max γ D_f(A(x + α(s - x)), A x) / α^γ` over probed triples with
/// `s = ∂h*(v)`. It is a sup over samples, never a certified constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureEstimate<T> {
    pub gamma: T,
    pub c_hat: T,
    /// Number of `(x, v, α)` triples that produced a finite ratio.
    pub samples: usize,
    /// Triples skipped because the Bregman term was infinite or undefined.
    pub skipped: usize,
    /// `(x, v, α)` attaining `c_hat`.
    pub witness: Option<(Vec<T>, Vec<T>, T)>,
}

/// `count` points log-spaced on `[10^lo_exp, 1]`.
pub fn log_alpha_grid<T: Scalar>(count: usize, lo_exp: f64) -> Vec<T> {
    if count == 1 {
        return vec![T::one()];
    }
    (0..count)
        .map(|j| {
            let t = j as f64 / (count - 1) as f64;
            T::lit(10f64.powf(lo_exp * (1.0 - t)))
        })
        .collect()
}

/// The default probe: 64 log-spaced step sizes down to `1e-4`.
pub fn default_alpha_grid<T: Scalar>() -> Vec<T> {
    log_alpha_grid(64, -4.0)
}

/// Probes `n_samples` points `x` from `sample_x` against covectors `v`
/// drawn from a standard normal scaled by `0.1`, `1` and `10`. The random
/// stream is fixed by `seed`, so a larger `n_samples` extends the sample set.
pub fn probe_curvature<T: Scalar>(
    problem: &Problem<T>,
    gamma: T,
    n_samples: usize,
    alpha_grid: &[T],
    seed: u64,
    mut sample_x: impl FnMut(&mut ChaCha8Rng) -> Vec<T>,
) -> Result<CurvatureEstimate<T>> {
    if !(gamma > T::one()) {
        return Err(Error::Range(format!(
            "curvature exponent must exceed 1, got {gamma}"
        )));
    }
    if alpha_grid
        .iter()
        .any(|&a| !(a > T::zero() && a <= T::one()))
    {
        return Err(Error::Range("step grid must lie in (0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = problem.map();
    let mut est = CurvatureEstimate {
        gamma,
        c_hat: T::zero(),
        samples: 0,
        skipped: 0,
        witness: None,
    };
    for _ in 0..n_samples {
        let x = sample_x(&mut rng);
        let dir: Vec<T> = sample_gaussian(problem.n(), &mut rng);
        Error::check_dim("curvature probe sample", problem.n(), x.len())?;
        let ax = map.apply(&x);
        for magnitude in [0.1, 1.0, 10.0] {
            let v = linalg::scale(&dir, T::lit(magnitude));
            let s = match problem.h_conjugate_gradient(&v) {
                Ok(s) => s,
                Err(_) => {
                    est.skipped += alpha_grid.len();
                    continue;
                }
            };
            for &alpha in alpha_grid {
                let y = map.apply(&linalg::lerp(&x, &s, alpha));
                match problem.bregman_f(&y, &ax) {
                    Ok(d) if d.is_finite() => {
                        est.samples += 1;
                        let ratio = gamma * d / alpha.powf(gamma);
                        if ratio > est.c_hat || est.witness.is_none() {
                            est.c_hat = est.c_hat.max(ratio);
                            est.witness = Some((x.clone(), v.clone(), alpha));
                        }
                    }
                    _ => est.skipped += 1,
                }
            }
        }
    }
    Ok(est)
}

/// Least-squares fit of `ln gap = intercept + exponent · ln k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    pub exponent: T,
    pub intercept: T,
    pub r_squared: T,
    pub points: usize,
}

/// Fits the points with `k ≥ k_min` and a positive finite gap; needs at least 10.
pub fn fit_rate<T: Scalar>(ks: &[usize], gaps: &[T], k_min: usize) -> Result<RateFit<T>> {
    if ks.len() != gaps.len() {
        return Err(Error::Dimension {
            context: "rate fit",
            expected: ks.len(),
            got: gaps.len(),
        });
    }
    let pts: Vec<(T, T)> = ks
        .iter()
        .zip(gaps)
        .filter(|(&k, &g)| k >= k_min.max(1) && g > T::zero() && g.is_finite())
        .map(|(&k, &g)| (T::from_count(k).ln(), g.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!(
            "only {} usable points with k >= {k_min}; need at least 10",
            pts.len()
        )));
    }
    let n = T::from_count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(RateFit {
        exponent,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// Which trace column a rate fit reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateColumn {
    TrueGap,
    GapBound,
}

pub fn fit_trace<T: Scalar>(
    trace: &[TraceRecord<T>],
    column: RateColumn,
    k_min: usize,
) -> Result<RateFit<T>> {
    let ks: Vec<usize> = trace.iter().map(|r| r.k).collect();
    let gaps: Vec<T> = trace
        .iter()
        .map(|r| match column {
            RateColumn::TrueGap => r.true_gap,
            RateColumn::GapBound => r.gap_bound,
        })
        .collect();
    fit_rate(&ks, &gaps, k_min)
}
