use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Only the running sum `Σ_i λ^k_i` is kept.
    Streaming,
    /// Every row of the `λ` and `μ` triangles is stored.
    FullHistory,
}

/// The double sequences `λ^k_i`, `μ^k_i` driven by the step sizes:
///
/// ```text
/// λ^{k+1}_k = α_k,  μ^{k+1}_k = 1,
/// λ^{k+1}_i = (1 - α_k) λ^k_i,  μ^{k+1}_i = (1 - α_k) μ^k_i   (i < k).
/// ```
#[derive(Debug, Clone)]
pub struct WeightState<T> {
    mode: WeightMode,
    k: usize,
    first_alpha: Option<T>,
    lambda_sum: T,
    lambdas: Vec<Vec<T>>,
    mus: Vec<Vec<T>>,
}

impl<T: Scalar> WeightState<T> {
    pub fn new(mode: WeightMode) -> Self {
        WeightState {
            mode,
            k: 0,
            first_alpha: None,
            lambda_sum: T::zero(),
            lambdas: Vec::new(),
            mus: Vec::new(),
        }
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    /// Number of updates applied so far, i.e. the `k` of the current row.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Whether the first step was exactly `α_0 = 1`, the hypothesis of every gap identity.
    pub fn unit_first_step(&self) -> bool {
        self.first_alpha == Some(T::one())
    }

    pub fn lambda_sum(&self) -> T {
        self.lambda_sum
    }

    pub fn update(&mut self, alpha: T) -> Result<()> {
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::Range(format!("step size {alpha} not in [0, 1]")));
        }
        let keep = T::one() - alpha;
        if self.k == 0 {
            self.first_alpha = Some(alpha);
        }
        self.lambda_sum = keep * self.lambda_sum + alpha;
        if self.mode == WeightMode::FullHistory {
            let mut lam: Vec<T> = self
                .lambdas
                .last()
                .map(|r| r.iter().map(|&l| keep * l).collect())
                .unwrap_or_default();
            lam.push(alpha);
            let mut mu: Vec<T> = self
                .mus
                .last()
                .map(|r| r.iter().map(|&m| keep * m).collect())
                .unwrap_or_default();
            mu.push(T::one());
            self.lambdas.push(lam);
            self.mus.push(mu);
        }
        self.k += 1;
        Ok(())
    }

    /// `(λ^k_0, …, λ^k_{k-1})` for `1 <= k <= self.k()`; full-history mode only.
    pub fn lambda_row(&self, k: usize) -> Option<&[T]> {
        k.checked_sub(1)
            .and_then(|i| self.lambdas.get(i))
            .map(Vec::as_slice)
    }

    pub fn mu_row(&self, k: usize) -> Option<&[T]> {
        k.checked_sub(1)
            .and_then(|i| self.mus.get(i))
            .map(Vec::as_slice)
    }

    pub fn lambdas(&self) -> Option<&[T]> {
        self.lambda_row(self.k)
    }

    pub fn mus(&self) -> Option<&[T]> {
        self.mu_row(self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(alphas: &[f64]) -> WeightState<f64> {
        let mut w = WeightState::new(WeightMode::FullHistory);
        for &a in alphas {
            w.update(a).unwrap();
        }
        w
    }

    #[test]
    fn two_half_steps() {
        let w = run(&[1.0, 0.5]);
        assert_eq!(w.lambdas().unwrap(), &[0.5, 0.5]);
        assert_eq!(w.mus().unwrap(), &[0.5, 1.0]);
    }

    #[test]
    fn harmonic_schedule_rows() {
        let w = run(&[1.0, 2.0 / 3.0]);
        let l = w.lambdas().unwrap();
        assert!((l[0] - 1.0 / 3.0).abs() < 1e-16 && (l[1] - 2.0 / 3.0).abs() < 1e-16);
        let m = w.mus().unwrap();
        assert!((m[0] - 1.0 / 3.0).abs() < 1e-16 && m[1] == 1.0);
    }

    #[test]
    fn third_row_against_product_formula() {
        let alphas = [1.0, 2.0 / 3.0, 0.5];
        let w = run(&alphas);
        // λ^3_i = α_i Π_{j>i} (1 - α_j), computed independently.
        let expect_l = [1.0 / 6.0, 1.0 / 3.0, 0.5];
        let expect_m = [1.0 / 6.0, 0.5, 1.0];
        for i in 0..3 {
            let tail: f64 = alphas[i + 1..].iter().map(|a| 1.0 - a).product();
            assert!((alphas[i] * tail - expect_l[i]).abs() < 1e-15);
            assert!((w.lambdas().unwrap()[i] - expect_l[i]).abs() < 1e-15);
            assert!((w.mus().unwrap()[i] - expect_m[i]).abs() < 1e-15);
        }
        let s: f64 = w.lambdas().unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!((w.lambda_sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_step_rejected() {
        let mut w = WeightState::<f64>::new(WeightMode::Streaming);
        assert!(matches!(w.update(1.5), Err(Error::Range(_))));
        assert!(matches!(w.update(-0.1), Err(Error::Range(_))));
        assert!(matches!(w.update(f64::NAN), Err(Error::Range(_))));
        assert_eq!(w.k(), 0);
    }

    #[test]
    fn streaming_keeps_no_rows() {
        let mut w = WeightState::<f64>::new(WeightMode::Streaming);
        w.update(1.0).unwrap();
        w.update(0.3).unwrap();
        assert!(w.lambdas().is_none());
        assert!(w.unit_first_step());
        assert!((w.lambda_sum() - 1.0).abs() < 1e-16);
    }
}
