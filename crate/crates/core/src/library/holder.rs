use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::oracle::Objective;
use crate::scalar::Scalar;

/// `f(y) = (1/p) Σ |y_i - c_i|^p` for `p ∈ (1, 2]`.
///
/// The gradient is Hölder continuous of order `p - 1`, which makes this the
/// library's test case for curvature exponents other than 2.
#[derive(Debug, Clone)]
pub struct HolderPowerF<T> {
    p: T,
    center: Vec<T>,
}

impl<T: Scalar> HolderPowerF<T> {
    pub fn new(p: T, n: usize) -> Result<Self> {
        Self::centered(p, vec![T::zero(); n])
    }

    pub fn centered(p: T, center: Vec<T>) -> Result<Self> {
        if !(p > T::one() && p <= T::lit(2.0)) {
            return Err(Error::Construction(format!(
                "Hölder exponent {p} not in (1, 2]"
            )));
        }
        if center.is_empty() {
            return Err(Error::Construction("Hölder power of dimension 0".into()));
        }
        Ok(HolderPowerF { p, center })
    }

    pub fn exponent(&self) -> T {
        self.p
    }

    fn dual_exponent(&self) -> T {
        self.p / (self.p - T::one())
    }
}

impl<T: Scalar> Objective<T> for HolderPowerF<T> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, y: &[T]) -> ExtReal<T> {
        let s: T = y
            .iter()
            .zip(&self.center)
            .map(|(&yi, &ci)| (yi - ci).abs().powf(self.p))
            .sum();
        ExtReal::from_float(s / self.p)
    }

    fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        Ok(y.iter()
            .zip(&self.center)
            .map(|(&yi, &ci)| {
                let t = yi - ci;
                if t == T::zero() {
                    T::zero()
                } else {
                    t.signum() * t.abs().powf(self.p - T::one())
                }
            })
            .collect())
    }

    fn conjugate(&self, u: &[T]) -> ExtReal<T> {
        let q = self.dual_exponent();
        let s: T = u
            .iter()
            .zip(&self.center)
            .map(|(&ui, &ci)| ui.abs().powf(q) / q + ui * ci)
            .sum();
        ExtReal::from_float(s)
    }

    fn describe(&self) -> String {
        format!("holder(p={}, n={})", self.p, self.center.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Objective;

    #[test]
    fn gradient_is_signed_power() {
        let f = HolderPowerF::new(1.5_f64, 1).unwrap();
        assert_eq!(f.gradient(&[-1.0]).unwrap(), vec![-1.0]);
        assert_eq!(f.gradient(&[0.0]).unwrap(), vec![0.0]);
        assert!((f.gradient(&[4.0]).unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn p_two_is_half_squared_norm() {
        let f = HolderPowerF::new(2.0_f64, 2).unwrap();
        assert_eq!(f.value(&[1.0, 2.0]), ExtReal::Finite(2.5));
        assert_eq!(f.conjugate(&[1.0, 2.0]), ExtReal::Finite(2.5));
    }

    #[test]
    fn exponent_range_enforced() {
        assert!(HolderPowerF::new(1.0_f64, 2).is_err());
        assert!(HolderPowerF::new(2.5_f64, 2).is_err());
        assert!(HolderPowerF::new(1.0001_f64, 2).is_ok());
    }
}
