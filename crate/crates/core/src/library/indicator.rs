use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg;
use crate::oracle::Regularizer;
use crate::scalar::Scalar;

/// Compact convex sets with a linear oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum SetKind<T> {
    /// Probability simplex in `R^n`.
    Simplex(usize),
    /// `{x : lower <= x <= upper}`.
    Box { lower: Vec<T>, upper: Vec<T> },
    /// `{x : ‖x‖₁ <= radius}` in `R^n`.
    L1Ball { n: usize, radius: T },
}

/// `h = δ_Q`: `h*` is the support function of `Q`, `∂h*` its linear oracle.
///
/// Oracle tie-breaks are deterministic. Simplex: lowest index among maximal
/// entries. Box: the lower bound on zero entries. ℓ1 ball: largest `|c_i|`,
/// lowest index, vertex `radius·sign(c_i)·e_i` with `sign(0) = +1`.
#[derive(Debug, Clone)]
pub struct IndicatorH<T> {
    set: SetKind<T>,
}

impl<T: Scalar> IndicatorH<T> {
    pub fn new(set: SetKind<T>) -> Result<Self> {
        match &set {
            SetKind::Simplex(n) if *n == 0 => {
                return Err(Error::Construction("simplex of dimension 0".into()))
            }
            SetKind::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(Error::Construction(
                        "box bounds have mismatched lengths".into(),
                    ));
                }
                if !linalg::all_finite(lower) || !linalg::all_finite(upper) {
                    return Err(Error::Construction("box bounds must be finite".into()));
                }
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(Error::Construction("box has lower > upper".into()));
                }
            }
            SetKind::L1Ball { n, radius }
                if *n == 0 || !(*radius > T::zero()) || !radius.is_finite() =>
            {
                return Err(Error::Construction(
                    "l1 ball needs n > 0 and radius > 0".into(),
                ));
            }
            _ => {}
        }
        Ok(IndicatorH { set })
    }

    pub fn simplex(n: usize) -> Self {
        Self::new(SetKind::Simplex(n)).expect("valid simplex")
    }

    pub fn set(&self) -> &SetKind<T> {
        &self.set
    }

    /// `argmax_{x in Q} <c, x>`.
    pub fn lmo(&self, c: &[T]) -> Vec<T> {
        match &self.set {
            SetKind::Simplex(n) => linalg::unit(*n, linalg::argmax(c)),
            SetKind::Box { lower, upper } => c
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&ci, (&l, &u))| if ci > T::zero() { u } else { l })
                .collect(),
            SetKind::L1Ball { n, radius } => {
                let abs: Vec<T> = c.iter().map(|x| x.abs()).collect();
                let j = linalg::argmax(&abs);
                let mut v = vec![T::zero(); *n];
                v[j] = if c[j] < T::zero() { -*radius } else { *radius };
                v
            }
        }
    }

    /// Vertices of the set (for enumeration oracles; the box has `2^n`).
    pub fn vertices(&self) -> Vec<Vec<T>> {
        match &self.set {
            SetKind::Simplex(n) => (0..*n).map(|i| linalg::unit(*n, i)).collect(),
            SetKind::Box { lower, upper } => {
                let n = lower.len();
                (0..1usize << n)
                    .map(|mask| {
                        (0..n)
                            .map(|i| {
                                if mask >> i & 1 == 1 {
                                    upper[i]
                                } else {
                                    lower[i]
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
            SetKind::L1Ball { n, radius } => (0..*n)
                .flat_map(|i| {
                    let e = linalg::unit(*n, i);
                    [linalg::scale(&e, *radius), linalg::scale(&e, -*radius)]
                })
                .collect(),
        }
    }

    /// Membership up to the rounding slack of convex combinations.
    pub fn contains(&self, x: &[T]) -> bool {
        let tol = T::membership_tol();
        match &self.set {
            SetKind::Simplex(n) => {
                let sum: T = x.iter().copied().sum();
                x.iter().all(|&xi| xi >= -tol) && (sum - T::one()).abs() <= tol * T::from_count(*n)
            }
            SetKind::Box { lower, upper } => {
                x.iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(&xi, (&l, &u))| {
                        xi >= l - tol * (T::one() + l.abs()) && xi <= u + tol * (T::one() + u.abs())
                    })
            }
            SetKind::L1Ball { radius, .. } => {
                let s: T = x.iter().map(|v| v.abs()).sum();
                s <= *radius * (T::one() + tol)
            }
        }
    }

    fn dim_of(&self) -> usize {
        match &self.set {
            SetKind::Simplex(n) => *n,
            SetKind::Box { lower, .. } => lower.len(),
            SetKind::L1Ball { n, .. } => *n,
        }
    }
}

impl<T: Scalar> Regularizer<T> for IndicatorH<T> {
    fn dim(&self) -> usize {
        self.dim_of()
    }

    fn value(&self, x: &[T]) -> ExtReal<T> {
        if self.contains(x) {
            ExtReal::Finite(T::zero())
        } else {
            ExtReal::PosInf
        }
    }

    fn conjugate(&self, c: &[T]) -> ExtReal<T> {
        ExtReal::from_float(linalg::dot(c, &self.lmo(c)))
    }

    fn conjugate_gradient(&self, c: &[T]) -> Result<Vec<T>> {
        Ok(self.lmo(c))
    }

    fn describe(&self) -> String {
        match &self.set {
            SetKind::Simplex(n) => format!("simplex(n={n})"),
            SetKind::Box { lower, .. } => format!("box(n={})", lower.len()),
            SetKind::L1Ball { n, radius } => format!("l1-ball(n={n}, r={radius})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sets() -> Vec<IndicatorH<f64>> {
        vec![
            IndicatorH::simplex(4),
            IndicatorH::new(SetKind::Box {
                lower: vec![-1.0, 0.0, -2.0, 0.5],
                upper: vec![1.0, 3.0, -1.0, 0.5],
            })
            .unwrap(),
            IndicatorH::new(SetKind::L1Ball { n: 4, radius: 2.0 }).unwrap(),
        ]
    }

    #[test]
    fn simplex_lmo_picks_largest_lowest_index() {
        let h = IndicatorH::<f64>::simplex(2);
        assert_eq!(h.lmo(&[-1.0, 0.0]), vec![0.0, 1.0]);
        assert_eq!(h.lmo(&[0.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn l1_lmo_tie_break() {
        let h = IndicatorH::new(SetKind::L1Ball { n: 3, radius: 1.5 }).unwrap();
        assert_eq!(h.lmo(&[1.0, -2.0, 2.0]), vec![0.0, -1.5, 0.0]);
        assert_eq!(h.lmo(&[0.0, 0.0, 0.0]), vec![1.5, 0.0, 0.0]);
    }

    #[test]
    fn box_lmo_and_support() {
        let h = IndicatorH::new(SetKind::Box {
            lower: vec![-1.0, 0.0],
            upper: vec![2.0, 1.0],
        })
        .unwrap();
        assert_eq!(h.lmo(&[3.0, -1.0]), vec![2.0, 0.0]);
        assert_eq!(h.conjugate(&[3.0, -1.0]), ExtReal::Finite(6.0));
        assert_eq!(h.value(&[2.5, 0.0]), ExtReal::PosInf);
    }

    #[test]
    fn rejects_degenerate_sets() {
        assert!(IndicatorH::<f64>::new(SetKind::Simplex(0)).is_err());
        assert!(IndicatorH::new(SetKind::L1Ball { n: 2, radius: 0.0 }).is_err());
        assert!(IndicatorH::new(SetKind::Box {
            lower: vec![1.0],
            upper: vec![0.0]
        })
        .is_err());
    }

    proptest! {
        #[test]
        fn lmo_matches_vertex_enumeration(c in prop::collection::vec(-10.0f64..10.0, 4)) {
            for h in sets() {
                let s = h.lmo(&c);
                prop_assert_eq!(h.value(&s), ExtReal::Finite(0.0));
                let best = linalg::dot(&c, &s);
                for v in h.vertices() {
                    prop_assert!(best >= linalg::dot(&c, &v) - 1e-12);
                }
                prop_assert_eq!(h.conjugate(&c), ExtReal::Finite(best));
            }
        }
    }
}
