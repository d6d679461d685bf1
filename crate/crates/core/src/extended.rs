//! Extended reals `R ∪ {+inf}`.
//!
//! Convex function values live here. Arithmetic that would absorb an
//! infinity has to go through the explicit combinators below.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtReal<T> {
    /// Wraps a float, mapping `+inf` to [`ExtReal::PosInf`]. NaN and `-inf` are
    /// not valid convex function values and also map to `PosInf`.
    pub fn from_float(x: T) -> Self {
        if x.is_finite() {
            ExtReal::Finite(x)
        } else {
            ExtReal::PosInf
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// The finite value, or [`Error::InfiniteValue`] naming `what`.
    pub fn expect_finite(self, what: &str) -> Result<T> {
        self.finite()
            .ok_or_else(|| Error::InfiniteValue(what.to_string()))
    }

    /// `weight * self` with the convex-analysis convention `0 * inf = 0`.
    pub fn scale(self, weight: T) -> Self {
        if weight == T::zero() {
            return ExtReal::Finite(T::zero());
        }
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(weight * x),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// `self - other` for a finite `other`.
    pub fn minus(self, other: T) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x - other),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// Float view, with `+inf` for [`ExtReal::PosInf`].
    pub fn to_float(self) -> T {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => T::infinity(),
        }
    }
}

impl<T: Scalar> Add for ExtReal<T> {
    type Output = ExtReal<T>;

    fn add(self, rhs: Self) -> Self::Output {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl<T: Scalar> From<T> for ExtReal<T> {
    fn from(x: T) -> Self {
        ExtReal::from_float(x)
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}
