//! Step-size rules. Every rule emits `α_0 = 1`, the hypothesis under which
//! the gap recursions start.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule<T> {
    /// `α_k = 2/(k+2)`.
    FixedHarmonic,
    /// `α_k = γ/(k+γ)`.
    OpenLoop { gamma: T },
    /// `α_k = argmin_{α∈[0,1]} (1-α) gap_k + increment_k(α)`.
    ExactLineSearch { tol: T, max_iters: usize },
    /// `α_k = γ_k/(k+γ_k)` with `γ_k` found by bisection on a curvature probe.
    ApproxGamma { delta: T, tol: T, gamma_max: T },
}

impl<T: Scalar> StepRule<T> {
    pub fn exact_default() -> Self {
        StepRule::ExactLineSearch {
            tol: T::lit(1e-10),
            max_iters: 200,
        }
    }

    pub fn approx_default() -> Self {
        StepRule::ApproxGamma {
            delta: T::lit(0.1),
            tol: T::lit(1e-6),
            gamma_max: T::lit(2.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepRule::FixedHarmonic => "fixed_harmonic",
            StepRule::OpenLoop { .. } => "open_loop",
            StepRule::ExactLineSearch { .. } => "exact_ls",
            StepRule::ApproxGamma { .. } => "approx_gamma",
        }
    }

    /// True for schedules that depend on `k` alone.
    pub fn is_open_loop(&self) -> bool {
        matches!(self, StepRule::FixedHarmonic | StepRule::OpenLoop { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Range(msg));
        match *self {
            StepRule::FixedHarmonic => Ok(()),
            StepRule::OpenLoop { gamma } if !(gamma > T::zero()) || !gamma.is_finite() => {
                bad(format!("open-loop γ must be positive, got {gamma}"))
            }
            StepRule::OpenLoop { .. } => Ok(()),
            StepRule::ExactLineSearch { tol, max_iters } => {
                if !(tol > T::zero()) || max_iters == 0 {
                    bad(format!(
                        "line search needs tol > 0 and max_iters > 0, got {tol}, {max_iters}"
                    ))
                } else {
                    Ok(())
                }
            }
            StepRule::ApproxGamma {
                delta,
                tol,
                gamma_max,
            } => {
                if !(delta > T::zero() && delta < T::one()) {
                    bad(format!("δ must lie in (0, 1), got {delta}"))
                } else if !(tol >= T::zero()) {
                    bad(format!("ratio tolerance must be nonnegative, got {tol}"))
                } else if !(gamma_max >= T::one()) || !gamma_max.is_finite() {
                    bad(format!("γ_max must be at least 1, got {gamma_max}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Step size for iteration `k`. `segment` is only consulted by the
    /// adaptive rules and never at `k = 0`.
    pub fn select(&self, k: usize, segment: &dyn Segment<T>) -> Result<StepChoice<T>> {
        if k == 0 {
            return Ok(StepChoice::plain(T::one()));
        }
        match *self {
            StepRule::FixedHarmonic => Ok(StepChoice::plain(step_fixed_harmonic(k))),
            StepRule::OpenLoop { gamma } => Ok(StepChoice::plain(step_open_loop(k, gamma))),
            StepRule::ExactLineSearch { tol, max_iters } => linesearch(segment, tol, max_iters),
            StepRule::ApproxGamma {
                delta,
                tol,
                gamma_max,
            } => approx_gamma_select(k, segment, delta, tol, gamma_max),
        }
    }
}

/// Anything that can pick step sizes for the engine. [`StepRule`] is the
/// production implementation; tests substitute doubles.
pub trait StepPolicy<T: Scalar>: Send + Sync {
    fn select(&self, k: usize, segment: &dyn Segment<T>) -> Result<StepChoice<T>>;

    fn is_open_loop(&self) -> bool;

    fn name(&self) -> String;
}

impl<T: Scalar> StepPolicy<T> for StepRule<T> {
    fn select(&self, k: usize, segment: &dyn Segment<T>) -> Result<StepChoice<T>> {
        StepRule::select(self, k, segment)
    }

    fn is_open_loop(&self) -> bool {
        StepRule::is_open_loop(self)
    }

    fn name(&self) -> String {
        StepRule::name(self).to_string()
    }
}

/// `2/(k+2)`.
pub fn step_fixed_harmonic<T: Scalar>(k: usize) -> T {
    step_open_loop(k, T::lit(2.0))
}

/// `γ/(k+γ)`.
pub fn step_open_loop<T: Scalar>(k: usize, gamma: T) -> T {
    gamma / (T::from_count(k) + gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepChoice<T> {
    pub alpha: T,
    /// The `γ_k` behind an approximate-γ step.
    pub gamma: Option<T>,
    /// Set when the rule had to degrade (empty domain, fallback to exact search).
    pub warning: Option<String>,
}

impl<T> StepChoice<T> {
    pub fn plain(alpha: T) -> Self {
        StepChoice {
            alpha,
            gamma: None,
            warning: None,
        }
    }
}

/// One step of a gap recursion seen as a function of `α`:
/// `φ(α) = (1-α) gap + increment(α)`.
pub trait Segment<T: Scalar> {
    fn gap(&self) -> T;

    /// `Ok(None)` when the combination point at `α` leaves the domain.
    fn increment(&self, alpha: T) -> Result<Option<T>>;

    /// Derivative of the increment from a monotone subgradient selection,
    /// when the increment is a plain Bregman distance.
    fn increment_slope(&self, _alpha: T) -> Option<Result<Option<T>>> {
        None
    }

    fn phi(&self, alpha: T) -> Result<Option<T>> {
        Ok(self
            .increment(alpha)?
            .map(|d| (T::one() - alpha) * self.gap() + d)
            .filter(|v| v.is_finite()))
    }
}

/// Maps domain failures of a trial point to "not finite"; everything else propagates.
pub fn outside_domain<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::InfiniteValue(_)) | Err(Error::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Closed-form segment `φ(α) = (1-α) gap + c α^p`, used for testing and probing.
#[derive(Debug, Clone, Copy)]
pub struct PowerSegment<T> {
    pub gap: T,
    pub coeff: T,
    pub power: T,
}

impl<T: Scalar> Segment<T> for PowerSegment<T> {
    fn gap(&self) -> T {
        self.gap
    }

    fn increment(&self, alpha: T) -> Result<Option<T>> {
        Ok(Some(self.coeff * alpha.powf(self.power)))
    }

    fn increment_slope(&self, alpha: T) -> Option<Result<Option<T>>> {
        let d = if alpha == T::zero() {
            T::zero()
        } else {
            self.power * self.coeff * alpha.powf(self.power - T::one())
        };
        Some(Ok(Some(d)))
    }
}

fn shrink_to_domain<T: Scalar>(segment: &dyn Segment<T>) -> Result<Option<(T, T)>> {
    let mut hi = T::one();
    for _ in 0..64 {
        if let Some(v) = segment.phi(hi)? {
            return Ok(Some((hi, v)));
        }
        hi *= T::lit(0.5);
    }
    Ok(None)
}

/// Minimizes a convex `φ` on `[lo, hi]` by golden-section search; `φ`
/// returning `None` is treated as `+∞`. Returns `(α, φ(α))`.
pub fn golden_section<T: Scalar>(
    mut phi: impl FnMut(T) -> Result<Option<T>>,
    lo: T,
    hi: T,
    tol: T,
    max_iters: usize,
) -> Result<(T, Option<T>)> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut val = |t: T| -> Result<T> { Ok(phi(t)?.unwrap_or(T::infinity())) };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (val(c)?, val(d)?);
    for _ in 0..max_iters {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = val(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = val(d)?;
        }
    }
    let t = (a + b) / T::lit(2.0);
    let ft = val(t)?;
    let best = [(t, ft), (c, fc), (d, fd)]
        .into_iter()
        .fold((t, ft), |acc, cand| if cand.1 < acc.1 { cand } else { acc });
    Ok((best.0, best.1.is_finite().then_some(best.1)))
}

/// Finds a sign change of a nondecreasing `slope` on `[lo, hi]` by bisection.
/// `None` from `slope` is treated as `+∞` (the point lies past the domain).
pub fn bisect_slope<T: Scalar>(
    mut slope: impl FnMut(T) -> Result<Option<T>>,
    lo: T,
    hi: T,
    tol: T,
    max_iters: usize,
) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    if slope(b)?.is_some_and(|s| s <= T::zero()) {
        return Ok(b);
    }
    for _ in 0..max_iters {
        if b - a <= tol {
            break;
        }
        let m = (a + b) / T::lit(2.0);
        match slope(m)? {
            Some(s) if s < T::zero() => a = m,
            Some(s) if s == T::zero() => return Ok(m),
            _ => b = m,
        }
    }
    Ok((a + b) / T::lit(2.0))
}

/// Exact line search on `φ`. Bisection on the derivative when the segment
/// exposes one (golden section alone stalls near `sqrt(eps)` because `φ` is
/// flat at its minimum), golden section otherwise. The result is never worse
/// than either endpoint.
pub fn linesearch<T: Scalar>(
    segment: &dyn Segment<T>,
    tol: T,
    max_iters: usize,
) -> Result<StepChoice<T>> {
    let phi0 = segment.phi(T::zero())?.ok_or_else(|| {
        Error::LineSearch("φ(0) is not finite; the current iterate is infeasible".into())
    })?;
    let Some((hi, phi_hi)) = shrink_to_domain(segment)? else {
        return Ok(StepChoice {
            alpha: T::zero(),
            gamma: None,
            warning: Some("φ is not finite on (0, 1]; taking α = 0".into()),
        });
    };
    let interior = if segment.increment_slope(T::zero()).is_some() {
        let gap = segment.gap();
        let t = bisect_slope(
            |a| match segment.increment_slope(a) {
                Some(r) => Ok(r?.map(|d| d - gap)),
                None => Ok(None),
            },
            T::zero(),
            hi,
            tol,
            max_iters,
        )?;
        (t, segment.phi(t)?)
    } else {
        golden_section(|a| segment.phi(a), T::zero(), hi, tol, max_iters)?
    };
    let mut best = (T::zero(), phi0);
    for (a, v) in [(hi, Some(phi_hi)), interior] {
        if let Some(v) = v {
            if v < best.1 || (v == best.1 && a > best.0) {
                best = (a, v);
            }
        }
    }
    Ok(StepChoice::plain(best.0))
}

/// `γ_k` by bisection on `[1, γ_max]` to resolution `δ`, then `α = γ_k/(k+γ_k)`.
///
/// A candidate `γ'` is accepted when `r(α) = increment(α)/α^{γ'}` does not
/// grow (beyond a factor `1 + tol`) as `α` shrinks through the probes
/// `a, a/2, a/4` with `a = γ_max/(k+γ_max)`. If even `γ' = 1` is rejected or
/// a probe leaves the domain, the exact line search decides.
pub fn approx_gamma_select<T: Scalar>(
    k: usize,
    segment: &dyn Segment<T>,
    delta: T,
    tol: T,
    gamma_max: T,
) -> Result<StepChoice<T>> {
    let fallback = |why: &str| -> Result<StepChoice<T>> {
        let mut c = linesearch(segment, T::lit(1e-10), 200)?;
        c.warning = Some(format!("approximate γ fell back to exact search: {why}"));
        Ok(c)
    };
    let a0 = step_open_loop::<T>(k, gamma_max);
    let probes = [a0, a0 / T::lit(2.0), a0 / T::lit(4.0)];
    let mut ds = [T::zero(); 3];
    for (d, &a) in ds.iter_mut().zip(&probes) {
        match segment.increment(a)? {
            Some(v) if v.is_finite() => *d = v.max(T::zero()),
            _ => return fallback("probe outside the domain"),
        }
    }
    let holds = |g: T| {
        let r: Vec<T> = ds
            .iter()
            .zip(&probes)
            .map(|(&d, &a)| d / a.powf(g))
            .collect();
        r.windows(2).all(|w| w[1] <= w[0] * (T::one() + tol))
    };
    let gamma = if holds(gamma_max) {
        gamma_max
    } else if !holds(T::one()) {
        return fallback("no γ in [1, γ_max] passes the probe");
    } else {
        let (mut lo, mut hi) = (T::one(), gamma_max);
        while hi - lo > delta {
            let mid = (lo + hi) / T::lit(2.0);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(StepChoice {
        alpha: step_open_loop(k, gamma),
        gamma: Some(gamma),
        warning: None,
    })
}
