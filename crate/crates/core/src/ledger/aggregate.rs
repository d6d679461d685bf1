use crate::extended::ExtReal;
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregatePolicy {
    /// `Σ_i λ^k_i p_i`, updated as `p̂_{k+1} = (1 - α_k) p̂_k + α_k p_k`.
    #[default]
    Average,
    /// The iterate with the smallest objective value seen so far; ties keep the earliest.
    Best,
}

/// Running certificate built from a sequence of points: `û_k` for the
/// conditional subgradient method, `ŷ_k` for mirror descent.
#[derive(Debug, Clone)]
pub struct Aggregate<T> {
    policy: AggregatePolicy,
    point: Option<Vec<T>>,
    best_value: Option<ExtReal<T>>,
    best_index: Option<usize>,
    count: usize,
}

impl<T: Scalar> Aggregate<T> {
    pub fn new(policy: AggregatePolicy) -> Self {
        Aggregate {
            policy,
            point: None,
            best_value: None,
            best_index: None,
            count: 0,
        }
    }

    pub fn policy(&self) -> AggregatePolicy {
        self.policy
    }

    /// Adds iterate `p` taken with step `alpha`. `value` is the objective at
    /// `p` and only matters under [`AggregatePolicy::Best`].
    pub fn push(&mut self, p: &[T], alpha: T, value: ExtReal<T>) {
        match self.policy {
            AggregatePolicy::Average => {
                let next = match &self.point {
                    Some(prev) => linalg::lerp(prev, p, alpha),
                    None => linalg::scale(p, alpha),
                };
                self.point = Some(next);
            }
            AggregatePolicy::Best => {
                let better = match (self.best_value, value) {
                    (None, _) => true,
                    (Some(ExtReal::PosInf), ExtReal::Finite(_)) => true,
                    (Some(ExtReal::Finite(b)), ExtReal::Finite(v)) => v < b,
                    _ => false,
                };
                if better {
                    self.point = Some(p.to_vec());
                    self.best_value = Some(value);
                    self.best_index = Some(self.count);
                }
            }
        }
        self.count += 1;
    }

    pub fn point(&self) -> Option<&[T]> {
        self.point.as_deref()
    }

    /// Position (0-based, in push order) of the retained iterate under the best policy.
    pub fn best_index(&self) -> Option<usize> {
        self.best_index
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}
