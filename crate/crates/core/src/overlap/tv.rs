use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(p) == 1` accepted by [`tv_loss`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Categorical distribution over case ids; absent ids have mass 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(BTreeMap<usize, f64>);

impl Distribution {
    pub fn new(masses: BTreeMap<usize, f64>) -> Self {
        Distribution(masses)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Distribution(pairs.into_iter().collect())
    }

    pub fn get(&self, case: usize) -> f64 {
        self.0.get(&case).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    fn check(&self) -> Result<()> {
        if self.0.values().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Invalid("distribution has a negative or non-finite mass".into()));
        }
        let total = self.total();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Unnormalized(total));
        }
        Ok(())
    }
}

/// Total-variation distance `1/2 * sum_c |p(c) - q(c)|` over the union of
/// case ids.
///
/// Returns exactly 1 when the supports are disjoint and exactly 0 when the
/// distributions are equal; otherwise the sum is clamped into `[0, 1]`.
pub fn tv_loss(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check()?;
    q.check()?;
    let mut keys: Vec<usize> = p.0.keys().chain(q.0.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();

    let mut diff = 0.0;
    let mut shared = false;
    for k in keys {
        let (a, b) = (p.get(k), q.get(k));
        if a > 0.0 && b > 0.0 {
            shared = true;
        }
        diff += (a - b).abs();
    }
    if !shared {
        return Ok(1.0);
    }
    Ok((0.5 * diff).clamp(0.0, 1.0))
}
