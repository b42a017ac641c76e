//! Estimators of the mean parameter from a sample prefix.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::model::{rate_f, FamilySpec};
use crate::trajectory::Prefix;

/// A map from samples `x¹…xⁿ` to an estimate in M̄.
///
/// Implement this to put a custom estimator in front of the adversaries.
/// `prefix_len(n)` declares how much of the data the estimate at `n` may
/// depend on; observations past it must not change the result.
pub trait Estimator: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn estimate(&self, prefix: &Prefix<'_>) -> Result<f64>;

    fn prefix_len(&self, n: usize) -> usize {
        n
    }

    /// Rejects families the estimator is not defined for.
    fn check_family(&self, _family: &FamilySpec) -> Result<()> {
        Ok(())
    }
}

/// The sample mean of the sufficient statistic.
pub fn mle(prefix: &Prefix<'_>) -> Result<f64> {
    let n = prefix.len();
    if n == 0 {
        return Err(Error::EmptyPrefix("mle".into()));
    }
    Ok(prefix.sum() / n as f64)
}

#[inline]
fn shrunk_mean(prefix: &Prefix<'_>) -> Result<f64> {
    let n = prefix.len();
    if n == 0 {
        return Err(Error::EmptyPrefix("posterior_mean".into()));
    }
    Ok(prefix.sum() / (n as f64 + 1.0))
}

/// Posterior mean of μ under a standard normal prior in the Gaussian
/// location family: `n/(n+1) · mle`.
pub fn posterior_mean(family: &FamilySpec, prefix: &Prefix<'_>) -> Result<f64> {
    require_gaussian(family, "posterior_mean")?;
    shrunk_mean(prefix)
}

fn require_gaussian(family: &FamilySpec, what: &str) -> Result<()> {
    if family.is_gaussian_location() {
        Ok(())
    } else {
        Err(Error::UnsupportedFamily {
            what: what.into(),
            family: family.name(),
        })
    }
}

/// Largest power of two not exceeding `n` (`n ≥ 1`).
#[inline]
pub fn dyadic_len(n: usize) -> usize {
    debug_assert!(n > 0);
    1usize << (usize::BITS - 1 - n.leading_zeros())
}

/// `⌊log₂ n⌋`.
#[inline]
pub fn dyadic_block(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// `base` applied to the first `2^⌊log₂ n⌋` observations.
pub fn dyadic(base: &dyn Estimator, prefix: &Prefix<'_>) -> Result<f64> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix(format!("dyadic:{}", base.name())));
    }
    base.estimate(&prefix.head(dyadic_len(prefix.len())))
}

/// Weights `π(j) ∝ (j+1)^{−1−α}` over the blocks `j = 0..=⌊log₂ N⌋` of a
/// horizon `N`, normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicWeights {
    weights: Vec<f64>,
}

impl DyadicWeights {
    pub fn new(alpha: f64, horizon: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive, got {alpha}")));
        }
        if horizon == 0 {
            return Err(invalid("horizon must be positive"));
        }
        let blocks = dyadic_block(horizon) + 1;
        let raw: Vec<f64> = (0..blocks).map(|j| ((j + 1) as f64).powf(-1.0 - alpha)).collect();
        let z: f64 = raw.iter().sum();
        Ok(Self {
            weights: raw.into_iter().map(|w| w / z).collect(),
        })
    }

    /// π(j); zero beyond the horizon.
    pub fn weight(&self, j: usize) -> f64 {
        self.weights.get(j).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// π(j) normalized over the horizon `horizon`.
pub fn pi_weight(j: usize, alpha: f64, horizon: usize) -> Result<f64> {
    Ok(DyadicWeights::new(alpha, horizon)?.weight(j))
}

/// Estimators addressable from configs.
#[derive(Debug, Clone)]
pub enum EstimatorKind {
    /// `mle`
    Mle,
    /// `posterior_mean` (Gaussian location only)
    PosteriorMean,
    /// `dyadic:<base>`
    Dyadic(Box<EstimatorKind>),
    /// `offset:<c>:<base>`: `base + √(c·f(n))`, a deliberately non-MLE-like
    /// estimator.
    Offset { base: Box<EstimatorKind>, c: f64 },
    /// `constant:<x>`
    Constant(f64),
    /// `oracle`: returns the true mean of the replication. A cheating
    /// baseline with zero loss.
    Oracle,
    /// A user-supplied estimator.
    Custom(Arc<dyn Estimator>),
}

impl EstimatorKind {
    pub const BUILTIN_IDS: &'static str = "mle, posterior_mean, dyadic:<base>, offset:<c>:<base>, constant:<x>, oracle";

    pub fn by_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "estimator",
            id: id.to_string(),
            valid: Self::BUILTIN_IDS.into(),
        };
        match id {
            "mle" => return Ok(Self::Mle),
            "posterior_mean" => return Ok(Self::PosteriorMean),
            "oracle" => return Ok(Self::Oracle),
            _ => {}
        }
        if let Some(base) = id.strip_prefix("dyadic:") {
            return Ok(Self::Dyadic(Box::new(Self::by_id(base)?)));
        }
        if let Some(rest) = id.strip_prefix("offset:") {
            let (c, base) = rest.split_once(':').ok_or_else(unknown)?;
            let c: f64 = c.parse().map_err(|_| unknown())?;
            if !(c > 0.0) {
                return Err(invalid(format!("offset constant must be positive in `{id}`")));
            }
            return Ok(Self::Offset {
                base: Box::new(Self::by_id(base)?),
                c,
            });
        }
        if let Some(x) = id.strip_prefix("constant:") {
            let x: f64 = x.parse().map_err(|_| unknown())?;
            return Ok(Self::Constant(x));
        }
        Err(unknown())
    }

    pub fn custom(estimator: impl Estimator + 'static) -> Self {
        Self::Custom(Arc::new(estimator))
    }
}

impl Estimator for EstimatorKind {
    fn name(&self) -> String {
        match self {
            Self::Mle => "mle".into(),
            Self::PosteriorMean => "posterior_mean".into(),
            Self::Dyadic(b) => format!("dyadic:{}", b.name()),
            Self::Offset { base, c } => format!("offset:{c}:{}", base.name()),
            Self::Constant(x) => format!("constant:{x}"),
            Self::Oracle => "oracle".into(),
            Self::Custom(e) => e.name(),
        }
    }

    #[inline]
    fn estimate(&self, prefix: &Prefix<'_>) -> Result<f64> {
        match self {
            Self::Mle => mle(prefix),
            Self::PosteriorMean => shrunk_mean(prefix),
            Self::Dyadic(b) => dyadic(b.as_ref(), prefix),
            Self::Offset { base, c } => Ok(base.estimate(prefix)? + (c * rate_f(prefix.len() as u64)).sqrt()),
            Self::Constant(x) => Ok(*x),
            Self::Oracle => prefix
                .truth()
                .ok_or_else(|| invalid("oracle estimator used without a known true mean")),
            Self::Custom(e) => e.estimate(prefix),
        }
    }

    fn prefix_len(&self, n: usize) -> usize {
        match self {
            Self::Mle | Self::PosteriorMean => n,
            Self::Dyadic(b) => {
                if n == 0 {
                    0
                } else {
                    b.prefix_len(dyadic_len(n))
                }
            }
            Self::Offset { base, .. } => base.prefix_len(n),
            Self::Constant(_) | Self::Oracle => 0,
            Self::Custom(e) => e.prefix_len(n),
        }
    }

    fn check_family(&self, family: &FamilySpec) -> Result<()> {
        match self {
            Self::PosteriorMean => require_gaussian(family, "posterior_mean"),
            Self::Dyadic(b) | Self::Offset { base: b, .. } => b.check_family(family),
            Self::Custom(e) => e.check_family(family),
            _ => Ok(()),
        }
    }
}
