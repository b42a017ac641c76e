//! Stopping rules for the weak adversary.
//!
//! A rule looks at the data observed so far (and, for some rules, the true
//! mean) and decides whether Nature stops now. "Almost surely finite" is
//! realized by a hard cap: every rule stops at its cap at the latest, and
//! whether a stop was forced by the cap is reported with the outcome.
//!
//! The event triggers are checked on `n0 < n < cap`. Reaching the cap counts
//! as a cap hit even if the trigger also holds there.

use std::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::estimators::{posterior_mean, Estimator, EstimatorKind};
use crate::model::{rate_f, FamilySpec};
use crate::trajectory::{Prefix, Trajectory};

/// Burn-in used when a rule string omits it; `ln ln n > 1` for `n > 27`.
pub const DEFAULT_N0: usize = 27;
/// Cap used when a rule string omits it.
pub const DEFAULT_NMAX: usize = 100_000;

#[derive(Debug, Clone)]
pub enum StoppingRule {
    /// Always stops at `n`.
    Fixed { n: usize },
    /// First `n > n0` with `(μ − μ̃ₙ)² ≥ c·f(n)`, where `μ̃` is the posterior
    /// mean; otherwise `nmax`. Needs the true mean.
    Lil { c: f64, n0: usize, nmax: usize },
    /// First `n > n0` with `(μ̃ₙ − μ̂ₙ)² ≥ (c/2)·f(n)`; otherwise `nmax`.
    Gap {
        estimator: EstimatorKind,
        c: f64,
        n0: usize,
        nmax: usize,
    },
    /// First `n ∈ (n0, n1)` where both the `Lil` and the `Gap` events hold;
    /// otherwise `n1`. The estimator is normally bound by the experiment
    /// through [`StoppingRule::bind_estimator`].
    Capped {
        estimator: Option<EstimatorKind>,
        c: f64,
        n0: usize,
        n1: usize,
    },
}

/// Where a rule stopped a trajectory. `Fixed` stops always count as
/// triggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopOutcome {
    pub tau: usize,
    /// `false` when the stop was forced by the cap.
    pub triggered: bool,
}

impl StoppingRule {
    pub fn fixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("fixed stopping time must be at least 1"));
        }
        Ok(Self::Fixed { n })
    }

    pub fn lil(c: f64, n0: usize, nmax: usize) -> Result<Self> {
        check_c(c)?;
        check_window(n0, nmax)?;
        Ok(Self::Lil { c, n0, nmax })
    }

    pub fn gap(estimator: EstimatorKind, c: f64, n0: usize, nmax: usize) -> Result<Self> {
        check_c(c)?;
        check_window(n0, nmax)?;
        Ok(Self::Gap { estimator, c, n0, nmax })
    }

    pub fn capped(estimator: Option<EstimatorKind>, c: f64, n0: usize, n1: usize) -> Result<Self> {
        check_c(c)?;
        check_window(n0, n1)?;
        Ok(Self::Capped { estimator, c, n0, n1 })
    }

    /// Parses `fixed:N`, `lil:c[,n0[,nmax]]`, `gap:est,c[,n0[,nmax]]` or
    /// `capped:c,n0,n1`.
    pub fn by_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "stopping rule",
            id: id.to_string(),
            valid: "fixed:N, lil:c,n0,nmax, gap:estimator,c,n0,nmax, capped:c,n0,n1".into(),
        };
        let (kind, args) = id.split_once(':').ok_or_else(unknown)?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let num = |i: usize, default: Option<usize>| -> Result<usize> {
            match parts.get(i) {
                Some(p) => p
                    .parse::<f64>()
                    .ok()
                    .filter(|v| *v >= 0.0 && v.fract() == 0.0)
                    .map(|v| v as usize)
                    .ok_or_else(unknown),
                None => default.ok_or_else(unknown),
            }
        };
        let real = |i: usize| -> Result<f64> { parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(unknown) };
        match kind {
            "fixed" if parts.len() == 1 => Self::fixed(num(0, None)?),
            "lil" if parts.len() <= 3 => Self::lil(real(0)?, num(1, Some(DEFAULT_N0))?, num(2, Some(DEFAULT_NMAX))?),
            "gap" if (2..=4).contains(&parts.len()) => Self::gap(
                EstimatorKind::by_id(parts[0])?,
                real(1)?,
                num(2, Some(DEFAULT_N0))?,
                num(3, Some(DEFAULT_NMAX))?,
            ),
            "capped" if parts.len() == 3 => Self::capped(None, real(0)?, num(1, None)?, num(2, None)?),
            _ => Err(unknown()),
        }
    }

    /// Supplies the experiment's estimator to a `Capped` rule that has none.
    pub fn bind_estimator(&self, estimator: &EstimatorKind) -> Self {
        match self {
            Self::Capped {
                estimator: None,
                c,
                n0,
                n1,
            } => Self::Capped {
                estimator: Some(estimator.clone()),
                c: *c,
                n0: *n0,
                n1: *n1,
            },
            other => other.clone(),
        }
    }

    pub fn needs_true_mu(&self) -> bool {
        matches!(self, Self::Lil { .. } | Self::Capped { .. })
    }

    /// The latest possible stopping time.
    pub fn cap(&self) -> usize {
        match self {
            Self::Fixed { n } => *n,
            Self::Lil { nmax, .. } | Self::Gap { nmax, .. } => *nmax,
            Self::Capped { n1, .. } => *n1,
        }
    }

    fn burn_in(&self) -> usize {
        match self {
            Self::Fixed { n } => *n,
            Self::Lil { n0, .. } | Self::Gap { n0, .. } | Self::Capped { n0, .. } => *n0,
        }
    }

    /// Rejects families the rule cannot run on.
    pub fn check_family(&self, family: &FamilySpec) -> Result<()> {
        if matches!(self, Self::Fixed { .. }) {
            return Ok(());
        }
        if !family.is_gaussian_location() {
            return Err(Error::UnsupportedFamily {
                what: format!("stopping rule {self}"),
                family: family.name(),
            });
        }
        match self {
            Self::Gap { estimator, .. }
            | Self::Capped {
                estimator: Some(estimator),
                ..
            } => estimator.check_family(family),
            _ => Ok(()),
        }
    }

    /// The trigger event at `n = prefix.len()`, ignoring burn-in and cap.
    pub fn event(&self, family: &FamilySpec, prefix: &Prefix<'_>, mu: Option<f64>) -> Result<bool> {
        let n = prefix.len();
        match self {
            Self::Fixed { n: stop } => Ok(n >= *stop),
            Self::Lil { c, .. } => lil_event(family, prefix, self.true_mu(mu)?, *c),
            Self::Gap { estimator, c, .. } => gap_event(family, prefix, estimator, *c),
            Self::Capped { estimator, c, .. } => {
                let est = estimator
                    .as_ref()
                    .ok_or_else(|| invalid("capped rule has no estimator bound"))?;
                Ok(lil_event(family, prefix, self.true_mu(mu)?, *c)? && gap_event(family, prefix, est, *c)?)
            }
        }
    }

    /// Whether to stop at `n = prefix.len()`, having not stopped before.
    /// Uses only `prefix` (and `mu` for rules that need it).
    pub fn decide(&self, family: &FamilySpec, prefix: &Prefix<'_>, mu: Option<f64>) -> Result<bool> {
        let n = prefix.len();
        if n >= self.cap() {
            return Ok(true);
        }
        if n <= self.burn_in() {
            return Ok(false);
        }
        self.event(family, prefix, mu)
    }

    /// Runs the rule on `traj`, drawing further observations at `sample_mu`
    /// when the trajectory is too short. `mu` is what the rule is told about
    /// the true mean (`None` withholds it).
    pub fn run<R: Rng + ?Sized>(
        &self,
        family: &FamilySpec,
        sample_mu: f64,
        mu: Option<f64>,
        traj: &mut Trajectory,
        rng: &mut R,
    ) -> Result<StopOutcome> {
        if self.needs_true_mu() && mu.is_none() {
            return Err(Error::TrueMeanWithheld(self.to_string()));
        }
        let cap = self.cap();
        let first = (self.burn_in() + 1).min(cap);
        if traj.len() < first {
            traj.extend_sampled(family, sample_mu, first, rng);
        }
        const CHUNK: usize = 1024;
        let mut n = first;
        loop {
            if traj.len() < n {
                traj.extend_sampled(family, sample_mu, (n + CHUNK - 1).min(cap), rng);
            }
            if self.decide(family, &traj.prefix(n), mu)? {
                // a fixed time is the rule's intended stop, never a cap hit
                let triggered = n < cap || matches!(self, Self::Fixed { .. });
                return Ok(StopOutcome { tau: n, triggered });
            }
            n += 1;
        }
    }

    fn true_mu(&self, mu: Option<f64>) -> Result<f64> {
        mu.ok_or_else(|| Error::TrueMeanWithheld(self.to_string()))
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed { n } => write!(f, "fixed:{n}"),
            Self::Lil { c, n0, nmax } => write!(f, "lil:{c},{n0},{nmax}"),
            Self::Gap { estimator, c, n0, nmax } => write!(f, "gap:{},{c},{n0},{nmax}", estimator.name()),
            Self::Capped { c, n0, n1, .. } => write!(f, "capped:{c},{n0},{n1}"),
        }
    }
}

/// `(μ − μ̃ₙ)² ≥ c·f(n)`.
pub fn lil_event(family: &FamilySpec, prefix: &Prefix<'_>, mu: f64, c: f64) -> Result<bool> {
    let pm = posterior_mean(family, prefix)?;
    Ok((mu - pm).powi(2) >= c * rate_f(prefix.len() as u64))
}

/// `(μ̃ₙ − μ̂ₙ)² ≥ (c/2)·f(n)`.
pub fn gap_event(family: &FamilySpec, prefix: &Prefix<'_>, estimator: &dyn Estimator, c: f64) -> Result<bool> {
    let pm = posterior_mean(family, prefix)?;
    let est = estimator.estimate(prefix)?;
    Ok((pm - est).powi(2) >= 0.5 * c * rate_f(prefix.len() as u64))
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("rule constant c must be positive, got {c}")))
    }
}

fn check_window(n0: usize, cap: usize) -> Result<()> {
    if n0 < cap {
        Ok(())
    } else {
        Err(invalid(format!("burn-in {n0} must be below the cap {cap}")))
    }
}
