//! Nested model selection in the Gaussian location family: `M0 = {μ₀}`
//! against the full family `M1`, by AIC or BIC, followed by estimation in the
//! chosen model.
//!
//! With unit variance the likelihood-ratio statistic is
//! `2(ℓ₁ − ℓ₀) = n (μ̂ₙ − μ₀)²`; `M1` is chosen iff it exceeds the penalty.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimators::{mle, Estimator, EstimatorKind};
use crate::model::{FamilySpec, Rate};
use crate::risk::{run_blocks, standard_risk, strong_risk, LossAccum, RiskConfig, RiskEstimate};
use crate::rng::{child_seed, replicate_rng, Substream};
use crate::trajectory::Prefix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    M0,
    M1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionOutcome {
    pub chosen: Model,
    /// `n (μ̂ₙ − μ₀)²`.
    pub statistic: f64,
    pub penalty: f64,
    /// `μ₀` under `M0`, the MLE under `M1`.
    pub post_estimate: f64,
}

/// A penalized likelihood-ratio selector. Implement this to plug in other
/// penalties.
pub trait Selector: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn penalty(&self, n: usize) -> Result<f64>;

    /// Smallest sample size the penalty is defined for.
    fn min_n(&self) -> usize {
        1
    }
}

/// Penalty 2 (one extra parameter).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Aic;

/// Penalty `ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bic;

impl Selector for Aic {
    fn name(&self) -> String {
        "aic".into()
    }

    fn penalty(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::EmptyPrefix("aic".into()));
        }
        Ok(2.0)
    }
}

impl Selector for Bic {
    fn name(&self) -> String {
        "bic".into()
    }

    fn penalty(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(invalid(format!("BIC needs n >= 2 (penalty ln n), got n = {n}")));
        }
        Ok((n as f64).ln())
    }

    fn min_n(&self) -> usize {
        2
    }
}

/// Parses `aic` or `bic`.
pub fn selector_by_id(id: &str) -> Result<Arc<dyn Selector>> {
    match id {
        "aic" => Ok(Arc::new(Aic)),
        "bic" => Ok(Arc::new(Bic)),
        _ => Err(Error::UnknownId {
            kind: "selector",
            id: id.into(),
            valid: "aic, bic".into(),
        }),
    }
}

/// Selects between `M0 = {mu0}` and `M1` on the data in `prefix`.
pub fn select(selector: &dyn Selector, prefix: &Prefix<'_>, mu0: f64) -> Result<SelectionOutcome> {
    let n = prefix.len();
    let penalty = selector.penalty(n)?;
    let m = mle(prefix)?;
    let statistic = n as f64 * (m - mu0).powi(2);
    let chosen = if statistic > penalty { Model::M1 } else { Model::M0 };
    Ok(SelectionOutcome {
        chosen,
        statistic,
        penalty,
        post_estimate: if chosen == Model::M1 { m } else { mu0 },
    })
}

pub fn aic_select(prefix: &Prefix<'_>, mu0: f64) -> Result<SelectionOutcome> {
    select(&Aic, prefix, mu0)
}

pub fn bic_select(prefix: &Prefix<'_>, mu0: f64) -> Result<SelectionOutcome> {
    select(&Bic, prefix, mu0)
}

/// Estimate in the selected model. Below the selector's `min_n` the MLE is
/// returned, which is the choice every penalty-free comparison makes.
#[derive(Debug, Clone)]
pub struct PostSelection {
    pub selector: Arc<dyn Selector>,
    pub mu0: f64,
}

impl PostSelection {
    pub fn new(selector: Arc<dyn Selector>, mu0: f64) -> Self {
        Self { selector, mu0 }
    }

    pub fn into_estimator(self) -> EstimatorKind {
        EstimatorKind::custom(self)
    }
}

impl Estimator for PostSelection {
    fn name(&self) -> String {
        format!("post_{}:{}", self.selector.name(), self.mu0)
    }

    fn estimate(&self, prefix: &Prefix<'_>) -> Result<f64> {
        if prefix.len() < self.selector.min_n() {
            return mle(prefix);
        }
        Ok(select(self.selector.as_ref(), prefix, self.mu0)?.post_estimate)
    }

    fn check_family(&self, family: &FamilySpec) -> Result<()> {
        if family.is_gaussian_location() {
            Ok(())
        } else {
            Err(Error::UnsupportedFamily {
                what: "model selection".into(),
                family: family.name(),
            })
        }
    }
}

/// Frequency of choosing `M1` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionRate {
    pub p: f64,
    pub se: f64,
    pub reps: u64,
}

/// `P(select M1)` over `cfg.reps` samples of size `n` at mean `mu`.
pub fn selection_probability(
    selector: &dyn Selector,
    family: &FamilySpec,
    mu: f64,
    mu0: f64,
    n: usize,
    cfg: &RiskConfig,
) -> Result<SelectionRate> {
    if !family.is_gaussian_location() {
        return Err(Error::UnsupportedFamily {
            what: "model selection".into(),
            family: family.name(),
        });
    }
    family.check_mean(&[mu])?;
    selector.penalty(n)?;
    let acc = run_blocks(
        cfg,
        || LossAccum::new(false),
        |acc, traj, r| {
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            traj.extend_sampled(family, mu, n, &mut rng);
            let out = select(selector, &traj.prefix(n), mu0)?;
            debug_assert_eq!(out.chosen == Model::M1, out.statistic > out.penalty);
            acc.push(if out.chosen == Model::M1 { 1.0 } else { 0.0 }, true)
        },
    )?;
    Ok(SelectionRate {
        p: acc.all.mean(),
        se: acc.all.std_error(),
        reps: acc.all.count(),
    })
}

/// One `(μ, n)` cell of the post-selection risk table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilemmaRow {
    pub selector: String,
    pub mu: f64,
    pub n: usize,
    pub p_select_m1: SelectionRate,
    pub standard: RiskEstimate,
    /// Strong risk over the horizon `n`.
    pub strong: RiskEstimate,
}

/// Standard and strong risks of the post-selection estimator, and the
/// selection frequency, for every `(μ, n)` in the grids.
///
/// Grid mean `i` uses seed `child_seed(seed, i)` for every `n`, so rows at
/// different `n` share their leading observations.
pub fn post_selection_risk(
    selector: Arc<dyn Selector>,
    mu0: f64,
    mu_grid: &[f64],
    n_grid: &[usize],
    rate: Rate,
    cfg: &RiskConfig,
) -> Result<Vec<DilemmaRow>> {
    if mu_grid.is_empty() || n_grid.is_empty() {
        return Err(invalid("mean grid and sample-size grid must be non-empty"));
    }
    let family = FamilySpec::gaussian();
    let est = PostSelection::new(selector.clone(), mu0).into_estimator();
    let mut rows = Vec::with_capacity(mu_grid.len() * n_grid.len());
    for (i, &mu) in mu_grid.iter().enumerate() {
        let cell = cfg.with_seed(child_seed(cfg.seed, i as u64));
        for &n in n_grid {
            rows.push(DilemmaRow {
                selector: selector.name(),
                mu,
                n,
                p_select_m1: selection_probability(selector.as_ref(), &family, mu, mu0, n, &cell)?,
                standard: standard_risk(&family, mu, &est, rate, n, &cell)?,
                strong: strong_risk(&family, mu, &est, rate, n, &cell)?,
            });
        }
    }
    Ok(rows)
}
