//! Monte Carlo estimates of the standard, weakly adversarial, strongly
//! adversarial and Bayes risks.
//!
//! Replication `r` always draws from the stream `(seed, r)`. Replications are
//! grouped in fixed blocks of [`BLOCK`] that run serially; blocks run on a
//! pool of `workers` threads and their statistics are merged in block order,
//! so every result is bit-identical for any worker count.

use std::fmt;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::adversaries::StoppingRule;
use crate::error::{invalid, Error, Result};
use crate::estimators::{DyadicWeights, Estimator, EstimatorKind};
use crate::model::{FamilySpec, Rate};
use crate::numeric::RunningStats;
use crate::rng::{child_seed, replicate_rng, Substream};
use crate::supermartingale::sup_ratio_at;
use crate::trajectory::Trajectory;

/// Replications per serial block.
pub const BLOCK: u64 = 256;

/// Replication settings shared by all functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RiskConfig {
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
    /// Keep every per-replication loss in the estimate.
    pub dump: bool,
}

impl RiskConfig {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self {
            reps,
            seed,
            workers: 1,
            dump: false,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_dump(mut self, dump: bool) -> Self {
        self.dump = dump;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(invalid(format!("reps must be at least 2, got {}", self.reps)));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Standard,
    Weak,
    Strong,
    WeightedStrong,
    Bayes,
}

impl Functional {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Weak => "weak",
            Self::Strong => "strong",
            Self::WeightedStrong => "weighted_strong",
            Self::Bayes => "bayes",
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One Monte Carlo risk estimate with the experiment that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub functional: Functional,
    pub family: String,
    /// The true mean; `None` for Bayes risks, where it is drawn per replication.
    pub mu: Option<f64>,
    pub prior_sd: Option<f64>,
    pub estimator: String,
    /// Stopping rule, or the horizon surrogate for fixed-`n` and strong risks.
    pub rule: String,
    pub rate: String,
    /// Sample size, cap or horizon.
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over `√reps`.
    pub se: f64,
    pub reps: u64,
    /// Replications stopped by the cap rather than the rule's event.
    pub cap_hits: u64,
    /// Mean over replications whose rule triggered; NaN if none did.
    pub conditional_mean: f64,
    pub seed: u64,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub losses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LossAccum {
    pub(crate) all: RunningStats,
    pub(crate) triggered: RunningStats,
    pub(crate) cap_hits: u64,
    pub(crate) losses: Option<Vec<f64>>,
}

impl LossAccum {
    pub(crate) fn new(dump: bool) -> Self {
        Self {
            losses: dump.then(Vec::new),
            ..Self::default()
        }
    }

    pub(crate) fn push(&mut self, loss: f64, triggered: bool) -> Result<()> {
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("replication loss {loss}")));
        }
        self.all.push(loss);
        if triggered {
            self.triggered.push(loss);
        } else {
            self.cap_hits += 1;
        }
        if let Some(l) = self.losses.as_mut() {
            l.push(loss);
        }
        Ok(())
    }
}

pub(crate) trait Merge {
    fn merge(&mut self, other: Self);
}

impl Merge for LossAccum {
    fn merge(&mut self, other: Self) {
        self.all.merge(&other.all);
        self.triggered.merge(&other.triggered);
        self.cap_hits += other.cap_hits;
        if let (Some(a), Some(b)) = (self.losses.as_mut(), other.losses) {
            a.extend(b);
        }
    }
}

impl Merge for Vec<LossAccum> {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

/// Runs `step` for every replication in blocks and merges in block order.
pub(crate) fn run_blocks<A, I, F>(cfg: &RiskConfig, init: I, step: F) -> Result<A>
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &mut Trajectory, u64) -> Result<()> + Sync,
{
    cfg.validate()?;
    let blocks = cfg.reps.div_ceil(BLOCK);
    let run_block = |b: u64| -> Result<A> {
        let mut acc = init();
        let mut traj = Trajectory::new();
        for r in b * BLOCK..((b + 1) * BLOCK).min(cfg.reps) {
            traj.clear();
            step(&mut acc, &mut traj, r)?;
        }
        Ok(acc)
    };
    let parts: Vec<Result<A>> = if cfg.workers == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| invalid(format!("cannot start {} workers: {e}", cfg.workers)))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut iter = parts.into_iter();
    let mut total = iter.next().expect("at least one block")?;
    for part in iter {
        total.merge(part?);
    }
    Ok(total)
}

/// First 16 hex digits of the SHA-256 of a canonical experiment description.
pub fn config_digest(description: &str) -> String {
    let hash = Sha256::digest(description.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct Label<'a> {
    functional: Functional,
    family: &'a FamilySpec,
    mu: Option<f64>,
    prior_sd: Option<f64>,
    estimator: String,
    rule: String,
    rate: Rate,
    n: usize,
}

impl Label<'_> {
    fn finish(self, acc: LossAccum, cfg: &RiskConfig) -> RiskEstimate {
        let description = format!(
            "{}|{}|{:?}|{:?}|{:?}|{:?}|{}|{}|{}|{}|{}",
            self.functional,
            self.family.name(),
            self.family.param_set(),
            self.mu,
            self.prior_sd,
            self.estimator,
            self.rule,
            self.rate,
            self.n,
            cfg.reps,
            cfg.seed
        );
        RiskEstimate {
            functional: self.functional,
            family: self.family.name(),
            mu: self.mu,
            prior_sd: self.prior_sd,
            estimator: self.estimator,
            rule: self.rule,
            rate: self.rate.id().to_string(),
            n: self.n,
            mean: acc.all.mean(),
            se: acc.all.std_error(),
            reps: acc.all.count(),
            cap_hits: acc.cap_hits,
            conditional_mean: acc.triggered.mean(),
            seed: cfg.seed,
            config_digest: config_digest(&description),
            losses: acc.losses,
        }
    }
}

fn check_setup(family: &FamilySpec, mu: f64, estimator: &EstimatorKind) -> Result<()> {
    if family.dim() != 1 {
        return Err(Error::UnsupportedFamily {
            what: "risk simulation (scalar families only)".into(),
            family: family.name(),
        });
    }
    family.check_mean(&[mu])?;
    estimator.check_family(family)
}

/// `E (μ − μ̂ₙ)² / rate(n)`.
pub fn standard_risk(
    family: &FamilySpec,
    mu: f64,
    estimator: &EstimatorKind,
    rate: Rate,
    n: usize,
    cfg: &RiskConfig,
) -> Result<RiskEstimate> {
    check_setup(family, mu, estimator)?;
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let g = rate.eval(n as u64);
    let acc = run_blocks(
        cfg,
        || LossAccum::new(cfg.dump),
        |acc, traj, r| {
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            traj.set_truth(Some(mu));
            traj.extend_sampled(family, mu, n, &mut rng);
            let est = estimator.estimate(&traj.prefix(n))?;
            acc.push((mu - est).powi(2) / g, true)
        },
    )?;
    Ok(Label {
        functional: Functional::Standard,
        family,
        mu: Some(mu),
        prior_sd: None,
        estimator: estimator.name(),
        rule: format!("fixed:{n}"),
        rate,
        n,
    }
    .finish(acc, cfg))
}

/// `E (μ − μ̂_τ)² / rate(τ)` for the stopping time of `rule`.
///
/// `reveal_mu` tells the rule the true mean; rules that need it fail when it
/// is withheld. A `Capped` rule without an estimator is bound to
/// `estimator`. Any finite menu of rules only bounds the worst case over all
/// stopping times from below.
pub fn weak_risk(
    family: &FamilySpec,
    mu: f64,
    estimator: &EstimatorKind,
    rule: &StoppingRule,
    rate: Rate,
    reveal_mu: bool,
    cfg: &RiskConfig,
) -> Result<RiskEstimate> {
    check_setup(family, mu, estimator)?;
    let rule = rule.bind_estimator(estimator);
    rule.check_family(family)?;
    if rule.needs_true_mu() && !reveal_mu {
        return Err(Error::TrueMeanWithheld(rule.to_string()));
    }
    let told = reveal_mu.then_some(mu);
    let acc = run_blocks(
        cfg,
        || LossAccum::new(cfg.dump),
        |acc, traj, r| {
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            traj.set_truth(Some(mu));
            let stop = rule.run(family, mu, told, traj, &mut rng)?;
            let est = estimator.estimate(&traj.prefix(stop.tau))?;
            acc.push((mu - est).powi(2) / rate.eval(stop.tau as u64), stop.triggered)
        },
    )?;
    Ok(Label {
        functional: Functional::Weak,
        family,
        mu: Some(mu),
        prior_sd: None,
        estimator: estimator.name(),
        rule: rule.to_string(),
        rate,
        n: rule.cap(),
    }
    .finish(acc, cfg))
}

/// `E max_{n ≤ N} (μ − μ̂ₙ)² / g(n)`.
pub fn strong_risk(
    family: &FamilySpec,
    mu: f64,
    estimator: &EstimatorKind,
    rate: Rate,
    horizon: usize,
    cfg: &RiskConfig,
) -> Result<RiskEstimate> {
    let mut p = strong_risk_profile(family, mu, estimator, rate, &[horizon], cfg)?;
    Ok(p.estimates.remove(0))
}

/// Difference of the strong risk between two horizons, estimated from the
/// paired per-replication differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Increment {
    pub from: usize,
    pub to: usize,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongProfile {
    pub estimates: Vec<RiskEstimate>,
    /// One entry per consecutive pair of horizons.
    pub increments: Vec<Increment>,
}

/// Strong risks at several strictly increasing horizons from one set of
/// trajectories of the longest horizon. Each estimate equals what
/// [`strong_risk`] returns for that horizon and seed.
pub fn strong_risk_profile(
    family: &FamilySpec,
    mu: f64,
    estimator: &EstimatorKind,
    rate: Rate,
    horizons: &[usize],
    cfg: &RiskConfig,
) -> Result<StrongProfile> {
    check_setup(family, mu, estimator)?;
    check_horizons(horizons)?;
    let max_h = *horizons.last().expect("checked non-empty");
    let rates = rate.table(max_h);
    let h = horizons.len();
    let accs = run_blocks(
        cfg,
        || {
            (0..2 * h)
                .map(|i| LossAccum::new(cfg.dump && i < h))
                .collect::<Vec<_>>()
        },
        |accs, traj, r| {
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            traj.set_truth(Some(mu));
            traj.extend_sampled(family, mu, max_h, &mut rng);
            let mut sups = vec![0.0; h];
            sup_ratio_at(&traj.full(), mu, estimator, &rates, horizons, &mut sups)?;
            for i in 0..h {
                accs[i].push(sups[i], true)?;
                if i > 0 {
                    accs[h + i].push(sups[i] - sups[i - 1], true)?;
                }
            }
            Ok(())
        },
    )?;
    let mut accs = accs.into_iter();
    let estimates: Vec<RiskEstimate> = horizons
        .iter()
        .zip(accs.by_ref())
        .map(|(&n, acc)| {
            Label {
                functional: Functional::Strong,
                family,
                mu: Some(mu),
                prior_sd: None,
                estimator: estimator.name(),
                rule: format!("sup_n<={n}"),
                rate,
                n,
            }
            .finish(acc, cfg)
        })
        .collect();
    let increments = accs
        .skip(1)
        .zip(horizons.windows(2))
        .map(|(acc, w)| Increment {
            from: w[0],
            to: w[1],
            mean: acc.all.mean(),
            se: acc.all.std_error(),
        })
        .collect();
    Ok(StrongProfile { estimates, increments })
}

/// `E max_{n ≤ N} π(⌊log₂ n⌋) (μ − μ̂ₙ)² / g(n)`, with `π` the block weights
/// of exponent `alpha` normalized over each horizon `N` in `horizons`.
pub fn weighted_strong_risk_profile(
    family: &FamilySpec,
    mu: f64,
    estimator: &EstimatorKind,
    rate: Rate,
    alpha: f64,
    horizons: &[usize],
    cfg: &RiskConfig,
) -> Result<Vec<RiskEstimate>> {
    check_setup(family, mu, estimator)?;
    check_horizons(horizons)?;
    let weights: Vec<DyadicWeights> = horizons
        .iter()
        .map(|&n| DyadicWeights::new(alpha, n))
        .collect::<Result<_>>()?;
    let max_h = *horizons.last().expect("checked non-empty");
    let rates = rate.table(max_h);
    let accs = run_blocks(
        cfg,
        || horizons.iter().map(|_| LossAccum::new(cfg.dump)).collect::<Vec<_>>(),
        |accs, traj, r| {
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            traj.set_truth(Some(mu));
            traj.extend_sampled(family, mu, max_h, &mut rng);
            let mut sups = vec![0.0f64; horizons.len()];
            let mut first = 0;
            for n in 1..=max_h {
                while horizons[first] < n {
                    first += 1;
                }
                let ratio = (mu - estimator.estimate(&traj.prefix(n))?).powi(2) / rates[n - 1];
                let block = crate::estimators::dyadic_block(n);
                for (sup, w) in sups.iter_mut().zip(&weights).skip(first) {
                    *sup = sup.max(w.weight(block) * ratio);
                }
            }
            for (acc, s) in accs.iter_mut().zip(sups) {
                acc.push(s, true)?;
            }
            Ok(())
        },
    )?;
    Ok(horizons
        .iter()
        .zip(accs)
        .map(|(&n, acc)| {
            Label {
                functional: Functional::WeightedStrong,
                family,
                mu: Some(mu),
                prior_sd: None,
                estimator: estimator.name(),
                rule: format!("weighted_sup_n<={n},alpha={alpha}"),
                rate,
                n,
            }
            .finish(acc, cfg)
        })
        .collect())
}

fn check_horizons(horizons: &[usize]) -> Result<()> {
    if horizons.is_empty() || horizons[0] == 0 {
        return Err(invalid("horizons must be non-empty and at least 1"));
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!(
            "horizons must be strictly increasing, got {horizons:?}"
        )));
    }
    Ok(())
}

/// Bayes risk under a `N(0, prior_sd²)` prior on the Gaussian location mean:
/// each replication draws `μ*`, simulates at `μ*`, stops by `rule` (which is
/// told `μ*`) and scores `(μ* − μ̂_τ)² / rate(τ)`.
pub fn bayes_risk(
    family: &FamilySpec,
    prior_sd: f64,
    estimator: &EstimatorKind,
    rule: &StoppingRule,
    rate: Rate,
    cfg: &RiskConfig,
) -> Result<RiskEstimate> {
    if !family.is_gaussian_location() {
        return Err(Error::UnsupportedFamily {
            what: "bayes_risk".into(),
            family: family.name(),
        });
    }
    if !(prior_sd > 0.0 && prior_sd.is_finite()) {
        return Err(invalid(format!("prior sd must be positive, got {prior_sd}")));
    }
    estimator.check_family(family)?;
    let rule = rule.bind_estimator(estimator);
    rule.check_family(family)?;
    let acc = run_blocks(
        cfg,
        || LossAccum::new(cfg.dump),
        |acc, traj, r| {
            let mut prior_rng = replicate_rng(cfg.seed, Substream::Prior, r);
            let z: f64 = StandardNormal.sample(&mut prior_rng);
            let mu = prior_sd * z;
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            traj.set_truth(Some(mu));
            let stop = rule.run(family, mu, Some(mu), traj, &mut rng)?;
            let est = estimator.estimate(&traj.prefix(stop.tau))?;
            acc.push((mu - est).powi(2) / rate.eval(stop.tau as u64), stop.triggered)
        },
    )?;
    Ok(Label {
        functional: Functional::Bayes,
        family,
        mu: None,
        prior_sd: Some(prior_sd),
        estimator: estimator.name(),
        rule: rule.to_string(),
        rate,
        n: rule.cap(),
    }
    .finish(acc, cfg))
}

/// Risk estimates over a grid of means, standing in for the supremum over
/// the parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub points: Vec<RiskEstimate>,
    /// Index into `points` of the largest mean risk.
    pub argmax: usize,
    pub argmax_mu: f64,
    /// Names the finite surrogate that produced the maximum.
    pub surrogate: String,
}

/// Runs `op(μ, seed)` at every grid point, grid point `i` with seed
/// `child_seed(seed, i)` so that a one-point grid reproduces `op` itself.
pub fn mu_sweep<F>(grid: &[f64], seed: u64, op: F) -> Result<Sweep>
where
    F: Fn(f64, u64) -> Result<RiskEstimate>,
{
    if grid.is_empty() {
        return Err(invalid("mean grid is empty"));
    }
    let points: Vec<RiskEstimate> = grid
        .iter()
        .enumerate()
        .map(|(i, &mu)| op(mu, child_seed(seed, i as u64)))
        .collect::<Result<_>>()?;
    let argmax = points
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.mean > points[best].mean { i } else { best });
    Ok(Sweep {
        argmax,
        argmax_mu: grid[argmax],
        surrogate: format!(
            "max over a grid of {} means in [{}, {}]",
            grid.len(),
            min(grid),
            max(grid)
        ),
        points,
    })
}

fn min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rate_f;

    fn gauss() -> FamilySpec {
        FamilySpec::gaussian()
    }

    #[test]
    fn oracle_estimators_have_zero_risk() {
        let cfg = RiskConfig::new(50, 1);
        let g = gauss();
        let r = standard_risk(&g, 0.7, &EstimatorKind::Constant(0.7), Rate::LogLog, 10, &cfg).unwrap();
        assert_eq!((r.mean, r.se), (0.0, 0.0));
        let r = strong_risk(&g, 0.7, &EstimatorKind::Oracle, Rate::LogLog, 100, &cfg).unwrap();
        assert_eq!(r.mean, 0.0);
        let rule = StoppingRule::lil(0.1, 27, 300).unwrap();
        let r = weak_risk(&g, 0.7, &EstimatorKind::Oracle, &rule, Rate::LogLog, true, &cfg).unwrap();
        assert_eq!(r.mean, 0.0);
        let r = bayes_risk(
            &g,
            1.0,
            &EstimatorKind::Oracle,
            &StoppingRule::fixed(5).unwrap(),
            Rate::One,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.mean, 0.0);
    }

    #[test]
    fn mle_standard_risk_under_loglog_rate() {
        let cfg = RiskConfig::new(20_000, 11);
        let r = standard_risk(&gauss(), 0.0, &EstimatorKind::Mle, Rate::LogLog, 10, &cfg).unwrap();
        let want = 0.1 / rate_f(10);
        assert!((want - 1.198_994).abs() < 1e-5);
        assert!((r.mean - want).abs() < 3.0 * r.se, "{} vs {want} ± {}", r.mean, r.se);
    }

    #[test]
    fn fixed_rule_weak_equals_standard_and_strong_n1() {
        let cfg = RiskConfig::new(600, 5);
        let g = gauss();
        let std = standard_risk(&g, 1.0, &EstimatorKind::Mle, Rate::LogLog, 40, &cfg).unwrap();
        let weak = weak_risk(
            &g,
            1.0,
            &EstimatorKind::Mle,
            &StoppingRule::fixed(40).unwrap(),
            Rate::LogLog,
            false,
            &cfg,
        )
        .unwrap();
        assert_eq!(std.mean, weak.mean);
        assert_eq!(std.se, weak.se);
        assert_eq!(weak.cap_hits, 0);
        let s1 = standard_risk(&g, 1.0, &EstimatorKind::Mle, Rate::LogLog, 1, &cfg).unwrap();
        let st1 = strong_risk(&g, 1.0, &EstimatorKind::Mle, Rate::LogLog, 1, &cfg).unwrap();
        assert_eq!(s1.mean, st1.mean);
    }

    #[test]
    fn workers_do_not_change_results() {
        let cfg = RiskConfig::new(1000, 9).with_dump(true);
        let g = gauss();
        let a = strong_risk(&g, 0.0, &EstimatorKind::Mle, Rate::LogLog, 200, &cfg).unwrap();
        let b = strong_risk(&g, 0.0, &EstimatorKind::Mle, Rate::LogLog, 200, &cfg.with_workers(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.losses.as_ref().unwrap().len(), 1000);
    }

    #[test]
    fn digest_ignores_workers_and_tracks_seed() {
        let g = gauss();
        let cfg = RiskConfig::new(10, 1);
        let a = standard_risk(&g, 0.0, &EstimatorKind::Mle, Rate::One, 3, &cfg).unwrap();
        let b = standard_risk(&g, 0.0, &EstimatorKind::Mle, Rate::One, 3, &cfg.with_workers(2)).unwrap();
        let c = standard_risk(&g, 0.0, &EstimatorKind::Mle, Rate::One, 3, &cfg.with_seed(2)).unwrap();
        assert_eq!(a.config_digest, b.config_digest);
        assert_ne!(a.config_digest, c.config_digest);
        assert_eq!(a.config_digest.len(), 16);
    }

    #[test]
    fn profile_matches_single_horizons() {
        let cfg = RiskConfig::new(300, 4);
        let g = gauss();
        let p = strong_risk_profile(&g, 0.0, &EstimatorKind::Mle, Rate::OneOverN, &[10, 100, 1000], &cfg).unwrap();
        for e in &p.estimates {
            let single = strong_risk(&g, 0.0, &EstimatorKind::Mle, Rate::OneOverN, e.n, &cfg).unwrap();
            assert_eq!(e.mean, single.mean);
        }
        assert_eq!(p.increments.len(), 2);
        let d = p.estimates[2].mean - p.estimates[1].mean;
        assert!((p.increments[1].mean - d).abs() < 1e-9 * p.estimates[2].mean);
        assert!(p.increments.iter().all(|i| i.mean >= 0.0));
        assert!(strong_risk_profile(&g, 0.0, &EstimatorKind::Mle, Rate::OneOverN, &[10, 10], &cfg).is_err());
    }

    #[test]
    fn input_errors() {
        let g = gauss();
        let cfg = RiskConfig::new(10, 1);
        let b = FamilySpec::bernoulli();
        assert!(standard_risk(&b, 0.999, &EstimatorKind::Mle, Rate::One, 3, &cfg).is_err());
        assert!(standard_risk(&g, 0.0, &EstimatorKind::Mle, Rate::One, 0, &cfg).is_err());
        assert!(standard_risk(&g, 0.0, &EstimatorKind::Mle, Rate::One, 3, &RiskConfig::new(1, 1)).is_err());
        assert!(standard_risk(&b, 0.5, &EstimatorKind::PosteriorMean, Rate::One, 3, &cfg).is_err());
        let lil = StoppingRule::lil(0.1, 27, 100).unwrap();
        assert!(matches!(
            weak_risk(&g, 0.0, &EstimatorKind::Mle, &lil, Rate::One, false, &cfg),
            Err(Error::TrueMeanWithheld(_))
        ));
        assert!(bayes_risk(
            &b,
            1.0,
            &EstimatorKind::Mle,
            &StoppingRule::fixed(3).unwrap(),
            Rate::One,
            &cfg
        )
        .is_err());
        assert!(mu_sweep(&[], 1, |_, _| unreachable!()).is_err());
    }

    #[test]
    fn sweep_of_one_point_is_the_op() {
        let g = gauss();
        let op =
            |mu: f64, seed: u64| standard_risk(&g, mu, &EstimatorKind::Mle, Rate::One, 5, &RiskConfig::new(100, seed));
        let s = mu_sweep(&[0.3], 42, op).unwrap();
        assert_eq!(s.points[0], op(0.3, 42).unwrap());
        assert_eq!(s.argmax_mu, 0.3);
    }

    #[test]
    fn bernoulli_sweep_peaks_near_half() {
        let b = FamilySpec::bernoulli();
        let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
        let s = mu_sweep(&grid, 3, |mu, seed| {
            standard_risk(
                &b,
                mu,
                &EstimatorKind::Mle,
                Rate::One,
                50,
                &RiskConfig::new(20_000, seed),
            )
        })
        .unwrap();
        assert_eq!(s.argmax_mu, 0.5);
        for (p, mu) in s.points.iter().zip(grid) {
            let want = mu * (1.0 - mu) / 50.0;
            assert!((p.mean - want).abs() < 4.0 * p.se, "mu={mu}");
        }
    }
}
