//! Exponential families in mean-value parametrization, rate functions and
//! the sub-Gaussian envelope check on the centered sufficient statistic.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::RunningStats;

/// Built-in families. All use the identity sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `N(μ, 1)`.
    Gaussian,
    /// `Bernoulli(μ)`, canonical parameter `logit μ`.
    Bernoulli,
    /// `N(μ, I_k)` with independent coordinates.
    ProductGaussian { dim: usize },
}

impl FamilyKind {
    pub fn id(&self) -> String {
        match self {
            FamilyKind::Gaussian => "gaussian".into(),
            FamilyKind::Bernoulli => "bernoulli".into(),
            FamilyKind::ProductGaussian { dim } => format!("product_gaussian:{dim}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FamilyKind::ProductGaussian { dim } => *dim,
            _ => 1,
        }
    }

    /// Mean parameter of the canonical parameter `theta` (one coordinate).
    pub fn mean_link(&self, theta: f64) -> f64 {
        match self {
            FamilyKind::Bernoulli => 1.0 / (1.0 + (-theta).exp()),
            _ => theta,
        }
    }

    /// Inverse of [`mean_link`](Self::mean_link).
    pub fn theta_of(&self, mu: f64) -> f64 {
        match self {
            FamilyKind::Bernoulli => (mu / (1.0 - mu)).ln(),
            _ => mu,
        }
    }

    /// Fisher information at canonical `theta`, as a row-major `k×k` matrix.
    pub fn fisher(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            FamilyKind::Gaussian => vec![1.0],
            FamilyKind::Bernoulli => {
                let p = self.mean_link(theta[0]);
                vec![p * (1.0 - p)]
            }
            FamilyKind::ProductGaussian { dim } => {
                let mut m = vec![0.0; dim * dim];
                for i in 0..*dim {
                    m[i * dim + i] = 1.0;
                }
                m
            }
        }
    }

    /// Largest Fisher eigenvalue at `theta`; every built-in family has a
    /// diagonal information matrix.
    fn fisher_sup(&self, theta: &[f64]) -> f64 {
        let k = self.dim();
        let m = self.fisher(theta);
        (0..k).map(|i| m[i * k + i]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Interior of the closed mean parameter space M̄, per coordinate.
    fn mean_domain(&self) -> (f64, f64) {
        match self {
            FamilyKind::Bernoulli => (0.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn fisher_is_constant(&self) -> bool {
        !matches!(self, FamilyKind::Bernoulli)
    }

    /// `ln E exp(ηᵀ(φ(X) − μ))` in closed form.
    pub fn centered_log_mgf(&self, mu: &[f64], eta: &[f64]) -> f64 {
        match self {
            FamilyKind::Bernoulli => {
                let (m, e) = (mu[0], eta[0]);
                ((1.0 - m) * (-e * m).exp() + m * (e * (1.0 - m)).exp()).ln()
            }
            _ => eta.iter().map(|e| e * e).sum::<f64>() / 2.0,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Axis-aligned box of mean parameters; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamSet {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(invalid(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self {
            lower: vec![lo],
            upper: vec![hi],
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.dim()
            && mu
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(m, (lo, hi))| *m >= *lo && *m <= *hi)
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| format!("[{lo}, {hi}]"))
            .collect();
        f.write_str(&parts.join(" x "))
    }
}

/// An exponential family with the parameter set `M` and the envelope
/// constants `(σ, δ)`: for every `μ ∈ M` and `‖η‖² ≤ δ`,
/// `E exp(ηᵀ(φ(X) − μ)) ≤ exp(σ ηᵀη / 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    kind: FamilyKind,
    param_set: ParamSet,
    sigma: f64,
    delta: f64,
}

impl FamilySpec {
    /// Gaussian location family on all of ℝ with `σ = 1`, `δ = 1`.
    pub fn gaussian() -> Self {
        Self {
            kind: FamilyKind::Gaussian,
            param_set: ParamSet::unbounded(1),
            sigma: 1.0,
            delta: 1.0,
        }
    }

    /// Bernoulli on the default set `M = [0.01, 0.99]` with `δ = 0.01`.
    pub fn bernoulli() -> Self {
        Self::bernoulli_on(0.01, 0.99, 0.01).expect("default Bernoulli set is valid")
    }

    /// Bernoulli on `M = [lo, hi]`, with `σ` from [`sigma_of`].
    pub fn bernoulli_on(lo: f64, hi: f64, delta: f64) -> Result<Self> {
        let param_set = ParamSet::interval(lo, hi)?;
        let sigma = sigma_of(FamilyKind::Bernoulli, &param_set, delta)?;
        Ok(Self {
            kind: FamilyKind::Bernoulli,
            param_set,
            sigma,
            delta,
        })
    }

    /// Independent `k`-dimensional Gaussian, `σ = 1`, `δ = 1`.
    pub fn product_gaussian(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self {
            kind: FamilyKind::ProductGaussian { dim },
            param_set: ParamSet::unbounded(dim),
            sigma: 1.0,
            delta: 1.0,
        })
    }

    /// Family with explicit constants. `sigma` and `delta` are taken on
    /// trust; use [`envelope_check`] to test them.
    pub fn with_constants(kind: FamilyKind, param_set: ParamSet, sigma: f64, delta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!(
                "sigma and delta must be positive, got {sigma}, {delta}"
            )));
        }
        if param_set.dim() != kind.dim() {
            return Err(invalid("parameter set dimension does not match the family"));
        }
        Ok(Self {
            kind,
            param_set,
            sigma,
            delta,
        })
    }

    /// Looks a family up by config identifier.
    pub fn by_id(id: &str) -> Result<Self> {
        match id {
            "gaussian" => Ok(Self::gaussian()),
            "bernoulli" => Ok(Self::bernoulli()),
            _ => {
                if let Some(k) = id.strip_prefix("product_gaussian:") {
                    let dim = k.parse().map_err(|_| invalid(format!("bad dimension in `{id}`")))?;
                    return Self::product_gaussian(dim);
                }
                Err(Error::UnknownId {
                    kind: "family",
                    id: id.to_string(),
                    valid: "gaussian, bernoulli, product_gaussian:<k>".into(),
                })
            }
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.kind.id()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn param_set(&self) -> &ParamSet {
        &self.param_set
    }

    pub fn is_gaussian_location(&self) -> bool {
        self.kind == FamilyKind::Gaussian
    }

    /// φ(x); the identity for every built-in family.
    #[inline]
    pub fn suff_stat(&self, x: f64) -> f64 {
        x
    }

    pub fn mean_link(&self, theta: f64) -> f64 {
        self.kind.mean_link(theta)
    }

    pub fn theta_of(&self, mu: f64) -> f64 {
        self.kind.theta_of(mu)
    }

    pub fn fisher(&self, theta: &[f64]) -> Vec<f64> {
        self.kind.fisher(theta)
    }

    pub fn check_mean(&self, mu: &[f64]) -> Result<()> {
        if self.param_set.contains(mu) {
            Ok(())
        } else {
            Err(Error::OutsideParameterSet {
                mu: mu.to_vec(),
                set: self.param_set.to_string(),
            })
        }
    }

    /// Draws one scalar observation at mean `mu` (`k = 1` families).
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> f64 {
        match self.kind {
            FamilyKind::Bernoulli => {
                if rng.gen::<f64>() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            _ => mu + rng.sample::<f64, _>(StandardNormal),
        }
    }

    /// Draws one observation of any dimension into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, mu: &[f64], rng: &mut R, out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(mu) {
            *o = self.sample(*m, rng);
        }
    }
}

/// `f(n) = 1` for `n ∈ {1, 2}` and `ln(ln n)/n` otherwise.
pub fn rate_f(n: u64) -> f64 {
    if n <= 2 {
        1.0
    } else {
        let x = n as f64;
        x.ln().ln() / x
    }
}

/// Normalizing rates `n ↦ g(n) > 0` selectable from configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rate {
    /// `f_loglog`: [`rate_f`].
    LogLog,
    /// `g_1_over_n`: `1/n`.
    OneOverN,
    /// `g_log_over_n`: `ln n / n` for `n ≥ 3`, `1` below.
    LogOverN,
    /// `one`: constant 1, the raw loss.
    One,
}

impl Rate {
    pub const ALL: [Rate; 4] = [Rate::LogLog, Rate::OneOverN, Rate::LogOverN, Rate::One];

    pub fn id(&self) -> &'static str {
        match self {
            Rate::LogLog => "f_loglog",
            Rate::OneOverN => "g_1_over_n",
            Rate::LogOverN => "g_log_over_n",
            Rate::One => "one",
        }
    }

    pub fn by_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.id() == id)
            .ok_or_else(|| Error::UnknownId {
                kind: "rate",
                id: id.to_string(),
                valid: Self::ALL.map(|r| r.id()).join(", "),
            })
    }

    #[inline]
    pub fn eval(&self, n: u64) -> f64 {
        match self {
            Rate::LogLog => rate_f(n),
            Rate::OneOverN => 1.0 / n as f64,
            Rate::LogOverN => {
                if n <= 2 {
                    1.0
                } else {
                    (n as f64).ln() / n as f64
                }
            }
            Rate::One => 1.0,
        }
    }

    /// `[g(1), …, g(horizon)]`, index `n − 1`.
    pub fn table(&self, horizon: usize) -> Vec<f64> {
        (1..=horizon as u64).map(|n| self.eval(n)).collect()
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// How [`envelope_check`] evaluates the expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeMethod {
    /// Closed-form moment generating function.
    Exact,
    /// Sample mean over this many draws.
    MonteCarlo { reps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    /// Estimate of `E exp(ηᵀ(φ(X) − μ))`.
    pub estimate: f64,
    /// `exp(σ ηᵀη / 2)`.
    pub bound: f64,
    /// Monte Carlo standard error over the estimate; 0 for exact evaluation.
    pub rel_error: f64,
    pub pass: bool,
}

/// Tests the sub-Gaussian envelope at one `(μ, η)`.
///
/// Passes iff `estimate ≤ bound · (1 + 3·rel_error)`.
pub fn envelope_check<R: Rng + ?Sized>(
    family: &FamilySpec,
    mu: &[f64],
    eta: &[f64],
    method: EnvelopeMethod,
    rng: &mut R,
) -> Result<EnvelopeCheck> {
    if eta.len() != family.dim() {
        return Err(invalid("eta dimension does not match the family"));
    }
    family.check_mean(mu)?;
    let norm_sq: f64 = eta.iter().map(|e| e * e).sum();
    // relative slack so that boundary points such as η = 0.1, δ = 0.01 are accepted
    if norm_sq > family.delta * (1.0 + 1e-12) {
        return Err(Error::EtaOutsideBall {
            norm_sq,
            delta: family.delta,
        });
    }
    let bound = (family.sigma * norm_sq / 2.0).exp();
    let (estimate, rel_error) = match method {
        EnvelopeMethod::Exact => (family.kind.centered_log_mgf(mu, eta).exp(), 0.0),
        EnvelopeMethod::MonteCarlo { reps } => {
            if reps < 2 {
                return Err(invalid("Monte Carlo envelope check needs at least 2 draws"));
            }
            let mut x = vec![0.0; family.dim()];
            let mut st = RunningStats::new();
            for _ in 0..reps {
                family.sample_into(mu, rng, &mut x);
                let dot: f64 = eta
                    .iter()
                    .zip(x.iter().zip(mu))
                    .map(|(e, (xi, m))| e * (family.suff_stat(*xi) - m))
                    .sum();
                st.push(dot.exp());
            }
            (st.mean(), st.std_error() / st.mean())
        }
    };
    Ok(EnvelopeCheck {
        estimate,
        bound,
        rel_error,
        pass: estimate <= bound * (1.0 + 3.0 * rel_error),
    })
}

/// `σ` as the supremum of the Fisher information over the canonical set
/// `θ(M)` enlarged by `max(δ, √δ)`.
///
/// The supremum is taken on an equispaced grid that is doubled until the
/// maximum changes by less than 1% relative.
pub fn sigma_of(kind: FamilyKind, set: &ParamSet, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if set.dim() != kind.dim() {
        return Err(invalid("parameter set dimension does not match the family"));
    }
    if kind.fisher_is_constant() {
        let zero = vec![0.0; kind.dim()];
        return Ok(kind.fisher_sup(&zero));
    }
    let (dom_lo, dom_hi) = kind.mean_domain();
    let (lo, hi) = (set.lower[0], set.upper[0]);
    if !(lo > dom_lo && hi < dom_hi) {
        return Err(invalid(format!(
            "parameter set [{lo}, {hi}] is not strictly inside the interior of ({dom_lo}, {dom_hi})"
        )));
    }
    let radius = delta.max(delta.sqrt());
    let t_lo = kind.theta_of(lo) - radius;
    let t_hi = kind.theta_of(hi) + radius;
    if !(t_lo.is_finite() && t_hi.is_finite()) {
        return Err(invalid("enlarged canonical set leaves the canonical domain"));
    }
    let grid_max = |points: usize| -> f64 {
        (0..=points)
            .map(|j| {
                let t = t_lo + (t_hi - t_lo) * j as f64 / points as f64;
                kind.fisher_sup(&[t])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut points = 16;
    let mut prev = grid_max(points);
    while points < (1 << 22) {
        points *= 2;
        let next = grid_max(points);
        let change = (next - prev).abs() / next;
        prev = next;
        if change < 0.01 {
            break;
        }
    }
    Ok(prev)
}
