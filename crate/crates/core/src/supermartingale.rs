//! Finite-time law-of-the-iterated-logarithm test supermartingale.
//!
//! For centered partial sums `Sₙ = Σ (φ(Xᵢ) − μ)` the process
//!
//! ```text
//!     Zₙ = Σ_{i≥1} γᵢ exp(ηᵢ Sₙ − n σ ηᵢ² / 2),   Z₀ = 1,
//!     γᵢ = 1 / (i(i+1)),   ηᵢ = c₀ √(ln(i(i+1)) / eⁱ),
//! ```
//!
//! is a test supermartingale whenever the family satisfies the envelope
//! `E exp(η(φ(X) − μ)) ≤ exp(σ η² / 2)` for `η² ≤ δ`. Its running supremum
//! yields a p-value `1 / sup Zₙ` and an E-value `sup √Zₙ / 2`.
//!
//! For `k > 1` there is one such mixture per sign vector `ρ ∈ {−1, 1}ᵏ` with
//! `ρ₁ = 1`, applied to `T_{n,ρ} = ρᵀSₙ` with variance factor `σk`.
//!
//! # Evaluation
//!
//! The series is summed exactly for `i ≤ I` and the tail `i > I` is
//! evaluated through a degree-6 Taylor expansion of `exp` using precomputed
//! tail moments `Σ_{i>I} γᵢ ηᵢᵖ`. `I` is at least `⌈ln n⌉ + 8` and is
//! increased until every tail exponent satisfies `|xᵢ| ≤ 0.05`, which bounds
//! the relative error of the tail (and hence of `Zₙ`) by
//! `0.05⁷/7! · e^{0.1} < 2·10⁻¹³`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimators::Estimator;
use crate::model::{rate_f, FamilySpec, Rate};
use crate::numeric::{CompensatedSum, RunningStats};
use crate::risk::{run_blocks, LossAccum, RiskConfig};
use crate::rng::{replicate_rng, Substream};
use crate::trajectory::Prefix;

const TABLE_LEN: usize = 240;
const TAYLOR_ORDER: usize = 6;
const MAX_POW: usize = 2 * TAYLOR_ORDER;
const TAIL_RADIUS: f64 = 0.05;
const MAX_DIM: usize = 16;

/// `C(m, j) / m!` for the tail expansion.
const TAYLOR_COEF: [[f64; TAYLOR_ORDER + 1]; TAYLOR_ORDER + 1] = {
    let mut out = [[0.0; TAYLOR_ORDER + 1]; TAYLOR_ORDER + 1];
    let mut m = 0;
    let mut fact = 1.0;
    while m <= TAYLOR_ORDER {
        if m > 0 {
            fact *= m as f64;
        }
        let mut binom = 1.0;
        let mut j = 0;
        while j <= m {
            if j > 0 {
                binom = binom * (m - j + 1) as f64 / j as f64;
            }
            out[m][j] = binom / fact;
            j += 1;
        }
        m += 1;
    }
    out
};

/// Prior table at `c₀ = 1`; index `i` runs over `1..=TABLE_LEN`.
struct PriorTable {
    base_eta: Vec<f64>,
    log_gamma: Vec<f64>,
    /// `tail[j][p] = Σ_{j < i ≤ TABLE_LEN} γᵢ base_etaᵢᵖ` for `p ≥ 1`;
    /// `tail[j][0] = 1/(j+1)` exactly.
    tail: Vec<[f64; MAX_POW + 1]>,
}

fn table() -> &'static PriorTable {
    static TABLE: OnceLock<PriorTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut base_eta = vec![0.0; TABLE_LEN + 1];
        let mut log_gamma = vec![f64::NEG_INFINITY; TABLE_LEN + 1];
        for i in 1..=TABLE_LEN {
            let ii = (i * (i + 1)) as f64;
            base_eta[i] = ii.ln().sqrt() * (-(i as f64) / 2.0).exp();
            log_gamma[i] = -ii.ln();
        }
        let mut tail = vec![[0.0; MAX_POW + 1]; TABLE_LEN + 1];
        for j in (0..TABLE_LEN).rev() {
            let i = j + 1;
            let gamma = 1.0 / (i * (i + 1)) as f64;
            let mut row = tail[i];
            let mut pow = 1.0;
            for entry in row.iter_mut().skip(1) {
                pow *= base_eta[i];
                *entry += gamma * pow;
            }
            tail[j] = row;
        }
        for (j, row) in tail.iter_mut().enumerate() {
            row[0] = 1.0 / (j + 1) as f64;
        }
        PriorTable {
            base_eta,
            log_gamma,
            tail,
        }
    })
}

/// `(γᵢ, ηᵢ)` of the discrete LIL prior.
pub fn lil_prior(i: usize, c0: f64) -> Result<(f64, f64)> {
    if i == 0 {
        return Err(invalid("prior index starts at 1"));
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(invalid(format!("c0 must be positive, got {c0}")));
    }
    let ii = i as f64 * (i as f64 + 1.0);
    let gamma = 1.0 / ii;
    let eta = c0 * (ii.ln() / (i as f64).exp()).sqrt();
    Ok((gamma, eta))
}

/// Which sign of the prior the reported E-value and p-value use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `+ηᵢ`, large when `Sₙ` drifts upward.
    Plus,
    /// `−ηᵢ`.
    Minus,
}

/// Parameters of the discrete mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    c0: f64,
    sigma: f64,
    delta: f64,
    dim: usize,
    side: Side,
}

impl MixtureSpec {
    /// Validates `c₀ < δ/k` and `k·η₁² ≤ δ`, the latter being the condition
    /// that keeps every atom inside the envelope ball.
    pub fn new(c0: f64, sigma: f64, delta: f64, dim: usize, side: Side) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!(
                "sigma and delta must be positive, got {sigma}, {delta}"
            )));
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if !(c0 > 0.0) {
            return Err(invalid(format!("c0 must be positive, got {c0}")));
        }
        let k = dim as f64;
        if c0 >= delta / k {
            return Err(invalid(format!("c0 = {c0} must be below delta/k = {}", delta / k)));
        }
        let (_, eta1) = lil_prior(1, c0)?;
        if k * eta1 * eta1 > delta {
            return Err(invalid(format!(
                "c0 = {c0} puts the first atom outside the ball: k*eta_1^2 = {} > delta = {delta}",
                k * eta1 * eta1
            )));
        }
        Ok(Self {
            c0,
            sigma,
            delta,
            dim,
            side,
        })
    }

    /// `0.99 · min(δ/k, √(eδ/(k ln 2)))`.
    pub fn default_c0(delta: f64, dim: usize) -> f64 {
        let k = dim as f64;
        0.99 * (delta / k).min((std::f64::consts::E * delta / (k * std::f64::consts::LN_2)).sqrt())
    }

    /// Mixture matched to a family's `(σ, δ)` with the default `c₀`.
    pub fn for_family(family: &FamilySpec) -> Result<Self> {
        let c0 = Self::default_c0(family.delta(), family.dim());
        Self::new(c0, family.sigma(), family.delta(), family.dim(), Side::Plus)
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// The sign vectors `P`, `ρ₁ = 1`, with the all-ones vector first.
    pub fn sign_vectors(&self) -> Vec<Vec<f64>> {
        let count = 1usize << (self.dim - 1);
        (0..count)
            .map(|r| {
                (0..self.dim)
                    .map(|j| if j > 0 && (r >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect()
    }

    /// Number of mixtures maintained: both signs for every `ρ ∈ P`.
    pub fn components(&self) -> usize {
        1 << self.dim
    }

    fn reported(&self) -> usize {
        match self.side {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }
}

/// `ln Zₙ` for the projected sum `t` at step `n`, for both `+t` and `−t`,
/// together with the number of explicitly summed atoms.
///
/// `sigma_eff` is `σ` for `k = 1` and `σk` otherwise. At least
/// `min_explicit` atoms are summed directly.
pub fn log_mixture_pair(t: f64, n: u64, sigma_eff: f64, c0: f64, min_explicit: usize) -> Result<(f64, f64, usize)> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("partial sum {t}")));
    }
    let tab = table();
    let half_var = n as f64 * sigma_eff / 2.0;
    let abs_t = t.abs();

    let floor = ((n.max(1) as f64).ln().ceil() as usize + 8).max(min_explicit);
    let mut explicit = floor.min(TABLE_LEN - 1);
    loop {
        let eta = c0 * tab.base_eta[explicit + 1];
        if eta * abs_t + half_var * eta * eta <= TAIL_RADIUS {
            break;
        }
        explicit += 1;
        if explicit >= TABLE_LEN - 1 {
            return Err(Error::NonFinite(format!(
                "mixture tail does not converge for |t| = {abs_t}, n = {n}"
            )));
        }
    }

    let mut max_p = f64::NEG_INFINITY;
    let mut max_m = f64::NEG_INFINITY;
    for i in 1..=explicit {
        let eta = c0 * tab.base_eta[i];
        let base = tab.log_gamma[i] - half_var * eta * eta;
        let lin = eta * t;
        max_p = max_p.max(base + lin);
        max_m = max_m.max(base - lin);
    }

    // Tail: Σ_{m ≤ 6} (η t − η² s)ᵐ / m! = Σ_p (even_p + odd_p) ηᵖ with
    // s = n σ / 2; odd_p collects the terms odd in t and flips sign for −t.
    let mut t_pow = [1.0f64; TAYLOR_ORDER + 1];
    let mut s_pow = [1.0f64; TAYLOR_ORDER + 1];
    for k in 1..=TAYLOR_ORDER {
        t_pow[k] = t_pow[k - 1] * t;
        s_pow[k] = s_pow[k - 1] * -half_var;
    }
    let mut even = [0.0f64; MAX_POW + 1];
    let mut odd = [0.0f64; MAX_POW + 1];
    for m in 0..=TAYLOR_ORDER {
        for j in 0..=m {
            let term = TAYLOR_COEF[m][j] * t_pow[m - j] * s_pow[j];
            if (m - j) % 2 == 1 {
                odd[m + j] += term;
            } else {
                even[m + j] += term;
            }
        }
    }
    let row = &tab.tail[explicit];
    let mut tail_p = 0.0;
    let mut tail_m = 0.0;
    let mut c_pow = 1.0;
    for p in 0..=MAX_POW {
        let w = c_pow * row[p];
        tail_p += (even[p] + odd[p]) * w;
        tail_m += (even[p] - odd[p]) * w;
        c_pow *= c0;
    }

    let (ltail_p, ltail_m) = (tail_p.ln(), tail_m.ln());
    let top_p = max_p.max(ltail_p);
    let top_m = max_m.max(ltail_m);
    let mut acc_p = (ltail_p - top_p).exp();
    let mut acc_m = (ltail_m - top_m).exp();
    for i in 1..=explicit {
        let eta = c0 * tab.base_eta[i];
        let base = tab.log_gamma[i] - half_var * eta * eta;
        let lin = eta * t;
        // atoms more than e⁻⁴⁰ below the peak are below rounding
        let (dp, dm) = (base + lin - top_p, base - lin - top_m);
        if dp > -40.0 {
            acc_p += dp.exp();
        }
        if dm > -40.0 {
            acc_m += dm.exp();
        }
    }
    let lp = top_p + acc_p.ln();
    let lm = top_m + acc_m.ln();
    Ok((lp, lm, explicit))
}

/// Running state of all mixtures for one trajectory.
#[derive(Debug, Clone)]
pub struct SupermartingaleState {
    spec: MixtureSpec,
    mu: Vec<f64>,
    n: u64,
    sums: Vec<CompensatedSum>,
    signs: Vec<Vec<f64>>,
    log_z: Vec<f64>,
    log_z_sup: Vec<f64>,
    explicit_terms: usize,
}

impl SupermartingaleState {
    /// State at `n = 0`, where every mixture equals 1.
    pub fn new(spec: MixtureSpec, mu: &[f64]) -> Result<Self> {
        if mu.len() != spec.dim {
            return Err(invalid(format!(
                "mean has dimension {}, mixture has {}",
                mu.len(),
                spec.dim
            )));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite(format!("mean {mu:?}")));
        }
        let comps = spec.components();
        Ok(Self {
            signs: spec.sign_vectors(),
            spec,
            mu: mu.to_vec(),
            n: 0,
            sums: vec![CompensatedSum::new(); spec.dim],
            log_z: vec![0.0; comps],
            log_z_sup: vec![0.0; comps],
            explicit_terms: 0,
        })
    }

    /// Advances by one observation of sufficient statistics `phi`.
    pub fn update(&mut self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.spec.dim {
            return Err(invalid("observation dimension does not match the mixture"));
        }
        if let Some(x) = phi.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("observation {x}")));
        }
        for ((s, x), m) in self.sums.iter_mut().zip(phi).zip(&self.mu) {
            s.add(x - m);
        }
        self.n += 1;
        let sigma_eff = self.spec.sigma * self.spec.dim as f64;
        for r in 0..self.signs.len() {
            let t = self.t_rho(r);
            let (lp, lm, used) = log_mixture_pair(t, self.n, sigma_eff, self.spec.c0, 0)?;
            self.explicit_terms = used;
            for (idx, v) in [(2 * r, lp), (2 * r + 1, lm)] {
                self.log_z[idx] = v;
                if v > self.log_z_sup[idx] {
                    self.log_z_sup[idx] = v;
                }
            }
        }
        Ok(())
    }

    /// Scalar convenience for `k = 1`.
    #[inline]
    pub fn update_scalar(&mut self, phi: f64) -> Result<()> {
        self.update(&[phi])
    }

    pub fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `Sₙ`, one entry per coordinate.
    pub fn sums(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s.value()).collect()
    }

    /// `T_{n,ρ} = ρᵀSₙ` for the `r`-th sign vector.
    pub fn t_rho(&self, r: usize) -> f64 {
        self.signs[r].iter().zip(&self.sums).map(|(p, s)| p * s.value()).sum()
    }

    /// `Tₙ = Σ |Sₙʲ|`.
    pub fn t_n(&self) -> f64 {
        self.sums.iter().map(|s| s.value().abs()).sum()
    }

    /// Atoms summed explicitly at the last update.
    pub fn explicit_terms(&self) -> usize {
        self.explicit_terms
    }

    /// `ln Z` of every mixture; index `2r` is `+ρ_r`, `2r + 1` is `−ρ_r`.
    pub fn log_z_components(&self) -> &[f64] {
        &self.log_z
    }

    pub fn log_z_sup_components(&self) -> &[f64] {
        &self.log_z_sup
    }

    /// `ln Zₙ` of the reported mixture (all-ones `ρ`, configured side).
    pub fn log_z(&self) -> f64 {
        self.log_z[self.spec.reported()]
    }

    pub fn z(&self) -> f64 {
        self.log_z().exp()
    }

    /// `ln sup_{m ≤ n} Z_m`, including `Z₀ = 1`.
    pub fn log_z_sup(&self) -> f64 {
        self.log_z_sup[self.spec.reported()]
    }

    /// `sup_{m ≤ n} √Z_m / 2`.
    pub fn evalue(&self) -> f64 {
        evalue_from_log_sup(self.log_z_sup())
    }

    /// `1 / sup_{m ≤ n} Z_m`, clamped to `(0, 1]`.
    pub fn pvalue(&self) -> f64 {
        pvalue_from_log_sup(self.log_z_sup())
    }

    pub fn evalue_of(&self, component: usize) -> f64 {
        evalue_from_log_sup(self.log_z_sup[component])
    }

    pub fn pvalue_of(&self, component: usize) -> f64 {
        pvalue_from_log_sup(self.log_z_sup[component])
    }
}

fn evalue_from_log_sup(log_sup: f64) -> f64 {
    (0.5 * log_sup).exp() / 2.0
}

fn pvalue_from_log_sup(log_sup: f64) -> f64 {
    (-log_sup).exp().clamp(f64::MIN_POSITIVE, 1.0)
}

/// Constants of the finite-time LIL bound for dimension `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LilConstants {
    pub k: usize,
    pub sigma: f64,
    pub delta: f64,
    /// `min(2√2 δ/k, 1/√K₂)`.
    pub c: f64,
    /// `1.5 + (k+1) ln 2`.
    pub k1: f64,
    /// `18 σ k`.
    pub k2: f64,
    /// `(2K₂c² + 3) / (2c)`, the level defining the event `A_c`.
    pub threshold: f64,
}

impl LilConstants {
    /// `2c⁻² e^{K₁ + K₂c²} + c⁻¹(2K₂c² + 3)/2`, bounding
    /// `E sup_{n>27} ‖Sₙ‖² / (n ln ln n)`.
    pub fn tail_bound(&self) -> f64 {
        let c2 = self.c * self.c;
        2.0 / c2 * (self.k1 + self.k2 * c2).exp() + (2.0 * self.k2 * c2 + 3.0) / (2.0 * self.c)
    }

    /// `σk Σ_{m ≤ 27} 1/(m f(m))`, bounding `E sup_{m ≤ 27} ‖μ − μ̂_m‖² / f(m)`
    /// for the MLE through `E‖S_m‖² ≤ σkm`.
    pub fn small_n_bound(&self) -> f64 {
        let s: f64 = (1..=27u64).map(|m| 1.0 / (m as f64 * rate_f(m))).sum();
        self.sigma * self.k as f64 * s
    }

    /// Ceiling on the strongly adversarial MLE risk at rate `f`.
    pub fn ceiling(&self) -> f64 {
        self.tail_bound() + self.small_n_bound()
    }
}

pub fn lil_constants(k: usize, sigma: f64, delta: f64) -> Result<LilConstants> {
    if k == 0 || !(sigma > 0.0) || !(delta > 0.0) {
        return Err(invalid(format!(
            "k, sigma, delta must be positive, got {k}, {sigma}, {delta}"
        )));
    }
    let kf = k as f64;
    let k1 = 1.5 + (kf + 1.0) * std::f64::consts::LN_2;
    let k2 = 18.0 * sigma * kf;
    let c = (2.0 * std::f64::consts::SQRT_2 * delta / kf).min(1.0 / k2.sqrt());
    let threshold = (2.0 * k2 * c * c + 3.0) / (2.0 * c);
    Ok(LilConstants {
        k,
        sigma,
        delta,
        c,
        k1,
        k2,
        threshold,
    })
}

/// `max_{1 ≤ n ≤ N} (μ − μ̂ₙ)² / g(n)` along one trajectory.
pub fn strong_sup_ratio(
    prefix: &Prefix<'_>,
    mu: f64,
    estimator: &dyn Estimator,
    rate: Rate,
    horizon: usize,
) -> Result<f64> {
    let rates = rate.table(horizon);
    let mut out = [0.0];
    sup_ratio_at(prefix, mu, estimator, &rates, &[horizon], &mut out)?;
    Ok(out[0])
}

/// Running `max_{n ≤ h} (μ − μ̂ₙ)²/g(n)` reported at each checkpoint `h`
/// (ascending). `rates[n−1] = g(n)`.
pub(crate) fn sup_ratio_at(
    prefix: &Prefix<'_>,
    mu: f64,
    estimator: &dyn Estimator,
    rates: &[f64],
    checkpoints: &[usize],
    out: &mut [f64],
) -> Result<()> {
    let horizon = *checkpoints.last().ok_or_else(|| invalid("no horizon given"))?;
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if prefix.len() < horizon || rates.len() < horizon {
        return Err(invalid(format!(
            "trajectory of length {} shorter than horizon {horizon}",
            prefix.len()
        )));
    }
    let mut sup = 0.0f64;
    let mut next = 0;
    for n in 1..=horizon {
        let est = estimator.estimate(&prefix.head(n))?;
        let ratio = (mu - est).powi(2) / rates[n - 1];
        if !ratio.is_finite() {
            return Err(Error::NonFinite(format!("loss ratio at n = {n}")));
        }
        sup = sup.max(ratio);
        while next < checkpoints.len() && checkpoints[next] == n {
            out[next] = sup;
            next += 1;
        }
    }
    Ok(())
}

/// Monte Carlo summary of the mixture at one checkpoint `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleRow {
    pub mu: f64,
    pub n: usize,
    pub mean_z: f64,
    pub se_z: f64,
    /// Mean of `sup_{m ≤ n} √Z_m / 2`.
    pub mean_evalue: f64,
    pub se_evalue: f64,
    /// `(α, P̂(p-value ≤ α))` for each requested level.
    pub pvalue_cdf: Vec<(f64, f64)>,
    pub reps: u64,
    pub seed: u64,
}

/// Simulates `cfg.reps` scalar trajectories at mean `mu`, tracks the reported
/// mixture of `spec` and summarizes `Zₙ`, the E-value and the p-value at each
/// strictly increasing checkpoint.
pub fn martingale_check(
    family: &FamilySpec,
    spec: &MixtureSpec,
    mu: f64,
    checkpoints: &[usize],
    alphas: &[f64],
    cfg: &RiskConfig,
) -> Result<Vec<MartingaleRow>> {
    if family.dim() != 1 || spec.dim() != 1 {
        return Err(invalid("martingale_check simulates scalar families"));
    }
    family.check_mean(&[mu])?;
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!(
            "checkpoints must be positive and strictly increasing, got {checkpoints:?}"
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(invalid(format!("significance level {a} outside [0, 1]")));
    }
    let horizon = *checkpoints.last().expect("checked non-empty");
    let width = 2 + alphas.len();
    let accs = run_blocks(
        cfg,
        || {
            (0..width * checkpoints.len())
                .map(|_| LossAccum::new(false))
                .collect::<Vec<_>>()
        },
        |accs, _traj, r| {
            let mut rng = replicate_rng(cfg.seed, Substream::Observations, r);
            let mut st = SupermartingaleState::new(*spec, &[mu])?;
            let mut next = 0;
            for n in 1..=horizon {
                let x = family.sample(mu, &mut rng);
                st.update_scalar(family.suff_stat(x))?;
                if n == checkpoints[next] {
                    let row = &mut accs[next * width..(next + 1) * width];
                    row[0].push(st.z(), true)?;
                    row[1].push(st.evalue(), true)?;
                    let p = st.pvalue();
                    for (acc, a) in row[2..].iter_mut().zip(alphas) {
                        acc.push(if p <= *a { 1.0 } else { 0.0 }, true)?;
                    }
                    next += 1;
                }
            }
            Ok(())
        },
    )?;
    Ok(checkpoints
        .iter()
        .zip(accs.chunks(width))
        .map(|(&n, row)| MartingaleRow {
            mu,
            n,
            mean_z: row[0].all.mean(),
            se_z: row[0].all.std_error(),
            mean_evalue: row[1].all.mean(),
            se_evalue: row[1].all.std_error(),
            pvalue_cdf: alphas
                .iter()
                .zip(&row[2..])
                .map(|(a, acc)| (*a, acc.all.mean()))
                .collect(),
            reps: row[0].all.count(),
            seed: cfg.seed,
        })
        .collect())
}

/// One-step conditional check: `E[Zₙ | history] ≤ Z_{n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalCheck {
    pub history_len: usize,
    pub z_prev: f64,
    pub mean_next: f64,
    pub se_next: f64,
    /// `mean_next ≤ z_prev · (1 + 3 · se_next / mean_next)`.
    pub pass: bool,
}

/// Draws a history of length `history_len` at `mu` from stream `(seed, 0)`,
/// then `draws` fresh next observations from the resampling stream, and
/// compares the mean of the resulting `Zₙ` with `Z_{n−1}`.
pub fn conditional_check(
    family: &FamilySpec,
    spec: &MixtureSpec,
    mu: f64,
    history_len: usize,
    draws: u64,
    seed: u64,
) -> Result<ConditionalCheck> {
    if draws < 2 {
        return Err(invalid("conditional check needs at least 2 draws"));
    }
    let mut rng = replicate_rng(seed, Substream::Observations, 0);
    let mut st = SupermartingaleState::new(*spec, &[mu])?;
    for _ in 0..history_len {
        let x = family.sample(mu, &mut rng);
        st.update_scalar(family.suff_stat(x))?;
    }
    let z_prev = st.z();
    let mut rng = replicate_rng(seed, Substream::Resample, 0);
    let mut stats = RunningStats::new();
    for _ in 0..draws {
        let mut next = st.clone();
        let x = family.sample(mu, &mut rng);
        next.update_scalar(family.suff_stat(x))?;
        stats.push(next.z());
    }
    let (mean_next, se_next) = (stats.mean(), stats.std_error());
    Ok(ConditionalCheck {
        history_len,
        z_prev,
        mean_next,
        se_next,
        pass: mean_next <= z_prev * (1.0 + 3.0 * se_next / mean_next),
    })
}
