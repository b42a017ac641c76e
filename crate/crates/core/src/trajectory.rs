//! Seeded streams of sufficient-statistic values with running sums.

use rand::Rng;

use crate::model::FamilySpec;
use crate::numeric::CompensatedSum;

/// Scalar sufficient statistics `φ(x₁), φ(x₂), …` and their compensated
/// cumulative sums.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    values: Vec<f64>,
    /// `sums[m] = φ(x₁) + … + φ(x_m)`, with `sums[0] = 0`.
    sums: Vec<f64>,
    acc: CompensatedSum,
    truth: Option<f64>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut sums = Vec::with_capacity(n + 1);
        sums.push(0.0);
        Self {
            values: Vec::with_capacity(n),
            sums,
            acc: CompensatedSum::new(),
            truth: None,
        }
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut t = Self::with_capacity(values.len());
        values.iter().for_each(|&v| t.push(v));
        t
    }

    /// Draws `n` observations at mean `mu`.
    pub fn sample<R: Rng + ?Sized>(family: &FamilySpec, mu: f64, n: usize, rng: &mut R) -> Self {
        let mut t = Self::with_capacity(n);
        t.extend_sampled(family, mu, n, rng);
        t
    }

    pub fn clear(&mut self) {
        self.values.clear();
        self.sums.truncate(1);
        self.acc = CompensatedSum::new();
        self.truth = None;
    }

    /// Keeps the first `n` observations.
    pub fn truncate(&mut self, n: usize) {
        if n >= self.len() {
            return;
        }
        self.values.truncate(n);
        self.sums.truncate(n + 1);
        self.acc = CompensatedSum::new();
        self.acc.add(self.sums[n]);
    }

    #[inline]
    pub fn push(&mut self, phi: f64) {
        self.values.push(phi);
        self.acc.add(phi);
        self.sums.push(self.acc.value());
    }

    /// Appends draws until the trajectory has length `n`.
    pub fn extend_sampled<R: Rng + ?Sized>(&mut self, family: &FamilySpec, mu: f64, n: usize, rng: &mut R) {
        self.values.reserve(n.saturating_sub(self.len()));
        while self.len() < n {
            let x = family.sample(mu, rng);
            self.push(family.suff_stat(x));
        }
    }

    /// Records the data-generating mean. Only the cheating oracle
    /// estimator ever reads it.
    pub fn set_truth(&mut self, mu: Option<f64>) {
        self.truth = mu;
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// View of the first `n` observations.
    #[inline]
    pub fn prefix(&self, n: usize) -> Prefix<'_> {
        assert!(n <= self.len(), "prefix {n} longer than trajectory {}", self.len());
        Prefix {
            values: &self.values[..n],
            sums: &self.sums[..=n],
            truth: self.truth,
        }
    }

    pub fn full(&self) -> Prefix<'_> {
        self.prefix(self.len())
    }
}

/// The data `x¹…xⁿ` an estimator or stopping rule may look at.
#[derive(Debug, Clone, Copy)]
pub struct Prefix<'a> {
    values: &'a [f64],
    sums: &'a [f64],
    truth: Option<f64>,
}

impl<'a> Prefix<'a> {
    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    /// `φ(x₁) + … + φ(x_m)` for `m ≤ len`.
    #[inline]
    pub fn sum_first(&self, m: usize) -> f64 {
        self.sums[m]
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.sums[self.len()]
    }

    /// Shorter view of the same data.
    #[inline]
    pub fn head(&self, m: usize) -> Prefix<'a> {
        Prefix {
            values: &self.values[..m],
            sums: &self.sums[..=m],
            truth: self.truth,
        }
    }

    pub fn truth(&self) -> Option<f64> {
        self.truth
    }
}
