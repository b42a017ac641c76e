//! Stopping rules against brute-force scans written independently of the
//! library, plus measurability and cap-hit monotonicity.

use proptest::prelude::*;
use timerobust::adversaries::StoppingRule;
use timerobust::estimators::{Estimator, EstimatorKind};
use timerobust::risk::{weak_risk, RiskConfig};
use timerobust::rng::{replicate_rng, Substream};
use timerobust::{FamilySpec, Rate, Trajectory};

fn f(n: usize) -> f64 {
    if n <= 2 {
        1.0
    } else {
        (n as f64).ln().ln() / n as f64
    }
}

/// Posterior mean under a standard normal prior, from scratch.
fn shrunk(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / (xs.len() as f64 + 1.0)
}

/// First n in (n0, cap) where `hit(n)` holds, else cap.
fn scan(n0: usize, cap: usize, hit: impl Fn(usize) -> bool) -> usize {
    (n0 + 1..cap).find(|&n| hit(n)).unwrap_or(cap)
}

fn gaussian_path(seed: u64, rep: u64, len: usize) -> Trajectory {
    let mut rng = replicate_rng(seed, Substream::Observations, rep);
    Trajectory::sample(&FamilySpec::gaussian(), 0.0, len, &mut rng)
}

#[test]
fn lil_stop_matches_scan() {
    let fam = FamilySpec::gaussian();
    let (c, n0, cap) = (0.1, 27, 3000);
    let rule = StoppingRule::lil(c, n0, cap).unwrap();
    for rep in 0..40 {
        let mut traj = gaussian_path(11, rep, cap);
        let xs = traj.values().to_vec();
        let expect = scan(n0, cap, |n| shrunk(&xs[..n]).powi(2) >= c * f(n));
        let mut rng = replicate_rng(99, Substream::Resample, rep);
        let out = rule.run(&fam, 0.0, Some(0.0), &mut traj, &mut rng).unwrap();
        assert_eq!(out.tau, expect, "rep {rep}");
        assert_eq!(out.triggered, expect < cap);
    }
}

#[test]
fn gap_stop_matches_scan() {
    let fam = FamilySpec::gaussian();
    let (c, n0, cap) = (0.5, 27, 2000);
    let est = EstimatorKind::by_id("offset:1:mle").unwrap();
    let rule = StoppingRule::gap(est.clone(), c, n0, cap).unwrap();
    let mut triggered = 0;
    for rep in 0..40 {
        let mut traj = gaussian_path(12, rep, cap);
        let xs = traj.values().to_vec();
        let expect = scan(n0, cap, |n| {
            let t = Trajectory::from_values(&xs[..n]);
            (shrunk(&xs[..n]) - est.estimate(&t.full()).unwrap()).powi(2) >= 0.5 * c * f(n)
        });
        let mut rng = replicate_rng(99, Substream::Resample, rep);
        let out = rule.run(&fam, 0.0, None, &mut traj, &mut rng).unwrap();
        assert_eq!(out.tau, expect, "rep {rep}");
        triggered += usize::from(out.triggered);
    }
    assert!(triggered > 0, "an offset estimator should trip the gap rule");
}

#[test]
fn capped_stop_matches_joint_scan() {
    let fam = FamilySpec::gaussian();
    let (c, n0, n1) = (0.05, 10, 1500);
    let est = EstimatorKind::by_id("offset:0.5:mle").unwrap();
    let rule = StoppingRule::capped(Some(est.clone()), c, n0, n1).unwrap();
    let (mut joint, mut hits) = (0, 0);
    for rep in 0..60 {
        let mut traj = gaussian_path(13, rep, n1);
        let xs = traj.values().to_vec();
        let expect = scan(n0, n1, |n| {
            let t = Trajectory::from_values(&xs[..n]);
            let pm = shrunk(&xs[..n]);
            pm.powi(2) >= c * f(n) && (pm - est.estimate(&t.full()).unwrap()).powi(2) >= 0.5 * c * f(n)
        });
        let mut rng = replicate_rng(99, Substream::Resample, rep);
        let out = rule.run(&fam, 0.0, Some(0.0), &mut traj, &mut rng).unwrap();
        assert_eq!(out.tau, expect, "rep {rep}");
        joint += usize::from(out.triggered);
        hits += usize::from(!out.triggered);
    }
    assert_eq!(joint + hits, 60);
}

#[test]
fn rules_needing_the_mean_refuse_to_run_blind() {
    let fam = FamilySpec::gaussian();
    let rule = StoppingRule::lil(0.1, 27, 100).unwrap();
    let mut rng = replicate_rng(1, Substream::Observations, 0);
    assert!(rule.run(&fam, 0.0, None, &mut Trajectory::new(), &mut rng).is_err());
    let cfg = RiskConfig::new(10, 1);
    assert!(weak_risk(&fam, 0.0, &EstimatorKind::Mle, &rule, Rate::LogLog, false, &cfg).is_err());
}

#[test]
fn rule_ids_round_trip() {
    for id in ["fixed:10", "lil:0.1,27,100000", "capped:0.2,5,50"] {
        assert_eq!(StoppingRule::by_id(id).unwrap().to_string(), id);
    }
    assert_eq!(StoppingRule::by_id("lil:0.1").unwrap().to_string(), "lil:0.1,27,100000");
    assert!(StoppingRule::by_id("lil:0.1,50,40").is_err());
    assert!(StoppingRule::by_id("nope:1").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The stopping decision at τ depends only on the first τ observations:
    /// replacing everything after τ leaves τ unchanged.
    #[test]
    fn stopping_time_ignores_the_future(seed in any::<u64>(), c in 0.02f64..0.5, mu in -0.5f64..0.5) {
        let fam = FamilySpec::gaussian();
        let rule = StoppingRule::lil(c, 5, 800).unwrap();
        let mut traj = Trajectory::new();
        let mut rng = replicate_rng(seed, Substream::Observations, 0);
        let first = rule.run(&fam, mu, Some(mu), &mut traj, &mut rng).unwrap();
        traj.truncate(first.tau);
        let mut other = replicate_rng(seed ^ 0x5555, Substream::Resample, 7);
        traj.extend_sampled(&fam, mu + 3.0, 800, &mut other);
        let again = rule.run(&fam, mu, Some(mu), &mut traj, &mut other).unwrap();
        prop_assert_eq!(first, again);
    }

    /// A later cap can only turn cap hits into triggers.
    #[test]
    fn cap_hits_shrink_as_the_cap_grows(seed in any::<u64>(), c in 0.05f64..1.0, small in 40usize..200, extra in 1usize..400) {
        let fam = FamilySpec::gaussian();
        let cfg = RiskConfig::new(24, seed);
        let pm = EstimatorKind::PosteriorMean;
        let short = StoppingRule::lil(c, 27, small).unwrap();
        let long = StoppingRule::lil(c, 27, small + extra).unwrap();
        let a = weak_risk(&fam, 0.0, &pm, &short, Rate::LogLog, true, &cfg).unwrap();
        let b = weak_risk(&fam, 0.0, &pm, &long, Rate::LogLog, true, &cfg).unwrap();
        prop_assert!(b.cap_hits <= a.cap_hits);
    }
}
