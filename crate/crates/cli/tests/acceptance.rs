//! Acceptance suite. Runs every criterion at full scale and prints one
//! PASS/FAIL line each; exits non-zero if any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 4 5`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use timerobust::adversaries::StoppingRule;
use timerobust::estimators::{Estimator, EstimatorKind};
use timerobust::model::{rate_f, FamilySpec, Rate};
use timerobust::risk::{
    bayes_risk, standard_risk, strong_risk_profile, weak_risk, weighted_strong_risk_profile, RiskConfig,
};
use timerobust::rng::{child_seed, replicate_rng, Substream};
use timerobust::selection::{selection_probability, Aic, Bic};
use timerobust::supermartingale::{conditional_check, lil_constants, martingale_check, MixtureSpec};
use timerobust::Trajectory;

const SEED: u64 = 20_240_917;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn gauss() -> FamilySpec {
    FamilySpec::gaussian()
}

fn mixture() -> MixtureSpec {
    MixtureSpec::for_family(&gauss()).expect("default mixture is admissible")
}

/// E-value mean and p-value superuniformity share one set of runs.
fn evalue_runs() -> Vec<(f64, timerobust::supermartingale::MartingaleRow)> {
    [0.0, 1.0, -5.0]
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let cfg = RiskConfig::new(10_000, child_seed(SEED, i as u64 + 1));
            let rows = martingale_check(&gauss(), &mixture(), mu, &[10_000], &[0.01, 0.05, 0.1, 0.5], &cfg)
                .expect("simulation runs");
            (mu, rows.into_iter().next().expect("one checkpoint"))
        })
        .collect()
}

fn criterion_1(runs: &[(f64, timerobust::supermartingale::MartingaleRow)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (mu, row) in runs {
        let ok = row.mean_evalue <= 1.0 + 3.0 * row.se_evalue;
        pass &= ok;
        parts.push(format!(
            "mu={mu}: E[sup sqrt(Z)/2]={:.4}±{:.4}",
            row.mean_evalue, row.se_evalue
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_2(runs: &[(f64, timerobust::supermartingale::MartingaleRow)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (mu, row) in runs {
        let reps = row.reps as f64;
        let cells: Vec<String> = row
            .pvalue_cdf
            .iter()
            .map(|&(a, f)| {
                let ok = f <= a + 3.0 * (a * (1.0 - a) / reps).sqrt();
                pass &= ok;
                format!("F({a})={f:.4}")
            })
            .collect();
        parts.push(format!("mu={mu}: {}", cells.join(" ")));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &mu) in [0.0, 2.0, -7.0].iter().enumerate() {
        let cfg = RiskConfig::new(10_000, child_seed(SEED, 10 + i as u64));
        let rows = martingale_check(&gauss(), &mixture(), mu, &[1, 10, 100, 1000], &[], &cfg).expect("simulation runs");
        let worst = rows
            .iter()
            .map(|r| (r.mean_z - 1.0) / r.se_z)
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= rows.iter().all(|r| r.mean_z <= 1.0 + 3.0 * r.se_z);
        let means: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.mean_z)).collect();
        parts.push(format!("mu={mu}: E[Z_n]=[{}] max z-score {worst:.2}", means.join(", ")));
    }
    let mut cond_fail = 0;
    for h in 0..20u64 {
        let seed = child_seed(SEED, 100 + h);
        let mu = [0.0, 2.0, -7.0][h as usize % 3];
        let len = 1 + (child_seed(seed, 1) % 1000) as usize;
        let c = conditional_check(&gauss(), &mixture(), mu, len, 10_000, seed).expect("conditional check runs");
        if !c.pass {
            cond_fail += 1;
        }
    }
    pass &= cond_fail == 0;
    parts.push(format!("conditional: {}/20 histories pass", 20 - cond_fail));
    verdict(pass, parts.join("; "))
}

const HORIZONS: [usize; 3] = [1_000, 10_000, 100_000];

fn criterion_4() -> Verdict {
    let cfg = RiskConfig::new(1_000, child_seed(SEED, 4));
    let p = strong_risk_profile(&gauss(), 0.0, &EstimatorKind::Mle, Rate::LogLog, &HORIZONS, &cfg).expect("runs");
    let m: Vec<f64> = p.estimates.iter().map(|e| e.mean).collect();
    let ceiling = lil_constants(1, 1.0, gauss().delta())
        .expect("valid constants")
        .ceiling();
    let monotone = m.windows(2).all(|w| w[0] <= w[1]);
    let below = m.iter().all(|&x| x < ceiling);
    let (d1, d2) = (&p.increments[0], &p.increments[1]);
    let diminishing = d2.mean < d1.mean;
    verdict(
        monotone && below && diminishing,
        format!(
            "means {:.3}/{:.3}/{:.3} (se {:.3}/{:.3}/{:.3}), ceiling {ceiling:.1}, increments {:.3}±{:.3} then {:.3}±{:.3}",
            m[0],
            m[1],
            m[2],
            p.estimates[0].se,
            p.estimates[1].se,
            p.estimates[2].se,
            d1.mean,
            d1.se,
            d2.mean,
            d2.se
        ),
    )
}

fn criterion_5() -> Verdict {
    let cfg = RiskConfig::new(1_000, child_seed(SEED, 4));
    let p = strong_risk_profile(&gauss(), 0.0, &EstimatorKind::Mle, Rate::OneOverN, &HORIZONS, &cfg).expect("runs");
    let pass = p.increments.iter().all(|d| d.mean > 3.0 * d.se);
    let m: Vec<String> = p
        .estimates
        .iter()
        .map(|e| format!("{:.3}±{:.3}", e.mean, e.se))
        .collect();
    let d: Vec<String> = p
        .increments
        .iter()
        .map(|d| format!("{:.3}±{:.3}", d.mean, d.se))
        .collect();
    verdict(
        pass,
        format!("means {}; paired increments {}", m.join(" / "), d.join(", ")),
    )
}

fn criterion_6() -> Verdict {
    let family = gauss();
    let rule = StoppingRule::lil(0.1, 27, 100_000).expect("valid rule");
    let est = EstimatorKind::PosteriorMean;
    let reps = 1_000u64;
    let seed = child_seed(SEED, 6);
    let mut triggered = 0u64;
    let mut violations = 0u64;
    let mut traj = Trajectory::new();
    for r in 0..reps {
        traj.clear();
        let mut rng = replicate_rng(seed, Substream::Observations, r);
        let stop = rule
            .run(&family, 0.0, Some(0.0), &mut traj, &mut rng)
            .expect("rule runs");
        if stop.triggered {
            triggered += 1;
            let pm = est.estimate(&traj.prefix(stop.tau)).expect("estimate");
            if pm.powi(2) < 0.1 * rate_f(stop.tau as u64) {
                violations += 1;
            }
        }
    }
    let rate = triggered as f64 / reps as f64;
    let weak = weak_risk(
        &family,
        0.0,
        &est,
        &rule,
        Rate::LogLog,
        true,
        &RiskConfig::new(reps, seed),
    )
    .expect("runs");
    let pass = rate >= 0.5 && violations == 0 && weak.mean >= 0.1 * rate - 3.0 * weak.se;
    verdict(
        pass,
        format!(
            "trigger rate {rate:.3}, postcondition violations {violations}, weak risk {:.4}±{:.4} (cap hits {}, conditional {:.4})",
            weak.mean, weak.se, weak.cap_hits, weak.conditional_mean
        ),
    )
}

fn criterion_7() -> Verdict {
    let cfg = RiskConfig::new(1_000, child_seed(SEED, 7));
    let est = EstimatorKind::Dyadic(Box::new(EstimatorKind::Mle));
    let horizons = [1 << 10, 1 << 14, 1 << 17];
    let rows = weighted_strong_risk_profile(&gauss(), 0.0, &est, Rate::OneOverN, 1.0, &horizons, &cfg).expect("runs");
    let m: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        hi < 2.0 * lo,
        format!(
            "weighted sup means {:.4}/{:.4}/{:.4}, max/min {:.3}",
            m[0],
            m[1],
            m[2],
            hi / lo
        ),
    )
}

fn criterion_8() -> Verdict {
    let s = standard_risk(
        &gauss(),
        0.0,
        &EstimatorKind::Mle,
        Rate::One,
        10,
        &RiskConfig::new(100_000, child_seed(SEED, 8)),
    )
    .expect("runs");
    let b = bayes_risk(
        &gauss(),
        1.0,
        &EstimatorKind::PosteriorMean,
        &StoppingRule::fixed(9).expect("valid"),
        Rate::One,
        &RiskConfig::new(100_000, child_seed(SEED, 9)),
    )
    .expect("runs");
    let ok_s = (s.mean - 0.1).abs() <= 3.0 * s.se;
    let ok_b = (b.mean - 0.1).abs() <= 3.0 * b.se;
    verdict(
        ok_s && ok_b,
        format!(
            "standard {:.5}±{:.5}, bayes {:.5}±{:.5} (target 0.1)",
            s.mean, s.se, b.mean, b.se
        ),
    )
}

fn criterion_9() -> Verdict {
    let cfg = RiskConfig::new(10_000, child_seed(SEED, 10));
    let grid = [100, 1_000, 10_000];
    let aic: Vec<f64> = grid
        .iter()
        .map(|&n| {
            selection_probability(&Aic, &gauss(), 0.0, 0.0, n, &cfg)
                .expect("runs")
                .p
        })
        .collect();
    let bic: Vec<f64> = grid
        .iter()
        .map(|&n| {
            selection_probability(&Bic, &gauss(), 0.0, 0.0, n, &cfg)
                .expect("runs")
                .p
        })
        .collect();
    let aic_ok = aic.iter().all(|p| (p - 0.157).abs() <= 0.02);
    let bic_ok = bic.windows(2).all(|w| w[1] < w[0]) && bic[2] <= 0.01;
    verdict(
        aic_ok && bic_ok,
        format!(
            "P(AIC->M1) {:.4}/{:.4}/{:.4}; P(BIC->M1) {:.4}/{:.4}/{:.4}",
            aic[0], aic[1], aic[2], bic[0], bic[1], bic[2]
        ),
    )
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_timerobust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let base = [
        "risk",
        "--family",
        "gaussian",
        "--estimator",
        "mle",
        "--rate",
        "f_loglog",
        "--functional",
        "standard,strong",
        "--mu-grid",
        "0,1",
        "--n",
        "50,200",
        "--reps",
        "2000",
        "--seed",
        "7",
    ];
    let run = |out: &str, workers: &str| {
        let mut args = base.to_vec();
        args.extend(["--workers", workers, "--out", out]);
        cli(&args)
    };
    let (a, b, c) = (path("a.csv"), path("b.csv"), path("c.csv"));
    let outs = [run(&a, "1"), run(&b, "1"), run(&c, "8")];
    if let Some(bad) = outs.iter().find(|o| !o.status.success()) {
        return verdict(false, format!("cli failed: {}", String::from_utf8_lossy(&bad.stderr)));
    }
    let read = |p: &str| std::fs::read(p).unwrap_or_default();
    let (ba, bb, bc) = (read(&a), read(&b), read(&c));
    let rows = String::from_utf8_lossy(&ba).lines().count().saturating_sub(1);
    verdict(
        !ba.is_empty() && ba == bb && ba == bc,
        format!(
            "{rows} data rows; repeat run identical: {}; workers 1 vs 8 identical: {}",
            ba == bb,
            ba == bc
        ),
    )
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut results: Vec<(u32, Verdict, f64)> = Vec::new();
    let mut timed = |k: u32, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "criterion {k:>2}: {} ({secs:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((k, v, secs));
    };
    if want(1) || want(2) {
        let runs = evalue_runs();
        if want(1) {
            timed(1, &mut || criterion_1(&runs));
        }
        if want(2) {
            timed(2, &mut || criterion_2(&runs));
        }
    }
    let others: [(u32, fn() -> Verdict); 8] = [
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    for (k, f) in others {
        if want(k) {
            timed(k, &mut || f());
        }
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
