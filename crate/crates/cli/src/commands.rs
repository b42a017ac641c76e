//! Subcommand bodies. Each validates its whole configuration first, then
//! simulates, and returns a [`Report`] that `main` writes out.

use std::path::{Path, PathBuf};
use std::time::Duration;

use timerobust::adversaries::StoppingRule;
use timerobust::estimators::{Estimator, EstimatorKind};
use timerobust::risk::{
    bayes_risk, config_digest, standard_risk, strong_risk, strong_risk_profile, weak_risk, RiskConfig, RiskEstimate,
};
use timerobust::rng::{child_seed, replicate_rng, Substream};
use timerobust::selection::{post_selection_risk, selection_probability, selector_by_id, Aic};
use timerobust::supermartingale::{martingale_check, MixtureSpec, Side};
use timerobust::{FamilySpec, Rate, Trajectory};

use crate::config::{RawConfig, Validator};
use crate::error::CliError;
use crate::output::{csv_bytes, manifest, manifest_path, num, svg_chart, write_atomic, Series};

/// Keys that do not change any simulated number and so stay out of the digest.
const UNHASHED: [&str; 5] = ["config", "out", "plot", "workers", "dump"];

const PVALUE_LEVELS: [f64; 4] = [0.01, 0.05, 0.1, 0.5];

/// What a subcommand produced.
pub struct Report {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    digest: String,
    seed: u64,
    reps: u64,
    notes: Vec<String>,
    plot: Option<String>,
    /// Extra files written next to the CSV, keyed by suffix.
    extras: Vec<(String, Vec<u8>)>,
    /// Set by `selftest` when a check fails.
    failed: Option<String>,
}

impl Report {
    fn new(header: &[&str], digest: String, seed: u64, reps: u64) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            digest,
            seed,
            reps,
            notes: Vec::new(),
            plot: None,
            extras: Vec::new(),
            failed: None,
        }
    }

    /// Writes the CSV (stdout without `--out`), the manifest, the plot and
    /// any extras. Every file is replaced atomically.
    pub fn emit(self, subcommand: &str, raw: &RawConfig, wall: Duration) -> Result<(), CliError> {
        let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
        let csv = csv_bytes(&header, &self.rows)?;
        if let Some(plot) = raw.get("plot") {
            let svg = self.plot.as_deref().unwrap_or("");
            write_atomic(Path::new(plot), svg.as_bytes())?;
        }
        match raw.get("out") {
            Some(out) => {
                let out = PathBuf::from(out);
                write_atomic(&out, &csv)?;
                for (suffix, bytes) in &self.extras {
                    let mut p = out.as_os_str().to_owned();
                    p.push(suffix);
                    write_atomic(Path::new(&p), bytes)?;
                }
                let mut entries = vec![
                    ("tool", format!("timerobust {}", env!("CARGO_PKG_VERSION"))),
                    ("subcommand", subcommand.to_string()),
                    ("config_digest", self.digest.clone()),
                    ("seed", self.seed.to_string()),
                    ("reps", self.reps.to_string()),
                    ("rows", self.rows.len().to_string()),
                    ("wall_time_s", format!("{:.3}", wall.as_secs_f64())),
                ];
                entries.extend(self.notes.iter().map(|n| ("note", n.clone())));
                write_atomic(&manifest_path(&out), &manifest(&entries))?;
            }
            None => {
                use std::io::Write;
                std::io::stdout()
                    .write_all(&csv)
                    .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
            }
        }
        match self.failed {
            Some(msg) => Err(CliError::Failed(msg)),
            None => Ok(()),
        }
    }
}

/// Digest of the configuration with the resolved seed and reps filled in.
fn digest(raw: &RawConfig, seed: u64, reps: u64) -> String {
    let mut hashed = RawConfig::default();
    for k in raw.keys().filter(|k| !UNHASHED.contains(k)) {
        hashed.set(k, raw.get(k).map(str::to_string));
    }
    hashed.set("seed", Some(seed.to_string()));
    hashed.set("reps", Some(reps.to_string()));
    config_digest(&hashed.canonical())
}

/// Settings every simulation subcommand reads.
struct Base {
    seed: u64,
    reps: u64,
    workers: usize,
}

impl Base {
    fn read(v: &mut Validator<'_>) -> Self {
        Self {
            seed: v.seed(),
            reps: v.reps(),
            workers: v.workers(),
        }
    }

    fn cfg(&self) -> RiskConfig {
        RiskConfig::new(self.reps, self.seed).with_workers(self.workers)
    }
}

fn family(v: &mut Validator<'_>) -> Option<FamilySpec> {
    let id = v.str_or("family", "gaussian");
    v.check(FamilySpec::by_id(&id))
}

fn rates(v: &mut Validator<'_>) -> Vec<Rate> {
    let ids = v
        .list::<String>("rate")
        .unwrap_or_else(|| vec![Rate::LogLog.id().to_string()]);
    ids.iter().filter_map(|id| v.check(Rate::by_id(id))).collect()
}

/// Checks every mean against the family's parameter set.
fn check_means(v: &mut Validator<'_>, family: Option<&FamilySpec>, grid: &[f64]) {
    if let Some(f) = family {
        for &mu in grid {
            if let Err(e) = f.check_mean(&[mu]) {
                v.error(format!("--mu-grid: {e}"));
            }
        }
    }
}

fn strictly_increasing(v: &mut Validator<'_>, key: &str, xs: &[usize]) {
    if xs.first() == Some(&0) || xs.windows(2).any(|w| w[0] >= w[1]) {
        v.error(format!("--{key} must be positive and strictly increasing, got {xs:?}"));
    }
}

const RISK_HEADER: [&str; 14] = [
    "functional",
    "family",
    "mu",
    "estimator",
    "rule",
    "rate",
    "n_or_N",
    "mean",
    "se",
    "conditional_mean",
    "cap_hits",
    "reps",
    "seed",
    "config_digest",
];

fn risk_row(e: &RiskEstimate, digest: &str) -> Vec<String> {
    vec![
        e.functional.id().to_string(),
        e.family.clone(),
        e.mu.map(num).unwrap_or_default(),
        e.estimator.clone(),
        e.rule.clone(),
        e.rate.clone(),
        e.n.to_string(),
        num(e.mean),
        num(e.se),
        num(e.conditional_mean),
        e.cap_hits.to_string(),
        e.reps.to_string(),
        e.seed.to_string(),
        digest.to_string(),
    ]
}

/// `risk`: one row per (functional, rate, μ, n). Grid mean `i` runs with
/// seed `child_seed(seed, i)`, which is the row's `seed` column.
pub fn risk(raw: &RawConfig) -> Result<Report, CliError> {
    let mut v = Validator::new(raw);
    let base = Base::read(&mut v);
    let dump = v.flag("dump");
    let withhold = v.flag("withhold-mu");
    let family = family(&mut v);
    let grid = v.mu_grid(Some(0.0));
    check_means(&mut v, family.as_ref(), &grid);
    let est_id = v.str_or("estimator", "mle");
    let estimator = v.check(EstimatorKind::by_id(&est_id));
    if let (Some(e), Some(f)) = (&estimator, &family) {
        v.check(e.check_family(f));
    }
    let rates = rates(&mut v);
    let functionals = v
        .list::<String>("functional")
        .unwrap_or_else(|| vec!["standard".into()]);
    for f in &functionals {
        if !["standard", "weak", "strong", "bayes"].contains(&f.as_str()) {
            v.error(format!(
                "--functional: unknown id `{f}` (valid: standard, weak, strong, bayes)"
            ));
        }
    }
    if raw.get("n").is_some() && raw.get("horizon").is_some() {
        v.error("give either --n or --horizon, not both");
    }
    let key = if raw.get("horizon").is_some() { "horizon" } else { "n" };
    let ns = v.list::<usize>(key).unwrap_or_else(|| vec![100]);
    strictly_increasing(&mut v, key, &ns);
    let rule = v.opt_str("rule").and_then(|id| v.check(StoppingRule::by_id(&id)));
    if let (Some(r), Some(f)) = (&rule, &family) {
        v.check(r.check_family(f));
        if withhold && r.needs_true_mu() && functionals.iter().any(|f| f == "weak") {
            v.error(format!("--rule {r} needs the true mean, which --withhold-mu hides"));
        }
    }
    let prior_sd = v.or("prior-sd", 1.0f64);
    if functionals.iter().any(|f| f == "bayes") {
        if !(prior_sd > 0.0 && prior_sd.is_finite()) {
            v.error(format!("--prior-sd must be positive, got {prior_sd}"));
        }
        if family.as_ref().is_some_and(|f| !f.is_gaussian_location()) {
            v.error("--functional bayes needs --family gaussian");
        }
    }
    if dump && raw.get("out").is_none() {
        v.error("--dump needs --out");
    }
    v.finish()?;
    let (family, estimator) = (family.expect("validated"), estimator.expect("validated"));

    let digest = digest(raw, base.seed, base.reps);
    let mut report = Report::new(&RISK_HEADER, digest.clone(), base.seed, base.reps);
    let mut estimates = Vec::new();
    let fixed_rules = || {
        ns.iter()
            .map(|&n| StoppingRule::fixed(n))
            .collect::<Result<Vec<_>, _>>()
    };
    for f in &functionals {
        for &rate in &rates {
            match f.as_str() {
                "bayes" => {
                    let cfg = base.cfg().with_dump(dump);
                    let rules = match &rule {
                        Some(r) => vec![r.clone()],
                        None => fixed_rules()?,
                    };
                    for r in &rules {
                        estimates.push(bayes_risk(&family, prior_sd, &estimator, r, rate, &cfg)?);
                    }
                }
                _ => {
                    for (i, &mu) in grid.iter().enumerate() {
                        let cfg = base.cfg().with_dump(dump).with_seed(child_seed(base.seed, i as u64));
                        match f.as_str() {
                            "standard" => {
                                for &n in &ns {
                                    estimates.push(standard_risk(&family, mu, &estimator, rate, n, &cfg)?);
                                }
                            }
                            "strong" => {
                                let p = strong_risk_profile(&family, mu, &estimator, rate, &ns, &cfg)?;
                                estimates.extend(p.estimates);
                            }
                            _ => {
                                let rules = match &rule {
                                    Some(r) => vec![r.clone()],
                                    None => fixed_rules()?,
                                };
                                for r in &rules {
                                    estimates.push(weak_risk(&family, mu, &estimator, r, rate, !withhold, &cfg)?);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if functionals.iter().any(|f| f == "weak") {
        report
            .notes
            .push("weak risk is a lower bound: it evaluates the listed stopping rules, not all stopping times".into());
    }
    if grid.len() > 1 {
        report.notes.push(format!(
            "supremum over the parameter set approximated by the max over {} grid means",
            grid.len()
        ));
    }
    report.rows = estimates.iter().map(|e| risk_row(e, &digest)).collect();
    if dump {
        let mut rows = Vec::new();
        for (row, e) in estimates.iter().enumerate() {
            for (rep, loss) in e.losses.iter().flatten().enumerate() {
                rows.push(vec![row.to_string(), rep.to_string(), num(*loss)]);
            }
        }
        report
            .extras
            .push((".losses.csv".into(), csv_bytes(&["row", "rep", "loss"], &rows)?));
    }
    let mut series: Vec<Series> = Vec::new();
    for e in &estimates {
        let label = format!(
            "{} {} mu={}",
            e.functional.id(),
            e.rate,
            e.mu.map(|m| m.to_string()).unwrap_or_else(|| "prior".into())
        );
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((e.n as f64, e.mean)),
            None => series.push(Series {
                label,
                points: vec![(e.n as f64, e.mean)],
            }),
        }
    }
    report.plot = Some(svg_chart("risk", "n", "mean loss / rate", &series));
    Ok(report)
}

/// `supermartingale-check`: mean of `Zₙ`, of the running E-value and the
/// p-value CDF at each checkpoint.
pub fn supermartingale_check(raw: &RawConfig) -> Result<Report, CliError> {
    let mut v = Validator::new(raw);
    let base = Base::read(&mut v);
    let family = family(&mut v);
    if family.as_ref().is_some_and(|f| f.dim() != 1) {
        v.error("--family: supermartingale-check simulates scalar families");
    }
    let grid = v.mu_grid(Some(0.0));
    check_means(&mut v, family.as_ref(), &grid);
    let ns = v.list::<usize>("n").unwrap_or_else(|| vec![1, 10, 100, 1000, 10_000]);
    strictly_increasing(&mut v, "n", &ns);
    let side = match v.str_or("side", "plus").as_str() {
        "plus" => Side::Plus,
        "minus" => Side::Minus,
        other => {
            v.error(format!("--side: expected plus or minus, got `{other}`"));
            Side::Plus
        }
    };
    let c0 = v.opt::<f64>("c0");
    let spec = family.as_ref().and_then(|f| {
        let spec = match c0 {
            Some(c0) => MixtureSpec::new(c0, f.sigma(), f.delta(), 1, side),
            None => MixtureSpec::for_family(f).map(|s| s.with_side(side)),
        };
        v.check(spec)
    });
    v.finish()?;
    let (family, spec) = (family.expect("validated"), spec.expect("validated"));

    let digest = digest(raw, base.seed, base.reps);
    let mut header = vec!["mu", "n", "mean_Z", "se_Z", "mean_evalue", "se_evalue"];
    let p_cols: Vec<String> = PVALUE_LEVELS.iter().map(|a| format!("p_le_{a}")).collect();
    header.extend(p_cols.iter().map(String::as_str));
    header.extend(["reps", "seed", "config_digest"]);
    let mut report = Report::new(&header, digest.clone(), base.seed, base.reps);
    report.notes.push(format!("c0={} side={side:?}", spec.c0()));
    let mut series = Vec::new();
    for (i, &mu) in grid.iter().enumerate() {
        let cfg = base.cfg().with_seed(child_seed(base.seed, i as u64));
        let rows = martingale_check(&family, &spec, mu, &ns, &PVALUE_LEVELS, &cfg)?;
        series.push(Series {
            label: format!("E[Z] mu={mu}"),
            points: rows.iter().map(|r| (r.n as f64, r.mean_z)).collect(),
        });
        for r in rows {
            let mut row = vec![
                num(r.mu),
                r.n.to_string(),
                num(r.mean_z),
                num(r.se_z),
                num(r.mean_evalue),
                num(r.se_evalue),
            ];
            row.extend(r.pvalue_cdf.iter().map(|(_, p)| num(*p)));
            row.extend([r.reps.to_string(), r.seed.to_string(), digest.clone()]);
            report.rows.push(row);
        }
    }
    report.plot = Some(svg_chart("supermartingale check", "n", "mean Z_n", &series));
    Ok(report)
}

/// `adversary-demo`: trigger frequency and weak risk of a stopping rule.
pub fn adversary_demo(raw: &RawConfig) -> Result<Report, CliError> {
    let mut v = Validator::new(raw);
    let base = Base::read(&mut v);
    let withhold = v.flag("withhold-mu");
    let family = family(&mut v);
    let grid = v.mu_grid(Some(0.0));
    check_means(&mut v, family.as_ref(), &grid);
    let estimator = v.check(EstimatorKind::by_id(&v.str_or("estimator", "posterior_mean")));
    let rule = v.check(StoppingRule::by_id(&v.str_or("rule", "lil:0.1,27,100000")));
    if let Some(f) = &family {
        if let Some(e) = &estimator {
            v.check(e.check_family(f));
        }
        if let Some(r) = &rule {
            v.check(r.check_family(f));
            if withhold && r.needs_true_mu() {
                v.error(format!("--rule {r} needs the true mean, which --withhold-mu hides"));
            }
        }
    }
    let rates = rates(&mut v);
    v.finish()?;
    let (family, estimator, rule) = (
        family.expect("validated"),
        estimator.expect("validated"),
        rule.expect("validated"),
    );

    let digest = digest(raw, base.seed, base.reps);
    let header = [
        "rule",
        "estimator",
        "mu",
        "rate",
        "reps",
        "trigger_rate",
        "cap_hits",
        "weak_mean",
        "weak_se",
        "conditional_mean",
        "seed",
        "config_digest",
    ];
    let mut report = Report::new(&header, digest.clone(), base.seed, base.reps);
    report
        .notes
        .push("weak_mean is a lower bound on the weak risk: one stopping rule, not all stopping times".into());
    for &rate in &rates {
        for (i, &mu) in grid.iter().enumerate() {
            let cfg = base.cfg().with_seed(child_seed(base.seed, i as u64));
            let e = weak_risk(&family, mu, &estimator, &rule, rate, !withhold, &cfg)?;
            report.rows.push(vec![
                e.rule.clone(),
                e.estimator.clone(),
                num(mu),
                e.rate.clone(),
                e.reps.to_string(),
                num(1.0 - e.cap_hits as f64 / e.reps as f64),
                e.cap_hits.to_string(),
                num(e.mean),
                num(e.se),
                num(e.conditional_mean),
                e.seed.to_string(),
                digest.clone(),
            ]);
        }
    }
    Ok(report)
}

/// `dilemma`: selection frequency with standard and strong risks of the
/// post-selection estimator.
pub fn dilemma(raw: &RawConfig) -> Result<Report, CliError> {
    let mut v = Validator::new(raw);
    let base = Base::read(&mut v);
    let ids = v
        .list::<String>("selector")
        .unwrap_or_else(|| vec!["aic".into(), "bic".into()]);
    let selectors: Vec<_> = ids.iter().filter_map(|id| v.check(selector_by_id(id))).collect();
    if raw.get("mu").is_some() {
        v.error("dilemma takes --mu-grid, not --mu");
    }
    let grid = v.list::<f64>("mu-grid").unwrap_or_else(|| vec![0.0]);
    check_means(&mut v, Some(&FamilySpec::gaussian()), &grid);
    let ns = v.list::<usize>("n-grid").unwrap_or_else(|| vec![100, 1000, 10_000]);
    if ns.contains(&0) {
        v.error("--n-grid entries must be at least 1");
    }
    for s in &selectors {
        if let Some(&n) = ns.iter().find(|&&n| n < s.min_n()) {
            v.error(format!("--n-grid: {} needs n >= {}, got {n}", s.name(), s.min_n()));
        }
    }
    let rate = v.check(Rate::by_id(&v.str_or("rate", Rate::LogLog.id())));
    let mu0 = v.or("mu0", 0.0f64);
    if !mu0.is_finite() {
        v.error("--mu0 must be finite");
    }
    v.finish()?;
    let rate = rate.expect("validated");

    let digest = digest(raw, base.seed, base.reps);
    let header = [
        "selector",
        "functional",
        "mu",
        "n",
        "p_select_m1",
        "p_select_se",
        "risk_mean",
        "risk_se",
        "rate",
        "reps",
        "seed",
        "config_digest",
    ];
    let mut report = Report::new(&header, digest.clone(), base.seed, base.reps);
    let mut series = Vec::new();
    for s in selectors {
        let rows = post_selection_risk(s.clone(), mu0, &grid, &ns, rate, &base.cfg())?;
        for (functional, pick) in [("standard", 0), ("strong", 1)] {
            for &mu in &grid {
                series.push(Series {
                    label: format!("{} {functional} mu={mu}", s.name()),
                    points: rows
                        .iter()
                        .filter(|r| r.mu == mu)
                        .map(|r| (r.n as f64, if pick == 0 { r.standard.mean } else { r.strong.mean }))
                        .collect(),
                });
            }
        }
        for r in &rows {
            for e in [&r.standard, &r.strong] {
                report.rows.push(vec![
                    r.selector.clone(),
                    e.functional.id().to_string(),
                    num(r.mu),
                    r.n.to_string(),
                    num(r.p_select_m1.p),
                    num(r.p_select_m1.se),
                    num(e.mean),
                    num(e.se),
                    e.rate.clone(),
                    e.reps.to_string(),
                    e.seed.to_string(),
                    digest.clone(),
                ]);
            }
        }
    }
    report.plot = Some(svg_chart("post-selection risk", "n", "mean loss / rate", &series));
    Ok(report)
}

/// Outcome of one self-test check.
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// `selftest`: fast versions of the library's invariants.
pub fn selftest(raw: &RawConfig) -> Result<Report, CliError> {
    let mut v = Validator::new(raw);
    let seed = v.seed();
    let reps = v.or("reps", 4000u64);
    if reps < 100 {
        v.error(format!("--reps must be at least 100 for selftest, got {reps}"));
    }
    let workers = v.workers();
    v.finish()?;
    let cfg = RiskConfig::new(reps, seed).with_workers(workers);
    let gaussian = FamilySpec::gaussian();
    let mle = EstimatorKind::Mle;
    let mut checks = Vec::new();

    let e = standard_risk(&gaussian, 0.5, &mle, Rate::One, 10, &cfg)?;
    checks.push(Check {
        name: "standard risk of the MLE equals 1/n",
        pass: (e.mean - 0.1).abs() <= 4.0 * e.se,
        detail: format!("mean={:.5} se={:.5} oracle=0.1", e.mean, e.se),
    });

    let spec = MixtureSpec::for_family(&gaussian)?;
    let rows = martingale_check(&gaussian, &spec, 1.0, &[1, 100], &[0.05], &cfg)?;
    let worst = rows
        .iter()
        .map(|r| r.mean_z - 1.0 - 3.0 * r.se_z)
        .fold(f64::NEG_INFINITY, f64::max);
    let p = rows.last().expect("two checkpoints").pvalue_cdf[0].1;
    checks.push(Check {
        name: "mixture has mean at most one and a superuniform p-value",
        pass: worst <= 0.0 && p <= 0.05 + 4.0 * (0.05 * 0.95 / reps as f64).sqrt(),
        detail: format!("max(E[Z] - 1 - 3se)={worst:.4} P(p<=0.05)={p:.4}"),
    });

    let a = strong_risk(&gaussian, 0.0, &mle, Rate::LogLog, 500, &cfg)?;
    let b = strong_risk(
        &gaussian,
        0.0,
        &mle,
        Rate::LogLog,
        500,
        &cfg.with_workers(workers.max(1) + 3),
    )?;
    let w = weak_risk(
        &gaussian,
        0.0,
        &mle,
        &StoppingRule::fixed(500)?,
        Rate::LogLog,
        true,
        &cfg,
    )?;
    let s = standard_risk(&gaussian, 0.0, &mle, Rate::LogLog, 500, &cfg)?;
    checks.push(Check {
        name: "results do not depend on the worker count",
        pass: a == b,
        detail: format!("strong mean {} vs {}", a.mean, b.mean),
    });
    checks.push(Check {
        name: "fixed-time weak risk equals the standard risk and is below the strong risk",
        pass: w.mean == s.mean && s.mean <= a.mean,
        detail: format!("standard={:.4} weak={:.4} strong={:.4}", s.mean, w.mean, a.mean),
    });

    let rule = StoppingRule::lil(0.1, 27, 5000)?;
    let pm = EstimatorKind::PosteriorMean;
    let mut violations = 0;
    let mut triggered = 0;
    let mut traj = Trajectory::new();
    for r in 0..200 {
        let mut rng = replicate_rng(seed, Substream::Observations, r);
        traj.clear();
        let stop = rule.run(&gaussian, 0.0, Some(0.0), &mut traj, &mut rng)?;
        if stop.triggered {
            triggered += 1;
            let gap = pm.estimate(&traj.prefix(stop.tau))?.powi(2);
            if gap < 0.1 * Rate::LogLog.eval(stop.tau as u64) {
                violations += 1;
            }
        }
    }
    checks.push(Check {
        name: "LIL stop meets its postcondition whenever it triggers",
        pass: violations == 0 && triggered > 0,
        detail: format!("triggered={triggered}/200 violations={violations}"),
    });

    let sel = selection_probability(&Aic, &gaussian, 0.0, 0.0, 100, &cfg)?;
    checks.push(Check {
        name: "AIC selects the alternative at the chi-square tail rate",
        pass: (sel.p - 0.157).abs() <= 0.02 + 3.0 * sel.se,
        detail: format!("p={:.4} se={:.4} oracle=0.157", sel.p, sel.se),
    });

    let failed = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let digest = digest(raw, seed, reps);
    let mut report = Report::new(
        &["check", "pass", "detail", "seed", "config_digest"],
        digest.clone(),
        seed,
        reps,
    );
    report.rows = checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                c.pass.to_string(),
                c.detail.clone(),
                seed.to_string(),
                digest.clone(),
            ]
        })
        .collect();
    if failed > 0 {
        report.failed = Some(format!("{failed} of {} self-test checks failed", checks.len()));
    }
    Ok(report)
}
