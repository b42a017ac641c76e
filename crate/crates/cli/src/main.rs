//! `timerobust`: run time-robust risk experiments from flags or a
//! `key=value` config file.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numeric failure,
//! 4 I/O failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::RawConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "timerobust", version, about = "Time-robust minimax risk simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Standard, weak, strong or Bayes risk of an estimator.
    Risk(RiskArgs),
    /// Monte Carlo check of the LIL test supermartingale, E-value and p-value.
    SupermartingaleCheck(SupermartingaleArgs),
    /// Runs a stopping rule against an estimator and reports trigger statistics.
    AdversaryDemo(DemoArgs),
    /// Post-selection risk tables for AIC or BIC.
    Dilemma(DilemmaArgs),
    /// Runs a fast invariant suite.
    Selftest(SelftestArgs),
}

/// Flags shared by every subcommand. Values given here override the config
/// file.
#[derive(Args)]
struct Common {
    /// Flat key=value config file; keys are the flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; falls back to TIMEROBUST_SEED, then 0.
    #[arg(long)]
    seed: Option<String>,
    /// Monte Carlo replications (default 10000).
    #[arg(long)]
    reps: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<String>,
    /// CSV output path; a manifest is written next to it. Prints to stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Optional SVG line chart of the results.
    #[arg(long)]
    plot: Option<String>,
}

impl Common {
    fn entries(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("seed", self.seed.clone()),
            ("reps", self.reps.clone()),
            ("workers", self.workers.clone()),
            ("out", self.out.clone()),
            ("plot", self.plot.clone()),
        ]
    }
}

#[derive(Args)]
struct RiskArgs {
    #[command(flatten)]
    common: Common,
    /// gaussian, bernoulli
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Comma-separated means.
    #[arg(long)]
    mu_grid: Option<String>,
    /// mle, posterior_mean, dyadic:<base>, offset:<c>:<base>, constant:<x>, oracle
    #[arg(long)]
    estimator: Option<String>,
    /// Comma-separated: standard, weak, strong, bayes.
    #[arg(long)]
    functional: Option<String>,
    /// fixed:N, lil:c,n0,nmax, gap:estimator,c,n0,nmax, capped:c,n0,n1
    #[arg(long)]
    rule: Option<String>,
    /// f_loglog, g_1_over_n, g_log_over_n, one
    #[arg(long)]
    rate: Option<String>,
    /// Comma-separated sample sizes (standard) or horizons (strong).
    #[arg(long)]
    n: Option<String>,
    /// Alias of --n.
    #[arg(long)]
    horizon: Option<String>,
    /// Prior standard deviation for the Bayes risk.
    #[arg(long)]
    prior_sd: Option<String>,
    /// Do not tell stopping rules the true mean.
    #[arg(long)]
    withhold_mu: bool,
    /// Write per-replication losses to <out>.losses.csv.
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct SupermartingaleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    mu_grid: Option<String>,
    /// Comma-separated checkpoints.
    #[arg(long)]
    n: Option<String>,
    /// Prior scale; defaults to just below the admissible maximum.
    #[arg(long)]
    c0: Option<String>,
    /// plus or minus
    #[arg(long)]
    side: Option<String>,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    mu_grid: Option<String>,
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    withhold_mu: bool,
}

#[derive(Args)]
struct DilemmaArgs {
    #[command(flatten)]
    common: Common,
    /// aic, bic or both comma-separated.
    #[arg(long)]
    selector: Option<String>,
    #[arg(long)]
    mu_grid: Option<String>,
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    /// Mean of the null model.
    #[arg(long)]
    mu0: Option<String>,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: Common,
}

fn flag(b: bool) -> Option<String> {
    b.then(|| "true".to_string())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Risk(_) => "risk",
            Command::SupermartingaleCheck(_) => "supermartingale-check",
            Command::AdversaryDemo(_) => "adversary-demo",
            Command::Dilemma(_) => "dilemma",
            Command::Selftest(_) => "selftest",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Risk(a) => &a.common,
            Command::SupermartingaleCheck(a) => &a.common,
            Command::AdversaryDemo(a) => &a.common,
            Command::Dilemma(a) => &a.common,
            Command::Selftest(a) => &a.common,
        }
    }

    fn entries(&self) -> Vec<(&'static str, Option<String>)> {
        let mut e = self.common().entries();
        match self {
            Command::Risk(a) => e.extend([
                ("family", a.family.clone()),
                ("mu", a.mu.clone()),
                ("mu-grid", a.mu_grid.clone()),
                ("estimator", a.estimator.clone()),
                ("functional", a.functional.clone()),
                ("rule", a.rule.clone()),
                ("rate", a.rate.clone()),
                ("n", a.n.clone()),
                ("horizon", a.horizon.clone()),
                ("prior-sd", a.prior_sd.clone()),
                ("withhold-mu", flag(a.withhold_mu)),
                ("dump", flag(a.dump)),
            ]),
            Command::SupermartingaleCheck(a) => e.extend([
                ("family", a.family.clone()),
                ("mu", a.mu.clone()),
                ("mu-grid", a.mu_grid.clone()),
                ("n", a.n.clone()),
                ("c0", a.c0.clone()),
                ("side", a.side.clone()),
            ]),
            Command::AdversaryDemo(a) => e.extend([
                ("family", a.family.clone()),
                ("mu", a.mu.clone()),
                ("mu-grid", a.mu_grid.clone()),
                ("estimator", a.estimator.clone()),
                ("rule", a.rule.clone()),
                ("rate", a.rate.clone()),
                ("withhold-mu", flag(a.withhold_mu)),
            ]),
            Command::Dilemma(a) => e.extend([
                ("selector", a.selector.clone()),
                ("mu-grid", a.mu_grid.clone()),
                ("n-grid", a.n_grid.clone()),
                ("rate", a.rate.clone()),
                ("mu0", a.mu0.clone()),
            ]),
            Command::Selftest(_) => {}
        }
        e
    }

    fn raw_config(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.common().config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        for (k, v) in self.entries() {
            raw.set(k, v);
        }
        Ok(raw)
    }
}

fn run(command: &Command) -> Result<(), CliError> {
    let started = Instant::now();
    let raw = command.raw_config()?;
    let report = match command {
        Command::Risk(_) => commands::risk(&raw)?,
        Command::SupermartingaleCheck(_) => commands::supermartingale_check(&raw)?,
        Command::AdversaryDemo(_) => commands::adversary_demo(&raw)?,
        Command::Dilemma(_) => commands::dilemma(&raw)?,
        Command::Selftest(_) => commands::selftest(&raw)?,
    };
    report.emit(command.name(), &raw, started.elapsed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("timerobust {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
