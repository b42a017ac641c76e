use std::path::Path;
use std::process::{Command, Output};

fn timerobust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timerobust"))
        .args(args)
        .env_remove("TIMEROBUST_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(str::to_string).collect()];
    rows.extend(
        r.records()
            .map(|rec| rec.unwrap().iter().map(str::to_string).collect::<Vec<_>>()),
    );
    rows
}

#[test]
fn one_row_per_functional_mean_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = timerobust(&[
        "risk",
        "--mu-grid",
        "0,0.5,1",
        "--n",
        "5,20",
        "--functional",
        "standard,strong",
        "--reps",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows[0][0], "functional");
    assert_eq!(rows[0].last().unwrap(), "config_digest");
    assert_eq!(rows.len() - 1, 2 * 3 * 2);
    let mut keys: Vec<_> = rows[1..]
        .iter()
        .map(|r| (r[0].clone(), r[2].clone(), r[6].clone()))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 12);
    let manifest = std::fs::read_to_string(dir.path().join("r.csv.manifest")).unwrap();
    assert!(manifest.contains("subcommand=risk"));
    assert!(manifest.contains(&format!("config_digest={}", rows[1].last().unwrap())));
    assert!(manifest.contains("wall_time_s="));
}

#[test]
fn row_seed_reproduces_the_row_alone() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let o = timerobust(&[
        "risk",
        "--mu-grid",
        "0,2",
        "--n",
        "30",
        "--reps",
        "40",
        "--seed",
        "9",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&a);
    let second = &rows[2];
    let o = timerobust(&[
        "risk",
        "--mu",
        "2",
        "--n",
        "30",
        "--reps",
        "40",
        "--seed",
        &second[12],
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let alone = &read_csv(&b)[1];
    assert_eq!(alone[7..9], second[7..9]);
}

#[test]
fn validation_reports_every_error() {
    let o = timerobust(&[
        "risk",
        "--estimator",
        "median",
        "--reps",
        "1",
        "--rate",
        "fast",
        "--family",
        "bernoulli",
        "--mu-grid",
        "0.5,1.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in ["median", "posterior_mean", "--reps", "fast", "1.5"] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
}

#[test]
fn validation_fails_before_writing_anything() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = timerobust(&[
        "risk",
        "--rule",
        "lil:0.1",
        "--functional",
        "weak",
        "--withhold-mu",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let o = timerobust(&["risk", "--reps", "4", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn seed_falls_back_to_the_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_timerobust"));
        c.args(["risk", "--reps", "8", "--n", "3"]).args(extra);
        match env {
            Some(v) => c.env("TIMEROBUST_SEED", v),
            None => c.env_remove("TIMEROBUST_SEED"),
        };
        let o = c.output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        String::from_utf8(o.stdout).unwrap()
    };
    let from_env = run(Some("42"), &[]);
    assert_eq!(from_env, run(None, &["--seed", "42"]));
    assert_ne!(from_env, run(None, &[]));
    assert_eq!(from_env, run(Some("7"), &["--seed", "42"]));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(
        &cfg,
        "# experiment\nfamily = bernoulli\nmu_grid = 0.2,0.4\nn = 10\nreps = 12\nseed = 5\n",
    )
    .unwrap();
    let o = timerobust(&["risk", "--config", cfg.to_str().unwrap(), "--mu-grid", "0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("standard,bernoulli,0.3,mle,fixed:10,"));
    std::fs::write(&cfg, "reps\n").unwrap();
    assert_eq!(
        timerobust(&["risk", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn subcommands_emit_their_columns() {
    let cases: [(&[&str], &str); 3] = [
        (
            &["supermartingale-check", "--reps", "20", "--n", "1,5"],
            "mu,n,mean_Z,se_Z,mean_evalue,se_evalue,",
        ),
        (
            &["adversary-demo", "--reps", "10", "--rule", "lil:0.1,27,300"],
            "rule,estimator,mu,rate,reps,trigger_rate,cap_hits,weak_mean,weak_se,",
        ),
        (
            &["dilemma", "--reps", "10", "--selector", "bic", "--n-grid", "10,20"],
            "selector,functional,mu,n,p_select_m1,p_select_se,risk_mean,risk_se,rate,reps,seed,",
        ),
    ];
    for (args, header) in cases {
        let o = timerobust(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with(header), "{args:?}: {text}");
    }
}

#[test]
fn plot_is_an_svg() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("p.svg");
    let o = timerobust(&[
        "risk",
        "--reps",
        "5",
        "--n",
        "5,50",
        "--functional",
        "strong",
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(plot).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn selftest_passes() {
    let o = timerobust(&["selftest", "--reps", "2000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stderr(&o).contains("FAIL"));
}
