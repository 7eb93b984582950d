use std::fs;
use std::process::{Command, Output};

fn normdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analyze_json_report() {
    let o = normdyn(&["analyze", "--a", "1.0", "--b", "1.15", "--c", "0.75", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pure_AA"]["is_ess"], true);
    assert_eq!(v["pure_BB"]["is_ess"], true);
    let q = v["mixed"]["q"].as_f64().unwrap();
    assert!((q - 0.55814).abs() < 1e-5);
    assert_eq!(v["mixed"]["is_stable_fixed_point"], false);
    assert_eq!(v["mixed"]["is_ess"], false);
}

#[test]
fn analyze_text_report() {
    let o = normdyn(&["analyze", "--a", "1.0", "--b", "1.15", "--c", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("mixed    none"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("BB") && l.contains("yes")));
}

#[test]
fn nonpositive_payoff_exits_2_and_names_flag() {
    let o = normdyn(&["analyze", "--a", "0", "--b", "1", "--c", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("--a"), "{err}");
    assert!(err.contains("positive"), "{err}");
}

#[test]
fn validation_errors_name_the_flag() {
    for (args, flag) in [
        (vec!["analyze", "--a", "1", "--b", "1", "--c", "1.5"], "--c"),
        (vec!["ode", "--a", "1", "--b", "1.15", "--c", "0.1", "--dt", "-0.5"], "--dt"),
        (vec!["ode", "--a", "1", "--b", "1.15", "--c", "0.1", "--x0", "2"], "--x0"),
        (vec!["abm", "--iterations", "5", "--mu", "3"], "--mu"),
        (vec!["abm", "--iterations", "5", "--shock-every", "0"], "--shock-every"),
        (vec!["abm", "--iterations", "5", "--evolving", "--L", "0.1,0.1"], "--L"),
        (vec!["abm", "--iterations", "5", "--s", "0"], "--s"),
        (vec!["abm", "--iterations", "5", "--width", "2"], "--topology"),
        (vec!["analyze", "--b", "1", "--c", "0.5"], "--a"),
    ] {
        let o = normdyn(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(normdyn(&[]).status.code(), Some(2));
    assert_eq!(normdyn(&["analyze", "--bogus"]).status.code(), Some(2));
    assert_eq!(normdyn(&["sweep", "--preset", "fig9"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("game.toml");
    fs::write(&path, "a_c = 1.0\nb_c = 1.15\na_f = 0.6\nb_f = 0.75\nc = 0.05\n").unwrap();
    let p = path.to_str().unwrap();

    let o = normdyn(&["analyze", "--config", p, "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["mixed"].is_null());

    let o = normdyn(&["analyze", "--config", p, "--c", "0.75", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["mixed"].is_object());

    fs::write(&path, "a_c = 1.0\nb_c = 1.15\na_f = 0.6\nb_f = 0.9\nc = 0.5\n").unwrap();
    let o = normdyn(&["analyze", "--config", p]);
    assert_eq!(o.status.code(), Some(2));

    let o = normdyn(&["analyze", "--config", "/nonexistent/game.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn ode_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = normdyn(&[
        "ode", "--a", "0.4", "--b", "0.6", "--c", "0.3", "--kind", "replicator-mutator", "--mu", "0.1",
        "--x0", "0.95", "--dt", "0.01", "--tmax", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x_A,x_B,rate"));
    assert_eq!(text.lines().count(), 102);
    assert!(text.lines().last().unwrap().starts_with("1,"));
}

#[test]
fn abm_writes_mean_and_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = normdyn(&[
        "abm", "--width", "10", "--height", "10", "--a", "1", "--b", "1.15", "--c", "0.5",
        "--iterations", "40", "--shock-at", "20", "--replicates", "3", "--seed", "9",
        "--out-dir", out.to_str().unwrap(), "--keep-replicates",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mean = fs::read_to_string(out.join("mean.csv")).unwrap();
    assert!(mean.starts_with("iteration,prop_A,prop_B\n"));
    assert_eq!(mean.lines().count(), 41);
    for k in 0..3 {
        assert!(out.join(format!("rep_{k}.csv")).is_file());
    }
}

#[test]
fn abm_evolving_to_stdout_is_reproducible() {
    let args = [
        "abm", "--topology", "small-world", "--n", "60", "--iterations", "30", "--evolving", "--L",
        "0,0.25,0.5", "--shock-every", "10", "--seed", "3",
    ];
    let first = normdyn(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.starts_with("iteration,prop_A,prop_B,share_mu_0.0,share_mu_0.25,share_mu_0.5\n"));
    assert_eq!(normdyn(&args).stdout, first.stdout);
}

#[test]
fn sweep_preset_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let o = normdyn(&[
        "sweep", "--preset", "fig4", "--replicates", "2", "--seed", "7", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let root = dir.path().join("fig4");
    for c in ["c=1", "c=0.75", "c=0.5"] {
        let text = fs::read_to_string(root.join(c).join("mean.csv")).unwrap();
        assert_eq!(text.lines().count(), 6001);
    }
    let manifest = root.join("manifest.json");
    assert!(manifest.is_file());

    let again = dir.path().join("again");
    let o = normdyn(&[
        "sweep", "--experiment", manifest.to_str().unwrap(), "--out", again.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read(root.join("c=0.5/mean.csv")).unwrap(),
        fs::read(again.join("fig4/c=0.5/mean.csv")).unwrap()
    );
}

#[test]
fn help_lists_every_flag() {
    let expected: [(&str, &[&str]); 4] = [
        ("analyze", &["--a", "--b", "--c", "--config", "--json"]),
        ("ode", &["--a", "--b", "--c", "--x0", "--mu", "--kind", "--dt", "--tmax", "--out", "--config"]),
        (
            "abm",
            &[
                "--width", "--height", "--topology", "--a", "--b", "--c", "--s", "--mu", "--evolving",
                "--L", "--iterations", "--shock-at", "--shock-every", "--replicates", "--seed",
                "--out-dir", "--inject", "--keep-replicates", "--n", "--k", "--p-rewire", "--m",
                "--explore-scope",
            ],
        ),
        ("sweep", &["--preset", "--experiment", "--replicates", "--seed", "--out", "--keep-replicates"]),
    ];
    for (cmd, flags) in expected {
        let help = stdout(&normdyn(&[cmd, "--help"]));
        for flag in flags {
            assert!(
                help.split_whitespace().any(|w| w == *flag),
                "{cmd} --help is missing {flag}"
            );
        }
    }
}
