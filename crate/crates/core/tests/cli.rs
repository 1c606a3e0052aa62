use std::fs;
use std::process::{Command, Output};

fn cvqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqkd")).args(args).output().expect("binary runs")
}

fn value(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in output:\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn keyrate_reports_collective_rate() {
    let out = cvqkd(&["keyrate", "--attack", "collective"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((value(&out, "rate") - 0.008848531976595).abs() < 1e-10);
    let het = cvqkd(&["keyrate", "--attack", "collective", "--detection", "het"]);
    assert!(value(&het, "I_ab") > value(&out, "I_ab"));
}

#[test]
fn exit_codes() {
    assert_eq!(cvqkd(&["keyrate", "--epsilon", "abc"]).status.code(), Some(2));
    assert_eq!(cvqkd(&["figure", "fig9"]).status.code(), Some(2));
    assert_eq!(cvqkd(&["keyrate", "--detection", "both"]).status.code(), Some(2));

    let infeasible = cvqkd(&["keyrate", "--v-rho", "1.0001", "--squeezer-gain", "1000"]);
    assert_eq!(infeasible.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&infeasible.stderr).starts_with("error: InfeasibleError:"));

    let none = cvqkd(&["threshold", "--eve-fiber", "deployed", "--g-lo", "1", "--g-hi", "1.2"]);
    assert_eq!(none.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&none.stderr).contains("NoThresholdError"));

    assert_eq!(cvqkd(&["keyrate", "--l1", "30", "--l2", "10", "--eve-fiber", "g652"]).status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ini");
    fs::write(&path, "[channel]\nepsilon = 0.06\nl-total = 40\n\n[attack]\nattack = collective\n").unwrap();
    let p = path.to_str().unwrap();

    let from_file = cvqkd(&["keyrate", "--config", p]);
    let flags = cvqkd(&["keyrate", "--attack", "collective", "--epsilon", "0.06", "--l-total", "40"]);
    assert_eq!(from_file.stdout, flags.stdout);

    let overridden = cvqkd(&["keyrate", "--config", p, "--l-total", "30"]);
    let direct = cvqkd(&["keyrate", "--attack", "collective", "--epsilon", "0.06", "--l-total", "30"]);
    assert_eq!(overridden.stdout, direct.stdout);

    fs::write(&path, "[channel]\nbogus = 1\n").unwrap();
    let bad = cvqkd(&["keyrate", "--config", p]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("ConfigError"));
}

#[test]
fn sweep_csv_is_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| {
        vec![
            "sweep".to_string(),
            "--scenario".into(),
            "stations".into(),
            "--steps".into(),
            "4".into(),
            "--out".into(),
            dir.path().join(name).to_str().unwrap().to_string(),
        ]
    };
    let run = |name: &str, threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cvqkd"));
        cmd.args(args(name));
        if let Some(n) = threads {
            cmd.env("CVQKD_THREADS", n);
        }
        assert!(cmd.status().unwrap().success());
        fs::read_to_string(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv", None);
    let b = run("b.csv", None);
    let c = run("c.csv", Some("1"));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let header = a.lines().next().unwrap();
    assert_eq!(header, "L1,L2,I_ab,holevo,rate_raw,rate,flag,t,eta,V_phi,gamma_G,T4_G");
    assert_eq!(a.lines().count(), 17);
}

#[test]
fn sweep_axis_flags() {
    let out = cvqkd(&["sweep", "--attack", "collective", "--axis", "L_total:10:50:3", "--axis", "epsilon:0.02:0.04:2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("L_total,epsilon,"));
    assert_eq!(cvqkd(&["sweep", "--axis", "L_total:10:50"]).status.code(), Some(2));
}

#[test]
fn figure_writes_data_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvqkd(&["figure", "fig1b", "--steps", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("fig1b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("fig1b.gp").exists());
}

#[test]
fn cutoff_and_threshold_commands() {
    let cut = cvqkd(&["cutoff", "--attack", "collective", "--epsilon", "0.1", "--tol", "0.01"]);
    assert!(cut.status.success());
    assert!((value(&cut, "cutoff_km") - 35.38).abs() < 0.02);
    let th = cvqkd(&["threshold", "--eve-fiber", "deployed", "--tol", "0.01"]);
    assert!(th.status.success());
    assert!((value(&th, "G_th") - 1.6254).abs() < 0.01);
}
