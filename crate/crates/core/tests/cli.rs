use std::path::Path;
use std::process::{Command, Output};

fn isomat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isomat"))
        .args(args)
        .env_remove("ISOMAT_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
        .to_string()
}

#[test]
fn design1_fisher_is_isotropic() {
    let o = isomat(&[
        "design",
        "fisher",
        "--scheme",
        "design1",
        "--spherical",
        "6.622e-4",
        "--rho",
        "110.046",
        "--eta2",
        "64.056",
    ]);
    assert!(o.status.success());
    let text = stdout(&o).to_lowercase();
    assert!(text.contains("isotropic = true"), "{text}");
    let mu: f64 = value(&text, "mu_bar").parse().unwrap();
    assert!((mu / 4.63e7 - 1.0).abs() < 0.01);
}

#[test]
fn spherical_tau2_is_zero() {
    let o = isomat(&["test", "tau", "--gamma", "1,1,1", "--a", "100"]);
    assert!(o.status.success());
    let tau2: f64 = value(&stdout(&o), "tau2").parse().unwrap();
    assert_eq!(tau2, 0.0);
}

#[test]
fn womersley_file_verifies() {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/designs/womersley14.csv");
    let o = isomat(&[
        "design",
        "verify",
        "--file",
        file.to_str().unwrap(),
        "--t",
        "4",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = isomat(&["design", "verify", "--name", "womersley14", "--t", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(isomat(&["sample", "--mu", "abc"]).status.code(), Some(2));
    assert_eq!(isomat(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        isomat(&["fit", "--data", "/nonexistent/data.csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(isomat(&["design", "list"]).status.code(), Some(0));
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("ds");
    let o = isomat(&[
        "simulate",
        "--scheme",
        "design2",
        "--spherical",
        "6.622e-4",
        "--rho",
        "110.046",
        "--eta2",
        "64.056",
        "--seed",
        "9",
        "--output",
        prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = prefix.with_extension("csv");
    let o = isomat(&["fit", "--data", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "converged"), "true");
    let d: Vec<f64> = value(&text, "d_hat")
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    for k in 0..3 {
        assert!((d[k] - 6.622e-4).abs() < 2e-4, "{d:?}");
    }
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--mu", "2", "--n", "5", "--seed", "4", "--eigen"];
    let a = stdout(&isomat(&args));
    assert_eq!(a, stdout(&isomat(&args)));
    assert_eq!(a.lines().next(), Some("gamma1,gamma2,gamma3"));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn mc_command_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"gaussian\"\nn = 300\nseed = 2\n").unwrap();
    let out = dir.path().join("out");
    let o = isomat(&[
        "mc",
        "--config",
        cfg.to_str().unwrap(),
        "--workers",
        "2",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "replications.csv",
        "summary.json",
        "eigvec.csv",
        "fig_tau2.svg",
        "fig_pairs_12.svg",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"gaussian\"\nn = 10\nseed = 2\n").unwrap();
    assert_eq!(
        isomat(&["mc", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
