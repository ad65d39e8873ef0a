use std::path::Path;
use std::process::{Command, Output};

use dtea::io::read_trace_csv;
use dtea::presets::save_preset;
use dtea_core::Preset;

fn dtea(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtea"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "disturb",
        "--mode",
        "pea",
        "--impacts",
        "1",
        "--noise",
        "--seed",
        "5",
    ];
    let a = dtea(&args, &dir.path().join("a"));
    let b = dtea(&args, &dir.path().join("b"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&b));
    for f in ["trace.csv", "report.json"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(dtea(&["stiffness"], out).status.code(), Some(1));
    assert_eq!(
        dtea(&["track", "--mode", "sea"], out).status.code(),
        Some(1)
    );
    assert_eq!(
        dtea(&["hub-curve", "--steps", "1"], out).status.code(),
        Some(1)
    );
    assert_eq!(
        dtea(&["cycle", "--preset", "missing"], out).status.code(),
        Some(1)
    );

    let mut bad = Preset::calibrated();
    bad.params.torque_constant = 0.0;
    let path = out.join("bad.json");
    save_preset(&path, &bad).unwrap();
    let o = dtea(
        &["cycle", "--n", "2", "--preset", path.to_str().unwrap()],
        out,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("torque_constant"));

    // A valid preset whose selector is slower than the hardware bound fails
    // during the run, not at load time.
    let mut slow = Preset::calibrated();
    slow.params.switch_latency = 0.05;
    save_preset(&path, &slow).unwrap();
    let o = dtea(
        &["cycle", "--n", "2", "--preset", path.to_str().unwrap()],
        out,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("latency"));

    let help = Command::new(env!("CARGO_BIN_EXE_dtea"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn hub_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtea(
        &["hub-curve", "--range", "-0.5", "0.5", "--steps", "3"],
        dir.path(),
    );
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("hub_curve.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["beta", "tau_hub", "l_eff"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1], 0.0);
    assert_eq!(rows[0][1], -rows[2][1]);
    assert_eq!(rows[0][2], rows[2][2]);

    let o = dtea(
        &["hub-curve", "--range", "-0.001", "0.001", "--steps", "3"],
        dir.path(),
    );
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("hub_curve.csv")).unwrap();
    let taus: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    let slope = (taus[2] - taus[0]) / 0.002;
    assert!((slope - 5.86).abs() < 0.01, "{slope}");
}

#[test]
fn stiffness_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtea(
        &[
            "stiffness",
            "--mode",
            "sea",
            "--preset",
            "paper-full-range",
            "--plot",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("SEA stiffness 5.5"), "{}", stdout(&o));

    let trace = read_trace_csv(&dir.path().join("trace.csv")).unwrap();
    assert!(trace.rows.len() > 100);
    assert!(trace.rows.iter().all(|r| r.theta_o == 0.0));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["kind"], "report");
    assert_eq!(report["command"], "stiffness");
    assert_eq!(report["preset"]["name"], "paper-full-range");
    assert!((report["result"]["stiffness"].as_f64().unwrap() - 5.57).abs() < 0.05);

    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn cycle_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtea(&["cycle", "--n", "8"], dir.path());
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("8 completed, 0 violations"),
        "{}",
        stdout(&o)
    );
    assert!(!dir.path().join("trace.csv").exists());
    let switches = std::fs::read_to_string(dir.path().join("switches.csv")).unwrap();
    assert_eq!(switches.lines().count(), 9);
    assert!(switches.lines().skip(1).all(|l| l.contains(",completed,")));
}
