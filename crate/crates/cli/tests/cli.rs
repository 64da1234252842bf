use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pumpsim::scenario::{bundled, parse_config};

fn pumpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pumpsim")).args(args).env_remove("PUMPSIM_SEED").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn short(dir: &Path) -> String {
    write_cfg(dir, "short.cfg", "seed = 4\nhorizon_s = 7200\n")
}

#[test]
fn simulate_writes_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(dir.path());
    let out = dir.path().join("run");
    let o = pumpsim(&["simulate", "--config", &cfg, "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert!(csv.starts_with("t_s,level_m,q_in_m3h,p1_state"));
    assert_eq!(csv.lines().count(), 7201);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("cycles") && stdout.contains("energy_kwh"));
}

#[test]
fn bundled_blockage_is_a_labeled_two_day_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = pumpsim(&["simulate", "--config", "builtin:blockage", "--out", p(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 172_800);
    assert!(rows.iter().all(|r| !r.ends_with(',')));
    assert!(rows.iter().any(|r| r.ends_with("pump_fault:1")));
}

#[test]
fn inverted_thresholds_exit_2_naming_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "station.start_levels_m = 1.5, 1.8, 2.2\nstation.stop_levels_m = 1.6, 0.9, 1.2\n");
    let o = pumpsim(&["simulate", "--config", &cfg, "--out", p(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("E1") && stderr(&o).contains("S1"), "{}", stderr(&o));
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "typo.cfg", "station.aera_m2 = 8\n");
    assert_eq!(code(&pumpsim(&["simulate", "--config", &cfg, "--out", p(dir.path())])), 2);
}

#[test]
fn missing_config_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    assert_eq!(code(&pumpsim(&["simulate", "--config", p(&missing), "--out", p(dir.path())])), 3);
}

#[test]
fn repeated_runs_are_byte_identical_and_seed_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(dir.path());
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(code(&pumpsim(&["simulate", "--config", &cfg, "--out", p(&a)])), 0);
    assert_eq!(code(&pumpsim(&["simulate", "--config", &cfg, "--out", p(&b)])), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_pumpsim"))
        .args(["simulate", "--config", &cfg, "--out", p(&c)])
        .env("PUMPSIM_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let read = |d: &Path| fs::read(d.join("timeseries.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let echo = fs::read_to_string(c.join("scenario.cfg")).unwrap();
    assert_eq!(parse_config(&echo).unwrap().seed, 11);
}

#[test]
fn config_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(dir.path());
    let o = pumpsim(&["simulate", "--config", &cfg, "--out", p(dir.path())]);
    assert_eq!(code(&o), 0);
    let echo = parse_config(&fs::read_to_string(dir.path().join("scenario.cfg")).unwrap()).unwrap();
    assert_eq!(echo, parse_config(&fs::read_to_string(&cfg).unwrap()).unwrap());
}

#[test]
fn bundled_configs_load() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["nominal", "blockage", "clogging", "twoday", "degradation"] {
        assert!(bundled(name).is_some());
        let o = pumpsim(&["gen-inflow", "--config", &format!("builtin:{name}"), "--out", p(dir.path())]);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
    }
    assert_eq!(code(&pumpsim(&["gen-inflow", "--config", "builtin:nosuch", "--out", p(dir.path())])), 2);
}

#[test]
fn gen_inflow_writes_two_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = pumpsim(&["gen-inflow", "--config", &short(dir.path()), "--out", p(dir.path())]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("inflow.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_s,q_in_m3h"));
    assert_eq!(lines.count(), 7200);
}

#[test]
fn gen_fixture_writes_fifty_steps() {
    let dir = tempfile::tempdir().unwrap();
    let o = pumpsim(&["gen-fixture", "--kind", "clogging", "--out", p(dir.path()), "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("fixture.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn diagnose_unlabeled_input_skips_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_cfg(dir.path(), "day.cfg", "seed = 2\nhorizon_s = 30000\n");
    assert_eq!(code(&pumpsim(&["simulate", "--config", &cfg, "--out", p(&run)])), 0);
    let text = fs::read_to_string(run.join("timeseries.csv")).unwrap();
    let stripped: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { format!("{l}\n") } else { format!("{},\n", &l[..l.rfind(',').unwrap()]) })
        .collect();
    let unlabeled = dir.path().join("unlabeled.csv");
    fs::write(&unlabeled, stripped).unwrap();
    let out = dir.path().join("diag");
    let o = pumpsim(&["diagnose", p(&unlabeled), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("metrics skipped"));
    let verdicts = fs::read_to_string(out.join("verdicts.csv")).unwrap();
    assert!(verdicts.lines().count() > 1);
    assert!(!out.join("metrics.csv").exists());
}

#[test]
fn diagnose_method_filter_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_cfg(dir.path(), "day.cfg", "seed = 2\nhorizon_s = 30000\n");
    assert_eq!(code(&pumpsim(&["simulate", "--config", &cfg, "--out", p(&run)])), 0);
    let ts = run.join("timeseries.csv");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&pumpsim(&["diagnose", p(&ts), "--method", "tangent", "--out", p(&a)])), 0);
    assert_eq!(code(&pumpsim(&["diagnose", p(&ts), "--method", "tangent", "--out", p(&b)])), 0);
    let va = fs::read_to_string(a.join("verdicts.csv")).unwrap();
    assert_eq!(va, fs::read_to_string(b.join("verdicts.csv")).unwrap());
    assert!(va.lines().skip(1).all(|l| l.split(',').nth(3) == Some("tangent")));
    assert!(fs::read_to_string(a.join("metrics.csv")).unwrap().lines().all(|l| !l.starts_with("ftest")));
}

#[test]
fn diagnose_without_nominal_samples_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_cfg(
        dir.path(),
        "dry.cfg",
        "horizon_s = 3600\n[inflow]\nbase = sinusoid\nsinusoid.mean_m3h = 0\nsinusoid.amplitude_m3h = 0\npeak.enabled = false\n",
    );
    let o = pumpsim(&["simulate", "--config", &cfg, "--out", p(&run)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("diag");
    let o = pumpsim(&["diagnose", p(&run.join("timeseries.csv")), "--method", "tangent", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
    assert_eq!(fs::read_to_string(out.join("verdicts.csv")).unwrap().lines().count(), 1);
}

#[test]
fn diagnose_malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t_s,level_m\n0,1\n").unwrap();
    assert_eq!(code(&pumpsim(&["diagnose", p(&bad), "--out", p(dir.path())])), 2);
}

#[test]
fn validate_identical_and_disjoint() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_eq!(code(&pumpsim(&["simulate", "--config", &short(dir.path()), "--out", p(&run)])), 0);
    let ts = run.join("timeseries.csv");
    let o = pumpsim(&["validate", p(&ts), p(&ts), "--out", p(dir.path())]);
    assert_eq!(code(&o), 0);
    let v = fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    for line in v.lines().skip(1) {
        let value: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(value, 0.0, "{line}");
    }

    let text = fs::read_to_string(&ts).unwrap();
    let shifted: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return format!("{l}\n");
            }
            let (t, rest) = l.split_once(',').unwrap();
            format!("{},{rest}\n", t.parse::<f64>().unwrap() + 1e6)
        })
        .collect();
    let later = dir.path().join("later.csv");
    fs::write(&later, shifted).unwrap();
    let o = pumpsim(&["validate", p(&ts), p(&later), "--out", p(dir.path())]);
    assert_eq!(code(&o), 2);
}
