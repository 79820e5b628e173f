//! Runs the `oamsort` binary and checks outputs and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oamsort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oamsort"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_netlist(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn route_prints_port_and_power() {
    let o = oamsort(&["route", "--l", "5", "--depth", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("port 5, power 1.000000000000"),
        "{}",
        stdout(&o)
    );

    let o = oamsort(&["route", "--l", "0", "--depth", "4"]);
    assert!(stdout(&o).contains("port 0, power 1.000000000000"));

    let o = oamsort(&["route", "--l", "-1", "--depth", "2"]);
    assert!(stdout(&o).contains("port 3, power 1.000000000000"));
}

#[test]
fn route_machine_readable() {
    let o = oamsort(&["route", "--l", "2", "--depth", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["port"], "2");
    assert_eq!(v["ports"].as_array().unwrap().len(), 4);

    let o = oamsort(&["route", "--l", "2", "--depth", "2", "--format", "csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "port,power");
    assert_eq!(lines[3], "2,1");

    let o = oamsort(&[
        "route",
        "--l",
        "1",
        "--p",
        "1",
        "--depth",
        "1",
        "--frft-depth",
        "2",
    ]);
    assert!(stdout(&o).contains("port 1/3, power 1.000000000000"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(oamsort(&["route", "--depth", "3"]).status.code(), Some(1));
    assert_eq!(
        oamsort(&["route", "--l", "1", "--depth", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        oamsort(&["route", "--l", "x", "--depth", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(oamsort(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        oamsort(&["check", "/nonexistent/netlist"]).status.code(),
        Some(1)
    );
    assert_eq!(oamsort(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_netlist(dir.path(), "good.net", "tree depth=2\n");
    let o = oamsort(&["check", &good]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok: depth=2 frft_depth=- stages=3 explicit=0\n");

    let bad = write_netlist(dir.path(), "bad.net", "stage kind=oam n=1 k=2\n");
    let o = oamsort(&["check", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(
        err.contains("line 1, column 22: k out of range for n"),
        "{err}"
    );
}

#[test]
fn simulate_analytic_identity_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_netlist(dir.path(), "d2.net", "tree depth=2\n");
    let o = oamsort(&["simulate", &net, "--l", "0:3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("l,p,port_0,port_1,port_2,port_3"));
    for (l, line) in lines.enumerate() {
        let cells: Vec<f64> = line
            .split(',')
            .skip(2)
            .map(|c| c.parse().unwrap())
            .collect();
        for (port, w) in cells.iter().enumerate() {
            if port == l {
                assert!((w - 1.0).abs() < 1e-12);
            } else {
                assert!(*w < 1e-20);
            }
        }
    }
}

#[test]
fn simulate_with_root_error_leaks_and_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_netlist(
        dir.path(),
        "err.net",
        "tree depth=2\nstage kind=oam n=0 k=0 rot_err=0.1\n",
    );
    let out = dir.path().join("report.json");
    let matrix = dir.path().join("matrix.csv");
    let o = oamsort(&[
        "simulate",
        &net,
        "--l",
        "0:3",
        "--out",
        out.to_str().unwrap(),
        "--matrix",
        matrix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["engine"], "analytic");
    assert_eq!(v["all_power_ok"], true);
    assert_eq!(v["errors"]["stages"][0]["rot_err"], 0.1);
    for (l, row) in v["rows"].as_array().unwrap().iter().enumerate() {
        let powers: Vec<f64> = row["powers"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let total: f64 = powers.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let leak = total - powers[l];
        assert!(
            (leak - (l as f64 * 0.05).sin().powi(2)).abs() < 1e-12,
            "l={l}"
        );
    }
    let csv = fs::read_to_string(&matrix).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn simulate_field_engine_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_netlist(dir.path(), "d1.net", "tree depth=1\n");
    let o = oamsort(&[
        "simulate", &net, "--engine", "field", "--l", "1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["rows"][0]["powers"][1].as_f64().unwrap() >= 0.99);
    assert_eq!(v["grid"]["grid"], 256);

    let o = oamsort(&["simulate", &net, "--engine", "field", "--l", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let o = oamsort(&[
        "simulate", &net, "--engine", "field", "--l", "4", "--grid", "64", "--force",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = oamsort(&[
        "simulate", &net, "--engine", "field", "--l", "8", "--p", "3", "--force",
    ]);
    assert_eq!(o.status.code(), Some(3), "truncated mode trips the guard");

    let frft = write_netlist(dir.path(), "f.net", "tree depth=1 frft_depth=1\n");
    let o = oamsort(&["simulate", &frft, "--engine", "field", "--l", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_netlist(dir.path(), "d3.net", "tree depth=3 frft_depth=2\n");
    let args = [
        "simulate",
        &net,
        "--l",
        "-4:4",
        "--p",
        "0:2",
        "--seed",
        "42",
        "--error-sigma",
        "0.05",
    ];
    let a = oamsort(&args);
    let b = oamsort(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    assert_eq!(oamsort(&csv_args).stdout, oamsort(&csv_args).stdout);

    let other_seed = oamsort(&[
        "simulate",
        &net,
        "--l",
        "-4:4",
        "--p",
        "0:2",
        "--seed",
        "43",
        "--error-sigma",
        "0.05",
    ]);
    assert_ne!(a.stdout, other_seed.stdout);
}

#[test]
fn dump_field_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.txt");
    let o = oamsort(&[
        "dump-field",
        "--l",
        "1",
        "--grid",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("grid 16 extent 8"));
    let samples: Vec<&str> = lines.collect();
    assert_eq!(samples.len(), 256);
    for s in samples {
        let (re, im) = s.split_once(',').unwrap();
        re.parse::<f64>().unwrap();
        im.parse::<f64>().unwrap();
    }

    let net = write_netlist(dir.path(), "d1.net", "tree depth=1\n");
    let o = oamsort(&[
        "dump-field",
        "--l",
        "1",
        "--grid",
        "32",
        "--netlist",
        &net,
        "--port",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let power: f64 = text
        .lines()
        .skip(1)
        .map(|s| {
            let (re, im) = s.split_once(',').unwrap();
            let (re, im): (f64, f64) = (re.parse().unwrap(), im.parse().unwrap());
            re * re + im * im
        })
        .sum::<f64>()
        * (8.0f64 / 32.0).powi(2);
    assert!((power - 1.0).abs() < 1e-9);
}
