use std::path::Path;
use std::process::{Command, Output};

use analytic_pr::formats::{from_json_str, WindowFile};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_analytic-pr")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn gen_window_case1_example_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "w.json");
    let res = cli(&["gen-window", "--case", "1", "--n", "48", "--bandlimit", "2", "--i", "2", "--seed", "7", "--output", &out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let ws = from_json_str::<WindowFile>(&std::fs::read_to_string(&out).unwrap()).unwrap().to_window_set().unwrap();
    assert_eq!((ws.n(), ws.bandlimit(), ws.zero_run_start()), (48, 2, 2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("[ok] underdetermined recursion"));
}

#[test]
fn gen_window_case3_odd_length_fails() {
    let res = cli(&["gen-window", "--case", "3", "--n", "7"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("even N required"));
}

#[test]
fn gen_window_is_byte_deterministic() {
    let a = cli(&["gen-window", "--case", "2", "--n", "12", "--i", "3", "--seed", "11"]);
    let b = cli(&["gen-window", "--case", "2", "--n", "12", "--i", "3", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = cli(&["gen-window", "--case", "2", "--n", "12", "--i", "3", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn run_reports_are_deterministic_and_noise_zero_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (tag, extra) in [("a", vec![]), ("b", vec![]), ("c", vec!["--noise", "0"])] {
        let csv = path(dir.path(), &format!("{tag}.csv"));
        let summary = path(dir.path(), &format!("{tag}.json"));
        let mut args = vec!["run", "--case", "1", "--n", "8", "--trials", "100", "--seed", "3"];
        args.extend(["--output", &csv, "--summary", &summary]);
        args.extend(extra);
        let res = cli(&args);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&summary).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(text.starts_with("seed,n,case,error,status,wall_time_ms\n"));
    assert_eq!(text.lines().count(), 101);

    let summary: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    let cell = &summary["cells"][0];
    assert_eq!(cell["measurement_count"], 13);
    assert!(cell["success_rate"].as_f64().unwrap() >= 0.99);
}

#[test]
fn run_case3_counts() {
    let dir = tempfile::tempdir().unwrap();
    let summary = path(dir.path(), "s.json");
    let res = cli(&["run", "--case", "3", "--n", "16", "--trials", "100", "--output", &path(dir.path(), "t.csv"), "--summary", &summary]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["cells"][0]["measurement_count"], 23);
    assert!(v["cells"][0]["success_rate"].as_f64().unwrap() >= 0.99);
}

#[test]
fn run_rejects_bad_parameters() {
    assert!(!cli(&["run", "--case", "3", "--n", "9", "--trials", "1"]).status.success());
    assert!(!cli(&["run", "--case", "1", "--n", "8", "--l", "4", "--trials", "1"]).status.success());
}

#[test]
fn measure_then_recover_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (w, z, y, r) = (
        path(dir.path(), "w.json"),
        path(dir.path(), "z.json"),
        path(dir.path(), "y.csv"),
        path(dir.path(), "r.json"),
    );
    assert!(cli(&["gen-window", "--case", "2", "--n", "10", "--i", "4", "--seed", "1", "--output", &w]).status.success());
    assert!(cli(&["gen-signal", "--n", "10", "--seed", "2", "--output", &z]).status.success());
    assert!(cli(&["measure", "--signal", &z, "--windows", &w, "--format", "csv", "--output", &y]).status.success());
    let res = cli(&["recover", "--windows", &w, "--measurements", &y, "--output", &r]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let read = |p: &str| serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(p).unwrap()).unwrap();
    let (truth, found) = (read(&z), read(&r));
    assert_eq!(found["ambiguity"], "global_sign");
    let vec_of = |v: &serde_json::Value, k: &str| -> Vec<f64> {
        v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    let err = |sign: f64| -> f64 {
        vec_of(&truth, "re")
            .iter()
            .zip(vec_of(&found, "re"))
            .chain(vec_of(&truth, "im").iter().zip(vec_of(&found, "im")))
            .map(|(a, b)| (sign * a - b).abs())
            .fold(0.0, f64::max)
    };
    assert!(err(1.0).min(err(-1.0)) < 1e-9);
}

#[test]
fn demo_layouts() {
    let one = String::from_utf8(cli(&["demo", "--case", "1", "--n", "6"]).stdout).unwrap();
    assert!(one.contains("n=4  k=0  | z0w0 z1w1 z2w2"));
    let two = String::from_utf8(cli(&["demo", "--case", "2", "--n", "6"]).stdout).unwrap();
    assert!(two.contains("n=1  k=3  | z0w3           z3w0"));
    assert!(!two.contains("n=4 "));
    let zero = String::from_utf8(cli(&["demo", "--n", "6", "--zero"]).stdout).unwrap();
    assert!(zero.lines().filter(|l| l.contains("|y|")).all(|l| l.ends_with("|y| = 0")));
    assert!(!cli(&["demo", "--n", "17"]).status.success());
}
