mod common;

use std::process::Command;

use common::channels_dir;
use serde_json::Value;

fn channel(name: &str) -> String {
    channels_dir().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = qmac::cli::run(
        std::iter::once("qmac").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn validate_exit_codes() {
    for name in [
        "adder-classical.json",
        "qubit-pure-mac.json",
        "holevo-two-state.json",
        "orthogonal-noiseless.json",
        "constant-qubit.json",
    ] {
        let (code, out, _) = run(&["validate", "--channel", &channel(name)]);
        assert_eq!(code, 0, "{name}");
        assert!(out.starts_with("valid:"));
    }

    let dir = tempfile::tempdir().unwrap();
    let mut file: Value =
        serde_json::from_str(&std::fs::read_to_string(channel("qubit-pure-mac.json")).unwrap())
            .unwrap();
    file["states"].as_object_mut().unwrap().remove("1,0");
    let missing = dir.path().join("missing.json");
    std::fs::write(&missing, file.to_string()).unwrap();
    let (code, out, _) = run(&["validate", "--channel", missing.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("(1,0)"), "{out}");

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"senders\": [").unwrap();
    assert_eq!(
        run(&["validate", "--channel", broken.to_str().unwrap()]).0,
        2
    );
    assert_eq!(
        run(&["validate", "--channel", "/nonexistent/channel.json"]).0,
        2
    );
}

#[test]
fn region_adder_csv() {
    let (code, out, _) = run(&[
        "region",
        "--channel",
        &channel("adder-classical.json"),
        "--corners",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "kind,label,index,value\n\
         bound,{1},,1\n\
         bound,{2},,1\n\
         bound,\"{1,2}\",,1.5\n\
         corner,1-2,1,0.5\n\
         corner,1-2,2,1\n\
         corner,2-1,1,1\n\
         corner,2-1,2,0.5\n"
    );
}

#[test]
fn region_holevo_and_mixture() {
    let v = json(&["region", "--channel", &channel("holevo-two-state.json")]);
    let b = v["constraints"][0]["bound"].as_f64().unwrap();
    assert!((b - 0.600876).abs() < 1e-5);

    let adder = channel("adder-classical.json");
    let plain = json(&["region", "--channel", &adder, "--corners"]);
    let mixed = json(&[
        "region",
        "--channel",
        &adder,
        "--corners",
        "--mixture",
        "1:uniform",
    ]);
    assert_eq!(plain["constraints"], mixed["constraints"]);
    assert_eq!(plain["corners"], mixed["corners"]);

    let three = json(&[
        "region",
        "--channel",
        &adder,
        "--mixture",
        "0.5:uniform|0.5:1,0;0,1",
        "--mixture-cap",
        "2",
    ]);
    // second component is deterministic, so every bound halves
    let halves: Vec<f64> = three["constraints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["bound"].as_f64().unwrap())
        .collect();
    assert_eq!(halves, vec![0.5, 0.5, 0.75]);
    assert_eq!(
        run(&[
            "region",
            "--channel",
            &adder,
            "--mixture",
            "0.3:uniform|0.3:uniform|0.4:uniform"
        ])
        .0,
        1
    );
}

#[test]
fn region_point_and_sweep() {
    let adder = channel("adder-classical.json");
    let inside = json(&["region", "--channel", &adder, "--point", "0.5,1"]);
    assert_eq!(inside["point"]["member"], true);
    let outside = json(&["region", "--channel", &adder, "--point", "0.8,0.8"]);
    assert_eq!(outside["point"]["member"], false);

    let sweep = json(&["region", "--channel", &adder, "--sweep", "4"]);
    assert_eq!(sweep["points"].as_array().unwrap().len(), 25);
    let boundary = sweep["upper_boundary"].as_array().unwrap();
    assert_eq!(
        boundary,
        &serde_json::json!([[0.0, 0.0], [0.0, 1.0], [0.5, 1.0], [1.0, 0.5], [1.0, 0.0]])
            .as_array()
            .unwrap()
            .clone()
    );
    let grid = json(&["region", "--channel", &adder, "--prior", "grid:4"]);
    assert_eq!(grid, sweep);

    let (code, csv, _) = run(&[
        "region",
        "--channel",
        &adder,
        "--sweep",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("point,prior,kind,label,index,value\n"));
    assert!(csv.contains("\n,,boundary,"));
}

#[test]
fn priors_are_checked() {
    let adder = channel("adder-classical.json");
    let (code, _, err) = run(&[
        "region",
        "--channel",
        &adder,
        "--prior",
        "0.25,0.25,0.25,0.25",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("joint"));
    assert_eq!(
        run(&["region", "--channel", &adder, "--prior", "0.5,0.5"]).0,
        2
    );
    assert_eq!(
        run(&["region", "--channel", &adder, "--prior", "0.9,0.5;0.5,0.5"]).0,
        2
    );
    let v = json(&[
        "info",
        "--channel",
        &adder,
        "--prior",
        "[[0.5,0.5],[0.5,0.5]]",
    ]);
    assert_eq!(v["I_cond"]["3"], 1.5);
}

#[test]
fn simulate_noiseless_and_reproducible() {
    let v = json(&[
        "simulate",
        "--channel",
        &channel("orthogonal-noiseless.json"),
        "-n",
        "1",
        "--full-codebooks",
        "--seed",
        "0",
    ]);
    assert!(v["mean_avg_error"].as_f64().unwrap().abs() < 1e-12);

    let args = [
        "simulate",
        "--channel",
        &channel("qubit-pure-mac.json"),
        "-n",
        "2",
        "--corner-fraction",
        "0.5",
        "--seed",
        "7",
        "--draws",
        "3",
    ];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert!(v["draws"][0]["report"].get("wall_clock_ms").is_none());
    assert_eq!(v["draws"].as_array().unwrap().len(), 3);

    let mut timed = args.to_vec();
    timed.push("--timing");
    let v = json(&timed);
    assert!(v["draws"][0]["report"]["wall_clock_ms"].is_number());
}

#[test]
fn simulate_caps_and_usage() {
    let q = channel("qubit-pure-mac.json");
    let (code, _, err) = run(&[
        "--max-block-dim",
        "8",
        "simulate",
        "--channel",
        &q,
        "-n",
        "4",
        "--sizes",
        "2,2",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("16") && err.contains('8'), "{err}");
    assert_eq!(
        run(&["simulate", "--channel", &q, "-n", "2", "--seed", "1"]).0,
        2
    );
    assert_eq!(
        run(&[
            "simulate",
            "--channel",
            &q,
            "-n",
            "2",
            "--sizes",
            "2",
            "--seed",
            "1"
        ])
        .0,
        2
    );
    assert_eq!(
        run(&["simulate", "--channel", &q, "-n", "2", "--sizes", "2,2"]).0,
        2
    );
    assert_eq!(
        run(&[
            "simulate",
            "--channel",
            &q,
            "-n",
            "1",
            "--sizes",
            "2,2",
            "--order",
            "1-1",
            "--seed",
            "1"
        ])
        .0,
        2
    );

    let (code, csv, _) = run(&[
        "simulate",
        "--channel",
        &q,
        "-n",
        "1",
        "--sizes",
        "2,2",
        "--seed",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("draw,n,L1,L2,order,avg_error,stage_1_error,stage_2_error\n"));
}

#[test]
fn check_command() {
    let (code, out, _) = run(&["check", "--seed", "3", "--trials", "0"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);

    let (code, out, err) = run(&[
        "check",
        "--seed",
        "3",
        "--trials",
        "20",
        "--channel",
        &channel("qubit-pure-mac.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["suites"].as_array().unwrap().len(), 4);
    assert_eq!(err.lines().count(), 4);

    assert_eq!(run(&["check", "--seed", "3", "--tol", "-1"]).0, 2);
    assert_eq!(run(&["check", "--seed", "3", "--tol=-1e-9"]).0, 2);
    assert_eq!(run(&["check", "--seed", "3", "--suite", "nonsense"]).0, 2);

    // an absurd tolerance turns every equality check into a failure
    let (code, out, _) = run(&[
        "check", "--seed", "3", "--trials", "2", "--suite", "entropy", "--tol", "1e-300",
    ]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    let violation = &v["suites"][0]["violations"][0];
    assert!(violation["instance"]["channel"]["senders"].is_array());
    assert!(violation["trial_seed"].is_u64());
}

#[test]
fn output_file_and_help() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("region.json");
    let (code, out, _) = run(&[
        "region",
        "--channel",
        &channel("adder-classical.json"),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["constraints"].as_array().unwrap().len(), 3);

    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("simulate"));
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn binary_reads_dimension_cap_from_environment() {
    let bin = env!("CARGO_BIN_EXE_qmac");
    let q = channel("qubit-pure-mac.json");
    let base = [
        "simulate",
        "--channel",
        q.as_str(),
        "-n",
        "4",
        "--sizes",
        "2,2",
        "--seed",
        "1",
    ];
    let status = Command::new(bin)
        .args(base)
        .env("QMAC_MAX_DIM", "8")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = Command::new(bin)
        .args(base)
        .env("QMAC_MAX_DIM", "8")
        .args(["--max-block-dim", "16"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    let status = Command::new(bin)
        .args(base)
        .env_remove("QMAC_MAX_DIM")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
}
