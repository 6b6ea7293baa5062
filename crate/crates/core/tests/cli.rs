use std::process::{Command, Output};

fn qzrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qzrp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

#[test]
fn verify_r_passes() {
    let out = qzrp(&[
        "verify-r",
        "--n",
        "2",
        "--content",
        "1,1",
        "--q",
        "1/2",
        "--lambda",
        "1/2",
        "--mu",
        "1/4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let names: Vec<&str> = recs.iter().map(|r| r["name"].as_str().unwrap()).collect();
    for want in [
        "sum_rule",
        "sum_to_unity",
        "inversion",
        "ybe",
        "ybe_transposed",
        "factorization",
    ] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    for r in &recs {
        assert_eq!(r["passed"], true);
        assert!(r["anchor"].is_string() && r["params"].is_object());
    }
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(qzrp(&["verify-r", "--q", "0/1"]).status.code(), Some(2));
    assert_eq!(
        qzrp(&["verify-r", "--n", "2", "--content", "1,1,1"])
            .status
            .code(),
        Some(2)
    );
    let out = qzrp(&[
        "stationary",
        "--n",
        "3",
        "--content",
        "1,0,1",
        "--method",
        "mpa",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not basic"));
    assert_eq!(
        qzrp(&[
            "stationary",
            "--n",
            "2",
            "--L",
            "3",
            "--content",
            "1,1",
            "--mu",
            "1/4,1/3"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn tiny_cutoff_is_reported_unstable() {
    let out = qzrp(&["verify-zf", "--n", "2", "--cutoff", "2", "--bound", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(records(&out).iter().any(|r| r["cutoff_stable"] == false));
}

#[test]
fn verify_zf_default_suite_n2() {
    let out = qzrp(&["verify-zf", "--n", "2", "--cutoff", "6", "--bound", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert!(recs.iter().any(|r| r["name"] == "zf_relation"));
    assert!(recs.iter().any(|r| r["name"] == "closed_vs_recursive"));
    assert!(recs.iter().any(|r| r["name"] == "q0_reduction"));
}

#[test]
fn stationary_example_consistent() {
    let out = qzrp(&[
        "stationary",
        "--n",
        "3",
        "--L",
        "2",
        "--content",
        "1,1,1",
        "--q",
        "1/3",
        "--mu",
        "1/4",
        "--method",
        "both",
        "--normalization",
        "reference-one",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 3);
    let exact = &recs[0]["states"];
    assert_eq!(exact[0]["state"], "(0,0,0);(1,1,1)");
    assert_eq!(exact[0]["exact"], "1");
    // ratio of the |3,12> and |0,123> coefficients at q = 1/3, mu = 1/4
    assert_eq!(exact[1]["exact"], "219/595");
    assert_eq!(recs[1]["method"], "mpa");
    assert_eq!(recs[2]["name"], "mpa_vs_exact");
    assert_eq!(recs[2]["passed"], true);
}

#[test]
fn stationary_mpa_non_convergence_exits_one() {
    let out = qzrp(&[
        "stationary",
        "--n",
        "2",
        "--L",
        "3",
        "--content",
        "2,1",
        "--q",
        "1/2",
        "--method",
        "both",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracles_deterministic_and_targeted() {
    let a = qzrp(&["oracles", "--seed", "9"]);
    let b = qzrp(&["oracles", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let one = qzrp(&["oracles", "--identity", "f-symmetry", "--smax", "8"]);
    assert_eq!(one.status.code(), Some(0));
    let recs = records(&one);
    assert_eq!(recs.len(), 3);
    assert!(recs
        .iter()
        .all(|r| r["name"] == "f-symmetry" && r["params"]["smax"] == "8"));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = std::env::temp_dir().join(format!("qzrp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "L": 2, "content": [1, 1], "q": "1/3", "mu": ["1/4"], "format": "csv"}"#,
    )
    .unwrap();
    let from_file = qzrp(&["stationary", "--config", path.to_str().unwrap()]);
    let from_flags = qzrp(&[
        "stationary",
        "--n",
        "2",
        "--L",
        "2",
        "--content",
        "1,1",
        "--q",
        "1/3",
        "--mu",
        "1/4",
        "--format",
        "csv",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);
    let overridden = qzrp(&[
        "stationary",
        "--config",
        path.to_str().unwrap(),
        "--q",
        "1/5",
    ]);
    assert_ne!(overridden.stdout, from_file.stdout);
    std::fs::write(&path, r#"{"n": 2, "bogus": 1}"#).unwrap();
    assert_eq!(
        qzrp(&["stationary", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}
