mod common;

use common::{bin, load, run, schema, validate};
use serde_json::Value;

fn stdout_json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr));
    });
    (out.status.code().unwrap(), doc)
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let errors = validate(&schema(schema_name), doc);
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

#[test]
fn honest_run_completes_with_agreeing_keys() {
    let (code, doc) = stdout_json(&[
        "run",
        "--variant",
        "dephasing",
        "--n",
        "64",
        "--delta",
        "16",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert_valid("session-report", &doc);
    assert_eq!(doc["status"], "completed");
    assert_eq!(doc["keys_agree"], true);
    assert_eq!(doc["alice_key_bits"], 64);
    assert_eq!(doc["config"]["seed"], 7);
    assert_eq!(doc["sifted_fraction"], 0.666667);
    assert_eq!(doc["eve"], Value::Null);
}

#[test]
fn attacked_run_aborts_with_exit_code_two() {
    let (code, doc) = stdout_json(&[
        "run",
        "--variant",
        "dephasing",
        "--attack",
        "mrp-x",
        "--n",
        "64",
        "--delta",
        "16",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 2);
    assert_valid("session-report", &doc);
    assert_eq!(doc["aborted"], true);
    assert_eq!(doc["bob_key_bits"], 0);
    assert!(doc["rates"]["e_a"].as_f64().unwrap() > 0.01);
    let last = doc["transcript"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .clone();
    assert_eq!(last["message"], "abort");
    assert_eq!(doc["eve"]["post_accuracy"], Value::Null);
}

#[test]
fn usage_errors_exit_64() {
    let cases: &[&[&str]] = &[
        &["run", "--variant", "dephasing", "--attack", "mrp-z"],
        &["run", "--variant", "rotation", "--attack", "cnot-x"],
        &["run", "--variant", "rotation", "--n", "0"],
        &["run", "--variant", "rotation", "--delta", "0"],
        &["run", "--variant", "rotation", "--p", "1.5"],
        &["run", "--variant", "rotation", "--noise", "uniform:3:1"],
        &["run", "--variant", "sideways"],
        &["run"],
        &[
            "sweep",
            "--variant",
            "dephasing",
            "--attack",
            "mrp-x",
            "--trials",
            "0",
        ],
        &["oracle", "--variant", "dephasing", "--attack", "mre-z"],
        &["tables", "--format", "xml"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["run", "--help"]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn tables_json_and_csv_agree() {
    let (code, doc) = stdout_json(&["tables"]);
    assert_eq!(code, 0);
    assert_valid("tables", &doc);
    let rows = doc["rows"].as_array().unwrap();
    let count = |v: &str| rows.iter().filter(|r| r["variant"] == v).count();
    assert_eq!((count("dephasing"), count("rotation")), (4, 6));

    let csv = String::from_utf8(run(&["tables", "--format", "csv"]).stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("variant,attack,e_x,e_z,e_a_computed,e_a_paper,match_flag")
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 10);
    assert!(body.contains(&"dephasing,bell,0.25,0.125,0.1875,0.1925,false"));
    assert_eq!(body.iter().filter(|l| l.ends_with(",true")).count(), 9);

    let (_, rot) = stdout_json(&["tables", "--variant", "rotation"]);
    assert_eq!(rot["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn sweep_points_cover_the_probability_grid() {
    let (code, doc) = stdout_json(&[
        "sweep",
        "--variant",
        "dephasing",
        "--attack",
        "mrp-x",
        "--trials",
        "20000",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    assert_valid("sweep", &doc);
    let points = doc["points"].as_array().unwrap();
    let ps: Vec<f64> = points.iter().map(|p| p["p"].as_f64().unwrap()).collect();
    assert_eq!(ps, [0.0, 0.25, 0.5, 0.75, 1.0]);
    let ez: Vec<f64> = points.iter().map(|p| p["e_z"].as_f64().unwrap()).collect();
    let se: Vec<f64> = points.iter().map(|p| p["se_z"].as_f64().unwrap()).collect();
    assert_eq!(ez[0], 0.0);
    assert!((ez[2] - 0.25).abs() < 3.0 * se[2], "{}", ez[2]);
    assert!((ez[4] - 0.5).abs() < 3.0 * se[4], "{}", ez[4]);
    for w in ez.windows(2).zip(se.windows(2)) {
        assert!(w.0[1] + 3.0 * w.1[1] >= w.0[0], "not monotone: {ez:?}");
    }
    for pt in points {
        assert_eq!(pt["e_x"], 0.0);
    }
}

#[test]
fn oracle_report_validates() {
    let (code, doc) = stdout_json(&[
        "oracle",
        "--variant",
        "rotation",
        "--attack",
        "cnot-z",
        "--p",
        "0.5",
    ]);
    assert_eq!(code, 0);
    assert_valid("oracle", &doc);
    assert_eq!(doc["e_x"], 0.125);
    assert_eq!(doc["e_z"], 0.0);
    assert_eq!(doc["probability_mass"], 1.0);

    let csv = String::from_utf8(
        run(&[
            "oracle",
            "--variant",
            "rotation",
            "--attack",
            "cnot-z",
            "--format",
            "csv",
        ])
        .stdout,
    )
    .unwrap();
    assert!(csv.starts_with("variant,attack,intercept_probability,cnot_pair,e_x,e_z,e_a,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn run_csv_is_one_record() {
    let out = run(&[
        "run",
        "--variant",
        "rotation",
        "--noise",
        "random",
        "--format",
        "csv",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), row.len());
    let field = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(field("status"), "completed");
    assert_eq!(field("keys_agree"), "true");
    assert!(field("noise").starts_with("uniform:0:6.28"));
}

#[test]
fn output_flag_and_env_directory() {
    let dir = tempfile::tempdir().unwrap();

    let explicit = dir.path().join("nested/report.json");
    let out = run(&[
        "run",
        "--variant",
        "dephasing",
        "--seed",
        "2",
        "--output",
        explicit.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_valid("session-report", &load(&explicit));

    let out = bin()
        .args(["tables", "--format", "csv"])
        .env("DFS_QKD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("tables.csv")).unwrap();
    assert_eq!(written.lines().count(), 11);

    let out = bin()
        .args(["run", "--variant", "rotation", "--seed", "9"])
        .env("DFS_QKD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("run-rotation-none-s9.json").exists());
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let cases: &[&[&str]] = &[
        &[
            "run",
            "--variant",
            "dephasing",
            "--attack",
            "bell",
            "--p",
            "0.3",
            "--noise",
            "random",
            "--split",
            "0.5",
            "--seed",
            "11",
        ],
        &[
            "run",
            "--variant",
            "rotation",
            "--attack",
            "cnot-z",
            "--format",
            "csv",
            "--seed",
            "11",
        ],
        &[
            "sweep",
            "--variant",
            "rotation",
            "--attack",
            "mre-z",
            "--trials",
            "500",
            "--seed",
            "5",
        ],
        &["oracle", "--variant", "dephasing", "--attack", "bell"],
        &["tables"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
    let a = run(&["run", "--variant", "dephasing", "--seed", "1"]).stdout;
    let b = run(&["run", "--variant", "dephasing", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn schema_checker_rejects_malformed_documents() {
    let (_, mut doc) = stdout_json(&["oracle", "--variant", "dephasing", "--attack", "mrp-x"]);
    assert_valid("oracle", &doc);
    let s = schema("oracle");
    doc["e_x"] = Value::from(1.5);
    doc["attack"] = Value::from("teleport");
    doc["extra"] = Value::Bool(true);
    doc.as_object_mut().unwrap().remove("branch_count");
    let errors = validate(&s, &doc);
    assert_eq!(errors.len(), 4, "{errors:#?}");
}
