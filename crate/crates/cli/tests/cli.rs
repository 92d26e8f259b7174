use std::path::Path;
use std::process::{Command, Output};

fn fuzzy_ari(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzy-ari"))
        .args(args)
        .env_remove("FUZZY_ARI_SEED")
        .env_remove("FUZZY_ARI_WORKERS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

const FUZZY: &str = "0.9,0.1\n0.7,0.3\n0.2,0.8\n0.1,0.9\n0.6,0.4\n";

fn stdout_json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn identical_files_adjust_to_one_under_flat() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", FUZZY);
    let o = fuzzy_ari(&[
        "compare",
        &a,
        &a,
        "--models",
        "flat",
        "--samples",
        "20000",
        "--seed",
        "1",
        "--format",
        "json",
    ]);
    let v = stdout_json(&o);
    assert_eq!(v[0]["model"], "flat");
    assert_eq!(v[0]["adjusted"].as_f64().unwrap(), 1.0);
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.csv", FUZZY);
    let bad = write(
        dir.path(),
        "bad.csv",
        "0.5,0.5\n0.5,0.5\nzero,1\n0.5,0.5\n0.5,0.5\n",
    );
    let o = fuzzy_ari(&["compare", &good, &bad, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    let o = fuzzy_ari(&["compare", "--models", "nonsense", "a.csv", "b.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let o = fuzzy_ari(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_adjustment_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.csv", "1\n1\n1\n");
    let o = fuzzy_ari(&["compare", &one, &one, "--models", "perm", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    // The record is still written, with the reason in the error column.
    assert!(String::from_utf8_lossy(&o.stdout).contains("adjustment undefined"));
}

#[test]
fn json_and_csv_carry_the_same_values() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", FUZZY);
    let b = write(dir.path(), "b.csv", "1,0\n1,0\n0,1\n0,1\n0,1\n");
    let base = [
        "compare",
        &a,
        &b,
        "--samples",
        "20000",
        "--seed",
        "7",
        "--models",
        "perm,fit,sym,flat",
    ];
    let json = stdout_json(&fuzzy_ari(&[&base[..], &["--format", "json"]].concat()));
    let csv = fuzzy_ari(&[&base[..], &["--format", "csv"]].concat());
    assert!(csv.status.success());
    let mut reader = csv::Reader::from_reader(csv.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let objects = json.as_array().unwrap();
    assert_eq!(rows.len(), objects.len());
    for (row, obj) in rows.iter().zip(objects) {
        let obj = obj.as_object().unwrap();
        assert_eq!(headers.len(), obj.len());
        for (h, cell) in headers.iter().zip(row.iter()) {
            let want = match &obj[h] {
                serde_json::Value::Null => String::new(),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            assert_eq!(cell, want, "field {h}");
        }
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", FUZZY);
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_fuzzy-ari"))
            .args([
                "compare",
                &a,
                &a,
                "--models",
                "fit",
                "--samples",
                "5000",
                "--sampled",
            ])
            .env("FUZZY_ARI_SEED", seed)
            .output()
            .unwrap()
    };
    let (x, y) = (run("11"), run("11"));
    assert!(x.status.success());
    assert_eq!(x.stdout, y.stdout);
    assert!(x.stderr.is_empty(), "no seed is reported when one is given");
    let drawn = fuzzy_ari(&["compare", &a, &a, "--models", "fit", "--samples", "5000"]);
    assert!(String::from_utf8_lossy(&drawn.stderr).starts_with("seed: "));
}

#[test]
fn toy_writes_matrices_and_ranks_comparisons() {
    let dir = tempfile::tempdir().unwrap();
    let toy_dir = dir.path().join("toy");
    let o = fuzzy_ari(&[
        "toy",
        "--dir",
        toy_dir.to_str().unwrap(),
        "--models",
        "perm",
        "--samples",
        "100000",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    let v = stdout_json(&o);
    assert_eq!(v.as_array().unwrap().len(), 10);
    assert_eq!(std::fs::read_dir(&toy_dir).unwrap().count(), 5);
    let mut scored: Vec<(u64, f64)> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["comparison"].as_u64().unwrap(),
                r["adjusted"].as_f64().unwrap(),
            )
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut top = [scored[0].0, scored[1].0];
    top.sort_unstable();
    assert_eq!(top, [3, 7]);
    // The written files reproduce comparison 3.
    let c = fuzzy_ari(&[
        "compare",
        toy_dir.join("uneven_low_fuzzy.csv").to_str().unwrap(),
        toy_dir.join("uneven_hard.csv").to_str().unwrap(),
        "--models",
        "perm",
        "--samples",
        "100000",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    let c = stdout_json(&c);
    let three = v
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["comparison"] == 3)
        .unwrap();
    assert_eq!(c[0]["raw"], three["raw"]);
}

#[test]
fn benchmark_emits_one_row_per_cell_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.json",
        r#"{"n_clusters":[2,4],"n_points":[128],"imbalance":[0.8,0.6,0.4,0.2],"precision":[0.0,0.01,0.1,1.0,1.5],"randomize_rate":[0.2,0.4,0.6,0.8,1.0],"replicates":1,"seed":1}"#,
    );
    let o = fuzzy_ari(&[
        "benchmark",
        "--grid",
        &grid,
        "--models",
        "perm,flat",
        "--samples",
        "500",
        "--seed",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv::Reader::from_reader(o.stdout.as_slice())
        .records()
        .count();
    assert_eq!(rows, 2 * 4 * 5 * 5 * 2);
}

#[test]
fn bad_grid_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.json",
        r#"{"n_clusters":[2],"n_points":[128],"bogus":1}"#,
    );
    let o = fuzzy_ari(&["benchmark", "--grid", &grid, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_error_analysis_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.json",
        r#"{"n_clusters":[2],"n_points":[100],"imbalance":[0.8],"precision":[1.0],"randomize_rate":[0.5],"replicates":1}"#,
    );
    let details = dir.path().join("details.json");
    let o = fuzzy_ari(&[
        "error-analysis",
        "--grid",
        &grid,
        "--reps",
        "2",
        "--samples",
        "20000",
        "--seed",
        "5",
        "--format",
        "json",
        "--details",
        details.to_str().unwrap(),
    ]);
    let v = stdout_json(&o);
    let models: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["model"].as_str().unwrap())
        .collect();
    assert_eq!(models, ["fit", "sym", "flat"]);
    for s in v.as_array().unwrap() {
        let n = s["computations"].as_u64().unwrap();
        assert!(n == 2 || (n == 0 && s["dropped"] == 1), "{s}");
        assert!(s["fraction_within"].as_f64().is_none_or(|f| f <= 1.0));
    }
    let cells: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(details).unwrap()).unwrap();
    assert!(cells
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["values"].as_array().unwrap().len() == 2));
}
