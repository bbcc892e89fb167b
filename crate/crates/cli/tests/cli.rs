use std::process::{Command, Output};

use nosecone_cli::args::{Common, Format, SweepArgs};
use nosecone_cli::commands::{cmd_sweep, SweepCsvRow};
use nosecone_cli::output::{csv_table, parse_csv};

fn nosecone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nosecone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn default_solve_reports_reference_tip() {
    let out = nosecone(&["solve", "--r", "1", "--h", "1", "--astar", "0.5", "--step", "0.001", "--method", "rk4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("free boundary a     0.35112361313"), "{text}");
    assert!(text.contains("\"a_star\":0.5"));
}

#[test]
fn nonpositive_tip_is_a_usage_error() {
    let out = nosecone(&["solve", "--r", "1", "--h", "1", "--astar", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("a* (--astar) > 0 required"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_flags_exit_with_usage_code() {
    assert_eq!(nosecone(&["solve", "--method", "rk5"]).status.code(), Some(2));
    assert_eq!(nosecone(&["sweep", "--r-values="]).status.code(), Some(2));
    assert_eq!(nosecone(&["shoot", "--a0", "0.4", "--a1", "0.4"]).status.code(), Some(2));
    assert_eq!(nosecone(&["shoot", "--root-finder", "bisection", "--a-hi", "1.5"]).status.code(), Some(2));
}

#[test]
fn bracket_without_sign_change_is_a_numerical_error() {
    let out = nosecone(&["shoot", "--root-finder", "bisection", "--a-lo", "0.6", "--a-hi", "0.9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn doubled_geometry_doubles_the_tip() {
    let a = |size: &str| -> f64 {
        let out = nosecone(&["solve", "--r", size, "--h", size, "--format", "json"]);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"]["free_boundary"].as_f64().unwrap()
    };
    assert!((a("2") - 2.0 * a("1")).abs() <= 1e-12);
}

#[test]
fn json_reports_have_stable_keys() {
    let out = nosecone(&["drag-table", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["command"], "drag-table");
    let rows = v["rows"].as_array().unwrap();
    let shapes: Vec<&str> = rows.iter().map(|r| r["shape"].as_str().unwrap()).collect();
    assert_eq!(
        shapes,
        ["hemisphere", "pointed_cone", "paraboloid", "optimal_conical_frustum", "newton_optimal"]
    );
    for row in rows {
        assert!(row.get("k_star").is_some() && row.get("error").is_some());
    }

    let out = nosecone(&["shoot", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let result = &v["result"];
    assert_eq!(result["root_finder"], "secant");
    assert_eq!(
        result["history"].as_array().unwrap().len(),
        result["iterations"].as_u64().unwrap() as usize + 2
    );
}

#[test]
fn hemisphere_row_reports_mismatch_for_tall_nose() {
    let out = nosecone(&["drag-table", "--r", "1", "--h", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[0]["k_star"].is_null());
    assert!(rows[0]["error"].as_str().unwrap().contains("r = h"));
    assert!(rows[1..].iter().all(|r| r["k_star"].is_f64()));
}

#[test]
fn sweep_csv_round_trips() {
    let out = nosecone(&["sweep", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# config {"));
    assert!(text.lines().nth(1).unwrap() == "r,h,r_over_h,a,f,slope_at_r,k_star,parabola_0p3r2,status");
    assert!(!text.contains('\r'));
    let rows: Vec<SweepCsvRow> = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 10);
    let data: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert_eq!(csv_table(&rows).unwrap(), data);

    let direct = cmd_sweep(&SweepArgs {
        common: Common {
            format: Format::Csv,
            ..Common::default()
        },
        r_values: nosecone::similarity::default_r_grid(),
    })
    .unwrap();
    assert_eq!(direct.rows, rows);
}

#[test]
fn single_row_sweep() {
    let out = nosecone(&["sweep", "--r-values", "1", "--format", "csv"]);
    let rows: Vec<SweepCsvRow> = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].f.unwrap() - 0.35112).abs() <= 1e-5);
}

#[test]
fn out_flag_writes_file_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("solve.json");
    let profile = dir.path().join("profile.csv");
    let out = nosecone(&[
        "solve",
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
        "--profile",
        profile.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["result"]["steps"], 925);

    let text = std::fs::read_to_string(&profile).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,y,dydx,x_star,y_star,dydx_star");
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[1], 0.0);
    assert_eq!(first[2], 1.0);
    assert_eq!(first[3], 0.5);
    assert_eq!(text.lines().count(), 927);
}

#[test]
fn compare_lists_three_solvers() {
    let out = nosecone(&["compare", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let solvers: Vec<&str> = text.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(solvers, ["non_iterative", "bisection", "secant"]);
}
