use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ks-selfsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn verify_passes_at_unit_parameters() {
    let out = run(&["verify", "--a", "1", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["diagnostics"]["all_passed"], Value::Bool(true));
    let entries = v["result"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["passed"] == Value::Bool(true)));
}

#[test]
fn taustar_brackets_the_transition() {
    let out = run(&["taustar", "--lo", "0.5", "--hi", "1.0", "--width", "0.02"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    let (lo, hi) = (r["lo"].as_f64().unwrap(), r["hi"].as_f64().unwrap());
    assert!(hi - lo < 0.02);
    assert!(lo < 0.64 && hi > 0.62, "[{lo}, {hi}]");
}

#[test]
fn crosscheck_agrees() {
    let out = run(&["crosscheck", "--a", "1", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    for k in ["rel_mass", "rel_sigma", "rel_v0"] {
        assert!(r[k].as_f64().unwrap() < 1e-4, "{k}");
    }
}

#[test]
fn json_embeds_resolved_config() {
    let v = json(&run(&["solve", "--a", "2", "--tau", "0.5"]));
    assert_eq!(v["config"]["command"], "solve");
    assert_eq!(v["config"]["parameters"]["eps"].as_f64(), Some(1e-6));
    assert_eq!(v["config"]["parameters"]["ymax"].as_f64(), Some(30.0));
    assert_eq!(v["config"]["format"], "json");
    for k in ["mass_over_2pi", "sigma", "l", "v0", "mass_from_S"] {
        assert!(v["result"][k].is_number(), "{k}");
    }
    assert!(v["diagnostics"].is_object());
}

#[test]
fn output_is_byte_identical() {
    let args = ["sweep", "--tau", "2", "--n", "25", "--a-max", "100"];
    let (a, b) = (run(&args), run(&[&args[..], &["--jobs", "1"]].concat()));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("a,mass_over_2pi,sigma,v0"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn csv_headers() {
    let solve = run(&["solve", "--a", "1", "--tau", "1", "--format", "csv"]);
    assert!(solve.stdout.starts_with(b"y,phi,dphi,S\n"));
    let w = run(&["solve-w", "--s", "-1", "--tau", "1", "--format", "csv"]);
    assert!(w.stdout.starts_with(b"r,w,dw,M\n"));
    let sd = run(&[
        "sdiagram", "--tau", "1", "--s-min", "-1", "--s-max", "1", "--ds", "1",
    ]);
    let text = String::from_utf8(sd.stdout).unwrap();
    assert!(text.starts_with("s,sigma,log_sigma,v0,log_v0,M,log1p_M\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn numbers_use_twelve_significant_digits() {
    let text =
        String::from_utf8(run(&["solve", "--a", "1", "--tau", "1", "--format", "csv"]).stdout)
            .unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let mantissa = field
            .split('e')
            .next()
            .unwrap()
            .trim_start_matches('-')
            .replace('.', "");
        assert!(mantissa.trim_start_matches('0').len() <= 12, "{field}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["nope"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--tau", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--a", "-1", "--tau", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--a", "1", "--tau", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["mstar", "--tau", "1", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--a", "1", "--tau", "1", "--jobs", "0"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&[
        "solve",
        "--a",
        "1",
        "--tau",
        "1",
        "--output",
        "/nonexistent/dir/x.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("ks-selfsim-{}.json", std::process::id()));
    let out = run(&[
        "mstar",
        "--tau",
        "10",
        "--n",
        "40",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(v["result"]["mass_over_2pi"].as_f64().unwrap() > 4.0);
    assert_eq!(v["result"]["attained"], Value::Bool(true));
}

#[test]
fn multiplicity_finds_two_roots() {
    let v = json(&run(&["multiplicity", "--tau", "10", "--target", "4.5"]));
    let roots = v["result"]["roots"].as_array().unwrap();
    assert!(roots.len() >= 2);
    assert_eq!(
        run(&["multiplicity", "--tau", "0.3", "--target", "5"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn table_format_renders() {
    let out = run(&["dirac", "--tau", "1", "--a", "10,100", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rows (2 rows)"));
    assert!(text.contains("gap_shrinking"));
}
