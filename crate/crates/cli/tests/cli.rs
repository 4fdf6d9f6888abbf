use std::process::{Command, Output};

fn udisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udisc")).args(args).output().expect("spawn udisc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn theory_example_one() {
    let o = udisc(&["theory", "--example", "1", "--n", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((field(&text, "theta_over_pi") - 1.0 / 6.0).abs() < 1e-12);
    assert!(text.contains("min_copies = 6"));
    assert!((field(&text, "p_succ_single") - 0.62941).abs() < 1e-5);
    assert!((field(&text, "p_succ_n6") - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_noiseless_example_two_is_perfect() {
    let o = udisc(&["sweep", "--example", "2", "--n", "16", "--shots", "2000", "--noise", "0,0,0", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "w,d,measurement,p_succ_raw,p_succ_swapped,ties,bound,shots,seed,wall_time"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let widths: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(widths, ["1", "2", "4", "8", "16"]);
    for r in &rows {
        assert_eq!(r[3].parse::<f64>().unwrap(), 1.0);
        assert_eq!(r[6].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn sweep_emits_only_divisor_pairs_within_cap() {
    let o = udisc(&["sweep", "--example", "1", "--n", "42", "--shots", "10", "--noise", "0,0,0"]);
    assert!(o.status.success());
    let pairs: Vec<(usize, usize)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect();
    assert_eq!(pairs, vec![(1, 42), (2, 21), (3, 14), (6, 7), (7, 6), (14, 3)]);
}

#[test]
fn missing_config_is_a_config_error() {
    let o = udisc(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/not/here.json"));
}

#[test]
fn bad_flags_are_config_errors() {
    assert_eq!(udisc(&["theory", "--example", "3", "--n", "6"]).status.code(), Some(1));
    assert_eq!(udisc(&["sweep", "--example", "1", "--n", "6", "--noise", "0,0"]).status.code(), Some(1));
    assert_eq!(udisc(&["sweep", "--example", "1", "--n", "6", "--noise", "0,2,0"]).status.code(), Some(1));
    assert_eq!(udisc(&["sweep", "--example", "1", "--n", "6", "--measurement", "parity"]).status.code(), Some(1));
    assert_eq!(udisc(&["build", "--example", "1", "--n", "6", "--w", "4", "--d", "2"]).status.code(), Some(1));
    assert_eq!(udisc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(udisc(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_reads_config_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        r#"{
            "example": "example1",
            "n_copies": 4,
            "shapes": [[2, 2], [4, 1]],
            "shots": 300,
            "noise": {"p1": 0, "p2": 0, "p_read": 0},
            "format": "json"
        }"#,
    )
    .unwrap();
    let o = udisc(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"rows\""));
    assert_eq!(text.matches("\"p_succ_raw\": 1.0").count(), 2);
}

#[test]
fn build_emits_qasm() {
    let o = udisc(&["build", "--example", "2", "--n", "4", "--w", "2", "--d", "2", "--measurement", "parity", "--primitive", "ecr"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n"));
    assert!(text.contains("gate ecr a, b"));
    assert!(text.contains("ecr q[0],q[1];"));
    assert!(text.trim_end().ends_with("c[1] = measure q[1];"));
}

#[test]
fn suboptimal_reports_closed_form() {
    let o = udisc(&["suboptimal", "--n", "8", "--w", "2", "--d", "4", "--shots", "2000", "--noise", "0,0,0", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("\"closed_form_noiseless\": 0.853553390593273"));
}
