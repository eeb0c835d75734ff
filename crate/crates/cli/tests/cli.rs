use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn facet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facet"))
        .args(args)
        .env_remove("FACET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{text}"))
        .trim()
}

#[test]
fn enumerate_lists_six_degenerate_bases() {
    for file in ["no_slater.json", "no_slater.mps"] {
        let o = facet(&["enumerate", data(file).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let rows: Vec<&str> = text.lines().filter(|l| l.starts_with('{')).collect();
        assert_eq!(rows.len(), 6, "{text}");
        for r in &rows {
            let degree: usize = r.rsplit('\t').next().unwrap().parse().unwrap();
            assert!(degree >= 1);
        }
        assert_eq!(line(&text, "distinct points:"), "2");
        assert_eq!(line(&text, "all degenerate:"), "true");
    }
}

#[test]
fn enumerate_nondegenerate_vertex() {
    let o = facet(&["enumerate", data("slater_nondegenerate.json").to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("{1,5}\t[5.0, 0.0, 0.0, 0.0, 1.0]\t0"), "{text}");
    assert_eq!(line(&text, "all degenerate:"), "false");
}

#[test]
fn reduce_reports_support_and_reduced_size() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = dir.path().join("reduced.json");
    let o = facet(&[
        "reduce",
        data("no_slater.json").to_str().unwrap(),
        "--out",
        reduced.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(line(&text, "certificate support:"), "{1,3,4}");
    assert_eq!(line(&text, "kept columns:"), "{2,5}");
    assert_eq!(line(&text, "reduced size:"), "1x2");
    assert_eq!(line(&text, "slater verified:"), "true");

    let again = facet(&["analyze", reduced.to_str().unwrap()]);
    assert_eq!(line(&stdout(&again), "verdict:"), "strictly feasible");
}

#[test]
fn analyze_gives_witness_or_certificate() {
    let o = facet(&["analyze", data("slater_all_degenerate.json").to_str().unwrap()]);
    let text = stdout(&o);
    assert_eq!(line(&text, "verdict:"), "strictly feasible");
    let w = line(&text, "witness:");
    let vals: Vec<f64> = w
        .trim_matches(|c| c == '[' || c == ']')
        .split(", ")
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 5);
    assert!(vals.iter().all(|v| *v > 0.0));

    let o = facet(&["analyze", data("no_slater.mps").to_str().unwrap()]);
    let text = stdout(&o);
    assert_eq!(line(&text, "verdict:"), "not strictly feasible");
    assert_eq!(line(&text, "exposed coordinates:"), "{1,3,4}");
}

#[test]
fn output_is_byte_stable() {
    for args in [
        vec!["reduce", "no_slater.json"],
        vec!["enumerate", "slater_nondegenerate.json"],
        vec!["solve", "slater_nondegenerate.json"],
    ] {
        let path = data(args[1]);
        let full = [args[0], path.to_str().unwrap()];
        assert_eq!(facet(&full).stdout, facet(&full).stdout);
    }
    let gen = ["generate", "--kind", "primal-no-slater", "--m", "3", "--n", "7", "--r", "2", "--seed", "9"];
    assert_eq!(facet(&gen).stdout, facet(&gen).stdout);
}

#[test]
fn generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let o = facet(&[
        "generate", "--kind", "primal-slater", "--m", "4", "--n", "10", "--r", "3", "--seed", "5", "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc = std::fs::read_to_string(&inst).unwrap();
    assert!(doc.contains("\"plant\""));

    let ipm = stdout(&facet(&["solve", inst.to_str().unwrap()]));
    assert_eq!(line(&ipm, "status:"), "converged");
    let simplex = stdout(&facet(&["solve", inst.to_str().unwrap(), "--method", "simplex"]));
    assert_eq!(line(&simplex, "status:"), "optimal");
    let dual = stdout(&facet(&[
        "solve", inst.to_str().unwrap(), "--method", "simplex", "--rule", "dantzig", "--variant", "dual",
    ]));
    assert_eq!(line(&dual, "status:"), "optimal");

    let p: f64 = line(&simplex, "objective:").parse().unwrap();
    let q: f64 = line(&ipm, "objective:").parse().unwrap();
    let d: f64 = line(&dual, "objective:").parse().unwrap();
    assert!((p - q).abs() <= 1e-6 * (1.0 + p.abs()));
    assert!((p - d).abs() <= 1e-6 * (1.0 + p.abs()));
}

#[test]
fn generate_seed_falls_back_to_env() {
    let args = ["generate", "--kind", "dual-no-slater", "--m", "3", "--n", "6", "--r", "2"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_facet"))
        .args(args)
        .env("FACET_SEED", "11")
        .output()
        .unwrap();
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "11"]);
    assert_eq!(with_env.stdout, facet(&explicit).stdout);
    assert_ne!(with_env.stdout, facet(&args).stdout);
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("theorem.toml");
    let csv = dir.path().join("theorem.csv");
    std::fs::write(&cfg, "protocol = \"theorem\"\nseeds = 12\n").unwrap();
    let o = facet(&["experiment", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("protocol,instance,m,n,r,seed"));
    assert_eq!(lines.count(), 15);
    assert!(!text.contains(",false\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(facet(&["--help"]).status.code(), Some(0));
    assert_eq!(facet(&["bogus"]).status.code(), Some(1));
    assert_eq!(facet(&["solve", "a.json", "--method", "newton"]).status.code(), Some(1));
    assert_eq!(facet(&["enumerate", "/nonexistent/file.json"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mps");
    std::fs::write(&bad, "NAME X\nROWS\n N COST\nRANGES\nENDATA\n").unwrap();
    let o = facet(&["enumerate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "protocol = \"theorem\"\nunknown_key = 1\n").unwrap();
    assert_eq!(facet(&["experiment", cfg.to_str().unwrap()]).status.code(), Some(2));
}
