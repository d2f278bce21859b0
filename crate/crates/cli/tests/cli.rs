use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fctncd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fctncd"))
        .args(args)
        .current_dir(dir)
        .env_remove("FCTNCD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn missing_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fctncd(tmp.path(), &["run", "nope.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_report_line_and_column() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "bad.toml", "[problem]\ncase = \"advection\"\n[scheme]\nkind = \"FAST\"\n");
    let o = fctncd(tmp.path(), &["run", &c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:4:"), "{}", stderr(&o));
    let c = config(tmp.path(), "syntax.toml", "[problem\n");
    let o = fctncd(tmp.path(), &["run", &c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax.toml:1:"), "{}", stderr(&o));
}

#[test]
fn unstable_time_step_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "a.toml", "[problem]\ncase = \"advection\"\nsteps = 2\n[scheme]\ndt = 0.05\n");
    let o = fctncd(tmp.path(), &["run", &c]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn advection_run_writes_final_snapshot_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "adv.toml", "[problem]\ncase = \"advection\"\n[scheme]\nkind = \"NDVA\"\nsigma = 0.0\n");
    let o = fctncd(tmp.path(), &["run", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut files: Vec<String> =
        fs::read_dir(tmp.path().join("out")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    files.sort();
    assert_eq!(files, ["advection_000400.csv", "advection_summary.txt"]);
    let summary = stdout(&o);
    for key in ["problem.case=advection", "scheme.kind=NDVA", "steps=400", "l1[square]=0.0811", "y_max[gaussian]="] {
        assert!(summary.contains(key), "{key} missing: {summary}");
    }
    let csv = fs::read_to_string(tmp.path().join("out/advection_000400.csv")).unwrap();
    assert!(csv.starts_with("x,value\n0,0\n"));
    assert_eq!(csv.lines().count(), 452);
}

#[test]
fn runs_are_deterministic_and_honour_out_dir_override() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        tmp.path(),
        "rot.toml",
        "[problem]\ncase = \"rotation\"\ncells = [24]\nsteps = 12\n[scheme]\nkind = \"NDVL\"\ndt = 0.002\n[output]\nsnapshot_every = 5\nprefix = \"r\"\n",
    );
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let o = Command::new(env!("CARGO_BIN_EXE_fctncd"))
            .args(["run", &c])
            .current_dir(tmp.path())
            .env("FCTNCD_OUT_DIR", tmp.path().join(sub))
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(tmp.path().join(sub));
    }
    assert!(!tmp.path().join("out").exists());
    for name in ["r_000000.csv", "r_000005.csv", "r_000010.csv", "r_000012.csv", "r_summary.txt"] {
        let a = fs::read(outputs[0].join(name)).unwrap();
        let b = fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let csv = fs::read_to_string(outputs[0].join("r_000012.csv")).unwrap();
    assert!(csv.starts_with("x,y,value\n"));
}

#[test]
fn oracle_mode_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let base = "[problem]\ncase = \"rotation\"\ncells = [32]\nsteps = 8\n[scheme]\nkind = \"NDVL\"\nsigma = 0.5\ndt = 0.002\n";
    let plain = config(tmp.path(), "plain.toml", &format!("{base}[output]\nprefix = \"plain\"\n"));
    let checked = config(tmp.path(), "oracle.toml", &format!("{base}oracle = true\n[output]\nprefix = \"oracle\"\n"));
    for c in [&plain, &checked] {
        let o = fctncd(tmp.path(), &["run", c]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = fs::read(tmp.path().join("out/plain_000008.csv")).unwrap();
    let b = fs::read(tmp.path().join("out/oracle_000008.csv")).unwrap();
    assert_eq!(a, b);
    let summary = fs::read_to_string(tmp.path().join("out/oracle_summary.txt")).unwrap();
    let gap: f64 = summary.split("max_oracle_gap=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(gap <= 1e-8, "{summary}");
}

#[test]
fn non_convergence_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        tmp.path(),
        "nc.toml",
        "[problem]\ncase = \"custom\"\ncells = [40]\nvelocity = [1.0]\ninitial = \"square\"\nsteps = 3\n\
         [scheme]\nkind = \"NDVA\"\nsigma = 0.5\ncourant = 0.5\nmax_outer_iterations = 1\n",
    );
    let o = fctncd(tmp.path(), &["run", &c]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(tmp.path().join("out/custom_000003.csv").exists());
}

#[test]
fn bench_table_cardinality() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fctncd(tmp.path(), &["bench", "advection", "--schemes", "NDVL,NDVA", "--sigmas", "0,0.5,1", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "case,shape,sigma,scheme,l1_error,l1_alt,y_max,steps,dt,converged");
    assert_eq!(lines.len(), 31);
}

#[test]
fn bench_rejects_unknown_scheme() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fctncd(tmp.path(), &["bench", "advection", "--schemes", "FOO"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fctncd(tmp.path(), &["bench", "advection", "--sigmas", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

fn orders(csv: &str) -> Vec<(f64, Option<f64>)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[3].parse().ok())
        })
        .collect()
}

#[test]
fn converge_reports_expected_orders() {
    let tmp = tempfile::tempdir().unwrap();
    let linear = config(
        tmp.path(),
        "lin.toml",
        "[scheme]\nkind = \"NDVA\"\n[converge]\nprofile = \"linear\"\na = 0.2\nb = 0.7\ndiffusion = 0.05\nlevels = [10, 20, 40]\nt_end = 0.1\nsteps = 20\ntime_refinement = 2\n",
    );
    let o = fctncd(tmp.path(), &["converge", &linear]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(orders(&stdout(&o)).iter().all(|(e, _)| *e < 1e-12), "{}", stdout(&o));

    let advect = config(
        tmp.path(),
        "adv.toml",
        "[scheme]\nkind = \"LOW\"\n[converge]\nprofile = \"sine\"\nk = 6.283185307179586\nc = 1.0\nvelocity = 1.0\nlevels = [50, 100, 200, 400]\nt_end = 0.25\nsteps = 25\n",
    );
    let o = fctncd(tmp.path(), &["converge", &advect]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let last = orders(&stdout(&o)).last().unwrap().1.unwrap();
    assert!((last - 1.0).abs() < 0.15, "{}", stdout(&o));

    let diffuse = config(
        tmp.path(),
        "diff.toml",
        "[scheme]\nkind = \"NDVA\"\nsigma = 0.5\n[converge]\nprofile = \"sine\"\nk = 3.0\nc = 0.0\ndiffusion = 0.1\nlevels = [10, 20, 40, 80]\nt_end = 0.2\nsteps = 10\ntime_refinement = 2\n",
    );
    let o = fctncd(tmp.path(), &["converge", &diffuse]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let last = orders(&stdout(&o)).last().unwrap().1.unwrap();
    assert!((last - 2.0).abs() < 0.2, "{}", stdout(&o));
    assert!(tmp.path().join("out/converge_converge.csv").exists());
}
