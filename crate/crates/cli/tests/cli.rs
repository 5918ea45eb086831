use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cat0_cli::parse_scenario;

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn cat0(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cat0")).args(args).output().expect("binary runs")
}

/// Copies a shipped scenario into a fresh directory so its output lands there.
fn staged(name: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let dst = dir.path().join(name);
    std::fs::copy(shipped(name), &dst).unwrap();
    (dir, dst)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn two_halfspace_cyclic_run_converges() {
    let (dir, file) = staged("quadrant_cyclic.scn");
    let out = cat0(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("stop reason: Converged"));
    assert!(stdout(&out).contains("fejer violations: 0"));

    let csv = std::fs::read_to_string(dir.path().join("quadrant_cyclic.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,residual,fejer_gap,step,shadow_dist"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert!(last[1].parse::<f64>().unwrap() <= 1e-8);
}

#[test]
fn tripod_certify_passes() {
    let (dir, file) = staged("tripod_certify.scn");
    let out = cat0(&["certify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("tripod_certify.csv")).unwrap();
    assert!(csv.starts_with("kind,samples,seed,worst_defect,pass\n"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{csv}");
}

#[test]
fn certify_csv_is_byte_identical_across_runs() {
    let (dir, file) = staged("tripod_certify.scn");
    let csv = dir.path().join("tripod_certify.csv");
    cat0(&["certify", file.to_str().unwrap()]);
    let first = std::fs::read(&csv).unwrap();
    cat0(&["certify", file.to_str().unwrap()]);
    assert_eq!(first, std::fs::read(&csv).unwrap());

    cat0(&["certify", file.to_str().unwrap(), "--seed", "8"]);
    let reseeded = std::fs::read_to_string(&csv).unwrap();
    assert_ne!(first, reseeded.as_bytes());
    assert!(reseeded.lines().nth(1).unwrap().contains(",8,"));
}

#[test]
fn trace_csv_is_byte_identical_across_runs() {
    let (dir, file) = staged("product_averaged.scn");
    let text = std::fs::read_to_string(&file).unwrap() + "output = trace.csv\n";
    std::fs::write(&file, text).unwrap();
    let csv = dir.path().join("trace.csv");
    assert_eq!(cat0(&["run", file.to_str().unwrap()]).status.code(), Some(0));
    let first = std::fs::read(&csv).unwrap();
    cat0(&["run", file.to_str().unwrap()]);
    assert_eq!(first, std::fs::read(&csv).unwrap());
}

#[test]
fn one_iteration_is_not_enough() {
    let out = cat0(&["run", shipped("lines_fixed_point.scn").to_str().unwrap(), "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("stop reason: MaxIter"));
    assert!(stdout(&out).contains("iterations: 1"));
}

#[test]
fn tolerance_flag_overrides_the_scenario() {
    let f = shipped("lines_fixed_point.scn");
    let loose = cat0(&["run", f.to_str().unwrap(), "--tol", "1e-2"]);
    let tight = cat0(&["run", f.to_str().unwrap()]);
    let iters = |o: &Output| -> usize {
        let s = stdout(o);
        let line = s.lines().find(|l| l.starts_with("iterations:")).unwrap();
        line["iterations:".len()..].trim().parse().unwrap()
    };
    assert!(iters(&loose) < iters(&tight));
}

#[test]
fn mean_subcommand_prints_the_barycenter() {
    let out = cat0(&["mean", shipped("hyperbolic_mean.scn").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("barycenter of 3 points on hyperboloid(2)"));
}

#[test]
fn witness_outside_a_set_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.scn",
        "[space]\nmodel = euclidean(2)\n\n[set A]\ntype = halfspace\nnormal = 1, 0\n\n\
         [set B]\ntype = halfspace\nnormal = -1, 0\noffset = -1\n\n\
         [run]\nalgorithm = certify\nsets = A, B\nwitness = 0, 0\nsamples = 200\n",
    );
    let out = cat0(&["certify", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a fixed point"));
}

#[test]
fn parse_errors_exit_two_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "w.scn",
        "[space]\nmodel = euclidean(1)\n\n[set A]\ntype = halfspace\nnormal = 1\n\n\
         [set B]\ntype = halfspace\nnormal = -1\noffset = 1\n\n\
         [run]\nalgorithm = averaged\nsets = A, B\nweights = 0.5, 0.4\nx0 = 3\n",
    );
    let out = cat0(&["run", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 16, key `weights`") && err.contains("weights must sum to 1"), "{err}");

    let g = write(dir.path(), "u.scn", "[space]\nmodel = euclidean(1)\nflavour = mint\n\n[run]\nalgorithm = certify\n");
    let out = cat0(&["certify", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("key `flavour`"));
}

#[test]
fn missing_file_and_unwritable_output_exit_five() {
    assert_eq!(cat0(&["run", "/nonexistent/x.scn"]).status.code(), Some(5));
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("quadrant_cyclic.scn"))
        .unwrap()
        .replace("output = quadrant_cyclic.csv", "output = no/such/dir/t.csv");
    let f = write(dir.path(), "q.scn", &text);
    assert_eq!(cat0(&["run", f.to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn version_and_usage() {
    let out = cat0(&["version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("cat0 "));
    assert_eq!(cat0(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn shipped_scenarios_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "scn") {
            let s = parse_scenario(&std::fs::read_to_string(&p).unwrap(), Some(&dir)).unwrap();
            let again = parse_scenario(&s.to_string(), Some(&dir)).unwrap();
            assert_eq!(s, again, "{}", p.display());
            n += 1;
        }
    }
    assert!(n >= 5);
}
