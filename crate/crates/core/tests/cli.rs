mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{manifest_path, max_abs_diff, school, SCHOOL_UMLE};
use poclm::estimation::{fit_unconstrained, FitOptions};
use poclm::model::ParameterVector;

fn poclm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poclm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const SMALL_CSV: &str = "y,z\nlo,a\nmid,b\nhi,c\nlo,b\nmid,c\nhi,a\nlo,c\nmid,a\nhi,b\nmid,b\n";

/// Writes `data.csv` and `run.toml` into `dir` and returns the config path.
fn small_run(dir: &Path, csv: &str, extra: &str) -> String {
    fs::write(dir.join("data.csv"), csv).unwrap();
    let cfg = format!(
        "data = \"data.csv\"\n{extra}\n[response]\nname = \"y\"\nlevels = [\"lo\", \"mid\", \"hi\"]\n\n\
         [[predictors]]\nrole = \"ordinal\"\nname = \"z\"\nlevels = [\"a\", \"b\", \"c\"]\n"
    );
    let path = dir.join("run.toml");
    fs::write(&path, cfg).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_estimates(path: &Path) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[1].parse().unwrap())
        .collect()
}

#[test]
fn fit_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = manifest_path("configs/school.toml");
    let out = poclm(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("fit_report.txt")).unwrap();
    assert!(
        report.contains("CMLE directions: perf2016=antitonic, funding=antitonic"),
        "{report}"
    );
    let umle = read_estimates(&dir.path().join("estimates.csv"));
    assert!(max_abs_diff(&umle, &SCHOOL_UMLE) <= 1e-3);
}

#[test]
fn written_estimates_restart_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = manifest_path("configs/school.toml");
    let out = poclm(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let start = read_estimates(&dir.path().join("estimates.csv"));
    let (_, spec, data) = school();
    let initial = ParameterVector::from_flat(&spec.layout(), &start).unwrap();
    let fit = fit_unconstrained(
        &data,
        &spec,
        &FitOptions::default().with_initial(Some(initial)),
    )
    .unwrap();
    assert!(fit.converged);
    assert!(fit.iterations <= 2, "{} iterations", fit.iterations);
}

#[test]
fn test_and_region_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = manifest_path("configs/school.toml");
    let (cfg, out_dir) = (cfg.to_str().unwrap(), dir.path().to_str().unwrap());
    let out = poclm(&[
        "test",
        "--config",
        cfg,
        "--out",
        out_dir,
        "--variable",
        "funding",
        "--hypothesis",
        "iso",
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("test_funding_iso.txt")).unwrap();
    assert!(text.contains("decision: REJECT"), "{text}");

    let small = tempfile::tempdir().unwrap();
    let run = small_run(small.path(), SMALL_CSV, "[grid]\npoints_per_axis = 5");
    let out = poclm(&[
        "region",
        "--config",
        &run,
        "--out",
        out_dir,
        "--variable",
        "z",
        "--kind",
        "ucr",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let grid = fs::read_to_string(dir.path().join("region_z.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 25);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = small_run(dir.path(), SMALL_CSV, "colour = \"red\"");
    assert_eq!(code(&poclm(&["fit", "--config", &unknown_key])), 2);

    let missing = dir.path().join("nope.toml");
    assert_eq!(
        code(&poclm(&["fit", "--config", missing.to_str().unwrap()])),
        2
    );

    let ok = small_run(dir.path(), SMALL_CSV, "");
    assert_eq!(code(&poclm(&["fit", "--config", &ok, "--bogus"])), 2);

    let undeclared = small_run(dir.path(), "y,w\nlo,a\nmid,b\nhi,c\n", "");
    assert_eq!(code(&poclm(&["fit", "--config", &undeclared])), 2);
}

#[test]
fn data_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    for csv in [
        "",
        "y,z\n",
        "y,z\nlo,a\nmid,b\nhi,d\n",
        "y,z\nlo,a\nmid,b\nextreme,c\n",
    ] {
        let run = small_run(dir.path(), csv, "");
        assert_eq!(code(&poclm(&["fit", "--config", &run])), 3, "csv {csv:?}");
    }
    fs::write(
        dir.path().join("data.csv"),
        "y,z,x\nlo,a,1\nmid,b,two\nhi,c,3\n",
    )
    .unwrap();
    let cfg = fs::read_to_string(dir.path().join("run.toml")).unwrap()
        + "\n[[predictors]]\nrole = \"numeric\"\nname = \"x\"\n";
    fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let run = dir.path().join("run.toml");
    assert_eq!(code(&poclm(&["fit", "--config", run.to_str().unwrap()])), 3);
}

#[test]
fn non_convergence_exits_with_4_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let school = fs::read_to_string(manifest_path("configs/school.toml")).unwrap();
    let data = manifest_path("fixtures/school_synthetic.csv");
    let cfg = school.replace("../fixtures/school_synthetic.csv", data.to_str().unwrap());
    let run = dir.path().join("run.toml");
    fs::write(&run, format!("max_iterations = 1\n{cfg}")).unwrap();
    let out = poclm(&[
        "fit",
        "--config",
        run.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(out_dir.join("fit_report.txt").exists());
    assert!(out_dir.join("estimates.csv").exists());
}

const TINY_EXPERIMENT: &str =
    "name = \"tiny\"\nexperiments = [\"coverage\"]\nsample_sizes = [80]\n\
    kinds = [\"ccr\"]\nseed = 5\n\n[truth]\npreset = \"boundary\"\nladder = \"medium\"\n";

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, format!("replicates = 4\n{TINY_EXPERIMENT}")).unwrap();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = poclm(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        files.push(fs::read(out_dir.join("tiny_coverage.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn single_replicate_cells_are_all_or_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, format!("replicates = 1\n{TINY_EXPERIMENT}")).unwrap();
    let out = poclm(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_path(dir.path().join("tiny_coverage.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        assert!(matches!(&rec[8], "0.0000" | "100.0000" | "NA"), "{rec:?}");
    }
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, format!("replicates = 0\n{TINY_EXPERIMENT}")).unwrap();
    assert_eq!(
        code(&poclm(&["simulate", "--config", cfg.to_str().unwrap()])),
        2
    );
}
