use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ihnc::io::{parse_columns, read_table};
use ihnc::TableKind;

fn ihnc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ihnc"))
}

fn run(args: &[&str]) -> Output {
    ihnc().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn columns(path: &Path) -> (Vec<f64>, Vec<f64>) {
    parse_columns(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, format!("version = 1\noutput = \"out\"\n{body}")).unwrap();
    path
}

/// History CSV as rows of optional numbers.
fn history(dir: &Path) -> Vec<Vec<Option<f64>>> {
    fs::read_to_string(dir.join("history.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().ok()).collect())
        .collect()
}

const FIXTURE_STATE: &str = "
[state]
density = 0.3
temperature = 1.5

[grid]
dr = 0.02
m = 463
n = 125
";

#[test]
fn transform_of_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gauss.dat");
    let text: String = (1..=400)
        .map(|j| {
            let r = 0.05 * j as f64;
            format!("{r:e} {:e}\n", (-std::f64::consts::PI * r * r).exp())
        })
        .collect();
    fs::write(&input, text).unwrap();
    let spec = dir.path().join("spec.dat");
    let out = run(&["transform", input.to_str().unwrap(), spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let (w, f) = columns(&spec);
    assert_eq!(w.len(), 401);
    let w_star = 0.5 / 0.05;
    for (wi, fi) in w.iter().zip(&f) {
        if *wi <= 0.5 * w_star {
            assert!((fi - (-std::f64::consts::PI * wi * wi).exp()).abs() <= 1e-6, "w = {wi}");
        }
    }

    let back = dir.path().join("back.dat");
    let out = run(&["transform", "--inverse", spec.to_str().unwrap(), back.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (r0, f0) = columns(&input);
    let (r1, f1) = columns(&back);
    for j in 0..400 {
        assert!((r0[j] - r1[j]).abs() <= 1e-12 * r0[j]);
        assert!((f0[j] - f1[j]).abs() <= 1e-12);
    }
}

#[test]
fn transform_reports_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.dat");
    fs::write(&input, "0.1 1.0\n0.2 0.5\na b c d\n").unwrap();
    let out = run(&["transform", input.to_str().unwrap(), dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn hnc_solve_of_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{FIXTURE_STATE}\n[potential]\nmodel = \"zero\"\n"));
    let out = run(&["hnc-solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, g) = columns(&dir.path().join("out/rdf.dat"));
    assert!(g.iter().all(|v| *v == 1.0));
}

#[test]
fn hnc_solve_reproduces_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{FIXTURE_STATE}\n[potential]\nmodel = \"lj-ts\"\ncutoff = 2.5\n");
    let cfg = write_config(dir.path(), &body);
    let out = run(&["hnc-solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, g) = columns(&dir.path().join("out/rdf.dat"));
    let (_, golden) = columns(&configs_dir().join("data/hnc_tslj_rho0.3_T1.5.dat"));
    let diff = g.iter().zip(&golden).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(diff <= 1e-8, "max deviation {diff}");
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("iterations"));
}

#[test]
fn hnc_solve_rejects_zero_mixing() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{FIXTURE_STATE}\n[potential]\nmodel = \"zero\"\n\n[hnc]\nmix = 0.0\ntolerance = 1e-10\nmax_iterations = 100\n"
    );
    let cfg = write_config(dir.path(), &body);
    assert_eq!(code(&run(&["hnc-solve", cfg.to_str().unwrap()])), 2);
}

#[test]
fn hnc_solve_reports_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{FIXTURE_STATE}\n[potential]\nmodel = \"lj-ts\"\n\n[hnc]\nmix = 0.15\ntolerance = 1e-12\nmax_iterations = 3\n"
    );
    let cfg = write_config(dir.path(), &body);
    assert_eq!(code(&run(&["hnc-solve", cfg.to_str().unwrap()])), 3);
}

#[test]
fn missing_files_and_bad_versions_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{FIXTURE_STATE}\n[potential]\nfile = \"nope.dat\"\n"));
    let out = run(&["hnc-solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nope.dat"));

    let path = dir.path().join("v2.toml");
    fs::write(&path, format!("version = 2\n{FIXTURE_STATE}")).unwrap();
    assert_eq!(code(&run(&["hnc-solve", path.to_str().unwrap()])), 2);
}

const MD_IDEAL: &str = "
[state]
density = 0.304
temperature = 1.316
particles = 200

[grid]
dr = 0.05
n = 40

[potential]
model = \"zero\"

[md]
equilibration_steps = 200
production_steps = 4000
seed = 4
";

#[test]
fn md_ideal_gas_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MD_IDEAL);
    let out = run(&["md", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    let value = |key: &str| -> f64 {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key} ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    let (p, err) = (value("pressure"), value("pressure_err"));
    assert!((p - 0.304 * 1.316).abs() <= 4.0 * err, "{p} +- {err}");
    let (_, g) = columns(&dir.path().join("out/rdf.dat"));
    let (_, g_err) = columns(&dir.path().join("out/rdf_err.dat"));
    let outliers = g.iter().zip(&g_err).filter(|(g, e)| (*g - 1.0).abs() > 4.0 * *e).count();
    assert!(outliers <= 1, "{outliers} bins beyond 4 sigma");
}

#[test]
fn md_is_reproducible_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MD_IDEAL);
    let cfg = cfg.to_str().unwrap();
    let rdf = dir.path().join("out/rdf.dat");
    assert_eq!(code(&run(&["md", cfg])), 0);
    let first = fs::read(&rdf).unwrap();
    assert_eq!(code(&run(&["md", cfg])), 0);
    assert_eq!(first, fs::read(&rdf).unwrap());
    assert_eq!(code(&run(&["md", cfg, "--seed", "99"])), 0);
    assert_ne!(first, fs::read(&rdf).unwrap());
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.starts_with("seed 99\n"));
}

#[test]
fn md_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MD_IDEAL.replace("production_steps = 4000", "production_steps = 400"));
    let traj = dir.path().join("traj.xyz");
    let out = run(&["md", cfg.to_str().unwrap(), "--trajectory", traj.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines = fs::read_to_string(&traj).unwrap().lines().count();
    assert_eq!(lines, 40 * 200);
}

#[test]
fn md_range_check_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MD_IDEAL.replace("n = 40", "m = 400\nn = 40"));
    let out = run(&["md", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
    assert!(stderr(&out).contains("half the box"));
}

#[test]
fn invert_fixture_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let target = configs_dir().join("data/hnc_tslj_rho0.3_T1.5.dat");
    let body = format!(
        "{FIXTURE_STATE}\n[target]\nrdf = \"{}\"\nreference = {{ model = \"lj-ts\", cutoff = 2.5 }}\n\n[inversion]\nscheme = \"ihnc\"\nmax_iterations = 8\ntolerance = 0.0\n",
        target.display()
    );
    let cfg = write_config(dir.path(), &body);
    let out = run(&["invert", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run_dir = dir.path().join("out");
    let rows = history(&run_dir);
    assert_eq!(rows.len(), 9);
    let eps0 = rows[0][2].unwrap();
    assert!(rows.iter().any(|r| r[2].unwrap() / eps0 < 1e-2));

    let reference = dir.path().join("u_ref.dat");
    let grid = ihnc::make_grid(0.02, 463, 125).unwrap();
    let u = ihnc::thermo::tabulate_truncated_shifted_lj(grid, &ihnc::thermo::LjParams::reduced());
    ihnc::io::write_table(&reference, &u, "reference").unwrap();
    let out = run(&["analyze", run_dir.to_str().unwrap(), "--reference", reference.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 9 + 1);
    let best: usize = lines.last().unwrap().strip_prefix("best ").unwrap().parse().unwrap();
    let eps: Vec<f64> = lines[1..10]
        .iter()
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(eps.iter().all(|e| *e > 0.0));
    let argmin = eps.iter().enumerate().fold(0, |b, (i, e)| if *e < eps[b] { i } else { b });
    assert!((eps[best] - eps[argmin]).abs() <= 1e-3 * eps[argmin], "best {best} argmin {argmin}");
}

#[test]
fn invert_with_pressure_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ihnc::make_grid(0.05, 160, 80).unwrap();
    let u = ihnc::Tabulated::from_fn(grid, TableKind::Potential, |r| 2.0 * (-2.0 * r).exp()).unwrap();
    let u = ihnc::grid::shift_to_zero_tail(&u);
    ihnc::io::write_table(&dir.path().join("soft.dat"), &u, "soft").unwrap();
    let body = "
[state]
density = 0.3
temperature = 1.0

[grid]
dr = 0.05
m = 160
n = 80

[target]
synthesize = true
reference = { file = \"soft.dat\" }

[inversion]
scheme = \"HNCGN\"
max_iterations = 5
pressure_target = 0.45
";
    let cfg = write_config(dir.path(), body);
    let out = run(&["invert", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = history(&dir.path().join("out"));
    let residuals: Vec<f64> = rows.iter().filter_map(|r| r[4]).collect();
    assert!(!residuals.is_empty());
    assert!(residuals.iter().all(|r| r.abs() <= 1e-10), "{residuals:?}");
    let u1 = read_table(&dir.path().join("out/u_001.dat"), TableKind::Potential).unwrap();
    assert_eq!(*u1.values().last().unwrap(), 0.0);
}

#[test]
fn invert_rejects_unknown_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{FIXTURE_STATE}\n[target]\nsynthesize = true\nreference = {{ model = \"lj-ts\" }}\n\n[inversion]\nscheme = \"IMC\"\n"
    );
    let cfg = write_config(dir.path(), &body);
    let out = run(&["invert", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("IMC"));
}

#[test]
fn pressure_target_needs_gauss_newton() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{FIXTURE_STATE}\n[target]\nsynthesize = true\nreference = {{ model = \"lj-ts\" }}\n\n[inversion]\nscheme = \"IHNC\"\npressure_target = 0.3\n"
    );
    let cfg = write_config(dir.path(), &body);
    assert_eq!(code(&run(&["invert", cfg.to_str().unwrap()])), 2);
}

#[test]
fn analyze_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", dir.path().to_str().unwrap()]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("no iteration records"));
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = fs::read_to_string(&path).unwrap();
            let value: toml::Value = toml::from_str(&text).unwrap();
            assert_eq!(value["version"].as_integer(), Some(1), "{}", path.display());
        }
    }
}
