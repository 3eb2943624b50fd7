use std::fs;
use std::path::Path;

use cisolve::cli::{main_with_args, EXIT_CONFIG, EXIT_OK, EXIT_PHYSICAL};
use cisolve::io::{read_diagnostics_csv, read_field_dump};

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, format!("{body}output.dir = {}\n", dir.join("out").display())).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("cisolve").chain(args.iter().copied()))
}

#[test]
fn run_writes_csv_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 16\nscheme.kind = c\nscheme.eps = 0.1\nlaw.id = kinetic\ntime.t_final = 0.1\noutput.fields = true\noutput.every_steps = 2\n",
    );
    assert_eq!(run(&["run", "--config", &cfg]), EXIT_OK);
    let out = dir.path().join("out");
    let rows = read_diagnostics_csv(&out.join("diagnostics.csv")).unwrap();
    assert_eq!(rows[0].time, 0.0);
    assert_eq!(rows.last().unwrap().time, 0.1);
    let first = read_field_dump(&out.join("field_000000.cifd")).unwrap();
    assert_eq!(first.time, 0.0);
    assert_eq!(first.state.ncomp(), 4);
    let dumps = fs::read_dir(&out).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "cifd")
    });
    assert_eq!(dumps.count(), rows.len());
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 16\nscheme.kind = b\nscheme.eps = 0.05\nlaw.id = biofilm\ntime.t_final = 0.1\ninit.v0_1 = gradient\n",
    );
    let csv = dir.path().join("out/diagnostics.csv");
    assert_eq!(run(&["run", "--config", &cfg]), EXIT_OK);
    let first = fs::read(&csv).unwrap();
    assert_eq!(run(&["run", "--config", &cfg]), EXIT_OK);
    assert_eq!(fs::read(&csv).unwrap(), first);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n = 63\nscheme.kind = a\nlaw.id = constant\ntime.t_final = 0.1\n");
    assert_eq!(run(&["run", "--config", &cfg]), EXIT_CONFIG);
    let cfg = write_config(dir.path(), "grid.n = 16\nscheme.kind = b\nlaw.id = constant\ntime.t_final = 0.1\n");
    assert_eq!(run(&["run", "--config", &cfg]), EXIT_CONFIG);
    assert_eq!(
        run(&["run", "--config", &cfg, "--override", "scheme.eps=0.1", "--override", "bogus=1"]),
        EXIT_CONFIG
    );
    assert_eq!(run(&["run", "--config", "/nonexistent/file.cfg"]), EXIT_CONFIG);
    assert_eq!(run(&["frobnicate"]), EXIT_CONFIG);
}

#[test]
fn physical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // nearly empty region squeezed by a strong compressive flow
    let cfg = write_config(
        dir.path(),
        "grid.n = 16\nscheme.kind = c\nscheme.eps = 0.5\nlaw.id = constant\nlaw.params = 0.01\n\
         init.preset = shear\ninit.amplitude = 0.95\ninit.velocity = 0\ninit.v0_1 = gradient\n\
         init.v0_1_amplitude = 12\ntime.t_final = 5\n",
    );
    assert_eq!(run(&["run", "--config", &cfg]), EXIT_PHYSICAL);
    let rows = read_diagnostics_csv(&dir.path().join("out/diagnostics.csv")).unwrap();
    assert!(rows.iter().all(|r| r.min_rho > 0.0));
    assert!(rows.last().unwrap().time < 5.0);
}

#[test]
fn study_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n = 16\nscheme.kind = b\nscheme.eps = 0.1\nlaw.id = kinetic\ntime.t_final = 0.1\n");
    assert_eq!(run(&["study", "--config", &cfg, "--eps-list", "0.2,0.1"]), EXIT_OK);
    let text = fs::read_to_string(dir.path().join("out/study.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("eps,final_time,distance"));
    assert_eq!(run(&["study", "--config", &cfg, "--eps-list", "0.2,-1"]), EXIT_CONFIG);
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n = 16\nscheme.kind = a\nlaw.id = biofilm\ntime.t_final = 0.1\n");
    assert_eq!(run(&["oracle", "--config", &cfg]), EXIT_OK);
    // a coarse mollifier separates the two paths by more than the tolerance
    assert_eq!(
        run(&["oracle", "--config", &cfg, "--override", "scheme.eps=0.5", "--override", "init.preset=shear"]),
        EXIT_PHYSICAL
    );
    let cfg = write_config(dir.path(), "grid.n = 16\nscheme.kind = a\nlaw.id = kinetic\ntime.t_final = 0.1\n");
    assert_eq!(run(&["oracle", "--config", &cfg]), EXIT_CONFIG);
}

#[test]
fn symbol_subcommand() {
    assert_eq!(run(&["symbol", "--rho", "1", "--v", "0.5,0", "--f", "2", "--xi", "1,0"]), EXIT_OK);
    assert_eq!(run(&["symbol", "--rho", "1", "--v", "0,0", "--f", "-1", "--xi", "0,1"]), EXIT_OK);
    assert_eq!(run(&["symbol", "--rho", "1", "--v", "0,0", "--f", "1", "--xi", "0,0"]), EXIT_CONFIG);
    assert_eq!(run(&["symbol", "--rho", "1", "--v", "0", "--f", "1", "--xi", "1,0"]), EXIT_CONFIG);
}
