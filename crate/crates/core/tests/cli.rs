use std::path::Path;
use std::process::Command;

use nr_mumimo::cli::{main_with_args, CSV_HEADER};

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("nr-mumimo").chain(args.iter().copied()))
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn row_count_matches_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let code = run(&[
        "--snr",
        "0:10:5",
        "--mcs",
        "10,20",
        "--tb-per-point",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = rows(&out);
    // 3 SNR x 2 MCS x (2 UEs + aggregate)
    assert_eq!(rows.len(), 3 * 2 * 3);
    assert!(rows.iter().all(|r| r[0] == "mumimo"));
    assert_eq!(rows.iter().filter(|r| r[3] == "all").count(), 6);
    assert!(out.with_extension("gp").exists());
}

#[test]
fn mu_vs_pf_emits_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let code = run(&[
        "--preset",
        "mu-vs-pf",
        "--snr",
        "30",
        "--mcs",
        "16",
        "--tb-per-point",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let modes: Vec<String> = rows(&out).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(modes, ["mumimo", "mumimo", "mumimo", "pf", "pf", "pf"]);
}

#[test]
fn config_file_and_flags_merge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("cfg.csv");
    std::fs::write(
        &cfg,
        "snr_db = [10, 20]\nmcs = [12]\nscheduler = \"su\"\ntb_per_point = 3\n",
    )
    .unwrap();
    let code = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--snr",
        "40",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[0] == "su" && r[1] == "40" && r[2] == "12"));
}

#[test]
fn invalid_input_exits_with_one() {
    assert_eq!(run(&["--mcs", "29"]), 1);
    assert_eq!(run(&["--channel", "awgn"]), 1);
    assert_eq!(run(&["--config", "/nonexistent/run.conf"]), 1);
    assert_eq!(run(&["--no-such-flag"]), 1);
}

#[test]
fn unwritable_output_exits_with_two() {
    let code = run(&[
        "--snr",
        "30",
        "--mcs",
        "10",
        "--tb-per-point",
        "1",
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn binary_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bin.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_nr-mumimo"))
        .args(["--snr", "20", "--mcs", "10", "--tb-per-point", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(rows(&out).len(), 3);

    let status = Command::new(env!("CARGO_BIN_EXE_nr-mumimo"))
        .args(["--rb", "0"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn readme_config_example_parses() {
    let readme = include_str!("../../../README.md");
    let block = readme.split("```toml\n").nth(1).unwrap().split("```").next().unwrap();
    nr_mumimo::cli::parse_config_str(block, Path::new("README.md")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("readme.conf");
    std::fs::write(&path, block).unwrap();
    let out = dir.path().join("readme.csv");
    let code = run(&[
        "--config",
        path.to_str().unwrap(),
        "--snr",
        "20",
        "--tb-per-point",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(rows(&out).len(), 6 * 3);
}
