mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use teamplan::generate::{preset, random_scenario};
use teamplan::scenario::ScenarioFile;
use teamplan::solution::SolutionFile;

fn teamplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamplan")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    teamplan(args).status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fix(name: &str) -> String {
    common::fixture(name).to_str().unwrap().to_string()
}

#[test]
fn validate_accepts_good_and_rejects_bad_files() {
    assert_eq!(code(&["validate", &fix("illustrative.json")]), 0);
    assert_eq!(code(&["validate", &fix("invalid/shortfall_below_teaming.json")]), 2);
    assert_eq!(code(&["validate", &fix("invalid/empty.json")]), 2);
    assert_eq!(code(&["validate", "no/such/file.json"]), 2);
}

#[test]
fn solve_writes_a_solution_file() {
    let out = teamplan(&["solve", &fix("illustrative.json"), "-q"]);
    assert_eq!(out.status.code(), Some(0));
    let file = SolutionFile::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(file.stats.columns.total, 460);
    assert_eq!(file.objective, Some(161.0));
    assert_eq!(file.robots.len(), 10);
}

#[test]
fn infeasible_scenarios_exit_three() {
    assert_eq!(code(&["solve", &fix("unreachable.json"), "-q"]), 3);
    assert_eq!(code(&["oracle", &fix("unreachable.json"), "-q"]), 3);
}

#[test]
fn time_limit_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let scn = random_scenario(&preset("map2").unwrap().config(10), 1);
    let p = dir.path().join("map2.json");
    std::fs::write(&p, ScenarioFile::from_scenario(&scn).to_json_pretty()).unwrap();
    assert_eq!(code(&["solve", path(&p), "--time-limit", "0.001", "-q"]), 4);
}

#[test]
fn oracle_respects_its_cap() {
    assert_eq!(code(&["oracle", &fix("small.json"), "-q"]), 0);
    assert_eq!(code(&["oracle", &fix("illustrative.json"), "-q"]), 5);
}

#[test]
fn assign_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let again = dir.path().join("again.json");
    assert_eq!(code(&["oracle", &fix("relay.json"), "--out", path(&sol), "-q"]), 0);
    assert_eq!(code(&["assign", &fix("relay.json"), path(&sol), "--out", path(&again)]), 0);
    let a = SolutionFile::load(&sol).unwrap();
    let b = SolutionFile::load(&again).unwrap();
    assert_eq!(a.robots, b.robots);
    let table = teamplan(&["assign", &fix("relay.json"), path(&sol)]);
    assert_eq!(String::from_utf8(table.stdout).unwrap().lines().count(), a.robots.len());
}

fn export(extra: &[&str], scenario: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let dots = dir.path().join("dots");
    let mut args = vec!["solve", scenario, "--out", path(&sol), "-q"];
    args.extend_from_slice(extra);
    assert_eq!(code(&args), 0);
    let mut args = vec!["export", scenario, "--solution", path(&sol), "--out", path(&dots), "-q"];
    args.extend_from_slice(extra);
    assert_eq!(code(&args), 0);
    (dir, dots)
}

fn count(text: &str, pred: impl Fn(&str) -> bool) -> usize {
    text.lines().filter(|l| pred(l)).count()
}

#[test]
fn export_draws_the_whole_scenario() {
    let (_dir, dots) = export(&[], &fix("illustrative.json"));
    let dot = std::fs::read_to_string(dots.join("scenario.dot")).unwrap();
    assert_eq!(count(&dot, |l| l.starts_with("  v") && !l.contains("->")), 5);
    assert_eq!(count(&dot, |l| l.contains("-> v")), 12);
    assert_eq!(count(&dot, |l| l.contains("-> x")), 4);
    for t in 1..=10 {
        assert!(dots.join(format!("step_{t:02}.dot")).exists());
    }

    let (_dir, dots) = export(&["--no-overwatch"], &fix("illustrative.json"));
    let dot = std::fs::read_to_string(dots.join("scenario.dot")).unwrap();
    assert_eq!(count(&dot, |l| l.contains("-> x")), 0);
}

#[test]
fn export_of_a_still_plan_repeats_itself() {
    let (_dir, dots) = export(&[], &fix("degenerate.json"));
    let first = std::fs::read_to_string(dots.join("step_01.dot")).unwrap();
    let n = std::fs::read_dir(&dots).unwrap().count() - 1;
    for t in 2..=n {
        assert_eq!(std::fs::read_to_string(dots.join(format!("step_{t:02}.dot"))).unwrap(), first);
    }
}

#[test]
fn export_without_solution_prints_the_scenario() {
    let out = teamplan(&["export", &fix("small.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("digraph"));
}

#[test]
fn bench_prints_one_row_per_size() {
    let out = teamplan(&["bench", "--agents", "2", "--instances", "1", "--time-limit", "5"]);
    assert!(matches!(out.status.code(), Some(0 | 4)));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}
