use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use confbill::output::read_rows;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn confbill(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confbill"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("s.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn simulate_writes_tables_svg_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = confbill(&["simulate", scenario("free_ellipse").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("free_ellipse");
    for f in ["trajectory_0.csv", "events_0.csv", "trajectory.svg", "summary.txt"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let events = read_rows(&dir.join("events_0.csv")).unwrap();
    assert!(!events.is_empty());
    let rows = read_rows(&dir.join("trajectory_0.csv")).unwrap();
    let e0 = rows[0][6];
    assert!(rows.iter().all(|r| (r[6] - e0).abs() < 1e-9));
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(code(&confbill(&["simulate", scenario("hooke_kepler").to_str().unwrap()], dir.path())), 0);
    }
    for f in ["trajectory_0.csv", "events_0.csv", "trajectory.svg", "summary.txt"] {
        let x = std::fs::read(a.path().join("hooke_kepler").join(f)).unwrap();
        let y = std::fs::read(b.path().join("hooke_kepler").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_confbill"))
            .env("CONFBILL_THREADS", threads)
            .args(["check", "hooke", "--out"])
            .arg(out)
            .status()
            .unwrap()
    };
    assert!(run("1", a.path()).success());
    assert!(run("4", b.path()).success());
    let read = |d: &Path| std::fs::read(d.join("reports/summary.txt")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_confbill"))
        .env("CONFBILL_THREADS", "zero")
        .args(["check", "free", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn unsupported_pairing_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = confbill(&["simulate", scenario("invalid_pairing").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("pairing"));
}

#[test]
fn empty_wall_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write_scenario(
        tmp.path(),
        "name = \"bare\"\n[field]\nkind = \"free\"\n[[initial]]\nq = [0.0, 0.0]\np = [1.0, 0.0]\n",
    );
    assert_eq!(code(&confbill(&["simulate", s.to_str().unwrap()], tmp.path())), 2);
}

#[test]
fn unknown_suite_and_figure_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&confbill(&["check", "nonesuch"], tmp.path())), 2);
    assert_eq!(code(&confbill(&["figures", "fig9"], tmp.path())), 2);
}

#[test]
fn conjugacy_without_duality_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&confbill(&["conjugacy", scenario("free_ellipse").to_str().unwrap()], tmp.path())), 2);
}

#[test]
fn conjugacy_beyond_tolerance_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(scenario("hooke_kepler")).unwrap();
    let s = write_scenario(tmp.path(), &format!("{body}\n[tolerances]\nconjugacy = 1e-14\n"));
    let o = confbill(&["conjugacy", s.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("hooke_kepler/conjugacy.txt").is_file());
}

#[test]
fn conjugacy_passes_for_shipped_pairings() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["hooke_kepler", "twocenter_khat", "identity"] {
        let o = confbill(&["conjugacy", scenario(name).to_str().unwrap()], tmp.path());
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn strict_simulation_that_stops_early_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(scenario("free_ellipse")).unwrap();
    let s = write_scenario(tmp.path(), &format!("{body}\n[tolerances]\nmax_steps = 3\n"));
    assert_eq!(code(&confbill(&["simulate", s.to_str().unwrap()], tmp.path())), 0);
    assert_eq!(code(&confbill(&["simulate", s.to_str().unwrap(), "--strict"], tmp.path())), 1);
}

#[test]
fn figures_write_panels_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&confbill(&["figures", "fig3"], tmp.path())), 0);
    let dir = tmp.path().join("fig3");
    for p in "abcdefgh".chars() {
        assert!(dir.join(format!("panel_{p}.svg")).is_file());
    }
    assert!(dir.join("summary.csv").is_file());
}
