use std::path::Path;
use std::process::{Command, Output};

use mandelroots_cli::{parse_family, parse_precision, run, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mandelroots"))
        .args(args)
        .current_dir(dir)
        .env("MANDELROOTS_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn parsers() {
    assert_eq!(parse_family("mandelbrot").unwrap().description(), "mandelbrot");
    assert_eq!(parse_family("quad:0,1").unwrap().description(), "quad:0,1");
    assert_eq!(parse_family("quad:-1").unwrap().description(), "quad:-1,0");
    assert!(parse_family("cubic").is_err());
    assert!(parse_family("quad:x,1").is_err());
    assert!(parse_precision("double").is_ok());
    assert_eq!(parse_precision("hp:25").unwrap().digits(), 25);
    assert!(parse_precision("hp:40").is_err());
    assert!(parse_precision("quad").is_err());
}

#[test]
fn roots_verify_stats_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bin(&["roots", "--k", "8", "--out", "r8.mroot", "--stats", "rec.csv"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{o:?}");
    let s = stdout(&o);
    assert!(s.starts_with("k=8 n=255 sweeps="), "{s}");
    assert!(d.join("r8.mroot").exists() && d.join("r8.csv").exists());
    let rec = std::fs::read_to_string(d.join("rec.csv")).unwrap();
    assert!(rec.starts_with("sweep,active,moved,aberth_s,newton_s,neighbors_s,other_s\n"));

    let o = bin(&["verify", "--k", "8", "--in", "r8.csv"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 4);
    assert!(s.lines().all(|l| l.starts_with("PASS ")), "{s}");

    // wrong degree for the claimed k
    let o = bin(&["verify", "--k", "9", "--in", "r8.mroot"], d);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));

    let o = bin(&["stats", "--k", "8", "--in", "r8.mroot", "--out-dir", "st"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let real = std::fs::read_to_string(d.join("st/real_roots.csv")).unwrap();
    assert!(real.starts_with("j,eta,gamma_hat\n"));
    let sep = std::fs::read_to_string(d.join("st/sep.csv")).unwrap();
    assert!(sep.starts_with("k,sep,rsep,predicted,excess,rsep_smaller,pair_i,pair_j\n8,"));
}

#[test]
fn step_and_refine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bin(&["roots", "--k", "6", "--out", "r6.mroot"], d).status.code(), Some(EXIT_OK));
    let o = bin(&["step", "--k", "8", "--in", "r6.mroot", "--out", "r8.mroot"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{o:?}");
    assert!(stdout(&o).starts_with("k=8 n=255 "));

    let o = bin(&["refine", "--k", "8", "--in", "r8.mroot", "--digits", "30", "--out", "hp.mroot"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{o:?}");
    assert!(stdout(&o).starts_with("moving_sweeps=1\n"), "{}", stdout(&o));
    let o = bin(&["verify", "--k", "8", "--in", "hp.csv", "--digits", "30"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));

    // the same file checked in double passes too
    let o = bin(&["verify", "--k", "8", "--in", "hp.csv"], d);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));
}

#[test]
fn quadratic_high_precision() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &["roots", "--family", "quad:0,1", "--k", "6", "--precision", "hp:28", "--out", "q.mroot"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(EXIT_OK), "{o:?}");
    assert!(stdout(&o).starts_with("k=6 n=64 "));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bin(&["roots", "--k", "3", "--out", "x.mroot"], d).status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&["roots", "--k", "6", "--out", "x.csv"], d).status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&["roots", "--out", "x.mroot"], d).status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&["nope"], d).status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&["roots", "--k", "6", "--split-q", "0", "--out", "x.mroot"], d).status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&["--help"], d).status.code(), Some(EXIT_OK));
    let o = Command::new(env!("CARGO_BIN_EXE_mandelroots"))
        .args(["roots", "--k", "4", "--out", "x.mroot"])
        .current_dir(d)
        .env("MANDELROOTS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}

#[test]
fn missing_input_is_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "--k", "8", "--in", "absent.mroot"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.mroot");
    let code = run(["mandelroots", "roots", "--k", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn sweep_limit_gives_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bin(&["roots", "--k", "6", "--max-sweeps", "2", "--out", "p.mroot"], d);
    assert_eq!(o.status.code(), Some(EXIT_PARTIAL), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("partial roots"));
    assert!(d.join("p.mroot").exists() && d.join("p.csv").exists());
}
