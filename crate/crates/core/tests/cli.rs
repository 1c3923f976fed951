use std::path::Path;
use std::process::{Command, Output};

fn sympower(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympower"))
        .args(args)
        .current_dir(dir)
        .env("SYMPOWER_THREADS", "1")
        .env_remove("SYMPOWER_OUT")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstdout {}\nstderr {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn transform_then_invert_restores_the_image() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&sympower(&["gen", "leaves", "--shape", "24x20", "--seed", "2", "--out", "in.pgm"], d));
    let printed = ok(&sympower(&["transform", "in.pgm", "--out", "t.spt"], d));
    assert!(printed.starts_with("sympower: beta"), "{printed}");
    assert!(d.join("t.sptp").exists());
    ok(&sympower(&["invert", "t.spt", "--params", "t.sptp", "--out", "back.pgm"], d));
    assert_eq!(std::fs::read(d.join("in.pgm")).unwrap(), std::fs::read(d.join("back.pgm")).unwrap());

    ok(&sympower(&["transform", "in.pgm", "--kind", "boxcox", "--out", "b.spt", "--params", "b.sptp"], d));
    ok(&sympower(&["invert", "b.spt", "--params", "b.sptp", "--out", "b.pgm"], d));
    assert_eq!(std::fs::read(d.join("in.pgm")).unwrap(), std::fs::read(d.join("b.pgm")).unwrap());
}

#[test]
fn compare_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&sympower(&["gen", "gradient", "--shape", "12x12", "--out", "g.pgm"], d));
    let printed = ok(&sympower(
        &["compare", "g.pgm", "--iters", "3,6", "--seeds", "0", "--width", "8", "--layers", "2", "--out-dir", "rep"],
        d,
    ));
    assert!(printed.lines().next().unwrap().starts_with("variant"));
    assert_eq!(printed.lines().count(), 1 + 11 + 1);
    let csv = std::fs::read_to_string(d.join("rep/compare.csv")).unwrap();
    assert!(csv.starts_with("task,input,variant"));
    assert!(csv.lines().skip(1).all(|l| l.starts_with("compare,g,")));
}

#[test]
fn fit_and_sweeps_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&sympower(&["gen", "speech", "--shape", "300", "--sample-rate", "8000", "--out", "s.wav"], d));
    let small = ["--iters", "4", "--seeds", "1", "--width", "6", "--layers", "2", "--out-dir", "o"];
    let mut args = vec!["fit", "s.wav", "--transforms", "scale1,sympower,rpp3"];
    args.extend(small);
    ok(&sympower(&args, d));
    assert!(d.join("o/fit-audio.csv").exists());
    assert!(d.join("o/fit-audio/s__rpp__s1.wav").exists());

    let mut args = vec!["hypothesis", "skew", "--mus", "-0.5,0.5", "--side", "12"];
    args.extend(small);
    let printed = ok(&sympower(&args, d));
    assert!(printed.contains("scale1"));
    let csv = std::fs::read_to_string(d.join("o/skew.csv")).unwrap();
    assert!(csv.contains("normal_mu-0.5_sd0.4_12x12_s0"));

    let mut args = vec!["hypothesis", "range"];
    args.extend(small);
    let out = sympower(&args, d);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = sympower(&["transform", "missing.pgm", "--out", "x.spt"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    std::fs::write(d.join("bad.pgm"), b"P5\n2 2\n255\n\x00").unwrap();
    let out = sympower(&["transform", "bad.pgm", "--out", "x.spt"], d);
    assert_eq!(out.status.code(), Some(1));
    let out = sympower(&["transform", "bad.pgm", "--kind", "log", "--out", "x.spt"], d);
    assert_eq!(out.status.code(), Some(1));
}
