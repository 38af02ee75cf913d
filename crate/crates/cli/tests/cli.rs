use std::path::Path;
use std::process::{Command, Output};

use so3fft::gft::relative_l2;
use so3fft::signals::container::decode;
use so3fft::signals::{read_container, Object};

const WATER: &str = "8 0 0 0\n1 0.96 0 0\n1 -0.24 0.93 0\n";

fn so3fft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_so3fft"))
        .args(args)
        .env_remove("SO3FFT_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = so3fft(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn molecule_file(dir: &Path) -> std::path::PathBuf {
    let txt = dir.join("water.txt");
    std::fs::write(&txt, WATER).unwrap();
    let out = dir.join("water.ssf");
    ok(&["project-molecule", "-i", p(&txt), "--radius", "0.5", "-o", p(&out)]);
    out
}

#[test]
fn info_echoes_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let file = molecule_file(dir.path());
    let stdout = ok(&["info", p(&file)]);
    let header: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(header["type"], "s2");
    assert_eq!(header["bandwidth"], 10);
    assert_eq!(header["channels"], 2);
}

fn load_s2(path: &Path) -> Vec<f64> {
    match read_container(path).unwrap() {
        Object::S2(s) => s.data,
        other => panic!("expected an S2 signal, got {:?}", other.header()),
    }
}

#[test]
fn transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let raw = molecule_file(dir.path());
    let spec = dir.path().join("spec.ssf");
    // molecule channels are not bandlimited; one pass through the transform makes them so
    let input = dir.path().join("bandlimited.ssf");
    ok(&["transform", "--kind", "s2", "--dir", "forward", "-i", p(&raw), "-o", p(&spec)]);
    ok(&["transform", "--kind", "s2", "--dir", "inverse", "-i", p(&spec), "-o", p(&input)]);
    let back = dir.path().join("back.ssf");
    for path in ["fast", "direct"] {
        ok(&[
            "transform",
            "--kind",
            "s2",
            "--dir",
            "forward",
            "--path",
            path,
            "-i",
            p(&input),
            "-o",
            p(&spec),
        ]);
        ok(&[
            "transform",
            "--kind",
            "s2",
            "--dir",
            "inverse",
            "--path",
            path,
            "-i",
            p(&spec),
            "-o",
            p(&back),
        ]);
        let err = relative_l2(&load_s2(&back), &load_s2(&input));
        assert!(err <= 1e-10, "{path}: {err}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let out = so3fft(&["transform", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(so3fft(&[]).status.code(), Some(1));
    assert_eq!(so3fft(&["--help"]).status.code(), Some(0));
    assert_eq!(so3fft(&["--version"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = molecule_file(dir.path());
    let out = so3fft(&[
        "transform",
        "--kind",
        "so3",
        "--dir",
        "forward",
        "-i",
        p(&input),
        "-o",
        p(&dir.path().join("x.ssf")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");

    let garbage = dir.path().join("garbage.ssf");
    std::fs::write(&garbage, b"not a container").unwrap();
    assert_eq!(so3fft(&["info", p(&garbage)]).status.code(), Some(2));
    let missing_dir = dir.path().join("nope").join("out.ssf");
    assert_eq!(so3fft(&["rotate", "-i", p(&input), "-o", p(&missing_dir)]).status.code(), Some(2));
}

#[test]
fn singular_potential_is_a_guard_trip() {
    let dir = tempfile::tempdir().unwrap();
    // at b=1 the first sample sits at alpha=0, beta=pi/4 on the unit sphere
    let (x, z) = (std::f64::consts::FRAC_PI_4.sin(), std::f64::consts::FRAC_PI_4.cos());
    let txt = dir.path().join("bad.txt");
    std::fs::write(&txt, format!("1 0 0 0\n1 {x:e} 0 {z:e}\n")).unwrap();
    let out = so3fft(&["project-molecule", "-b", "1", "-i", p(&txt), "-o", p(&dir.path().join("m.ssf"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn correlate_rotate_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = molecule_file(dir.path());
    let corr = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "correlate",
            "-i",
            p(&input),
            "--filters",
            p(&input),
            "--out-bandwidth",
            "6",
            "-o",
            p(&out),
        ]);
        std::fs::read(out).unwrap()
    };
    assert_eq!(corr("a.ssf"), corr("b.ssf"));
    let Object::SO3(c) = decode(&corr("c.ssf")).unwrap() else {
        panic!()
    };
    assert_eq!((c.bandwidth.get(), c.channels), (6, 1));

    let rotated = dir.path().join("r.ssf");
    ok(&[
        "rotate",
        "-i",
        p(&input),
        "--alpha",
        "-0.4",
        "--beta",
        "1.1",
        "--gamma",
        "2",
        "-o",
        p(&rotated),
    ]);
    let out = so3fft(&[
        "correlate",
        "-i",
        p(&input),
        "--filters",
        p(&input),
        "--out-channels",
        "2",
        "-o",
        p(&rotated),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equivariance_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let args = ["equivariance", "-b", "4", "-L", "1,2", "-n", "3", "-K", "3", "--csv", p(&csv)];
    let first = ok(&args);
    let second = ok(&args);
    let strip = |s: &str| -> Vec<serde_json::Value> {
        s.lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("seconds");
                v
            })
            .collect()
    };
    assert_eq!(strip(&first), strip(&second));
    assert_eq!(strip(&first).len(), 2);
    assert!(strip(&first).iter().all(|v| v["delta"].as_f64().unwrap() < 1e-9));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["equivariance", "-b", "3", "-n", "4", "-K", "2", "--relu"];
    let delta = |threads: &str| -> f64 {
        let mut full = vec!["--threads", threads];
        full.extend_from_slice(&args);
        let v: serde_json::Value = serde_json::from_str(ok(&full).trim()).unwrap();
        v["delta"].as_f64().unwrap()
    };
    assert_eq!(delta("1").to_bits(), delta("3").to_bits());
}
