use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const CUBIC: &str =
    "map F(x, y, z) = (y + x^2, z + y^2, x) inverse = (z, x - z^2, y - (x - z^2)^2)\n";
const HENON: &str = "map h(x, y) = (y, y^2 + 1 - x) inverse = (x^2 + 1 - y, x)\n";
const PRODUCT: &str = "\
map F(x, y, z, w) = (y, y^2 + 1 - x, w, w^2 + 1 - z) inverse = (x^2 + 1 - y, x, z^2 + 1 - w, z)
map G(x, y, z, w) = (y, y^2 + 1 - x, z^2 + 1 - w, z) inverse = (x^2 + 1 - y, x, w, w^2 + 1 - z)
";

fn hsmaps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsmaps"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_reports_henon_regularity() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.hs", HENON);
    let o = hsmaps(&["--json", "check", s(&f)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["s"], 1);
    assert_eq!(v["d"], 2);
    assert_eq!(v["delta"], 2);
    assert_eq!(v["regular"], true);
}

#[test]
fn check_cubic_text() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.hs", CUBIC);
    let o = hsmaps(&["check", s(&f)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("delta: 4"), "{out}");
    assert!(out.contains("s: 2"), "{out}");
}

#[test]
fn linear_and_inverse_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let lin = write(dir.path(), "l.hs", "map L(x, y) = (y, x) inverse = (y, x)\n");
    let o = hsmaps(&["check", s(&lin)]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree 1"));

    let none = write(dir.path(), "n.hs", "map h(x, y) = (y, y^2 + 1 - x)\n");
    assert_eq!(code(&hsmaps(&["check", s(&none)])), 3);

    let wrong = write(
        dir.path(),
        "w.hs",
        "map h(x, y) = (y, y^2 + 1 - x) inverse = (x^2 - y, x)\n",
    );
    assert_eq!(code(&hsmaps(&["check", s(&wrong)])), 3);
}

#[test]
fn parse_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "b.hs", "map h(x, y) = (y, y^ + 1)\n");
    assert_eq!(code(&hsmaps(&["check", s(&bad)])), 2);
    assert_eq!(code(&hsmaps(&["check", "/nonexistent/file.hs"])), 2);
    assert_eq!(code(&hsmaps(&["frobnicate"])), 2);

    let two = write(dir.path(), "p.hs", PRODUCT);
    assert_eq!(code(&hsmaps(&["check", s(&two)])), 2);
    assert_eq!(code(&hsmaps(&["check", s(&two), "--map", "Q"])), 2);
    assert_eq!(code(&hsmaps(&["check", s(&two), "--map", "G"])), 0);

    let h = write(dir.path(), "h.hs", HENON);
    assert_eq!(code(&hsmaps(&["green", s(&h), "--point", "1,2,3"])), 2);
    assert_eq!(code(&hsmaps(&["green", s(&h), "--point", "1,zz"])), 2);
    assert_eq!(code(&hsmaps(&["--radius", "-1", "check", s(&h)])), 2);
}

#[test]
fn cubic_symmetries_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.hs", CUBIC);
    let o = hsmaps(&["--json", "symmetries", s(&f)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["member"], "diag(a, a^2, a^4)");
    assert_eq!(v["status"], "solved");
    assert_eq!(v["element_count"], 7);
    assert_eq!(v["stabilized"], true);
    let rels: Vec<&str> = v["relations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_str().unwrap())
        .collect();
    assert_eq!(rels, ["a^7 = 1"]);
}

#[test]
fn henon_symmetries_are_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.hs", HENON);
    let o = hsmaps(&["--json", "symmetries", s(&f)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["element_count"], 1);
    assert_eq!(v["member"], "diag(1, 1)");
}

#[test]
fn product_symmetries_stay_unsolved() {
    // the swap of the two factors makes the constraints disjunctive
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.hs", PRODUCT);
    for name in ["F", "G"] {
        let o = hsmaps(&["--json", "symmetries", s(&f), "--map", name]);
        assert_eq!(code(&o), 4, "map {name}");
        let v = json(&o);
        assert_eq!(v["status"], "unsolved");
        assert!(v["element_count"].is_null());
        let residual: Vec<&str> = v["residual"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r.as_str().unwrap())
            .collect();
        assert!(residual.iter().any(|r| r.starts_with("c*d")), "{residual:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("unsolved: c*d = 0"));
    }
}

#[test]
fn iterate_round_trips_through_the_parser() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.hs", HENON);
    let o = hsmaps(&["iterate", s(&f), "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o).trim(),
        "map h_2(x, y) = (y^2 - x + 1, y^4 - 2*x*y^2 + x^2 + 2*y^2 - 2*x - y + 2)"
    );
    let back = hsmaps(&["iterate", s(&f), "-1"]);
    assert_eq!(stdout(&back).trim(), "map h_m1(x, y) = (x^2 - y + 1, x)");

    let again = write(dir.path(), "h2.hs", &stdout(&o));
    let o2 = hsmaps(&["--json", "iterate", s(&again), "1"]);
    assert_eq!(json(&o2)["degree"], 4);
}

#[test]
fn shared_iterate_cases() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.hs", PRODUCT);
    let same = hsmaps(&["shared-iterate", s(&f), "F", "F"]);
    assert_eq!(code(&same), 0);
    assert_eq!(stdout(&same).trim(), "(1,1)");

    let o = hsmaps(&["--json", "shared-iterate", s(&f), "F", "G"]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["shared"].is_null());
}

#[test]
fn green_json_fields() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.hs", HENON);
    let o = hsmaps(&["--json", "green", s(&f), "--point", "0,10"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let g = v["value"].as_f64().unwrap();
    let ln10 = 10f64.ln();
    assert!(g > ln10 / 2.0 && g < 2.0 * ln10, "{g}");
    assert_eq!(v["escaped"], true);
    assert!(v["error_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(v["radius"], 1e4);

    let origin = hsmaps(&["--json", "green", s(&f), "--point", "1,1", "--minus"]);
    let v = json(&origin);
    assert_eq!(v["escaped"], false);
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["sign"], "minus");
}

#[test]
fn render_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.hs", HENON);
    let run = |prefix: &str, threads: &str| {
        let out = dir.path().join(prefix);
        let o = hsmaps(&[
            "--threads",
            threads,
            "render",
            s(&f),
            "--width",
            "24",
            "--height",
            "16",
            "--window",
            "-3,3,-3,3",
            "--base",
            "0,0.5i",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(out.with_extension("pgm")).unwrap(),
            fs::read(out.with_extension("csv")).unwrap(),
        )
    };
    let (pgm1, csv1) = run("one", "1");
    let (pgm2, csv2) = run("two", "4");
    assert_eq!(pgm1, pgm2);
    assert_eq!(csv1, csv2);
    assert!(pgm1.starts_with(b"P5\n24 16\n255\n"));
    assert_eq!(pgm1.len(), b"P5\n24 16\n255\n".len() + 24 * 16);
    let csv = String::from_utf8(csv1).unwrap();
    assert_eq!(csv.lines().count(), 1 + 24 * 16);
    assert_eq!(csv.lines().next(), Some("row,col,value,iterations,escaped"));
}

#[test]
fn render_rejects_bad_windows() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.hs", HENON);
    let out = dir.path().join("img");
    for w in ["1,2,3", "2,1,0,1", "a,b,c,d"] {
        let o = hsmaps(&["render", s(&f), "--window", w, "--out", s(&out)]);
        assert_eq!(code(&o), 2, "window {w}");
    }
}

#[test]
fn verify_paper_passes() {
    let o = hsmaps(&["verify-paper"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 12);
    assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");

    let v = json(&hsmaps(&["--json", "verify-paper"]));
    assert_eq!(v["pass"], true);
}
