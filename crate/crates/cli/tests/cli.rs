use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const STANDARD: &str =
    r#"{"eps1":1.0,"eps2":-1.0,"omega1":1.0,"omega2":-1.0,"phi":0.7853981633974483}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn standard(&self) -> PathBuf {
        self.file("standard.json", STANDARD)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_epchiral"))
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn json(&self, rel: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.path(rel)).unwrap()).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn complex(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn invalid_input_exits_with_one() {
    let w = Workspace::new();
    let std = w.standard();
    let bad = w.file("bad.json", "{");
    let asym = w.file(
        "asym.json",
        r#"{"n":2,"h0":[[1,2],[0,1]],"h1":[[0,1],[1,0]]}"#,
    );
    for args in [
        vec!["--pencil", s(&bad), "eigs", "--lambda", "0"],
        vec!["--pencil", s(&asym), "eigs", "--lambda", "0"],
        vec!["eigs", "--lambda", "0"],
        vec!["--two-level", s(&std), "eigs", "--lambda", "i"],
        vec!["--two-level", s(&std), "eigs", "--lambda", "1+i"],
        vec![
            "--two-level",
            s(&std),
            "--tol-eig=-1",
            "eigs",
            "--lambda",
            "0",
        ],
        vec!["--two-level", s(&std), "sweep", "--from", "1", "--to", "-1"],
        vec![
            "--two-level",
            s(&std),
            "loop",
            "--center",
            "0,-1",
            "--radius",
            "0",
        ],
        vec![
            "--two-level",
            s(&std),
            "--pencil",
            s(&std),
            "eigs",
            "--lambda",
            "0",
        ],
        vec!["demo", "--n", "1"],
        vec!["no-such-command"],
    ] {
        let out = w.run(&args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn solver_failure_exits_with_two() {
    let w = Workspace::new();
    // φ = 0: the two EPs merge into a diabolic crossing on the real axis
    let diabolic = w.file(
        "diabolic.json",
        r#"{"eps1":0.5,"eps2":-0.5,"omega1":1.0,"omega2":-1.0,"phi":0.0}"#,
    );
    let out = w.run(&["--two-level", s(&diabolic), "chirality", "--ep", "0.5"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn demo_is_deterministic_and_round_trips() {
    let w = Workspace::new();
    w.ok(&["demo", "--out", "a"]);
    w.ok(&["demo", "--out", "b"]);
    w.ok(&["demo", "--seed", "43", "--out", "c"]);
    w.ok(&["demo", "--n", "2", "--out", "d"]);
    let read = |p: &str| std::fs::read(w.path(p)).unwrap();
    assert_eq!(read("a/pencil.json"), read("b/pencil.json"));
    assert_ne!(read("a/pencil.json"), read("c/pencil.json"));
    let pencil = w.json("a/pencil.json");
    assert_eq!(pencil["n"], 10);
    let stdout = w.ok(&["--pencil", "a/pencil.json", "eigs", "--lambda", "0.3"]);
    assert!(stdout.starts_with("eigs: 10 levels"));
    w.ok(&[
        "--pencil",
        "d/pencil.json",
        "eigs",
        "--lambda",
        "0.3",
        "--out",
        "d",
    ]);
    assert_eq!(w.json("d/eigs.json")["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let w = Workspace::new();
    w.ok(&["demo"]);
    for out in ["r1", "r2"] {
        w.ok(&["--pencil", "out/pencil.json", "find-ep", "--out", out]);
        w.ok(&[
            "--pencil",
            "out/pencil.json",
            "sweep",
            "--steps",
            "200",
            "--out",
            out,
        ]);
    }
    for f in ["find_ep.json", "sweep.csv", "seeds.json"] {
        let a = std::fs::read(w.path(&format!("r1/{f}"))).unwrap();
        let b = std::fs::read(w.path(&format!("r2/{f}"))).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn eigs_of_a_diagonal_pencil() {
    let w = Workspace::new();
    let p = w.file(
        "diag.json",
        r#"{"n":3,"h0":[[3,0,0],[0,-1,0],[0,0,2]],"h1":[[0,1,0],[1,0,1],[0,1,0]]}"#,
    );
    w.ok(&["--pencil", s(&p), "eigs", "--lambda", "0"]);
    let report = w.json("out/eigs.json");
    let values: Vec<(f64, f64)> = report["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| complex(&l["value"]))
        .collect();
    assert_eq!(values, vec![(-1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
    assert!(report["completeness_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn eigs_at_the_ep_flags_near_defective_levels() {
    let w = Workspace::new();
    let std = w.standard();
    w.ok(&["--two-level", s(&std), "eigs", "--lambda=-1i"]);
    let report = w.json("out/eigs.json");
    assert!(report["completeness_residual"].is_null());
    assert!(report["note"].is_string());
    for level in report["levels"].as_array().unwrap() {
        assert_eq!(level["near_defective"], true);
    }
}

#[test]
fn sweep_of_the_standard_pencil() {
    let w = Workspace::new();
    let std = w.standard();
    w.ok(&[
        "--two-level",
        s(&std),
        "sweep",
        "--from=-2",
        "--to",
        "2",
        "--steps",
        "400",
    ]);
    let csv = std::fs::read_to_string(w.path("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,E1_re,E1_im,E2_re,E2_im");
    let mut min_gap = (f64::INFINITY, 0.0);
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        // oracle: gap 2√(1+λ²)
        let gap = (f[3] - f[1]).abs();
        assert!((gap - 2.0 * (1.0 + f[0] * f[0]).sqrt()).abs() < 1e-12);
        if gap < min_gap.0 {
            min_gap = (gap, f[0]);
        }
    }
    assert!((min_gap.0 - 2.0).abs() < 1e-12 && min_gap.1.abs() < 1e-12);
    let seeds = w.json("out/seeds.json");
    assert_eq!(seeds.as_array().unwrap().len(), 1);
}

#[test]
fn sweep_through_a_diabolic_crossing() {
    let w = Workspace::new();
    let p = w.file(
        "diabolic.json",
        r#"{"eps1":0.5,"eps2":-0.5,"omega1":1.0,"omega2":-1.0,"phi":0.0}"#,
    );
    w.ok(&[
        "--two-level",
        s(&p),
        "sweep",
        "--from=-2",
        "--to",
        "2",
        "--steps",
        "400",
    ]);
    let csv = std::fs::read_to_string(w.path("out/sweep.csv")).unwrap();
    let min_gap = csv
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            (f[3] - f[1]).abs()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(min_gap <= 1e-8, "{min_gap}");
}

#[test]
fn find_ep_on_the_standard_pencil() {
    let w = Workspace::new();
    let std = w.standard();
    let stdout = w.ok(&["--two-level", s(&std), "find-ep", "--chirality"]);
    assert!(stdout.starts_with("find-ep: 2 exceptional points"));
    let report = w.json("out/find_ep.json");
    let eps = report.as_array().unwrap();
    let mut found: Vec<(f64, f64, i64)> = eps
        .iter()
        .map(|e| {
            let (re, im) = complex(&e["lambda_c"]);
            (re, im, e["chirality"].as_i64().unwrap())
        })
        .collect();
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    assert!(found[0].0.abs() < 1e-12 && (found[0].1 + 1.0).abs() < 1e-12);
    assert!(found[1].0.abs() < 1e-12 && (found[1].1 - 1.0).abs() < 1e-12);
    assert_eq!((found[0].2, found[1].2), (1, -1));
    for e in eps {
        assert!((e["puiseux_exponent"].as_f64().unwrap() - 0.5).abs() < 0.005);
    }
}

#[test]
fn four_turns_restore_the_pair() {
    let w = Workspace::new();
    let std = w.standard();
    let base = [
        "--two-level",
        s(&std),
        "loop",
        "--center",
        "0,-1",
        "--radius",
        "0.3",
    ];
    w.ok(&[&base[..], &["--out", "one"]].concat());
    let one = w.json("one/loop.json");
    assert_eq!(one["permutation"], serde_json::json!([1, 0]));
    let signs: Vec<i64> = one["signs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_i64().unwrap())
        .collect();
    assert_eq!(signs[0] * signs[1], -1);
    assert_eq!(one["loops_to_identity"], 4);

    w.ok(&[&base[..], &["--turns", "4", "--out", "four"]].concat());
    let four = w.json("four/loop.json");
    assert_eq!(four["permutation"], serde_json::json!([0, 1]));
    assert_eq!(four["signs"], serde_json::json!([1, 1]));
    let csv = std::fs::read_to_string(w.path("four/loop_tracks.csv")).unwrap();
    assert!(csv.starts_with("step,lambda_re,lambda_im,E1_re,E1_im,E2_re,E2_im\n"));
}

#[test]
fn conjugate_eps_have_opposite_chirality() {
    let w = Workspace::new();
    let std = w.standard();
    w.ok(&[
        "--two-level",
        s(&std),
        "chirality",
        "--ep",
        "0,1",
        "--out",
        "up",
    ]);
    w.ok(&[
        "--two-level",
        s(&std),
        "chirality",
        "--ep",
        "0 - 1i",
        "--out",
        "down",
    ]);
    let up = w.json("up/chirality.json");
    let down = w.json("down/chirality.json");
    assert_eq!(
        up["sign"].as_i64().unwrap(),
        -down["sign"].as_i64().unwrap()
    );
    assert!(up["ratio_samples"].as_array().unwrap().len() >= 8);
    assert!(down["max_deviation"].as_f64().unwrap() < 1e-3);
}

#[test]
fn crossing_reports_are_complementary() {
    let w = Workspace::new();
    let std = w.standard();
    for (offset, dir) in [("0.5", "below"), ("1.5", "above")] {
        w.ok(&[
            "--two-level",
            s(&std),
            "crossing",
            "--ep",
            "1i",
            "--offset",
            offset,
            "--out",
            dir,
        ]);
    }
    let below = w.json("below/crossing.json");
    let above = w.json("above/crossing.json");
    assert_eq!(
        (
            below["energies_cross"].clone(),
            below["widths_cross"].clone()
        ),
        (false.into(), true.into())
    );
    assert_eq!(
        (
            above["energies_cross"].clone(),
            above["widths_cross"].clone()
        ),
        (true.into(), false.into())
    );
    assert!(w.path("above/crossing_tracks.csv").exists());
}

#[test]
fn reduce_reports_effective_parameters() {
    let w = Workspace::new();
    let std = w.standard();
    w.ok(&["--two-level", s(&std), "reduce", "--ep", "1i"]);
    let r = w.json("out/reduce.json");
    for key in [
        "eps",
        "omega",
        "phi",
        "lambda_ref",
        "predicted_ep",
        "max_deviation",
    ] {
        assert!(!r[key].is_null(), "missing {key}");
    }
    assert!((r["phi"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert!(r["max_deviation"].as_f64().unwrap() < 1e-12);
    let predicted: Vec<(f64, f64)> = r["predicted_ep"]
        .as_array()
        .unwrap()
        .iter()
        .map(complex)
        .collect();
    assert!(predicted
        .iter()
        .any(|&(re, im)| re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12));
}
