use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwshadow")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn zigzag_round_trips_and_is_preserving() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["make-beta", "--laps", "3", "--points", "0,pi-3,1/5,1", "-o", "b.toml"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("b.toml")).unwrap();
    assert!(text.contains("\"pi - 3\""), "{text}");
    assert_eq!(code(&run(dir.path(), &["check-preserving", "b.toml"])), 0);
}

#[test]
fn non_preserving_map_exits_one_and_lebesgueize_repairs_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), "degree = 1\nbreakpoints = [\"0\", \"1/2\", \"1\"]\nvalues = [\"0\", \"3/4\", \"1\"]\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["check-preserving", "m.toml"])), 1);
    assert_eq!(code(&run(dir.path(), &["lebesgueize", "m.toml", "-o", "g.toml"])), 0);
    assert_eq!(code(&run(dir.path(), &["check-preserving", "g.toml"])), 0);
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["perturb", "seed:missing", "--eps", "1/5"])), 2);
    assert_eq!(code(&run(dir.path(), &["check-preserving", "absent.toml"])), 2);
    let psi = ["make-psi", "--eps", "1/10", "--a-prime", "0", "--d", "2/5", "--e", "3/5", "--h-prime", "4/5"];
    assert_eq!(code(&run(dir.path(), &psi)), 2);
    assert_eq!(code(&run(dir.path(), &["no-such-command"])), 2);
}

#[test]
fn perturb_orbit_trace_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["perturb", "seed:doubling", "--eps", "1/5", "-o", "s.toml"])), 0);
    assert_eq!(code(&run(d, &["verify", "s.toml"])), 0);
    for name in ["o1.toml", "o2.toml"] {
        assert_eq!(code(&run(d, &["orbit", "s.toml", "--x0", "1/3", "--len", "60", "--seed", "11", "-o", name])), 0);
    }
    let (o1, o2) = (fs::read(d.join("o1.toml")).unwrap(), fs::read(d.join("o2.toml")).unwrap());
    assert_eq!(o1, o2);
    assert!(String::from_utf8_lossy(&o1).contains("seed = 11"));

    let out = run(d, &["trace", "s.toml", "o1.toml", "--csv", "t.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("t.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("seed 11"));
    assert_eq!(lines.next().unwrap(), "step,x,step_error,trace_error");
    assert_eq!(lines.count(), 60);
}

#[test]
fn tampered_system_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["perturb", "seed:tripling", "--eps", "1/5", "-o", "s.toml"])), 0);
    let text = fs::read_to_string(d.join("s.toml")).unwrap();
    let delta_line = text.lines().find(|l| l.starts_with("delta = ")).unwrap();
    fs::write(d.join("bad.toml"), text.replace(delta_line, "delta = \"1/4\"")).unwrap();
    assert_eq!(code(&run(d, &["verify", "bad.toml"])), 1);
}

#[test]
fn figure_demo_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["demo-fig2", "--svg", "f.svg"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains(r#"computed = ["4/3", "1", "4/7", "3/2"]"#), "{stdout}");
    assert_eq!(stdout.matches("equal = true").count(), 3, "{stdout}");
    let svg = fs::read_to_string(dir.path().join("f.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(code(&run(dir.path(), &["plot", "seed:tent", "-o", "t.svg"])), 0);
}
