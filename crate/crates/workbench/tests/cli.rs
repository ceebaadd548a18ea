use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_integer::Integer;
use proptest::prelude::*;
use tropcount::problem::{load, ProblemFile};
use tropcount::render::{PlaneDrawing, Projection};
use tropcount::result::ResultFile;
use tropcount_core::Rational;

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropcount")).args(args).output().unwrap()
}

fn run_on(cmd: &str, path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let last = text.lines().last().expect("stderr is not empty");
    serde_json::from_str(last).unwrap()
}

/// Writes the toy problem with `edit` applied to its JSON value.
fn edited_toy(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(problem("toy.json")).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join("edited.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn assert_failure(out: &Output, exit: i32, code: &str, needle: &str) {
    assert_eq!(out.status.code(), Some(exit), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let json = stderr_json(out);
    assert_eq!(json["code"], code);
    assert_eq!(json["exit"], exit);
    let message = json["message"].as_str().unwrap();
    assert!(message.contains(needle), "{message:?} lacks {needle:?}");
}

#[test]
fn unbalanced_degrees_are_an_invariant_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_toy(dir.path(), |v| v["degrees"][5] = serde_json::json!([0, 1]));
    assert_failure(&run_on("count", &path, &[]), 3, "invariant", "degrees do not balance");
    assert_failure(&run_on("validate", &path, &[]), 3, "invariant", "degrees do not balance");
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"schema\": ").unwrap();
    assert_failure(&run_on("count", &path, &[]), 2, "parse", "");

    let path = edited_toy(dir.path(), |v| v["constraints"][0]["point"][0] = "1/0".into());
    assert_failure(&run_on("count", &path, &[]), 2, "parse", "1/0");

    let path = edited_toy(dir.path(), |v| v["schema"] = "something-else/1".into());
    assert_failure(&run_on("count", &path, &[]), 2, "parse", "schema");

    let out = run(&["count"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = run(&["count", "/nonexistent/problem.json"]);
    assert_failure(&out, 1, "io", "/nonexistent/problem.json");
}

#[test]
fn dimension_mismatch_has_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_toy(dir.path(), |v| v["cross_ratios"] = serde_json::json!([]));
    assert_failure(&run_on("count", &path, &[]), 4, "dimension", "dimension condition");
    // validate reports the mismatch without failing
    let out = run_on("validate", &path, &[]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("dimension condition fails"));
}

#[test]
fn special_constraints_are_a_generality_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_toy(dir.path(), |v| v["constraints"][1]["point"] = serde_json::json!(["0", "0"]));
    assert_failure(&run_on("count", &path, &[]), 5, "generality", "not tropically general");
    // enumerate still writes its output before failing
    let out_path = dir.path().join("result.json");
    let out = run_on("enumerate", &path, &["-o", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    let result = ResultFile::from_json(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert!(!result.tropically_general);
    assert!(result.diagnostics.iter().any(|d| d.reason == "generality-violation"));
}

#[test]
fn irrational_starting_point_needs_a_field_extension() {
    let out = run_on("lift", &problem("double_star.json"), &[]);
    assert_failure(&out, 6, "field-extension", "z^2 = 2");

    let out = run_on("lift", &problem("double_star_split.json"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = ResultFile::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let lifts = result.lifts.unwrap();
    assert_eq!(lifts.len(), 1);
    let mut second: Vec<String> = lifts[0].maps.iter().map(|m| m.map_coefficients[1].clone()).collect();
    second.sort();
    assert_eq!(second.len(), 2);
    assert!(second[0].starts_with("-2*t^(0/1)") && second[1].starts_with("2*t^(0/1)"), "{second:?}");
}

#[test]
fn negative_lift_order_is_rejected() {
    let out = run_on("lift", &problem("toy.json"), &["--order", "-1"]);
    assert_failure(&out, 3, "invariant", "non-negative");
}

#[test]
fn output_is_deterministic_across_runs_and_thread_counts() {
    let path = problem("toy.json");
    let outputs: Vec<Vec<u8>> = [["--threads", "1"], ["--threads", "4"], ["--threads", "1"], ["--threads", "3"]]
        .iter()
        .map(|extra| {
            let out = run_on("enumerate", &path, extra);
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));

    let a = run_on("lift", &path, &["--threads", "1", "--order", "8"]);
    let b = run_on("lift", &path, &["--threads", "4", "--order", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn totals_are_recomputable_from_the_curves() {
    for name in ["toy.json", "line_in_space.json"] {
        let out = run_on("enumerate", &problem(name), &[]);
        let result = ResultFile::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
        let sum: u64 = result.curves.iter().map(|c| c.multiplicity.parse::<u64>().unwrap()).sum();
        assert_eq!(sum.to_string(), result.total_complex, "{name}");
        assert!(result.curves.iter().enumerate().all(|(i, c)| c.index == i + 1));
    }

    let path = problem("toy.json");
    let spec = load(&std::fs::read_to_string(&path).unwrap()).unwrap().spec;
    let signs = tropcount::problem::sign_count(&spec);
    let arg: Vec<&str> = (0..signs).map(|i| if i % 2 == 0 { "-1" } else { "1" }).collect();
    let arg = arg.join(",");
    let dir = tempfile::tempdir().unwrap();
    let edited = edited_toy(dir.path(), |v| {
        v["signs"] = serde_json::json!((0..signs).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect::<Vec<i8>>())
    });
    let out = run_on("enumerate", &edited, &[]);
    let result = ResultFile::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let sum: u64 = result.curves.iter().map(|c| c.real_multiplicity.as_ref().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(Some(sum.to_string()), result.total_real);

    let out = run_on("real-count", &path, &["--sign", &arg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), sum.to_string());
    // the problem's own signs are the default
    let out = run_on("real-count", &edited, &[]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), sum.to_string());

    let out = run_on("real-count", &path, &["--sign", "1,1"]);
    assert_failure(&out, 3, "invariant", "expected 5 signs");
    let out = run_on("real-count", &path, &["--sign", "1,x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn result_files_round_trip() {
    let out = run_on("lift", &problem("toy.json"), &["--order", "6"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let result = ResultFile::from_json(&text).unwrap();
    assert_eq!(result.to_json(), text);
    let toy = ProblemFile::from_json(&std::fs::read_to_string(problem("toy.json")).unwrap()).unwrap();
    assert_eq!(result.problem_hash, toy.hash());
}

#[test]
fn problem_files_survive_the_spec() {
    for name in ["toy.json", "double_star.json", "line_in_space.json"] {
        let file = ProblemFile::from_json(&std::fs::read_to_string(problem(name)).unwrap()).unwrap();
        let p = file.validate().unwrap();
        let again = ProblemFile::from_spec(&p.spec);
        assert_eq!(again.validate().unwrap().spec, p.spec, "{name}");
        assert_eq!(ProblemFile::from_json(&again.to_json()).unwrap(), again);
    }
}

fn rational_string() -> impl Strategy<Value = String> {
    (-50i64..50, 1i64..12).prop_map(|(n, d)| Rational::new(n.into(), d.into()).to_string())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toy_variants_round_trip(
        p5 in proptest::collection::vec(rational_string(), 2),
        p6 in proptest::collection::vec(rational_string(), 2),
        value in rational_string().prop_filter("nonzero", |v| v != "0"),
    ) {
        let mut file = ProblemFile::from_json(&std::fs::read_to_string(problem("toy.json")).unwrap()).unwrap();
        file.constraints[0].point = p5;
        file.constraints[1].point = p6;
        file.cross_ratios[0].value = value;
        let text = file.to_json();
        let back = ProblemFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.hash(), file.hash());
        prop_assert!(back.validate().is_ok());
    }
}

fn primitive(v: &[Rational; 2]) -> [i64; 2] {
    let [x, y] = v.clone().map(|q| {
        assert!(q.is_integer());
        i64::try_from(q.to_integer()).unwrap()
    });
    let g = x.gcd(&y);
    [x / g, y / g]
}

/// Directions walked along the tree path from the vertex carrying end `from`
/// to the vertex carrying end `to`.
fn path_directions(d: &PlaneDrawing, from: usize, to: usize) -> Vec<[i64; 2]> {
    let start = d.marked.iter().find(|m| m.0 == from).unwrap().1;
    let goal = d.marked.iter().find(|m| m.0 == to).unwrap().1;
    fn walk(d: &PlaneDrawing, at: usize, goal: usize, came: Option<usize>, out: &mut Vec<[i64; 2]>) -> bool {
        if at == goal {
            return true;
        }
        for (i, s) in d.segments.iter().enumerate() {
            if Some(i) == came {
                continue;
            }
            let (next, dir) = if s.from == at {
                (s.to, primitive(&s.direction))
            } else if s.to == at {
                (s.from, primitive(&s.direction).map(|x| -x))
            } else {
                continue;
            };
            out.push(dir);
            if walk(d, next, goal, Some(i), out) {
                return true;
            }
            out.pop();
        }
        false
    }
    let mut out = Vec::new();
    assert!(walk(d, start, goal, None, &mut out));
    out
}

#[test]
fn toy_drawings_bend_in_opposite_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_on("enumerate", &problem("toy.json"), &[]);
    let result = ResultFile::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let mut paths: Vec<Vec<[i64; 2]>> = result
        .curves
        .iter()
        .map(|c| path_directions(&PlaneDrawing::from_curve(c, &result.degrees, &Projection::identity()).unwrap(), 4, 5))
        .collect();
    paths.sort();
    assert_eq!(paths, vec![vec![[1, 0], [1, 1]], vec![[1, 1], [1, 0]]]);

    let result_path = dir.path().join("toy-result.json");
    std::fs::write(&result_path, result.to_json()).unwrap();
    let svg_dir = dir.path().join("svg");
    for input in [problem("toy.json"), result_path] {
        let out = run_on("render", &input, &["--bbox", "-5,-5,15,10", "--out-dir", svg_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        for i in 1..=2 {
            let svg = std::fs::read_to_string(svg_dir.join(format!("curve-{i}.svg"))).unwrap();
            assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
            assert_eq!(svg.matches("<circle").count(), 4 + 2, "four vertices and two marked points");
        }
    }
}

#[test]
fn rank_three_needs_a_projection() {
    let dir = tempfile::tempdir().unwrap();
    let path = problem("line_in_space.json");
    let svg_dir = dir.path().join("svg");
    let out = run_on("render", &path, &["--bbox", "-5,-5,5,5", "--out-dir", svg_dir.to_str().unwrap()]);
    assert_failure(&out, 3, "invariant", "--projection");
    let out = run_on("render", &path, &["--bbox", "-5,-5,5,5", "--out-dir", svg_dir.to_str().unwrap(), "--projection", "1,0;0,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_on(
        "render",
        &path,
        &["--bbox", "-5,-5,5,5", "--out-dir", svg_dir.to_str().unwrap(), "--projection", "1,0,-1/2;0,1,-1/2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(svg_dir.join("curve-1.svg")).unwrap();
    // four rays, one per non-contracted end
    assert_eq!(svg.matches("stroke=\"#555\"").count(), 4);
}
