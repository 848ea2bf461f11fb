use std::path::PathBuf;

use compeval_cli::run;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("compeval").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_model(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
  "name": "small",
  "scales": {"o1": {"kind": "ordinal", "size": 1}, "o3": {"kind": "ordinal", "size": 3},
             "c33": {"kind": "count-poset", "levels": 3, "elements": 3}},
  "das": {"A1": {"ordinal": {"scale": "o3", "level": 1}}, "A2": {"ordinal": {"scale": "o3", "level": 2}}},
  "tree": {"id": "S", "children": [{"id": "A", "das": ["A1", "A2"]}]},
  "methods": {"S": "count-profile"}
}"#;

#[test]
fn unknown_command_is_a_usage_error() {
    let (code, out, err) = cli(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.starts_with("error:") && err.contains("Usage:"), "{err}");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let (code, _, err) = cli(&["rank", &fixture("student-team.model.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("--reduce"), "{err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("validate") && out.contains("tables"));
}

#[test]
fn validate_fixture() {
    let (code, out, err) = cli(&["validate", &fixture("layered-tables.model.json")]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "ok\n", ""));
}

#[test]
fn empty_file_is_a_syntax_error_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_model(&dir, "empty.json", "");
    let (code, _, err) = cli(&["validate", &p]);
    assert_eq!(code, 1);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: ") && err.contains(": 1:1: "), "{err}");
}

#[test]
fn unknown_scale_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_model(
        &dir,
        "m.json",
        &SMALL.replace("\"scale\": \"o3\", \"level\": 2", "\"scale\": \"o7\", \"level\": 2"),
    );
    let (code, _, err) = cli(&["validate", &p]);
    assert_eq!(code, 1);
    assert!(err.contains("das/A2/ordinal: unknown scale `o7`"), "{err}");
    assert!(err.lines().all(|l| l.starts_with("error: ")));
}

#[test]
fn out_of_range_level_is_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_model(&dir, "m.json", &SMALL.replace("\"level\": 2", "\"level\": 5"));
    let (code, out, err) = cli(&["validate", &p]);
    assert_eq!(code, 1);
    assert!(
        out.lines().any(|l| l.starts_with("violation: das/A2/ordinal:")),
        "{out}"
    );
    assert!(err.starts_with("error: small: 1 violation(s)"), "{err}");
    // evaluation refuses invalid models
    let (code, _, err) = cli(&["rank", &p, "--reduce", "layers"]);
    assert_eq!(code, 1);
    assert!(err.contains("das/A2/ordinal"), "{err}");
}

#[test]
fn unknown_composition_fails() {
    let (code, _, err) = cli(&["evaluate", &fixture("student-team.model.json"), "--composition", "T9"]);
    assert_eq!(code, 1);
    assert_eq!(err, "error: unknown composition `T9`\n");
}

#[test]
fn evaluation_error_names_node() {
    let (code, _, err) = cli(&[
        "evaluate",
        &fixture("student-team.model.json"),
        "--composition",
        "T1",
        "--method",
        "quality-vector",
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: T: "), "{err}");
}

#[test]
fn tables_evaluation_and_median_detail() {
    let team = fixture("student-team.model.json");
    let (code, out, _) = cli(&["evaluate", &team, "--composition", "T2", "--method", "tables"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().last(), Some("4"));
    let (_, out, _) = cli(&["evaluate", &team, "--composition", "T1", "--method", "multiset-median"]);
    let tail: Vec<&str> = out.lines().rev().take(2).collect();
    assert_eq!(tail, ["argmin=(3,1,0) total=2", "(3,1,0)"]);
    let (_, out, _) = cli(&["evaluate", &team, "--composition", "T2", "--method", "multiset-median"]);
    assert!(out.ends_with("total=8 tie-broken\n"), "{out}");
}

#[test]
fn hasse_metric_flag() {
    let team = fixture("student-team.model.json");
    let (code, out, _) = cli(&[
        "evaluate",
        &team,
        "--composition",
        "T1",
        "--method",
        "multiset-median",
        "--metric",
        "hasse",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("argmin="), "{out}");
    let (code, _, _) = cli(&["evaluate", &team, "--composition", "T1", "--metric", "l2"]);
    assert_eq!(code, 2);
}

#[test]
fn json_output_is_parseable() {
    let team = fixture("student-team.model.json");
    let (code, out, _) = cli(&[
        "rank",
        &team,
        "--method",
        "multiset-median",
        "--reduce",
        "labelD",
        "--json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["entries"].as_array().unwrap().len(), 4);
    assert_eq!(v["report"]["entries"][0]["evaluation"]["kind"], "median");
    let (_, out, _) = cli(&[
        "evaluate",
        &team,
        "--composition",
        "T1",
        "--method",
        "vector-sum",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["evaluation"]["value"], serde_json::json!([5.0, 5.0]));
}

#[test]
fn rank_all_with_limit_marks_truncation() {
    let team = fixture("student-team.model.json");
    let (code, out, _) = cli(&[
        "rank", &team, "--method", "additive", "--reduce", "layers", "--all", "--limit", "3",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("# truncated after 3 compositions\n"));
    assert_eq!(out.lines().filter(|l| l.starts_with("r(")).count(), 3);
    let (_, out, _) = cli(&["rank", &team, "--method", "additive", "--reduce", "layers", "--all"]);
    assert_eq!(out.lines().filter(|l| l.starts_with("r(")).count(), 16);
    assert!(out.contains("r(L1*Q1*G1*H1)=1\t5.2\n"));
}

#[test]
fn closeness_with_named_reference_points() {
    let demo = fixture("compat-demo.model.json");
    let (code, out, _) = cli(&["rank", &demo, "--reduce", "closeness", "--topsis", "corners"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.contains("closeness=")).count(), 8);
    let (code, _, err) = cli(&["rank", &demo, "--reduce", "closeness", "--topsis", "nope"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown TOPSIS configuration `nope`"));
}

fn dot_counts(dot: &str) -> (usize, usize) {
    let nodes = dot.lines().filter(|l| l.contains("[label=")).count();
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    (nodes, edges)
}

fn brute_cover_count(pts: &[Vec<u32>]) -> usize {
    let pre = |c: &Vec<u32>| -> Vec<u32> {
        c.iter()
            .scan(0, |s, &x| {
                *s += x;
                Some(*s)
            })
            .collect()
    };
    let dom = |a: &Vec<u32>, b: &Vec<u32>| a != b && pre(a).iter().zip(pre(b)).all(|(x, y)| *x >= y);
    let mut n = 0;
    for a in pts {
        for b in pts {
            if dom(a, b) && !pts.iter().any(|c| dom(a, c) && dom(c, b)) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn dot_export_of_multiset_scale() {
    let team = fixture("student-team.model.json");
    let (code, dot, _) = cli(&["poset", &team, "--scale", "p34", "--dot", "-"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph \"p34\" {"));
    let mut p34 = vec![];
    for a in 0..=4u32 {
        for b in 0..=4 - a {
            let c = vec![a, b, 4 - a - b];
            if !(c[0] > 0 && c[1] == 0 && c[2] > 0) {
                p34.push(c);
            }
        }
    }
    assert_eq!(p34.len(), 12);
    assert_eq!(dot_counts(&dot), (12, brute_cover_count(&p34)));
    assert_eq!(cli(&["poset", &team, "--scale", "p34", "--dot", "-"]).1, dot);
}

#[test]
fn dot_export_to_file_and_small_posets() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_model(&dir, "m.json", SMALL);
    let dot_path = dir.path().join("c.dot");
    let (code, out, _) = cli(&["poset", &p, "--scale", "c33", "--dot", dot_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    let mut all = vec![];
    for a in 0..=3u32 {
        for b in 0..=3 - a {
            all.push(vec![a, b, 3 - a - b]);
        }
    }
    assert_eq!(out, format!("c33\tnodes=10\tcovers={}\n", brute_cover_count(&all)));
    assert_eq!(dot_counts(&dot), (10, brute_cover_count(&all)));
    let (code, dot, _) = cli(&["poset", &p, "--scale", "o1", "--dot", "-"]);
    assert_eq!(code, 0);
    assert_eq!(dot_counts(&dot), (1, 0));
    let (code, _, err) = cli(&["poset", &p, "--scale", "o3", "--nu", "2"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "));
}

#[test]
fn monotonicity_can_be_downgraded() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("layered-tables.model.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for cell in v["tables"][0]["cells"].as_array_mut().unwrap() {
        if cell["in"] == serde_json::json!([1, 1]) {
            cell["out"] = serde_json::json!(4);
        }
    }
    let p = write_model(&dir, "bad.json", &v.to_string());
    let (code, out, _) = cli(&["tables", "check", &p]);
    assert_eq!(code, 1);
    assert!(out.lines().any(|l| l.starts_with("violation: A: ")), "{out}");
    let (code, out, _) = cli(&["tables", "check", &p, "--warn-monotone"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("warning: A: ")), "{out}");
    let (code, _, _) = cli(&["validate", &p, "--strict-monotone"]);
    assert_eq!(code, 1);
    let (code, out, _) = cli(&["evaluate", &p, "--composition", "highlighted", "--warn-monotone"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("warning: tables/A: "), "{out}");
    let (code, _, _) = cli(&["validate", &p, "--strict-monotone", "--warn-monotone"]);
    assert_eq!(code, 2);
}
