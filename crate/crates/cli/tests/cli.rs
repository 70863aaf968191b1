use std::io::Write;
use std::process::{Command, Output, Stdio};

fn tropilift(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tropilift"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    let o = tropilift(&["fixtures", "--name", name], None);
    assert!(o.status.success(), "{}", stderr(&o));
    stdout(&o)
}

#[test]
fn vanishing_hurwitz_number() {
    let o = tropilift(&["hurwitz", "--gs", "0", "--gt", "0", "--d", "4", "--mu", "2,2", "--mu", "2,2", "--mu", "3,1"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn hurwitz_json_value() {
    let o = tropilift(&["hurwitz", "--gs", "1", "--gt", "0", "--d", "3", "--mu", "3", "--mu", "3", "--mu", "3", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], "1/3");
    assert_eq!(v["R"], 0);
}

#[test]
fn refusals_exit_with_two() {
    let negative = tropilift(&["hurwitz", "--gs", "0", "--gt", "0", "--d", "2", "--mu", "2", "--mu", "2", "--mu", "2"], None);
    assert_eq!(negative.status.code(), Some(2), "{}", stderr(&negative));
    assert!(stderr(&negative).contains("negative ramification"));
    let wild = tropilift(&["liftable", "--char", "2"], Some(&fixture("STARMAP")));
    assert_eq!(wild.status.code(), Some(2));
}

#[test]
fn star_map_is_obstructed() {
    let o = tropilift(&["liftable", "--char", "0"], Some(&fixture("STARMAP")));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("false"));
    assert!(text.contains("obstructed at p"));
    let relaxed = tropilift(&["liftable", "--relax-genus", "3", "--format", "json"], Some(&fixture("STARMAP")));
    let v: serde_json::Value = serde_json::from_slice(&relaxed.stdout).unwrap();
    assert_eq!(v["liftable"], false);
    assert!(v["relaxed_genus"]["p"].as_u64().unwrap() >= 1);
}

#[test]
fn ribet_pushforward_not_surjective() {
    let o = tropilift(&["jacobian", "--fixture", "RIBET", "--check", "surjective"], None);
    assert_eq!(stdout(&o).trim(), "false");
    let adj = tropilift(&["jacobian", "--fixture", "RIBET", "--check", "adjoint", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&adj.stdout).unwrap();
    assert_eq!(v["pairs"], 32);
}

#[test]
fn jacobian_of_graph() {
    let o = tropilift(&["jacobian", "--fixture", "BANANA(1,1,1,1)", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["order"], "4");
    assert_eq!(v["spanning_trees"], "4");
}

#[test]
fn validation_errors_carry_paths() {
    let bad = r#"{"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "ends": ["a", "zz"], "length": "1/1"}]}"#;
    let o = tropilift(&["genus"], Some(bad));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/edges/0/ends/1"), "{}", stderr(&o));
    let zero = r#"{"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "ends": ["a", "b"], "length": "0/1"}]}"#;
    assert_eq!(tropilift(&["genus"], Some(zero)).status.code(), Some(1));
    let not_json = tropilift(&["genus"], Some("{"));
    assert_eq!(not_json.status.code(), Some(1));
}

#[test]
fn check_morphism_reports_diagnostics() {
    let tate = fixture("TATE2ISOGENY");
    let ok = tropilift(&["check-morphism"], Some(&tate));
    assert!(stdout(&ok).contains("degree: 2"));
    let broken = tate.replace("\"1/2\"", "\"1/3\"");
    let o = tropilift(&["check-morphism", "--format", "json"], Some(&broken));
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["diagnostics"][0]["kind"], "length mismatch");
}

#[test]
fn fixtures_round_trip_through_the_cli() {
    for name in ["CIRCLE", "BANANA", "HYPER_FAMILY"] {
        let o = tropilift(&["genus"], Some(&fixture(name)));
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
    for name in ["STARMAP", "TATE2ISOGENY", "RIBET"] {
        let o = tropilift(&["ramification"], Some(&fixture(name)));
        assert!(stdout(&o).contains("riemann-hurwitz: true"), "{name}");
    }
}

#[test]
fn json_output_is_deterministic() {
    let a = tropilift(&["liftable", "--format", "json"], Some(&fixture("STARMAP")));
    let b = tropilift(&["liftable", "--format", "json"], Some(&fixture("STARMAP")));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fixture("RIBET"), fixture("RIBET"));
}

#[test]
fn separate_graph_and_morphism_files() {
    let dir = std::env::temp_dir().join(format!("tropilift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bundle: serde_json::Value = serde_json::from_str(&fixture("RIBET")).unwrap();
    for part in ["source", "target", "morphism"] {
        std::fs::write(dir.join(format!("{part}.json")), bundle[part].to_string()).unwrap();
    }
    let p = |f: &str| dir.join(f).to_string_lossy().into_owned();
    let o = tropilift(
        &["check-morphism", "--graphs", &p("source.json"), &p("target.json"), "--morphism", &p("morphism.json")],
        None,
    );
    assert!(stdout(&o).contains("degree: 2"), "{}", stderr(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gluing_count_for_the_isogeny() {
    let o = tropilift(&["gluing-count", "--fixture", "TATE2ISOGENY"], None);
    let text = stdout(&o);
    assert!(text.contains("gluing data: 4") && text.contains("lift classes: 2") && text.contains("automorphisms per lift: 2"));
    let dir = std::env::temp_dir().join(format!("tropilift-gluing-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data = dir.join("rho.json");
    std::fs::write(&data, r#"{"factors": [{"vertex": "u0", "order": 2}, {"vertex": "u1", "order": 2}], "rho": [[1, 0], [0, 1]]}"#).unwrap();
    let o = tropilift(&["gluing-count", "--gluing", data.to_str().unwrap(), "--format", "json"], Some(&fixture("TATE2ISOGENY")));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lift_classes"], "1");
    assert_eq!(v["automorphisms"], "1");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn hyperelliptic_family() {
    let o = tropilift(&["hyperelliptic", "--fixture", "HYPER_FAMILY(3,0)", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["hyperelliptic"], true);
    assert_eq!(v["liftable"], false);
    let o = tropilift(&["hyperelliptic", "--fixture", "HYPER_FAMILY(3,1)", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["liftable"], true);
}

#[test]
fn gonality_and_dot() {
    let o = tropilift(&["gonality", "--fixture", "BANANA(1,2,3)"], None);
    assert_eq!(stdout(&o).trim(), "2");
    let dot = tropilift(&["gonality", "--fixture", "CIRCLE(3)", "--format", "dot"], None);
    assert!(stdout(&dot).contains("d=1") || stdout(&dot).contains("d=2"));
    let tate = tropilift(&["check-morphism", "--format", "dot"], Some(&fixture("TATE2ISOGENY")));
    assert!(stdout(&tate).contains("ℓ=1/2, d=2"));
}

#[test]
fn rank_and_canonical() {
    let o = tropilift(&["rank", "--fixture", "CIRCLE(3)", "--divisor", r#"[{"at": {"vertex": "c0"}, "coeff": 2}]"#], None);
    assert_eq!(stdout(&o).trim(), "1");
    let k = tropilift(&["canonical", "--fixture", "BANANA(1,1,1)", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&k.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    let bad = tropilift(&["rank", "--fixture", "CIRCLE(3)", "--divisor", r#"[{"at": {"vertex": "nope"}, "coeff": 1}]"#], None);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("divisor/0/at/vertex"));
}
