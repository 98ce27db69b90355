use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).to_string_lossy().into_owned()
}

fn pkahler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pkahler")).args(args).env_remove("PKAHLER_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_and_print() {
    let o = pkahler(&["validate", "iwasawa"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "pkahler-report/1");
    assert_eq!(v["result"]["validation"]["holomorphically_parallelizable"], true);

    let o = pkahler(&["validate", &fixture("bad_02.spec")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bar1^bar2"));

    let printed = stdout(&pkahler(&["print", "eta_beta 3"]));
    let dir = tempdir();
    let path = dir.join("eb7.spec");
    std::fs::write(&path, &printed).unwrap();
    assert_eq!(stdout(&pkahler(&["print", path.to_str().unwrap()])), printed);

    let from_file = stdout(&pkahler(&["print", &fixture("efv8.spec")]));
    assert_eq!(from_file, stdout(&pkahler(&["print", "efv8"])));
}

fn tempdir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("pkahler-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn exit_codes_follow_the_verdict() {
    assert_eq!(pkahler(&["classify", "efv8", "--p", "1", "--class", "PL"]).status.code(), Some(0));
    assert_eq!(pkahler(&["classify", "efv8", "--p", "2", "--class", "PL"]).status.code(), Some(1));
    assert_eq!(pkahler(&["classify", "efv8", "--p", "7", "--class", "PL"]).status.code(), Some(2));
    assert_eq!(pkahler(&["classify", "klein"]).status.code(), Some(2));
    assert_eq!(pkahler(&["classify", "efv8", "--p", "1"]).status.code(), Some(2));
    // No rounds at all leaves cells open.
    assert_eq!(pkahler(&["classify", "eta_beta 2", "--p", "3", "--class", "K", "--rounds", "0"]).status.code(), Some(3));
}

#[test]
fn reports_are_deterministic_and_verifiable() {
    let dir = tempdir();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for p in [&a, &b] {
        let o = pkahler(&["classify", "i3_1", "--seed", "7", "-o", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = pkahler(&["verify", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("checked 8 cells"));

    let text = std::fs::read_to_string(&a).unwrap().replacen("\"boundary\"", "\"boundary-component\"", 1);
    let c = dir.join("c.json");
    std::fs::write(&c, text).unwrap();
    assert_eq!(pkahler(&["verify", c.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn seed_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_pkahler")).args(["classify", "iwasawa", "--p", "2", "--class", "K"]).env("PKAHLER_SEED", "1234").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seeds"]["base"], 1234);
    let o = pkahler(&["classify", "iwasawa", "--p", "2", "--class", "K"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seeds"]["base"], 42);
}

#[test]
fn product_constructions() {
    let o = pkahler(&["product", "i3_1", "eta_beta 2", "--j", "6", "--class", "PL"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cell = &v["result"]["table"]["cells"][0];
    assert_eq!(cell["label"], "6PL");
    assert!(cell["witness"]["min_value"].as_f64().unwrap() > 1e-6);

    let o = pkahler(&["product", "torus 1", "iwasawa", "--j", "3", "--class", "K"]);
    assert_eq!(o.status.code(), Some(0));

    let o = pkahler(&["product", "i3_1", "eta_beta 2", "--j", "4", "--class", "PL"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("below the admissible bound"));
}

#[test]
fn invert_balanced_fixtures() {
    let cases = [("invert_lambda_123.form", vec![1.0, 2.0, 3.0]), ("invert_identity.form", vec![1.0, 1.0, 1.0])];
    for (name, want) in cases {
        let o = pkahler(&["invert-balanced", &fixture(name)]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let got: Vec<f64> = v["result"]["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{name}: {got:?}");
        }
    }
    let o = pkahler(&["invert-balanced", &fixture("invert_diagonal_5.form")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["result"]["residual"].as_f64().unwrap() <= 1e-8);
}
