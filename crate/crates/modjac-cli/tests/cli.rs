//! End-to-end tests of the command-line interface: JSON output parses and
//! round-trips, certificates deserialize into their typed forms, and exit
//! codes signal verification failures.

use std::process::Command;

fn modjac_cmd(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_modjac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> serde_json::Value {
    let out = modjac_cmd(args);
    assert!(
        out.status.success(),
        "command failed: {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn space_json_round_trips() {
    let v = json_of(&["space", "--level", "65", "--format", "json"]);
    assert_eq!(v["ambient_dim"], 13);
    assert_eq!(v["cuspidal_dim"], 10);
    assert_eq!(v["genus"], 5);
    // round trip: emit and parse again
    let text = serde_json::to_string(&v).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v, back);
}

#[test]
fn hecke_disc_json() {
    let v = json_of(&["hecke", "--level", "65", "--format", "json", "disc"]);
    assert_eq!(v["disc"], "6144");
    assert_eq!(v["disc_factored"], "2^11 * 3");
    assert_eq!(v["index_in_normalization"], "8");
}

#[test]
fn hecke_expand_json() {
    let v = json_of(&["hecke", "--level", "65", "--format", "json", "expand", "7"]);
    let coeffs: Vec<String> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect();
    assert_eq!(coeffs, vec!["2", "-1", "-6", "9", "-5"]);
}

#[test]
fn jcount_json() {
    let v = json_of(&[
        "jcount", "--level", "65", "--prime", "3", "--format", "json",
    ]);
    assert_eq!(v["count"], "504");
    assert_eq!(v["count_factored"], "2^3 * 3^2 * 7");
}

#[test]
fn classify_certificate_deserializes() {
    let v = json_of(&["classify", "--level", "65", "--format", "json"]);
    let cert: modjac::classify::ClassificationCertificate =
        serde_json::from_value(v.clone()).expect("typed certificate");
    assert_eq!(cert.level, 65);
    assert_eq!(cert.survivors.len(), 1);
    assert_eq!(cert.survivors[0].name(), "C7");
    // typed round trip
    let again = serde_json::to_value(&cert).unwrap();
    assert_eq!(v, again);
}

#[test]
fn classify_reads_constants_files() {
    let root = env!("CARGO_MANIFEST_DIR");
    for (level, expected) in [("35", "0"), ("39", "C7")] {
        let path = format!("{root}/../../configs/level{level}.json");
        let v = json_of(&[
            "classify",
            "--level",
            level,
            "--constants",
            &path,
            "--format",
            "json",
        ]);
        let survivors = v["survivors"].as_array().unwrap();
        assert_eq!(survivors.len(), 1, "level {level}");
        let cert: modjac::classify::ClassificationCertificate = serde_json::from_value(v).unwrap();
        assert_eq!(cert.survivors[0].name(), expected);
    }
}

#[test]
fn components_json() {
    let v = json_of(&[
        "components",
        "--level",
        "65",
        "--prime",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(v["component_group"], "Z/42");
    let orders = v["reduction_orders"].as_array().unwrap();
    assert!(orders
        .iter()
        .any(|o| o["cusp_difference"] == "[1]-[5]" && o["order"] == "14"));
    assert_eq!(v["cokernel"], "Z/3");
}

#[test]
fn errors_exit_nonzero() {
    let out = modjac_cmd(&["space", "--level", "12"]);
    assert_eq!(out.status.code(), Some(2));
    let out = modjac_cmd(&["jcount", "--level", "65", "--prime", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = modjac_cmd(&["components", "--level", "65", "--prime", "7"]);
    assert_eq!(out.status.code(), Some(2));
    // constants file for the wrong level
    let root = env!("CARGO_MANIFEST_DIR");
    let path = format!("{root}/../../configs/level35.json");
    let out = modjac_cmd(&["classify", "--level", "65", "--constants", &path]);
    assert_eq!(out.status.code(), Some(2));
}
