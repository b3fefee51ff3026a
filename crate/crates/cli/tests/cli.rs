use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cycsplit")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn envelope_fields() {
    let out = run(&["phi", "--n", "3", "--u", "19", "--v", "18"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "phi");
    assert_eq!(v["inputs"]["u"], 19);
    assert_eq!(v["results"]["value"], "1027");
    assert_eq!(v["results"]["factors"][0]["prime"], "13");
    assert_eq!(v["results"]["factors"][1]["prime"], "79");
    assert!(v["timing"].is_null());
    assert!(v.get("error").is_none());

    let timed = json(&run(&["phi", "--n", "3", "--u", "19", "--v", "18", "--timing"]));
    assert!(timed["timing"]["elapsed_ms"].is_number());
}

#[test]
fn exit_codes() {
    // usage: missing flag, bad policy, malformed element
    assert_eq!(run(&["phi", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let out = run(&["verify", "--case", "c4", "--p", "5", "--u", "7", "--v", "10", "--q", "11", "--policy", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["symbol", "--p", "3", "--q", "13", "--u", "19", "--v", "18", "--elem", "1+/"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "Parse");

    // preconditions
    let out = run(&["lemma", "--p", "5", "--u", "1", "--v", "31", "--q", "13"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert!(v["results"].is_null());
    assert_eq!(v["error"]["kind"], "WrongDivisor");
    assert_eq!(run(&["context", "--p", "5", "--q", "7", "--u", "7", "--v", "1"]).status.code(), Some(3));
    assert_eq!(run(&["regular", "--p", "103"]).status.code(), Some(3));
    assert_eq!(run(&["regular", "--p", "103", "--p-max", "200"]).status.code(), Some(0));
}

#[test]
fn negative_arguments_and_csv() {
    let out = run(&["symbol", "--p", "5", "--q", "11", "--u", "-2", "--v", "3", "--elem", "-1-xi*zeta", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q_index,zeta,mu"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn config_and_policy_files() {
    let dir = std::env::temp_dir().join(format!("cycsplit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bounds.conf");
    std::fs::File::create(&cfg).unwrap().write_all(b"q_max = 200\np_max = 7\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = json(&run(&["scan-p3", "--config", cfg]));
    assert_eq!(v["results"]["qmax"], 200);
    assert_eq!(v["inputs"]["bounds"]["q_max"], 200);
    assert_eq!(v["results"]["all_split"], true);
    assert_eq!(run(&["context", "--p", "11", "--q", "23", "--u", "1", "--v", "2", "--config", cfg]).status.code(), Some(3));

    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "qmax = 3\n").unwrap();
    assert_eq!(run(&["scan-p3", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    // every prime declared non-principal: no witness can be reported
    let table = dir.join("principal.txt");
    let lines: String = (3..=200u64).filter(|&q| cycsplit::arith::is_prime(q)).map(|q| format!("{q} 0\n")).collect();
    std::fs::write(&table, lines).unwrap();
    let policy = format!("table:{}", table.display());
    let v = json(&run(&["witness", "--kind", "cj2", "--p", "5", "--u", "7", "--v", "10", "--qmax", "200", "--policy", &policy]));
    assert_eq!(v["results"]["found"], false);
    assert!(v["results"]["primes_skipped"].as_array().unwrap().len() > 40);
    std::fs::remove_dir_all(&dir).ok();
}
