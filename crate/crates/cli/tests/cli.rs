use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qnet_core::machine::library::{incrementer, oscillator};
use qnet_core::machine::{serialize_cm, serialize_scm, Config, CounterMachine, Delta, Scm};
use qnet_core::verify::rs_network;
use qnet_core::{parse_network, rat, serialize_network, ArrivalProcess, Capacity, ClassSpec, NetworkDoc, NetworkSpec, Rational};
use tempfile::TempDir;

fn qnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnet")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_writes_the_network_with_its_directory() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "osc.scm", &serialize_scm(&oscillator()));
    let net = dir.path().join("osc.net");
    let o = qnet(&["compile", s(&scm), "-o", s(&net)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = parse_network(&fs::read_to_string(&net).unwrap()).unwrap();
    assert_eq!(doc.spec.server_ids().len(), 16);
    assert_eq!(doc.directory["SN1.i12"].as_str(), "112");
}

#[test]
fn normalized_network_has_no_overloaded_server() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "osc.scm", &serialize_scm(&oscillator()));
    let net = dir.path().join("oscN.net");
    assert_eq!(code(&qnet(&["compile", s(&scm), "--normalized", "-o", s(&net)])), 0);
    let o = qnet(&["loads", s(&net)]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains(">= 1"), "{}", stdout(&o));
    assert!(stdout(&o).contains("S02_1"));
}

#[test]
fn missing_input_names_the_path() {
    let o = qnet(&["compile", "/nonexistent/x.scm", "-o", "/tmp/unused.net"]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("/nonexistent/x.scm"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&qnet(&["simulate"])), 1);
    assert_eq!(code(&qnet(&["frobnicate"])), 1);
    assert_eq!(code(&qnet(&["verify", "x.scm", "--cycles", "0"])), 1);
    assert_eq!(code(&qnet(&["compile", "a.scm", "-o", "a.scm"])), 1);
    assert_eq!(code(&qnet(&["--help"])), 0);
}

#[test]
fn verify_oscillator() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "osc.scm", &serialize_scm(&oscillator()));
    let report = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let o = qnet(&["verify", s(&scm), "--cycles", "200", "-o", s(&report), "--csv", s(&csv)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["report"]["first_mismatch"].is_null());
    assert_eq!(json["report"]["reports"].as_array().unwrap().len(), 201);
    assert_eq!(json["boundedness"]["max_counter"], 1);
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 202);
    assert_eq!(rows.lines().nth(2).unwrap(), "1,2,1,0,2,1,0,true,2,12");
}

#[test]
fn verify_incrementer_flags_growth() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "inc.scm", &serialize_scm(&incrementer()));
    let o = qnet(&["verify", s(&scm), "--cycles", "50"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("unbounded trend"), "{}", stdout(&o));
}

#[test]
fn verify_exit_codes_for_bad_machines() {
    let dir = TempDir::new().unwrap();
    let partial = r#"{"states": ["a"], "alpha": [{"state": "a", "b1": 0, "b2": 0, "next": "a"}],
        "beta": [{"state": "a", "delta": [1, 0]}], "initial": "a"}"#;
    let p = put(&dir, "partial.scm", partial);
    assert_eq!(code(&qnet(&["verify", s(&p), "--cycles", "5"])), 6);

    let p = put(&dir, "broken.scm", "{ not json");
    assert_eq!(code(&qnet(&["verify", s(&p), "--cycles", "5"])), 2);

    // decrements an empty counter on the first step
    let dec = Scm {
        beta: vec![Delta::DEC1],
        ..incrementer()
    };
    let p = put(&dir, "dec.scm", &serialize_scm(&dec));
    let o = qnet(&["verify", s(&p), "--cycles", "5"]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("negative"), "{}", stderr(&o));
}

#[test]
fn verify_job_limit() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "inc.scm", &serialize_scm(&incrementer()));
    assert_eq!(code(&qnet(&["verify", s(&scm), "--cycles", "30", "--job-limit", "20"])), 5);
}

#[test]
fn crossing_network_trace_replays_identically() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "rs.net", &serialize_network(&rs_network(3)));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(code(&qnet(&["simulate", s(&net), "--until", "20", "--trace", s(out)])), 0);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("time,time_decimal,seq,kind,class,server,job\n"));
    assert!(text.contains("1/2,0.500000,"));
}

#[test]
fn until_zero_keeps_only_time_zero() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "osc.scm", &serialize_scm(&oscillator()));
    let net = dir.path().join("osc.net");
    qnet(&["compile", s(&scm), "-o", s(&net)]);
    let trace = dir.path().join("t.csv");
    assert_eq!(code(&qnet(&["simulate", s(&net), "--until", "0", "--trace", s(&trace)])), 0);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.lines().count() > 1);
    assert!(text.lines().skip(1).all(|l| l.starts_with("0,")));
}

#[test]
fn workload_probe_draws_the_sawtooth() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "inc.scm", &serialize_scm(&incrementer()));
    let net = dir.path().join("inc.net");
    qnet(&["compile", s(&scm), "-o", s(&net)]);
    let probe = dir.path().join("p.csv");
    let o = qnet(&["simulate", s(&net), "--until", "9", "--probe", "W1:SN1.i12,SN1.i21@1/2", "--probe-out", s(&probe)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut w = std::collections::BTreeMap::new();
    for line in fs::read_to_string(&probe).unwrap().lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        w.insert(f[0].parse::<Rational>().unwrap(), f[3].parse::<Rational>().unwrap());
    }
    // counter is 2 at 7-, so W = 1; +1/2 from i22 at 7, +1/2 from i42 at 7.02,
    // draining at rate one in between
    assert_eq!(w[&rat(7, 1)], rat(3, 2));
    assert_eq!(w[&rat(702, 100)], rat(3, 2) - rat(2, 100) + rat(1, 2));
    assert_eq!(w[&rat(15, 2)], rat(3, 2));
    assert_eq!(w[&rat(8, 1)], rat(3, 2));
    assert_eq!(w[&rat(802, 100)], rat(99, 50));
}

#[test]
fn simulate_job_limit_and_unknown_probe_class() {
    let dir = TempDir::new().unwrap();
    let scm = put(&dir, "osc.scm", &serialize_scm(&oscillator()));
    let net = dir.path().join("osc.net");
    qnet(&["compile", s(&scm), "-o", s(&net)]);
    assert_eq!(code(&qnet(&["simulate", s(&net), "--until", "50", "--job-limit", "3"])), 5);
    assert_eq!(code(&qnet(&["simulate", s(&net), "--until", "5", "--probe", "W:nope@1"])), 2);
}

fn single_class(name: &str, service: Rational, period: Rational) -> NetworkDoc {
    NetworkDoc {
        spec: NetworkSpec {
            name: name.into(),
            classes: vec![ClassSpec {
                id: "a".into(),
                server: "S".into(),
                service,
                capacity: Capacity::Infinite,
                next: None,
                priority: 1,
                arrival: Some(ArrivalProcess::periodic(period, Rational::ZERO, 0)),
            }],
        },
        initial: Default::default(),
        directory: Default::default(),
    }
}

#[test]
fn loads_tables() {
    let dir = TempDir::new().unwrap();
    let toy = put(&dir, "toy.net", &serialize_network(&single_class("toy", rat(1, 3), rat(2, 1))));
    let o = qnet(&["loads", s(&toy)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("1/6"), "{}", stdout(&o));

    // three states that each increment counter 1
    let inc3 = Scm {
        states: vec!["a".into(), "b".into(), "c".into()],
        alpha: vec![[1; 4], [2; 4], [0; 4]],
        beta: vec![Delta::INC1; 3],
        initial: 0,
    };
    let scm = put(&dir, "inc3.scm", &serialize_scm(&inc3));
    let net = dir.path().join("inc3.net");
    qnet(&["compile", s(&scm), "-o", s(&net)]);
    let out = stdout(&qnet(&["loads", s(&net)]));
    let s12 = out.lines().find(|l| l.starts_with("S12 ")).unwrap();
    assert!(s12.contains(">= 1"), "{s12}");

    let bad = put(&dir, "bad.net", "{\"name\": 1}");
    assert_eq!(code(&qnet(&["loads", s(&bad)])), 2);
}

#[test]
fn cm2scm_doubles_out_the_states() {
    let dir = TempDir::new().unwrap();
    let cm = CounterMachine {
        states: vec!["s".into(), "t".into()],
        gamma: vec![[(1, Delta::INC1); 4], [(0, Delta::NONE); 4]],
        initial: 0,
        halting: Config::new(1, 5, 0),
    };
    let cm_path = put(&dir, "m.cm", &serialize_cm(&cm));
    let out = dir.path().join("m.scm");
    assert_eq!(code(&qnet(&["cm2scm", s(&cm_path), "-o", s(&out)])), 0);
    let scm = qnet_core::machine::parse_scm(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(scm.num_states(), 20);
    assert_eq!(scm.states[0], "s.odd");
}
