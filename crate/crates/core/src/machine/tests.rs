use proptest::prelude::*;

use super::library::*;
use super::*;

fn two_state_cm() -> CounterMachine {
    // s --(1,0)--> t for every flag pattern; t stays put
    CounterMachine {
        states: vec!["s".into(), "t".into()],
        gamma: vec![[(1, Delta::INC1); 4], [(1, Delta::NONE); 4]],
        initial: 0,
        halting: Config::new(1, 1, 0),
    }
}

#[test]
fn cm_step_applies_gamma() {
    let cm = two_state_cm();
    assert_eq!(cm_step(&cm, &Config::new(0, 2, 0)).unwrap(), Config::new(1, 3, 0));
    assert_eq!(cm_step(&cm, &Config::new(1, 4, 7)).unwrap(), Config::new(1, 4, 7));
}

#[test]
fn decrementing_zero_is_an_error() {
    let cm = CounterMachine {
        states: vec!["s".into()],
        gamma: vec![[(0, Delta::DEC1); 4]],
        initial: 0,
        halting: Config::new(0, 9, 9),
    };
    assert!(matches!(
        cm_step(&cm, &Config::new(0, 0, 0)),
        Err(MachineError::NegativeCounter { .. })
    ));
}

#[test]
fn scm_examples() {
    let inc = incrementer();
    assert_eq!(scm_step(&inc, &inc.start()).unwrap(), Config::new(0, 1, 0));

    let osc = oscillator();
    let c1 = scm_step(&osc, &osc.start()).unwrap();
    assert_eq!(c1, Config::new(1, 1, 0));
    assert_eq!(scm_step(&osc, &c1).unwrap(), Config::new(0, 0, 0));

    let bump2 = Scm {
        states: vec!["s".into(), "t".into()],
        alpha: vec![[1; 4], [1; 4]],
        beta: vec![Delta::NONE, Delta::INC2],
        initial: 0,
    };
    assert_eq!(scm_step(&bump2, &Config::new(0, 4, 7)).unwrap(), Config::new(1, 4, 8));
}

#[test]
fn halting_detected_after_first_step() {
    let cm = two_state_cm();
    let run = cm_run(&cm, Config::new(0, 0, 0), 10);
    assert_eq!(run.outcome, Outcome::Halted);
    assert_eq!(run.trajectory.len(), 2);
}

#[test]
fn incrementer_runs_out_of_budget() {
    let inc = incrementer();
    let run = scm_run(&inc, inc.start(), 100);
    assert_eq!(run.outcome, Outcome::Running);
    assert_eq!(run.trajectory.len(), 101);
    assert_eq!(run.final_config().z1, 100);
}

#[test]
fn two_state_cm_gives_twenty_scm_states() {
    let scm = cm_to_scm(&two_state_cm());
    assert_eq!(scm.num_states(), 20);
    assert_eq!(scm.states[0], "s.odd");
    assert_eq!(scm.beta[0], Delta::NONE);
}

#[test]
fn probes() {
    let osc = oscillator();
    let p = bounded_probe(&osc, osc.start(), 1000, None).unwrap();
    assert_eq!((p.max_z1, p.max_z2, p.halted), (1, 0, false));

    let inc = incrementer();
    let p = bounded_probe(&inc, inc.start(), 37, None).unwrap();
    assert_eq!((p.max_z1, p.max_z2), (37, 0));

    let still = idle();
    let p = bounded_probe(&still, Config::new(0, 3, 5), 50, None).unwrap();
    assert_eq!((p.max_z1, p.max_z2), (3, 5));
}

#[test]
fn partial_alpha_is_rejected() {
    let text = r#"{"states": ["a"], "alpha": [
        {"state": "a", "b1": 0, "b2": 0, "next": "a"},
        {"state": "a", "b1": 0, "b2": 1, "next": "a"},
        {"state": "a", "b1": 1, "b2": 0, "next": "a"}],
        "beta": [{"state": "a", "delta": [1, 0]}], "initial": "a"}"#;
    assert_eq!(
        parse_scm(text).unwrap_err(),
        MachineError::Partial {
            state: "a".into(),
            b1: 1,
            b2: 1
        }
    );
}

#[test]
fn bad_delta_and_unknown_state() {
    let text = r#"{"states": ["a"], "alpha": [], "beta": [{"state": "a", "delta": [2, 0]}], "initial": "a"}"#;
    assert!(matches!(parse_scm(text), Err(MachineError::Parse { .. })));
    let text = r#"{"states": ["a"], "alpha": [], "beta": [], "initial": "b"}"#;
    assert!(matches!(parse_scm(text), Err(MachineError::Partial { .. })));
}

#[test]
fn cm_rejects_nonstandard_delta() {
    let cm = two_state_cm();
    let text = serialize_cm(&cm).replacen("\n        1,\n        0\n", "\n        1,\n        1\n", 1);
    assert!(matches!(parse_cm(&text), Err(MachineError::NonStandardDelta { .. })));
}

#[test]
fn files_round_trip() {
    for m in [incrementer(), oscillator(), copier(), idle(), up_down(3, 8)] {
        assert_eq!(parse_scm(&serialize_scm(&m)).unwrap(), m);
    }
    let cm = two_state_cm();
    assert_eq!(parse_cm(&serialize_cm(&cm)).unwrap(), cm);
}

/// Random CMs that never decrement a zero counter.
pub(crate) fn arb_cm() -> impl Strategy<Value = CounterMachine> {
    (1usize..5).prop_flat_map(|m| {
        let row = |flags: usize| {
            let allowed: Vec<Delta> = Delta::STANDARD
                .iter()
                .copied()
                .filter(|d| !(flags < 2 && d.d1() < 0) && !(flags.is_multiple_of(2) && d.d2() < 0))
                .collect();
            (0..m, prop::sample::select(allowed))
        };
        let state = [row(0), row(1), row(2), row(3)];
        (
            prop::collection::vec(state, m),
            0..m,
            (0..m, 0u64..3, 0u64..3),
        )
            .prop_map(move |(gamma, initial, (hs, h1, h2))| CounterMachine {
                states: (0..m).map(|i| format!("q{i}")).collect(),
                gamma: gamma.into_iter().map(|r| [r[0], r[1], r[2], r[3]]).collect(),
                initial,
                halting: Config::new(hs, h1, h2),
            })
    })
}

proptest! {
    #[test]
    fn scm_emulates_cm_two_steps_at_a_time(cm in arb_cm(), z1 in 0u64..3, z2 in 0u64..3, budget in 0u64..60) {
        let scm = cm_to_scm(&cm);
        let start = Config::new(cm.initial, z1, z2);
        let cm_run = cm_run(&cm, start, budget);
        prop_assert!(!matches!(cm_run.outcome, Outcome::Error(_)));
        let steps = cm_run.trajectory.len() as u64 - 1;
        let scm_traj = scm_run(&scm, start, 2 * steps).into_result().unwrap();
        for (k, c) in cm_run.trajectory.iter().enumerate() {
            // odd copies share indices with the CM states
            prop_assert_eq!(scm_traj[2 * k], *c);
        }
    }

    #[test]
    fn counters_never_negative_and_runs_repeat(cm in arb_cm(), budget in 0u64..80) {
        let a = cm_run(&cm, Config::new(cm.initial, 0, 0), budget);
        let b = cm_run(&cm, Config::new(cm.initial, 0, 0), budget);
        prop_assert_eq!(&a, &b);
        // u64 counters cannot go negative; an attempted underflow is an error instead
        prop_assert!(!matches!(a.outcome, Outcome::Error(_)));
    }
}
