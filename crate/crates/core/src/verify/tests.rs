use super::*;
use crate::compile::compile_scm;
use crate::machine::library::*;
use crate::model::{Capacity, InServiceEntry, InitialCondition};
use crate::rational::rat;
use crate::sim::{Observation, ProbeSchedule};

#[test]
fn library_machines_track_their_oracles() {
    for m in [incrementer(), oscillator(), copier(), idle()] {
        for norm in [false, true] {
            let r = verify_theorem4(&m, 15, norm).unwrap();
            assert!(r.passed(), "{:?} {:?}", r.first_mismatch, r.violations.first());
            assert_eq!(r.reports.len(), 16);
        }
    }
}

#[test]
fn incrementer_statuses() {
    let r = verify_theorem4(&incrementer(), 10, false).unwrap();
    for (t, s) in r.reports.iter().enumerate() {
        assert_eq!((s.status_mn, s.status_sn1, s.status_sn2), (1, t as i64, 0));
    }
}

#[test]
fn oscillator_first_cycles() {
    let r = verify_theorem4(&oscillator(), 3, false).unwrap();
    let mn: Vec<i64> = r.reports.iter().map(|s| s.status_mn).collect();
    let sn1: Vec<i64> = r.reports.iter().map(|s| s.status_sn1).collect();
    assert_eq!(mn, [1, 2, 1, 2]);
    assert_eq!(sn1, [0, 1, 0, 1]);
}

#[test]
fn oracle_errors_carry_the_cycle() {
    let m = Scm {
        beta: vec![crate::machine::Delta::DEC2],
        ..incrementer()
    };
    match verify_theorem4(&m, 5, false) {
        Err(VerifyError::Oracle { cycle, .. }) => assert_eq!(cycle, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn status_sn_reads_half_unit_of_work() {
    // token in 02_1 and one i12 job half done
    let mut cn = compile_scm(&incrementer()).unwrap();
    cn.doc.initial = InitialCondition {
        queued: Default::default(),
        in_service: vec![
            InServiceEntry {
                class: "02_1".into(),
                remaining: rat(271, 100),
            },
            InServiceEntry {
                class: "112".into(),
                remaining: rat(1, 2),
            },
        ],
    };
    let net = Arc::new(cn.doc.spec.clone().validate().unwrap());
    let layout = Layout::new(&cn, &net);
    let s = SimState::new(net, &cn.doc.initial).unwrap();
    assert_eq!(status_sn(&layout, &s, &s, 1), 1);
    assert_eq!(status_sn(&layout, &s, &s, 2), 0);
    // the token started service at 0
    assert_eq!(status_mn(&layout, &s, 0), 1);
    assert_eq!(status_mn(&layout, &s, 1), -1);
}

#[test]
fn broken_i42_capacity_shows_up_as_counter_drift() {
    let scm = oscillator();
    let mut cn = compile_scm(&scm).unwrap();
    for i in ["142", "242"] {
        cn.doc.spec.class_mut(&i.into()).unwrap().capacity = Capacity::Finite(1);
    }
    let r = verify_compiled(&scm, &cn, 12, VerifyOptions::default()).unwrap();
    assert!(r.violations.iter().any(|v| v.lemma == Lemma::L10));
    assert!(!r.passed());
}

#[test]
fn boundedness_of_small_machines() {
    let b = verify_boundedness(&verify_theorem4(&oscillator(), 12, false).unwrap());
    assert_eq!(b.max_counter, 1);
    assert!(b.start_bound_holds && !b.growing);

    let r = verify_theorem4(&incrementer(), 12, false).unwrap();
    let starts: Vec<u64> = r.occupancy.iter().map(|s| s.jobs_at_start).collect();
    assert_eq!(starts, (1..=13).collect::<Vec<_>>());
    assert!(verify_boundedness(&r).growing);

    let r = verify_theorem4(&idle(), 12, true).unwrap();
    assert!(r.occupancy.iter().all(|s| s.jobs_at_start == 1));
}

#[test]
fn in_cycle_excess_does_not_depend_on_the_peak() {
    let c: Vec<u64> = [1, 3]
        .iter()
        .map(|&top| {
            let r = verify_theorem4(&up_down(top, 6), 4 * top as u64 + 3, false).unwrap();
            assert!(r.passed());
            verify_boundedness(&r).intra_cycle_constant
        })
        .collect();
    assert_eq!(c[0], c[1]);
}

#[test]
fn reversing_server_order_changes_nothing() {
    let scm = copier();
    for norm in [false, true] {
        let mut cn = compile_scm(&scm).unwrap();
        if norm {
            cn = normalize_loads(&cn).unwrap();
        }
        let a = verify_compiled(&scm, &cn, 8, VerifyOptions::default()).unwrap();
        let mut flipped = cn.clone();
        flipped.doc = reverse_servers(&cn.doc);
        let b = verify_compiled(&scm, &flipped, 8, VerifyOptions::default()).unwrap();
        assert_eq!(a.reports, b.reports);
        assert!(b.passed());
    }
}

#[test]
fn load_audit_flags() {
    // 2 increments of counter 1 => l1 = 2 on the unnormalized net: all loads fine
    let cn = compile_scm(&up_down(2, 4)).unwrap();
    let net = cn.doc.spec.clone().validate().unwrap();
    let a = audit_loads(&net);
    assert_eq!(a[&"S12".into()].load, rat(5, 6));

    let cn = compile_scm(&up_down(3, 6)).unwrap();
    let net = cn.doc.spec.clone().validate().unwrap();
    let a = audit_loads(&net);
    assert_eq!(a[&"S12".into()].load, Rational::ONE);
    assert!(!a[&"S12".into()].below_one);

    let net = normalize_loads(&cn).unwrap().doc.spec.validate().unwrap();
    assert!(audit_loads(&net).values().all(|x| x.below_one));
}

#[test]
fn crossing_network_swings() {
    assert!(rs_periodicity(0, 10).unwrap().passed);
    // constant total for m >= 2, but the backlog reaching i12 by m is one short
    for m in [4, 8] {
        let r = rs_periodicity(m, 20 * m).unwrap();
        assert!(r.off_count.is_empty());
        assert_eq!(r.i12_at_m, m - 1);
        assert!(!r.passed);
    }
}

#[test]
fn crossing_network_never_fills_both_long_classes() {
    let doc = rs_network(5);
    let net = Arc::new(doc.spec.clone().validate().unwrap());
    let (i12, i21) = (net.class_idx(&"i12".into()).unwrap(), net.class_idx(&"i21".into()).unwrap());
    let mut sim = SimState::new(net, &doc.initial).unwrap();
    let mut ok = true;
    let mut obs = |o: &Observation<'_>| ok &= o.post.class_count(i12) * o.post.class_count(i21) == 0;
    sim.run_until(Rational::from(60u64), &ProbeSchedule::None, &mut obs).unwrap();
    assert!(ok);
}


#[test]
fn long_lockstep_runs() {
    let r = verify_theorem4(&incrementer(), 50, false).unwrap();
    assert!(r.passed());
    assert_eq!(r.reports[50].status_sn1, 50);
    let r = verify_theorem4(&oscillator(), 200, false).unwrap();
    assert!(r.passed());
    assert!(r.reports.iter().all(|s| s.status_sn1 == (s.cycle % 2) as i64));
    assert!(verify_theorem4(&copier(), 100, false).unwrap().passed());
}

#[test]
fn stray_main_network_job_spoils_the_token() {
    let cn = compile_scm(&oscillator()).unwrap();
    let mut doc = cn.doc.clone();
    doc.initial.queued.insert("012".into(), 1);
    let net = Arc::new(doc.spec.clone().validate().unwrap());
    let layout = Layout::new(&cn, &net);
    let clean = SimState::new(net.clone(), &cn.doc.initial).unwrap();
    let dirty = SimState::new(net, &doc.initial).unwrap();
    assert_eq!(status_mn(&layout, &clean, 0), 1);
    assert_eq!(status_mn(&layout, &dirty, 0), -1);
}

#[test]
fn job_in_i31_spoils_the_counter() {
    let cn = compile_scm(&oscillator()).unwrap();
    let mut doc = cn.doc.clone();
    doc.initial.queued.insert("131".into(), 1);
    let net = Arc::new(doc.spec.clone().validate().unwrap());
    let layout = Layout::new(&cn, &net);
    let s = SimState::new(net, &doc.initial).unwrap();
    assert_eq!(status_sn(&layout, &s, &s, 1), -1);
    assert_eq!(status_sn(&layout, &s, &s, 2), 0);
}
