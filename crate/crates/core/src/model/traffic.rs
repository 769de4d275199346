use std::collections::BTreeMap;

use super::{Network, ServerId};
use crate::rational::Rational;

/// Effective arrival rates solving `rate = external + R^T rate`, indexed by
/// class. Routing is a 0-1 forest, so one pass in topological order is exact.
pub fn solve_traffic(net: &Network) -> Vec<Rational> {
    let mut rates: Vec<Rational> = (0..net.num_classes())
        .map(|c| {
            net.class(c)
                .arrival
                .as_ref()
                .map_or(Rational::ZERO, |a| a.rate())
        })
        .collect();
    for &c in net.topological_order() {
        if let Some(n) = net.next_of(c) {
            let inflow = rates[c];
            rates[n] += inflow;
        }
    }
    rates
}

/// Nominal load `sum(rate_i * service_i)` per server, ignoring drops.
pub fn load_factors(net: &Network) -> BTreeMap<ServerId, Rational> {
    let rates = solve_traffic(net);
    net.servers()
        .iter()
        .map(|s| {
            let rho = s
                .classes
                .iter()
                .map(|&c| rates[c] * net.service(c))
                .sum();
            (s.id.clone(), rho)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrivalProcess, Capacity, ClassId, ClassSpec, NetworkSpec};
    use crate::rational::rat;
    use proptest::prelude::*;

    fn class(id: &str, server: &str, next: Option<&str>, svc: Rational, rate: Option<Rational>) -> ClassSpec {
        ClassSpec {
            id: id.into(),
            server: server.into(),
            service: svc,
            capacity: Capacity::Infinite,
            next: next.map(ClassId::from),
            priority: 1,
            arrival: rate.map(|r| ArrivalProcess::periodic(r.recip(), Rational::ZERO, 0)),
        }
    }

    fn net(classes: Vec<ClassSpec>) -> Network {
        NetworkSpec {
            name: "t".into(),
            classes,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn no_routing_keeps_external_rates() {
        let n = net(vec![
            class("1", "A", None, rat(1, 4), Some(rat(1, 1))),
            class("2", "A", None, rat(1, 4), Some(rat(2, 1))),
        ]);
        assert_eq!(solve_traffic(&n), vec![rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn chain_conserves_flow() {
        let n = net(vec![
            class("3", "C", None, rat(1, 1), None),
            class("1", "A", Some("2"), rat(1, 1), Some(rat(1, 3))),
            class("2", "B", Some("3"), rat(1, 1), None),
        ]);
        assert_eq!(solve_traffic(&n), vec![rat(1, 3); 3]);
    }

    #[test]
    fn single_queue_load() {
        let n = net(vec![class("1", "A", None, rat(1, 2), Some(rat(1, 1)))]);
        assert_eq!(load_factors(&n)[&ServerId::from("A")], rat(1, 2));
    }

    /// Random forests: class i may route to any class with a larger index.
    fn arb_forest() -> impl Strategy<Value = Vec<ClassSpec>> {
        (1usize..12).prop_flat_map(|n| {
            let nexts = (0..n)
                .map(|i| {
                    if i + 1 < n {
                        prop::option::of(i + 1..n).boxed()
                    } else {
                        Just(None).boxed()
                    }
                })
                .collect::<Vec<_>>();
            let rates = prop::collection::vec(prop::option::of(1i128..5), n);
            let svcs = prop::collection::vec(0i128..10, n);
            let servers = prop::collection::vec(0usize..4, n);
            (nexts, rates, svcs, servers).prop_map(move |(nexts, rates, svcs, servers)| {
                (0..n)
                    .map(|i| {
                        let next = nexts[i].map(|j| format!("c{j}"));
                        class(
                            &format!("c{i}"),
                            &format!("S{}", servers[i]),
                            next.as_deref(),
                            rat(svcs[i], 10),
                            rates[i].map(|r| rat(1, r)),
                        )
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn propagation_matches_repeated_substitution(classes in arb_forest()) {
            let n = net(classes);
            let k = n.num_classes();
            let ext: Vec<Rational> = (0..k)
                .map(|c| n.class(c).arrival.as_ref().map_or(Rational::ZERO, |a| a.rate()))
                .collect();
            // rate <- ext + R^T rate, iterated k times from zero
            let mut rate = vec![Rational::ZERO; k];
            for _ in 0..=k {
                let mut nxt = ext.clone();
                for (c, &r) in rate.iter().enumerate() {
                    if let Some(j) = n.next_of(c) {
                        nxt[j] += r;
                    }
                }
                rate = nxt;
            }
            prop_assert_eq!(solve_traffic(&n), rate);
        }

        #[test]
        fn load_is_homogeneous_in_service_time(classes in arb_forest()) {
            let n = net(classes.clone());
            let doubled = net(classes.into_iter().map(|mut c| { c.service = c.service * rat(2, 1); c }).collect());
            let a = load_factors(&n);
            let b = load_factors(&doubled);
            for (s, rho) in &a {
                prop_assert_eq!(b[s], *rho * rat(2, 1));
            }
        }
    }
}
