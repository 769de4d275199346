//! Rewrites a compiled network so that every server has nominal load
//! below one, without changing the decoded machine trajectory.
//!
//! * The increment path through `S{i}5` is replaced by a gating server
//!   `G{i}`: a job from `4_j_3` occupies it briefly, which drops a
//!   competing arrival at `3n` and lets another arrival at `3n + 1/100`
//!   pass on to `{i}11`.
//! * `{i}42` takes its arrivals on the integers with service `1/50`, so
//!   jobs still reach `{i}11` at `n + 1/50`; `{i}41` is shortened to
//!   `1/(5m)`.
//! * `S02` becomes one server per `02_j`, and every `S3_x` becomes `4m`
//!   chained stage servers that chain classes cross in `4m` equal slices.

use std::collections::BTreeMap;

use super::{mn_key, Builder, CompileError, CompiledNetwork, ZERO};
use crate::model::{ArrivalProcess, ClassId, ClassSpec, NetworkSpec};
use crate::rational::{rat, Rational};

fn stage(id: &str, s: usize) -> String {
    format!("{id}@{s}")
}

pub fn normalize_loads(cn: &CompiledNetwork) -> Result<CompiledNetwork, CompileError> {
    if cn.normalized {
        return Err(CompileError::AlreadyNormalized);
    }
    let m = cn.m();
    let stages = 4 * m;
    let spec = &cn.doc.spec;
    let by_id: BTreeMap<&ClassId, &ClassSpec> = spec.classes.iter().map(|c| (&c.id, c)).collect();
    let key_of: BTreeMap<&ClassId, &String> = cn.doc.directory.iter().map(|(k, v)| (v, k)).collect();

    // 4_j_3 classes that feed each S{i}5, in state order
    let mut gated: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for j in 1..=m {
        let c = by_id[cn.class(&mn_key("4j3", j))];
        for i in 1..=2 {
            if c.next.as_ref().map(ClassId::as_str) == Some(&format!("{i}51")) {
                gated[i - 1].push(j);
            }
        }
    }

    let mut b = Builder {
        classes: Vec::new(),
        directory: BTreeMap::new(),
    };
    let eps = rat(1, 200 * m as i128);

    for c in &spec.classes {
        let key = key_of[&c.id].clone();
        let id = c.id.as_str();
        match id {
            "151" | "251" => continue,
            "141" | "241" => {
                let mut c = c.clone();
                c.service = rat(1, 5 * m as i128);
                b.directory.insert(key, c.id.clone());
                b.classes.push(c);
                continue;
            }
            "142" | "242" => {
                let mut c = c.clone();
                c.service = rat(1, 50);
                c.arrival = Some(ArrivalProcess::periodic(Rational::ONE, Rational::ZERO, 0));
                b.directory.insert(key, c.id.clone());
                b.classes.push(c);
                continue;
            }
            _ => {}
        }
        if let Some(j) = id.strip_prefix("02_") {
            let mut c = c.clone();
            c.server = format!("S02_{j}").as_str().into();
            b.directory.insert(key, c.id.clone());
            b.classes.push(c);
        } else if id.starts_with("3_") {
            // chain classes and 3_j_5 become 4m stages on split servers
            let server = c.server.as_str().to_string();
            let per_stage = c.service / Rational::from(stages as u64);
            for s in 1..=stages {
                let next = if s < stages {
                    Some(stage(id, s + 1))
                } else {
                    c.next.as_ref().map(|n| {
                        if n.as_str().starts_with("3_") {
                            stage(n.as_str(), 1)
                        } else {
                            n.to_string()
                        }
                    })
                };
                let k = if s == 1 { key.clone() } else { format!("{key}@{s}") };
                let added = b.add(k, stage(id, s), stage(&server, s), per_stage, c.capacity, c.priority, next);
                if s == 1 {
                    added.arrival = c.arrival.clone();
                }
            }
        } else if id.starts_with("03_") {
            let mut c = c.clone();
            c.next = c.next.map(|n| ClassId(stage(n.as_str(), 1)));
            b.directory.insert(key, c.id.clone());
            b.classes.push(c);
        } else if id.starts_with("4_") && id.ends_with("_3") {
            let mut c = c.clone();
            for i in 1..=2 {
                if c.next.as_ref().map(ClassId::as_str) == Some(&format!("{i}51")) {
                    let j: usize = id[2..id.len() - 2].parse().unwrap();
                    let n = gated[i - 1].iter().position(|&g| g == j).unwrap() + 1;
                    c.next = Some(ClassId(format!("g{i}_{n}")));
                }
            }
            b.directory.insert(key, c.id.clone());
            b.classes.push(c);
        } else {
            b.directory.insert(key, c.id.clone());
            b.classes.push(c.clone());
        }
    }

    for i in 1..=2 {
        let l = gated[i - 1].len();
        let server = format!("G{i}");
        for n in 1..=l {
            b.add(format!("SN{i}.g[{n}]"), format!("g{i}_{n}"), server.clone(), eps, ZERO, n as i64, None);
        }
        b.add(format!("SN{i}.g[{}]", l + 1), format!("g{i}_{}", l + 1), server.clone(), rat(3, 100), ZERO, l as i64 + 1, None)
            .arrival = Some(ArrivalProcess::periodic(rat(3, 1), Rational::ZERO, 1));
        b.add(
            format!("SN{i}.g[{}]", l + 2),
            format!("g{i}_{}", l + 2),
            server,
            rat(1, 100),
            ZERO,
            l as i64 + 2,
            Some(format!("{i}11")),
        )
        .arrival = Some(ArrivalProcess::periodic(rat(3, 1), rat(1, 100), 1));
    }

    Ok(CompiledNetwork {
        doc: crate::model::NetworkDoc {
            spec: NetworkSpec {
                name: format!("{}-normalized", spec.name),
                classes: b.classes,
            },
            initial: cn.doc.initial.clone(),
            directory: b.directory,
        },
        scm_state_index: cn.scm_state_index.clone(),
        normalized: true,
    })
}
