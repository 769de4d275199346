use std::collections::HashMap;

use super::{Capacity, ClassId, ClassSpec, ModelError, NetworkSpec, ServerId};
use crate::rational::Rational;

/// A server and its classes in service order: ascending `(priority, class id)`.
#[derive(Clone, Debug)]
pub struct ServerInfo {
    pub id: ServerId,
    pub classes: Vec<usize>,
}

/// A validated, indexed network. Classes are addressed by their position in
/// [`NetworkSpec::classes`]; servers by their rank in sorted id order.
#[derive(Clone, Debug)]
pub struct Network {
    spec: NetworkSpec,
    class_index: HashMap<ClassId, usize>,
    servers: Vec<ServerInfo>,
    server_index: HashMap<ServerId, usize>,
    class_server: Vec<usize>,
    next: Vec<Option<usize>>,
    rank_in_server: Vec<usize>,
    topo: Vec<usize>,
    downstream_servers: Vec<Vec<usize>>,
}

impl Network {
    pub(super) fn new(spec: NetworkSpec) -> Result<Self, ModelError> {
        let mut class_index = HashMap::with_capacity(spec.classes.len());
        for (i, c) in spec.classes.iter().enumerate() {
            if class_index.insert(c.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateClass {
                    class: c.id.clone(),
                });
            }
        }
        for c in &spec.classes {
            check_class(c)?;
        }

        let mut next = Vec::with_capacity(spec.classes.len());
        for c in &spec.classes {
            match &c.next {
                None => next.push(None),
                Some(n) => match class_index.get(n) {
                    Some(&j) => next.push(Some(j)),
                    None => {
                        return Err(ModelError::DanglingNextClass {
                            class: c.id.clone(),
                            next: n.clone(),
                        })
                    }
                },
            }
        }

        let topo = topological_order(&spec, &next)?;

        let server_ids = spec.server_ids();
        let server_index: HashMap<ServerId, usize> = server_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let class_server: Vec<usize> = spec
            .classes
            .iter()
            .map(|c| server_index[&c.server])
            .collect();
        let mut servers: Vec<ServerInfo> = server_ids
            .into_iter()
            .map(|id| ServerInfo {
                id,
                classes: Vec::new(),
            })
            .collect();
        for (i, &s) in class_server.iter().enumerate() {
            servers[s].classes.push(i);
        }
        let mut rank_in_server = vec![0; spec.classes.len()];
        for srv in &mut servers {
            srv.classes.sort_by(|&a, &b| {
                let (ca, cb) = (&spec.classes[a], &spec.classes[b]);
                (ca.priority, &ca.id).cmp(&(cb.priority, &cb.id))
            });
            for (r, &c) in srv.classes.iter().enumerate() {
                rank_in_server[c] = r;
            }
        }

        // Servers strictly downstream of each class along its route.
        let mut downstream_servers = vec![Vec::new(); spec.classes.len()];
        for &c in topo.iter().rev() {
            if let Some(n) = next[c] {
                let mut d = downstream_servers[n].clone();
                d.push(class_server[n]);
                d.sort_unstable();
                d.dedup();
                downstream_servers[c] = d;
            }
        }

        Ok(Network {
            spec,
            class_index,
            servers,
            server_index,
            class_server,
            next,
            rank_in_server,
            topo,
            downstream_servers,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn into_spec(self) -> NetworkSpec {
        self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn num_classes(&self) -> usize {
        self.spec.classes.len()
    }

    pub fn num_servers(&self) -> usize {
        self.servers.len()
    }

    pub fn class(&self, idx: usize) -> &ClassSpec {
        &self.spec.classes[idx]
    }

    pub fn class_idx(&self, id: &ClassId) -> Option<usize> {
        self.class_index.get(id).copied()
    }

    pub fn server_idx(&self, id: &ServerId) -> Option<usize> {
        self.server_index.get(id).copied()
    }

    pub fn servers(&self) -> &[ServerInfo] {
        &self.servers
    }

    pub fn server(&self, idx: usize) -> &ServerInfo {
        &self.servers[idx]
    }

    pub fn server_of(&self, class: usize) -> usize {
        self.class_server[class]
    }

    pub fn next_of(&self, class: usize) -> Option<usize> {
        self.next[class]
    }

    pub fn service(&self, class: usize) -> Rational {
        self.spec.classes[class].service
    }

    pub fn capacity(&self, class: usize) -> Capacity {
        self.spec.classes[class].capacity
    }

    /// Position of the class in its server's service order.
    pub fn rank_in_server(&self, class: usize) -> usize {
        self.rank_in_server[class]
    }

    /// Classes ordered so that every class precedes the class it routes to.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Sorted servers visited by a job after leaving `class`.
    pub fn downstream_servers(&self, class: usize) -> &[usize] {
        &self.downstream_servers[class]
    }

    /// The route starting at `class`, inclusive.
    pub fn route_from(&self, class: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(class), move |&c| self.next[c])
    }
}

fn check_class(c: &ClassSpec) -> Result<(), ModelError> {
    if c.priority <= 0 {
        return Err(ModelError::BadPriority {
            class: c.id.clone(),
            priority: c.priority,
        });
    }
    if c.service.is_negative() {
        return Err(ModelError::NegativeTime {
            class: c.id.clone(),
            what: format!("service time {} is negative", c.service),
        });
    }
    if let Some(a) = &c.arrival {
        if let Some(p) = a.period {
            if !p.is_positive() {
                return Err(ModelError::NegativeTime {
                    class: c.id.clone(),
                    what: format!("arrival period {p} is not positive"),
                });
            }
        }
    }
    Ok(())
}

fn topological_order(spec: &NetworkSpec, next: &[Option<usize>]) -> Result<Vec<usize>, ModelError> {
    let n = next.len();
    let mut indeg = vec![0usize; n];
    for &j in next.iter().flatten() {
        indeg[j] += 1;
    }
    let mut stack: Vec<usize> = (0..n).rev().filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = stack.pop() {
        order.push(i);
        if let Some(j) = next[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                stack.push(j);
            }
        }
    }
    if order.len() < n {
        let culprit = (0..n).find(|&i| indeg[i] > 0).unwrap();
        return Err(ModelError::CyclicRouting {
            class: spec.classes[culprit].id.clone(),
        });
    }
    Ok(order)
}
