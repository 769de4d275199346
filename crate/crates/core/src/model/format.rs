//! The JSON network file.
//!
//! ```json
//! {
//!   "name": "rs",
//!   "classes": [
//!     {"id": "i12", "server": "S1", "service": "1/2", "capacity": "inf",
//!      "next": null, "priority": 1,
//!      "arrival": {"period": "1", "offset": "0", "start_index": 0}}
//!   ],
//!   "initial": {"queued": {"i21": 4}, "in_service": []},
//!   "directory": {"SN1.i12": "112"}
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClassId, ClassSpec, InitialCondition, ModelError, NetworkSpec};

/// Everything stored in a network file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetworkDoc {
    pub spec: NetworkSpec,
    pub initial: InitialCondition,
    /// Structured names for classes, e.g. `SN1.i12`; empty for hand-written nets.
    pub directory: BTreeMap<String, ClassId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    name: String,
    classes: Vec<ClassSpec>,
    #[serde(default)]
    initial: InitialCondition,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    directory: BTreeMap<String, ClassId>,
}

pub fn parse_network(text: &str) -> Result<NetworkDoc, ModelError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let wire: Wire = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ModelError::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })?;
    Ok(NetworkDoc {
        spec: NetworkSpec {
            name: wire.name,
            classes: wire.classes,
        },
        initial: wire.initial,
        directory: wire.directory,
    })
}

pub fn serialize_network(doc: &NetworkDoc) -> String {
    let wire = Wire {
        name: doc.spec.name.clone(),
        classes: doc.spec.classes.clone(),
        initial: doc.initial.clone(),
        directory: doc.directory.clone(),
    };
    let mut s = serde_json::to_string_pretty(&wire).expect("network serializes");
    s.push('\n');
    s
}
