use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use qnet_core::Rational;

/// A named workload class set sampled every `cadence`, written as
/// `W:i12,i21@1/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeSpec {
    pub name: String,
    pub classes: Vec<String>,
    pub cadence: Rational,
}

impl FromStr for ProbeSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (name, rest) = s.split_once(':').ok_or_else(|| anyhow!("expected NAME:CLASS,...@CADENCE, got {s:?}"))?;
        let (classes, cadence) = rest.rsplit_once('@').ok_or_else(|| anyhow!("probe {s:?} has no @CADENCE"))?;
        let cadence: Rational = cadence.parse().with_context(|| format!("bad cadence in probe {s:?}"))?;
        if !cadence.is_positive() {
            bail!("probe cadence must be positive, got {cadence}");
        }
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            bail!("probe name {name:?} must be alphanumeric");
        }
        let classes: Vec<String> = classes.split(',').map(|c| c.trim().to_string()).collect();
        if classes.iter().any(String::is_empty) {
            bail!("probe {s:?} has an empty class name");
        }
        Ok(ProbeSpec {
            name: name.to_string(),
            classes,
            cadence,
        })
    }
}
