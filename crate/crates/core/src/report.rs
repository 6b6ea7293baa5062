//! Structured outcome of an identity check.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Result of one exact identity check.
///
/// `anchor` names the identity being checked (e.g. `"stochastic R sum rule"`);
/// `params` records exact inputs as strings so that a report can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub anchor: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_block: Option<String>,
    /// Set when the sub-block differs between cutoffs `D` and `D + 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_stable: Option<bool>,
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub floats: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>) -> Self {
        VerificationReport {
            name: name.into(),
            anchor: anchor.into(),
            passed: true,
            cutoff: None,
            sub_block: None,
            cutoff_stable: None,
            checked: 0,
            counterexample: None,
            params: BTreeMap::new(),
            values: BTreeMap::new(),
            floats: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize, sub_block: impl Into<String>) -> Self {
        self.cutoff = Some(cutoff);
        self.sub_block = Some(sub_block.into());
        self
    }

    /// Records one comparison; the first failure is kept as the counterexample.
    pub fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            if self.passed {
                self.counterexample = Some(describe());
            }
            self.passed = false;
        }
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        if self.passed {
            self.counterexample = Some(why.into());
        }
        self.passed = false;
    }

    pub fn set_stability(&mut self, stable: bool) {
        self.cutoff_stable = Some(stable);
        if !stable {
            self.fail("sub-block differs between cutoff D and D+2");
        }
    }

    /// Folds another report's outcome into this one.
    pub fn absorb(&mut self, other: &VerificationReport) {
        self.checked += other.checked;
        if !other.passed {
            let why = other
                .counterexample
                .clone()
                .unwrap_or_else(|| "sub-check failed".into());
            self.fail(format!("{}: {}", other.name, why));
        }
        if let Some(s) = other.cutoff_stable {
            self.cutoff_stable = Some(self.cutoff_stable.unwrap_or(true) && s);
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} ({} checks)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checked
        )?;
        if let Some(c) = &self.counterexample {
            write!(f, " first counterexample: {c}")?;
        }
        Ok(())
    }
}

/// Serializes exact rationals as `"p/q"` strings.
pub mod scalar_strings {
    use crate::qkernel::{parse_scalar, Scalar};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_scalar(s).map_err(D::Error::custom))
            .collect()
    }
}
