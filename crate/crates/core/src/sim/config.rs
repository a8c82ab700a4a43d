use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{QueueCapacity, Scalar};

/// `count` things entering at the start of `period`, all carrying the
/// same attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrival {
    pub period: u32,
    pub count: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, Scalar>,
}

impl Arrival {
    pub fn new(period: u32, count: u32) -> Arrival {
        Arrival { period, count, attributes: BTreeMap::new() }
    }

    pub fn with(mut self, name: impl Into<String>, value: Scalar) -> Arrival {
        self.attributes.insert(name.into(), value);
        self
    }
}

fn default_horizon() -> u32 {
    100
}

/// Run parameters. Accepted from a `simcfg { … }` block or a JSON sidecar
/// with the same field names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Which chronology to run when the file declares several.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronology: Option<String>,
    #[serde(default)]
    pub arrivals: Vec<Arrival>,
    /// Outcome scripts that replace a guard's own behaviour for this run.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scripts: BTreeMap<String, Vec<String>>,
    /// Queue capacity overrides, keyed by machine path.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub queues: BTreeMap<String, QueueCapacity>,
    #[serde(default = "default_horizon")]
    pub horizon: u32,
    #[serde(default)]
    pub seed: u64,
    /// Thing sort of created tokens; defaults to the lane of the initial
    /// event's anchor stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            chronology: None,
            arrivals: Vec::new(),
            scripts: BTreeMap::new(),
            queues: BTreeMap::new(),
            horizon: default_horizon(),
            seed: 0,
            sort: None,
        }
    }
}

impl SimConfig {
    /// `n` things all arriving at period 0.
    pub fn with_arrivals_at_zero(mut self, n: u32) -> SimConfig {
        self.arrivals = if n == 0 { Vec::new() } else { vec![Arrival::new(0, n)] };
        self
    }

    pub fn with_script<I, S>(mut self, guard: impl Into<String>, outcomes: I) -> SimConfig
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.scripts.insert(guard.into(), outcomes.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_horizon(mut self, horizon: u32) -> SimConfig {
        self.horizon = horizon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> SimConfig {
        self.seed = seed;
        self
    }

    pub fn total_arrivals(&self) -> u64 {
        self.arrivals.iter().map(|a| u64::from(a.count)).sum()
    }
}
