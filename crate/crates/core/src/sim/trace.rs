use serde::{Deserialize, Serialize};

/// One created thing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub instance: u32,
    pub sort: String,
    pub created: u32,
}

/// An event of the executed chronology, as listed in the trace header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventInfo {
    pub id: String,
    pub name: String,
    pub duration: u32,
}

/// `instance` spends period `period` inside event `event`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActiveRecord {
    pub period: u32,
    pub instance: u32,
    pub event: String,
}

/// An event starting for an instance. For timed events `period` is the
/// first period the event is active; bookkeeping events carry the period
/// in which they fired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Firing {
    pub period: u32,
    pub instance: u32,
    pub event: String,
    pub duration: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub period: u32,
    pub instance: u32,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardRecord {
    pub period: u32,
    pub instance: u32,
    pub event: String,
    pub guard: String,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagChange {
    pub period: u32,
    pub instance: u32,
    pub flag: String,
    pub value: bool,
}

/// Complete record of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub chronology: String,
    pub seed: u64,
    /// Number of periods that elapsed.
    pub periods: u32,
    pub instance_label: String,
    pub events: Vec<EventInfo>,
    pub instances: Vec<InstanceInfo>,
    pub active: Vec<ActiveRecord>,
    pub firings: Vec<Firing>,
    pub moves: Vec<Move>,
    pub guards: Vec<GuardRecord>,
    pub flags: Vec<FlagChange>,
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Ids of the events an instance was active in, one entry per period.
    pub fn activity(&self, instance: u32) -> Vec<(u32, &str)> {
        self.active.iter().filter(|r| r.instance == instance).map(|r| (r.period, r.event.as_str())).collect()
    }

    /// All events fired for an instance, bookkeeping included, in order.
    pub fn fired(&self, instance: u32) -> Vec<&str> {
        self.firings.iter().filter(|f| f.instance == instance).map(|f| f.event.as_str()).collect()
    }

    /// Timed events fired for an instance, in order.
    pub fn visible_fired(&self, instance: u32) -> Vec<&str> {
        self.firings
            .iter()
            .filter(|f| f.instance == instance && f.duration > 0)
            .map(|f| f.event.as_str())
            .collect()
    }
}
