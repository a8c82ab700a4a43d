//! In-memory metamodel: machines nested in a containment forest, the five
//! stage kinds, flow and trigger arcs, thing sorts and guards.
//!
//! Arc endpoints are stored as written (dotted machine path, stage kind and
//! optional lane) so that a model parsed from text can be printed back
//! verbatim. Resolution against the machine forest happens in
//! [`Model::resolve_stage`] and [`validate`].

mod path;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

pub use path::{PathError, Resolved};
pub use validate::{
    legal_flow, validate, Severity, ValidationReport, Violation, ViolationCode, RESERVED,
};
pub(crate) use validate::{is_identifier, is_valid_name};

/// Name of the lane used when a stage declares none.
pub const DEFAULT_LANE: &str = "default";

/// The five things a machine can do to a thing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Create,
    Process,
    Receive,
    Release,
    Transfer,
}

impl StageKind {
    pub const ALL: [StageKind; 5] = [
        StageKind::Create,
        StageKind::Process,
        StageKind::Receive,
        StageKind::Release,
        StageKind::Transfer,
    ];

    /// Lower-case keyword used in `.tm` files.
    pub fn keyword(self) -> &'static str {
        match self {
            StageKind::Create => "create",
            StageKind::Process => "process",
            StageKind::Receive => "receive",
            StageKind::Release => "release",
            StageKind::Transfer => "transfer",
        }
    }

    /// Capitalised display word used on diagrams.
    pub fn title(self) -> &'static str {
        match self {
            StageKind::Create => "Create",
            StageKind::Process => "Process",
            StageKind::Receive => "Receive",
            StageKind::Release => "Release",
            StageKind::Transfer => "Transfer",
        }
    }

    pub fn from_keyword(s: &str) -> Option<StageKind> {
        StageKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Index of a machine inside [`Model::machines`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MachineId(pub usize);

/// A flow track inside a machine, named after the thing sort it carries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lane(String);

impl Lane {
    pub fn new(sort: impl Into<String>) -> Lane {
        Lane(sort.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_default(&self) -> bool {
        self.0 == DEFAULT_LANE
    }
}

impl Default for Lane {
    fn default() -> Self {
        Lane(DEFAULT_LANE.to_string())
    }
}

impl fmt::Display for Lane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Capacity of a FIFO queue. Serialized as a number or `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueCapacity {
    Bounded(u32),
    Unbounded,
}

impl QueueCapacity {
    pub fn admits(self, len: usize) -> bool {
        match self {
            QueueCapacity::Bounded(n) => len < n as usize,
            QueueCapacity::Unbounded => true,
        }
    }
}

impl Serialize for QueueCapacity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            QueueCapacity::Bounded(n) => s.serialize_u32(*n),
            QueueCapacity::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for QueueCapacity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0) => Err(serde::de::Error::custom("queue capacity must be positive")),
            Raw::Num(n) => Ok(QueueCapacity::Bounded(n)),
            Raw::Word(w) if w == "unbounded" => Ok(QueueCapacity::Unbounded),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a positive integer or \"unbounded\", got {w:?}"
            ))),
        }
    }
}

impl fmt::Display for QueueCapacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueueCapacity::Bounded(n) => write!(f, "{n}"),
            QueueCapacity::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stage {
    pub kind: StageKind,
    pub lane: Lane,
    /// FIFO buffer in front of the stage; only meaningful on Receive.
    pub queue: Option<QueueCapacity>,
    /// Name of a boolean state flag owned by this stage (e.g. `busy`).
    pub state: Option<String>,
}

impl Stage {
    pub fn new(kind: StageKind) -> Stage {
        Stage { kind, lane: Lane::default(), queue: None, state: None }
    }

    pub fn on_lane(mut self, lane: impl Into<String>) -> Stage {
        self.lane = Lane::new(lane);
        self
    }

    pub fn with_queue(mut self, cap: QueueCapacity) -> Stage {
        self.queue = Some(cap);
        self
    }

    pub fn with_state(mut self, name: impl Into<String>) -> Stage {
        self.state = Some(name.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Machine {
    pub name: String,
    pub parent: Option<MachineId>,
    pub submachines: Vec<MachineId>,
    pub stages: Vec<Stage>,
}

impl Machine {
    pub fn stage(&self, kind: StageKind, lane: &Lane) -> Option<&Stage> {
        self.stages.iter().find(|s| s.kind == kind && &s.lane == lane)
    }
}

/// An arc endpoint as written: machine path, stage kind, optional lane.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StageRef {
    pub machine: String,
    pub kind: StageKind,
    pub lane: Option<Lane>,
}

impl StageRef {
    pub fn new(machine: impl Into<String>, kind: StageKind) -> StageRef {
        StageRef { machine: machine.into(), kind, lane: None }
    }

    pub fn on_lane(mut self, lane: impl Into<String>) -> StageRef {
        self.lane = Some(Lane::new(lane));
        self
    }
}

impl fmt::Display for StageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.machine, self.kind)?;
        if let Some(lane) = &self.lane {
            write!(f, "@{lane}")?;
        }
        Ok(())
    }
}

/// A stage resolved to a concrete machine and lane.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StageKey {
    pub machine: MachineId,
    pub kind: StageKind,
    pub lane: Lane,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowArc {
    pub from: StageRef,
    pub to: StageRef,
    pub guard: Option<String>,
    pub label: Option<String>,
}

impl FlowArc {
    pub fn new(from: StageRef, to: StageRef) -> FlowArc {
        FlowArc { from, to, guard: None, label: None }
    }

    pub fn guarded(mut self, guard: impl Into<String>) -> FlowArc {
        self.guard = Some(guard.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriggerArc {
    pub from: StageRef,
    pub to: StageRef,
    pub label: Option<String>,
}

impl TriggerArc {
    pub fn new(from: StageRef, to: StageRef) -> TriggerArc {
        TriggerArc { from, to, label: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Int,
    String,
    Bool,
}

impl ScalarKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ScalarKind::Int => "int",
            ScalarKind::String => "string",
            ScalarKind::Bool => "bool",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ScalarKind> {
        match s {
            "int" => Some(ScalarKind::Int),
            "string" => Some(ScalarKind::String),
            "bool" => Some(ScalarKind::Bool),
            _ => None,
        }
    }
}

/// A runtime attribute value carried by a token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Bool(v) => write!(f, "{v}"),
            Scalar::Str(v) => write!(f, "{v:?}"),
        }
    }
}

/// A kind of thing. When `machine_ref` is set the sort is itself defined by
/// a machine of the model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThingSort {
    pub name: String,
    pub machine_ref: Option<String>,
    pub attributes: Vec<(String, ScalarKind)>,
}

impl ThingSort {
    pub fn new(name: impl Into<String>) -> ThingSort {
        ThingSort { name: name.into(), machine_ref: None, attributes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GuardKind {
    /// Inclusive integer range check on a named token attribute.
    RangeCheck { attribute: String, min: i64, max: i64 },
    /// Fixed list of outcomes, consumed in order and cycled.
    Scripted(Vec<String>),
    /// `pass` with probability `p`, drawn from the seeded stream.
    Bernoulli(f64),
}

impl Eq for GuardKind {}

impl Hash for GuardKind {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            GuardKind::RangeCheck { attribute, min, max } => {
                attribute.hash(state);
                min.hash(state);
                max.hash(state);
            }
            GuardKind::Scripted(outcomes) => outcomes.hash(state),
            GuardKind::Bernoulli(p) => p.to_bits().hash(state),
        }
    }
}

pub const PASS: &str = "pass";
pub const FAIL: &str = "fail";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub id: String,
    pub kind: GuardKind,
    pub description: Option<String>,
}

impl Guard {
    pub fn new(id: impl Into<String>, kind: GuardKind) -> Guard {
        Guard { id: id.into(), kind, description: None }
    }

    /// Outcome labels this guard can produce, in first-seen order.
    pub fn outcomes(&self) -> Vec<String> {
        match &self.kind {
            GuardKind::RangeCheck { .. } | GuardKind::Bernoulli(_) => {
                vec![PASS.to_string(), FAIL.to_string()]
            }
            GuardKind::Scripted(script) => {
                let mut out: Vec<String> = Vec::new();
                for o in script {
                    if !out.contains(o) {
                        out.push(o.clone());
                    }
                }
                out
            }
        }
    }
}

/// A model element, as referenced by event regions and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Element {
    Machine { id: MachineId },
    Stage { key: StageKey },
    Flow { index: usize },
    Trigger { index: usize },
}

/// 1-based source position of a declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> SourceSpan {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan { line, column, length }
    }
}

/// Where each declaration came from in the source text.
///
/// Positions are not part of a model's identity: two source maps always
/// compare equal and hash to nothing.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub machines: BTreeMap<MachineId, SourceSpan>,
    pub stages: BTreeMap<(MachineId, usize), SourceSpan>,
    pub flows: BTreeMap<usize, SourceSpan>,
    pub triggers: BTreeMap<usize, SourceSpan>,
    pub sorts: BTreeMap<usize, SourceSpan>,
    pub guards: BTreeMap<usize, SourceSpan>,
}

impl PartialEq for SourceMap {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SourceMap {}

impl Hash for SourceMap {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Model {
    pub machines: Vec<Machine>,
    pub flows: Vec<FlowArc>,
    pub triggers: Vec<TriggerArc>,
    pub sorts: Vec<ThingSort>,
    pub guards: Vec<Guard>,
    pub source: SourceMap,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    /// Adds a machine under `parent` (or at top level) and returns its id.
    pub fn add_machine(&mut self, name: impl Into<String>, parent: Option<MachineId>) -> MachineId {
        let id = MachineId(self.machines.len());
        self.machines.push(Machine {
            name: name.into(),
            parent,
            submachines: Vec::new(),
            stages: Vec::new(),
        });
        if let Some(p) = parent {
            self.machines[p.0].submachines.push(id);
        }
        id
    }

    pub fn add_stage(&mut self, machine: MachineId, stage: Stage) {
        self.machines[machine.0].stages.push(stage);
    }

    pub fn add_flow(&mut self, flow: FlowArc) {
        self.flows.push(flow);
    }

    pub fn add_trigger(&mut self, trigger: TriggerArc) {
        self.triggers.push(trigger);
    }

    pub fn machine(&self, id: MachineId) -> &Machine {
        &self.machines[id.0]
    }

    pub fn guard(&self, id: &str) -> Option<&Guard> {
        self.guards.iter().find(|g| g.id == id)
    }

    pub fn sort(&self, name: &str) -> Option<&ThingSort> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn roots(&self) -> impl Iterator<Item = MachineId> + '_ {
        self.machines
            .iter()
            .enumerate()
            .filter(|(_, m)| m.parent.is_none())
            .map(|(i, _)| MachineId(i))
    }

    /// Dotted path from the top level, e.g. `Time.hour`.
    ///
    /// Stops early if the parent chain loops, so malformed models still
    /// produce a finite path.
    pub fn machine_path(&self, id: MachineId) -> String {
        let mut names = vec![self.machines[id.0].name.as_str()];
        let mut cur = self.machines[id.0].parent;
        let mut hops = 0;
        while let Some(p) = cur {
            if hops > self.machines.len() || p.0 >= self.machines.len() {
                break;
            }
            names.push(self.machines[p.0].name.as_str());
            cur = self.machines[p.0].parent;
            hops += 1;
        }
        names.reverse();
        names.join(".")
    }

    pub fn stage_path(&self, key: &StageKey) -> String {
        format!("{}.{}@{}", self.machine_path(key.machine), key.kind, key.lane)
    }

    /// Every machine in containment pre-order (parents before children,
    /// siblings in declaration order).
    pub fn preorder(&self) -> Vec<MachineId> {
        let mut out = Vec::with_capacity(self.machines.len());
        let mut seen = vec![false; self.machines.len()];
        fn walk(m: &Model, id: MachineId, seen: &mut [bool], out: &mut Vec<MachineId>) {
            if seen[id.0] {
                return;
            }
            seen[id.0] = true;
            out.push(id);
            for &c in &m.machines[id.0].submachines {
                if c.0 < m.machines.len() {
                    walk(m, c, seen, out);
                }
            }
        }
        for r in self.roots().collect::<Vec<_>>() {
            walk(self, r, &mut seen, &mut out);
        }
        out
    }

    /// Every element of the model: machines, stages, flows, triggers.
    pub fn elements(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for (i, m) in self.machines.iter().enumerate() {
            out.push(Element::Machine { id: MachineId(i) });
            for s in &m.stages {
                out.push(Element::Stage {
                    key: StageKey { machine: MachineId(i), kind: s.kind, lane: s.lane.clone() },
                });
            }
        }
        out.extend((0..self.flows.len()).map(|index| Element::Flow { index }));
        out.extend((0..self.triggers.len()).map(|index| Element::Trigger { index }));
        out
    }

    pub fn element_label(&self, e: &Element) -> String {
        match e {
            Element::Machine { id } => self.machine_path(*id),
            Element::Stage { key } => self.stage_path(key),
            Element::Flow { index } => {
                let f = &self.flows[*index];
                format!("{} -> {}", f.from, f.to)
            }
            Element::Trigger { index } => {
                let t = &self.triggers[*index];
                format!("{} -.-> {}", t.from, t.to)
            }
        }
    }

    /// Identity of the model's structure, ignoring source positions.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }

    /// A copy with machines renumbered in containment pre-order. Two models
    /// describing the same forest are structurally equal iff their canonical
    /// forms compare equal.
    pub fn canonical(&self) -> Model {
        let order = self.preorder();
        if order.len() != self.machines.len() {
            return self.clone();
        }
        let mut remap = vec![MachineId(0); self.machines.len()];
        for (new, old) in order.iter().enumerate() {
            remap[old.0] = MachineId(new);
        }
        let machines = order
            .iter()
            .map(|old| {
                let m = &self.machines[old.0];
                Machine {
                    name: m.name.clone(),
                    parent: m.parent.map(|p| remap[p.0]),
                    submachines: m.submachines.iter().map(|c| remap[c.0]).collect(),
                    stages: m.stages.clone(),
                }
            })
            .collect();
        Model { machines, ..self.clone() }
    }

    pub fn structurally_eq(&self, other: &Model) -> bool {
        self.canonical() == other.canonical()
    }

    /// Finds the stage with the given flag name in machine `id`.
    pub fn flag_stage(&self, id: MachineId, flag: &str) -> Option<&Stage> {
        self.machines[id.0].stages.iter().find(|s| s.state.as_deref() == Some(flag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_five_stage_kinds() {
        assert_eq!(StageKind::ALL.len(), 5);
        for k in StageKind::ALL {
            assert_eq!(StageKind::from_keyword(k.keyword()), Some(k));
        }
        assert_eq!(StageKind::from_keyword("destroy"), None);
    }

    #[test]
    fn machine_paths_follow_containment() {
        let mut m = Model::new();
        let time = m.add_machine("Time", None);
        let hour = m.add_machine("hour", Some(time));
        assert_eq!(m.machine_path(hour), "Time.hour");
        assert_eq!(m.machine(time).submachines, vec![hour]);
    }

    #[test]
    fn canonical_form_ignores_insertion_order() {
        let mut a = Model::new();
        let x = a.add_machine("X", None);
        let y = a.add_machine("Y", None);
        a.add_machine("x1", Some(x));
        a.add_machine("y1", Some(y));

        let mut b = Model::new();
        let x = b.add_machine("X", None);
        b.add_machine("x1", Some(x));
        let y = b.add_machine("Y", None);
        b.add_machine("y1", Some(y));

        assert_ne!(a, b);
        assert!(a.structurally_eq(&b));
    }

    #[test]
    fn scripted_outcomes_dedupe_in_order() {
        let g = Guard::new("g", GuardKind::Scripted(vec!["fail".into(), "pass".into(), "fail".into()]));
        assert_eq!(g.outcomes(), vec!["fail", "pass"]);
    }

    #[test]
    fn source_positions_do_not_affect_identity() {
        let mut a = Model::new();
        a.add_machine("M", None);
        let mut b = a.clone();
        b.source.machines.insert(MachineId(0), SourceSpan::new(3, 1, 7));
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }
}
