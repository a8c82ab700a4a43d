use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{
    GuardKind, Lane, MachineId, Model, PathError, SourceSpan, StageKey, StageKind, StageRef,
    DEFAULT_LANE,
};

/// Words that can never name a machine, sort, guard or attribute.
pub const RESERVED: &[&str] = &[
    "create", "process", "receive", "release", "transfer", "machine", "flow", "trigger", "lane",
    "guard", "queue", "state", "sort", "events", "event", "chronology", "simcfg", "label",
    "region", "duration", "intensity", "sets", "clears", "at", "initial", "unbounded",
];

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_valid_name(s: &str) -> bool {
    is_identifier(s) && !RESERVED.contains(&s)
}

/// The decided stage adjacency relation for flow arcs.
///
/// Inside one machine a thing is received or created, processed, released
/// and then transferred out; between machines it only moves
/// transfer-to-transfer.
pub fn legal_flow(from: StageKind, to: StageKind, same_machine: bool) -> bool {
    use StageKind::*;
    if !same_machine {
        return matches!((from, to), (Transfer, Transfer));
    }
    matches!(
        (from, to),
        (Transfer, Receive)
            | (Receive, Process)
            | (Receive, Release)
            | (Process, Release)
            | (Create, Process)
            | (Create, Release)
            | (Release, Transfer)
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    InvalidName,
    DuplicateName,
    DuplicateStage,
    DuplicateState,
    EmptyMachine,
    BrokenContainment,
    ContainmentCycle,
    UnknownSort,
    UnknownMachineRef,
    UnknownStage,
    IllegalAdjacency,
    SortMismatch,
    UnknownGuard,
    InvalidGuard,
    MisplacedGuard,
    MisplacedQueue,
    // lints
    UnusualTriggerTarget,
    AmbiguousFeed,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            InvalidName => "INVALID_NAME",
            DuplicateName => "DUPLICATE_NAME",
            DuplicateStage => "DUPLICATE_STAGE",
            DuplicateState => "DUPLICATE_STATE",
            EmptyMachine => "EMPTY_MACHINE",
            BrokenContainment => "BROKEN_CONTAINMENT",
            ContainmentCycle => "CONTAINMENT_CYCLE",
            UnknownSort => "UNKNOWN_SORT",
            UnknownMachineRef => "UNKNOWN_MACHINE_REF",
            UnknownStage => "UNKNOWN_STAGE",
            IllegalAdjacency => "ILLEGAL_ADJACENCY",
            SortMismatch => "SORT_MISMATCH",
            UnknownGuard => "UNKNOWN_GUARD",
            InvalidGuard => "INVALID_GUARD",
            MisplacedGuard => "MISPLACED_GUARD",
            MisplacedQueue => "MISPLACED_QUEUE",
            UnusualTriggerTarget => "UNUSUAL_TRIGGER_TARGET",
            AmbiguousFeed => "AMBIGUOUS_FEED",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::UnusualTriggerTarget | ViolationCode::AmbiguousFeed => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

/// Where a violation sits. Variant order is the report order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Location {
    Sort(usize),
    Guard(usize),
    Machine(String),
    Stage(String),
    Flow(usize),
    Trigger(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// Human-readable location, e.g. `Time.hour` or `flow #3`.
    pub path: String,
    pub message: String,
    pub span: Option<SourceSpan>,
    location: Location,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} at {}: {}", self.code, self.code.severity_word(), self.path, self.message)
    }
}

impl ViolationCode {
    fn severity_word(self) -> &'static str {
        match self.severity() {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

/// Outcome of [`validate`]. A model is valid when [`ValidationReport::is_empty`]
/// holds; warnings are reported separately and never invalidate a model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().chain(&self.warnings).any(|v| v.code == code)
    }
}

struct Checker<'m> {
    model: &'m Model,
    out: Vec<Violation>,
}

impl<'m> Checker<'m> {
    fn push(&mut self, code: ViolationCode, location: Location, span: Option<SourceSpan>, message: String) {
        let path = match &location {
            Location::Sort(i) => format!("sort {}", self.model.sorts[*i].name),
            Location::Guard(i) => format!("guard {}", self.model.guards[*i].id),
            Location::Machine(p) | Location::Stage(p) => p.clone(),
            Location::Flow(i) => format!("flow #{}", i + 1),
            Location::Trigger(i) => format!("trigger #{}", i + 1),
        };
        self.out.push(Violation { code, path, message, span, location });
    }

    fn machine_loc(&self, id: MachineId) -> (Location, Option<SourceSpan>) {
        (
            Location::Machine(self.model.machine_path(id)),
            self.model.source.machines.get(&id).copied(),
        )
    }

    fn names(&mut self) {
        let m = self.model;
        let mut seen = BTreeSet::new();
        for (i, s) in m.sorts.iter().enumerate() {
            let span = m.source.sorts.get(&i).copied();
            if !is_valid_name(&s.name) {
                self.push(ViolationCode::InvalidName, Location::Sort(i), span, format!("`{}` is not a valid sort name", s.name));
            }
            if !seen.insert(s.name.as_str()) {
                self.push(ViolationCode::DuplicateName, Location::Sort(i), span, format!("sort `{}` declared twice", s.name));
            }
            let mut attrs = BTreeSet::new();
            for (a, _) in &s.attributes {
                if !is_valid_name(a) || !attrs.insert(a.as_str()) {
                    self.push(ViolationCode::InvalidName, Location::Sort(i), span, format!("attribute `{a}` is invalid or repeated"));
                }
            }
            if let Some(r) = &s.machine_ref {
                if m.resolve_machine(r).is_err() {
                    self.push(ViolationCode::UnknownMachineRef, Location::Sort(i), span, format!("sort `{}` refers to unknown machine `{r}`", s.name));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for (i, g) in m.guards.iter().enumerate() {
            let span = m.source.guards.get(&i).copied();
            if !is_valid_name(&g.id) {
                self.push(ViolationCode::InvalidName, Location::Guard(i), span, format!("`{}` is not a valid guard id", g.id));
            }
            if !seen.insert(g.id.as_str()) {
                self.push(ViolationCode::DuplicateName, Location::Guard(i), span, format!("guard `{}` declared twice", g.id));
            }
            let problem = match &g.kind {
                GuardKind::RangeCheck { attribute, min, max } => {
                    if min > max {
                        Some(format!("range min {min} exceeds max {max}"))
                    } else if !is_valid_name(attribute) {
                        Some(format!("`{attribute}` is not a valid attribute name"))
                    } else {
                        None
                    }
                }
                GuardKind::Bernoulli(p) => {
                    (!(0.0..=1.0).contains(p)).then(|| format!("probability {p} is outside [0, 1]"))
                }
                GuardKind::Scripted(script) => {
                    if script.is_empty() {
                        Some("script is empty".to_string())
                    } else {
                        script
                            .iter()
                            .find(|o| !is_identifier(o))
                            .map(|o| format!("outcome `{o}` is not an identifier"))
                    }
                }
            };
            if let Some(msg) = problem {
                self.push(ViolationCode::InvalidGuard, Location::Guard(i), span, msg);
            }
        }
    }

    fn containment(&mut self) {
        let m = self.model;
        let n = m.machines.len();
        let mut child_edges = 0usize;
        for (i, mach) in m.machines.iter().enumerate() {
            let id = MachineId(i);
            let (loc, span) = self.machine_loc(id);
            if !is_valid_name(&mach.name) {
                self.push(ViolationCode::InvalidName, loc.clone(), span, format!("`{}` is not a valid machine name", mach.name));
            }
            if let Some(p) = mach.parent {
                if p.0 >= n || !m.machines[p.0].submachines.contains(&id) {
                    self.push(ViolationCode::BrokenContainment, loc.clone(), span, "parent does not list this machine as a submachine".into());
                }
            }
            let mut subs = BTreeSet::new();
            for c in &mach.submachines {
                child_edges += 1;
                if c.0 >= n || m.machines[c.0].parent != Some(id) || !subs.insert(*c) {
                    self.push(ViolationCode::BrokenContainment, loc.clone(), span, format!("submachine #{} does not point back to this machine", c.0));
                }
            }
            if mach.stages.is_empty() && mach.submachines.is_empty() {
                self.push(ViolationCode::EmptyMachine, loc.clone(), span, "machine has no stages and no submachines".into());
            }
            // ancestor walk; a walk longer than n hops means a cycle
            let mut cur = mach.parent;
            let mut hops = 0;
            while let Some(p) = cur {
                if p == id || hops > n {
                    self.push(ViolationCode::ContainmentCycle, loc.clone(), span, "machine is its own ancestor".into());
                    break;
                }
                if p.0 >= n {
                    break;
                }
                cur = m.machines[p.0].parent;
                hops += 1;
            }
        }
        let with_parent = m.machines.iter().filter(|x| x.parent.is_some()).count();
        if child_edges != with_parent && !self.out.iter().any(|v| v.code == ViolationCode::BrokenContainment) {
            self.push(ViolationCode::BrokenContainment, Location::Machine(String::new()), None, format!("{child_edges} containment edges for {with_parent} contained machines"));
        }

        // sibling names
        let mut groups: BTreeMap<Option<MachineId>, Vec<MachineId>> = BTreeMap::new();
        for (i, mach) in m.machines.iter().enumerate() {
            groups.entry(mach.parent).or_default().push(MachineId(i));
        }
        for ids in groups.values() {
            let mut seen = BTreeSet::new();
            for id in ids {
                let name = m.machines[id.0].name.as_str();
                if !seen.insert(name) {
                    let (loc, span) = self.machine_loc(*id);
                    self.push(ViolationCode::DuplicateName, loc, span, format!("sibling machine `{name}` declared twice"));
                }
            }
        }
    }

    fn stages(&mut self) {
        let m = self.model;
        for (i, mach) in m.machines.iter().enumerate() {
            let id = MachineId(i);
            let mut seen = BTreeSet::new();
            let mut states = BTreeSet::new();
            for (si, s) in mach.stages.iter().enumerate() {
                let key = StageKey { machine: id, kind: s.kind, lane: s.lane.clone() };
                let loc = Location::Stage(m.stage_path(&key));
                let span = m.source.stages.get(&(id, si)).copied();
                if !seen.insert((s.kind, s.lane.clone())) {
                    self.push(ViolationCode::DuplicateStage, loc.clone(), span, format!("second {} stage on lane `{}`", s.kind, s.lane));
                }
                if s.lane.as_str().is_empty() {
                    self.push(ViolationCode::UnknownSort, loc.clone(), span, "lane sort name is empty".into());
                } else if s.lane.as_str() != DEFAULT_LANE && m.sort(s.lane.as_str()).is_none() {
                    self.push(ViolationCode::UnknownSort, loc.clone(), span, format!("lane sort `{}` is not declared", s.lane));
                }
                if s.queue.is_some() && s.kind != StageKind::Receive {
                    self.push(ViolationCode::MisplacedQueue, loc.clone(), span, format!("queue attached to a {} stage", s.kind));
                }
                if matches!(s.queue, Some(super::QueueCapacity::Bounded(0))) {
                    self.push(ViolationCode::MisplacedQueue, loc.clone(), span, "queue capacity must be positive".into());
                }
                if let Some(flag) = &s.state {
                    if !is_valid_name(flag) {
                        self.push(ViolationCode::InvalidName, loc.clone(), span, format!("`{flag}` is not a valid state name"));
                    }
                    if !states.insert(flag.as_str()) {
                        self.push(ViolationCode::DuplicateState, loc.clone(), span, format!("state `{flag}` declared twice in this machine"));
                    }
                }
            }
        }
    }

    fn resolve_endpoint(&mut self, r: &StageRef, loc: &Location, span: Option<SourceSpan>) -> Option<StageKey> {
        match self.model.resolve_stage(r) {
            Ok(k) => Some(k),
            Err(e) => {
                let msg = match e {
                    PathError::NotFound { prefix, .. } => {
                        format!("`{r}` does not exist (resolved up to `{prefix}`)")
                    }
                    PathError::Ambiguous { .. } => format!("`{r}` is ambiguous; name a lane"),
                };
                self.push(ViolationCode::UnknownStage, loc.clone(), span, msg);
                None
            }
        }
    }

    fn flows(&mut self) {
        let m = self.model;
        for (i, f) in m.flows.iter().enumerate() {
            let loc = Location::Flow(i);
            let span = m.source.flows.get(&i).copied();
            let from = self.resolve_endpoint(&f.from, &loc, span);
            let to = self.resolve_endpoint(&f.to, &loc, span);
            if let (Some(a), Some(b)) = (&from, &to) {
                let same = a.machine == b.machine;
                if !legal_flow(a.kind, b.kind, same) {
                    let scope = if same { "within one machine" } else { "between machines" };
                    self.push(ViolationCode::IllegalAdjacency, loc.clone(), span, format!("{} -> {} is not a legal flow {scope}", a.kind.title(), b.kind.title()));
                }
                if a.lane != b.lane {
                    self.push(ViolationCode::SortMismatch, loc.clone(), span, format!("flow changes sort from `{}` to `{}`", a.lane, b.lane));
                }
            }
            if let Some(g) = &f.guard {
                if m.guard(g).is_none() {
                    self.push(ViolationCode::UnknownGuard, loc.clone(), span, format!("guard `{g}` is not declared"));
                }
                if let Some(a) = &from {
                    if a.kind != StageKind::Process {
                        self.push(ViolationCode::MisplacedGuard, loc.clone(), span, format!("guards sit on arcs leaving a Process stage, not {}", a.kind.title()));
                    }
                }
            }
        }
    }

    fn triggers(&mut self, warnings: &mut Vec<Violation>) {
        let m = self.model;
        for (i, t) in m.triggers.iter().enumerate() {
            let loc = Location::Trigger(i);
            let span = m.source.triggers.get(&i).copied();
            self.resolve_endpoint(&t.from, &loc, span);
            if let Some(to) = self.resolve_endpoint(&t.to, &loc, span) {
                if matches!(to.kind, StageKind::Release | StageKind::Transfer) {
                    let mut w = Checker { model: m, out: Vec::new() };
                    w.push(ViolationCode::UnusualTriggerTarget, loc.clone(), span, format!("trigger activates a {} stage", to.kind.title()));
                    warnings.append(&mut w.out);
                }
            }
        }
    }

    fn feeds(&mut self, warnings: &mut Vec<Violation>) {
        let m = self.model;
        for (i, mach) in m.machines.iter().enumerate() {
            let id = MachineId(i);
            if mach.stages.iter().all(|s| s.state.is_none()) {
                continue;
            }
            let lanes: BTreeSet<&Lane> = mach.stages.iter().map(|s| &s.lane).collect();
            for lane in lanes {
                let feeders = m
                    .flows
                    .iter()
                    .filter_map(|f| {
                        let from = m.resolve_stage(&f.from).ok()?;
                        let to = m.resolve_stage(&f.to).ok()?;
                        (to.machine == id && &to.lane == lane && from.machine != id).then_some(())
                    })
                    .count();
                if feeders > 1 {
                    let mut w = Checker { model: m, out: Vec::new() };
                    let (loc, span) = w.machine_loc(id);
                    w.push(ViolationCode::AmbiguousFeed, loc, span, format!("{feeders} external flows feed lane `{lane}`; flow declaration order breaks ties"));
                    warnings.append(&mut w.out);
                }
            }
        }
    }
}

/// Checks every structural invariant of `model`. Never fails: problems are
/// reported as violations, ordered by location.
pub fn validate(model: &Model) -> ValidationReport {
    let mut c = Checker { model, out: Vec::new() };
    let mut warnings = Vec::new();
    c.names();
    c.containment();
    c.stages();
    c.flows();
    c.triggers(&mut warnings);
    c.feeds(&mut warnings);
    let mut violations = c.out;
    let key = |v: &Violation| (v.location.clone(), v.code, v.message.clone());
    violations.sort_by_key(key);
    warnings.sort_by_key(key);
    ValidationReport { violations, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlowArc, Guard, Stage, ThingSort, TriggerArc};

    fn crt() -> Model {
        let mut m = Model::new();
        let id = m.add_machine("M", None);
        for k in [StageKind::Create, StageKind::Release, StageKind::Transfer] {
            m.add_stage(id, Stage::new(k));
        }
        m.add_flow(FlowArc::new(StageRef::new("M", StageKind::Create), StageRef::new("M", StageKind::Release)));
        m.add_flow(FlowArc::new(StageRef::new("M", StageKind::Release), StageRef::new("M", StageKind::Transfer)));
        m
    }

    #[test]
    fn legal_flow_examples() {
        assert!(legal_flow(StageKind::Release, StageKind::Transfer, true));
        assert!(!legal_flow(StageKind::Create, StageKind::Receive, true));
        assert!(legal_flow(StageKind::Transfer, StageKind::Transfer, false));
        assert!(!legal_flow(StageKind::Process, StageKind::Create, true));
    }

    #[test]
    fn minimal_model_is_valid() {
        let r = validate(&crt());
        assert!(r.is_empty(), "{:?}", r.violations);
    }

    #[test]
    fn create_to_receive_is_illegal() {
        let mut m = crt();
        m.add_stage(MachineId(0), Stage::new(StageKind::Receive));
        m.add_flow(FlowArc::new(StageRef::new("M", StageKind::Create), StageRef::new("M", StageKind::Receive)));
        let r = validate(&m);
        assert_eq!(r.codes(), vec![ViolationCode::IllegalAdjacency]);
        assert_eq!(r.violations[0].path, "flow #3");
    }

    #[test]
    fn unknown_machine_is_unknown_stage() {
        let mut m = crt();
        m.add_flow(FlowArc::new(StageRef::new("Paintt", StageKind::Transfer), StageRef::new("M", StageKind::Transfer)));
        assert_eq!(validate(&m).codes(), vec![ViolationCode::UnknownStage]);
    }

    #[test]
    fn duplicate_stage_and_sibling() {
        let mut m = crt();
        m.add_stage(MachineId(0), Stage::new(StageKind::Create));
        m.add_machine("M", None);
        let codes = validate(&m).codes();
        assert!(codes.contains(&ViolationCode::DuplicateStage));
        assert!(codes.contains(&ViolationCode::DuplicateName));
        assert!(codes.contains(&ViolationCode::EmptyMachine));
    }

    #[test]
    fn containment_cycle_detected() {
        let mut m = Model::new();
        let a = m.add_machine("A", None);
        let b = m.add_machine("B", Some(a));
        m.add_stage(a, Stage::new(StageKind::Process));
        m.add_stage(b, Stage::new(StageKind::Process));
        m.machines[a.0].parent = Some(b);
        m.machines[b.0].submachines.push(a);
        assert!(validate(&m).has(ViolationCode::ContainmentCycle));
    }

    #[test]
    fn sort_must_be_preserved_by_flows() {
        let mut m = Model::new();
        m.sorts.push(ThingSort::new("car"));
        m.sorts.push(ThingSort::new("signal"));
        let id = m.add_machine("M", None);
        m.add_stage(id, Stage::new(StageKind::Create).on_lane("car"));
        m.add_stage(id, Stage::new(StageKind::Release).on_lane("signal"));
        m.add_flow(FlowArc::new(
            StageRef::new("M", StageKind::Create),
            StageRef::new("M", StageKind::Release),
        ));
        assert_eq!(validate(&m).codes(), vec![ViolationCode::SortMismatch]);
        // triggers may cross sorts
        m.flows.clear();
        m.add_stage(id, Stage::new(StageKind::Process).on_lane("signal"));
        m.add_trigger(TriggerArc::new(StageRef::new("M", StageKind::Create), StageRef::new("M", StageKind::Process)));
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn guard_rules() {
        let mut m = crt();
        m.guards.push(Guard::new("r", GuardKind::RangeCheck { attribute: "second".into(), min: 60, max: 0 }));
        m.guards.push(Guard::new("b", GuardKind::Bernoulli(1.5)));
        m.guards.push(Guard::new("s", GuardKind::Scripted(vec![])));
        m.flows[0].guard = Some("nope".into());
        let r = validate(&m);
        let codes = r.codes();
        assert_eq!(codes.iter().filter(|c| **c == ViolationCode::InvalidGuard).count(), 3);
        assert!(codes.contains(&ViolationCode::UnknownGuard));
        assert!(codes.contains(&ViolationCode::MisplacedGuard));
    }

    #[test]
    fn unusual_trigger_target_is_only_a_warning() {
        let mut m = crt();
        m.add_trigger(TriggerArc::new(StageRef::new("M", StageKind::Create), StageRef::new("M", StageKind::Transfer)));
        let r = validate(&m);
        assert!(r.is_empty());
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].code, ViolationCode::UnusualTriggerTarget);
    }

    #[test]
    fn report_is_sorted_and_pure() {
        let mut m = crt();
        m.add_flow(FlowArc::new(StageRef::new("X", StageKind::Transfer), StageRef::new("M", StageKind::Transfer)));
        m.add_machine("bad name", None);
        let a = validate(&m);
        let b = validate(&m);
        assert_eq!(a, b);
        assert_eq!(a.violations.first().unwrap().code, ViolationCode::InvalidName);
        assert_eq!(a.violations.last().unwrap().code, ViolationCode::UnknownStage);
    }
}
