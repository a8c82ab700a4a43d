//! Events carved out of a model, coverage of alternative slicings, and
//! chronologies ordering events into behaviour.
//!
//! An event is a named region of the model (machines, stages and the arcs
//! between them) together with a duration in periods. Events may also name
//! the guard whose outcome decides the next event, the stage where a thing
//! sits while the event runs, and a state flag they set or clear.

mod chronology;
mod coverage;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{
    Element, MachineId, Model, PathError, Resolved, StageKey, StageKind, StageRef,
};

pub use chronology::{Chronology, ChronologyEdge, ChronologyError};
pub use coverage::{check_coverage, CoverageReport};

/// One item of a region selector.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectorItem {
    /// A dotted path: empty for the whole model, a machine (with its
    /// subtree), or a single stage.
    Path(String),
    /// Flow arcs between two stages.
    Flow(StageRef, StageRef),
    /// Trigger arcs between two stages.
    Trigger(StageRef, StageRef),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegionSelector {
    pub items: Vec<SelectorItem>,
}

impl RegionSelector {
    pub fn paths<I, S>(paths: I) -> RegionSelector
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RegionSelector { items: paths.into_iter().map(|p| SelectorItem::Path(p.into())).collect() }
    }

    pub fn whole_model() -> RegionSelector {
        RegionSelector { items: vec![SelectorItem::Path(String::new())] }
    }
}

/// Effect of a bookkeeping event on a machine's state flag, written as
/// `Machine.path.flag`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlagEffect {
    Set(String),
    Clear(String),
}

impl FlagEffect {
    pub fn path(&self) -> &str {
        match self {
            FlagEffect::Set(p) | FlagEffect::Clear(p) => p,
        }
    }
}

/// An event as declared, before resolution against a model.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub id: String,
    pub name: String,
    pub selector: RegionSelector,
    pub duration: u32,
    pub intensity: Option<f64>,
    pub guard: Option<String>,
    pub anchor: Option<StageRef>,
    pub effect: Option<FlagEffect>,
}

impl EventSpec {
    pub fn new(id: impl Into<String>, name: impl Into<String>, selector: RegionSelector) -> EventSpec {
        EventSpec {
            id: id.into(),
            name: name.into(),
            selector,
            duration: 1,
            intensity: None,
            guard: None,
            anchor: None,
            effect: None,
        }
    }

    pub fn duration(mut self, periods: u32) -> EventSpec {
        self.duration = periods;
        self
    }

    pub fn guard(mut self, guard: impl Into<String>) -> EventSpec {
        self.guard = Some(guard.into());
        self
    }

    pub fn at(mut self, anchor: StageRef) -> EventSpec {
        self.anchor = Some(anchor);
        self
    }

    pub fn effect(mut self, effect: FlagEffect) -> EventSpec {
        self.effect = Some(effect);
        self
    }
}

/// A state flag owned by a machine, e.g. `Coloring.busy`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlagKey {
    pub machine: MachineId,
    pub name: String,
}

/// An event resolved against a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub id: String,
    pub name: String,
    pub region: BTreeSet<Element>,
    pub duration: u32,
    pub intensity: Option<f64>,
    /// Guard evaluated when the event completes, with its declared outcomes.
    pub guard: Option<String>,
    pub outcomes: Vec<String>,
    /// Where a thing sits while the event runs.
    pub anchor: Option<StageKey>,
    /// `(flag, true)` sets the flag, `(flag, false)` clears it.
    pub effect: Option<(FlagKey, bool)>,
    pub model_fingerprint: u64,
}

impl Event {
    pub fn is_bookkeeping(&self) -> bool {
        self.duration == 0
    }

    pub fn stages(&self) -> impl Iterator<Item = &StageKey> {
        self.region.iter().filter_map(|e| match e {
            Element::Stage { key } => Some(key),
            _ => None,
        })
    }
}

/// Result of carving: the event plus arcs left out because only one of
/// their endpoints was selected.
#[derive(Debug, Clone)]
pub struct Carved {
    pub event: Event,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("EMPTY_REGION: event `{0}` selects nothing")]
    EmptyRegion(String),
    #[error("{0}")]
    PathNotFound(#[from] PathError),
    #[error("UNKNOWN_GUARD: event `{event}` branches on undeclared guard `{guard}`")]
    UnknownGuard { event: String, guard: String },
    #[error("UNKNOWN_FLAG: event `{event}` refers to undeclared state `{flag}`")]
    UnknownFlag { event: String, flag: String },
    #[error("TIMED_EFFECT: event `{0}` changes a state flag but lasts longer than zero periods")]
    TimedEffect(String),
    #[error("INVALID_INTENSITY: event `{0}` has a negative or non-finite intensity")]
    InvalidIntensity(String),
}

impl EventError {
    pub fn code(&self) -> &'static str {
        match self {
            EventError::EmptyRegion(_) => "EMPTY_REGION",
            EventError::PathNotFound(_) => "PATH_NOT_FOUND",
            EventError::UnknownGuard { .. } => "UNKNOWN_GUARD",
            EventError::UnknownFlag { .. } => "UNKNOWN_FLAG",
            EventError::TimedEffect(_) => "TIMED_EFFECT",
            EventError::InvalidIntensity(_) => "INVALID_INTENSITY",
        }
    }
}

fn add_subtree(model: &Model, id: MachineId, region: &mut BTreeSet<Element>) {
    if !region.insert(Element::Machine { id }) {
        return;
    }
    let m = model.machine(id);
    for s in &m.stages {
        region.insert(Element::Stage {
            key: StageKey { machine: id, kind: s.kind, lane: s.lane.clone() },
        });
    }
    for &c in &m.submachines {
        add_subtree(model, c, region);
    }
}

fn add_stage(region: &mut BTreeSet<Element>, key: StageKey) {
    region.insert(Element::Machine { id: key.machine });
    region.insert(Element::Stage { key });
}

/// Resolves a flag path `Machine.sub.flag` against the model.
pub fn resolve_flag(model: &Model, path: &str) -> Option<FlagKey> {
    let (machine, name) = path.rsplit_once('.')?;
    let id = model.resolve_machine(machine).ok()?;
    model.flag_stage(id, name)?;
    Some(FlagKey { machine: id, name: name.to_string() })
}

pub fn flag_path(model: &Model, flag: &FlagKey) -> String {
    format!("{}.{}", model.machine_path(flag.machine), flag.name)
}

/// Resolves the selector to a closed region and builds the event.
///
/// Selecting a machine takes its whole subtree; selecting a stage takes the
/// stage and its owning machine; selecting an arc takes the arc and both
/// endpoints. Arcs whose endpoints are both inside are then added; arcs with
/// only one endpoint inside are left out and listed as warnings.
pub fn carve_event(model: &Model, spec: &EventSpec) -> Result<Carved, EventError> {
    let mut region = BTreeSet::new();
    let mut explicit_arcs = BTreeSet::new();

    for item in &spec.selector.items {
        match item {
            SelectorItem::Path(p) => match model.resolve_path(p)? {
                Resolved::Root => {
                    for id in model.roots().collect::<Vec<_>>() {
                        add_subtree(model, id, &mut region);
                    }
                }
                Resolved::Machine(id) => add_subtree(model, id, &mut region),
                Resolved::Stage(key) => add_stage(&mut region, key),
            },
            SelectorItem::Flow(a, b) | SelectorItem::Trigger(a, b) => {
                let from = model.resolve_stage(a)?;
                let to = model.resolve_stage(b)?;
                let is_flow = matches!(item, SelectorItem::Flow(..));
                let mut matched = false;
                let arcs: Vec<(usize, &StageRef, &StageRef)> = if is_flow {
                    model.flows.iter().enumerate().map(|(i, f)| (i, &f.from, &f.to)).collect()
                } else {
                    model.triggers.iter().enumerate().map(|(i, t)| (i, &t.from, &t.to)).collect()
                };
                for (index, f, t) in arcs {
                    if model.resolve_stage(f).ok().as_ref() == Some(&from)
                        && model.resolve_stage(t).ok().as_ref() == Some(&to)
                    {
                        matched = true;
                        explicit_arcs.insert(if is_flow {
                            Element::Flow { index }
                        } else {
                            Element::Trigger { index }
                        });
                    }
                }
                if !matched {
                    let arrow = if is_flow { "->" } else { "-.->" };
                    return Err(EventError::PathNotFound(PathError::NotFound {
                        path: format!("{a} {arrow} {b}"),
                        prefix: String::new(),
                    }));
                }
                add_stage(&mut region, from);
                add_stage(&mut region, to);
            }
        }
    }

    if region.is_empty() {
        return Err(EventError::EmptyRegion(spec.id.clone()));
    }
    region.extend(explicit_arcs);

    let mut warnings = Vec::new();
    let flows = model.flows.iter().map(|f| (&f.from, &f.to));
    let triggers = model.triggers.iter().map(|t| (&t.from, &t.to));
    let arcs: Vec<(Element, (&StageRef, &StageRef))> = flows
        .enumerate()
        .map(|(index, a)| (Element::Flow { index }, a))
        .chain(triggers.enumerate().map(|(index, a)| (Element::Trigger { index }, a)))
        .collect();
    for (elem, (f, t)) in arcs {
        if region.contains(&elem) {
            continue;
        }
        let (Ok(from), Ok(to)) = (model.resolve_stage(f), model.resolve_stage(t)) else {
            continue;
        };
        let a = region.contains(&Element::Stage { key: from });
        let b = region.contains(&Element::Stage { key: to });
        if a && b {
            region.insert(elem);
        } else if a || b {
            warnings.push(format!(
                "event {}: {} crosses the region boundary and is excluded",
                spec.id,
                model.element_label(&elem)
            ));
        }
    }

    let (guard, outcomes) = match &spec.guard {
        Some(g) => match model.guard(g) {
            Some(decl) => (Some(g.clone()), decl.outcomes()),
            None => {
                return Err(EventError::UnknownGuard { event: spec.id.clone(), guard: g.clone() })
            }
        },
        None => (None, Vec::new()),
    };

    let anchor = match &spec.anchor {
        Some(r) => Some(model.resolve_stage(r)?),
        None => default_anchor(&region),
    };

    let effect = match &spec.effect {
        Some(e) => {
            if spec.duration != 0 {
                return Err(EventError::TimedEffect(spec.id.clone()));
            }
            let key = resolve_flag(model, e.path()).ok_or_else(|| EventError::UnknownFlag {
                event: spec.id.clone(),
                flag: e.path().to_string(),
            })?;
            Some((key, matches!(e, FlagEffect::Set(_))))
        }
        None => None,
    };

    if let Some(i) = spec.intensity {
        if !(i.is_finite() && i >= 0.0) {
            return Err(EventError::InvalidIntensity(spec.id.clone()));
        }
    }

    Ok(Carved {
        event: Event {
            id: spec.id.clone(),
            name: spec.name.clone(),
            region,
            duration: spec.duration,
            intensity: spec.intensity,
            guard,
            outcomes,
            anchor,
            effect,
            model_fingerprint: model.fingerprint(),
        },
        warnings,
    })
}

/// First Process stage of the region, else its first stage.
fn default_anchor(region: &BTreeSet<Element>) -> Option<StageKey> {
    let stages = || {
        region.iter().filter_map(|e| match e {
            Element::Stage { key } => Some(key),
            _ => None,
        })
    };
    stages().find(|k| k.kind == StageKind::Process).or_else(|| stages().next()).cloned()
}
