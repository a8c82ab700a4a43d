//! Seeded generator of valid models and whole documents.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmkit::dsl::{ChronologySpec, Document, EventBlock};
use tmkit::eventing::{ChronologyEdge, EventSpec, FlagEffect, RegionSelector, SelectorItem};
use tmkit::model::{
    legal_flow, FlowArc, Guard, GuardKind, Lane, MachineId, Model, QueueCapacity, Scalar, ScalarKind, Stage,
    StageKind, StageRef, ThingSort, TriggerArc, DEFAULT_LANE,
};
use tmkit::sim::{Arrival, SimConfig};

const KINDS: [StageKind; 5] =
    [StageKind::Create, StageKind::Process, StageKind::Receive, StageKind::Release, StageKind::Transfer];

const AWKWARD: &[&str] = &["plain", "with \"quotes\"", "back\\slash", "two\nlines", "tab\there", "ünïcode", ""];

const OUTCOMES: &[&str] = &["pass", "fail", "retry", "skip"];

fn text(rng: &mut ChaCha8Rng) -> String {
    let a = AWKWARD.choose(rng).unwrap();
    let b = AWKWARD.choose(rng).unwrap();
    format!("{a}{b}")
}

struct StageInfo {
    machine: MachineId,
    kind: StageKind,
    lane: Lane,
}

fn stage_ref(m: &Model, s: &StageInfo, rng: &mut ChaCha8Rng) -> StageRef {
    let r = StageRef::new(m.machine_path(s.machine), s.kind);
    if !s.lane.is_default() || rng.random_bool(0.2) {
        r.on_lane(s.lane.as_str())
    } else {
        r
    }
}

fn stages(m: &Model) -> Vec<StageInfo> {
    let mut out = Vec::new();
    for (i, mach) in m.machines.iter().enumerate() {
        for s in &mach.stages {
            out.push(StageInfo { machine: MachineId(i), kind: s.kind, lane: s.lane.clone() });
        }
    }
    out
}

/// A model that validates without errors.
pub fn model(rng: &mut ChaCha8Rng) -> Model {
    let mut m = Model::new();

    let n_sorts = rng.random_range(0..3);
    for i in 0..n_sorts {
        let mut s = ThingSort::new(format!("s{i}"));
        for a in 0..rng.random_range(0..3) {
            let k = *[ScalarKind::Int, ScalarKind::String, ScalarKind::Bool].choose(rng).unwrap();
            s.attributes.push((format!("a{a}"), k));
        }
        m.sorts.push(s);
    }

    for i in 0..rng.random_range(0..4) {
        let kind = match rng.random_range(0..3) {
            0 => {
                let min = rng.random_range(-20..20);
                GuardKind::RangeCheck { attribute: format!("a{}", rng.random_range(0..3)), min, max: min + rng.random_range(0..40) }
            }
            1 => GuardKind::Bernoulli(rng.random_range(0..=8) as f64 / 8.0),
            _ => {
                let n = rng.random_range(1..5);
                GuardKind::Scripted((0..n).map(|_| OUTCOMES.choose(rng).unwrap().to_string()).collect())
            }
        };
        let mut g = Guard::new(format!("g{i}"), kind);
        if rng.random_bool(0.5) {
            g.description = Some(text(rng));
        }
        m.guards.push(g);
    }

    let lanes: Vec<String> =
        std::iter::once(DEFAULT_LANE.to_string()).chain(m.sorts.iter().map(|s| s.name.clone())).collect();
    let n_machines = rng.random_range(1..7);
    for i in 0..n_machines {
        let parent = if i > 0 && rng.random_bool(0.4) { Some(MachineId(rng.random_range(0..i))) } else { None };
        let id = m.add_machine(format!("M{i}"), parent);
        let mut combos: Vec<(StageKind, String)> =
            KINDS.iter().flat_map(|k| lanes.iter().map(move |l| (*k, l.clone()))).collect();
        let want = rng.random_range(1..=combos.len().min(6));
        let mut flags = 0;
        for _ in 0..want {
            let (kind, lane) = combos.swap_remove(rng.random_range(0..combos.len()));
            let mut st = Stage::new(kind).on_lane(lane);
            if kind == StageKind::Receive && rng.random_bool(0.5) {
                st = st.with_queue(if rng.random_bool(0.3) {
                    QueueCapacity::Unbounded
                } else {
                    QueueCapacity::Bounded(rng.random_range(1..6))
                });
            }
            if rng.random_bool(0.25) {
                st = st.with_state(format!("f{flags}"));
                flags += 1;
            }
            m.add_stage(id, st);
        }
    }

    for s in &mut m.sorts {
        if rng.random_bool(0.2) {
            s.machine_ref = Some(format!("M{}", rng.random_range(0..n_machines)));
        }
    }
    // machine_ref must name a path; roots only
    let roots: Vec<String> = m.roots().map(|r| m.machine_path(r)).collect();
    for s in &mut m.sorts {
        if let Some(r) = &s.machine_ref {
            if !roots.contains(r) {
                s.machine_ref = None;
            }
        }
    }

    let all = stages(&m);
    for _ in 0..rng.random_range(0..12) {
        let a = all.choose(rng).unwrap();
        let b = all.choose(rng).unwrap();
        if a.lane != b.lane || !legal_flow(a.kind, b.kind, a.machine == b.machine) {
            continue;
        }
        let mut f = FlowArc::new(stage_ref(&m, a, rng), stage_ref(&m, b, rng));
        if a.kind == StageKind::Process && !m.guards.is_empty() && rng.random_bool(0.5) {
            f.guard = Some(m.guards.choose(rng).unwrap().id.clone());
        }
        if rng.random_bool(0.3) {
            f.label = Some(text(rng));
        }
        m.add_flow(f);
    }
    for _ in 0..rng.random_range(0..4) {
        let a = all.choose(rng).unwrap();
        let b = all.choose(rng).unwrap();
        let mut t = TriggerArc::new(stage_ref(&m, a, rng), stage_ref(&m, b, rng));
        if rng.random_bool(0.3) {
            t.label = Some(text(rng));
        }
        m.add_trigger(t);
    }
    m
}

fn selector(m: &Model, rng: &mut ChaCha8Rng) -> RegionSelector {
    let all = stages(m);
    let mut items = Vec::new();
    for _ in 0..rng.random_range(0..4) {
        let item = match rng.random_range(0..6) {
            0 => SelectorItem::Path(String::new()),
            1 => SelectorItem::Path(m.machine_path(MachineId(rng.random_range(0..m.machines.len())))),
            2 => {
                let s = all.choose(rng).unwrap();
                let p = format!("{}.{}", m.machine_path(s.machine), s.kind.keyword());
                SelectorItem::Path(if rng.random_bool(0.5) { format!("{p}@{}", s.lane) } else { p })
            }
            3 if !m.flows.is_empty() => {
                let f = m.flows.choose(rng).unwrap();
                SelectorItem::Flow(f.from.clone(), f.to.clone())
            }
            4 if !m.triggers.is_empty() => {
                let t = m.triggers.choose(rng).unwrap();
                SelectorItem::Trigger(t.from.clone(), t.to.clone())
            }
            _ => SelectorItem::Path(m.machine_path(all.choose(rng).unwrap().machine)),
        };
        items.push(item);
    }
    RegionSelector { items }
}

fn flags(m: &Model) -> Vec<String> {
    let mut out = Vec::new();
    for (i, mach) in m.machines.iter().enumerate() {
        for s in &mach.stages {
            if let Some(f) = &s.state {
                out.push(format!("{}.{f}", m.machine_path(MachineId(i))));
            }
        }
    }
    out
}

fn scalar(rng: &mut ChaCha8Rng) -> Scalar {
    match rng.random_range(0..3) {
        0 => Scalar::Int(rng.random_range(-1000..1000)),
        1 => Scalar::Bool(rng.random_bool(0.5)),
        _ => Scalar::Str(text(rng)),
    }
}

/// A document around a valid model: event blocks, chronologies and settings.
/// Events are syntactically well formed but need not carve.
pub fn document(seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let m = model(rng);
    let all = stages(&m);
    let flag_paths = flags(&m);

    let mut blocks = Vec::new();
    let mut chron_names = Vec::new();
    for b in 0..rng.random_range(0..3) {
        let mut block = EventBlock { name: rng.random_bool(0.6).then(|| format!("b{b}")), ..EventBlock::default() };
        let n = rng.random_range(0..6);
        for e in 0..n {
            let mut spec = EventSpec::new(format!("E{e}"), text(rng), selector(&m, rng)).duration(rng.random_range(0..5));
            if rng.random_bool(0.3) {
                spec.intensity = Some(rng.random_range(0..40) as f64 / 4.0);
            }
            if !m.guards.is_empty() && rng.random_bool(0.3) {
                spec.guard = Some(m.guards.choose(rng).unwrap().id.clone());
            }
            if rng.random_bool(0.5) {
                let s = all.choose(rng).unwrap();
                spec.anchor = Some(stage_ref(&m, s, rng));
            }
            if !flag_paths.is_empty() && rng.random_bool(0.3) {
                let p = flag_paths.choose(rng).unwrap().clone();
                spec.effect = Some(if rng.random_bool(0.5) { FlagEffect::Set(p) } else { FlagEffect::Clear(p) });
            }
            block.events.push(spec);
        }
        if n > 0 {
            for _ in 0..rng.random_range(0..3) {
                let name = format!("c{}", chron_names.len());
                let id = |rng: &mut ChaCha8Rng| format!("E{}", rng.random_range(0..n));
                let initial = id(rng);
                let edges = (0..rng.random_range(0..6))
                    .map(|_| {
                        let e = ChronologyEdge::new(id(rng), id(rng));
                        if rng.random_bool(0.3) {
                            e.on(*OUTCOMES.choose(rng).unwrap())
                        } else {
                            e
                        }
                    })
                    .collect();
                chron_names.push(name.clone());
                block.chronologies.push(ChronologySpec { name, initial, edges });
            }
        }
        blocks.push(block);
    }

    let simcfg = rng.random_bool(0.6).then(|| {
        let mut cfg = SimConfig {
            chronology: chron_names.choose(rng).filter(|_| rng.random_bool(0.5)).cloned(),
            horizon: rng.random_range(0..60),
            seed: rng.random_range(0..u32::MAX as u64),
            sort: m.sorts.choose(rng).map(|s| s.name.clone()),
            ..SimConfig::default()
        };
        for _ in 0..rng.random_range(0..3) {
            let mut a = Arrival::new(rng.random_range(0..10), rng.random_range(0..8));
            for k in 0..rng.random_range(0..3) {
                a.attributes.insert(format!("a{k}"), scalar(rng));
            }
            cfg.arrivals.push(a);
        }
        let mut scripts = BTreeMap::new();
        for g in &m.guards {
            if rng.random_bool(0.3) {
                scripts.insert(g.id.clone(), (0..rng.random_range(1..4)).map(|_| OUTCOMES.choose(rng).unwrap().to_string()).collect());
            }
        }
        cfg.scripts = scripts;
        if rng.random_bool(0.3) {
            let p = m.machine_path(MachineId(rng.random_range(0..m.machines.len())));
            cfg.queues.insert(p, QueueCapacity::Bounded(rng.random_range(1..4)));
        }
        cfg
    });

    Document { model: m, event_blocks: blocks, simcfg, ..Document::default() }
}
