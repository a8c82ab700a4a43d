use std::collections::BTreeSet;
use std::fmt::Write;

use crate::eventing::Event;
use crate::model::{validate, Element, MachineId, Model, StageKey};

use super::{ExportError, RenderOptions};

const HIGHLIGHT: &str = "color=red, penwidth=2";

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n"))
}

fn node_id(model: &Model, key: &StageKey) -> String {
    quote(&model.stage_path(key))
}

fn check(model: &Model) -> Result<(), ExportError> {
    let report = validate(model);
    if report.is_empty() {
        Ok(())
    } else {
        Err(ExportError::InvalidModel(report))
    }
}

/// Machines as nested clusters, stages as nodes, flows solid, triggers dashed.
pub fn to_dot(model: &Model, options: &RenderOptions) -> Result<String, ExportError> {
    check(model)?;
    Ok(render(model, options, &BTreeSet::new(), None))
}

/// Like [`to_dot`], drawing the regions of `options.highlight_events`
/// (looked up in `events`) in red.
pub fn to_dot_highlighted(model: &Model, events: &[Event], options: &RenderOptions) -> Result<String, ExportError> {
    check(model)?;
    let mut lit = BTreeSet::new();
    for id in &options.highlight_events {
        let ev = events.iter().find(|e| &e.id == id).ok_or_else(|| ExportError::UnknownEvent(id.clone()))?;
        if ev.model_fingerprint != model.fingerprint() {
            return Err(ExportError::RegionMismatch(ev.id.clone()));
        }
        lit.extend(ev.region.iter().cloned());
    }
    Ok(render(model, options, &lit, None))
}

/// The model with the event's region highlighted, plus a cluster holding
/// the event's `time` and `event` submachines.
pub fn event_overlay(model: &Model, event: &Event, options: &RenderOptions) -> Result<String, ExportError> {
    check(model)?;
    if event.model_fingerprint != model.fingerprint() {
        return Err(ExportError::RegionMismatch(event.id.clone()));
    }
    Ok(render(model, options, &event.region, Some(event)))
}

fn render(model: &Model, options: &RenderOptions, lit: &BTreeSet<Element>, overlay: Option<&Event>) -> String {
    let mut out = String::from("digraph tm {\n  compound=true;\n  node [shape=box];\n");
    for root in model.roots() {
        cluster(model, root, 1, options, lit, &mut out);
    }
    for (i, f) in model.flows.iter().enumerate() {
        let (Ok(a), Ok(b)) = (model.resolve_stage(&f.from), model.resolve_stage(&f.to)) else { continue };
        let mut attrs = Vec::new();
        let label = match (&f.guard, &f.label) {
            (Some(g), Some(l)) => Some(format!("[{g}] {l}")),
            (Some(g), None) => Some(format!("[{g}]")),
            (None, l) => l.clone(),
        };
        if let Some(l) = label {
            attrs.push(format!("label={}", quote(&l)));
        }
        if lit.contains(&Element::Flow { index: i }) {
            attrs.push(HIGHLIGHT.to_string());
        }
        edge(&mut out, &node_id(model, &a), &node_id(model, &b), &attrs);
    }
    for (i, t) in model.triggers.iter().enumerate() {
        let (Ok(a), Ok(b)) = (model.resolve_stage(&t.from), model.resolve_stage(&t.to)) else { continue };
        let mut attrs = vec!["style=dashed".to_string()];
        if let Some(l) = &t.label {
            attrs.push(format!("label={}", quote(l)));
        }
        if lit.contains(&Element::Trigger { index: i }) {
            attrs.push(HIGHLIGHT.to_string());
        }
        edge(&mut out, &node_id(model, &a), &node_id(model, &b), &attrs);
    }
    if let Some(ev) = overlay {
        let title = format!("event {}: {}", ev.id, ev.name);
        writeln!(out, "  subgraph {} {{", quote(&format!("cluster_event_{}", ev.id))).unwrap();
        writeln!(out, "    label={};", quote(&title)).unwrap();
        let time = match ev.duration {
            1 => "time\n1 period".to_string(),
            d => format!("time\n{d} periods"),
        };
        writeln!(out, "    \"time\" [label={}, shape=ellipse];", quote(&time)).unwrap();
        let mut label = "event".to_string();
        if let Some(x) = ev.intensity {
            write!(label, "\nintensity {x}").unwrap();
        }
        writeln!(out, "    \"event\" [label={}, shape=ellipse];", quote(&label)).unwrap();
        out.push_str("  }\n");
        if let Some(anchor) = &ev.anchor {
            let target = node_id(model, anchor);
            edge(&mut out, "\"time\"", &target, &["style=dotted".to_string()]);
            edge(&mut out, "\"event\"", &target, &["style=dotted".to_string()]);
        }
    }
    out.push_str("}\n");
    out
}

fn edge(out: &mut String, a: &str, b: &str, attrs: &[String]) {
    if attrs.is_empty() {
        writeln!(out, "  {a} -> {b};").unwrap();
    } else {
        writeln!(out, "  {a} -> {b} [{}];", attrs.join(", ")).unwrap();
    }
}

fn cluster(
    model: &Model,
    id: MachineId,
    depth: usize,
    options: &RenderOptions,
    lit: &BTreeSet<Element>,
    out: &mut String,
) {
    let pad = "  ".repeat(depth);
    let m = model.machine(id);
    let path = model.machine_path(id);
    writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{path}"))).unwrap();
    writeln!(out, "{pad}  label={};", quote(&m.name)).unwrap();
    if lit.contains(&Element::Machine { id }) {
        writeln!(out, "{pad}  {};", HIGHLIGHT.replace(", ", "; ")).unwrap();
    }
    for st in &m.stages {
        let key = StageKey { machine: id, kind: st.kind, lane: st.lane.clone() };
        let mut label = st.kind.title().to_string();
        if options.show_lanes && !st.lane.is_default() {
            write!(label, "\n{}", st.lane).unwrap();
        }
        if let Some(q) = st.queue {
            write!(label, "\nqueue {q}").unwrap();
        }
        if let Some(flag) = &st.state {
            write!(label, "\nstate {flag}").unwrap();
        }
        let mut attrs = vec![format!("label={}", quote(&label))];
        if lit.contains(&Element::Stage { key: key.clone() }) {
            attrs.push(HIGHLIGHT.to_string());
        }
        writeln!(out, "{pad}  {} [{}];", node_id(model, &key), attrs.join(", ")).unwrap();
    }
    for &c in &m.submachines {
        cluster(model, c, depth + 1, options, lit, out);
    }
    writeln!(out, "{pad}}}").unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    #[test]
    fn one_trigger_one_dashed_edge() {
        let m = parse_model(
            "machine A { process; release; transfer; } machine B { transfer; receive; process; }
             flow A.process -> A.release; flow A.release -> A.transfer; flow A.transfer -> B.transfer;
             flow B.transfer -> B.receive; flow B.receive -> B.process;
             trigger A.process -.-> B.process;",
        )
        .unwrap();
        let dot = to_dot(&m, &RenderOptions::default()).unwrap();
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert!(dot.contains("subgraph \"cluster_A\""));
        assert!(dot.contains("\"A.process@default\" [label=\"Process\"]"));
        assert_eq!(dot, to_dot(&m, &RenderOptions::default()).unwrap());
    }
}
