use std::fmt::Write;

use crate::eventing::{EventSpec, FlagEffect, SelectorItem};
use crate::model::{is_identifier, GuardKind, Lane, MachineId, Model, Scalar, StageRef};
use crate::sim::SimConfig;

use super::{ChronologySpec, Document, EventBlock};

const INDENT: &str = "  ";

pub(super) fn print_document(doc: &Document) -> String {
    let m = &doc.model;
    let mut sections: Vec<String> = Vec::new();

    let mut s = String::new();
    for sort in &m.sorts {
        write!(s, "sort {}", sort.name).unwrap();
        if let Some(r) = &sort.machine_ref {
            write!(s, " machine {r}").unwrap();
        }
        if sort.attributes.is_empty() {
            s.push_str(";\n");
        } else {
            s.push_str(" {\n");
            for (a, k) in &sort.attributes {
                writeln!(s, "{INDENT}{a}: {};", k.keyword()).unwrap();
            }
            s.push_str("}\n");
        }
    }
    sections.push(s);

    let mut s = String::new();
    for g in &m.guards {
        write!(s, "guard {} ", g.id).unwrap();
        match &g.kind {
            GuardKind::RangeCheck { attribute, min, max } => write!(s, "range {attribute} {min} {max}").unwrap(),
            GuardKind::Bernoulli(p) => write!(s, "bernoulli {p}").unwrap(),
            GuardKind::Scripted(items) => write!(s, "scripted [{}]", items.join(", ")).unwrap(),
        }
        if let Some(d) = &g.description {
            write!(s, " {}", quote(d)).unwrap();
        }
        s.push_str(";\n");
    }
    sections.push(s);

    for root in m.roots() {
        let mut s = String::new();
        machine(m, root, 0, &mut s);
        sections.push(s);
    }

    let mut s = String::new();
    for f in &m.flows {
        write!(s, "flow {} -> {}", stage_ref(&f.from), stage_ref(&f.to)).unwrap();
        if let Some(g) = &f.guard {
            write!(s, " guard {g}").unwrap();
        }
        if let Some(l) = &f.label {
            write!(s, " label {}", quote(l)).unwrap();
        }
        s.push_str(";\n");
    }
    sections.push(s);

    let mut s = String::new();
    for t in &m.triggers {
        write!(s, "trigger {} -.-> {}", stage_ref(&t.from), stage_ref(&t.to)).unwrap();
        if let Some(l) = &t.label {
            write!(s, " label {}", quote(l)).unwrap();
        }
        s.push_str(";\n");
    }
    sections.push(s);

    for b in &doc.event_blocks {
        sections.push(events_block(b));
    }
    if let Some(cfg) = &doc.simcfg {
        sections.push(simcfg(cfg));
    }

    sections.retain(|s| !s.is_empty());
    sections.join("\n")
}

fn machine(m: &Model, id: MachineId, depth: usize, out: &mut String) {
    let pad = INDENT.repeat(depth);
    let inner = INDENT.repeat(depth + 1);
    let mach = m.machine(id);
    writeln!(out, "{pad}machine {} {{", mach.name).unwrap();
    for st in &mach.stages {
        write!(out, "{inner}{}", st.kind.keyword()).unwrap();
        if !st.lane.is_default() {
            write!(out, " lane {}", quote(st.lane.as_str())).unwrap();
        }
        if let Some(q) = st.queue {
            write!(out, " queue {q}").unwrap();
        }
        if let Some(flag) = &st.state {
            write!(out, " state {flag}").unwrap();
        }
        out.push_str(";\n");
    }
    for &c in &mach.submachines {
        machine(m, c, depth + 1, out);
    }
    writeln!(out, "{pad}}}").unwrap();
}

fn lane(l: &Lane) -> String {
    if is_identifier(l.as_str()) {
        l.as_str().to_string()
    } else {
        quote(l.as_str())
    }
}

fn stage_ref(r: &StageRef) -> String {
    let mut s = format!("{}.{}", r.machine, r.kind.keyword());
    if let Some(l) = &r.lane {
        s.push('@');
        s.push_str(&lane(l));
    }
    s
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn selector_item(item: &SelectorItem) -> String {
    match item {
        SelectorItem::Path(p) if p.is_empty() => "*".to_string(),
        SelectorItem::Path(p) => match p.split_once('@') {
            Some((path, l)) => format!("{path}@{}", lane(&Lane::new(l))),
            None => p.clone(),
        },
        SelectorItem::Flow(a, b) => format!("{} -> {}", stage_ref(a), stage_ref(b)),
        SelectorItem::Trigger(a, b) => format!("{} -.-> {}", stage_ref(a), stage_ref(b)),
    }
}

fn event(e: &EventSpec, out: &mut String) {
    let i2 = INDENT.repeat(2);
    writeln!(out, "{INDENT}event {} {} {{", e.id, quote(&e.name)).unwrap();
    if !e.selector.items.is_empty() {
        let items: Vec<String> = e.selector.items.iter().map(selector_item).collect();
        writeln!(out, "{i2}region {};", items.join(", ")).unwrap();
    }
    writeln!(out, "{i2}duration {};", e.duration).unwrap();
    if let Some(x) = e.intensity {
        writeln!(out, "{i2}intensity {x};").unwrap();
    }
    if let Some(g) = &e.guard {
        writeln!(out, "{i2}guard {g};").unwrap();
    }
    if let Some(a) = &e.anchor {
        writeln!(out, "{i2}at {};", stage_ref(a)).unwrap();
    }
    match &e.effect {
        Some(FlagEffect::Set(p)) => writeln!(out, "{i2}sets {p};").unwrap(),
        Some(FlagEffect::Clear(p)) => writeln!(out, "{i2}clears {p};").unwrap(),
        None => {}
    }
    writeln!(out, "{INDENT}}}").unwrap();
}

fn chronology(c: &ChronologySpec, out: &mut String) {
    writeln!(out, "{INDENT}chronology {} initial {} {{", c.name, c.initial).unwrap();
    for e in &c.edges {
        write!(out, "{INDENT}{INDENT}{} -> {}", e.from, e.to).unwrap();
        if let Some(o) = &e.outcome {
            write!(out, " {o}").unwrap();
        }
        out.push_str(";\n");
    }
    writeln!(out, "{INDENT}}}").unwrap();
}

fn events_block(b: &EventBlock) -> String {
    let mut out = String::new();
    match &b.name {
        Some(n) => writeln!(out, "events {n} {{").unwrap(),
        None => out.push_str("events {\n"),
    }
    for e in &b.events {
        event(e, &mut out);
    }
    for (i, c) in b.chronologies.iter().enumerate() {
        if i > 0 || !b.events.is_empty() {
            out.push('\n');
        }
        chronology(c, &mut out);
    }
    out.push_str("}\n");
    out
}

fn scalar(v: &Scalar) -> String {
    match v {
        Scalar::Int(i) => i.to_string(),
        Scalar::Bool(b) => b.to_string(),
        Scalar::Str(s) => quote(s),
    }
}

fn simcfg(cfg: &SimConfig) -> String {
    let mut out = String::from("simcfg {\n");
    if let Some(c) = &cfg.chronology {
        writeln!(out, "{INDENT}chronology {c};").unwrap();
    }
    writeln!(out, "{INDENT}horizon {};", cfg.horizon).unwrap();
    writeln!(out, "{INDENT}seed {};", cfg.seed).unwrap();
    if let Some(s) = &cfg.sort {
        writeln!(out, "{INDENT}sort {s};").unwrap();
    }
    for a in &cfg.arrivals {
        write!(out, "{INDENT}arrivals {} {}", a.period, a.count).unwrap();
        if a.attributes.is_empty() {
            out.push_str(";\n");
        } else {
            out.push_str(" {\n");
            for (k, v) in &a.attributes {
                writeln!(out, "{INDENT}{INDENT}{k} = {};", scalar(v)).unwrap();
            }
            writeln!(out, "{INDENT}}}").unwrap();
        }
    }
    for (g, outcomes) in &cfg.scripts {
        writeln!(out, "{INDENT}script {g} [{}];", outcomes.join(", ")).unwrap();
    }
    for (m, q) in &cfg.queues {
        writeln!(out, "{INDENT}queue {m} {q};").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse, serialize_document};

    const SRC: &str = r#"
sort car { color: string; }
guard ok bernoulli 0.5 "say \"hi\"";
machine M { receive lane car queue 2; process lane car state busy; release lane car;
  machine Sub { process; } }
flow M.receive@car -> M.process@car;
flow M.process@car -> M.release@car guard ok label "after";
trigger M.process@car -.-> M.Sub.process;
events {
  event E1 "go" { region M.process@car, M.receive@car -> M.process@car; sets M.busy; duration 0; }
  event E2 "all" { region *; guard ok; }
  chronology c initial E1 { E1 -> E2; }
}
simcfg { arrivals 0 3 { color = "red"; } script ok [pass, fail]; queue M 5; }
"#;

    #[test]
    fn printed_text_is_a_fixed_point() {
        let doc = parse(SRC).unwrap();
        let text = serialize_document(&doc).unwrap();
        let again = parse(&text).unwrap();
        assert_eq!(again, doc);
        assert_eq!(serialize_document(&again).unwrap(), text);
    }

    #[test]
    fn layout() {
        let text = serialize_document(&parse(SRC).unwrap()).unwrap();
        assert!(text.contains("machine M {\n  receive lane \"car\" queue 2;\n"));
        assert!(text.contains("  machine Sub {\n    process;\n  }\n}\n"));
        assert!(text.contains("guard ok bernoulli 0.5 \"say \\\"hi\\\"\";\n"));
        assert!(text.contains("    region M.process@car, M.receive@car -> M.process@car;\n"));
        assert!(text.contains("  arrivals 0 3 {\n    color = \"red\";\n  }\n"));
        assert!(!text.contains("\n\n\n"));
    }
}
