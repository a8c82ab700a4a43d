use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::Event;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChronologyEdge {
    pub from: String,
    pub to: String,
    /// Guard outcome selecting this edge; `None` on unconditional edges.
    pub outcome: Option<String>,
}

impl ChronologyEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> ChronologyEdge {
        ChronologyEdge { from: from.into(), to: to.into(), outcome: None }
    }

    pub fn on(mut self, outcome: impl Into<String>) -> ChronologyEdge {
        self.outcome = Some(outcome.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChronologyError {
    #[error("UNKNOWN_EVENT: `{0}` is not a declared event")]
    UnknownEvent(String),
    #[error("UNREACHABLE_EVENT: {} cannot be reached from the initial event", .0.join(", "))]
    UnreachableEvent(Vec<String>),
    #[error("NONEXHAUSTIVE_BRANCH: event `{event}`: {detail}")]
    NonexhaustiveBranch { event: String, detail: String },
    #[error("DUPLICATE_EVENT: `{0}` is declared twice")]
    DuplicateEvent(String),
}

impl ChronologyError {
    pub fn code(&self) -> &'static str {
        match self {
            ChronologyError::UnknownEvent(_) => "UNKNOWN_EVENT",
            ChronologyError::UnreachableEvent(_) => "UNREACHABLE_EVENT",
            ChronologyError::NonexhaustiveBranch { .. } => "NONEXHAUSTIVE_BRANCH",
            ChronologyError::DuplicateEvent(_) => "DUPLICATE_EVENT",
        }
    }
}

/// A directed graph over events, entered at `initial`. Cycles model rework
/// loops. An event with no outgoing edge ends the chronology.
#[derive(Debug, Clone, PartialEq)]
pub struct Chronology {
    events: Vec<Event>,
    index: BTreeMap<String, usize>,
    edges: Vec<ChronologyEdge>,
    initial: String,
    name: String,
}

impl Chronology {
    /// Checks the edges against the events and builds the chronology.
    ///
    /// A guarded event must have exactly one outgoing edge per declared
    /// outcome. An unguarded event may have at most one, unlabeled.
    pub fn build(
        events: Vec<Event>,
        edges: Vec<ChronologyEdge>,
        initial: &str,
    ) -> Result<Chronology, ChronologyError> {
        let mut index = BTreeMap::new();
        for (i, e) in events.iter().enumerate() {
            if index.insert(e.id.clone(), i).is_some() {
                return Err(ChronologyError::DuplicateEvent(e.id.clone()));
            }
        }
        if !index.contains_key(initial) {
            return Err(ChronologyError::UnknownEvent(initial.to_string()));
        }
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !index.contains_key(end) {
                    return Err(ChronologyError::UnknownEvent(end.clone()));
                }
            }
        }

        for ev in &events {
            let out: Vec<&ChronologyEdge> = edges.iter().filter(|e| e.from == ev.id).collect();
            let branch_err = |detail: String| ChronologyError::NonexhaustiveBranch {
                event: ev.id.clone(),
                detail,
            };
            match &ev.guard {
                None => {
                    if out.len() > 1 {
                        return Err(branch_err(format!(
                            "{} outgoing edges but no guard to choose between them",
                            out.len()
                        )));
                    }
                    if let Some(label) = out.iter().find_map(|e| e.outcome.as_ref()) {
                        return Err(branch_err(format!("edge labeled `{label}` but the event has no guard")));
                    }
                }
                Some(guard) if !out.is_empty() => {
                    for e in &out {
                        match &e.outcome {
                            None => {
                                return Err(branch_err(format!(
                                    "edge to `{}` lacks an outcome of guard `{guard}`",
                                    e.to
                                )))
                            }
                            Some(o) if !ev.outcomes.contains(o) => {
                                return Err(branch_err(format!("`{o}` is not an outcome of guard `{guard}`")))
                            }
                            _ => {}
                        }
                    }
                    for o in &ev.outcomes {
                        let n = out.iter().filter(|e| e.outcome.as_ref() == Some(o)).count();
                        if n != 1 {
                            return Err(branch_err(format!(
                                "outcome `{o}` of guard `{guard}` labels {n} edges, expected exactly 1"
                            )));
                        }
                    }
                }
                // a guarded terminal event: the guard is evaluated but routing ends
                Some(_) => {}
            }
        }

        let chron = Chronology { events, index, edges, initial: initial.to_string(), name: String::new() };
        let reachable = chron.reachable();
        let unreachable: Vec<String> =
            chron.events.iter().filter(|e| !reachable.contains(&e.id)).map(|e| e.id.clone()).collect();
        if !unreachable.is_empty() {
            return Err(ChronologyError::UnreachableEvent(unreachable));
        }
        Ok(chron)
    }

    fn reachable(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.initial.clone()]);
        while let Some(id) = queue.pop_front() {
            if !seen.insert(id.clone()) {
                continue;
            }
            for e in self.edges.iter().filter(|e| e.from == id) {
                queue.push_back(e.to.clone());
            }
        }
        seen
    }

    pub fn named(mut self, name: impl Into<String>) -> Chronology {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> &Event {
        &self.events[self.index[&self.initial]]
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn edges(&self) -> &[ChronologyEdge] {
        &self.edges
    }

    pub fn event(&self, id: &str) -> Option<&Event> {
        self.index.get(id).map(|&i| &self.events[i])
    }

    /// Position of the event in declaration order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a ChronologyEdge> + 'a {
        self.edges.iter().filter(move |e| e.from == id)
    }

    /// Number of elementary cycles (each rework loop counts once).
    pub fn cycle_count(&self) -> usize {
        let n = self.events.len();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut v: Vec<usize> = self
                    .successors(&self.events[i].id)
                    .map(|e| self.index[&e.to])
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        // count simple cycles whose smallest vertex is `start`
        fn walk(adj: &[Vec<usize>], start: usize, v: usize, on_path: &mut Vec<bool>) -> usize {
            let mut count = 0;
            for &w in &adj[v] {
                if w == start {
                    count += 1;
                } else if w > start && !on_path[w] {
                    on_path[w] = true;
                    count += walk(adj, start, w, on_path);
                    on_path[w] = false;
                }
            }
            count
        }
        (0..n)
            .map(|s| {
                let mut on_path = vec![false; n];
                on_path[s] = true;
                walk(&adj, s, s, &mut on_path)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ev(id: &str, guard: bool) -> Event {
        Event {
            id: id.into(),
            name: id.into(),
            region: BTreeSet::new(),
            duration: 1,
            intensity: None,
            guard: guard.then(|| "g".to_string()),
            outcomes: if guard { vec!["pass".into(), "fail".into()] } else { vec![] },
            anchor: None,
            effect: None,
            model_fingerprint: 0,
        }
    }

    fn car_events() -> Vec<Event> {
        vec![
            ev("E1", false),
            ev("E2", true),
            ev("E3", false),
            ev("E4", false),
            ev("E5", true),
            ev("E6", false),
            ev("E7", false),
        ]
    }

    fn car_edges() -> Vec<ChronologyEdge> {
        vec![
            ChronologyEdge::new("E1", "E2"),
            ChronologyEdge::new("E2", "E4").on("pass"),
            ChronologyEdge::new("E2", "E3").on("fail"),
            ChronologyEdge::new("E3", "E1"),
            ChronologyEdge::new("E4", "E5"),
            ChronologyEdge::new("E5", "E7").on("pass"),
            ChronologyEdge::new("E5", "E6").on("fail"),
            ChronologyEdge::new("E6", "E5"),
        ]
    }

    #[test]
    fn car_chronology_has_two_rework_loops() {
        let c = Chronology::build(car_events(), car_edges(), "E1").unwrap();
        assert_eq!(c.cycle_count(), 2);
    }

    #[test]
    fn single_event_without_edges() {
        let c = Chronology::build(vec![ev("E1", false)], vec![], "E1").unwrap();
        assert_eq!(c.cycle_count(), 0);
        assert_eq!(c.initial().id, "E1");
    }

    #[test]
    fn edge_to_undeclared_event() {
        let mut edges = car_edges();
        edges.push(ChronologyEdge::new("E7", "E9"));
        let err = Chronology::build(car_events(), edges, "E1").unwrap_err();
        assert_eq!(err, ChronologyError::UnknownEvent("E9".into()));
    }

    #[test]
    fn missing_outcome_is_nonexhaustive() {
        let edges: Vec<_> = car_edges().into_iter().filter(|e| e.outcome.as_deref() != Some("fail") || e.from != "E5").collect();
        let mut events = car_events();
        events.retain(|e| e.id != "E6");
        let edges: Vec<_> = edges.into_iter().filter(|e| e.from != "E6").collect();
        let err = Chronology::build(events, edges, "E1").unwrap_err();
        assert_eq!(err.code(), "NONEXHAUSTIVE_BRANCH");
    }

    #[test]
    fn unguarded_fork_is_rejected() {
        let events = vec![ev("A", false), ev("B", false), ev("C", false)];
        let edges = vec![ChronologyEdge::new("A", "B"), ChronologyEdge::new("A", "C")];
        assert_eq!(Chronology::build(events, edges, "A").unwrap_err().code(), "NONEXHAUSTIVE_BRANCH");
    }

    #[test]
    fn unreachable_events_are_rejected_not_pruned() {
        let events = vec![ev("A", false), ev("B", false), ev("C", false)];
        let edges = vec![ChronologyEdge::new("A", "B")];
        assert_eq!(
            Chronology::build(events, edges, "A").unwrap_err(),
            ChronologyError::UnreachableEvent(vec!["C".into()])
        );
    }
}
