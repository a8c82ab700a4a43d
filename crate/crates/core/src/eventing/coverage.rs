use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Element, Model};

use super::Event;

/// Which model elements a set of events leaves out, and which elements
/// belong to more than one event. Overlap is allowed: a sub-event may be
/// folded into a larger one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverageReport {
    pub uncovered: BTreeSet<Element>,
    pub overlaps: BTreeMap<Element, Vec<String>>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.uncovered.is_empty()
    }
}

pub fn check_coverage(model: &Model, events: &[Event]) -> CoverageReport {
    let mut owners: BTreeMap<Element, Vec<String>> = BTreeMap::new();
    for e in events {
        for el in &e.region {
            owners.entry(el.clone()).or_default().push(e.id.clone());
        }
    }
    let uncovered = model.elements().into_iter().filter(|el| !owners.contains_key(el)).collect();
    let overlaps = owners.into_iter().filter(|(_, ids)| ids.len() > 1).collect();
    CoverageReport { uncovered, overlaps }
}
