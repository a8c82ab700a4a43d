#![allow(dead_code)]

pub mod dot;
pub mod gen;

use std::path::PathBuf;

use tmkit::dsl::{parse, Document};

pub const FIXTURES: &[&str] = &["car", "time", "color_dry", "no_queue"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.tm"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}.tm: {e}"))
}

pub fn fixture(name: &str) -> Document {
    parse(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}.tm does not parse: {e:?}"))
}

/// The allowed flow arrows, written out by hand.
pub fn oracle(from: tmkit::model::StageKind, to: tmkit::model::StageKind, same_machine: bool) -> bool {
    use tmkit::model::StageKind::{self, *};
    const SAME: &[(StageKind, StageKind)] = &[
        (Transfer, Receive),
        (Receive, Process),
        (Receive, Release),
        (Process, Release),
        (Create, Process),
        (Create, Release),
        (Release, Transfer),
    ];
    const CROSS: &[(StageKind, StageKind)] = &[(Transfer, Transfer)];
    let table = if same_machine { SAME } else { CROSS };
    table.contains(&(from, to))
}
