//! Text renderings: Graphviz DOT for models and event overlays, CSV and
//! Markdown for schedule tables. All output is deterministic.

mod dot;
mod table;

use thiserror::Error;

use crate::model::ValidationReport;

pub use dot::{event_overlay, to_dot, to_dot_highlighted};
pub use table::{event_list, table_render};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Dot,
    Csv,
    Markdown,
}

impl Format {
    pub fn from_name(s: &str) -> Option<Format> {
        match s {
            "dot" => Some(Format::Dot),
            "csv" => Some(Format::Csv),
            "markdown" | "md" => Some(Format::Markdown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderOptions {
    /// Append the lane sort to stage labels.
    pub show_lanes: bool,
    /// Events whose regions are drawn highlighted.
    pub highlight_events: Vec<String>,
    pub format: Format,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("INVALID_MODEL: model has {} violation(s)", .0.violations.len())]
    InvalidModel(ValidationReport),
    #[error("REGION_MISMATCH: event `{0}` was not carved from this model")]
    RegionMismatch(String),
    #[error("UNKNOWN_EVENT: no event `{0}` to highlight")]
    UnknownEvent(String),
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        match self {
            ExportError::InvalidModel(_) => "INVALID_MODEL",
            ExportError::RegionMismatch(_) => "REGION_MISMATCH",
            ExportError::UnknownEvent(_) => "UNKNOWN_EVENT",
        }
    }
}
