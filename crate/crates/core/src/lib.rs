//! Thinging machine models: construction, validation, a text format,
//! events and chronologies, a discrete-period simulator, and exporters.

pub mod batch;
pub mod dsl;
pub mod eventing;
pub mod model;
pub mod export;
pub mod sim;
