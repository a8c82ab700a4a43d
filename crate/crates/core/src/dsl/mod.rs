//! The `.tm` text format: a parser producing a [`Document`] (model, event
//! blocks, simulation settings) and a canonical printer.
//!
//! The parser checks syntax only. A file that parses may still describe an
//! invalid model; run [`crate::model::validate`] on the result.

mod document;
mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::eventing::{ChronologyEdge, EventSpec};
use crate::model::{Model, SourceSpan, ValidationReport};
use crate::sim::SimConfig;

pub use document::DocumentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParseErrorCode {
    UnexpectedToken,
    UnclosedBlock,
    DuplicateName,
    UnknownKeyword,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::UnexpectedToken => "UNEXPECTED_TOKEN",
            ParseErrorCode::UnclosedBlock => "UNCLOSED_BLOCK",
            ParseErrorCode::DuplicateName => "DUPLICATE_NAME",
            ParseErrorCode::UnknownKeyword => "UNKNOWN_KEYWORD",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}:{} {code} {message}", span.line, span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub code: ParseErrorCode,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(code: ParseErrorCode, span: SourceSpan, message: impl Into<String>) -> ParseError {
        let message = message.into();
        debug_assert!(!message.is_empty());
        ParseError { span, code, message }
    }
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("INVALID_MODEL: model has {} violation(s)", .0.violations.len())]
    InvalidModel(ValidationReport),
}

/// A named chronology as declared inside an `events` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChronologySpec {
    pub name: String,
    pub initial: String,
    pub edges: Vec<ChronologyEdge>,
}

/// An `events [name] { … }` block: one slicing of the model into events,
/// plus chronologies over those events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventBlock {
    pub name: Option<String>,
    pub events: Vec<EventSpec>,
    pub chronologies: Vec<ChronologySpec>,
}

/// Source positions of event-level declarations. Always compares equal.
#[derive(Debug, Clone, Default)]
pub struct DocSpans {
    pub events: BTreeMap<(usize, String), SourceSpan>,
    pub chronologies: BTreeMap<String, SourceSpan>,
}

impl PartialEq for DocSpans {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// Everything a `.tm` file declares.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub model: Model,
    pub event_blocks: Vec<EventBlock>,
    pub simcfg: Option<SimConfig>,
    pub spans: DocSpans,
}

/// CRLF and lone CR become LF.
pub fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Parses a whole `.tm` document, returning every recoverable error.
pub fn parse(text: &str) -> Result<Document, Vec<ParseError>> {
    let text = normalize_newlines(text);
    parser::parse_document(&text)
}

/// Parses a `.tm` document and keeps only its model.
pub fn parse_model(text: &str) -> Result<Model, Vec<ParseError>> {
    parse(text).map(|d| d.model)
}

/// Canonical text for a valid model.
pub fn serialize(model: &Model) -> Result<String, DslError> {
    check(model)?;
    Ok(printer::print_document(&Document { model: model.clone(), ..Document::default() }))
}

/// Canonical text for a document whose model is valid.
pub fn serialize_document(doc: &Document) -> Result<String, DslError> {
    check(&doc.model)?;
    Ok(printer::print_document(doc))
}

fn check(model: &Model) -> Result<(), DslError> {
    let report = crate::model::validate(model);
    if report.is_empty() {
        Ok(())
    } else {
        Err(DslError::InvalidModel(report))
    }
}
