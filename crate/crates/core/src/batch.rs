//! Independent work over many models or many runs.
//!
//! With the `parallel` feature (on by default) these spread over a rayon
//! thread pool; without it they run in order on the calling thread. Results
//! come back in input order either way, so output does not depend on the
//! feature.

use crate::dsl::{parse, serialize_document, Document, DslError, ParseError};
use crate::eventing::Chronology;
use crate::model::{validate, Model, ValidationReport};
use crate::sim::{simulate, SimConfig, SimError, Trace};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn validate_many(models: &[Model]) -> Vec<ValidationReport> {
    map(models, validate)
}

/// Sequential [`validate_many`], available regardless of features.
pub fn validate_many_seq(models: &[Model]) -> Vec<ValidationReport> {
    models.iter().map(validate).collect()
}

/// One run per configuration.
pub fn simulate_many(model: &Model, chron: &Chronology, configs: &[SimConfig]) -> Vec<Result<Trace, SimError>> {
    map(configs, |c| simulate(model, chron, c.clone()))
}

pub fn simulate_many_seq(model: &Model, chron: &Chronology, configs: &[SimConfig]) -> Vec<Result<Trace, SimError>> {
    configs.iter().map(|c| simulate(model, chron, c.clone())).collect()
}

#[derive(Debug)]
pub enum RoundTripError {
    Serialize(DslError),
    Reparse(Vec<ParseError>),
    Changed,
    NotFixpoint,
}

/// serialize, parse, compare structure, serialize again and compare text.
pub fn round_trip(doc: &Document) -> Result<String, RoundTripError> {
    let text = serialize_document(doc).map_err(RoundTripError::Serialize)?;
    let back = parse(&text).map_err(RoundTripError::Reparse)?;
    if !back.model.structurally_eq(&doc.model) || back.event_blocks != doc.event_blocks || back.simcfg != doc.simcfg {
        return Err(RoundTripError::Changed);
    }
    let again = serialize_document(&back).map_err(RoundTripError::Serialize)?;
    if again != text {
        return Err(RoundTripError::NotFixpoint);
    }
    Ok(text)
}

pub fn round_trip_many(docs: &[Document]) -> Vec<Result<String, RoundTripError>> {
    map(docs, round_trip)
}

pub fn round_trip_many_seq(docs: &[Document]) -> Vec<Result<String, RoundTripError>> {
    docs.iter().map(round_trip).collect()
}
