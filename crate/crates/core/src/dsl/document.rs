use thiserror::Error;

use crate::eventing::{carve_event, Carved, Chronology, ChronologyError, Event, EventError};
use crate::model::SourceSpan;

use super::{ChronologySpec, Document};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Chronology(#[from] ChronologyError),
    #[error("NO_CHRONOLOGY: the file declares no chronology")]
    NoChronology,
    #[error("UNKNOWN_CHRONOLOGY: no chronology named `{0}`")]
    UnknownChronology(String),
}

impl DocumentError {
    pub fn code(&self) -> &'static str {
        match self {
            DocumentError::Event(e) => e.code(),
            DocumentError::Chronology(e) => e.code(),
            DocumentError::NoChronology => "NO_CHRONOLOGY",
            DocumentError::UnknownChronology(_) => "UNKNOWN_CHRONOLOGY",
        }
    }
}

impl Document {
    /// Every chronology with the index of its block, in declaration order.
    pub fn chronology_specs(&self) -> impl Iterator<Item = (usize, &ChronologySpec)> {
        self.event_blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.chronologies.iter().map(move |c| (i, c)))
    }

    /// Carves every event of block `block`, in declaration order.
    pub fn carve_block(&self, block: usize) -> Result<Vec<Carved>, EventError> {
        self.event_blocks[block].events.iter().map(|e| carve_event(&self.model, e)).collect()
    }

    /// Builds the chronology named `name`, else the one chosen by the
    /// `simcfg` block, else the first declared.
    pub fn chronology(&self, name: Option<&str>) -> Result<Chronology, DocumentError> {
        let wanted = name.or(self.simcfg.as_ref().and_then(|c| c.chronology.as_deref()));
        let (block, spec) = match wanted {
            Some(n) => self
                .chronology_specs()
                .find(|(_, c)| c.name == n)
                .ok_or_else(|| DocumentError::UnknownChronology(n.to_string()))?,
            None => self.chronology_specs().next().ok_or(DocumentError::NoChronology)?,
        };
        self.build(block, spec)
    }

    fn build(&self, block: usize, spec: &ChronologySpec) -> Result<Chronology, DocumentError> {
        let decl = &self.event_blocks[block].events;
        let mentioned = |id: &str| {
            spec.initial == id || spec.edges.iter().any(|e| e.from == id || e.to == id)
        };
        for id in std::iter::once(&spec.initial).chain(spec.edges.iter().flat_map(|e| [&e.from, &e.to])) {
            if !decl.iter().any(|e| &e.id == id) {
                return Err(ChronologyError::UnknownEvent(id.clone()).into());
            }
        }
        let events: Vec<Event> = decl
            .iter()
            .filter(|e| mentioned(&e.id))
            .map(|e| carve_event(&self.model, e).map(|c| c.event))
            .collect::<Result<_, _>>()?;
        Ok(Chronology::build(events, spec.edges.clone(), &spec.initial)?.named(&spec.name))
    }

    /// Carves every event and builds every chronology, collecting problems
    /// with the position of the declaration they concern.
    pub fn check_events(&self) -> Vec<(Option<SourceSpan>, DocumentError)> {
        let mut out = Vec::new();
        for (bi, b) in self.event_blocks.iter().enumerate() {
            for e in &b.events {
                if let Err(err) = carve_event(&self.model, e) {
                    out.push((self.spans.events.get(&(bi, e.id.clone())).copied(), err.into()));
                }
            }
        }
        for (bi, spec) in self.chronology_specs() {
            if let Err(err) = self.build(bi, spec) {
                if matches!(err, DocumentError::Event(_)) {
                    continue;
                }
                out.push((self.spans.chronologies.get(&spec.name).copied(), err));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    const SRC: &str = r#"
machine M { create; process; release; }
flow M.create -> M.process;
flow M.process -> M.release;
events one {
  event A "make" { region M.create; }
  event B "work" { region M.process, M.release; }
  event C "unused" { region M; }
  chronology first initial A { A -> B; }
}
events two {
  event X "all" { region *; }
  chronology second initial X { }
}
"#;

    #[test]
    fn chronology_uses_only_mentioned_events() {
        let doc = parse(SRC).unwrap();
        let c = doc.chronology(None).unwrap();
        assert_eq!(c.events().len(), 2);
        let c = doc.chronology(Some("second")).unwrap();
        assert_eq!(c.initial().id, "X");
        assert_eq!(doc.chronology(Some("third")).unwrap_err().code(), "UNKNOWN_CHRONOLOGY");
        assert!(doc.check_events().is_empty());
    }

    #[test]
    fn problems_carry_positions() {
        let src = SRC.replace("region M.create;", "region M.receive;").replace("A -> B;", "A -> B; B -> Q;");
        let doc = parse(&src).unwrap();
        let problems = doc.check_events();
        let codes: Vec<_> = problems.iter().map(|(_, e)| e.code()).collect();
        assert_eq!(codes, vec!["PATH_NOT_FOUND", "UNKNOWN_EVENT"]);
        assert_eq!(problems[0].0.unwrap().line, 6);
    }
}
