use std::collections::BTreeSet;

use crate::eventing::{ChronologyEdge, EventSpec, FlagEffect, RegionSelector, SelectorItem};
use crate::model::{
    is_valid_name, FlowArc, Guard, GuardKind, Lane, MachineId, QueueCapacity, Scalar,
    ScalarKind, SourceSpan, Stage, StageKind, StageRef, ThingSort, TriggerArc,
};
use crate::sim::{Arrival, SimConfig};

use super::lexer::{lex, Tok, Token};
use super::{ChronologySpec, Document, EventBlock, ParseError, ParseErrorCode};

/// The error has already been recorded; the caller should resynchronise.
struct Reported;

type PResult<T> = Result<T, Reported>;

const TOP_LEVEL: &[&str] = &["sort", "guard", "machine", "flow", "trigger", "events", "simcfg"];

pub(super) fn parse_document(text: &str) -> Result<Document, Vec<ParseError>> {
    let mut errors = Vec::new();
    let toks = lex(text, &mut errors);
    let mut p = Parser { toks, pos: 0, errors, doc: Document::default() };
    p.document();
    if p.errors.is_empty() {
        Ok(p.doc)
    } else {
        p.errors.sort_by_key(|e| (e.span.line, e.span.column));
        Err(p.errors)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    doc: Document,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn error(&mut self, code: ParseErrorCode, span: SourceSpan, msg: impl Into<String>) -> Reported {
        self.errors.push(ParseError::new(code, span, msg));
        Reported
    }

    fn unexpected(&mut self, expected: &str) -> Reported {
        let found = self.peek().describe();
        let span = self.span();
        self.error(ParseErrorCode::UnexpectedToken, span, format!("expected {expected}, found {found}"))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<SourceSpan> {
        if self.is_word(w) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// An identifier that is not a reserved word.
    fn name(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        if let Tok::Ident(s) = self.peek() {
            if !is_valid_name(s) {
                let msg = format!("`{s}` cannot be used as a {what}");
                let span = self.span();
                return Err(self.error(ParseErrorCode::UnexpectedToken, span, msg));
            }
        }
        self.ident(what)
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self, what: &str) -> PResult<i64> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn uint(&mut self, what: &str) -> PResult<u32> {
        let span = self.span();
        let v = self.int(what)?;
        u32::try_from(v).map_err(|_| {
            self.error(ParseErrorCode::UnexpectedToken, span, format!("expected {what}, found {v}"))
        })
    }

    fn number(&mut self, what: &str) -> PResult<f64> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v as f64)
            }
            Tok::Float(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn semi(&mut self) -> PResult<()> {
        self.expect(Tok::Semi).map(|_| ())
    }

    /// Skips to the end of the current statement: past the next `;` or
    /// balanced `{ … }`, stopping before a `}` that closes the enclosing block.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::LBrace => {
                    depth += 1;
                    self.bump();
                }
                Tok::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    self.bump();
                    if depth == 0 {
                        return;
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    /// Runs `item` for each statement up to the closing `}` (consumed).
    fn block(&mut self, mut item: impl FnMut(&mut Parser) -> PResult<()>) {
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return;
                }
                Tok::Eof => {
                    let span = self.span();
                    self.error(ParseErrorCode::UnclosedBlock, span, "block is not closed before end of input");
                    return;
                }
                _ => {}
            }
            let start = self.pos;
            if item(self).is_err() {
                self.recover();
            }
            if self.pos == start && !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                self.bump();
            }
        }
    }

    fn unknown_statement(&mut self, allowed: &[&str]) -> Reported {
        match self.peek().clone() {
            Tok::Ident(w) => {
                let span = self.span();
                self.bump();
                self.error(
                    ParseErrorCode::UnknownKeyword,
                    span,
                    format!("unknown keyword `{w}`; expected one of {}", allowed.join(", ")),
                )
            }
            _ => self.unexpected(&format!("one of {}", allowed.join(", "))),
        }
    }

    fn document(&mut self) {
        while !self.at_eof() {
            let start = self.pos;
            let r = match self.peek().clone() {
                Tok::Ident(w) => match w.as_str() {
                    "sort" => self.sort(),
                    "guard" => self.guard(),
                    "machine" => self.machine(None),
                    "flow" => self.flow(),
                    "trigger" => self.trigger(),
                    "events" => self.events(),
                    "simcfg" => self.simcfg(),
                    _ => Err(self.unknown_statement(TOP_LEVEL)),
                },
                Tok::RBrace => {
                    let span = self.span();
                    self.bump();
                    Err(self.error(ParseErrorCode::UnexpectedToken, span, "unmatched `}`"))
                }
                _ => Err(self.unknown_statement(TOP_LEVEL)),
            };
            if r.is_err() {
                self.recover();
            }
            if self.pos == start && !self.at_eof() {
                self.bump();
            }
        }
    }

    fn sort(&mut self) -> PResult<()> {
        self.expect_word("sort")?;
        let (name, span) = self.name("sort name")?;
        if self.doc.model.sort(&name).is_some() {
            self.error(ParseErrorCode::DuplicateName, span, format!("sort `{name}` already declared"));
        }
        let mut sort = ThingSort::new(name);
        if self.eat_word("machine") {
            sort.machine_ref = Some(self.path("machine path")?.0);
        }
        if self.eat(&Tok::LBrace) {
            let mut attrs = Vec::new();
            self.block(|p| {
                let (a, aspan) = p.name("attribute name")?;
                p.expect(Tok::Colon)?;
                let kspan = p.span();
                let (k, _) = p.ident("attribute kind")?;
                let kind = ScalarKind::from_keyword(&k).ok_or_else(|| {
                    p.error(ParseErrorCode::UnexpectedToken, kspan, format!("expected int, string or bool, found `{k}`"))
                })?;
                p.semi()?;
                if attrs.iter().any(|(n, _): &(String, ScalarKind)| n == &a) {
                    p.error(ParseErrorCode::DuplicateName, aspan, format!("attribute `{a}` already declared"));
                }
                attrs.push((a, kind));
                Ok(())
            });
            sort.attributes = attrs;
        } else {
            self.semi()?;
        }
        let idx = self.doc.model.sorts.len();
        self.doc.model.sorts.push(sort);
        self.doc.model.source.sorts.insert(idx, span);
        Ok(())
    }

    fn guard(&mut self) -> PResult<()> {
        self.expect_word("guard")?;
        let (id, span) = self.name("guard id")?;
        if self.doc.model.guard(&id).is_some() {
            self.error(ParseErrorCode::DuplicateName, span, format!("guard `{id}` already declared"));
        }
        let kspan = self.span();
        let (kind_word, _) = self.ident("guard kind")?;
        let kind = match kind_word.as_str() {
            "range" => {
                let (attribute, _) = self.name("attribute name")?;
                let min = self.int("range minimum")?;
                let max = self.int("range maximum")?;
                GuardKind::RangeCheck { attribute, min, max }
            }
            "bernoulli" => GuardKind::Bernoulli(self.number("probability")?),
            "scripted" => GuardKind::Scripted(self.outcome_list()?),
            other => {
                return Err(self.error(
                    ParseErrorCode::UnknownKeyword,
                    kspan,
                    format!("unknown guard kind `{other}`; expected range, bernoulli or scripted"),
                ))
            }
        };
        let description = match self.peek() {
            Tok::Str(_) => Some(self.string("description")?),
            _ => None,
        };
        self.semi()?;
        let idx = self.doc.model.guards.len();
        self.doc.model.guards.push(Guard { id, kind, description });
        self.doc.model.source.guards.insert(idx, span);
        Ok(())
    }

    fn outcome_list(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            out.push(self.ident("outcome")?.0);
            if self.eat(&Tok::RBracket) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn machine(&mut self, parent: Option<MachineId>) -> PResult<()> {
        self.expect_word("machine")?;
        let (name, span) = self.name("machine name")?;
        let model = &self.doc.model;
        let dup = match parent {
            None => model.roots().any(|r| model.machine(r).name == name),
            Some(p) => model.machine(p).submachines.iter().any(|c| model.machine(*c).name == name),
        };
        if dup {
            self.error(ParseErrorCode::DuplicateName, span, format!("machine `{name}` already declared here"));
        }
        self.expect(Tok::LBrace)?;
        let id = self.doc.model.add_machine(name, parent);
        self.doc.model.source.machines.insert(id, span);
        self.block(|p| p.machine_item(id));
        Ok(())
    }

    fn machine_item(&mut self, id: MachineId) -> PResult<()> {
        const ALLOWED: &[&str] =
            &["create", "process", "receive", "release", "transfer", "machine", "flow", "trigger"];
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unknown_statement(ALLOWED)),
        };
        if let Some(kind) = StageKind::from_keyword(&word) {
            return self.stage(id, kind);
        }
        match word.as_str() {
            "machine" => self.machine(Some(id)),
            "flow" => self.flow(),
            "trigger" => self.trigger(),
            _ => Err(self.unknown_statement(ALLOWED)),
        }
    }

    fn stage(&mut self, id: MachineId, kind: StageKind) -> PResult<()> {
        let span = self.bump().span;
        let mut stage = Stage::new(kind);
        let mut seen = BTreeSet::new();
        loop {
            let aspan = self.span();
            let word = match self.peek() {
                Tok::Semi => {
                    self.bump();
                    break;
                }
                Tok::Ident(w) => w.clone(),
                _ => return Err(self.unexpected("`lane`, `queue`, `state` or `;`")),
            };
            if !seen.insert(word.clone()) && matches!(word.as_str(), "lane" | "queue" | "state") {
                return Err(self.error(ParseErrorCode::UnexpectedToken, aspan, format!("`{word}` given twice")));
            }
            match word.as_str() {
                "lane" => {
                    self.bump();
                    stage.lane = Lane::new(self.lane_name()?);
                }
                "queue" => {
                    self.bump();
                    stage.queue = Some(self.capacity()?);
                }
                "state" => {
                    self.bump();
                    stage.state = Some(self.name("state name")?.0);
                }
                _ => return Err(self.unexpected("`lane`, `queue`, `state` or `;`")),
            }
        }
        let idx = self.doc.model.machines[id.0].stages.len();
        self.doc.model.add_stage(id, stage);
        self.doc.model.source.stages.insert((id, idx), span);
        Ok(())
    }

    fn lane_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) | Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("lane sort name")),
        }
    }

    fn capacity(&mut self) -> PResult<QueueCapacity> {
        if self.eat_word("unbounded") {
            return Ok(QueueCapacity::Unbounded);
        }
        let span = self.span();
        let n = self.uint("queue capacity")?;
        if n == 0 {
            return Err(self.error(ParseErrorCode::UnexpectedToken, span, "queue capacity must be positive"));
        }
        Ok(QueueCapacity::Bounded(n))
    }

    /// `a.b.c`, returning the joined path and the span of its first segment.
    fn path(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let (first, span) = self.ident(what)?;
        let mut out = first;
        while matches!(self.peek(), Tok::Dot) {
            self.bump();
            out.push('.');
            out.push_str(&self.ident(what)?.0);
        }
        Ok((out, span))
    }

    fn split_stage_path(&mut self, path: &str, span: SourceSpan) -> PResult<(String, StageKind)> {
        match path.rsplit_once('.') {
            Some((machine, last)) => match StageKind::from_keyword(last) {
                Some(kind) => Ok((machine.to_string(), kind)),
                None => Err(self.error(
                    ParseErrorCode::UnexpectedToken,
                    span,
                    format!("`{path}` does not end in a stage kind"),
                )),
            },
            None => Err(self.error(
                ParseErrorCode::UnexpectedToken,
                span,
                format!("`{path}` is not a stage reference (Machine.kind)"),
            )),
        }
    }

    fn opt_lane(&mut self) -> PResult<Option<Lane>> {
        if self.eat(&Tok::At) {
            Ok(Some(Lane::new(self.lane_name()?)))
        } else {
            Ok(None)
        }
    }

    fn stage_ref(&mut self) -> PResult<StageRef> {
        let (path, span) = self.path("stage reference")?;
        let (machine, kind) = self.split_stage_path(&path, span)?;
        let lane = self.opt_lane()?;
        Ok(StageRef { machine, kind, lane })
    }

    fn flow(&mut self) -> PResult<()> {
        let span = self.expect_word("flow")?;
        let from = self.stage_ref()?;
        self.expect(Tok::Arrow)?;
        let to = self.stage_ref()?;
        let mut arc = FlowArc::new(from, to);
        if self.eat_word("guard") {
            arc.guard = Some(self.ident("guard id")?.0);
        }
        if self.eat_word("label") {
            arc.label = Some(self.string("label text")?);
        }
        self.semi()?;
        let idx = self.doc.model.flows.len();
        self.doc.model.add_flow(arc);
        self.doc.model.source.flows.insert(idx, span);
        Ok(())
    }

    fn trigger(&mut self) -> PResult<()> {
        let span = self.expect_word("trigger")?;
        let from = self.stage_ref()?;
        self.expect(Tok::DashArrow)?;
        let to = self.stage_ref()?;
        let mut arc = TriggerArc::new(from, to);
        if self.eat_word("label") {
            arc.label = Some(self.string("label text")?);
        }
        self.semi()?;
        let idx = self.doc.model.triggers.len();
        self.doc.model.add_trigger(arc);
        self.doc.model.source.triggers.insert(idx, span);
        Ok(())
    }

    fn events(&mut self) -> PResult<()> {
        self.expect_word("events")?;
        let mut block = EventBlock::default();
        if let Tok::Ident(_) = self.peek() {
            let (name, span) = self.name("events block name")?;
            if self.doc.event_blocks.iter().any(|b| b.name.as_deref() == Some(name.as_str())) {
                self.error(ParseErrorCode::DuplicateName, span, format!("events block `{name}` already declared"));
            }
            block.name = Some(name);
        }
        self.expect(Tok::LBrace)?;
        let bidx = self.doc.event_blocks.len();
        self.block(|p| {
            if p.is_word("event") {
                p.event(bidx, &mut block)
            } else if p.is_word("chronology") {
                p.chronology(&mut block)
            } else {
                Err(p.unknown_statement(&["event", "chronology"]))
            }
        });
        self.doc.event_blocks.push(block);
        Ok(())
    }

    fn event(&mut self, bidx: usize, block: &mut EventBlock) -> PResult<()> {
        self.expect_word("event")?;
        let (id, span) = self.name("event id")?;
        if block.events.iter().any(|e| e.id == id) {
            self.error(ParseErrorCode::DuplicateName, span, format!("event `{id}` already declared in this block"));
        }
        let name = self.string("event name")?;
        let mut spec = EventSpec::new(id.clone(), name, RegionSelector::default());
        if !self.eat(&Tok::Semi) {
            self.expect(Tok::LBrace)?;
            self.block(|p| p.event_item(&mut spec));
        }
        self.doc.spans.events.insert((bidx, id), span);
        block.events.push(spec);
        Ok(())
    }

    fn event_item(&mut self, spec: &mut EventSpec) -> PResult<()> {
        const ALLOWED: &[&str] = &["region", "duration", "intensity", "guard", "at", "sets", "clears"];
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unknown_statement(ALLOWED)),
        };
        match word.as_str() {
            "region" => {
                self.bump();
                loop {
                    let item = self.selector_item()?;
                    spec.selector.items.push(item);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            "duration" => {
                self.bump();
                spec.duration = self.uint("duration in periods")?;
            }
            "intensity" => {
                self.bump();
                spec.intensity = Some(self.number("intensity")?);
            }
            "guard" => {
                self.bump();
                spec.guard = Some(self.ident("guard id")?.0);
            }
            "at" => {
                self.bump();
                spec.anchor = Some(self.stage_ref()?);
            }
            "sets" | "clears" => {
                self.bump();
                let (path, span) = self.path("state path")?;
                if !path.contains('.') {
                    return Err(self.error(
                        ParseErrorCode::UnexpectedToken,
                        span,
                        format!("`{path}` is not a state path (Machine.state)"),
                    ));
                }
                spec.effect = Some(if word == "sets" { FlagEffect::Set(path) } else { FlagEffect::Clear(path) });
            }
            _ => return Err(self.unknown_statement(ALLOWED)),
        }
        self.semi()
    }

    fn selector_item(&mut self) -> PResult<SelectorItem> {
        if self.eat(&Tok::Star) {
            return Ok(SelectorItem::Path(String::new()));
        }
        let (path, span) = self.path("region path")?;
        let lane = self.opt_lane()?;
        let arrow = match self.peek() {
            Tok::Arrow => Some(true),
            Tok::DashArrow => Some(false),
            _ => None,
        };
        match arrow {
            None => Ok(SelectorItem::Path(match lane {
                Some(l) => {
                    self.split_stage_path(&path, span)?;
                    format!("{path}@{l}")
                }
                None => path,
            })),
            Some(is_flow) => {
                self.bump();
                let (machine, kind) = self.split_stage_path(&path, span)?;
                let from = StageRef { machine, kind, lane };
                let to = self.stage_ref()?;
                Ok(if is_flow { SelectorItem::Flow(from, to) } else { SelectorItem::Trigger(from, to) })
            }
        }
    }

    fn chronology(&mut self, block: &mut EventBlock) -> PResult<()> {
        self.expect_word("chronology")?;
        let (name, span) = self.name("chronology name")?;
        let dup = self.doc.event_blocks.iter().chain(std::iter::once(&*block)).any(|b| b.chronologies.iter().any(|c| c.name == name));
        if dup {
            self.error(ParseErrorCode::DuplicateName, span, format!("chronology `{name}` already declared"));
        }
        self.expect_word("initial")?;
        let (initial, _) = self.ident("initial event id")?;
        self.expect(Tok::LBrace)?;
        let mut edges = Vec::new();
        self.block(|p| {
            let (from, _) = p.ident("event id")?;
            p.expect(Tok::Arrow)?;
            let (to, _) = p.ident("event id")?;
            let outcome = match p.peek() {
                Tok::Ident(_) => Some(p.ident("guard outcome")?.0),
                _ => None,
            };
            p.semi()?;
            edges.push(ChronologyEdge { from, to, outcome });
            Ok(())
        });
        self.doc.spans.chronologies.insert(name.clone(), span);
        block.chronologies.push(ChronologySpec { name, initial, edges });
        Ok(())
    }

    fn simcfg(&mut self) -> PResult<()> {
        let span = self.expect_word("simcfg")?;
        if self.doc.simcfg.is_some() {
            self.error(ParseErrorCode::DuplicateName, span, "simcfg already declared");
        }
        self.expect(Tok::LBrace)?;
        let mut cfg = SimConfig::default();
        self.block(|p| p.simcfg_item(&mut cfg));
        self.doc.simcfg = Some(cfg);
        Ok(())
    }

    fn simcfg_item(&mut self, cfg: &mut SimConfig) -> PResult<()> {
        const ALLOWED: &[&str] = &["chronology", "horizon", "seed", "sort", "arrivals", "script", "queue"];
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unknown_statement(ALLOWED)),
        };
        match word.as_str() {
            "chronology" => {
                self.bump();
                cfg.chronology = Some(self.ident("chronology name")?.0);
            }
            "horizon" => {
                self.bump();
                cfg.horizon = self.uint("horizon")?;
            }
            "seed" => {
                self.bump();
                let span = self.span();
                let v = self.int("seed")?;
                cfg.seed = u64::try_from(v).map_err(|_| {
                    self.error(ParseErrorCode::UnexpectedToken, span, "seed must be nonnegative")
                })?;
            }
            "sort" => {
                self.bump();
                cfg.sort = Some(self.ident("sort name")?.0);
            }
            "arrivals" => {
                self.bump();
                let period = self.uint("arrival period")?;
                let count = self.uint("arrival count")?;
                let mut arrival = Arrival::new(period, count);
                if self.eat(&Tok::LBrace) {
                    self.block(|p| {
                        let (attr, _) = p.ident("attribute name")?;
                        p.expect(Tok::Eq)?;
                        let value = p.scalar()?;
                        p.semi()?;
                        arrival.attributes.insert(attr, value);
                        Ok(())
                    });
                    cfg.arrivals.push(arrival);
                    return Ok(());
                }
                cfg.arrivals.push(arrival);
            }
            "script" => {
                self.bump();
                let (guard, _) = self.ident("guard id")?;
                let outcomes = self.outcome_list()?;
                cfg.scripts.insert(guard, outcomes);
            }
            "queue" => {
                self.bump();
                let (path, _) = self.path("machine path")?;
                let cap = self.capacity()?;
                cfg.queues.insert(path, cap);
            }
            _ => return Err(self.unknown_statement(ALLOWED)),
        }
        self.semi()
    }

    fn scalar(&mut self) -> PResult<Scalar> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Scalar::Int(v))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Scalar::Str(s))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Scalar::Bool(w == "true"))
            }
            _ => Err(self.unexpected("integer, string or boolean")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn full_feature_document() {
        let src = r#"
            sort car { color: string; coats: int; }
            sort tm machine M;
            guard ok bernoulli 0.75 "paint looks fine";
            guard sec range second 0 60;
            guard s scripted [fail, pass];
            machine M {
              receive lane "car" queue 3;
              process lane car state busy;
              machine inner { process; }
              flow M.receive@car -> M.process@car;
            }
            trigger M.process@car -.-> M.inner.process label "go";
            events slicing {
              event E1 "first" { region M, M.receive@car -> M.process@car; duration 0; sets M.busy; intensity 2.5; }
              event E2 "second" { region *; guard ok; at M.process@car; }
              chronology c initial E1 { E1 -> E2; }
            }
            simcfg {
              horizon 9; seed 4; chronology c;
              arrivals 0 2 { second = 6; name = "x"; flag = true; }
              script ok [pass];
              queue M unbounded;
            }
        "#;
        let doc = parse(src).unwrap();
        let m = &doc.model;
        assert_eq!(m.sorts[0].attributes.len(), 2);
        assert_eq!(m.sorts[1].machine_ref.as_deref(), Some("M"));
        assert_eq!(m.guards[0].kind, GuardKind::Bernoulli(0.75));
        assert_eq!(m.machines[0].stages[0].queue, Some(QueueCapacity::Bounded(3)));
        assert_eq!(m.machines[0].stages[1].state.as_deref(), Some("busy"));
        assert_eq!(m.triggers[0].label.as_deref(), Some("go"));
        let block = &doc.event_blocks[0];
        assert_eq!(block.name.as_deref(), Some("slicing"));
        assert_eq!(block.events[0].selector.items.len(), 2);
        assert_eq!(block.events[0].effect, Some(FlagEffect::Set("M.busy".into())));
        assert_eq!(block.events[1].selector.items[0], SelectorItem::Path(String::new()));
        let cfg = doc.simcfg.unwrap();
        assert_eq!(cfg.horizon, 9);
        assert_eq!(cfg.arrivals[0].attributes.len(), 3);
        assert_eq!(cfg.queues["M"], QueueCapacity::Unbounded);
    }

    #[test]
    fn reserved_words_are_not_names() {
        let errs = parse("machine process { create; }").unwrap_err();
        assert_eq!(errs[0].code, ParseErrorCode::UnexpectedToken);
    }

    #[test]
    fn recovery_continues_after_bad_stage() {
        let errs = parse("machine M { process lane; create; flow M.create M.process; }\nmachine N { receive; ").unwrap_err();
        let codes: Vec<_> = errs.iter().map(|e| e.code).collect();
        assert_eq!(
            codes,
            vec![ParseErrorCode::UnexpectedToken, ParseErrorCode::UnexpectedToken, ParseErrorCode::UnclosedBlock]
        );
    }
}
