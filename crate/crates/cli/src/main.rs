use std::fs;
use std::fmt::Write as _;
use std::io::{ErrorKind, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tmkit::dsl::{self, Document};
use tmkit::eventing::{carve_event, check_coverage};
use tmkit::export::{self, Format, RenderOptions};
use tmkit::model::{validate, Severity, SourceSpan};
use tmkit::sim::{schedule_table, Arrival, SimConfig, SimState};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SIM: u8 = 3;

#[derive(Parser)]
#[command(name = "tm", version, about = "Validate, format, render and simulate thinging machine models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and its events; prints OK or one line per problem.
    Validate { path: PathBuf },
    /// Rewrite a file in canonical form.
    Fmt {
        path: PathBuf,
        /// Only report whether the file is canonical.
        #[arg(long)]
        check: bool,
    },
    /// Render a model as DOT, or its event list as CSV or Markdown.
    Render {
        path: PathBuf,
        #[arg(short, long, value_enum, default_value_t = RenderFormat::Dot)]
        format: RenderFormat,
        /// Overlay this event on the diagram.
        #[arg(short, long)]
        event: Option<String>,
        /// Events block to look the event up in.
        #[arg(long)]
        block: Option<String>,
        #[arg(long)]
        show_lanes: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List events per block with coverage and chronology cycles.
    Events { path: PathBuf },
    /// Run a chronology and print the trace or the schedule table.
    Simulate {
        path: PathBuf,
        /// Number of things arriving at period 0.
        #[arg(short, long, conflicts_with = "arrivals")]
        cars: Option<u32>,
        /// JSON file with a list of arrivals.
        #[arg(long)]
        arrivals: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(short, long)]
        seed: Option<u64>,
        #[arg(short, long, value_enum)]
        table: Option<TableFormat>,
        #[arg(long)]
        chronology: Option<String>,
        /// JSON run settings replacing the file's simcfg block.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the trace JSON here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Dot,
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Markdown,
}

struct Fail(u8);

type Outcome = Result<(), Fail>;

fn color() -> bool {
    std::env::var("TM_COLOR").map_or(true, |v| v != "0") && std::io::stderr().is_terminal()
}

fn diag(path: &Path, span: Option<SourceSpan>, code: &str, message: &str, warning: bool) {
    let (line, col) = span.map_or((0, 0), |s| (s.line, s.column));
    let code = if color() {
        let c = if warning { "33" } else { "31" };
        format!("\x1b[1;{c}m{code}\x1b[0m")
    } else {
        code.to_string()
    };
    eprintln!("{}:{line}:{col} {code} {message}", path.display());
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        Fail(EXIT_USAGE)
    })
}

fn load(path: &Path) -> Result<Document, Fail> {
    let text = read(path)?;
    dsl::parse(&text).map_err(|errs| {
        for e in errs {
            diag(path, Some(e.span), e.code.as_str(), &e.message, false);
        }
        Fail(EXIT_INVALID)
    })
}

/// Prints model violations and event problems; true when there are errors.
fn report(path: &Path, doc: &Document) -> bool {
    let r = validate(&doc.model);
    for v in r.violations.iter().chain(&r.warnings) {
        let warning = v.code.severity() == Severity::Warning;
        diag(path, v.span, v.code.as_str(), &format!("{}: {}", v.path, v.message), warning);
    }
    if !r.is_empty() {
        return true;
    }
    let problems = doc.check_events();
    for (span, e) in &problems {
        let text = e.to_string();
        let message = text.split_once(": ").map_or(text.as_str(), |(_, m)| m);
        diag(path, *span, e.code(), message, false);
    }
    !problems.is_empty()
}

fn write_out(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| {
            eprintln!("{}: {e}", p.display());
            Fail(EXIT_USAGE)
        }),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                    eprintln!("stdout: {e}");
                    Err(Fail(EXIT_USAGE))
                }
                _ => Ok(()),
            }
        }
    }
}

fn cmd_validate(path: &Path) -> Outcome {
    let doc = load(path)?;
    if report(path, &doc) {
        return Err(Fail(EXIT_INVALID));
    }
    write_out(None, "OK\n")
}

fn cmd_fmt(path: &Path, check: bool) -> Outcome {
    let text = dsl::normalize_newlines(&read(path)?);
    let doc = load(path)?;
    let canonical = match dsl::serialize_document(&doc) {
        Ok(t) => t,
        Err(_) => {
            report(path, &doc);
            return Err(Fail(EXIT_INVALID));
        }
    };
    if check {
        if canonical != text {
            eprintln!("{}: not in canonical form", path.display());
            return Err(Fail(EXIT_INVALID));
        }
        return Ok(());
    }
    if canonical != text {
        fs::write(path, canonical).map_err(|e| {
            eprintln!("{}: {e}", path.display());
            Fail(EXIT_USAGE)
        })?;
    }
    Ok(())
}

fn cmd_render(
    path: &Path,
    format: RenderFormat,
    event: Option<&str>,
    block: Option<&str>,
    show_lanes: bool,
    output: Option<&Path>,
) -> Outcome {
    let doc = load(path)?;
    if report(path, &doc) {
        return Err(Fail(EXIT_INVALID));
    }
    let options = RenderOptions { show_lanes, ..RenderOptions::default() };
    let text = match (format, event) {
        (RenderFormat::Csv, _) => export::event_list(&doc, Format::Csv),
        (RenderFormat::Markdown, _) => export::event_list(&doc, Format::Markdown),
        (RenderFormat::Dot, None) => export::to_dot(&doc.model, &options).map_err(|e| {
            eprintln!("{}: {e}", path.display());
            Fail(EXIT_INVALID)
        })?,
        (RenderFormat::Dot, Some(id)) => {
            let spec = doc
                .event_blocks
                .iter()
                .filter(|b| block.is_none() || b.name.as_deref() == block)
                .flat_map(|b| &b.events)
                .find(|e| e.id == id);
            let Some(spec) = spec else {
                eprintln!("{}: no event `{id}`", path.display());
                return Err(Fail(EXIT_USAGE));
            };
            let carved = carve_event(&doc.model, spec).map_err(|e| {
                eprintln!("{}: {e}", path.display());
                Fail(EXIT_INVALID)
            })?;
            export::event_overlay(&doc.model, &carved.event, &options).map_err(|e| {
                eprintln!("{}: {e}", path.display());
                Fail(EXIT_INVALID)
            })?
        }
    };
    write_out(output, &text)
}

fn cmd_events(path: &Path) -> Outcome {
    let doc = load(path)?;
    if report(path, &doc) {
        return Err(Fail(EXIT_INVALID));
    }
    let mut out = String::new();
    for (i, b) in doc.event_blocks.iter().enumerate() {
        let carved = doc.carve_block(i).map_err(|_| Fail(EXIT_INVALID))?;
        let events: Vec<_> = carved.into_iter().map(|c| c.event).collect();
        let cov = check_coverage(&doc.model, &events);
        let name = b.name.as_deref().unwrap_or("(unnamed)");
        writeln!(out, "events {name}: {} event(s)", events.len()).unwrap();
        for e in &events {
            writeln!(out, "  {} \"{}\" duration {} elements {}", e.id, e.name, e.duration, e.region.len()).unwrap();
        }
        if cov.is_complete() {
            writeln!(out, "  coverage: complete").unwrap();
        } else {
            let missing: Vec<String> = cov.uncovered.iter().map(|el| doc.model.element_label(el)).collect();
            writeln!(out, "  coverage: {} uncovered: {}", missing.len(), missing.join(", ")).unwrap();
        }
        for c in &b.chronologies {
            let ch = doc.chronology(Some(&c.name)).map_err(|_| Fail(EXIT_INVALID))?;
            writeln!(out, "  chronology {}: initial {}, {} cycle(s)", c.name, c.initial, ch.cycle_count()).unwrap();
        }
    }
    write_out(None, &out)
}

struct SimArgs<'a> {
    cars: Option<u32>,
    arrivals: Option<&'a Path>,
    horizon: Option<u32>,
    seed: Option<u64>,
    table: Option<TableFormat>,
    chronology: Option<&'a str>,
    config: Option<&'a Path>,
    trace_out: Option<&'a Path>,
}

fn bad_json(path: &Path, e: serde_json::Error) -> Fail {
    eprintln!("{}: {e}", path.display());
    Fail(EXIT_USAGE)
}

fn cmd_simulate(path: &Path, args: SimArgs<'_>) -> Outcome {
    let doc = load(path)?;
    if report(path, &doc) {
        return Err(Fail(EXIT_INVALID));
    }
    let mut cfg: SimConfig = match args.config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| bad_json(p, e))?,
        None => doc.simcfg.clone().unwrap_or_default(),
    };
    if let Some(n) = args.cars {
        let attributes = cfg.arrivals.first().map(|a| a.attributes.clone()).unwrap_or_default();
        cfg.arrivals = vec![Arrival { period: 0, count: n, attributes }];
    }
    if let Some(p) = args.arrivals {
        cfg.arrivals = serde_json::from_str::<Vec<Arrival>>(&read(p)?).map_err(|e| bad_json(p, e))?;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let chronology = args.chronology.or(cfg.chronology.as_deref()).map(str::to_string);
    let chron = doc.chronology(chronology.as_deref()).map_err(|e| {
        diag(path, None, e.code(), &e.to_string(), false);
        Fail(EXIT_INVALID)
    })?;
    let sim_fail = |e: tmkit::sim::SimError| {
        let text = e.to_string();
        let message = text.split_once(": ").map_or(text.clone(), |(_, m)| m.to_string());
        diag(path, None, e.code(), &message, false);
        Fail(EXIT_SIM)
    };
    let mut state = SimState::new(&doc.model, &chron, cfg).map_err(sim_fail)?;
    state.run().map_err(sim_fail)?;
    let trace = state.into_trace();
    let json = trace.to_json();
    if let Some(p) = args.trace_out {
        write_out(Some(p), &format!("{json}\n"))?;
    }
    let text = match args.table {
        Some(TableFormat::Csv) => export::table_render(&schedule_table(&trace), Format::Csv),
        Some(TableFormat::Markdown) => export::table_render(&schedule_table(&trace), Format::Markdown),
        None => format!("{json}\n"),
    };
    write_out(None, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Fmt { path, check } => cmd_fmt(path, *check),
        Command::Render { path, format, event, block, show_lanes, output } => {
            cmd_render(path, *format, event.as_deref(), block.as_deref(), *show_lanes, output.as_deref())
        }
        Command::Events { path } => cmd_events(path),
        Command::Simulate { path, cars, arrivals, horizon, seed, table, chronology, config, trace_out } => {
            cmd_simulate(
                path,
                SimArgs {
                    cars: *cars,
                    arrivals: arrivals.as_deref(),
                    horizon: *horizon,
                    seed: *seed,
                    table: *table,
                    chronology: chronology.as_deref(),
                    config: config.as_deref(),
                    trace_out: trace_out.as_deref(),
                },
            )
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code)) => ExitCode::from(code),
    }
}
