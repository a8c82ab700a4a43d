use std::fmt::Write;

use crate::dsl::Document;
use crate::sim::ScheduleTable;

use super::Format;

fn write_rows(rows: &[Vec<String>], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Markdown => {
            for (i, r) in rows.iter().enumerate() {
                writeln!(out, "| {} |", r.join(" | ")).unwrap();
                if i == 0 {
                    writeln!(out, "|{}", "---|".repeat(r.len())).unwrap();
                }
            }
        }
        Format::Csv | Format::Dot => {
            for r in rows {
                writeln!(out, "{}", r.join(",")).unwrap();
            }
        }
    }
    out
}

/// Header `period,<label> 1,…,<label> n`, one row per period, idle cells
/// empty. `Format::Dot` is treated as CSV.
pub fn table_render(table: &ScheduleTable, format: Format) -> String {
    let mut rows = Vec::with_capacity(table.rows.len() + 1);
    let mut header = vec!["period".to_string()];
    header.extend(table.columns.iter().map(|c| format!("{} {c}", table.instance_label)));
    rows.push(header);
    for r in &table.rows {
        let mut row = vec![r.period.to_string()];
        row.extend(r.cells.iter().map(|c| c.clone().unwrap_or_default()));
        rows.push(row);
    }
    write_rows(&rows, format)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Every declared event: block, id, name, duration, guard and effect.
pub fn event_list(doc: &Document, format: Format) -> String {
    let mut rows = vec![["block", "event", "name", "duration", "guard", "effect"].map(String::from).to_vec()];
    for b in &doc.event_blocks {
        for e in &b.events {
            let effect = match &e.effect {
                Some(crate::eventing::FlagEffect::Set(p)) => format!("sets {p}"),
                Some(crate::eventing::FlagEffect::Clear(p)) => format!("clears {p}"),
                None => String::new(),
            };
            let row = [
                b.name.clone().unwrap_or_default(),
                e.id.clone(),
                e.name.clone(),
                e.duration.to_string(),
                e.guard.clone().unwrap_or_default(),
                effect,
            ];
            rows.push(match format {
                Format::Markdown => row.iter().map(|s| s.replace('|', "\\|")).collect(),
                _ => row.iter().map(|s| csv_field(s)).collect(),
            });
        }
    }
    write_rows(&rows, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ScheduleRow;

    fn table() -> ScheduleTable {
        ScheduleTable {
            instance_label: "car".into(),
            columns: vec![1, 2],
            rows: vec![
                ScheduleRow { period: 1, cells: vec![Some("E2".into()), None] },
                ScheduleRow { period: 2, cells: vec![Some("E3".into()), Some("E2".into())] },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        assert_eq!(table_render(&table(), Format::Csv), "period,car 1,car 2\n1,E2,\n2,E3,E2\n");
    }

    #[test]
    fn markdown_layout() {
        assert_eq!(
            table_render(&table(), Format::Markdown),
            "| period | car 1 | car 2 |\n|---|---|---|\n| 1 | E2 |  |\n| 2 | E3 | E2 |\n"
        );
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ScheduleTable { instance_label: "car".into(), columns: vec![], rows: vec![] };
        assert_eq!(table_render(&t, Format::Csv), "period\n");
    }
}
