use serde::Serialize;

use super::Trace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleRow {
    pub period: u32,
    /// One cell per column; `None` when the instance is idle, queued or gone.
    pub cells: Vec<Option<String>>,
}

/// Periods down, instances across, the active timed event in each cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleTable {
    pub instance_label: String,
    pub columns: Vec<u32>,
    pub rows: Vec<ScheduleRow>,
}

impl ScheduleTable {
    pub fn cell(&self, period: u32, instance: u32) -> Option<&str> {
        let col = self.columns.iter().position(|&c| c == instance)?;
        let row = self.rows.get(usize::try_from(period).ok()?.checked_sub(1)?)?;
        row.cells[col].as_deref()
    }

    /// The cells of one instance, top to bottom.
    pub fn column(&self, instance: u32) -> Vec<Option<&str>> {
        match self.columns.iter().position(|&c| c == instance) {
            Some(col) => self.rows.iter().map(|r| r.cells[col].as_deref()).collect(),
            None => Vec::new(),
        }
    }
}

pub fn schedule_table(trace: &Trace) -> ScheduleTable {
    let last = trace.active.iter().map(|r| r.period).max().unwrap_or(0);
    let width = trace.instances.iter().map(|i| i.instance).max().unwrap_or(0);
    let columns: Vec<u32> = if last == 0 { Vec::new() } else { (1..=width).collect() };
    let mut rows: Vec<ScheduleRow> =
        (1..=last).map(|period| ScheduleRow { period, cells: vec![None; columns.len()] }).collect();
    for r in &trace.active {
        rows[(r.period - 1) as usize].cells[(r.instance - 1) as usize] = Some(r.event.clone());
    }
    ScheduleTable { instance_label: trace.instance_label.clone(), columns, rows }
}
