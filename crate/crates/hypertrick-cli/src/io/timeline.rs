use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use hypertrick_core::sim::{Event, Timeline};

/// Renders one event as its canonical JSON line: fixed field order, times
/// (`time`, `start`) with exactly six decimals, absent fields omitted.
pub fn format_event(e: &Event) -> String {
    let mut line = String::with_capacity(96);
    write!(line, "{{\"time\":{:.6},\"kind\":\"{}\",\"worker_id\":{}", e.time, e.kind, e.worker)
        .unwrap();
    if let Some(node) = e.node {
        write!(line, ",\"node_id\":{node}").unwrap();
    }
    if let Some(phase) = e.phase {
        write!(line, ",\"phase_index\":{phase}").unwrap();
    }
    if let Some(metric) = e.metric {
        write!(line, ",\"metric\":{}", serde_json::Number::from_f64(metric).expect("finite"))
            .unwrap();
    }
    if let Some(decision) = e.decision {
        write!(line, ",\"decision\":\"{decision}\"").unwrap();
    }
    if let Some(start) = e.start {
        write!(line, ",\"start\":{start:.6}").unwrap();
    }
    line.push('}');
    line
}

/// Writes a timeline as JSON Lines, one event per line.
pub fn write_timeline(path: &Path, timeline: &Timeline) -> anyhow::Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("cannot create timeline file {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for e in &timeline.events {
        writeln!(out, "{}", format_event(e))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSON Lines timeline file, reporting the first offending line.
pub fn read_timeline(path: &Path) -> anyhow::Result<Timeline> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read timeline file {}", path.display()))?;
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event: Event = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad timeline record", path.display(), i + 1))?;
        events.push(event);
    }
    Ok(Timeline { events })
}
