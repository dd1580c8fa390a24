//! `hypertrick analyze`: summaries and comparisons of recorded studies.
//!
//! Inputs may be simulator timelines or orchestrator study logs; the two are
//! told apart by their discriminator field (`kind` vs `type`).

use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use clap::Args;
use hypertrick_core::analysis::{StudySummary, compare, summarize};
use hypertrick_core::sim::Timeline;

use crate::io::{read_timeline, write_curves_csv, write_occupancy_csv, write_summary_csv};
use crate::orchestrator::{read_store, store_to_timeline};

use super::{Cli, CmdError, ensure_out_dir, label_file_part, usage};

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Recorded studies: timeline files or study logs (JSON Lines).
    #[arg(long = "log", value_name = "FILE", num_args = 1.., required = true)]
    pub logs: Vec<PathBuf>,

    /// One label per log; defaults to the file stems.
    #[arg(long = "labels", value_delimiter = ',', num_args = 1..)]
    pub labels: Option<Vec<String>>,
}

enum LogKind {
    Timeline,
    Store,
}

fn detect_kind(path: &Path) -> Result<LogKind, CmdError> {
    let file = fs::File::open(path)
        .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| usage(format!("{}: not JSON Lines: {e}", path.display())))?;
        if value.get("kind").is_some() {
            return Ok(LogKind::Timeline);
        }
        if value.get("type").is_some() {
            return Ok(LogKind::Store);
        }
        return Err(usage(format!(
            "{}: records carry neither \"kind\" nor \"type\"",
            path.display()
        )));
    }
    Err(usage(format!("{} is empty", path.display())))
}

fn load_timeline(path: &Path) -> Result<Timeline, CmdError> {
    match detect_kind(path)? {
        LogKind::Timeline => read_timeline(path).map_err(|e| usage(format!("{e:#}"))),
        LogKind::Store => {
            let (records, diagnostic) =
                read_store(path).map_err(|e| usage(format!("{e:#}")))?;
            if let Some(diagnostic) = diagnostic {
                eprintln!(
                    "warning: {}: stopped at {diagnostic}; analyzing the valid prefix",
                    path.display()
                );
            }
            Ok(store_to_timeline(&records))
        }
    }
}

pub fn exec(cli: &Cli, args: &AnalyzeArgs) -> Result<(), CmdError> {
    let labels: Vec<String> = match &args.labels {
        Some(labels) => labels.clone(),
        None => args
            .logs
            .iter()
            .map(|p| {
                p.file_stem()
                    .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
            })
            .collect(),
    };
    if labels.len() != args.logs.len() {
        return Err(usage(format!(
            "{} labels for {} logs",
            labels.len(),
            args.logs.len()
        )));
    }

    let mut summaries: Vec<StudySummary> = Vec::with_capacity(args.logs.len());
    for (path, label) in args.logs.iter().zip(&labels) {
        let timeline = load_timeline(path)?;
        let summary = summarize(&timeline)
            .map_err(|e| usage(format!("{} ({label}): {e}", path.display())))?;
        summaries.push(summary);
    }

    let dir = ensure_out_dir(cli)?;
    let entries: Vec<(String, StudySummary)> = labels
        .iter()
        .cloned()
        .zip(summaries.iter().cloned())
        .collect();
    write_summary_csv(&dir.join("summary.csv"), &entries)?;
    for (label, summary) in &entries {
        let part = label_file_part(label);
        write_occupancy_csv(
            &dir.join(format!("occupancy_{part}.csv")),
            &summary.occupancy_series,
        )?;
        write_curves_csv(&dir.join(format!("curves_{part}.csv")), &summary.curves)?;
    }

    if summaries.len() >= 2 {
        let comparison = compare(&summaries, &labels).map_err(usage)?;
        print!("{}", comparison.render_text());
    } else {
        let s = &summaries[0];
        println!(
            "{}: makespan {:.6} alpha {:.6} occupancy {:.6}",
            labels[0], s.makespan, s.measured_alpha, s.occupancy
        );
    }
    println!("csv files written to {}", dir.display());
    Ok(())
}
