//! Append-only study log and its crash-safe replay.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use hypertrick_core::policy::{PhaseStats, PolicyEngine, PolicyParams};
use hypertrick_core::sim::{Event, EventKind, Timeline};
use hypertrick_core::space::Configuration;
use hypertrick_core::study::{Decision, PhaseReport};
use serde::{Deserialize, Serialize};

/// One persisted record. The flat schema covers all record types; fields not
/// used by a type stay absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoreRecord {
    /// Seconds since study start, rounded to microseconds.
    pub ts: f64,
    #[serde(rename = "type")]
    pub kind: EventKind,
    pub worker: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Configuration>,
}

/// The append-only sequence of records, optionally mirrored to a JSON Lines
/// file that is flushed after every append so a crash loses at most the
/// record being written.
pub struct KnowledgeStore {
    records: Vec<StoreRecord>,
    sink: Option<BufWriter<fs::File>>,
}

impl KnowledgeStore {
    pub fn in_memory() -> Self {
        KnowledgeStore {
            records: Vec::new(),
            sink: None,
        }
    }

    pub fn create(path: &Path) -> anyhow::Result<Self> {
        let file = fs::File::create(path)
            .with_context(|| format!("cannot create study log {}", path.display()))?;
        Ok(KnowledgeStore {
            records: Vec::new(),
            sink: Some(BufWriter::new(file)),
        })
    }

    pub fn append(&mut self, record: StoreRecord) -> anyhow::Result<()> {
        if let Some(sink) = &mut self.sink {
            serde_json::to_writer(&mut *sink, &record)?;
            sink.write_all(b"\n")?;
            sink.flush()?;
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[StoreRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<StoreRecord> {
        self.records
    }
}

/// Why reading stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct StoreDiagnostic {
    /// 1-based line number of the first unreadable record.
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for StoreDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Reads a study log, recovering the longest valid prefix. A torn or corrupt
/// line ends the read and is described in the diagnostic; everything before
/// it is returned.
pub fn read_store(path: &Path) -> anyhow::Result<(Vec<StoreRecord>, Option<StoreDiagnostic>)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read study log {}", path.display()))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<StoreRecord>(line) {
            Ok(record) => records.push(record),
            Err(e) => {
                return Ok((
                    records,
                    Some(StoreDiagnostic {
                        line: i + 1,
                        reason: e.to_string(),
                    }),
                ));
            }
        }
    }
    Ok((records, None))
}

/// Result of replaying a record sequence through the pure policy.
pub struct Replay {
    pub stats: PhaseStats,
    /// Decisions regenerated from the persisted reports and failures.
    pub decisions: Vec<(u32, u32, Decision)>,
    /// Decisions as persisted.
    pub persisted: Vec<(u32, u32, Decision)>,
}

impl Replay {
    /// Persisted decisions must be a prefix of the regenerated ones (a crash
    /// can lose a decision write that followed its report, never invent one).
    pub fn is_consistent(&self) -> bool {
        self.decisions.starts_with(&self.persisted)
    }
}

/// Replays reports and failures in persisted order through a fresh engine.
/// `w0` must be the worker count the study ran with: the synchronized policy
/// sizes its barrier from it.
pub fn replay_records(records: &[StoreRecord], params: PolicyParams, w0: u32) -> Replay {
    let mut engine = PolicyEngine::new(params, 0..w0);
    let mut decisions = Vec::new();
    let mut persisted = Vec::new();
    for record in records {
        match record.kind {
            EventKind::Report => {
                let report = PhaseReport {
                    worker: record.worker,
                    config: record.worker,
                    phase: record.phase.expect("report records carry a phase"),
                    metric: record.metric.expect("report records carry a metric"),
                    time: record.ts,
                };
                decisions.extend(
                    engine
                        .on_report(&report)
                        .into_iter()
                        .map(|d| (d.worker, d.phase, d.decision)),
                );
            }
            EventKind::Failure => {
                decisions.extend(
                    engine
                        .on_failure(record.worker)
                        .into_iter()
                        .map(|d| (d.worker, d.phase, d.decision)),
                );
            }
            EventKind::Decision => {
                persisted.push((
                    record.worker,
                    record.phase.expect("decision records carry a phase"),
                    record.decision.expect("decision records carry a verdict"),
                ));
            }
            _ => {}
        }
    }
    Replay {
        stats: engine.stats().clone(),
        decisions,
        persisted,
    }
}

/// Converts a study log into a timeline for the analysis module. Slots play
/// the role of nodes; each report/failure's execution span starts when its
/// worker was last told to run (its launch, or its previous continue).
pub fn store_to_timeline(records: &[StoreRecord]) -> Timeline {
    let max_worker = records.iter().map(|r| r.worker).max().unwrap_or(0) as usize;
    let mut running_since = vec![0.0f64; max_worker + 1];
    let mut slot_of = vec![None::<u32>; max_worker + 1];
    let mut events = Vec::with_capacity(records.len());
    for record in records {
        let worker = record.worker as usize;
        if let Some(slot) = record.slot {
            slot_of[worker] = Some(slot);
        }
        let start = match record.kind {
            EventKind::Report | EventKind::Failure => Some(running_since[worker]),
            _ => None,
        };
        events.push(Event {
            time: record.ts,
            kind: record.kind,
            worker: record.worker,
            node: slot_of[worker],
            phase: record.phase,
            metric: record.metric,
            decision: record.decision,
            start,
        });
        match record.kind {
            EventKind::Launch => running_since[worker] = record.ts,
            EventKind::Decision if record.decision == Some(Decision::Continue) => {
                running_since[worker] = record.ts;
            }
            _ => {}
        }
    }
    Timeline { events }
}
