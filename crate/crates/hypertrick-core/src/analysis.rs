//! Post-hoc evaluation of recorded timelines.
//!
//! [`summarize`] turns a [`Timeline`] (from the simulator, or reconstructed
//! from an orchestrator log) into a [`StudySummary`]: makespan, measured
//! completion rate, node occupancy, best score and time-to-best, per-phase
//! kill counts, and per-worker learning curves. [`compare`] lines up several
//! summaries for side-by-side reporting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::sim::{Event, EventKind, Timeline};
use crate::study::Decision;

/// The best report seen in a study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestPoint {
    pub worker: u32,
    pub metric: f64,
    pub time: f64,
}

/// One point of a worker's learning curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub time: f64,
    pub metric: f64,
}

/// Everything the evaluation tables need from one study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudySummary {
    /// Workers launched.
    pub w0: u32,
    pub n_nodes: u32,
    pub n_phases: u32,
    /// Last event time minus first event time.
    pub makespan: f64,
    /// Completed phases over the full budget `w0 * n_phases`.
    pub measured_alpha: f64,
    /// Busy node-time over `n_nodes * makespan`.
    pub occupancy: f64,
    pub best: Option<BestPoint>,
    /// Terminations decided at each phase.
    pub kill_counts: Vec<u32>,
    pub failures: u32,
    /// Reports delivered by each worker (its completed phase count).
    pub completed_phases: Vec<u32>,
    /// Workers that finished the whole schedule, ascending.
    pub completers: Vec<u32>,
    /// `(worker, curve)` pairs, ascending by worker.
    pub curves: Vec<(u32, Vec<CurvePoint>)>,
    /// Step function of the busy-node fraction: value from each time onward.
    pub occupancy_series: Vec<(f64, f64)>,
}

impl StudySummary {
    /// Step function of the best metric seen so far, one point per
    /// improvement.
    pub fn best_so_far_series(&self) -> Vec<(f64, f64)> {
        let mut points: Vec<CurvePoint> = self
            .curves
            .iter()
            .flat_map(|(_, curve)| curve.iter().copied())
            .collect();
        points.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in points {
            if out.last().is_none_or(|(_, best)| p.metric > *best) {
                out.push((p.time, p.metric));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    EmptyTimeline,
    /// Structural violation at `events[index]`.
    Malformed { index: usize, reason: String },
    NeedAtLeastTwo { got: usize },
    LabelCountMismatch { summaries: usize, labels: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::EmptyTimeline => f.write_str("empty timeline"),
            AnalysisError::Malformed { index, reason } => {
                write!(f, "event {index}: {reason}")
            }
            AnalysisError::NeedAtLeastTwo { got } => {
                write!(f, "comparison needs at least 2 studies, got {got}")
            }
            AnalysisError::LabelCountMismatch { summaries, labels } => {
                write!(f, "{summaries} summaries but {labels} labels")
            }
        }
    }
}

impl core::error::Error for AnalysisError {}

fn malformed(index: usize, reason: &str) -> AnalysisError {
    AnalysisError::Malformed {
        index,
        reason: reason.to_string(),
    }
}

/// Per-worker progress while validating.
#[derive(Clone, Copy, Default)]
struct WorkerTrace {
    launched: bool,
    reports: u32,
    finished: bool,
}

/// Validates the structural invariants and reports the first violation.
fn validate(events: &[Event]) -> Result<(), AnalysisError> {
    if events.is_empty() {
        return Err(AnalysisError::EmptyTimeline);
    }
    let max_worker = events.iter().map(|e| e.worker).max().unwrap_or(0) as usize;
    let mut traces = alloc::vec![WorkerTrace::default(); max_worker + 1];
    let mut prev_time = f64::NEG_INFINITY;

    for (index, event) in events.iter().enumerate() {
        if !event.time.is_finite() || event.time < 0.0 {
            return Err(malformed(index, "time must be finite and non-negative"));
        }
        if event.time < prev_time {
            return Err(malformed(index, "events out of time order"));
        }
        prev_time = event.time;

        let trace = &mut traces[event.worker as usize];
        match event.kind {
            EventKind::Launch => {
                if event.node.is_none() {
                    return Err(malformed(index, "launch without node_id"));
                }
                if trace.launched {
                    return Err(malformed(index, "worker launched twice"));
                }
                trace.launched = true;
            }
            EventKind::Report => {
                let Some(phase) = event.phase else {
                    return Err(malformed(index, "report without phase_index"));
                };
                if event.node.is_none() {
                    return Err(malformed(index, "report without node_id"));
                }
                match event.metric {
                    Some(m) if m.is_finite() => {}
                    _ => return Err(malformed(index, "report without a finite metric")),
                }
                check_span(index, event)?;
                if !trace.launched {
                    return Err(malformed(index, "report before launch"));
                }
                if trace.finished {
                    return Err(malformed(index, "report after a terminal event"));
                }
                if phase != trace.reports {
                    return Err(malformed(
                        index,
                        "phase_index must increase by exactly 1 per worker",
                    ));
                }
                trace.reports += 1;
            }
            EventKind::Decision => {
                if event.phase.is_none() {
                    return Err(malformed(index, "decision without phase_index"));
                }
                if event.decision.is_none() {
                    return Err(malformed(index, "decision without a verdict"));
                }
            }
            EventKind::Terminate | EventKind::Complete => {
                if !trace.launched {
                    return Err(malformed(index, "terminal event before launch"));
                }
                if trace.finished {
                    return Err(malformed(index, "worker finished twice"));
                }
                trace.finished = true;
            }
            EventKind::Failure => {
                check_span(index, event)?;
                if !trace.launched {
                    return Err(malformed(index, "terminal event before launch"));
                }
                if trace.finished {
                    return Err(malformed(index, "worker finished twice"));
                }
                trace.finished = true;
            }
        }
    }
    Ok(())
}

/// Reports and failures carry the executed span `[start, time]`.
fn check_span(index: usize, event: &Event) -> Result<(), AnalysisError> {
    match event.start {
        Some(start) if start.is_finite() && start >= 0.0 && start <= event.time => Ok(()),
        Some(_) => Err(malformed(index, "start must lie within [0, time]")),
        None => Err(malformed(index, "execution event without start")),
    }
}

/// Summarizes a timeline, inferring the node and phase counts from the
/// events themselves (maximum id seen plus one).
pub fn summarize(timeline: &Timeline) -> Result<StudySummary, AnalysisError> {
    summarize_with(timeline, None, None)
}

/// [`summarize`] with explicit dimensions, for timelines that never exercise
/// their full cluster or phase budget.
pub fn summarize_with(
    timeline: &Timeline,
    n_nodes: Option<u32>,
    n_phases: Option<u32>,
) -> Result<StudySummary, AnalysisError> {
    let events = &timeline.events;
    validate(events)?;

    let inferred_nodes = events.iter().filter_map(|e| e.node).max().map_or(1, |n| n + 1);
    let inferred_phases = events
        .iter()
        .filter_map(|e| e.phase)
        .max()
        .map_or(1, |p| p + 1);
    let n_nodes = n_nodes.unwrap_or(inferred_nodes).max(inferred_nodes);
    let n_phases = n_phases.unwrap_or(inferred_phases).max(inferred_phases);

    let t0 = events.first().map_or(0.0, |e| e.time);
    let t_end = events.last().map_or(0.0, |e| e.time);
    let makespan = t_end - t0;

    let w0 = events
        .iter()
        .filter(|e| e.kind == EventKind::Launch)
        .count() as u32;

    let max_worker = events.iter().map(|e| e.worker).max().unwrap_or(0) as usize;
    let mut reports_per_worker = alloc::vec![0u32; max_worker + 1];
    let mut curves: Vec<(u32, Vec<CurvePoint>)> = Vec::new();
    let mut best: Option<BestPoint> = None;
    let mut kill_counts = alloc::vec![0u32; n_phases as usize];
    let mut failures = 0u32;
    let mut busy = 0.0f64;
    let mut boundaries: Vec<(f64, i32)> = Vec::new();

    for event in events {
        match event.kind {
            EventKind::Report => {
                let metric = event.metric.expect("validated");
                let start = event.start.expect("validated");
                reports_per_worker[event.worker as usize] += 1;
                busy += event.time - start;
                boundaries.push((start, 1));
                boundaries.push((event.time, -1));
                let replace = match best {
                    None => true,
                    // Strictly better wins; ties keep the earliest, then the
                    // lowest worker id (events are already time-ordered).
                    Some(b) => {
                        metric > b.metric
                            || (metric == b.metric
                                && event.time == b.time
                                && event.worker < b.worker)
                    }
                };
                if replace {
                    best = Some(BestPoint {
                        worker: event.worker,
                        metric,
                        time: event.time,
                    });
                }
                match curves.iter_mut().find(|(w, _)| *w == event.worker) {
                    Some((_, curve)) => curve.push(CurvePoint {
                        time: event.time,
                        metric,
                    }),
                    None => curves.push((event.worker, alloc::vec![CurvePoint {
                        time: event.time,
                        metric,
                    }])),
                }
            }
            EventKind::Failure => {
                let start = event.start.expect("validated");
                busy += event.time - start;
                boundaries.push((start, 1));
                boundaries.push((event.time, -1));
                failures += 1;
            }
            EventKind::Decision if event.decision == Some(Decision::Terminate) => {
                kill_counts[event.phase.expect("validated") as usize] += 1;
            }
            _ => {}
        }
    }
    curves.sort_unstable_by_key(|(w, _)| *w);

    let completers = timeline.completers();
    let completed_total: u64 = reports_per_worker.iter().map(|c| u64::from(*c)).sum();
    let budget = u64::from(w0) * u64::from(n_phases);
    let measured_alpha = if budget == 0 {
        0.0
    } else {
        completed_total as f64 / budget as f64
    };

    boundaries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut occupancy_series: Vec<(f64, f64)> = Vec::new();
    let mut active = 0i32;
    for (time, delta) in boundaries {
        active += delta;
        let fraction = f64::from(active.max(0)) / f64::from(n_nodes);
        match occupancy_series.last_mut() {
            Some((t, f)) if *t == time => *f = fraction,
            _ => occupancy_series.push((time, fraction)),
        }
    }
    let occupancy = if makespan > 0.0 {
        busy / (f64::from(n_nodes) * makespan)
    } else {
        0.0
    };

    Ok(StudySummary {
        w0,
        n_nodes,
        n_phases,
        makespan,
        measured_alpha,
        occupancy,
        best,
        kill_counts,
        failures,
        completed_phases: reports_per_worker,
        completers,
        curves,
        occupancy_series,
    })
}

/// One line of the comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub makespan: f64,
    pub measured_alpha: f64,
    pub occupancy: f64,
    pub best_worker: Option<u32>,
    pub best_metric: Option<f64>,
    pub time_to_best: Option<f64>,
    /// Empty when the study is comparable with the first one.
    pub warning: String,
}

/// A rendered multi-study comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<SummaryRow>,
}

impl Comparison {
    /// Fixed-width text table, one row per study.
    pub fn render_text(&self) -> String {
        let label_width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .chain(core::iter::once("label".len()))
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        out.push_str(&alloc::format!(
            "{:<label_width$}  {:>10}  {:>8}  {:>9}  {:>6}  {:>12}  {:>12}  {}\n",
            "label",
            "makespan",
            "alpha",
            "occupancy",
            "best",
            "best_metric",
            "time_to_best",
            "warnings"
        ));
        for row in &self.rows {
            let (best, metric, when) = match (row.best_worker, row.best_metric, row.time_to_best) {
                (Some(w), Some(m), Some(t)) => (
                    alloc::format!("W{w}"),
                    alloc::format!("{m:.6}"),
                    alloc::format!("{t:.6}"),
                ),
                _ => ("-".to_string(), "-".to_string(), "-".to_string()),
            };
            out.push_str(&alloc::format!(
                "{:<label_width$}  {:>10.6}  {:>8.6}  {:>9.6}  {:>6}  {:>12}  {:>12}  {}\n",
                row.label,
                row.makespan,
                row.measured_alpha,
                row.occupancy,
                best,
                metric,
                when,
                row.warning
            ));
        }
        out
    }
}

/// Lines up several studies. Requires at least two; a phase-count mismatch
/// against the first study is flagged in that row's warning column rather
/// than rejected.
pub fn compare(summaries: &[StudySummary], labels: &[String]) -> Result<Comparison, AnalysisError> {
    if summaries.len() != labels.len() {
        return Err(AnalysisError::LabelCountMismatch {
            summaries: summaries.len(),
            labels: labels.len(),
        });
    }
    if summaries.len() < 2 {
        return Err(AnalysisError::NeedAtLeastTwo {
            got: summaries.len(),
        });
    }
    let reference_phases = summaries[0].n_phases;
    let rows = summaries
        .iter()
        .zip(labels)
        .map(|(summary, label)| {
            let warning = if summary.n_phases != reference_phases {
                alloc::format!(
                    "n_phases={} differs from first study ({})",
                    summary.n_phases,
                    reference_phases
                )
            } else {
                String::new()
            };
            SummaryRow {
                label: label.clone(),
                makespan: summary.makespan,
                measured_alpha: summary.measured_alpha,
                occupancy: summary.occupancy,
                best_worker: summary.best.map(|b| b.worker),
                best_metric: summary.best.map(|b| b.metric),
                time_to_best: summary.best.map(|b| b.time),
                warning,
            }
        })
        .collect();
    Ok(Comparison { rows })
}
