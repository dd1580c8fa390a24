use std::path::Path;

use anyhow::Context;
use hypertrick_core::analysis::StudySummary;

/// `summary.csv`: one row per study.
/// Header: label,makespan,alpha,occupancy,best_worker,best_metric,time_to_best,workers,nodes,phases,failures
pub fn write_summary_csv(path: &Path, entries: &[(String, StudySummary)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record([
        "label",
        "makespan",
        "alpha",
        "occupancy",
        "best_worker",
        "best_metric",
        "time_to_best",
        "workers",
        "nodes",
        "phases",
        "failures",
    ])?;
    for (label, s) in entries {
        let (bw, bm, bt) = match s.best {
            Some(b) => (
                b.worker.to_string(),
                format!("{:.6}", b.metric),
                format!("{:.6}", b.time),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            label.clone(),
            format!("{:.6}", s.makespan),
            format!("{:.6}", s.measured_alpha),
            format!("{:.6}", s.occupancy),
            bw,
            bm,
            bt,
            s.w0.to_string(),
            s.n_nodes.to_string(),
            s.n_phases.to_string(),
            s.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `occupancy_<label>.csv`: the busy-node fraction step series.
/// Header: time,fraction
pub fn write_occupancy_csv(path: &Path, series: &[(f64, f64)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["time", "fraction"])?;
    for (time, fraction) in series {
        w.write_record([format!("{time:.6}"), format!("{fraction:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

/// `curves_<label>.csv`: every report, grouped by worker.
/// Header: worker,time,metric
pub fn write_curves_csv(
    path: &Path,
    curves: &[(u32, Vec<hypertrick_core::analysis::CurvePoint>)],
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["worker", "time", "metric"])?;
    for (worker, curve) in curves {
        for point in curve {
            w.write_record([
                worker.to_string(),
                format!("{:.6}", point.time),
                format!("{}", point.metric),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
