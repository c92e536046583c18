//! CSV emission and optional SVG figures.

use std::fs;
use std::path::{Path, PathBuf};

use super::plot;
use super::{mean_convergence, summarize, RunRecord, SchemeId, TrialTrace};
use crate::error::{Error, Result};
use crate::model::PortSelection;

pub const SWEEP_HEADER: [&str; 8] = [
    "scheme",
    "snr_db",
    "trial",
    "rate",
    "rho",
    "trace_q",
    "ports",
    "outer_iterations",
];
pub const SUMMARY_HEADER: [&str; 5] = ["scheme", "snr_db", "mean_rate", "std_rate", "n_trials"];
pub const CONVERGENCE_HEADER: [&str; 3] = ["snr_db", "outer_iteration", "objective"];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_sweep_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_rows(
        path,
        &SWEEP_HEADER,
        records.iter().map(|r| {
            vec![
                r.scheme.to_string(),
                r.snr_db.to_string(),
                r.trial.to_string(),
                r.rate.to_string(),
                r.rho.to_string(),
                r.trace_q.to_string(),
                r.ports.to_string(),
                r.outer_iterations.to_string(),
            ]
        }),
    )
}

pub fn write_summary_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_rows(
        path,
        &SUMMARY_HEADER,
        summarize(records).into_iter().map(|s| {
            vec![
                s.scheme.to_string(),
                s.snr_db.to_string(),
                s.mean_rate.to_string(),
                s.std_rate.to_string(),
                s.n_trials.to_string(),
            ]
        }),
    )
}

pub fn write_convergence_csv(path: &Path, traces: &[TrialTrace]) -> Result<()> {
    let rows = mean_convergence(traces).into_iter().flat_map(|(snr, curve)| {
        curve
            .into_iter()
            .map(move |p| vec![snr.to_string(), p.outer_iteration.to_string(), p.objective.to_string()])
    });
    write_rows(path, &CONVERGENCE_HEADER, rows)
}

/// Reads back a file written by [`write_sweep_csv`].
pub fn read_sweep_csv(path: &Path, m_ports: usize) -> Result<Vec<RunRecord>> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(wrap)?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(wrap)?;
        let line = i + 2;
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            field(k).parse().map_err(|_| Error::Parse {
                line,
                msg: format!("column `{}`", SWEEP_HEADER[k]),
            })
        };
        let int = |k: usize| -> Result<usize> {
            field(k).parse().map_err(|_| Error::Parse {
                line,
                msg: format!("column `{}`", SWEEP_HEADER[k]),
            })
        };
        let ports = field(6)
            .split_whitespace()
            .map(|p| p.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse {
                line,
                msg: "column `ports`".into(),
            })?;
        out.push(RunRecord {
            scheme: field(0).parse::<SchemeId>()?,
            snr_db: num(1)?,
            trial: int(2)?,
            rate: num(3)?,
            rho: num(4)?,
            trace_q: num(5)?,
            ports: PortSelection::new(ports, m_ports)?,
            outer_iterations: int(7)?,
            converged: true,
        });
    }
    Ok(out)
}

/// Writes `sweep.csv`, `summary.csv`, `convergence.csv` and, with `plots`,
/// the two SVG figures into `out_dir`. Returns the written paths.
pub fn emit_outputs(records: &[RunRecord], traces: &[TrialTrace], out_dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let sweep = out_dir.join("sweep.csv");
    let summary = out_dir.join("summary.csv");
    let convergence = out_dir.join("convergence.csv");
    write_sweep_csv(&sweep, records)?;
    write_summary_csv(&summary, records)?;
    write_convergence_csv(&convergence, traces)?;
    let mut written = vec![sweep, summary, convergence];
    if plots {
        let fig1 = out_dir.join("fig1_convergence.svg");
        let fig2 = out_dir.join("fig2_snr_rate.svg");
        fs::write(&fig1, plot::convergence_svg(&mean_convergence(traces))).map_err(|e| Error::io(&fig1, e))?;
        fs::write(&fig2, plot::snr_rate_svg(&summarize(records))).map_err(|e| Error::io(&fig2, e))?;
        written.push(fig1);
        written.push(fig2);
    }
    Ok(written)
}
