//! CSV and JSON output. Numbers are written with nine significant digits
//! and a dot decimal separator; absent values are empty cells.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::contact::Wrench;
use crate::harness::{
    AggregateRow, ControllerSummary, Outcome, SweepReport, Trace, TrialResult, TrialSpec,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
}

pub const TRIAL_HEADER: [&str; 25] = [
    "controller",
    "object",
    "location_mm",
    "initial_pose_deg",
    "friction",
    "seed",
    "outcome",
    "diverged",
    "pose_change_deg",
    "touch_time_s",
    "settle_time_s",
    "torque_touch_nm",
    "torque_final_nm",
    "max_penetration_m",
    "max_cone_excess_n",
    "min_normal_force_n",
    "wrench_fx_n",
    "wrench_fy_n",
    "wrench_torque_nm",
    "contacts_left",
    "contacts_right",
    "proximal_contact",
    "trace_path",
    "success",
    "fingertip",
];

pub const AGGREGATE_HEADER: [&str; 7] = [
    "controller",
    "dimension",
    "value",
    "subcategory",
    "count",
    "total",
    "rate",
];

/// Shortest decimal that survives rounding to nine significant digits.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("float formats parse");
    let out = format!("{rounded}");
    if out == "-0" {
        "0".to_string()
    } else {
        out
    }
}

/// `v` as it reads back from a CSV cell.
pub fn round_sig9(v: f64) -> f64 {
    fmt_num(v).parse().unwrap_or(v)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn trial_row(r: &TrialResult) -> Vec<String> {
    let s = &r.spec;
    vec![
        s.controller.to_string(),
        s.object.to_string(),
        fmt_num(s.location_mm),
        opt(s.initial_distal_deg),
        s.friction.to_string(),
        s.seed.to_string(),
        r.outcome.to_string(),
        r.diverged.to_string(),
        opt(r.pose_change_deg),
        opt(r.touch_time),
        opt(r.settle_time),
        opt(r.torque_magnitude_touch),
        opt(r.torque_magnitude_final),
        fmt_num(r.max_penetration),
        opt(r.max_cone_excess),
        opt(r.min_normal_force),
        fmt_num(r.final_wrench.fx),
        fmt_num(r.final_wrench.fy),
        fmt_num(r.final_wrench.torque),
        r.final_contacts[0].to_string(),
        r.final_contacts[1].to_string(),
        r.proximal_contact.to_string(),
        r.trace_path.clone().unwrap_or_default(),
        r.outcome.is_success().to_string(),
        (r.outcome == Outcome::FingertipStable).to_string(),
    ]
}

pub fn write_trials_csv<W: Write>(results: &[TrialResult], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_HEADER)?;
    for r in results {
        w.write_record(trial_row(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    index: usize,
}

impl Row<'_> {
    fn err(&self, message: String) -> IoError {
        IoError::Parse {
            row: self.index,
            message,
        }
    }

    fn cell(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, col: usize) -> Result<T, IoError> {
        self.cell(col)
            .parse()
            .map_err(|_| self.err(format!("bad {} '{}'", TRIAL_HEADER[col], self.cell(col))))
    }

    fn opt(&self, col: usize) -> Result<Option<f64>, IoError> {
        if self.cell(col).is_empty() {
            Ok(None)
        } else {
            self.parse(col).map(Some)
        }
    }
}

/// Read back a per-trial CSV. Derived columns are ignored.
pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialResult>, IoError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRIAL_HEADER) {
        return Err(IoError::Parse {
            row: 0,
            message: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, record) in rd.records().enumerate() {
        let record = record?;
        let row = Row {
            record: &record,
            index: i + 1,
        };
        let controller = row.cell(0).parse().map_err(|e| row.err(format!("{e}")))?;
        let object = row.cell(1).parse().map_err(|e| row.err(format!("{e}")))?;
        let friction = row.cell(4).parse().map_err(|e| row.err(format!("{e}")))?;
        let outcome = row.cell(6).parse().map_err(|e| row.err(format!("{e}")))?;
        let trace = row.cell(22);
        out.push(TrialResult {
            spec: TrialSpec {
                controller,
                object,
                location_mm: row.parse(2)?,
                initial_distal_deg: row.opt(3)?,
                friction,
                seed: row.parse(5)?,
            },
            outcome,
            diverged: row.parse(7)?,
            pose_change_deg: row.opt(8)?,
            touch_time: row.opt(9)?,
            settle_time: row.opt(10)?,
            torque_magnitude_touch: row.opt(11)?,
            torque_magnitude_final: row.opt(12)?,
            max_penetration: row.parse(13)?,
            max_cone_excess: row.opt(14)?,
            min_normal_force: row.opt(15)?,
            final_wrench: Wrench {
                fx: row.parse(16)?,
                fy: row.parse(17)?,
                torque: row.parse(18)?,
            },
            final_contacts: [row.parse(19)?, row.parse(20)?],
            proximal_contact: row.parse(21)?,
            trace_path: (!trace.is_empty()).then(|| trace.to_string()),
        });
    }
    Ok(out)
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for a in rows {
        w.write_record([
            a.controller.clone(),
            a.dimension.clone(),
            a.value.clone(),
            a.subcategory.clone(),
            a.count.to_string(),
            a.total.to_string(),
            fmt_num(a.rate),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[ControllerSummary], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "controller",
        "trials",
        "successes",
        "fingertip_stable",
        "enveloped",
        "joint_limited",
        "diverged",
        "success_rate",
        "fingertip_share",
        "mean_pose_change_deg",
    ])?;
    for s in rows {
        w.write_record([
            s.controller.clone(),
            s.trials.to_string(),
            s.successes.to_string(),
            s.fingertip_stable.to_string(),
            s.enveloped.to_string(),
            s.joint_limited.to_string(),
            s.diverged.to_string(),
            fmt_num(s.success_rate),
            fmt_num(s.fingertip_share),
            opt(s.mean_pose_change),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace_json<W: Write>(trace: &Trace, out: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(out, trace)?;
    Ok(())
}

pub fn read_trace_json<R: Read>(input: R) -> Result<Trace, IoError> {
    Ok(serde_json::from_reader(input)?)
}

fn create(path: &Path) -> Result<fs::File, IoError> {
    fs::File::create(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// File name for a trial's trace inside the trace directory.
pub fn trace_file_name(index: usize, spec: &TrialSpec) -> String {
    let pose = spec
        .initial_distal_deg
        .map(|d| format!("_{d}deg"))
        .unwrap_or_default();
    format!(
        "{index:04}_{}_{}_{}mm{pose}_{}.json",
        spec.controller, spec.object, spec.location_mm, spec.friction
    )
}

/// Write `trials.csv`, `aggregate.csv`, `summary.csv` and, when given, the
/// config echo into `dir`, creating it if needed.
pub fn write_report(
    dir: &Path,
    report: &SweepReport,
    config_echo: Option<&str>,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::File {
        path: dir.to_path_buf(),
        source,
    })?;
    write_trials_csv(&report.results, create(&dir.join("trials.csv"))?)?;
    write_aggregate_csv(&report.aggregates, create(&dir.join("aggregate.csv"))?)?;
    write_summary_csv(&report.summaries, create(&dir.join("summary.csv"))?)?;
    if let Some(text) = config_echo {
        let path = dir.join("config.toml");
        create(&path)?
            .write_all(text.as_bytes())
            .map_err(|source| IoError::File { path, source })?;
    }
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &Trace) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| IoError::File {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    write_trace_json(trace, std::io::BufWriter::new(create(path)?))
}
