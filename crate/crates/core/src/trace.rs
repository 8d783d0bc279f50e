//! Trace files: one CSV row per snapshot plus a `<trace>.config.json` sidecar
//! holding the configuration and its hash. Replaying a trace re-runs the
//! session from the sidecar and compares every row textually.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec3;
use crate::session::{Session, SessionConfig, SessionError, Snapshot};

pub const TRACE_COLUMNS: [&str; 25] = [
    "tick", "t", "axle_x", "axle_y", "axle_z", "theta", "phase", "L_x", "L_y", "L_z", "tau_x", "tau_y", "tau_z",
    "fA_x", "fA_y", "fA_z", "fB_x", "fB_y", "fB_z", "pA_x", "pA_y", "pA_z", "pB_x", "pB_y", "pB_z",
];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("sidecar: {0}")]
    Sidecar(String),
    #[error("config hash mismatch: sidecar says {recorded}, config hashes to {actual}")]
    HashMismatch { recorded: String, actual: String },
    #[error(transparent)]
    Session(#[from] SessionError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TraceError + '_ {
    move |source| TraceError::Io { path: path.to_path_buf(), source }
}

/// Row fields in column order. Floats use 17 significant digits so every value
/// round-trips exactly.
pub fn row_fields(s: &Snapshot) -> Vec<String> {
    let mut out = Vec::with_capacity(TRACE_COLUMNS.len());
    out.push(s.tick.to_string());
    let mut f = |v: f64| out.push(format!("{v:.16e}"));
    f(s.t);
    let vec = |v: Vec3| [v.x, v.y, v.z];
    for v in vec(s.axle) {
        f(v);
    }
    f(s.theta);
    f(s.wheel_phase);
    for v in [s.l_world, s.tau_world, s.force_a, s.force_b, s.pos_a, s.pos_b] {
        for c in vec(v) {
            f(c);
        }
    }
    out
}

/// Streams snapshots as CSV rows with LF line endings.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(sink: W) -> Result<Self, TraceError> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        inner.write_record(TRACE_COLUMNS)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, s: &Snapshot) -> Result<(), TraceError> {
        self.inner.write_record(row_fields(s))?;
        Ok(())
    }

    pub fn finish(self) -> Result<W, TraceError> {
        self.inner.into_inner().map_err(|e| TraceError::Io {
            path: PathBuf::new(),
            source: std::io::Error::other(e.to_string()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub config_hash: String,
    pub config: SessionConfig,
}

impl Sidecar {
    pub fn new(config: SessionConfig) -> Self {
        Self { config_hash: config.content_hash(), config }
    }

    /// Rejects a sidecar whose config no longer matches its recorded hash.
    pub fn check(&self) -> Result<(), TraceError> {
        let actual = self.config.content_hash();
        if actual == self.config_hash {
            Ok(())
        } else {
            Err(TraceError::HashMismatch { recorded: self.config_hash.clone(), actual })
        }
    }
}

pub fn sidecar_path(trace: &Path) -> PathBuf {
    let mut name = trace.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub ticks: u64,
    pub snapshots: usize,
    /// Largest pre-clamp and post-clamp force magnitude across both devices.
    pub max_raw_force_n: f64,
    pub max_force_n: f64,
}

/// Records `ticks` ticks of `session` into `sink`. On a blow-up the rows
/// written so far stay in the sink and the error is returned.
pub fn record<W: Write>(session: &mut Session, ticks: u64, sink: W) -> Result<(RunSummary, W), TraceError> {
    let mut writer = TraceWriter::new(sink)?;
    let mut summary = RunSummary { ticks: 0, snapshots: 0, max_raw_force_n: 0.0, max_force_n: 0.0 };
    let mut failure = None;
    for _ in 0..ticks {
        match session.tick() {
            Ok(snap) => {
                summary.ticks += 1;
                let f = session.last_forces();
                summary.max_raw_force_n = summary.max_raw_force_n.max(f.raw_force_a.norm()).max(f.raw_force_b.norm());
                summary.max_force_n = summary.max_force_n.max(f.force_a.norm()).max(f.force_b.norm());
                if let Some(s) = snap {
                    writer.write(&s)?;
                    summary.snapshots += 1;
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let sink = writer.finish()?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok((summary, sink)),
    }
}

/// Runs `config` for `ticks` ticks, writing the trace to `out` and the sidecar next to it.
pub fn record_to_file(config: &SessionConfig, ticks: u64, out: &Path) -> Result<RunSummary, TraceError> {
    let mut session = Session::new(config.clone())?;
    let sidecar = serde_json::to_vec_pretty(&Sidecar::new(config.clone())).expect("sidecar serializes");
    let side = sidecar_path(out);
    fs::write(&side, sidecar).map_err(io_err(&side))?;
    let file = fs::File::create(out).map_err(io_err(out))?;
    let (summary, file) = record(&mut session, ticks, std::io::BufWriter::new(file))?;
    file.into_inner()
        .map_err(|e| TraceError::Io { path: out.to_path_buf(), source: e.into_error() })?
        .sync_all()
        .map_err(io_err(out))?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    /// 1-based line number in the file.
    pub line: u64,
    pub tick: u64,
    pub fields: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TraceFile {
    pub rows: Vec<TraceRow>,
    /// The file ended inside a row; that partial row was dropped.
    pub truncated: bool,
}

/// Parses trace text. An empty input is a trace with no rows. A final line
/// without its newline counts as truncation, not an error.
pub fn parse_trace(text: &str) -> Result<TraceFile, TraceError> {
    if text.is_empty() {
        return Ok(TraceFile::default());
    }
    let (body, truncated) = match text.rfind('\n') {
        Some(i) if i + 1 == text.len() => (text, false),
        Some(i) => (&text[..=i], true),
        // not even a complete header line
        None => return Ok(TraceFile { rows: Vec::new(), truncated: true }),
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(body.as_bytes());
    let mut records = reader.records();
    match records.next() {
        Some(Ok(header)) if header.iter().eq(TRACE_COLUMNS) => {}
        Some(Ok(_)) => return Err(TraceError::Parse { line: 1, message: "unexpected header".into() }),
        Some(Err(e)) => return Err(e.into()),
        None => return Ok(TraceFile { rows: Vec::new(), truncated }),
    }
    let mut rows: Vec<TraceRow> = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| TraceError::Parse { line, message };
        if rec.len() != TRACE_COLUMNS.len() {
            return Err(bad(format!("expected {} fields, found {}", TRACE_COLUMNS.len(), rec.len())));
        }
        let tick: u64 = rec[0].parse().map_err(|_| bad(format!("bad tick {:?}", &rec[0])))?;
        for (name, v) in TRACE_COLUMNS.iter().zip(rec.iter()).skip(1) {
            v.parse::<f64>().map_err(|_| bad(format!("bad {name} value {v:?}")))?;
        }
        if let Some(prev) = rows.last() {
            if tick <= prev.tick {
                return Err(bad(format!("tick {tick} does not follow {}", prev.tick)));
            }
        }
        rows.push(TraceRow { line, tick, fields: rec.iter().map(str::to_owned).collect() });
    }
    Ok(TraceFile { rows, truncated })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    /// 1-based index among data rows.
    pub record: usize,
    pub tick: u64,
    pub line: u64,
    /// First differing column, if the regenerated row exists.
    pub column: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub records: usize,
    pub truncated: bool,
    pub divergence: Option<Divergence>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Re-runs the sidecar configuration and compares each recorded row.
pub fn replay(sidecar: &Sidecar, trace: &TraceFile) -> Result<ReplayReport, TraceError> {
    replay_with(sidecar, trace, &mut |_| {})
}

/// As [`replay`], handing each regenerated row to `on_row` as it is produced.
pub fn replay_with(
    sidecar: &Sidecar,
    trace: &TraceFile,
    on_row: &mut dyn FnMut(&[String]),
) -> Result<ReplayReport, TraceError> {
    sidecar.check()?;
    let mut session = Session::new(sidecar.config.clone())?;
    let mut report = ReplayReport { records: trace.rows.len(), truncated: trace.truncated, divergence: None };
    let mut rows = trace.rows.iter().enumerate();
    let Some(mut current) = rows.next() else {
        return Ok(report);
    };
    loop {
        let (idx, row) = current;
        let diverge = |column| Divergence { record: idx + 1, tick: row.tick, line: row.line, column };
        let snap = loop {
            if session.tick_index() >= row.tick {
                break None;
            }
            match session.tick() {
                Ok(Some(s)) => break Some(s),
                Ok(None) => {}
                // the recording cannot extend past a halt, so this row diverges
                Err(_) => break None,
            }
        };
        let Some(snap) = snap.filter(|s| s.tick == row.tick) else {
            report.divergence = Some(diverge(None));
            return Ok(report);
        };
        let regenerated = row_fields(&snap);
        on_row(&regenerated);
        if let Some(col) = (0..TRACE_COLUMNS.len()).find(|&c| regenerated[c] != row.fields[c]) {
            report.divergence = Some(diverge(Some(TRACE_COLUMNS[col])));
            return Ok(report);
        }
        match rows.next() {
            Some(next) => current = next,
            None => return Ok(report),
        }
    }
}

/// Loads `trace` and its sidecar from disk and replays them.
pub fn replay_file(trace: &Path) -> Result<ReplayReport, TraceError> {
    replay_file_with(trace, &mut |_| {})
}

pub fn replay_file_with(trace: &Path, on_row: &mut dyn FnMut(&[String])) -> Result<ReplayReport, TraceError> {
    let side = sidecar_path(trace);
    let sidecar_text = fs::read_to_string(&side).map_err(io_err(&side))?;
    let sidecar: Sidecar = serde_json::from_str(&sidecar_text).map_err(|e| TraceError::Sidecar(e.to_string()))?;
    let text = fs::read_to_string(trace).map_err(io_err(trace))?;
    replay_with(&sidecar, &parse_trace(&text)?, on_row)
}
