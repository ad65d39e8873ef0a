//! CSV traces and versioned JSON documents.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use dtea_core::experiments::{Trace, TraceRow};
use dtea_core::selector::{SwitchOutcome, SwitchRecord};
use dtea_core::ModeTag;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const TRACE_HEADER: [&str; 10] = [
    "t",
    "mode",
    "theta_m",
    "omega_m",
    "theta_o",
    "omega_o",
    "tau_cmd",
    "tau_applied",
    "tau_spring",
    "i_q",
];

/// Version stamped on every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Keep-every-k factor that brings a trace sampled every `interval`
/// seconds down to roughly `target_hz`.
pub fn decimation_factor(interval: f64, target_hz: f64) -> usize {
    let k = (1.0 / (interval * target_hz)).round();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

fn row_record(r: &TraceRow) -> [String; 10] {
    // `Display` for f64 is locale-free and round-trips exactly.
    [
        r.t.to_string(),
        r.mode.as_str().to_string(),
        r.theta_m.to_string(),
        r.omega_m.to_string(),
        r.theta_o.to_string(),
        r.omega_o.to_string(),
        r.tau_cmd.to_string(),
        r.tau_applied.to_string(),
        r.tau_spring.to_string(),
        r.i_q.to_string(),
    ]
}

/// Writes the header and every `k`-th row; returns the number of data rows.
pub fn write_trace<W: Write>(
    trace: &Trace,
    out: W,
    decimate_to_hz: Option<f64>,
) -> csv::Result<usize> {
    let k = decimate_to_hz.map_or(1, |hz| decimation_factor(trace.interval, hz));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let mut n = 0;
    for row in trace.rows.iter().step_by(k) {
        w.write_record(row_record(row))?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

pub fn write_trace_csv(trace: &Trace, path: &Path, decimate_to_hz: Option<f64>) -> Result<usize> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace(trace, BufWriter::new(file), decimate_to_hz).map_err(|source| CliError::Csv {
        path: path.into(),
        source,
    })
}

pub const SWITCH_HEADER: [&str; 7] = [
    "request_time",
    "engage_time",
    "from",
    "to",
    "request_torque",
    "outcome",
    "energy_loss",
];

/// One row per switch attempt, in the order they were made.
pub fn write_switches<W: Write>(records: &[SwitchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWITCH_HEADER)?;
    for r in records {
        let outcome = match r.outcome {
            SwitchOutcome::Completed => "completed",
            SwitchOutcome::Rejected => "rejected",
        };
        w.write_record([
            r.request_time.to_string(),
            r.engage_time.to_string(),
            r.from.as_str().to_string(),
            r.to.as_str().to_string(),
            r.request_torque.to_string(),
            outcome.to_string(),
            r.energy_loss.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_switches_csv(records: &[SwitchRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_switches(records, BufWriter::new(file)).map_err(|source| CliError::Csv {
        path: path.into(),
        source,
    })
}

fn parse_field(rec: &csv::StringRecord, i: usize, line: u64) -> std::result::Result<f64, String> {
    let s = rec
        .get(i)
        .ok_or_else(|| format!("line {line}: missing column {}", TRACE_HEADER[i]))?;
    s.parse().map_err(|_| {
        format!(
            "line {line}: column {} is not a number: {s:?}",
            TRACE_HEADER[i]
        )
    })
}

/// Parses a trace written by [`write_trace`]. The row spacing is taken from
/// the first two timestamps.
pub fn read_trace<R: Read>(input: R) -> std::result::Result<Trace, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i as u64 + 2;
        let num = |c| parse_field(&rec, c, line);
        let mode = rec
            .get(1)
            .and_then(ModeTag::parse)
            .ok_or_else(|| format!("line {line}: bad mode {:?}", rec.get(1)))?;
        rows.push(TraceRow {
            t: num(0)?,
            mode,
            theta_m: num(2)?,
            omega_m: num(3)?,
            theta_o: num(4)?,
            omega_o: num(5)?,
            tau_cmd: num(6)?,
            tau_applied: num(7)?,
            tau_spring: num(8)?,
            i_q: num(9)?,
        });
    }
    let interval = match rows.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    Ok(Trace { interval, rows })
}

pub fn read_trace_csv(path: &Path) -> Result<Trace> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(file).map_err(|message| CliError::Format {
        path: path.into(),
        message,
    })
}

/// Top-level JSON wrapper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(kind: &str, body: T) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            body,
        }
    }
}

pub fn to_json_string<T: Serialize>(kind: &str, body: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&Document::new(kind, body))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<()> {
    let text = to_json_string(kind, body).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a document of the given kind, rejecting other kinds and schema
/// versions.
pub fn read_json<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_json_str(&text, kind).map_err(|message| CliError::Format {
        path: path.into(),
        message,
    })
}

pub fn from_json_str<T: DeserializeOwned>(
    text: &str,
    kind: &str,
) -> std::result::Result<T, String> {
    let doc: Document<T> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            doc.schema_version
        ));
    }
    if doc.kind != kind {
        return Err(format!(
            "expected a {kind:?} document, found {:?}",
            doc.kind
        ));
    }
    Ok(doc.body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, dt: f64) -> Trace {
        let mut tr = Trace::new(dt);
        for i in 0..n {
            let x = i as f64 * 0.1 + 1.0 / 3.0;
            tr.push(TraceRow {
                t: i as f64 * dt,
                mode: if i % 3 == 0 {
                    ModeTag::Trans
                } else {
                    ModeTag::Sea
                },
                theta_m: x,
                omega_m: -x,
                theta_o: x * 1e-9,
                omega_o: 1e300,
                tau_cmd: 0.1 + 0.2,
                tau_applied: -0.0,
                tau_spring: f64::MIN_POSITIVE,
                i_q: 12.048192771084338,
            });
        }
        tr
    }

    #[test]
    fn empty_trace_is_header_only() {
        let mut buf = Vec::new();
        assert_eq!(write_trace(&Trace::new(1e-3), &mut buf, None).unwrap(), 0);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\n", TRACE_HEADER.join(","))
        );
    }

    #[test]
    fn decimates_8k_to_50hz() {
        assert_eq!(decimation_factor(1.0 / 8000.0, 50.0), 160);
        let mut buf = Vec::new();
        assert_eq!(
            write_trace(&ramp(8000, 1.0 / 8000.0), &mut buf, Some(50.0)).unwrap(),
            50
        );
    }

    #[test]
    fn round_trip_is_exact() {
        let tr = ramp(40, 1.0 / 8000.0);
        let mut buf = Vec::new();
        write_trace(&tr, &mut buf, None).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.rows, tr.rows);
        assert_eq!(back.interval, tr.rows[1].t - tr.rows[0].t);
    }

    #[test]
    fn switch_rows() {
        use dtea_core::Mode;
        let rec = SwitchRecord {
            request_time: 1.0,
            engage_time: 1.025,
            from: Mode::Sea,
            to: Mode::Pea,
            request_torque: 0.5,
            outcome: SwitchOutcome::Completed,
            energy_loss: 0.0,
        };
        let mut buf = Vec::new();
        write_switches(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            format!(
                "{}\n1,1.025,SEA,PEA,0.5,completed,0\n",
                SWITCH_HEADER.join(",")
            )
        );
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn document_kind_and_version_are_checked() {
        let text = to_json_string("thing", &serde_json::json!({"x": 1})).unwrap();
        let v: serde_json::Value = from_json_str(&text, "thing").unwrap();
        assert_eq!(v["x"], 1);
        assert!(from_json_str::<serde_json::Value>(&text, "other").is_err());
        let bumped = text.replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(from_json_str::<serde_json::Value>(&bumped, "thing").is_err());
    }
}
