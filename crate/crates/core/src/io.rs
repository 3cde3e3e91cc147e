//! Individual patient data files: CSV with a `time,status` header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::SurvivalSample;

/// Reads a `time,status` CSV. Status must be 0 (censored) or 1 (event).
/// Errors name the offending line, counting the header as line 1.
pub fn load_ipd(path: impl AsRef<Path>) -> Result<SurvivalSample> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    parse_ipd(file)
}

pub fn parse_ipd<R: Read>(input: R) -> Result<SurvivalSample> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ti), Some(si)) = (column("time"), column("status")) else {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header 'time,status', found '{}'", headers.iter().collect::<Vec<_>>().join(",")),
        });
    };

    let mut times = Vec::new();
    let mut events = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(times.len() + 2, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |i: usize| record.get(i).unwrap_or("");
        let time: f64 = field(ti).parse().map_err(|_| Error::Parse {
            line,
            message: format!("time '{}' is not a number", field(ti)),
        })?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("time {time} must be finite and nonnegative"),
            });
        }
        let event = match field(si) {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("status '{other}' must be 0 or 1"),
                })
            }
        };
        times.push(time);
        events.push(event);
    }
    if times.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "file contains no observations".into(),
        });
    }
    SurvivalSample::new(times, events)
}

pub fn write_ipd<W: Write>(sample: &SurvivalSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "status"])?;
    for (t, e) in sample.iter() {
        w.write_record([t.to_string(), u8::from(e).to_string()])?;
    }
    w.flush()?;
    Ok(())
}
