//! Binary trace file format.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic "TESR"                   |
//! | 4      | 1    | format version (1)             |
//! | 5      | 8    | sample_rate_Hz (u64)           |
//! | 13     | 4    | samples_per_record (u32)       |
//! | 17     | 4    | record_count (u32)             |
//! | 21     | 4    | trigger_index (u32)            |
//! | 25     | ...  | record_count × samples_per_record f32 amplitudes |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dsp::{TraceRecord, TraceSet};
use crate::error::{Error, Result};

pub const TRACE_MAGIC: [u8; 4] = *b"TESR";
pub const TRACE_FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 25;

/// Writes a uniform trace set. Amplitudes are stored as 32-bit floats.
pub fn write_trace_file(path: &Path, traces: &TraceSet) -> Result<()> {
    let (samples_per_record, dt, trigger) = traces.uniform_grid()?;
    let sample_rate = (1.0 / dt).round() as u64;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&TRACE_MAGIC)?;
    w.write_all(&[TRACE_FORMAT_VERSION])?;
    w.write_all(&sample_rate.to_le_bytes())?;
    w.write_all(&(samples_per_record as u32).to_le_bytes())?;
    w.write_all(&(traces.len() as u32).to_le_bytes())?;
    w.write_all(&(trigger as u32).to_le_bytes())?;
    for record in &traces.records {
        for &s in &record.samples {
            w.write_all(&(s as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format(format!("{} (at byte offset {offset})", message.into()))
}

/// Reads and validates a trace file.
pub fn read_trace_file(path: &Path) -> Result<TraceSet> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    let got = read_up_to(&mut r, &mut header)?;
    if got < HEADER_LEN {
        return Err(format_err(
            got,
            format!("truncated header: expected {HEADER_LEN} bytes, found {got}"),
        ));
    }
    if header[0..4] != TRACE_MAGIC {
        return Err(format_err(0, format!("bad magic {:?}, expected \"TESR\"", &header[0..4])));
    }
    if header[4] != TRACE_FORMAT_VERSION {
        return Err(format_err(
            4,
            format!("unsupported format version {}, expected {TRACE_FORMAT_VERSION}", header[4]),
        ));
    }
    let sample_rate = u64::from_le_bytes(header[5..13].try_into().unwrap());
    let samples_per_record = u32::from_le_bytes(header[13..17].try_into().unwrap()) as usize;
    let record_count = u32::from_le_bytes(header[17..21].try_into().unwrap()) as usize;
    let trigger_index = u32::from_le_bytes(header[21..25].try_into().unwrap()) as usize;
    if sample_rate == 0 || samples_per_record == 0 {
        return Err(format_err(5, "sample rate and record length must be positive"));
    }

    let expected_body = record_count * samples_per_record * 4;
    let mut body = vec![0u8; expected_body];
    let got = read_up_to(&mut r, &mut body)?;
    if got != expected_body {
        return Err(format_err(
            HEADER_LEN + got,
            format!("truncated body: expected {expected_body} bytes, found {got}"),
        ));
    }
    // must be exactly at EOF
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(format_err(
            HEADER_LEN + expected_body,
            "trailing bytes after the declared record count",
        ));
    }

    let dt = 1.0 / sample_rate as f64;
    let records = (0..record_count)
        .map(|i| {
            let start = i * samples_per_record * 4;
            let samples = (0..samples_per_record)
                .map(|j| {
                    let o = start + j * 4;
                    f32::from_le_bytes(body[o..o + 4].try_into().unwrap()) as f64
                })
                .collect();
            TraceRecord {
                samples,
                sample_interval: dt,
                trigger_index,
                gate_index: i as u32,
            }
        })
        .collect();
    Ok(TraceSet::new(records))
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}
