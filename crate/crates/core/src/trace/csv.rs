//! Canonical CSV trace format.
//!
//! ```text
//! timestamp,size,src_ip,dst_ip,src_port,dst_port,protocol,ttl,tcp_flags
//! 0.000000,700,10.0.0.1,10.0.0.2,1234,80,6,125,2
//! ```

use std::io::{Read, Write};
use std::net::Ipv4Addr;
use std::str::FromStr;

use super::{PacketRecord, Timestamp, Trace};
use crate::{Error, Result};

pub const HEADER: [&str; 9] = [
    "timestamp", "size", "src_ip", "dst_ip", "src_port", "dst_port", "protocol", "ttl", "tcp_flags",
];

/// Reads a canonical CSV trace. The duration is the last timestamp.
pub fn read_csv<R: Read>(input: R) -> Result<Trace> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_err(1, e))?,
        None => return Err(Error::Csv { line: 1, detail: "missing header".into() }),
    };
    if header.len() != HEADER.len() || header.iter().zip(HEADER).any(|(a, b)| a.trim() != b) {
        return Err(Error::Csv {
            line: 1,
            detail: format!("expected header `{}`", HEADER.join(",")),
        });
    }

    let mut packets = Vec::new();
    let mut last = Timestamp::ZERO;
    for rec in records {
        let rec = rec.map_err(|e| csv_err(0, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != HEADER.len() {
            return Err(Error::Csv {
                line,
                detail: format!("expected {} fields, found {}", HEADER.len(), rec.len()),
            });
        }
        let ts: f64 = field(&rec[0], "timestamp", line)?;
        let timestamp = Timestamp::from_secs_f64(ts).map_err(|e| Error::Csv { line, detail: e.to_string() })?;
        if timestamp < last {
            return Err(Error::Csv {
                line,
                detail: format!("timestamp {timestamp} precedes previous {last}"),
            });
        }
        last = timestamp;
        packets.push(PacketRecord {
            timestamp,
            size: field(&rec[1], "size", line)?,
            src_ip: field::<Ipv4Addr>(&rec[2], "src_ip", line)?,
            dst_ip: field::<Ipv4Addr>(&rec[3], "dst_ip", line)?,
            src_port: field(&rec[4], "src_port", line)?,
            dst_port: field(&rec[5], "dst_port", line)?,
            protocol: field(&rec[6], "protocol", line)?,
            ttl: field(&rec[7], "ttl", line)?,
            tcp_flags: field(&rec[8], "tcp_flags", line)?,
        });
    }
    Trace::from_packets(packets)
}

fn field<T: FromStr>(raw: &str, name: &str, line: usize) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Csv {
        line,
        detail: format!("cannot parse {name} from `{raw}`"),
    })
}

fn csv_err(line: usize, e: ::csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(line);
    Error::Csv { line, detail: e.to_string() }
}

/// Writes the canonical CSV form: LF endings, six-decimal timestamps.
pub fn write_csv<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: ::csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(HEADER).map_err(io)?;
    for p in trace.packets() {
        w.write_record([
            p.timestamp.to_string(),
            p.size.to_string(),
            p.src_ip.to_string(),
            p.dst_ip.to_string(),
            p.src_port.to_string(),
            p.dst_port.to_string(),
            p.protocol.to_string(),
            p.ttl.to_string(),
            p.tcp_flags.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Convenience wrapper returning the CSV as a string.
pub fn to_csv_string(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_csv(trace, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}
