//! Plain CSV tables for plotting tools.

use std::io::Write;

use crate::{Error, Result};

/// Writes a header line and one line per row, LF terminated.
pub fn write_table<W, I, R>(out: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: ::csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Formats a float so it reads back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}
