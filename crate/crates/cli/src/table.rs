//! Numeric CSV tables: header line, 17 significant digits, `\n` newlines.

use std::io;
use std::path::Path;

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn render(header: &[&str], rows: &[Vec<f64>]) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_value(*v)))
            .map_err(to_io)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub fn write(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    std::fs::write(path, render(header, rows)?)
}

/// Parses a table written by [`write`] back into its header and rows.
pub fn parse(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err("empty table".into());
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
