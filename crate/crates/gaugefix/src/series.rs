//! Diagnostics time series as CSV.

use std::io::Write;

use gaugefix_core::evolution::{DiagnosticsRow, DiagnosticsSeries};

use crate::error::Result;

pub const HEADER: [&str; 7] = ["t", "energy", "norm_divA", "norm_divPi", "norm_A_L", "norm_pi_L", "l2_error"];

/// Shortest round-trip scientific notation, so output is byte-stable.
fn number(x: f64) -> String {
    format!("{x:e}")
}

fn record(row: &DiagnosticsRow) -> [String; 7] {
    [
        number(row.t),
        number(row.energy),
        number(row.norm_div_a),
        number(row.norm_div_pi),
        number(row.norm_a_l),
        number(row.norm_pi_l),
        row.l2_error.map(number).unwrap_or_default(),
    ]
}

/// Writes the header and one line per row; a missing `l2_error` is an empty
/// field.
pub fn write_csv<W: Write>(out: W, series: &DiagnosticsSeries) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for row in series.rows() {
        writer.write_record(record(row))?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses a file written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<DiagnosticsRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(crate::error::HarnessError::Config(format!("unexpected CSV header {header:?}")));
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| crate::error::HarnessError::Config(format!("not a number in CSV: {s:?}")))
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        rows.push(DiagnosticsRow {
            t: parse(&r[0])?,
            energy: parse(&r[1])?,
            norm_div_a: parse(&r[2])?,
            norm_div_pi: parse(&r[3])?,
            norm_a_l: parse(&r[4])?,
            norm_pi_l: parse(&r[5])?,
            l2_error: if r[6].is_empty() { None } else { Some(parse(&r[6])?) },
        });
    }
    Ok(rows)
}
