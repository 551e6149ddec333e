//! CSV output helpers shared by the sweep and simulation emitters.
//!
//! Non-finite values are written as the literals `inf`, `-inf` and `nan`.

use std::io::Write;

use crate::error::Result;

/// Format a number for CSV output.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

/// Format an optional number; `None` becomes an empty field.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Write a header row followed by data rows.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows that can be emitted as CSV.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_rows<W: Write, R: CsvRow>(out: W, rows: &[R]) -> Result<()> {
    write_csv(out, R::header(), rows.iter().map(CsvRow::fields))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_literals() {
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.5), "0.5");
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], vec![vec![fmt_num(1.0), fmt_num(f64::INFINITY)]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,inf\n");
    }
}
