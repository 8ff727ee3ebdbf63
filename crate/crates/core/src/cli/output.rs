//! CSV, JSON and plain-table rendering.

use std::io::{self, Write};
use std::str::FromStr;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::eigen::SharpConstantReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

pub const REPORT_COLUMNS: [&str; 8] = ["n", "alpha", "beta", "lambda_min", "m_n", "predicted", "ratio", "residual"];

/// Shortest round-trip decimal, `nan` for NaN; exponent form outside `[1e-4, 1e15)`.
pub fn csv_number(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".to_string()
    } else if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// 17 significant digits; `null` for non-finite values.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

fn report_values(r: &SharpConstantReport) -> [f64; 7] {
    [r.alpha, r.beta, r.lambda_min, r.m_n, r.predicted, r.ratio, r.residual]
}

/// Placeholder row for a failed solve.
pub fn failed_report(n: usize, alpha: f64, beta: f64) -> SharpConstantReport {
    SharpConstantReport {
        n,
        alpha,
        beta,
        lambda_min: f64::NAN,
        m_n: f64::NAN,
        predicted: f64::NAN,
        ratio: f64::NAN,
        residual: f64::NAN,
        multiple: false,
    }
}

pub fn report_json(r: &SharpConstantReport) -> Value {
    let mut map = Map::new();
    map.insert("n".into(), Value::from(r.n));
    for (key, value) in REPORT_COLUMNS[1..].iter().zip(report_values(r)) {
        map.insert((*key).into(), json_number(value));
    }
    Value::Object(map)
}

/// Header-first CSV; header only when `rows` is empty.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()
}

pub fn report_row(r: &SharpConstantReport) -> Vec<String> {
    std::iter::once(r.n.to_string()).chain(report_values(r).into_iter().map(csv_number)).collect()
}

pub fn write_table<W: Write>(mut out: W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

pub fn write_reports<W: Write>(mut out: W, format: Format, reports: &[SharpConstantReport], single: bool) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, &REPORT_COLUMNS, &reports.iter().map(report_row).collect::<Vec<_>>()),
        Format::Table => write_table(out, &REPORT_COLUMNS, &reports.iter().map(report_row).collect::<Vec<_>>()),
        Format::Json => {
            let value = if single && reports.len() == 1 {
                report_json(&reports[0])
            } else {
                Value::Array(reports.iter().map(report_json).collect())
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_numbers_carry_seventeen_digits() {
        let v = json_number(3f64.sqrt());
        assert_eq!(v.to_string(), "1.7320508075688772e+0");
        assert_eq!(json_number(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(json_number(f64::NAN), Value::Null);
    }

    #[test]
    fn report_keys_in_schema_order() {
        let r = failed_report(3, 0.5, 1.0);
        let v = report_json(&r);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, REPORT_COLUMNS);
        assert_eq!(json_number(0.5).to_string(), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_header_only_for_empty() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &REPORT_COLUMNS, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,alpha,beta,lambda_min,m_n,predicted,ratio,residual\n");
    }

    #[test]
    fn csv_numbers_round_trip() {
        for x in [3f64.sqrt(), 1e-300, -0.5, 12345.678, 2.5e-17, 0.0] {
            assert_eq!(csv_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(csv_number(f64::NAN), "nan");
    }
}
