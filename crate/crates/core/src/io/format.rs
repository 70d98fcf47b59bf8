//! Plain-text number formatting and line-oriented parsing helpers.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{AmlpError, Result};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style rendering: fixed notation for decimal exponents in
/// `-4..9`, scientific otherwise, trailing zeros trimmed.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| AmlpError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| AmlpError::io(path, e))
}

pub(crate) fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> AmlpError {
    AmlpError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Non-blank lines not starting with `#`, numbered from 1.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::with_capacity(m.len() * 12);
    for row in m.rows() {
        for (j, &v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    write_text(path, &matrix_to_csv(m))
}

/// Reads a dense comma-separated matrix. Every row must have the same width.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = read_text(path)?;
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (line_no, line) in data_lines(&text) {
        let start = values.len();
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("'{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_error(path, line_no, format!("non-finite value '{field}'")));
            }
            values.push(v);
        }
        let w = values.len() - start;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("expected {expected} columns, found {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, width.unwrap_or(0)), values)
        .map_err(|e| AmlpError::invalid(format!("{}: {e}", path.display())))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_matches_g9() {
        let cases = [
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e9"),
            (0.0001, "0.0001"),
            (0.00001, "1e-5"),
            (2.0 / 3.0 * 1e-7, "6.66666667e-8"),
            (0.0, "0"),
        ];
        for (v, want) in cases {
            assert_eq!(format_float(v), want, "{v}");
        }
    }

    #[test]
    fn nine_digits_round_trip_f32() {
        for &v in &[0.1f32, 1.0 / 3.0, -7.654321e-12, 3.4e38, f32::MIN_POSITIVE] {
            let back: f64 = format_float(v as f64).parse().unwrap();
            assert_eq!(back as f32, v);
        }
    }

    #[test]
    fn short_decimals_round_trip_exactly() {
        for &v in &[0.25, -1.5, 0.123456789, 42.0, 1e-7, 6.02214076e23] {
            let back: f64 = format_float(v).parse().unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn csv_errors_carry_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_text(&p, "1,2\n# note\n3,x\n").unwrap();
        match read_matrix_csv(&p) {
            Err(AmlpError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        write_text(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_matrix_csv(&p), Err(AmlpError::Parse { line: 2, .. })));
    }
}
