//! Deterministic CSV and JSON writing: 9 significant digits, '.' decimal
//! separator, comma delimiter, LF line endings.

use biphoton::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Format with exactly 9 significant digits; plain decimal notation in a
/// comfortable exponent range, scientific outside it, empty for None.
pub fn fmt_value(v: Option<f64>) -> String {
    let Some(v) = v else { return String::new() };
    if v == 0.0 {
        return "0.00000000".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else { "inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..=8).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

/// Write one CSV file with a header row; `rows` hold one formatted cell per
/// column (already through `fmt_value` or literal strings).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("cannot serialize summary: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                Error::Config(format!("cannot create directory {}: {e}", parent.display()))
            })?;
        }
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}
