//! Parsing and formatting of `<number><unit>` quantities. Prefixes are
//! decimal; bit rates are converted to bytes at 8 bits per byte.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("empty quantity")]
    Empty,
    #[error("unknown unit in {0:?}")]
    UnknownUnit(String),
    #[error("invalid number in {0:?}")]
    BadNumber(String),
    #[error("quantity {0:?} must be finite and non-negative")]
    OutOfRange(String),
}

/// Bandwidth units with their size in bytes/s.
pub const BANDWIDTH_UNITS: [(&str, f64); 8] = [
    ("Gbps", 125_000_000.0),
    ("GB/s", 1e9),
    ("Mbps", 125_000.0),
    ("MB/s", 1e6),
    ("Kbps", 125.0),
    ("KB/s", 1e3),
    ("bps", 0.125),
    ("B/s", 1.0),
];

/// Size units with their size in bytes.
pub const SIZE_UNITS: [(&str, f64); 5] = [
    ("TB", 1e12),
    ("GB", 1e9),
    ("MB", 1e6),
    ("KB", 1e3),
    ("B", 1.0),
];

fn parse_with(s: &str, units: &[(&str, f64)], bare_ok: bool) -> Result<f64, UnitError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(UnitError::Empty);
    }
    // Longest suffix first so "KB/s" is not read as "K" + "B/s".
    let mut by_len: Vec<&(&str, f64)> = units.iter().collect();
    by_len.sort_by_key(|(name, _)| std::cmp::Reverse(name.len()));
    let (number, factor, matched) = match by_len.iter().find(|(name, _)| s.ends_with(name)) {
        Some((name, factor)) => (s[..s.len() - name.len()].trim_end(), *factor, true),
        None if bare_ok => (s, 1.0, false),
        None => return Err(UnitError::UnknownUnit(s.to_string())),
    };
    let value: f64 = number.parse().map_err(|_| {
        if !matched
            && number
                .chars()
                .any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        {
            UnitError::UnknownUnit(s.to_string())
        } else {
            UnitError::BadNumber(s.to_string())
        }
    })?;
    let bytes = value * factor;
    if !(bytes.is_finite() && bytes >= 0.0) {
        return Err(UnitError::OutOfRange(s.to_string()));
    }
    Ok(bytes)
}

/// Picks the first unit in which `bytes` prints as a number that parses back
/// to exactly `bytes`; units are tried largest first.
fn format_with(bytes: f64, units: &[(&str, f64)]) -> String {
    for (name, factor) in units {
        let value = bytes / factor;
        if value >= 1.0
            && value * factor == bytes
            && format!("{value}").parse::<f64>().ok() == Some(value)
        {
            return format!("{value}{name}");
        }
    }
    let (name, _) = units
        .iter()
        .find(|(_, f)| *f == 1.0)
        .expect("unit table has a base unit");
    format!("{bytes}{name}")
}

/// Parses a bandwidth such as `1Gbps` or `12.5MB/s` into bytes/s.
pub fn parse_bandwidth(s: &str) -> Result<f64, UnitError> {
    parse_with(s, &BANDWIDTH_UNITS, false)
}

pub fn format_bandwidth(bytes_per_s: f64) -> String {
    format_with(bytes_per_s, &BANDWIDTH_UNITS)
}

/// Parses a size such as `16B`, `1TB` or a bare byte count.
pub fn parse_size(s: &str) -> Result<f64, UnitError> {
    parse_with(s, &SIZE_UNITS, true)
}

pub fn format_size(bytes: f64) -> String {
    format_with(bytes, &SIZE_UNITS)
}
