//! The [`Series`] container and single-column CSV I/O.
//!
//! A series is a finite stretch of real observations indexed by integer time.
//! All estimation routines in this crate address observations through the
//! *logical* index `t` (by default starting at 1), which keeps window
//! arithmetic like "the N observations ending at t" readable and identical to
//! the usual textbook notation.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A finite, immutable stretch of real-valued observations.
///
/// Invariants enforced at construction:
///
/// * at least one observation,
/// * every value finite (no NaN or infinities).
///
/// The observation stored at position `i` carries the logical time index
/// `origin + i`; `origin` defaults to 1 so a freshly loaded series is
/// `x_1, …, x_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    origin: usize,
}

impl Series {
    /// Builds a series with logical indices starting at 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_origin(values, 1)
    }

    /// Builds a series whose first observation carries logical index `origin`.
    pub fn with_origin(values: Vec<f64>, origin: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { position: pos + 1 });
        }
        Ok(Series { values, origin })
    }

    /// Number of observations.
    #[allow(clippy::len_without_is_empty)] // the empty series is unrepresentable
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Logical index of the first observation.
    pub fn first_index(&self) -> usize {
        self.origin
    }

    /// Logical index of the last observation.
    pub fn last_index(&self) -> usize {
        self.origin + self.values.len() - 1
    }

    /// The raw observations in time order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observation at logical index `t`.
    ///
    /// # Panics
    /// If `t` is outside `first_index()..=last_index()`.
    pub fn value(&self, t: usize) -> f64 {
        self.values[self.position(t)]
    }

    /// Converts a logical index to a position into [`Series::values`].
    ///
    /// # Panics
    /// If `t` is outside the series (callers validate ranges first).
    pub(crate) fn position(&self, t: usize) -> usize {
        assert!(
            t >= self.origin && t <= self.last_index(),
            "logical index {t} outside series range {}..={}",
            self.origin,
            self.last_index()
        );
        t - self.origin
    }

    /// Returns a copy of the series centred by subtracting the arithmetic
    /// mean; the logical origin is preserved.
    ///
    /// Centring is idempotent: demeaning an already centred series returns it
    /// unchanged up to floating-point roundoff.
    pub fn demean(&self) -> Series {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        Series {
            values: self.values.iter().map(|v| v - mean).collect(),
            origin: self.origin,
        }
    }
}

/// Reads a single-column numeric CSV file into a [`Series`].
///
/// The format is one value per line, decimal point `.`, with an optional
/// single header line. A first line that does not parse as a number is
/// treated as the header; any later unparsable line is an error naming the
/// line number. Blank lines (and a trailing newline) are ignored.
pub fn read_series_csv<P: AsRef<Path>>(path: P) -> Result<Series> {
    let file = std::fs::File::open(path)?;
    read_series(std::io::BufReader::new(file))
}

/// Reads the single-column CSV format from any buffered reader.
pub fn read_series<R: BufRead>(reader: R) -> Result<Series> {
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        match text.parse::<f64>() {
            Ok(v) => values.push(v),
            // Only the very first line may be a non-numeric header.
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line: i + 1,
                    text: text.to_owned(),
                })
            }
        }
    }
    Series::new(values)
}

/// Writes a series as a single-column CSV file.
///
/// Pass `header` to emit a column name on the first line. Values are written
/// with 17 significant digits, which round-trips `f64` exactly through
/// [`read_series_csv`].
pub fn write_series_csv<P: AsRef<Path>>(
    path: P,
    series: &Series,
    header: Option<&str>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    if let Some(name) = header {
        writeln!(out, "{name}")?;
    }
    for v in series.values() {
        writeln!(out, "{}", format_value(*v))?;
    }
    out.flush()?;
    Ok(())
}

/// Formats a float with 17 significant digits (exact `f64` round-trip).
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}
