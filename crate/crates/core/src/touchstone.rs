//! Touchstone v1 two-port (`.s2p`) reader and writer.
//!
//! Grammar accepted:
//!
//! ```text
//! ! comment (anywhere, also trailing on a line)
//! # <HZ|KHZ|MHZ|GHZ> S <RI|MA|DB> R <ohms>
//! f  S11 S11  S21 S21  S12 S12  S22 S22
//! ```
//!
//! Option-line tokens are case-insensitive and may appear in any order;
//! omitted ones take the v1 defaults (GHz, MA, 50 Ω). Exactly one option line
//! must precede the data. Y/Z/H/G parameter files and v2.0 keyword files are
//! rejected.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            Self::Hz => 1.0,
            Self::KHz => 1e3,
            Self::MHz => 1e6,
            Self::GHz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            Self::Hz => "HZ",
            Self::KHz => "KHZ",
            Self::MHz => "MHZ",
            Self::GHz => "GHZ",
        }
    }
}

/// How each complex entry is written as a pair of numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// real, imaginary
    RealImag,
    /// linear magnitude, angle in degrees
    MagAngle,
    /// 20·log10 magnitude, angle in degrees
    DbAngle,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            Self::RealImag => "RI",
            Self::MagAngle => "MA",
            Self::DbAngle => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex<f64> {
        match self {
            Self::RealImag => Complex::new(a, b),
            Self::MagAngle => Complex::from_polar(a, b.to_radians()),
            Self::DbAngle => Complex::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLine {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    pub ref_impedance: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self { unit: FrequencyUnit::GHz, format: DataFormat::MagAngle, ref_impedance: 50.0 }
    }
}

/// One frequency row of a two-port file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortPoint<T> {
    pub freq: T,
    pub s11: Complex<T>,
    pub s21: Complex<T>,
    pub s12: Complex<T>,
    pub s22: Complex<T>,
}

/// Two-port S-parameters on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortTable<T> {
    points: Vec<TwoPortPoint<T>>,
    ref_impedance: T,
}

impl<T: Real> TwoPortTable<T> {
    pub fn new(points: Vec<TwoPortPoint<T>>, ref_impedance: T) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("two-port table has no points".into()));
        }
        if !(ref_impedance > T::zero()) {
            return Err(Error::InvalidArgument(format!("reference impedance {ref_impedance} must be positive")));
        }
        if let Some(i) = points.windows(2).position(|w| !(w[1].freq > w[0].freq)) {
            return Err(Error::InvalidArgument(format!("frequencies not strictly increasing at point {}", i + 1)));
        }
        Ok(Self { points, ref_impedance })
    }

    pub fn points(&self) -> &[TwoPortPoint<T>] {
        &self.points
    }

    pub fn ref_impedance(&self) -> T {
        self.ref_impedance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_freq(&self) -> T {
        self.points[0].freq
    }

    pub fn max_freq(&self) -> T {
        self.points[self.points.len() - 1].freq
    }

    /// S21 at `f`, linear in real and imaginary parts between neighbours.
    /// No extrapolation outside the table.
    pub fn interpolate_s21(&self, f: T) -> Result<Complex<T>> {
        if !(f >= self.min_freq() && f <= self.max_freq()) {
            return Err(Error::OutOfRange {
                what: "frequency",
                value: f.as_f64(),
                min: self.min_freq().as_f64(),
                max: self.max_freq().as_f64(),
            });
        }
        let upper = self.points.partition_point(|p| p.freq < f);
        let hi = &self.points[upper];
        if hi.freq == f {
            return Ok(hi.s21);
        }
        let lo = &self.points[upper - 1];
        let t = (f - lo.freq) / (hi.freq - lo.freq);
        Ok(lo.s21 + (hi.s21 - lo.s21) * t)
    }

    /// Grid frequency of the largest |S21|.
    pub fn peak_s21_frequency(&self) -> T {
        self.points
            .iter()
            .fold(None::<&TwoPortPoint<T>>, |best, p| match best {
                Some(b) if b.s21.norm_sqr() >= p.s21.norm_sqr() => Some(b),
                _ => Some(p),
            })
            .map(|p| p.freq)
            .expect("table is non-empty")
    }
}

/// Convenience wrapper for [`TwoPortTable::interpolate_s21`].
pub fn interpolate_s21<T: Real>(table: &TwoPortTable<T>, f: T) -> Result<Complex<T>> {
    table.interpolate_s21(f)
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

fn data_err(line: usize, message: impl Into<String>) -> Error {
    Error::Data { line, message: message.into() }
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine> {
    let mut opt = OptionLine::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.unit = FrequencyUnit::Hz,
            "KHZ" => opt.unit = FrequencyUnit::KHz,
            "MHZ" => opt.unit = FrequencyUnit::MHz,
            "GHZ" => opt.unit = FrequencyUnit::GHz,
            "S" => {}
            p @ ("Y" | "Z" | "H" | "G") => {
                return Err(Error::Unsupported(format!("line {line}: {p}-parameter files are not supported, only S")))
            }
            "RI" => opt.format = DataFormat::RealImag,
            "MA" => opt.format = DataFormat::MagAngle,
            "DB" => opt.format = DataFormat::DbAngle,
            "R" => {
                let value = tokens.next().ok_or_else(|| format_err(line, "option 'R' needs a resistance"))?;
                let r: f64 =
                    value.parse().map_err(|_| format_err(line, format!("bad reference resistance '{value}'")))?;
                if !(r > 0.0) || !r.is_finite() {
                    return Err(format_err(line, format!("reference resistance {r} must be positive")));
                }
                opt.ref_impedance = r;
            }
            other => return Err(format_err(line, format!("unknown option '{other}'"))),
        }
    }
    Ok(opt)
}

/// Parses a Touchstone v1 two-port file.
pub fn parse_touchstone<T: Real>(text: &str) -> Result<TwoPortTable<T>> {
    let mut option: Option<OptionLine> = None;
    let mut points: Vec<TwoPortPoint<T>> = Vec::new();
    let mut last_freq = f64::NEG_INFINITY;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            return Err(Error::Unsupported(format!(
                "line {line}: Touchstone 2.0 keyword '{content}' found; only version 1 files are supported"
            )));
        }
        if let Some(body) = content.strip_prefix('#') {
            if option.is_some() {
                return Err(format_err(line, "duplicate option line"));
            }
            option = Some(parse_option_line(body, line)?);
            continue;
        }

        let opt = option.ok_or_else(|| format_err(line, "data before option line ('# <unit> S <format> R <r>')"))?;
        let values = content
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| data_err(line, format!("not a number: '{t}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != 9 {
            return Err(data_err(line, format!("expected 9 columns for a two-port row, found {}", values.len())));
        }
        let freq = values[0] * opt.unit.multiplier();
        if !(freq > last_freq) {
            return Err(data_err(line, format!("frequency {freq:e} Hz does not increase (previous {last_freq:e} Hz)")));
        }
        last_freq = freq;
        let s = |k: usize| {
            let z = opt.format.decode(values[1 + 2 * k], values[2 + 2 * k]);
            Complex::new(T::lit(z.re), T::lit(z.im))
        };
        // two-port ordering: S11 S21 S12 S22
        points.push(TwoPortPoint { freq: T::lit(freq), s11: s(0), s21: s(1), s12: s(2), s22: s(3) });
    }

    let opt = option.ok_or_else(|| format_err(text.lines().count().max(1), "missing option line"))?;
    if points.is_empty() {
        return Err(data_err(text.lines().count().max(1), "no data rows"));
    }
    TwoPortTable::new(points, T::lit(opt.ref_impedance))
}

/// Serializes in RI format with frequencies in Hz. Uses the shortest
/// representation that parses back to the identical value.
pub fn write_touchstone<T: Real>(table: &TwoPortTable<T>) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} S {} R {:e}",
        FrequencyUnit::Hz.keyword(),
        DataFormat::RealImag.keyword(),
        table.ref_impedance()
    );
    for p in table.points() {
        let _ = write!(out, "{:e}", p.freq);
        for z in [p.s11, p.s21, p.s12, p.s22] {
            let _ = write!(out, " {:e} {:e}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}
