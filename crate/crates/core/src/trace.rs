//! Zero-span spectrum-analyzer traces and their CSV interchange format.
//!
//! ```text
//! # qnl_dbm=-59.4
//! # dark_dbm=-70
//! # detection_frequency=4.25 MHz
//! index,x,power_dbm
//! 0,0,-55.1234567891
//! ...
//! ```
//!
//! Metadata lines come first, one `# key=value` per line. `qnl_dbm` and
//! `dark_dbm` are required and numeric (`dark_dbm` may be `-inf`); other keys
//! are free-form strings. The file is UTF-8 with LF line endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const CSV_HEADER: &str = "index,x,power_dbm";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub index: u64,
    /// Scan coordinate (acquisition time in sample units for synthetic traces).
    pub x: f64,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub qnl_dbm: f64,
    pub dark_dbm: f64,
    /// Free-form acquisition metadata (frequency, bandwidths, generator settings).
    pub extra: BTreeMap<String, String>,
}

impl TraceMeta {
    pub fn new(qnl_dbm: f64, dark_dbm: f64) -> Result<Self> {
        let meta = Self {
            qnl_dbm,
            dark_dbm,
            extra: BTreeMap::new(),
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.extra.insert(key.into(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra.get(key).map(String::as_str)
    }

    fn validate(&self) -> Result<()> {
        if !self.qnl_dbm.is_finite() {
            return Err(invalid("qnl_dbm", "must be finite"));
        }
        if self.dark_dbm.is_nan() || self.dark_dbm >= self.qnl_dbm {
            return Err(invalid(
                "dark_dbm",
                format!("{} must be below qnl_dbm = {}", self.dark_dbm, self.qnl_dbm),
            ));
        }
        for key in self.extra.keys() {
            if key == "qnl_dbm" || key == "dark_dbm" || key.is_empty() || key.contains(['=', '\n'])
            {
                return Err(invalid(
                    "metadata key",
                    format!("{key:?} is reserved or malformed"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    samples: Vec<Sample>,
    meta: TraceMeta,
}

impl Trace {
    pub fn new(samples: Vec<Sample>, meta: TraceMeta) -> Result<Self> {
        meta.validate()?;
        for (k, s) in samples.iter().enumerate() {
            if !s.x.is_finite() || !s.power_dbm.is_finite() {
                return Err(invalid("trace sample", format!("sample {k} is not finite")));
            }
            if k > 0 && s.index <= samples[k - 1].index {
                return Err(invalid(
                    "trace sample",
                    format!("index not increasing at sample {k}"),
                ));
            }
        }
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub(crate) fn meta_mut(&mut self) -> &mut TraceMeta {
        &mut self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.power_dbm).collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qnl_dbm={}", fmt_sig(self.meta.qnl_dbm));
        let _ = writeln!(out, "# dark_dbm={}", fmt_sig(self.meta.dark_dbm));
        for (k, v) in &self.meta.extra {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.index, fmt_sig(s.x), fmt_sig(s.power_dbm));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut qnl = None;
        let mut dark = None;
        let mut extra = BTreeMap::new();
        let mut header_seen = false;
        let mut samples = Vec::new();

        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let fail = |msg: String| Error::Format { line: lineno, msg };

            if !header_seen {
                if let Some(rest) = line.strip_prefix('#') {
                    let rest = rest.trim();
                    if rest.is_empty() {
                        continue;
                    }
                    let (key, value) = rest
                        .split_once('=')
                        .ok_or_else(|| fail(format!("metadata line without '=': {line:?}")))?;
                    let (key, value) = (key.trim(), value.trim());
                    match key {
                        "qnl_dbm" => qnl = Some(parse_num(value).map_err(fail)?),
                        "dark_dbm" => dark = Some(parse_num(value).map_err(fail)?),
                        _ => {
                            extra.insert(key.to_string(), value.to_string());
                        }
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                if line.trim() != CSV_HEADER {
                    return Err(fail(format!(
                        "expected header {CSV_HEADER:?}, got {line:?}"
                    )));
                }
                header_seen = true;
                continue;
            }

            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let (Some(i), Some(x), Some(p), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(fail(format!("expected 3 fields, got {line:?}")));
            };
            let index = i
                .trim()
                .parse::<u64>()
                .map_err(|e| fail(format!("bad index {i:?}: {e}")))?;
            samples.push(Sample {
                index,
                x: parse_num(x).map_err(fail)?,
                power_dbm: parse_num(p).map_err(fail)?,
            });
        }

        if !header_seen {
            return Err(Error::Format {
                line: 0,
                msg: format!("missing header row {CSV_HEADER:?}"),
            });
        }
        let missing = |k: &str| Error::Format {
            line: 0,
            msg: format!("missing required metadata key {k}"),
        };
        let meta = TraceMeta {
            qnl_dbm: qnl.ok_or_else(|| missing("qnl_dbm"))?,
            dark_dbm: dark.ok_or_else(|| missing("dark_dbm"))?,
            extra,
        };
        Self::new(samples, meta)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn parse_num(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| format!("bad number {s:?}: {e}"))
}

/// Formats a float with 12 significant digits in plain decimal notation,
/// trimming trailing zeros. Output is platform independent.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded = round_sig(x, 12);
    let magnitude = rounded.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    // round-trip through scientific formatting: exact decimal rounding
    format!("{:.*e}", (digits - 1) as usize, x)
        .parse()
        .unwrap_or(x)
}
